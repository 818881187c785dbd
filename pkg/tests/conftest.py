import os
import sys
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("deterministic", derandomize=True, database=None)
settings.register_profile("explore", derandomize=False)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "deterministic"))

sys.path.insert(0, str(Path(__file__).parent))

from helpers import DATA  # noqa: E402

from moka.abstract import StackDomain  # noqa: E402
from moka.abstraction import (  # noqa: E402
    build_predicate_abstraction, load_predicates, load_state_abstraction,
)
from moka.transition import cfg_to_ts, load_cfg, load_ts  # noqa: E402


@pytest.fixture(scope="session")
def light():
    return load_ts(DATA / "light.json")


@pytest.fixture(scope="session")
def fig1(light):
    return load_state_abstraction(DATA / "figure1.json", light)


@pytest.fixture
def fig1_id(fig1):
    return StackDomain(fig1, "id")


@pytest.fixture
def fig1_total(fig1):
    return StackDomain(fig1, "total")


@pytest.fixture(scope="session")
def cfg_c():
    return load_cfg(DATA / "program_c.json")


@pytest.fixture(scope="session")
def preds_c():
    return load_predicates(DATA / "predicates_c.json")


@pytest.fixture(scope="session")
def ts_c(cfg_c, preds_c):
    return cfg_to_ts(cfg_c, preds_c[0])


@pytest.fixture(scope="session")
def pred_c(ts_c, preds_c):
    preds, per_node = preds_c
    return build_predicate_abstraction(preds, ts_c, per_node)
