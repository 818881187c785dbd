import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import DATA, random_ts
from moka.errors import InconsistentLabeling, ModulusZero, NotTotal, ParseError, UnknownState
from moka.transition import Cfg, cfg_to_ts, parse_cfg, parse_ts, serialize_ts


def test_light_fixture_shape(light):
    assert light.n == 6
    assert len(light.edges) == 11
    assert light.post({"rs"}) == {"rs", "gs"}


def test_post_of_empty_and_green(light):
    assert light.post(set()) == frozenset()
    assert light.post({"gs", "gd"}) == {"gd", "yd"}


def test_single_state_without_props():
    ts = parse_ts('{"states": ["x"], "edges": [["x", "x"]]}')
    assert ts.n == 1 and ts.label_mask("tt") == 1


def test_missing_successor_names_the_state():
    data = json.loads((DATA / "light.json").read_text())
    data["edges"].remove(["yd", "ys"])
    with pytest.raises(NotTotal, match="yd"):
        parse_ts(json.dumps(data))


def test_malformed_and_inconsistent_inputs():
    with pytest.raises(ParseError):
        parse_ts("{not json")
    with pytest.raises(ParseError):
        parse_ts('{"states": ["x"]}')
    with pytest.raises(InconsistentLabeling):
        parse_ts('{"states": ["x"], "props": {"x": ["p", "!p"]}, "edges": [["x", "x"]]}')
    with pytest.raises(UnknownState):
        parse_ts('{"states": ["x"], "edges": [["x", "y"]]}')


def test_negations_are_synthesized(light):
    for p in light.positive_props:
        assert light.label_mask(p) ^ light.label_mask("!" + p) == light.all_mask
    assert light.label_mask("tt") == light.all_mask


@settings(max_examples=50)
@given(st.integers(0, 10**6))
def test_serialize_round_trip(seed):
    ts = random_ts(random.Random(seed))
    back = parse_ts(serialize_ts(ts))
    assert back.states == ts.states and back.succ == ts.succ
    assert back.init_mask == ts.init_mask and back.labels == ts.labels


@settings(max_examples=50)
@given(st.integers(0, 10**6), st.integers(0, 63), st.integers(0, 63))
def test_post_is_additive(seed, x, y):
    ts = random_ts(random.Random(seed))
    x &= ts.all_mask
    y &= ts.all_mask
    assert ts.post_mask(x | y) == ts.post_mask(x) | ts.post_mask(y)


def test_program_c_unfolding(ts_c):
    assert ts_c.n == 5 * 2 ** 4
    assert "(1,1101)" in ts_c.post({"(s,0111)"})
    assert ts_c.post({"(3,1111)"}) == {"(e,1111)"}
    for s in ts_c.states:
        if s.startswith("(e,"):
            assert s in ts_c.post({s})


def test_program_c_initial_states(ts_c):
    assert len(ts_c.init) == 16
    assert all(s.startswith("(s,") for s in ts_c.init)


def test_program_c_labels(ts_c):
    assert ts_c.label_mask("n=3") == ts_c.layout.node_mask("3")
    assert "p" in ts_c.labeling("(3,1100)") and "q" in ts_c.labeling("(3,1100)")
    assert "!p" in ts_c.labeling("(3,0111)") and "!q" in ts_c.labeling("(3,0111)")


def test_cfg_single_end_node():
    cfg = parse_cfg('{"nodes": ["e"], "start": "e", "end": "e", "vars": ["x"], "modulus": 3,'
                    ' "edges": []}')
    ts = cfg_to_ts(cfg)
    assert ts.n == 3
    assert all(ts.succ[i] == (i,) for i in range(ts.n))


def test_modulus_zero():
    with pytest.raises(ModulusZero):
        cfg_to_ts(Cfg(nodes=("e",), start="e", end="e", vars=("x",), modulus=0, edges=()))


def test_cfg_modulus_override(cfg_c):
    ts = cfg_to_ts(parse_cfg((DATA / "program_c.json").read_text(), modulus=3))
    assert ts.n == 5 * 3 ** 4
