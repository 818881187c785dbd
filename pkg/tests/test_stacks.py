import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_ts
from moka.errors import UnknownBasic, UnknownProp
from moka.stacks import (
    current_mask, current_states, eval_basic, format_stack, format_stack_set, lift_states,
)

BASICS = ("next", "add", "reset", "push", "pop", "loop?", "!loop?")


def frame(ts, name, trace=()):
    return (ts.index[name], ts.mask(trace))


def test_lift_states(light, ts_c):
    assert lift_states(light, 0) == frozenset()
    assert lift_states(light, ["rs"]) == {((light.index["rs"], 0),)}
    assert len(lift_states(ts_c, ts_c.init_mask)) == 16


def test_red_dark_filter_on_the_other_states(light):
    S = lift_states(light, ["rs", "gs", "gd", "yd", "ys"])
    assert eval_basic("rd?", S, light) == frozenset()


def test_next_from_green_steady(light):
    out = eval_basic("next", lift_states(light, ["gs"]), light)
    assert current_states(out, light) == {"gd", "yd"}
    assert all(len(s) == 1 and s[0][1] == 0 for s in out)


def test_push_then_pop_restores(light):
    s = (frame(light, "gs", ["gs"]), frame(light, "rs"))
    pushed = eval_basic("push", {s}, light)
    assert pushed == {(s[0],) + s}
    assert eval_basic("pop", pushed, light) == {s}


def test_pop_drops_single_frame_stacks(light):
    assert eval_basic("pop", lift_states(light, light.all_mask), light) == frozenset()


def test_trace_operations(light):
    s = ((light.index["gd"], light.mask(["rs"])),)
    added = eval_basic("add", {s}, light)
    assert added == {((light.index["gd"], light.mask(["rs", "gd"])),)}
    assert eval_basic("loop?", added, light) == added
    assert eval_basic("!loop?", added, light) == frozenset()
    assert eval_basic("reset", added, light) == {((light.index["gd"], 0),)}


def test_negation_spellings(light):
    S = lift_states(light, light.all_mask)
    assert eval_basic("¬g?", S, light) == eval_basic("!g?", S, light)


def test_current_states_and_format(light):
    assert current_states(frozenset(), light) == frozenset()
    s = (frame(light, "rs"), frame(light, "gs", ["gs"]))
    assert current_states({s}, light) == {"rs"}
    assert format_stack(s, light) == "<rs|{}> :: <gs|{gs}>"
    assert format_stack_set({s}, light) == ["<rs|{}> :: <gs|{gs}>"]


def test_errors(light):
    S = lift_states(light, ["rs"])
    with pytest.raises(UnknownBasic):
        eval_basic("jump", S, light)
    with pytest.raises(UnknownProp):
        eval_basic("nope?", S, light)


# -- properties ----------------------------------------------------------------

def random_stacks(ts, rng, k=4, depth=3):
    return frozenset(
        tuple((rng.randrange(ts.n), rng.getrandbits(ts.n)) for _ in range(rng.randint(1, depth)))
        for _ in range(rng.randint(0, k)))


def _case(seed):
    rng = random.Random(seed)
    ts = random_ts(rng)
    tests = [f"{p}?" for p in ts.test_props] + [f"!{p}?" for p in ts.test_props]
    return rng, ts, tests


seeds = st.integers(0, 10**6)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_basics_are_additive(seed):
    rng, ts, tests = _case(seed)
    S1, S2 = random_stacks(ts, rng), random_stacks(ts, rng)
    for name in BASICS + tuple(tests):
        assert eval_basic(name, S1 | S2, ts) == eval_basic(name, S1, ts) | eval_basic(name, S2, ts)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_filters_partition(seed):
    rng, ts, _ = _case(seed)
    S = random_stacks(ts, rng)
    for p in ts.test_props:
        yes, no = eval_basic(f"{p}?", S, ts), eval_basic(f"!{p}?", S, ts)
        assert yes | no == S and not yes & no
    yes, no = eval_basic("loop?", S, ts), eval_basic("!loop?", S, ts)
    assert yes | no == S and not yes & no


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_push_keeps_traces_and_pop_undoes_it(seed):
    rng, ts, _ = _case(seed)
    S = random_stacks(ts, rng)
    pushed = eval_basic("push", S, ts)
    assert eval_basic("pop", pushed, ts) == S
    assert {s[1:] for s in pushed} == S
    assert current_mask(pushed) == current_mask(S)
