import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_kaf
from moka import kaf as K
from moka.errors import NotAMuTerm, ParseError

X = K.Var("X")
NEXT = K.Basic("next")


def test_substitute_replaces_free_variable():
    assert K.substitute(X, "X", K.One()) == K.One()


def test_substitute_leaves_bound_variable():
    t = K.Mu("X", K.Seq(NEXT, X))
    assert K.substitute(t, "X", K.One()) == t


def test_substitute_avoids_capture():
    t = K.Mu("Y", K.Seq(K.Var("X"), K.Var("Y")))
    out = K.substitute(t, "X", K.Var("Y"))
    assert isinstance(out, K.Mu) and out.var != "Y"
    assert K.free_vars(out) == {"Y"}


def test_free_vars():
    t = K.Seq(K.Mu("X", K.Seq(X, K.Var("Y"))), X)
    assert K.free_vars(t) == {"X", "Y"}


def test_approximant_requires_mu():
    with pytest.raises(NotAMuTerm):
        K.approximant(NEXT, 1)
    a = K.approximant(K.Mu("X", X), 3)
    assert isinstance(a, K.MuApprox) and a.n == 3


def test_first_approximant_drops_recursive_branch():
    r1 = K.parse_term("loop?")
    body = K.Choice(r1, K.seq(K.Basic("add"), NEXT, X))
    mu1 = K.unfold(K.approximant(K.Mu("X", body), 1))
    assert K.simplify(mu1) == r1


def test_simplify_unit_laws():
    assert K.simplify(K.Seq(K.One(), NEXT)) == NEXT
    assert K.simplify(K.Seq(K.Zero(), NEXT)) == K.Zero()
    assert K.simplify(K.Choice(K.Zero(), NEXT)) == NEXT
    assert K.simplify(K.MuApprox("X", 0, NEXT)) == K.Zero()
    assert K.simplify(K.Mu("X", NEXT)) == NEXT


def test_pretty_examples():
    t = K.seq(K.Basic("push"), K.Star(NEXT), K.Basic("rd?"), K.Basic("pop"))
    assert K.pretty(t) == "push; next*; rd?; pop"
    assert K.pretty(K.Choice(K.Basic("p?"), K.Seq(NEXT, X))) == "p? (+) next; X"


@settings(max_examples=200)
@given(st.integers(0, 10**6))
def test_parse_pretty_round_trip(seed):
    # pretty flattens associative chains, so compare printed forms
    t = random_kaf(random.Random(seed), names=("next", "push", "pop", "p?", "!q?", "loop?"))
    text = K.pretty(t)
    assert K.pretty(K.parse_term(text)) == text


def test_parse_errors():
    with pytest.raises(ParseError):
        K.parse_term("push; ")
    with pytest.raises(ParseError):
        K.parse_term("(next")


def test_parse_names():
    assert K.parse_term("mu X. loop? (+) X") == K.Mu("X", K.Choice(K.Basic("loop?"), X))
    assert K.parse_term("n=3?") == K.Basic("n=3?")


def test_stack_shapes():
    assert K.stack_shape(K.parse_term("push; next; pop")) == (0, 0)
    assert K.stack_shape(K.parse_term("pop; push")) == (0, -1)
    assert K.stack_shape(K.parse_term("push (+) next")) is None
    assert K.stack_shape(K.Zero()) == "any"


def test_frame_locality():
    assert K.is_frame_local(K.parse_term("mu X. p? (+) push; next; X; pop"))
    assert not K.is_frame_local(K.parse_term("mu X. p? (+) push; X"))
    assert not K.is_frame_local(K.parse_term("mu X. pop; X; push"))
    assert not K.is_frame_local(NEXT)
