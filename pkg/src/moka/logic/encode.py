"""Compilation of formulas into MOKA programs whose runs are counterexamples.

``encode(f)`` builds the program ``PtoR(f)``: run on a set of stacks it keeps
exactly the stacks whose current state violates ``f``.  Existential PDL
subformulas and programs compile through ``PtoE``, which keeps the stacks
whose current state satisfies the formula (or reaches along the program).
"""

from __future__ import annotations

from .. import kaf as K
from ..errors import DialectViolation
from .formula import (
    AF, AG, AU, AX, And, Atom, Box, Choice, FalseF, Mu, NegAtom, Next, Nu, Or, PdlBox,
    PdlDiamond, Seq, Star, Test, TrueF, Var, validate,
)

__all__ = ["encode", "encode_exists", "translate_actl_to_mu", "kaf_var", "test_name"]

PUSH, POP, NEXT = K.Basic("push"), K.Basic("pop"), K.Basic("next")
ADD, RESET = K.Basic("add"), K.Basic("reset")
LOOP, NOT_LOOP = K.Basic("loop?"), K.Basic("!loop?")


def test_name(prop: str, positive: bool) -> str:
    return f"{prop}?" if positive else f"!{prop}?"


def kaf_var(name: str) -> str:
    return name.upper()


def _enc(f, variant):
    if isinstance(f, TrueF):
        return K.Zero()
    if isinstance(f, FalseF):
        return K.One()
    if isinstance(f, Atom):
        return K.Basic(test_name(f.prop, False))
    if isinstance(f, NegAtom):
        return K.Basic(test_name(f.prop, True))
    if isinstance(f, And):
        return K.Choice(_enc(f.left, variant), _enc(f.right, variant))
    if isinstance(f, Or):
        return K.Seq(_enc(f.left, variant), _enc(f.right, variant))
    if isinstance(f, (AX, Box)):
        return K.seq(PUSH, NEXT, _enc(f.body, variant), POP)
    if isinstance(f, AG):
        return K.seq(PUSH, K.Star(NEXT), _enc(f.body, variant), POP)
    if isinstance(f, AF):
        r = _enc(f.body, variant)
        return K.seq(r, PUSH, RESET, K.Star(K.seq(ADD, NEXT, r)), LOOP, POP)
    if isinstance(f, AU):
        r1, r2 = _enc(f.left, variant), _enc(f.right, variant)
        return K.seq(r2, PUSH, RESET, K.Star(K.seq(ADD, NEXT, r2)), K.Choice(LOOP, r1), POP)
    if isinstance(f, Var):
        return K.Var(kaf_var(f.name))
    if isinstance(f, Mu):
        x, body = kaf_var(f.var), _enc(f.body, variant)
        if variant == "negloop":
            inner = K.Choice(K.seq(NOT_LOOP, ADD, body), LOOP)
        else:
            inner = K.Choice(LOOP, K.Seq(ADD, body))
        return K.seq(PUSH, RESET, K.Mu(x, inner), POP)
    if isinstance(f, Nu):
        x, body = kaf_var(f.var), _enc(f.body, variant)
        if variant == "negloop":
            return K.seq(PUSH, RESET, K.Mu(x, K.seq(NOT_LOOP, ADD, body)), POP)
        return K.Mu(x, body)
    if isinstance(f, PdlBox):
        return K.seq(PUSH, _enc_prog(f.prog), _enc(f.body, variant), POP)
    raise DialectViolation(f"{type(f).__name__} cannot occur in a universal position")


def _enc_exists(f):
    if isinstance(f, TrueF):
        return K.One()
    if isinstance(f, FalseF):
        return K.Zero()
    if isinstance(f, Atom):
        return K.Basic(test_name(f.prop, True))
    if isinstance(f, NegAtom):
        return K.Basic(test_name(f.prop, False))
    if isinstance(f, And):
        return K.Seq(_enc_exists(f.left), _enc_exists(f.right))
    if isinstance(f, Or):
        return K.Choice(_enc_exists(f.left), _enc_exists(f.right))
    if isinstance(f, PdlDiamond):
        return K.seq(PUSH, _enc_prog(f.prog), _enc_exists(f.body), POP)
    raise DialectViolation(f"{type(f).__name__} cannot occur in an existential position")


def _enc_prog(p):
    if isinstance(p, Next):
        return NEXT
    if isinstance(p, Seq):
        return K.Seq(_enc_prog(p.left), _enc_prog(p.right))
    if isinstance(p, Choice):
        return K.Choice(_enc_prog(p.left), _enc_prog(p.right))
    if isinstance(p, Star):
        return K.Star(_enc_prog(p.body))
    if isinstance(p, Test):
        return _enc_exists(p.cond)
    raise TypeError(f"not a program: {p!r}")


def encode(f, dialect: str | None = None, variant: str = "standard") -> K.Term:
    """The counterexample program of ``f``.

    ``variant="negloop"`` selects the alternative fixpoint encoding whose
    iterations are guarded by ``!loop?``; it only differs on mu and nu.
    """
    if variant not in ("standard", "negloop"):
        raise ValueError(f"unknown encoding variant {variant!r}")
    validate(f, dialect)
    return _enc(f, variant)


def encode_exists(f) -> K.Term:
    """The filter keeping stacks whose current state satisfies an existential formula."""
    return _enc_exists(f)


def translate_actl_to_mu(f, _fresh=None):
    """Rewrite temporal operators as single-variable fixpoints over ``[]``."""
    counter = _fresh if _fresh is not None else [0]

    def fresh():
        counter[0] += 1
        return f"z{counter[0]}"

    def go(g):
        if isinstance(g, (TrueF, FalseF, Atom, NegAtom)):
            return g
        if isinstance(g, And):
            return And(go(g.left), go(g.right))
        if isinstance(g, Or):
            return Or(go(g.left), go(g.right))
        if isinstance(g, AX):
            return Box(go(g.body))
        if isinstance(g, AF):
            x = fresh()
            return Mu(x, Or(go(g.body), Box(Var(x))))
        if isinstance(g, AG):
            x = fresh()
            return Nu(x, And(go(g.body), Box(Var(x))))
        if isinstance(g, AU):
            x = fresh()
            return Mu(x, Or(go(g.right), And(go(g.left), Box(Var(x)))))
        raise DialectViolation(f"{type(g).__name__} is not an ACTL operator")

    validate(f, "actl")
    return go(f)
