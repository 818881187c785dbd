"""Formula syntax for ACTL, the mu-box calculus and universal PDL."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DialectViolation

__all__ = [
    "Formula", "TrueF", "FalseF", "Atom", "NegAtom", "And", "Or", "AX", "AF", "AG", "AU",
    "Box", "Var", "Mu", "Nu", "PdlBox", "PdlDiamond",
    "Prog", "Next", "Seq", "Choice", "Star", "Test",
    "DIALECTS", "validate", "infer_dialect", "free_vars", "subformulas", "format_formula",
    "format_prog", "depth",
]

DIALECTS = ("actl", "mu", "pdl")


class Formula:
    def __str__(self):
        return format_formula(self)


class Prog:
    def __str__(self):
        return format_prog(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    prop: str


@dataclass(frozen=True)
class NegAtom(Formula):
    prop: str


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class AX(Formula):
    body: Formula


@dataclass(frozen=True)
class AF(Formula):
    body: Formula


@dataclass(frozen=True)
class AG(Formula):
    body: Formula


@dataclass(frozen=True)
class AU(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Box(Formula):
    body: Formula


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Mu(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Nu(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class PdlBox(Formula):
    prog: Prog
    body: Formula


@dataclass(frozen=True)
class PdlDiamond(Formula):
    prog: Prog
    body: Formula


@dataclass(frozen=True)
class Next(Prog):
    pass


@dataclass(frozen=True)
class Seq(Prog):
    left: Prog
    right: Prog


@dataclass(frozen=True)
class Choice(Prog):
    left: Prog
    right: Prog


@dataclass(frozen=True)
class Star(Prog):
    body: Prog


@dataclass(frozen=True)
class Test(Prog):
    cond: Formula


_COMMON = (TrueF, FalseF, Atom, NegAtom, And, Or)
_ACTL = (AX, AF, AG, AU)
_MU = (Box, Var, Mu, Nu)
_PDL = (PdlBox, PdlDiamond)


def children(f):
    if isinstance(f, (And, Or, AU)):
        return (f.left, f.right)
    if isinstance(f, (AX, AF, AG, Box, Mu, Nu)):
        return (f.body,)
    if isinstance(f, (PdlBox, PdlDiamond)):
        return prog_formulas(f.prog) + (f.body,)
    return ()


def prog_formulas(p):
    if isinstance(p, (Seq, Choice)):
        return prog_formulas(p.left) + prog_formulas(p.right)
    if isinstance(p, Star):
        return prog_formulas(p.body)
    if isinstance(p, Test):
        return (p.cond,)
    return ()


def subformulas(f):
    yield f
    for c in children(f):
        yield from subformulas(c)


def depth(f) -> int:
    return 1 + max((depth(c) for c in children(f)), default=0)


def free_vars(f) -> frozenset:
    if isinstance(f, Var):
        return frozenset({f.name})
    if isinstance(f, (Mu, Nu)):
        return free_vars(f.body) - {f.var}
    out = frozenset()
    for c in children(f):
        out |= free_vars(c)
    return out


def infer_dialect(f) -> str:
    found = set()
    for g in subformulas(f):
        if isinstance(g, _ACTL):
            found.add("actl")
        elif isinstance(g, _MU):
            found.add("mu")
        elif isinstance(g, _PDL):
            found.add("pdl")
    if len(found) > 1:
        raise DialectViolation(f"formula mixes dialects: {', '.join(sorted(found))}")
    return found.pop() if found else "actl"


def _check_fixpoints(f, bound=()):
    if isinstance(f, (Mu, Nu)):
        if f.var in bound:
            raise DialectViolation(f"variable {f.var!r} is bound twice")
        extra = free_vars(f.body) - {f.var}
        if extra:
            raise DialectViolation(
                f"fixpoint on {f.var!r} depends on enclosing variable(s) {sorted(extra)}")
        bound = bound + (f.var,)
    for c in children(f):
        _check_fixpoints(c, bound)


def _check_pdl(f, existential):
    allowed = _COMMON + ((PdlDiamond,) if existential else (PdlBox,))
    if not isinstance(f, allowed):
        kind = "test or diamond" if existential else "top-level"
        raise DialectViolation(f"{type(f).__name__} not allowed in a {kind} PDL formula")
    if isinstance(f, (PdlBox, PdlDiamond)):
        for g in prog_formulas(f.prog):
            _check_pdl(g, True)
        _check_pdl(f.body, existential)
    elif isinstance(f, (And, Or)):
        _check_pdl(f.left, existential)
        _check_pdl(f.right, existential)


def validate(f, dialect: str | None = None) -> str:
    """Check ``f`` against ``dialect`` (inferred if omitted); return the dialect."""
    if dialect is None:
        dialect = infer_dialect(f)
    if dialect not in DIALECTS:
        raise DialectViolation(f"unknown dialect {dialect!r}")
    if dialect == "pdl":
        _check_pdl(f, False)
        return dialect
    allowed = _COMMON + (_ACTL if dialect == "actl" else _MU)
    for g in subformulas(f):
        if not isinstance(g, allowed):
            raise DialectViolation(f"{type(g).__name__} is not part of the {dialect} dialect")
    if dialect == "mu":
        _check_fixpoints(f)
    return dialect


# -- printing -----------------------------------------------------------------

def _paren(s, cond):
    return f"({s})" if cond else s


def format_formula(f, level=0) -> str:
    """ASCII rendering accepted back by the parser."""
    if isinstance(f, TrueF):
        return "tt"
    if isinstance(f, FalseF):
        return "ff"
    if isinstance(f, Atom):
        return f.prop
    if isinstance(f, NegAtom):
        return "!" + f.prop
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Or):
        return _paren(f"{format_formula(f.left, 1)} | {format_formula(f.right, 1)}", level > 1)
    if isinstance(f, And):
        return _paren(f"{format_formula(f.left, 2)} & {format_formula(f.right, 2)}", level > 2)
    if isinstance(f, (AX, AF, AG)):
        return f"{type(f).__name__} {format_formula(f.body, 3)}"
    if isinstance(f, Box):
        return f"[] {format_formula(f.body, 3)}"
    if isinstance(f, AU):
        return f"A[{format_formula(f.left)} U {format_formula(f.right)}]"
    if isinstance(f, (Mu, Nu)):
        kw = "mu" if isinstance(f, Mu) else "nu"
        return _paren(f"{kw} {f.var}. {format_formula(f.body)}", level > 0)
    if isinstance(f, PdlBox):
        return f"[{format_prog(f.prog)}] {format_formula(f.body, 3)}"
    if isinstance(f, PdlDiamond):
        return f"<{format_prog(f.prog)}> {format_formula(f.body, 3)}"
    raise TypeError(f"not a formula: {f!r}")


def format_prog(p, level=0) -> str:
    if isinstance(p, Next):
        return "next"
    if isinstance(p, Choice):
        return _paren(f"{format_prog(p.left, 1)} + {format_prog(p.right, 1)}", level > 1)
    if isinstance(p, Seq):
        return _paren(f"{format_prog(p.left, 2)}; {format_prog(p.right, 2)}", level > 2)
    if isinstance(p, Star):
        return format_prog(p.body, 3) + "*"
    if isinstance(p, Test):
        return f"({format_formula(p.cond)})?"
    raise TypeError(f"not a program: {p!r}")
