"""KAF terms: syntax, printing, parsing, substitution and approximants.

Grammar of the textual form::

    r ::= 1 | 0 | name | r ; r | r (+) r | r* | X | mu X. r | mu^n X. r

``(+)`` binds weakest, then ``;``, then postfix ``*``.  A binder body
extends as far to the right as possible.  Names ending in ``?`` and the
reserved words ``next add reset push pop`` are basic expressions; any other
bare identifier is a variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import reduce

from .errors import NotAMuTerm, ParseError

__all__ = [
    "Term", "One", "Zero", "Basic", "Seq", "Choice", "Star", "Var", "Mu", "MuApprox",
    "seq", "choice", "power", "free_vars", "substitute", "approximant", "unfold",
    "simplify", "normalize", "pretty", "parse_term", "is_frame_local", "stack_shape",
    "STACK_BASICS", "is_basic_name",
]

STACK_BASICS = ("next", "add", "reset", "push", "pop")


def is_basic_name(name: str) -> bool:
    return name in STACK_BASICS or name.endswith("?")


class Term:
    """Base class of KAF terms.  Subclasses are frozen dataclasses."""

    fv: frozenset

    def __str__(self):
        return pretty(self)


def _set_fv(obj, fv):
    object.__setattr__(obj, "fv", frozenset(fv))


@dataclass(frozen=True)
class One(Term):
    fv: frozenset = field(default=frozenset(), init=False, compare=False, repr=False)


@dataclass(frozen=True)
class Zero(Term):
    fv: frozenset = field(default=frozenset(), init=False, compare=False, repr=False)


@dataclass(frozen=True)
class Basic(Term):
    name: str
    fv: frozenset = field(default=frozenset(), init=False, compare=False, repr=False)


@dataclass(frozen=True)
class Seq(Term):
    left: Term
    right: Term
    fv: frozenset = field(default=frozenset(), init=False, compare=False, repr=False)

    def __post_init__(self):
        _set_fv(self, self.left.fv | self.right.fv)


@dataclass(frozen=True)
class Choice(Term):
    left: Term
    right: Term
    fv: frozenset = field(default=frozenset(), init=False, compare=False, repr=False)

    def __post_init__(self):
        _set_fv(self, self.left.fv | self.right.fv)


@dataclass(frozen=True)
class Star(Term):
    body: Term
    fv: frozenset = field(default=frozenset(), init=False, compare=False, repr=False)

    def __post_init__(self):
        _set_fv(self, self.body.fv)


@dataclass(frozen=True)
class Var(Term):
    name: str
    fv: frozenset = field(default=frozenset(), init=False, compare=False, repr=False)

    def __post_init__(self):
        _set_fv(self, {self.name})


@dataclass(frozen=True)
class Mu(Term):
    var: str
    body: Term
    fv: frozenset = field(default=frozenset(), init=False, compare=False, repr=False)

    def __post_init__(self):
        _set_fv(self, self.body.fv - {self.var})


@dataclass(frozen=True)
class MuApprox(Term):
    """The n-th approximant of ``mu var. body``; only built by proof search."""

    var: str
    n: int
    body: Term
    fv: frozenset = field(default=frozenset(), init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("approximant index must be non-negative")
        _set_fv(self, self.body.fv - {self.var})


def seq(*terms: Term) -> Term:
    if not terms:
        return One()
    return reduce(lambda acc, t: Seq(t, acc), reversed(terms[:-1]), terms[-1])


def choice(*terms: Term) -> Term:
    if not terms:
        return Zero()
    return reduce(lambda acc, t: Choice(t, acc), reversed(terms[:-1]), terms[-1])


def power(t: Term, k: int) -> Term:
    return seq(*([t] * k)) if k else One()


def free_vars(t: Term) -> frozenset:
    return t.fv


# -- substitution and approximants --------------------------------------------

def _fresh(name, avoid):
    i = 1
    while f"{name}{i}" in avoid:
        i += 1
    return f"{name}{i}"


def substitute(r: Term, x: str, s: Term) -> Term:
    """Capture-avoiding substitution of ``s`` for the free occurrences of ``x``."""
    if x not in r.fv:
        return r
    if isinstance(r, Var):
        return s
    if isinstance(r, Seq):
        return Seq(substitute(r.left, x, s), substitute(r.right, x, s))
    if isinstance(r, Choice):
        return Choice(substitute(r.left, x, s), substitute(r.right, x, s))
    if isinstance(r, Star):
        return Star(substitute(r.body, x, s))
    if isinstance(r, (Mu, MuApprox)):
        y, body = r.var, r.body
        if y in s.fv:
            z = _fresh(y, s.fv | body.fv | {x})
            body = substitute(body, y, Var(z))
            y = z
        body = substitute(body, x, s)
        return Mu(y, body) if isinstance(r, Mu) else MuApprox(y, r.n, body)
    return r


def approximant(r: Term, n: int) -> MuApprox:
    if not isinstance(r, Mu):
        raise NotAMuTerm(f"expected a mu term, got {pretty(r)}")
    return MuApprox(r.var, n, r.body)


def unfold(r: MuApprox) -> Term:
    """One unfolding: ``mu^0`` is 0, ``mu^(n+1) X. r`` is ``r[mu^n X. r / X]``."""
    if r.n == 0:
        return Zero()
    return substitute(r.body, r.var, MuApprox(r.var, r.n - 1, r.body))


def simplify(t: Term) -> Term:
    """Apply the unit and zero laws of KA bottom-up.

    ``r;0 = 0`` and ``0;r = 0`` assume strict basic expressions, which holds
    for every additive semantics.  ``mu^0`` rewrites to 0 and binders whose
    variable does not occur are dropped.
    """
    if isinstance(t, Seq):
        a, b = simplify(t.left), simplify(t.right)
        if isinstance(a, Zero) or isinstance(b, Zero):
            return Zero()
        if isinstance(a, One):
            return b
        if isinstance(b, One):
            return a
        return Seq(a, b)
    if isinstance(t, Choice):
        a, b = simplify(t.left), simplify(t.right)
        if isinstance(a, Zero):
            return b
        if isinstance(b, Zero):
            return a
        return Choice(a, b)
    if isinstance(t, Star):
        b = simplify(t.body)
        return One() if isinstance(b, (Zero, One)) else Star(b)
    if isinstance(t, Mu):
        b = simplify(t.body)
        return b if t.var not in b.fv else Mu(t.var, b)
    if isinstance(t, MuApprox):
        if t.n == 0:
            return Zero()
        b = simplify(t.body)
        return b if t.var not in b.fv else MuApprox(t.var, t.n, b)
    return t


def _flatten(t, kind):
    if isinstance(t, kind):
        return _flatten(t.left, kind) + _flatten(t.right, kind)
    return [t]


def normalize(t: Term) -> Term:
    """Right-associate every ``;`` and ``(+)`` chain."""
    if isinstance(t, Seq):
        return seq(*[normalize(x) for x in _flatten(t, Seq)])
    if isinstance(t, Choice):
        return choice(*[normalize(x) for x in _flatten(t, Choice)])
    if isinstance(t, Star):
        return Star(normalize(t.body))
    if isinstance(t, Mu):
        return Mu(t.var, normalize(t.body))
    if isinstance(t, MuApprox):
        return MuApprox(t.var, t.n, normalize(t.body))
    return t


# -- stack discipline -----------------------------------------------------------

_ANY = "any"


def stack_shape(t: Term, env=None):
    """Net stack-depth change and lowest relative depth reached by ``t``.

    Returns ``(net, low)``, the marker ``"any"`` for terms that produce
    nothing (so fit any shape), or ``None`` when branches disagree.
    Variables are assumed depth-neutral unless ``env`` says otherwise.
    """
    env = env or {}
    if isinstance(t, Zero):
        return _ANY
    if isinstance(t, One):
        return (0, 0)
    if isinstance(t, Basic):
        if t.name == "push":
            return (1, 0)
        if t.name == "pop":
            return (-1, -1)
        return (0, 0)
    if isinstance(t, Var):
        return env.get(t.name, (0, 0))
    if isinstance(t, Seq):
        a, b = stack_shape(t.left, env), stack_shape(t.right, env)
        if a is None or b is None:
            return None
        if a == _ANY or b == _ANY:
            return _ANY
        return (a[0] + b[0], min(a[1], a[0] + b[1]))
    if isinstance(t, Choice):
        a, b = stack_shape(t.left, env), stack_shape(t.right, env)
        if a is None or b is None:
            return None
        if a == _ANY:
            return b
        if b == _ANY:
            return a
        if a[0] != b[0]:
            return None
        return (a[0], min(a[1], b[1]))
    if isinstance(t, Star):
        a = stack_shape(t.body, env)
        if a is None:
            return None
        if a == _ANY:
            return (0, 0)
        return (0, a[1]) if a[0] == 0 else None
    if isinstance(t, (Mu, MuApprox)):
        inner = stack_shape(t.body, {**env, t.var: (0, 0)})
        if inner is None:
            return None
        if inner == _ANY:
            return _ANY
        return (0, 0) if inner == (0, 0) else None
    return None


def is_frame_local(t: Term) -> bool:
    """True when a mu body keeps push/pop balanced and never digs below its entry depth."""
    if not isinstance(t, (Mu, MuApprox)):
        return False
    return stack_shape(t) is not None


# -- printing -----------------------------------------------------------------

def _wrap(s, cond):
    return f"({s})" if cond else s


def pretty(t: Term, level: int = 0) -> str:
    if isinstance(t, One):
        return "1"
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, Basic):
        return t.name
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Choice):
        s = " (+) ".join(pretty(x, 1) for x in _flatten(t, Choice))
        return _wrap(s, level > 0)
    if isinstance(t, Seq):
        s = "; ".join(pretty(x, 2) for x in _flatten(t, Seq))
        return _wrap(s, level > 1)
    if isinstance(t, Star):
        return pretty(t.body, 3) + "*"
    if isinstance(t, Mu):
        return _wrap(f"mu {t.var}. {pretty(t.body, 0)}", level > 0)
    if isinstance(t, MuApprox):
        return _wrap(f"mu^{t.n} {t.var}. {pretty(t.body, 0)}", level > 0)
    raise TypeError(f"not a term: {t!r}")


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<choice>\(\+\))|(?P<mu>mu(?:\^(?P<n>\d+))?(?![A-Za-z0-9_]))"
    r"|(?P<name>!?[A-Za-z0-9_][A-Za-z0-9_=<>'!]*\??)|(?P<sym>[;*().]))"
)


def _tokenize(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        if m.group("choice"):
            out.append(("(+)", None))
        elif m.group("mu"):
            out.append(("mu", int(m.group("n")) if m.group("n") else None))
        elif m.group("name"):
            out.append(("name", m.group("name")))
        else:
            out.append((m.group("sym"), None))
    return out


class _TermParser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, kind=None):
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of term")
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or tok[0]!r}")
        self.i += 1
        return tok

    def parse(self):
        t = self.choice()
        if self.peek() is not None:
            raise ParseError(f"trailing input at token {self.i}")
        return t

    def choice(self):
        parts = [self.seq()]
        while self.peek() == "(+)":
            self.take()
            parts.append(self.seq())
        return choice(*parts)

    def seq(self):
        parts = [self.postfix()]
        while self.peek() == ";":
            self.take()
            parts.append(self.postfix())
        return seq(*parts)

    def postfix(self):
        if self.peek() == "mu":
            return self.binder()
        t = self.atom()
        while self.peek() == "*":
            self.take()
            t = Star(t)
        return t

    def binder(self):
        _, n = self.take("mu")
        _, var = self.take("name")
        if is_basic_name(var) or var in ("0", "1"):
            raise ParseError(f"{var!r} cannot be bound")
        self.take(".")
        body = self.choice()
        return Mu(var, body) if n is None else MuApprox(var, n, body)

    def atom(self):
        kind, val = self.take()
        if kind == "(":
            t = self.choice()
            self.take(")")
            return t
        if kind == "name":
            if val == "1":
                return One()
            if val == "0":
                return Zero()
            if is_basic_name(val):
                return Basic(val)
            if val.startswith("!"):
                raise ParseError(f"negated name {val!r} must be a test ending in '?'")
            return Var(val)
        raise ParseError(f"unexpected token {kind!r}")


def parse_term(text: str) -> Term:
    return _TermParser(text).parse()
