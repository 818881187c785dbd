"""Finite lattices, Galois connections and the two adjunction constructors.

Lattices here are explicit tables over opaque hashable element ids.  The
powerset of a small finite set is available as :class:`PowersetLattice`,
which computes order, joins and meets on frozensets directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, Mapping

from .errors import IncompatibleEquivalence, IterationBudgetExceeded, NonMonotone

__all__ = [
    "FiniteLattice",
    "PowersetLattice",
    "LatticeReport",
    "validate_lattice",
    "lfp",
    "GaloisConnection",
    "image_adjunction",
    "CompatibleEquivalence",
    "group_join",
    "equiv_alpha",
    "equiv_gamma",
    "equiv_leq",
]


class FiniteLattice:
    """A finite lattice given by its elements and order relation.

    ``leq`` may be a predicate or a collection of ``(a, b)`` pairs.  Joins
    and meets are found by scanning for the least upper (greatest lower)
    bound unless explicit tables are supplied; explicit tables are taken at
    face value, which is what lets :func:`validate_lattice` diagnose a bad
    declaration.
    """

    def __init__(
        self,
        elements: Iterable[Hashable],
        leq: Callable[[Any, Any], bool] | Iterable[tuple[Any, Any]],
        join: Mapping[tuple[Any, Any], Any] | None = None,
        meet: Mapping[tuple[Any, Any], Any] | None = None,
        bot: Hashable | None = None,
        top: Hashable | None = None,
    ):
        self.elements = tuple(elements)
        if callable(leq):
            self._leq = {(a, b) for a in self.elements for b in self.elements if leq(a, b)}
        else:
            self._leq = set(leq)
        self._join_table = dict(join or {})
        self._meet_table = dict(meet or {})
        self.bot = bot if bot is not None else self._extreme(lower=True)
        self.top = top if top is not None else self._extreme(lower=False)

    def _extreme(self, lower):
        for x in self.elements:
            if all(((x, y) if lower else (y, x)) in self._leq for y in self.elements):
                return x
        return None

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def leq(self, a, b) -> bool:
        return (a, b) in self._leq

    def upper_bounds(self, a, b):
        return [u for u in self.elements if self.leq(a, u) and self.leq(b, u)]

    def lower_bounds(self, a, b):
        return [u for u in self.elements if self.leq(u, a) and self.leq(u, b)]

    def _least(self, candidates):
        for c in candidates:
            if all(self.leq(c, d) for d in candidates):
                return c
        return None

    def _greatest(self, candidates):
        for c in candidates:
            if all(self.leq(d, c) for d in candidates):
                return c
        return None

    def join(self, a, b):
        if (a, b) in self._join_table:
            return self._join_table[(a, b)]
        if (b, a) in self._join_table:
            return self._join_table[(b, a)]
        return self._least(self.upper_bounds(a, b))

    def meet(self, a, b):
        if (a, b) in self._meet_table:
            return self._meet_table[(a, b)]
        if (b, a) in self._meet_table:
            return self._meet_table[(b, a)]
        return self._greatest(self.lower_bounds(a, b))

    def join_all(self, xs):
        acc = self.bot
        for x in xs:
            acc = self.join(acc, x)
        return acc

    def meet_all(self, xs):
        acc = self.top
        for x in xs:
            acc = self.meet(acc, x)
        return acc


class PowersetLattice:
    """The powerset of a finite universe ordered by inclusion."""

    def __init__(self, universe: Iterable[Hashable]):
        self.universe = frozenset(universe)
        self.bot = frozenset()
        self.top = self.universe

    @property
    def elements(self):
        items = sorted(self.universe, key=repr)
        return tuple(
            frozenset(c)
            for r in range(len(items) + 1)
            for c in itertools.combinations(items, r)
        )

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return 2 ** len(self.universe)

    def leq(self, a, b):
        return a <= b

    def join(self, a, b):
        return a | b

    def meet(self, a, b):
        return a & b

    def join_all(self, xs):
        return frozenset().union(*xs)

    def meet_all(self, xs):
        acc = self.universe
        for x in xs:
            acc = acc & x
        return acc


@dataclass(frozen=True)
class LatticeReport:
    ok: bool
    law: str = ""
    witness: tuple = ()

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ok"
        return f"{self.law}: witness {self.witness}"


def validate_lattice(lat) -> LatticeReport:
    """Check every finite-lattice law exhaustively; report the first failure."""
    els = tuple(lat.elements)
    for a in els:
        if not lat.leq(a, a):
            return LatticeReport(False, "leq not reflexive", (a,))
    for a, b in itertools.product(els, repeat=2):
        if a != b and lat.leq(a, b) and lat.leq(b, a):
            return LatticeReport(False, "leq not antisymmetric", (a, b))
    for a, b, c in itertools.product(els, repeat=3):
        if lat.leq(a, b) and lat.leq(b, c) and not lat.leq(a, c):
            return LatticeReport(False, "leq not transitive", (a, b, c))
    for a, b in itertools.product(els, repeat=2):
        j = lat.join(a, b)
        if j is None:
            return LatticeReport(False, "no least upper bound", (a, b))
        if not (lat.leq(a, j) and lat.leq(b, j)):
            return LatticeReport(False, "join not an upper bound", (a, b, j))
        for u in els:
            if lat.leq(a, u) and lat.leq(b, u) and not lat.leq(j, u):
                return LatticeReport(False, "join not least upper bound", (a, b, j, u))
        m = lat.meet(a, b)
        if m is None:
            return LatticeReport(False, "no greatest lower bound", (a, b))
        if not (lat.leq(m, a) and lat.leq(m, b)):
            return LatticeReport(False, "meet not a lower bound", (a, b, m))
        for u in els:
            if lat.leq(u, a) and lat.leq(u, b) and not lat.leq(u, m):
                return LatticeReport(False, "meet not greatest lower bound", (a, b, m, u))
    for x in els:
        if lat.bot is None or not lat.leq(lat.bot, x):
            return LatticeReport(False, "bot not least", (lat.bot, x))
        if lat.top is None or not lat.leq(x, lat.top):
            return LatticeReport(False, "top not greatest", (lat.top, x))
    return LatticeReport(True)


def lfp(f, lattice=None, start=None, budget=100_000, leq=None):
    """Limit of the Kleene chain of ``f`` from ``start`` (default: bottom).

    A strictly decreasing or incomparable iterate raises :class:`NonMonotone`.
    """
    if leq is None:
        leq = lattice.leq
    x = lattice.bot if start is None else start
    for _ in range(budget):
        y = f(x)
        if y == x:
            return x
        if not leq(x, y):
            raise NonMonotone(f"iterate {y!r} is not above {x!r}")
        x = y
    raise IterationBudgetExceeded(f"no fixpoint within {budget} iterations")


class GaloisConnection:
    """A pair of maps between two lattices, intended to be adjoint."""

    def __init__(self, concrete, abstract, alpha, gamma):
        self.concrete = concrete
        self.abstract = abstract
        self.alpha = alpha
        self.gamma = gamma

    def adjunction_violations(self, concrete_elems=None, abstract_elems=None):
        """Pairs ``(c, a)`` breaking ``alpha(c) <= a  iff  c <= gamma(a)``."""
        cs = self.concrete.elements if concrete_elems is None else concrete_elems
        as_ = self.abstract.elements if abstract_elems is None else abstract_elems
        bad = []
        for c in cs:
            ac = self.alpha(c)
            for a in as_:
                if self.abstract.leq(ac, a) != self.concrete.leq(c, self.gamma(a)):
                    bad.append((c, a))
        return bad

    def is_adjoint(self, concrete_elems=None, abstract_elems=None):
        return not self.adjunction_violations(concrete_elems, abstract_elems)


def image_adjunction(f, domain, codomain=None) -> GaloisConnection:
    """Direct image / inverse image of ``f`` between the two powersets."""
    dom = frozenset(domain)
    cod = frozenset(codomain) if codomain is not None else frozenset(f(x) for x in dom)
    return GaloisConnection(
        PowersetLattice(dom),
        PowersetLattice(cod),
        alpha=lambda xs: frozenset(f(x) for x in xs),
        gamma=lambda ys: frozenset(x for x in dom if f(x) in ys),
    )


class CompatibleEquivalence:
    """An equivalence on a lattice, given by a class-key function."""

    def __init__(self, carrier, class_of: Callable[[Any], Hashable] | Mapping):
        self.carrier = carrier
        if isinstance(class_of, Mapping):
            table = dict(class_of)
            self.class_of = lambda x: table.get(x, ("singleton", x))
        else:
            self.class_of = class_of

    def equiv(self, a, b):
        return self.class_of(a) == self.class_of(b)

    def classes(self):
        out: dict = {}
        for x in self.carrier.elements:
            out.setdefault(self.class_of(x), []).append(x)
        return list(out.values())

    def violations(self):
        """Pairs in one class whose join leaves the class."""
        bad = []
        for cls in self.classes():
            for a, b in itertools.combinations(cls, 2):
                j = self.carrier.join(a, b)
                if not self.equiv(j, a):
                    bad.append((a, b, j))
        return bad

    def validate(self):
        bad = self.violations()
        if bad:
            a, b, j = bad[0]
            raise IncompatibleEquivalence(f"join of {a!r} and {b!r} is {j!r}, outside their class")
        return self


def group_join(items, key, join):
    """Join together items sharing a key; one representative per key."""
    groups: dict = {}
    for x in items:
        k = key(x)
        groups[k] = join(groups[k], x) if k in groups else x
    return groups


def equiv_alpha(xs, sim: CompatibleEquivalence) -> frozenset:
    """Quotient a set: one representative per class, the join of its members."""
    return frozenset(group_join(xs, sim.class_of, sim.carrier.join).values())


def equiv_gamma(ys, sim: CompatibleEquivalence) -> frozenset:
    """Everything below some representative and equivalent to it."""
    lat = sim.carrier
    return frozenset(
        x for y in ys for x in lat.elements if sim.equiv(x, y) and lat.leq(x, y)
    )


def equiv_leq(xs, ys, sim: CompatibleEquivalence) -> bool:
    lat = sim.carrier
    return all(any(sim.equiv(x, y) and lat.leq(x, y) for y in ys) for x in xs)
