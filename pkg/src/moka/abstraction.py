"""State abstractions as Moore families of state sets, and frame equivalences.

An abstract element *is* its concretization: a bitmask that belongs to the
Moore family.  ``alpha`` maps a state set to the least member containing it;
``meet`` is intersection and ``join`` is ``alpha`` of the union.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from .bits import bits, popcount
from .errors import IncompatibleEquivalence, NotMooreClosed, ParseError, ValidationError
from .transition import TransitionSystem, compile_guard

__all__ = [
    "StateAbstraction",
    "ExplicitAbstraction",
    "ProductAbstraction",
    "moore_closure",
    "load_state_abstraction",
    "parse_state_abstraction",
    "build_predicate_abstraction",
    "load_predicates",
    "Equivalence",
    "make_equivalence",
    "is_strong",
]


def moore_closure(masks, top: int) -> set:
    """Close a set of masks under pairwise intersection and add top and bottom."""
    fam = set(masks) | {top, 0}
    frontier = set(fam)
    while frontier:
        new = set()
        for a in frontier:
            for b in fam:
                m = a & b
                if m not in fam:
                    new.add(m)
        fam |= new
        frontier = new
    return fam


def _synth_names(family, generators: dict, fallback):
    """Names for closure members: given names, else the shortest ``g1&g2`` that works."""
    names = {}
    for name, m in generators.items():
        names.setdefault(m, name)
    gens = sorted(generators.items(), key=lambda kv: (kv[0].lstrip("!"), kv[0]))
    for m in sorted(family, key=lambda m: (-popcount(m), m)):
        if m in names:
            continue
        best = None
        covering = [(n, g) for n, g in gens if g & m == m]
        for k in (2, 3):
            for combo in itertools.combinations(covering, k):
                acc = combo[0][1]
                for _, g in combo[1:]:
                    acc &= g
                if acc == m:
                    cand = "&".join(n for n, _ in combo)
                    if best is None or len(cand) < len(best):
                        best = cand
            if best is not None:
                break
        names[m] = best if best is not None else fallback(m)
    return names


class StateAbstraction:
    """Common interface; subclasses provide ``alpha`` and naming."""

    ts: TransitionSystem
    top: int
    bot: int

    def alpha(self, mask: int) -> int:
        raise NotImplementedError

    def gamma(self, a: int) -> int:
        return a

    def join(self, a, b):
        return self.alpha(a | b)

    def meet(self, a, b):
        return a & b

    def leq(self, a, b):
        return a & ~b == 0

    def alpha_state(self, i: int) -> int:
        return self._singletons[i]

    def _init_singletons(self):
        self._singletons = tuple(self.alpha(1 << i) for i in range(self.ts.n))

    def name(self, a: int) -> str:
        raise NotImplementedError

    def states(self, a: int) -> frozenset:
        return self.ts.names(a)

    @property
    def enumerable(self) -> bool:
        return False

    def elements(self):
        raise NotImplementedError


class ExplicitAbstraction(StateAbstraction):
    """A finite Moore family of named state sets."""

    def __init__(self, ts: TransitionSystem, elements: dict, auto_close: bool = True):
        self.ts = ts
        self.generators = {k: (v if isinstance(v, int) else ts.mask(v)) for k, v in elements.items()}
        self.top, self.bot = ts.all_mask, 0
        fam = moore_closure(self.generators.values(), ts.all_mask)
        if not auto_close:
            missing = fam - set(self.generators.values()) - {ts.all_mask, 0}
            if missing:
                m = min(missing)
                raise NotMooreClosed(f"intersection {sorted(ts.names(m))} is not an element")
        self.family = tuple(sorted(fam, key=lambda m: (popcount(m), m)))
        gens = {k: v for k, v in self.generators.items() if v not in (0, ts.all_mask)}
        self._names = _synth_names(fam, gens, lambda m: "{" + ",".join(sorted(ts.names(m))) + "}")
        self._names[ts.all_mask] = "top"
        self._names[0] = "bot"
        self._by_name = {v: k for k, v in self._names.items()}
        self._alpha_cache = {}
        self._init_singletons()

    def alpha(self, mask):
        try:
            return self._alpha_cache[mask]
        except KeyError:
            pass
        out = self.top
        for m in self.family:
            if m & mask == mask:
                out &= m
        self._alpha_cache[mask] = out
        return out

    def name(self, a):
        return self._names.get(a) or "{" + ",".join(sorted(self.ts.names(a))) + "}"

    def element(self, name):
        try:
            return self._by_name[name]
        except KeyError:
            raise ValidationError(f"unknown abstract element {name!r}") from None

    @property
    def enumerable(self):
        return True

    def elements(self):
        return self.family

    def __len__(self):
        return len(self.family)

    def add_element(self, mask, name=None):
        """A new abstraction with ``mask`` (and the induced intersections) added."""
        gens = dict(self.generators)
        if name is None:
            i = 1
            while f"r{i}" in gens or f"r{i}" in self._by_name:
                i += 1
            name = f"r{i}"
        gens[name] = mask
        return ExplicitAbstraction(self.ts, gens, auto_close=True)


class ProductAbstraction(StateAbstraction):
    """One Moore family per CFG node; an element picks a member at each node."""

    def __init__(self, ts: TransitionSystem, generators: dict, node_generators=None):
        if ts.layout is None:
            raise ValidationError("a product abstraction needs a CFG-built system")
        self.ts = ts
        self.layout = ts.layout
        self.top, self.bot = ts.all_mask, 0
        self.node_masks = tuple(self.layout.node_mask(n) for n in self.layout.nodes)
        # generators: name -> global mask, restricted to every node
        self.generators = dict(generators)
        # node_generators: (node, name) -> mask restricted to that node only
        self.node_generators = dict(node_generators or {})
        self.families, self._names = [], []
        for ni, nm in enumerate(self.node_masks):
            gens = {k: g & nm for k, g in self.generators.items()}
            for (node, k), g in self.node_generators.items():
                if node == self.layout.nodes[ni]:
                    gens[k] = g & nm
            gens = {k: g for k, g in gens.items() if g not in (0, nm)}
            fam = moore_closure(gens.values(), nm)
            self.families.append(tuple(sorted(fam, key=lambda m: (popcount(m), m))))
            names = _synth_names(fam, gens, lambda m: "{" + ",".join(sorted(ts.names(m))) + "}")
            names[nm] = "top"
            names[0] = "bot"
            self._names.append(names)
        self._alpha_cache = {}
        self._init_singletons()

    def _alpha_node(self, ni, part):
        out = self.node_masks[ni]
        for m in self.families[ni]:
            if m & part == part:
                out &= m
        return out

    def alpha(self, mask):
        try:
            return self._alpha_cache[mask]
        except KeyError:
            pass
        out = 0
        for ni, nm in enumerate(self.node_masks):
            part = mask & nm
            if part:
                out |= self._alpha_node(ni, part)
        self._alpha_cache[mask] = out
        return out

    def component(self, a, node):
        return a & self.node_masks[self.layout.nodes.index(node)]

    def support(self, a) -> frozenset:
        return frozenset(n for n, nm in zip(self.layout.nodes, self.node_masks) if a & nm)

    def name(self, a):
        if a == 0:
            return "bot"
        parts = [f"{node}:{self._names[ni][a & nm]}"
                 for ni, (node, nm) in enumerate(zip(self.layout.nodes, self.node_masks)) if a & nm]
        return "(" + ", ".join(parts) + ")"

    @property
    def enumerable(self):
        size = 1
        for fam in self.families:
            size *= len(fam)
        return size <= 4096

    def elements(self):
        for combo in itertools.product(*self.families):
            out = 0
            for m in combo:
                out |= m
            yield out

    def family_size(self, node):
        return len(self.families[self.layout.nodes.index(node)])

    def add_element(self, mask, name=None, nodes=None):
        """Add ``mask`` at the given nodes (default: every node it touches)."""
        i = 1
        while name is None or name in self.generators:
            name = f"r{i}"
            i += 1
        if nodes is None:
            return ProductAbstraction(self.ts, {**self.generators, name: mask}, self.node_generators)
        extra = {(node, name): mask & self.layout.node_mask(node) for node in nodes}
        return ProductAbstraction(self.ts, self.generators, {**self.node_generators, **extra})


# -- loading ------------------------------------------------------------------

def parse_state_abstraction(text, ts: TransitionSystem, auto_close: bool | None = None):
    try:
        data = json.loads(text)
        elements = data.get("elements", {})
        if not isinstance(elements, dict):
            raise TypeError("'elements' must be an object")
    except (json.JSONDecodeError, TypeError, AttributeError) as exc:
        raise ParseError(f"malformed domain file: {exc}") from None
    close = data.get("auto_close", True) if auto_close is None else auto_close
    return ExplicitAbstraction(ts, {k: ts.mask(v) for k, v in elements.items()}, auto_close=close)


def load_state_abstraction(path, ts: TransitionSystem, auto_close: bool | None = None):
    with open(path) as fh:
        return parse_state_abstraction(fh.read(), ts, auto_close)


def load_predicates(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed predicate file: {exc}") from None
    return dict(data.get("predicates", {})), bool(data.get("per_node", True))


def build_predicate_abstraction(preds: dict, ts: TransitionSystem, per_node: bool = True):
    """Conjunction closure of the predicates and their complements.

    Predicates are state masks or guard expressions over the CFG variables.
    On CFG systems with ``per_node`` the closure is taken at each node.
    """
    masks = {}
    for name, p in preds.items():
        if isinstance(p, str):
            if ts.layout is None:
                raise ValidationError("guard predicates need a CFG-built system")
            guard = compile_guard(p, ts.layout.vars, ts.layout.modulus)
            p = sum(1 << i for i, env in enumerate(ts.layout.env_of) if guard(env))
        elif not isinstance(p, int):
            p = ts.mask(p)
        masks[name] = p
        masks["!" + name] = ts.all_mask & ~p
    if per_node and ts.layout is not None:
        return ProductAbstraction(ts, masks)
    return ExplicitAbstraction(ts, masks, auto_close=True)


# -- equivalences ---------------------------------------------------------------

@dataclass(frozen=True)
class Equivalence:
    """A compatible equivalence on abstract elements, given by a class key."""

    name: str
    key: object

    def __call__(self, a):
        return self.key(a)

    def equiv(self, a, b):
        return self.key(a) == self.key(b)

    def violations(self, abstraction: StateAbstraction, limit=None):
        """Pairs in one class whose join leaves it (enumerable domains only)."""
        classes = {}
        for a in abstraction.elements():
            classes.setdefault(self.key(a), []).append(a)
        bad = []
        for members in classes.values():
            for a, b in itertools.combinations(members, 2):
                j = abstraction.join(a, b)
                if self.key(j) != self.key(a):
                    bad.append((a, b, j))
                    if limit and len(bad) >= limit:
                        return bad
        return bad

    def validate(self, abstraction: StateAbstraction):
        if abstraction.enumerable:
            bad = self.violations(abstraction, limit=1)
            if bad:
                a, b, j = bad[0]
                raise IncompatibleEquivalence(
                    f"{self.name}: join of {abstraction.name(a)} and {abstraction.name(b)} "
                    f"is {abstraction.name(j)}, outside their class")
        return self


def _support_key(abstraction):
    if not isinstance(abstraction, ProductAbstraction):
        raise ValidationError("support equivalences need a per-node abstraction")
    nms = list(zip(abstraction.layout.nodes, abstraction.node_masks))
    return lambda a: frozenset(n for n, m in nms if a & m)


def make_equivalence(selector: str, abstraction: StateAbstraction, validate=True) -> Equivalence:
    """``id | total | by_support | by_support_except:<n1,n2> | classes:<file>``."""
    kind, _, arg = selector.partition(":")
    if kind == "id":
        eq = Equivalence("id", lambda a: a)
    elif kind == "total":
        eq = Equivalence("total", lambda a: 0)
    elif kind == "by_support":
        eq = Equivalence("by_support", _support_key(abstraction))
    elif kind == "by_support_except":
        nodes = {n.strip() for n in arg.strip("{}").split(",") if n.strip()}
        unknown = nodes - set(getattr(abstraction, "layout").nodes)
        if unknown:
            raise ValidationError(f"unknown node(s) {sorted(unknown)}")
        supp = _support_key(abstraction)

        def key(a):
            s = supp(a)
            return ("exact", a) if s & nodes else ("support", s)

        eq = Equivalence(selector, key)
    elif kind == "classes":
        with open(arg) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed classes file: {exc}") from None
        table = {}
        for i, cls in enumerate(data.get("classes", [])):
            for nm in cls:
                table[abstraction.element(nm)] = ("class", i)
        eq = Equivalence(selector, lambda a: table.get(a, ("own", a)))
    else:
        raise ValidationError(f"unknown equivalence {selector!r}")
    return eq.validate(abstraction) if validate else eq


def is_strong(abstraction: StateAbstraction, eq: Equivalence) -> bool:
    """``gamma(alpha(X))`` stays in one class for every one-class set of states."""
    classes = {}
    for i in range(abstraction.ts.n):
        classes.setdefault(eq(abstraction.alpha_state(i)), 0)
        classes[eq(abstraction.alpha_state(i))] |= 1 << i
    for k, members in classes.items():
        closure = abstraction.gamma(abstraction.alpha(members))
        if any(eq(abstraction.alpha_state(i)) != k for i in bits(closure)):
            return False
    return True
