"""Abstract stacks, best correct approximations of the basics, and the abstract interpreter.

An abstract frame is ``(sigma, delta)`` with both components abstract
elements (bitmasks).  Two frames are equivalent when their first components
are; two stacks are equivalent when they have equal length and equivalent
frames position by position.  A canonical abstract stack set keeps one stack
per class, the componentwise join of its members.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .abstraction import Equivalence, StateAbstraction, is_strong, make_equivalence
from .bits import bits
from .errors import UnknownBasic
from .interp import Carrier, EvalStats, Evaluator
from .stacks import canonical_name
from .transition import TransitionSystem

__all__ = [
    "StackDomain",
    "AbstractCarrier",
    "eval_abstract",
    "check_abstract",
    "Proved",
    "Alarm",
    "random_abstract_set",
    "random_concrete_set",
    "CLOSED_FORM_BASICS",
]

CLOSED_FORM_BASICS = ("add", "reset", "push", "pop", "loop?")


class StackDomain:
    """The stack abstraction induced by a state abstraction and an equivalence."""

    def __init__(self, abstraction: StateAbstraction, equivalence: Equivalence | str = "id"):
        self.A = abstraction
        self.ts: TransitionSystem = abstraction.ts
        if isinstance(equivalence, str):
            equivalence = make_equivalence(equivalence, abstraction)
        self.eq = equivalence
        self._gamma_states = {}
        self._realized = {}
        self._generic = {}
        self._strong = None

    # -- order and canonical form --------------------------------------------
    def key(self, a):
        return self.eq(a)

    def stack_key(self, stack):
        return tuple(self.eq(f[0]) for f in stack)

    def join_frames(self, f, g):
        return (self.A.join(f[0], g[0]), self.A.join(f[1], g[1]))

    def join_stacks(self, s, t):
        return tuple(self.join_frames(f, g) for f, g in zip(s, t))

    def canonical(self, stacks) -> frozenset:
        groups = {}
        for s in stacks:
            k = self.stack_key(s)
            groups[k] = self.join_stacks(groups[k], s) if k in groups else s
        return frozenset(groups.values())

    def join(self, T1, T2):
        if not T1:
            return T2
        if not T2:
            return T1
        return self.canonical(T1 | T2)

    def stack_leq(self, s, t):
        return len(s) == len(t) and all(
            self.eq(f[0]) == self.eq(g[0]) and self.A.leq(f[0], g[0]) and self.A.leq(f[1], g[1])
            for f, g in zip(s, t))

    def leq(self, T1, T2):
        return all(any(self.stack_leq(s, t) for t in T2) for s in T1)

    @property
    def strong(self) -> bool:
        if self._strong is None:
            self._strong = is_strong(self.A, self.eq)
        return self._strong

    # -- Galois connection -------------------------------------------------
    def alpha_frame(self, frame):
        return (self.A.alpha_state(frame[0]), self.A.alpha(frame[1]))

    def alpha(self, S) -> frozenset:
        return self.canonical(tuple(self.alpha_frame(f) for f in s) for s in S)

    def lift(self, mask: int) -> frozenset:
        """Abstraction of the depth-one stacks with empty traces over ``mask``."""
        return self.canonical(((self.A.alpha_state(i), self.A.bot),) for i in bits(mask))

    def gamma_states(self, sigma) -> int:
        """Concrete states whose singleton abstraction is below and equivalent to ``sigma``."""
        try:
            return self._gamma_states[sigma]
        except KeyError:
            pass
        k = self.eq(sigma)
        out = 0
        for i in bits(self.A.gamma(sigma)):
            a = self.A.alpha_state(i)
            if self.eq(a) == k and a & ~sigma == 0:
                out |= 1 << i
        self._gamma_states[sigma] = out
        return out

    def gamma_frames(self, frame, max_trace_bits=12):
        """Concrete frames abstracted below ``frame`` (traces enumerated as subsets)."""
        D = self.A.gamma(frame[1])
        dbits = list(bits(D))
        if len(dbits) > max_trace_bits:
            raise ValueError("trace concretization too large to enumerate")
        traces = []
        for sub in range(1 << len(dbits)):
            traces.append(sum(1 << dbits[j] for j in range(len(dbits)) if sub >> j & 1))
        return [(i, t) for i in bits(self.gamma_states(frame[0])) for t in traces]

    def gamma(self, T, max_trace_bits=12) -> frozenset:
        out = set()
        for s in T:
            options = [self.gamma_frames(f, max_trace_bits) for f in s]
            stacks = [()]
            for opts in options:
                stacks = [st + (f,) for st in stacks for f in opts]
            out.update(stacks)
        return frozenset(out)

    def current_gamma(self, T) -> int:
        """Plain concretization of the top-frame components."""
        out = 0
        for s in T:
            out |= self.A.gamma(s[0][0])
        return out

    # -- best correct approximations ---------------------------------------
    def _realize(self, frame):
        """Abstraction of everything concretizing ``frame``; ``None`` if nothing does."""
        try:
            return self._realized[frame]
        except KeyError:
            pass
        G = self.gamma_states(frame[0])
        if not G:
            out = None
        else:
            s = self.A.bot
            for i in bits(G):
                s = self.A.join(s, self.A.alpha_state(i))
            out = (s, frame[1])
        self._realized[frame] = out
        return out

    def _top_results(self, name, frame):
        """Abstract results of ``name`` on the concretization of one top frame."""
        A = self.A
        sigma, delta = frame
        G = self.gamma_states(sigma)
        D = A.gamma(delta)
        out = []
        if name == "loop?":
            for i in bits(G & D):
                out.append(((A.alpha_state(i), delta),))
        elif name == "!loop?":
            for i in bits(G):
                out.append(((A.alpha_state(i), A.alpha(D & ~(1 << i))),))
        elif name.endswith("?"):
            m = self.ts.label_mask(name[:-1])
            for i in bits(G & m):
                out.append(((A.alpha_state(i), delta),))
        elif name == "next":
            for i in bits(G):
                for j in self.ts.succ[i]:
                    out.append(((A.alpha_state(j), delta),))
        elif name == "add":
            for i in bits(G):
                out.append(((A.alpha_state(i), A.join(delta, A.alpha_state(i))),))
        elif name == "reset":
            for i in bits(G):
                out.append(((A.alpha_state(i), A.bot),))
        elif name == "push":
            for i in bits(G):
                f = (A.alpha_state(i), delta)
                out.append((f, f))
        elif name == "pop":
            out = [()] if G else []
        else:
            raise UnknownBasic(name)
        return self.canonical(out)

    def generic_bca(self, name, T) -> frozenset:
        """``alpha . [[name]] . gamma`` computed exactly, stack by stack."""
        name = canonical_name(name)
        results = []
        for s in T:
            key = (name, s)
            if key not in self._generic:
                self._generic[key] = self._generic_stack(name, s)
            results.extend(self._generic[key])
        return self.canonical(results)

    def _generic_stack(self, name, s):
        lower = []
        for f in s[1:]:
            r = self._realize(f)
            if r is None:
                return frozenset()
            lower.append(r)
        lower = tuple(lower)
        tops = self._top_results(name, s[0])
        if name == "pop" and not lower:
            return frozenset()
        return frozenset(t + lower for t in tops)

    def closed_bca(self, name, T) -> frozenset:
        """Closed forms for add/reset/push/pop/loop?/filters; ``next`` and ``!loop?`` stay generic."""
        name = canonical_name(name)
        A = self.A
        if name == "add":
            return self.canonical(((s[0][0], A.join(s[0][1], s[0][0])),) + s[1:] for s in T)
        if name == "reset":
            return self.canonical(((s[0][0], A.bot),) + s[1:] for s in T)
        if name == "push":
            return self.canonical((s[0],) + s for s in T)
        if name == "pop":
            return self.canonical(s[1:] for s in T if len(s) > 1)
        if name == "loop?":
            out = []
            for s in T:
                m = A.meet(s[0][0], s[0][1])
                if m != A.bot:
                    out.append(((m, s[0][1]),) + s[1:])
            return self.canonical(out)
        if name.endswith("?") and name != "!loop?":
            p = A.alpha(self.ts.label_mask(name[:-1]))
            out = []
            for s in T:
                m = A.meet(s[0][0], p)
                if m != A.bot:
                    out.append(((m, s[0][1]),) + s[1:])
            return self.canonical(out)
        return self.generic_bca(name, T)

    def bca(self, name, T, mode="generic"):
        if mode == "closed":
            return self.closed_bca(name, T)
        return self.generic_bca(name, T)

    # -- presentation --------------------------------------------------------
    def format_frame(self, f):
        return f"<{self.A.name(f[0])}|{self.A.name(f[1])}>"

    def format_stack(self, s):
        return " :: ".join(self.format_frame(f) for f in s)

    def format(self, T):
        return sorted(self.format_stack(s) for s in T)


class AbstractCarrier(Carrier):
    additive = False
    star_mode = "kleene"
    frame_local = True

    def __init__(self, domain: StackDomain, mode: str = "generic"):
        if mode not in ("generic", "closed"):
            raise ValueError(f"unknown BCA mode {mode!r}")
        self.D = domain
        self.mode = mode
        self.size_hint = domain.ts.n

    def bottom(self):
        return frozenset()

    def is_bottom(self, a):
        return not a

    def join(self, a, b):
        return self.D.join(a, b)

    def leq(self, a, b):
        return self.D.leq(a, b)

    def basic(self, name, x):
        if not x:
            return x
        return self.D.bca(name, x, self.mode)

    def split(self, x):
        return [(s[0], s[1:]) for s in x]

    def unit(self, key):
        return frozenset({(key,)})

    def attach(self, value, tail):
        if not tail:
            return value
        return self.D.canonical(s + tail for s in value)


def eval_abstract(r, T, domain: StackDomain, env=None, strategy=None,
                  stats: EvalStats | None = None, mode: str = "generic", evaluator=None):
    ev = evaluator or Evaluator(AbstractCarrier(domain, mode), strategy, stats)
    return ev.eval(r, T, dict(env or {}))


@dataclass
class Proved:
    output: frozenset = field(default_factory=frozenset)

    @property
    def holds(self):
        return True


@dataclass
class Alarm:
    output: frozenset
    candidates: int

    @property
    def holds(self):
        return False


def check_abstract(f, domain: StackDomain, init, dialect=None, strategy=None,
                   stats: EvalStats | None = None, mode: str = "generic"):
    """Run the counterexample program abstractly; empty output proves ``f`` on ``init``."""
    from .logic.check import as_formula
    from .logic.encode import encode

    f = as_formula(f, dialect)
    prog = encode(f, dialect)
    ts = domain.ts
    mask = init if isinstance(init, int) else ts.mask(init)
    out = eval_abstract(prog, domain.lift(mask), domain, strategy=strategy, stats=stats, mode=mode)
    if not out:
        return Proved(out)
    return Alarm(out, domain.current_gamma(out))


# -- random instances (used by tests and the acceptance suite) -----------------

def random_concrete_set(ts: TransitionSystem, rng: random.Random, max_stacks=4, max_depth=3):
    out = set()
    for _ in range(rng.randint(0, max_stacks)):
        depth = rng.randint(1, max_depth)
        out.add(tuple((rng.randrange(ts.n), rng.getrandbits(ts.n)) for _ in range(depth)))
    return frozenset(out)


def random_abstract_set(domain: StackDomain, rng: random.Random, max_stacks=4, max_depth=3):
    """Abstraction of a random concrete stack set."""
    return domain.alpha(random_concrete_set(domain.ts, rng, max_stacks, max_depth))
