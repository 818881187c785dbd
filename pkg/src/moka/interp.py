"""Denotational semantics of KAF terms over a pluggable carrier lattice.

A *carrier* supplies the lattice operations and the meaning of basic
expressions.  Least fixpoints of ``mu X. r`` are solved locally, on demand:
only the inputs actually reached are tabulated.  When the carrier is a set of
stacks and the body is frame-local, the table is keyed by the top frame
alone (see :class:`FrameLocalMemo`); otherwise it is keyed by the whole input
and bounded by a step budget (:class:`BoundedUnfold`).
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import (
    IterationBudgetExceeded,
    NonFrameLocalBody,
    UnboundVariable,
    UnfoldBudgetExceeded,
    UnknownBasic,
)
from .kaf import Basic, Choice, Mu, MuApprox, One, Seq, Star, Term, Var, Zero, is_frame_local

__all__ = [
    "Carrier",
    "SetCarrier",
    "FrameLocalMemo",
    "BoundedUnfold",
    "EvalStats",
    "MuRecord",
    "Evaluator",
    "eval_kaf",
    "default_unfold_limit",
]


class Carrier:
    """Lattice operations plus basic-expression semantics.

    Subclasses override what they need.  ``additive`` licenses frontier
    iteration for stars; ``star_mode`` is ``"kleene"`` (accumulate
    ``x, x v r(x), ...``) or ``"powers"`` (join of ``r^n(x)``).
    Carriers that set ``frame_local`` must provide ``split``, ``unit`` and
    ``attach``.
    """

    additive = False
    star_mode = "powers"
    frame_local = False
    size_hint: int | None = None

    def bottom(self):
        raise NotImplementedError

    def join(self, a, b):
        raise NotImplementedError

    def leq(self, a, b):
        return self.join(a, b) == b

    def is_bottom(self, a):
        return a == self.bottom()

    def basic(self, name, x):
        raise UnknownBasic(name)

    def difference(self, a, b):
        """Part of ``a`` not already in ``b`` (additive carriers only)."""
        raise NotImplementedError

    # frame-local hooks
    def split(self, x):
        raise NotImplementedError

    def unit(self, key):
        raise NotImplementedError

    def attach(self, value, tail):
        raise NotImplementedError


class SetCarrier(Carrier):
    """Finite sets (frozensets) with basics given as plain functions.

    Pass ``additive=True`` only when every basic distributes over unions.
    """

    def __init__(self, basics: Mapping[str, Callable], additive=False, universe=None):
        self.basics = dict(basics)
        self.additive = additive
        self.universe = frozenset(universe) if universe is not None else None
        self.size_hint = len(self.universe) if self.universe is not None else None

    def bottom(self):
        return frozenset()

    def join(self, a, b):
        return a | b

    def leq(self, a, b):
        return a <= b

    def difference(self, a, b):
        return a - b

    def basic(self, name, x):
        try:
            fn = self.basics[name]
        except KeyError:
            raise UnknownBasic(name) from None
        return frozenset(fn(x))


@dataclass(frozen=True)
class FrameLocalMemo:
    """Solve mu terms over a table keyed by the top frame of the input.

    Bodies failing the locality check fall back to input-keyed solving with
    ``fallback_limit`` steps, or raise :class:`NonFrameLocalBody` if
    ``strict`` is set.
    """

    fallback_limit: int | None = None
    strict: bool = False


@dataclass(frozen=True)
class BoundedUnfold:
    """Solve every mu term over a table keyed by the whole input."""

    limit: int | None = None


def default_unfold_limit(n_states: int | None) -> int:
    if n_states is None:
        return 10**6
    return min(10 * n_states * 2 ** min(n_states, 20), 10**6)


@dataclass
class MuRecord:
    term: Term
    keys: int
    evaluations: Counter

    @property
    def total(self):
        return sum(self.evaluations.values())

    @property
    def single_pass(self):
        """Every tabulated key was evaluated exactly once."""
        return all(v == 1 for v in self.evaluations.values())


@dataclass
class EvalStats:
    star_iterations: list = field(default_factory=list)
    mu: list = field(default_factory=list)

    def reset(self):
        self.star_iterations.clear()
        self.mu.clear()


class _LocalSolver:
    """Chaotic iteration of a mu body over the inputs it is queried on."""

    def __init__(self, ev: "Evaluator", term, env, split, unit, attach, limit=None):
        self.ev = ev
        self.term = term
        self.env = env
        self.split, self.unit, self.attach = split, unit, attach
        self.limit = limit
        self.memo = {}
        self.readers = {}
        self.reads = {}
        self.evals = Counter()
        self.queue = deque()
        self.queued = set()

    def _touch(self, key):
        if key not in self.memo:
            self.memo[key] = self.ev.carrier.bottom()
            self.readers[key] = set()
            self._enqueue(key)

    def _enqueue(self, key):
        if key not in self.queued:
            self.queued.add(key)
            self.queue.append(key)

    def _apply(self, x, reader):
        car = self.ev.carrier
        out = car.bottom()
        for key, tail in self.split(x):
            self._touch(key)
            if reader is not None:
                self.readers[key].add(reader)
                self.reads.setdefault(reader, set()).add(key)
            out = car.join(out, self.attach(self.memo[key], tail))
        return out

    def _run(self):
        car = self.ev.carrier
        body, var = self.term.body, self.term.var
        while self.queue:
            key = self.queue.popleft()
            self.queued.discard(key)
            if self.limit is not None and sum(self.evals.values()) >= self.limit:
                raise UnfoldBudgetExceeded(f"mu evaluation exceeded {self.limit} steps")
            self.evals[key] += 1
            env = dict(self.env)
            env[var] = lambda y, _k=key: self._apply(y, _k)
            val = self.ev.eval(body, self.unit(key), env)
            new = car.join(self.memo[key], val)
            if new != self.memo[key]:
                self.memo[key] = new
                for r in self.readers[key]:
                    self._enqueue(r)

    def query(self, x):
        for key, _ in self.split(x):
            self._touch(key)
        self._run()
        return self._apply(x, None)

    def roots(self, x):
        return [key for key, _ in self.split(x)]

    def depth(self, x):
        """1 + the longest shortest-path distance from a root key to a reachable key."""
        dist = {k: 0 for k in self.roots(x)}
        frontier = list(dist)
        while frontier:
            nxt = []
            for k in frontier:
                for k2 in self.reads.get(k, ()):
                    if k2 not in dist:
                        dist[k2] = dist[k] + 1
                        nxt.append(k2)
            frontier = nxt
        return 1 + max(dist.values(), default=0)

    def record(self):
        return MuRecord(self.term, len(self.memo), Counter(self.evals))


class Evaluator:
    """Evaluates terms against one carrier, reusing solvers of closed mu terms."""

    def __init__(self, carrier: Carrier, strategy=None, stats: EvalStats | None = None,
                 star_budget: int = 100_000):
        self.carrier = carrier
        self.strategy = strategy if strategy is not None else FrameLocalMemo()
        self.stats = stats if stats is not None else EvalStats()
        self.star_budget = star_budget
        self._solvers = {}
        self._approx = {}

    # -- fixpoints ---------------------------------------------------------
    def _limit(self, explicit):
        return explicit if explicit is not None else default_unfold_limit(self.carrier.size_hint)

    def _input_solver(self, term, env, limit):
        return _LocalSolver(self, term, env, split=lambda x: [(x, None)], unit=lambda k: k,
                            attach=lambda v, _t: v, limit=self._limit(limit))

    def _make_solver(self, term, env):
        st, car = self.strategy, self.carrier
        if isinstance(st, BoundedUnfold):
            return self._input_solver(term, env, st.limit)
        if car.frame_local and is_frame_local(term):
            return _LocalSolver(self, term, env, car.split, car.unit, car.attach)
        if st.strict:
            raise NonFrameLocalBody(f"body of mu {term.var} is not frame-local")
        return self._input_solver(term, env, st.fallback_limit)

    def solver_for(self, term: Mu, env=None):
        """The solver used for a closed mu term (created on first use)."""
        key = id(term)
        if key not in self._solvers:
            self._solvers[key] = (term, self._make_solver(term, env or {}))
        return self._solvers[key][1]

    def _eval_mu(self, term, x, env):
        if not term.fv:
            solver = self.solver_for(term, env)
            out = solver.query(x)
        else:
            solver = self._make_solver(term, env)
            out = solver.query(x)
        self.stats.mu.append(solver.record())
        return out

    def _eval_approx(self, term, x, env):
        if term.n == 0:
            return self.carrier.bottom()
        cacheable = term.body.fv <= {term.var}
        key = (id(term.body), term.var, term.n, x)
        if cacheable and key in self._approx:
            return self._approx[key][1]
        inner = MuApprox(term.var, term.n - 1, term.body)
        env2 = dict(env)
        env2[term.var] = lambda y: self._eval_approx(inner, y, env)
        out = self.eval(term.body, x, env2)
        if cacheable:
            self._approx[key] = (term.body, out)
        return out

    # -- stars -------------------------------------------------------------
    def _eval_star(self, body, x, env):
        car = self.carrier
        count = 0
        if car.additive:
            acc, frontier = x, x
            while not car.is_bottom(frontier):
                count += 1
                self._check_budget(count)
                y = self.eval(body, frontier, env)
                frontier = car.difference(y, acc)
                acc = car.join(acc, frontier)
        elif car.star_mode == "kleene":
            acc = x
            while True:
                count += 1
                self._check_budget(count)
                y = car.join(acc, self.eval(body, acc, env))
                if y == acc:
                    break
                acc = y
        else:
            acc, cur, seen = x, x, {x}
            while True:
                count += 1
                self._check_budget(count)
                cur = self.eval(body, cur, env)
                if cur in seen:
                    break
                seen.add(cur)
                acc = car.join(acc, cur)
        self.stats.star_iterations.append(count)
        return acc

    def _check_budget(self, count):
        if count > self.star_budget:
            raise IterationBudgetExceeded(f"star did not stabilise within {self.star_budget} steps")

    # -- main dispatch -----------------------------------------------------
    def eval(self, t: Term, x, env=None):
        env = env or {}
        car = self.carrier
        if isinstance(t, One):
            return x
        if isinstance(t, Zero):
            return car.bottom()
        if isinstance(t, Basic):
            return car.basic(t.name, x)
        if isinstance(t, Seq):
            y = self.eval(t.left, x, env)
            if car.is_bottom(y) and car.additive:
                return y
            return self.eval(t.right, y, env)
        if isinstance(t, Choice):
            return car.join(self.eval(t.left, x, env), self.eval(t.right, x, env))
        if isinstance(t, Star):
            return self._eval_star(t.body, x, env)
        if isinstance(t, Var):
            try:
                fn = env[t.name]
            except KeyError:
                raise UnboundVariable(t.name) from None
            return fn(x)
        if isinstance(t, Mu):
            return self._eval_mu(t, x, env)
        if isinstance(t, MuApprox):
            return self._eval_approx(t, x, env)
        raise TypeError(f"not a term: {t!r}")


def eval_kaf(r: Term, env, c, basics, strategy=None, stats: EvalStats | None = None):
    """Evaluate ``r`` at ``c``.

    ``basics`` is either a :class:`Carrier` or a mapping from basic names to
    functions on frozensets (then treated as a non-additive set carrier).
    ``env`` maps variable names to functions on the carrier.
    """
    carrier = basics if isinstance(basics, Carrier) else SetCarrier(basics)
    return Evaluator(carrier, strategy, stats).eval(r, c, dict(env or {}))
