"""Random instances and brute-force oracles shared by the test modules.

The oracles deliberately avoid the fixpoint iterations used by the package:
path properties are decided by enumerating simple paths and lassos, mu and nu
by scanning every subset of states, and PDL programs by building explicit
relations.
"""

from __future__ import annotations

import itertools
import random
from pathlib import Path

from moka.logic.formula import (
    AF, AG, AU, AX, And, Atom, Box, Choice, FalseF, Mu, NegAtom, Next, Nu, Or, PdlBox,
    PdlDiamond, Seq, Star, Test, TrueF, Var,
)
from moka.transition import TransitionSystem

DATA = Path(__file__).resolve().parents[1] / "src" / "moka" / "data"
PROPS = ("p", "q", "r")


# -- random systems ---------------------------------------------------------

def random_ts(rng: random.Random, max_states=6, max_props=3) -> TransitionSystem:
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    props = PROPS[: rng.randint(0, max_props)]
    edges = set()
    for s in states:
        for t in rng.sample(states, rng.randint(1, min(n, 3))):
            edges.add((s, t))
    labeling = {s: [p if rng.random() < 0.5 else "!" + p for p in props] for s in states}
    init = [s for s in states if rng.random() < 0.5] or states[:1]
    ts = TransitionSystem(states, init, labeling, sorted(edges))
    ts.test_props = props
    return ts


def _literal(rng, props):
    if not props or rng.random() < 0.1:
        return rng.choice([TrueF(), FalseF()])
    p = rng.choice(props)
    return Atom(p) if rng.random() < 0.5 else NegAtom(p)


def random_actl(rng, props, depth=3):
    if depth == 0 or rng.random() < 0.2:
        return _literal(rng, props)
    k = rng.choice(["and", "or", "AX", "AF", "AG", "AU"])
    d = depth - 1
    if k == "and":
        return And(random_actl(rng, props, d), random_actl(rng, props, d))
    if k == "or":
        return Or(random_actl(rng, props, d), random_actl(rng, props, d))
    if k == "AU":
        return AU(random_actl(rng, props, d), random_actl(rng, props, d))
    return {"AX": AX, "AF": AF, "AG": AG}[k](random_actl(rng, props, d))


def random_mu(rng, props, depth=3, var=None, counter=None):
    counter = counter if counter is not None else itertools.count(1)
    if depth == 0 or rng.random() < 0.2:
        if var is not None and rng.random() < 0.5:
            return Var(var)
        return _literal(rng, props)
    k = rng.choice(["and", "or", "box", "mu", "nu"])
    d = depth - 1
    if k in ("and", "or"):
        cls = And if k == "and" else Or
        return cls(random_mu(rng, props, d, var, counter), random_mu(rng, props, d, var, counter))
    if k == "box":
        return Box(random_mu(rng, props, d, var, counter))
    if var is not None and rng.random() < 0.5:
        # stay inside the current binder rather than opening a new one
        return Box(random_mu(rng, props, d, var, counter))
    x = f"x{next(counter)}"
    return (Mu if k == "mu" else Nu)(x, random_mu(rng, props, d, x, counter))


def random_exists(rng, props, depth=2):
    if depth == 0 or rng.random() < 0.3:
        return _literal(rng, props)
    k = rng.choice(["and", "or", "dia"])
    d = depth - 1
    if k == "and":
        return And(random_exists(rng, props, d), random_exists(rng, props, d))
    if k == "or":
        return Or(random_exists(rng, props, d), random_exists(rng, props, d))
    return PdlDiamond(random_prog(rng, props, d), random_exists(rng, props, d))


def random_prog(rng, props, depth=2):
    if depth == 0 or rng.random() < 0.35:
        return Next() if rng.random() < 0.75 else Test(random_exists(rng, props, 0))
    k = rng.choice(["seq", "choice", "star", "test"])
    d = depth - 1
    if k == "seq":
        return Seq(random_prog(rng, props, d), random_prog(rng, props, d))
    if k == "choice":
        return Choice(random_prog(rng, props, d), random_prog(rng, props, d))
    if k == "star":
        return Star(random_prog(rng, props, d))
    return Test(random_exists(rng, props, d))


def random_pdl(rng, props, depth=3):
    if depth == 0 or rng.random() < 0.2:
        return _literal(rng, props)
    k = rng.choice(["and", "or", "box", "box"])
    d = depth - 1
    if k == "and":
        return And(random_pdl(rng, props, d), random_pdl(rng, props, d))
    if k == "or":
        return Or(random_pdl(rng, props, d), random_pdl(rng, props, d))
    return PdlBox(random_prog(rng, props, min(d, 2)), random_pdl(rng, props, d))


RANDOM_FORMULA = {"actl": random_actl, "mu": random_mu, "pdl": random_pdl}


# -- brute-force oracles ----------------------------------------------------

def _succ(ts, i):
    return ts.succ[i]


def _label(ts, prop):
    return {i for i in range(ts.n) if ts.label_mask(prop) >> i & 1}


def _exists_bad_path(ts, start, stay, stop):
    """Some path from ``start`` runs inside ``stay`` forever, or inside ``stay``
    until it hits a ``stop`` state.  Decided by enumerating simple paths."""

    def dfs(i, on_path):
        if i in stop:
            return True
        if i not in stay:
            return False
        if i in on_path:
            return True  # closes a lasso inside `stay`
        on_path.add(i)
        found = any(dfs(j, on_path) for j in _succ(ts, i))
        on_path.discard(i)
        return found

    return dfs(start, set())


def _reachable(ts, start):
    seen, todo = {start}, [start]
    while todo:
        i = todo.pop()
        for j in _succ(ts, i):
            if j not in seen:
                seen.add(j)
                todo.append(j)
    return seen


def _all_subsets(n):
    for k in range(1 << n):
        yield {i for i in range(n) if k >> i & 1}


def _relation(ts, prog, env):
    if isinstance(prog, Next):
        return {(i, j) for i in range(ts.n) for j in _succ(ts, i)}
    if isinstance(prog, Seq):
        a, b = _relation(ts, prog.left, env), _relation(ts, prog.right, env)
        return {(i, k) for (i, j) in a for (j2, k) in b if j == j2}
    if isinstance(prog, Choice):
        return _relation(ts, prog.left, env) | _relation(ts, prog.right, env)
    if isinstance(prog, Star):
        r = _relation(ts, prog.body, env)
        closure = {(i, i) for i in range(ts.n)}
        while True:
            bigger = closure | {(i, k) for (i, j) in closure for (j2, k) in r if j == j2}
            if bigger == closure:
                return closure
            closure = bigger
    if isinstance(prog, Test):
        sat = oracle_sem(prog.cond, ts, env)
        return {(i, i) for i in sat}
    raise TypeError(prog)


def oracle_sem(f, ts, env=None) -> set:
    """Satisfying state indices of ``f``, by brute force."""
    env = env or {}
    every = set(range(ts.n))
    if isinstance(f, TrueF):
        return every
    if isinstance(f, FalseF):
        return set()
    if isinstance(f, Atom):
        return _label(ts, f.prop)
    if isinstance(f, NegAtom):
        return every - _label(ts, f.prop)
    if isinstance(f, And):
        return oracle_sem(f.left, ts, env) & oracle_sem(f.right, ts, env)
    if isinstance(f, Or):
        return oracle_sem(f.left, ts, env) | oracle_sem(f.right, ts, env)
    if isinstance(f, (AX, Box)):
        body = oracle_sem(f.body, ts, env)
        return {i for i in every if set(_succ(ts, i)) <= body}
    if isinstance(f, AG):
        body = oracle_sem(f.body, ts, env)
        return {i for i in every if _reachable(ts, i) <= body}
    if isinstance(f, AF):
        body = oracle_sem(f.body, ts, env)
        return {i for i in every if not _exists_bad_path(ts, i, every - body, set())}
    if isinstance(f, AU):
        a, b = oracle_sem(f.left, ts, env), oracle_sem(f.right, ts, env)
        return {i for i in every if not _exists_bad_path(ts, i, every - b, every - a - b)}
    if isinstance(f, Var):
        return env[f.name]
    if isinstance(f, Mu):
        # Knaster-Tarski: meet of all pre-fixpoints
        out = set(every)
        for z in _all_subsets(ts.n):
            if oracle_sem(f.body, ts, {**env, f.var: z}) <= z:
                out &= z
        return out
    if isinstance(f, Nu):
        out = set()
        for z in _all_subsets(ts.n):
            if z <= oracle_sem(f.body, ts, {**env, f.var: z}):
                out |= z
        return out
    if isinstance(f, PdlBox):
        r, body = _relation(ts, f.prog, env), oracle_sem(f.body, ts, env)
        return {i for i in every if all(j in body for (k, j) in r if k == i)}
    if isinstance(f, PdlDiamond):
        r, body = _relation(ts, f.prog, env), oracle_sem(f.body, ts, env)
        return {i for (i, j) in r if j in body}
    raise TypeError(f)


def to_mask(indices) -> int:
    return sum(1 << i for i in indices)


def all_stacks(ts, max_depth=2):
    """Every stack of depth <= max_depth whose traces are empty or singletons."""
    traces = [0] + [1 << i for i in range(ts.n)]
    frames = [(i, t) for i in range(ts.n) for t in traces]
    out = []
    for d in range(1, max_depth + 1):
        out.extend(itertools.product(frames, repeat=d))
    return out


# -- random KAF terms over small finite sets --------------------------------

def random_relation_basics(rng, universe=(0, 1, 2), names=("u", "v", "w")):
    """Additive basics given by random relations on ``universe``."""
    rels = {n: {x: {y for y in universe if rng.random() < 0.4} for x in universe} for n in names}
    return {n: (lambda S, r=r: frozenset(y for x in S for y in r[x])) for n, r in rels.items()}


def random_monotone_basics(rng, universe=(0, 1, 2), names=("u", "v", "w")):
    """Monotone but generally non-additive basics: an upward-closed lookup table."""
    subsets = [frozenset(c) for k in range(len(universe) + 1)
               for c in itertools.combinations(universe, k)]
    out = {}
    for n in names:
        table = {}
        for S in subsets:  # increasing size, so lower sets are filled first
            below = frozenset().union(*(table[T] for T in table if T < S)) if S else frozenset()
            extra = frozenset(y for y in universe if rng.random() < 0.25)
            table[S] = below | extra
        out[n] = lambda S, t=table: t[frozenset(S)]
    return out


def random_kaf(rng, names=("u", "v", "w"), depth=3, bound=(), counter=None):
    from moka import kaf as K

    counter = counter if counter is not None else itertools.count(1)
    if depth == 0 or rng.random() < 0.25:
        pick = rng.random()
        if bound and pick < 0.3:
            return K.Var(rng.choice(bound))
        if pick < 0.4:
            return rng.choice([K.One(), K.Zero()])
        return K.Basic(rng.choice(names))
    k = rng.choice(["seq", "choice", "star", "mu"])
    d = depth - 1
    if k == "seq":
        return K.Seq(random_kaf(rng, names, d, bound, counter), random_kaf(rng, names, d, bound, counter))
    if k == "choice":
        return K.Choice(random_kaf(rng, names, d, bound, counter),
                        random_kaf(rng, names, d, bound, counter))
    if k == "star":
        return K.Star(random_kaf(rng, names, d, bound, counter))
    x = f"X{next(counter)}"
    return K.Mu(x, random_kaf(rng, names, d, bound + (x,), counter))
