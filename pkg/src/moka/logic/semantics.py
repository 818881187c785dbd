"""Direct set semantics of formulas, used as the reference for model checking.

All functions work on bitmasks internally; the public ``sem_*`` functions
return frozensets of state names.
"""

from __future__ import annotations

from ..errors import UnboundLogicVar
from ..transition import TransitionSystem
from .formula import (
    AF, AG, AU, AX, And, Atom, Box, Choice, FalseF, Mu, NegAtom, Next, Nu, Or, PdlBox,
    PdlDiamond, Seq, Star, Test, TrueF, Var, validate,
)

__all__ = ["sem_mask", "sem_actl", "sem_mu", "sem_pdl", "prog_image", "prog_rel", "pre_all",
           "holds_everywhere"]


def pre_all(ts: TransitionSystem, mask: int) -> int:
    """States all of whose successors lie in ``mask``."""
    out = 0
    for i in range(ts.n):
        if ts.succ_mask[i] & ~mask == 0:
            out |= 1 << i
    return out


def _lfp(step):
    x = 0
    while True:
        y = step(x)
        if y == x:
            return x
        x = y


def _gfp(step, top):
    x = top
    while True:
        y = step(x)
        if y == x:
            return x
        x = y


def prog_image(ts: TransitionSystem, prog, mask: int, env=None) -> int:
    """States reachable from ``mask`` by one run of ``prog``."""
    if isinstance(prog, Next):
        return ts.post_mask(mask)
    if isinstance(prog, Seq):
        return prog_image(ts, prog.right, prog_image(ts, prog.left, mask, env), env)
    if isinstance(prog, Choice):
        return prog_image(ts, prog.left, mask, env) | prog_image(ts, prog.right, mask, env)
    if isinstance(prog, Star):
        acc, frontier = mask, mask
        while frontier:
            nxt = prog_image(ts, prog.body, frontier, env)
            frontier = nxt & ~acc
            acc |= frontier
        return acc
    if isinstance(prog, Test):
        return mask & sem_mask(prog.cond, ts, env)
    raise TypeError(f"not a program: {prog!r}")


def sem_mask(f, ts: TransitionSystem, env=None) -> int:
    env = env or {}
    if isinstance(f, TrueF):
        return ts.all_mask
    if isinstance(f, FalseF):
        return 0
    if isinstance(f, Atom):
        return ts.label_mask(f.prop)
    if isinstance(f, NegAtom):
        return ts.all_mask & ~ts.label_mask(f.prop)
    if isinstance(f, And):
        return sem_mask(f.left, ts, env) & sem_mask(f.right, ts, env)
    if isinstance(f, Or):
        return sem_mask(f.left, ts, env) | sem_mask(f.right, ts, env)
    if isinstance(f, (AX, Box)):
        return pre_all(ts, sem_mask(f.body, ts, env))
    if isinstance(f, AG):
        phi = sem_mask(f.body, ts, env)
        return _gfp(lambda z: phi & pre_all(ts, z), ts.all_mask)
    if isinstance(f, AF):
        phi = sem_mask(f.body, ts, env)
        return _lfp(lambda z: phi | pre_all(ts, z))
    if isinstance(f, AU):
        a, b = sem_mask(f.left, ts, env), sem_mask(f.right, ts, env)
        return _lfp(lambda z: b | (a & pre_all(ts, z)))
    if isinstance(f, Var):
        try:
            return env[f.name]
        except KeyError:
            raise UnboundLogicVar(f.name) from None
    if isinstance(f, Mu):
        return _lfp(lambda z: sem_mask(f.body, ts, {**env, f.var: z}))
    if isinstance(f, Nu):
        return _gfp(lambda z: sem_mask(f.body, ts, {**env, f.var: z}), ts.all_mask)
    if isinstance(f, PdlBox):
        phi = sem_mask(f.body, ts, env)
        return sum(1 << i for i in range(ts.n)
                   if prog_image(ts, f.prog, 1 << i, env) & ~phi == 0)
    if isinstance(f, PdlDiamond):
        psi = sem_mask(f.body, ts, env)
        return sum(1 << i for i in range(ts.n) if prog_image(ts, f.prog, 1 << i, env) & psi)
    raise TypeError(f"not a formula: {f!r}")


def _as_masks(ts, valuation):
    return {k: (v if isinstance(v, int) else ts.mask(v)) for k, v in (valuation or {}).items()}


def sem_actl(f, ts: TransitionSystem) -> frozenset:
    validate(f, "actl")
    return ts.names(sem_mask(f, ts))


def sem_mu(f, ts: TransitionSystem, valuation=None) -> frozenset:
    validate(f, "mu")
    return ts.names(sem_mask(f, ts, _as_masks(ts, valuation)))


def sem_pdl(f, ts: TransitionSystem) -> frozenset:
    validate(f, "pdl")
    return ts.names(sem_mask(f, ts))


def prog_rel(prog, ts: TransitionSystem, state) -> frozenset:
    """Targets of ``prog`` from a single state."""
    return ts.names(prog_image(ts, prog, 1 << ts.index[state]))


def holds_everywhere(f, ts: TransitionSystem, mask: int) -> bool:
    return mask & ~sem_mask(f, ts) == 0

