"""Model checking by running counterexample programs on concrete stacks."""

from __future__ import annotations

from ..interp import EvalStats, Evaluator
from ..stacks import StackCarrier, current_mask, lift_states
from ..transition import TransitionSystem
from .encode import encode
from .parser import parse_formula

__all__ = ["check_concrete", "check_concrete_mask", "as_formula"]


def as_formula(f, dialect=None):
    return parse_formula(f, dialect) if isinstance(f, str) else f


def check_concrete_mask(f, ts: TransitionSystem, init, dialect=None, strategy=None,
                        stats: EvalStats | None = None, variant="standard") -> int:
    f = as_formula(f, dialect)
    prog = encode(f, dialect, variant)
    mask = init if isinstance(init, int) else ts.mask(init)
    out = Evaluator(StackCarrier(ts), strategy, stats).eval(prog, lift_states(ts, mask))
    return current_mask(out)


def check_concrete(f, ts: TransitionSystem, init=None, dialect=None, strategy=None,
                   stats: EvalStats | None = None, variant="standard") -> frozenset:
    """Initial states violating ``f``; ``init`` defaults to the system's initial states."""
    if init is None:
        init = ts.init_mask
    return ts.names(check_concrete_mask(f, ts, init, dialect, strategy, stats, variant))
