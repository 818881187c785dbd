"""Concrete MOKA: frames, stacks and the nine basic expressions.

A frame is ``(state_index, trace_mask)``; a stack is a tuple of frames with
the top first; a stack set is a frozenset of stacks.
"""

from __future__ import annotations

from .bits import bits
from .errors import UnknownBasic
from .interp import Carrier, EvalStats, Evaluator
from .transition import TransitionSystem

__all__ = [
    "StackCarrier",
    "lift_states",
    "eval_basic",
    "current_mask",
    "current_states",
    "format_stack",
    "format_stack_set",
    "run",
    "canonical_name",
]


def canonical_name(name: str) -> str:
    """Accept ``¬p?`` as a spelling of ``!p?``."""
    return name.replace("¬", "!")


class StackCarrier(Carrier):
    additive = True
    frame_local = True

    def __init__(self, ts: TransitionSystem):
        self.ts = ts
        self.size_hint = ts.n

    def bottom(self):
        return frozenset()

    def join(self, a, b):
        return a | b

    def leq(self, a, b):
        return a <= b

    def difference(self, a, b):
        return a - b

    def split(self, x):
        return [(s[0], s[1:]) for s in x]

    def unit(self, key):
        return frozenset({(key,)})

    def attach(self, value, tail):
        if not tail:
            return value
        return frozenset(s + tail for s in value)

    def basic(self, name, x):
        return eval_basic(name, x, self.ts)


def _filter(S, keep):
    return frozenset(s for s in S if keep(s[0]))


def eval_basic(name: str, S, ts: TransitionSystem):
    name = canonical_name(name)
    if name == "loop?":
        return _filter(S, lambda f: f[1] >> f[0] & 1)
    if name == "!loop?":
        return _filter(S, lambda f: not f[1] >> f[0] & 1)
    if name.endswith("?"):
        m = ts.label_mask(name[:-1])
        return _filter(S, lambda f: m >> f[0] & 1)
    if name == "next":
        return frozenset(((j, s[0][1]),) + s[1:] for s in S for j in ts.succ[s[0][0]])
    if name == "add":
        return frozenset(((s[0][0], s[0][1] | 1 << s[0][0]),) + s[1:] for s in S)
    if name == "reset":
        return frozenset(((s[0][0], 0),) + s[1:] for s in S)
    if name == "push":
        return frozenset((s[0],) + s for s in S)
    if name == "pop":
        return frozenset(s[1:] for s in S if len(s) > 1)
    raise UnknownBasic(name)


def lift_states(ts: TransitionSystem, X) -> frozenset:
    """Depth-one stacks with empty traces; ``X`` is a mask or an iterable of names."""
    mask = X if isinstance(X, int) else ts.mask(X)
    return frozenset(((i, 0),) for i in bits(mask))


def current_mask(S) -> int:
    m = 0
    for s in S:
        m |= 1 << s[0][0]
    return m


def current_states(S, ts: TransitionSystem) -> frozenset:
    return ts.names(current_mask(S))


def format_stack(stack, ts: TransitionSystem) -> str:
    def frame(f):
        trace = ",".join(ts.states[i] for i in bits(f[1]))
        return f"<{ts.states[f[0]]}|{{{trace}}}>"

    return " :: ".join(frame(f) for f in stack)


def format_stack_set(S, ts: TransitionSystem):
    return sorted(format_stack(s, ts) for s in S)


def run(term, ts: TransitionSystem, states, strategy=None, stats: EvalStats | None = None):
    """Evaluate ``term`` on the lifted ``states``; returns the stack set."""
    ev = Evaluator(StackCarrier(ts), strategy, stats)
    return ev.eval(term, lift_states(ts, states))
