"""Finite transition systems, their JSON format, and the CFG builder.

States are named by strings; internally they are indexed ``0..n-1`` and state
sets are integer bitmasks.  Every positive proposition ``p`` gets an explicit
negation ``!p`` and the proposition ``tt`` labels every state.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field

from .bits import bits, mask_of
from .errors import (
    InconsistentLabeling,
    ModulusZero,
    NotTotal,
    ParseError,
    UnknownProp,
    UnknownState,
    ValidationError,
)

__all__ = [
    "TransitionSystem",
    "CfgLayout",
    "Cfg",
    "negate_prop",
    "parse_ts",
    "load_ts",
    "serialize_ts",
    "parse_cfg",
    "load_cfg",
    "cfg_to_ts",
    "compile_guard",
]

TT = "tt"


def negate_prop(p: str) -> str:
    return p[1:] if p.startswith("!") else "!" + p


@dataclass(frozen=True)
class CfgLayout:
    """How states of a CFG-built system decompose into node and environment."""

    nodes: tuple
    vars: tuple
    modulus: int
    node_of: tuple
    env_of: tuple

    def node_mask(self, node) -> int:
        k = self.nodes.index(node)
        return mask_of(i for i, n in enumerate(self.node_of) if n == k)


class TransitionSystem:
    """A validated finite transition system with a total transition relation."""

    def __init__(self, states, init, labeling, edges, layout: CfgLayout | None = None):
        self.states = tuple(states)
        if len(set(self.states)) != len(self.states):
            raise ValidationError("duplicate state names")
        self.index = {s: i for i, s in enumerate(self.states)}
        self.n = len(self.states)
        self.all_mask = (1 << self.n) - 1
        self.layout = layout

        succ = [set() for _ in self.states]
        for a, b in edges:
            succ[self._idx(a)].add(self._idx(b))
        for i, s in enumerate(succ):
            if not s:
                raise NotTotal(self.states[i])
        self.succ = tuple(tuple(sorted(s)) for s in succ)
        self.succ_mask = tuple(mask_of(s) for s in self.succ)

        self.init_mask = mask_of(self._idx(s) for s in init)

        positive: dict[str, int] = {}
        negative: dict[str, int] = {}
        for s, props in labeling.items():
            i = self._idx(s)
            for p in props:
                if p == TT:
                    continue
                if p.startswith("!"):
                    negative[p[1:]] = negative.get(p[1:], 0) | (1 << i)
                else:
                    positive[p] = positive.get(p, 0) | (1 << i)
        labels = {TT: self.all_mask}
        for p in sorted(set(positive) | set(negative)):
            pos = positive.get(p, 0)
            if pos & negative.get(p, 0):
                clash = self.states[next(bits(pos & negative[p]))]
                raise InconsistentLabeling(f"state {clash!r} is labelled both {p} and !{p}")
            labels[p] = pos
            labels["!" + p] = self.all_mask & ~pos
        self.labels = labels

    def _idx(self, s):
        try:
            return self.index[s]
        except KeyError:
            raise UnknownState(s) from None

    # -- state-set views -------------------------------------------------
    @property
    def props(self):
        return frozenset(self.labels)

    @property
    def positive_props(self):
        return sorted(p for p in self.labels if p != TT and not p.startswith("!"))

    @property
    def init(self):
        return self.names(self.init_mask)

    @property
    def edges(self):
        return [(self.states[i], self.states[j]) for i, js in enumerate(self.succ) for j in js]

    def mask(self, names) -> int:
        return mask_of(self._idx(s) for s in names)

    def names(self, mask: int) -> frozenset:
        return frozenset(self.states[i] for i in bits(mask))

    def label_mask(self, prop: str) -> int:
        try:
            return self.labels[prop]
        except KeyError:
            raise UnknownProp(prop) from None

    def labeling(self, state) -> frozenset:
        i = self._idx(state)
        return frozenset(p for p, m in self.labels.items() if m >> i & 1)

    def post_mask(self, mask: int) -> int:
        out = 0
        for i in bits(mask):
            out |= self.succ_mask[i]
        return out

    def post(self, xs) -> frozenset:
        """Union of the successor sets of the given states."""
        return self.names(self.post_mask(self.mask(xs)))

    def __repr__(self):
        return f"TransitionSystem({self.n} states, {sum(map(len, self.succ))} edges)"


# -- JSON system format -------------------------------------------------------

def _load_json(text):
    if isinstance(text, (bytes, bytearray)):
        text = text.decode()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from None


def parse_ts(text) -> TransitionSystem:
    data = _load_json(text)
    if not isinstance(data, dict) or "states" not in data or "edges" not in data:
        raise ParseError("system file needs 'states' and 'edges'")
    try:
        edges = [tuple(e) for e in data["edges"]]
        if any(len(e) != 2 for e in edges):
            raise ParseError("each edge must be a [source, target] pair")
        return TransitionSystem(
            states=data["states"],
            init=data.get("init", data["states"]),
            labeling=data.get("props", {}),
            edges=edges,
        )
    except (TypeError, AttributeError) as exc:
        raise ParseError(f"malformed system file: {exc}") from None


def load_ts(path) -> TransitionSystem:
    with open(path, "rb") as fh:
        return parse_ts(fh.read())


def serialize_ts(ts: TransitionSystem) -> str:
    props = {}
    unused = sorted(p for p in ts.positive_props if not ts.labels[p])
    for s in ts.states:
        pos = sorted(p for p in ts.labeling(s) if p != TT and not p.startswith("!"))
        pos += ["!" + p for p in unused]
        if pos:
            props[s] = pos
    return json.dumps(
        {"states": list(ts.states), "init": sorted(ts.init, key=ts.index.get), "props": props,
         "edges": [list(e) for e in ts.edges]},
        indent=1,
    )


# -- control flow graphs ------------------------------------------------------

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_ASSIGN = re.compile(rf"^({_IDENT})\s*:=\s*(.+)$")
_GUARD = re.compile(rf"^({_IDENT}|-?\d+)\s*(!=|=)\s*({_IDENT}|-?\d+)$")
_EXPR = re.compile(rf"^(?:({_IDENT})\s*(?:([+-])\s*(\d+))?|(-?\d+))$")


@dataclass(frozen=True)
class Cfg:
    nodes: tuple
    start: str
    end: str
    vars: tuple
    modulus: int
    edges: tuple = field(default_factory=tuple)


def _check_operand(tok, cfg_vars):
    if re.fullmatch(_IDENT, tok) and tok not in cfg_vars:
        raise ValidationError(f"undeclared variable {tok!r}")


def compile_guard(text: str, cfg_vars, modulus):
    """Compile ``a = b`` / ``a != b`` into a predicate over environments."""
    m = _GUARD.match(text.strip())
    if not m:
        raise ParseError(f"bad guard {text!r}")
    lhs, op, rhs = m.groups()
    _check_operand(lhs, cfg_vars)
    _check_operand(rhs, cfg_vars)

    def value(tok, env):
        if tok in cfg_vars:
            return env[cfg_vars.index(tok)]
        return int(tok) % modulus

    if op == "=":
        return lambda env: value(lhs, env) == value(rhs, env)
    return lambda env: value(lhs, env) != value(rhs, env)


def _compile_stmt(text: str, cfg_vars, modulus):
    m = _ASSIGN.match(text)
    if m:
        target, expr = m.group(1), m.group(2).strip()
        if target not in cfg_vars:
            raise ValidationError(f"undeclared variable {target!r}")
        e = _EXPR.match(expr)
        if not e:
            raise ParseError(f"bad expression {expr!r}")
        var, sign, const, literal = e.groups()
        t = cfg_vars.index(target)
        if literal is not None:
            v = int(literal) % modulus
            return lambda env: (env[:t] + (v,) + env[t + 1:],)
        _check_operand(var, cfg_vars)
        src = cfg_vars.index(var)
        delta = int(const or 0) * (-1 if sign == "-" else 1)
        return lambda env: (env[:t] + ((env[src] + delta) % modulus,) + env[t + 1:],)
    guard = compile_guard(text, cfg_vars, modulus)
    return lambda env: (env,) if guard(env) else ()


def _compile_label(label: str, cfg_vars, modulus):
    steps = [_compile_stmt(s.strip(), cfg_vars, modulus) for s in label.split(";") if s.strip()]

    def run(env):
        envs = (env,)
        for step in steps:
            envs = tuple(out for e in envs for out in step(e))
        return envs

    return run


def parse_cfg(text, modulus: int | None = None) -> Cfg:
    data = _load_json(text)
    try:
        k = int(modulus if modulus is not None else data.get("modulus", 2))
        cfg = Cfg(
            nodes=tuple(str(n) for n in data["nodes"]),
            start=str(data["start"]),
            end=str(data["end"]),
            vars=tuple(data.get("vars", ())),
            modulus=k,
            edges=tuple((str(a), str(lbl), str(b)) for a, lbl, b in data.get("edges", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed CFG file: {exc}") from None
    _validate_cfg(cfg)
    return cfg


def load_cfg(path, modulus: int | None = None) -> Cfg:
    with open(path, "rb") as fh:
        return parse_cfg(fh.read(), modulus)


def _validate_cfg(cfg: Cfg):
    if cfg.modulus <= 0:
        raise ModulusZero(f"modulus must be positive, got {cfg.modulus}")
    if "n" in cfg.vars:
        raise ValidationError("'n' is reserved for the program-point proposition")
    for node in (cfg.start, cfg.end):
        if node not in cfg.nodes:
            raise ValidationError(f"unknown node {node!r}")
    for a, label, b in cfg.edges:
        if a not in cfg.nodes or b not in cfg.nodes:
            raise ValidationError(f"edge {a!r} -> {b!r} mentions an unknown node")
        _compile_label(label, cfg.vars, cfg.modulus)


def _state_name(node, env, modulus):
    sep = "" if modulus <= 10 else ","
    return f"({node},{sep.join(str(v) for v in env)})"


def cfg_to_ts(cfg: Cfg, predicates: dict | None = None) -> TransitionSystem:
    """Unfold a CFG over Z_k environments into a transition system.

    Propositions: ``n=<node>``, ``v=c`` for each variable and value,
    ``u=v`` for each pair of variables, plus the named guard predicates.
    End states loop on themselves; so does any state with no outgoing
    transfer, which keeps the relation total.
    """
    _validate_cfg(cfg)
    k, vs = cfg.modulus, cfg.vars
    envs = list(itertools.product(range(k), repeat=len(vs)))
    layout_nodes, layout_envs, names = [], [], []
    index = {}
    for ni, node in enumerate(cfg.nodes):
        for env in envs:
            index[(node, env)] = len(names)
            names.append(_state_name(node, env, k))
            layout_nodes.append(ni)
            layout_envs.append(env)

    transfers = [(a, _compile_label(lbl, vs, k), b) for a, lbl, b in cfg.edges]
    edges = []
    for node in cfg.nodes:
        for env in envs:
            src = names[index[(node, env)]]
            targets = set()
            if node == cfg.end:
                targets.add(src)
            for a, run, b in transfers:
                if a == node:
                    targets.update(names[index[(b, out)]] for out in run(env))
            if not targets:
                targets.add(src)
            edges.extend((src, t) for t in sorted(targets))

    guards = {}
    for i, v in enumerate(vs):
        for c in range(k):
            guards[f"{v}={c}"] = (lambda i, c: lambda env: env[i] == c)(i, c)
        for j in range(i + 1, len(vs)):
            guards[f"{v}={vs[j]}"] = (lambda i, j: lambda env: env[i] == env[j])(i, j)
    for name, text in (predicates or {}).items():
        guards[name] = compile_guard(text, vs, k)

    labeling = {}
    for idx, name in enumerate(names):
        node, env = cfg.nodes[layout_nodes[idx]], layout_envs[idx]
        labeling[name] = [f"n={node}"] + [g for g, fn in guards.items() if fn(env)]
    # make sure every proposition is declared even if nowhere true
    all_props = {f"n={n}" for n in cfg.nodes} | set(guards)
    declared = {p for props in labeling.values() for p in props}
    for p in all_props - declared:
        labeling[names[0]].append("!" + p)

    init = [names[index[(cfg.start, env)]] for env in envs]
    layout = CfgLayout(tuple(cfg.nodes), tuple(vs), k, tuple(layout_nodes), tuple(layout_envs))
    return TransitionSystem(names, init, labeling, edges, layout=layout)
