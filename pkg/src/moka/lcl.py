"""Local completeness logic: obligations, proof search, validation and repair.

Triples ``[P] r [Q]`` relate concrete stack sets.  Proof search always takes
the exact postcondition ``Q = [[r]]P``; a triple is valid when ``Q`` is
contained in the concrete run and the abstract run from ``alpha(P)`` lands
exactly on ``alpha(Q)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import kaf as K
from .abstract import AbstractCarrier, StackDomain
from .bits import bits
from .errors import BudgetExceeded, NoStrictRefinement, UnboundVariable
from .interp import Evaluator
from .stacks import (
    StackCarrier, canonical_name, current_mask, eval_basic, format_stack_set, lift_states,
)

__all__ = [
    "ProofTree",
    "ObligationFailure",
    "TripleReport",
    "Prover",
    "is_locally_complete",
    "derive",
    "validate_triple",
    "check_proof",
    "repair",
    "refine_equivalence",
    "verify_with_repair_loop",
    "Proved",
    "Refuted",
    "OutOfBudget",
]


@dataclass
class ProofTree:
    rule: str
    pre: frozenset
    term: K.Term
    post: frozenset
    children: list = field(default_factory=list)
    evidence: dict = field(default_factory=dict)

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()

    def size(self):
        return sum(1 for _ in self.nodes())

    def rules(self):
        return [n.rule for n in self.nodes()]

    def to_dict(self, ts, max_stacks=20):
        def show(S):
            items = format_stack_set(S, ts)
            return items if len(items) <= max_stacks else items[:max_stacks] + [f"... {len(items)} total"]

        return {
            "rule": self.rule,
            "pre": show(self.pre),
            "term": K.pretty(self.term),
            "post": show(self.post),
            "evidence": self.evidence,
            "children": [c.to_dict(ts, max_stacks) for c in self.children],
        }

    def to_json(self, ts, **kw):
        return json.dumps(self.to_dict(ts), **kw)

    def to_text(self, ts, indent=0):
        def states(S):
            return "{" + ",".join(sorted(ts.names(current_mask(S)), key=ts.index.get)) + "}"

        pad = "  " * indent
        line = f"{pad}|- [{states(self.pre)}] {K.pretty(self.term)} [{states(self.post)}]  ({self.rule})"
        out = [line]
        for c in self.children:
            out.append(c.to_text(ts, indent + 1))
        return "\n".join(out)


@dataclass
class ObligationFailure:
    expression: str
    pre: frozenset
    lhs: frozenset
    rhs: frozenset
    witnesses: int
    domain: StackDomain = field(repr=False, default=None)

    def describe(self):
        D = self.domain
        return {
            "expression": self.expression,
            "pre_states": sorted(D.ts.names(current_mask(self.pre)), key=D.ts.index.get),
            "lhs": D.format(self.lhs),
            "rhs": D.format(self.rhs),
            "witnesses": sorted(D.ts.names(self.witnesses), key=D.ts.index.get),
        }


class _Failed(Exception):
    def __init__(self, failure):
        super().__init__(failure.expression)
        self.failure = failure


@dataclass
class TripleReport:
    ok: bool
    problems: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


class Prover:
    """Proof search and checking against one stack domain.

    Keeps one concrete and one abstract evaluator so that mu solvers and
    approximant tables are shared across obligations.
    """

    def __init__(self, domain: StackDomain, budget: int = 100_000, max_unroll: int = 10_000):
        self.D = domain
        self.ts = domain.ts
        self.budget = budget
        self.max_unroll = max_unroll
        self.steps = 0
        self.conc = Evaluator(StackCarrier(self.ts))
        self.abs = Evaluator(AbstractCarrier(domain))

    # -- evaluation --------------------------------------------------------
    def concrete(self, t, P):
        return self.conc.eval(t, P)

    def abstract(self, t, T):
        return self.abs.eval(t, T)

    # -- obligations -------------------------------------------------------
    def local_completeness(self, name, P):
        D = self.D
        lhs = D.alpha(eval_basic(name, P, self.ts))
        rhs = D.generic_bca(name, D.alpha(P))
        if lhs == rhs:
            return None
        wit = D.current_gamma(rhs) & ~D.current_gamma(lhs)
        return ObligationFailure(name, P, lhs, rhs, wit, D)

    def _tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded(f"derivation exceeded {self.budget} steps")

    # -- proof search ------------------------------------------------------
    def derive(self, t, P):
        self._tick()
        if isinstance(t, K.One):
            return ProofTree("transfer", P, t, P)
        if isinstance(t, K.Zero):
            return ProofTree("transfer", P, t, frozenset())
        if isinstance(t, K.Basic):
            name = canonical_name(t.name)
            fail = self.local_completeness(name, P)
            if fail is not None:
                raise _Failed(fail)
            return ProofTree("transfer", P, t, eval_basic(name, P, self.ts))
        if isinstance(t, K.Seq):
            return self._derive_seq(t, P)
        if isinstance(t, K.Choice):
            a = self.derive(t.left, P)
            b = self.derive(t.right, P)
            return ProofTree("join", P, t, a.post | b.post, [a, b])
        if isinstance(t, K.Star):
            return self._derive_star(t, P)
        if isinstance(t, K.Mu):
            return self._derive_mu(t, P)
        if isinstance(t, K.MuApprox):
            if t.n == 0:
                return ProofTree("mu0", P, t, frozenset())
            child = self.derive(K.unfold(t), P)
            return ProofTree("mu-plus", P, t, child.post, [child])
        if isinstance(t, K.Var):
            raise UnboundVariable(t.name)
        raise TypeError(f"not a term: {t!r}")

    def _derive_seq(self, t, P):
        items = _flatten_seq(t)
        if _PUSH in items:
            return self._derive_items(items, P)
        a = self.derive(t.left, P)
        b = self.derive(t.right, a.post)
        return ProofTree("seq", P, t, b.post, [a, b])

    def _derive_items(self, items, P):
        """Thread a flattened sequence, treating balanced push ... pop blocks as frames."""
        if len(items) == 1:
            return self.derive(items[0], P)
        end = _frame_end(items)
        if end is not None:
            head, rest = items[:end + 1], items[end + 1:]
            first = self._derive_frame(K.seq(*head[1:-1]), P)
        else:
            head, rest = items[:1], items[1:]
            first = self.derive(head[0], P)
        if not rest:
            return first
        second = self._derive_items(rest, first.post)
        return ProofTree("seq", P, K.seq(*items), second.post, [first, second])

    def _derive_frame(self, body, P):
        """``push; body; pop`` with a depth-neutral body, derived on the top frames alone.

        The body never looks below the pushed copy, so its obligations are
        discharged on depth-one stacks.  The conclusion is then validated as
        a stack triple; if that fails the block is derived frame by frame.
        """
        term = K.seq(_PUSH, body, _POP)
        tops = frozenset((s[0],) for s in P)
        child = self.derive(body, tops)
        post = self.concrete(term, P)
        if self.validate(P, term, post):
            return ProofTree("frame", P, term, post, [child])
        a = self.derive(_PUSH, P)
        b = self._derive_items(_flatten_seq(body) + [_POP], a.post)
        return ProofTree("seq", P, term, b.post, [a, b])

    def _derive_star(self, t, P):
        D = self.D
        chain = []
        cur = P
        for _ in range(self.max_unroll):
            body = self.derive(t.body, cur)
            if D.leq(D.alpha(body.post), D.alpha(cur)):
                node = ProofTree("iterate", cur, t, cur | body.post, [body])
                for pre, prev_body in reversed(chain):
                    node = ProofTree("rec", pre, t, node.post, [prev_body, node])
                return node
            chain.append((cur, body))
            cur = cur | body.post
        raise BudgetExceeded(f"star unrolled more than {self.max_unroll} times")

    def afix_index(self, t, P):
        """Smallest usable approximant index for (afix), with the two bounds that fix it."""
        D = self.D
        start = D.alpha(P)
        target = self.abstract(t, start)
        stab = 0
        while self.abstract(K.approximant(t, stab), start) != target:
            stab += 1
            self._tick()
        depth = self.abs.solver_for(t).depth(start) if start else 0
        n = max(stab, depth)
        while self.abstract(K.approximant(t, n), start) != target:
            n += 1
            self._tick()
        return n, stab, depth

    def _derive_mu(self, t, P):
        if t.fv:
            raise UnboundVariable(sorted(t.fv)[0])
        n, stab, depth = self.afix_index(t, P)
        child = self.derive(K.approximant(t, n), P)
        return ProofTree("afix", P, t, child.post, [child],
                         {"n": n, "stabilization": stab, "dependency_depth": depth})

    # -- checking ----------------------------------------------------------
    def validate(self, pre, t, post) -> TripleReport:
        D = self.D
        problems = []
        full = self.concrete(t, pre)
        if not post <= full:
            problems.append("postcondition is not contained in the concrete run")
        ap = D.alpha(post)
        if D.alpha(full) != ap:
            problems.append("postcondition and concrete run have different abstractions")
        if self.abstract(t, D.alpha(pre)) != ap:
            problems.append("abstract run differs from the abstraction of the postcondition")
        return TripleReport(not problems, problems)

    def check(self, tree: ProofTree) -> TripleReport:
        """Validate every node and the side condition of each rule."""
        D = self.D
        problems = []
        for node in tree.nodes():
            rep = self.validate(node.pre, node.term, node.post)
            problems += [f"{node.rule} at {K.pretty(node.term)}: {p}" for p in rep.problems]
            kids = node.children
            if node.rule == "transfer" and isinstance(node.term, K.Basic):
                if self.local_completeness(canonical_name(node.term.name), node.pre) is not None:
                    problems.append(f"transfer at {node.term.name} lacks local completeness")
            elif node.rule == "iterate":
                if not D.leq(D.alpha(kids[0].post), D.alpha(node.pre)):
                    problems.append("iterate side condition fails")
            elif node.rule == "fix":
                lhs = self.abstract(node.term, D.alpha(node.pre))
                if not D.leq(lhs, D.alpha(node.post)):
                    problems.append("fix side condition fails")
            elif node.rule == "afix":
                n = node.evidence.get("n")
                start = D.alpha(node.pre)
                if n is None or self.abstract(K.approximant(node.term, n), start) != \
                        self.abstract(node.term, start):
                    problems.append("afix side condition fails")
            elif node.rule == "frame":
                body = node.term.right.left if isinstance(node.term.right, K.Seq) else None
                if (not kids or kids[0].pre != frozenset((s[0],) for s in node.pre)
                        or kids[0].term != body or _depth_neutral(body) is False):
                    problems.append("frame side condition fails")
            elif node.rule == "relax":
                inner = kids[0]
                if not (inner.pre <= node.pre and D.leq(D.alpha(node.pre), D.alpha(inner.pre))
                        and node.post <= inner.post
                        and D.leq(D.alpha(inner.post), D.alpha(node.post))):
                    problems.append("relax side condition fails")
        return TripleReport(not problems, problems)


_PUSH, _POP = K.Basic("push"), K.Basic("pop")


def _flatten_seq(t):
    if isinstance(t, K.Seq):
        return _flatten_seq(t.left) + _flatten_seq(t.right)
    return [t]


def _depth_neutral(t):
    shape = K.stack_shape(t)
    return shape is not None and (shape == "any" or shape == (0, 0))


def _frame_end(items):
    """Index of the pop closing a leading push whose body is depth-neutral."""
    if items[0] != _PUSH:
        return None
    depth = 0
    for j, it in enumerate(items[1:], 1):
        if it == _PUSH:
            depth += 1
        elif it == _POP:
            if depth == 0:
                body = items[1:j]
                return j if body and _depth_neutral(K.seq(*body)) else None
            depth -= 1
    return None


def is_locally_complete(name, P, domain: StackDomain):
    """``None`` when the basic is locally complete on ``P``, else the failure."""
    return Prover(domain).local_completeness(canonical_name(name), P)


def derive(t, P, domain: StackDomain, budget: int = 100_000, prover: Prover | None = None):
    """A proof tree for ``[P] t [[[t]]P]`` or the first failing obligation."""
    prover = prover or Prover(domain, budget)
    try:
        return prover.derive(t, P)
    except _Failed as exc:
        return exc.failure


def validate_triple(pre, t, post, domain: StackDomain, prover: Prover | None = None):
    return (prover or Prover(domain)).validate(pre, t, post)


def check_proof(tree: ProofTree, domain: StackDomain, prover: Prover | None = None):
    return (prover or Prover(domain)).check(tree)


# -- repair ---------------------------------------------------------------------

def _state_action(ts, name, mask):
    if name == "next":
        return ts.post_mask(mask)
    if name in ("push", "pop", "add", "reset"):
        return mask
    if name in ("loop?", "!loop?"):
        raise NoStrictRefinement(f"{name} depends on traces; state-level repair cannot help")
    return mask & ts.label_mask(name[:-1])


def repair_element(failure: ObligationFailure) -> int:
    D = failure.domain
    A, ts = D.A, D.ts
    name = canonical_name(failure.expression)
    P = current_mask(failure.pre)
    target = _state_action(ts, name, P)
    r = P
    for i in bits(A.gamma(A.alpha(P))):
        if _state_action(ts, name, 1 << i) & ~target == 0:
            r |= 1 << i
    return r


def repair(failure: ObligationFailure, name=None):
    """The abstraction enlarged by the repair element of a failed obligation."""
    A = failure.domain.A
    r = repair_element(failure)
    if A.alpha(r) == r:
        raise NoStrictRefinement(
            f"{sorted(A.ts.names(r))} is already an element; no strict refinement at "
            f"{failure.expression}")
    return A.add_element(r, name)


def refine_equivalence(domain: StackDomain, selector: str) -> StackDomain:
    """The same abstraction under another (finer) equivalence selector."""
    return StackDomain(domain.A, selector)


# -- repair loop ----------------------------------------------------------------

@dataclass
class Proved:
    proof: ProofTree
    domain: StackDomain
    repairs: list

    holds = True


@dataclass
class Refuted:
    counterexamples: int
    proof: ProofTree
    domain: StackDomain
    repairs: list

    holds = False


@dataclass
class OutOfBudget:
    failure: ObligationFailure | None
    domain: StackDomain
    repairs: list
    reason: str = ""

    holds = None


def verify_with_repair_loop(program, domain: StackDomain, init: int, budget: int = 10,
                            derive_budget: int = 100_000):
    """Alternate proof search and repair until the triple closes.

    ``program`` is a counterexample program (e.g. an encoded formula) and
    ``init`` a mask of initial states.
    """
    repairs = []
    D = domain
    failure = None
    for _ in range(budget + 1):
        P = lift_states(D.ts, init)
        try:
            res = derive(program, P, D, derive_budget)
        except BudgetExceeded as exc:
            return OutOfBudget(failure, D, repairs, str(exc))
        if isinstance(res, ProofTree):
            q = current_mask(res.post)
            return Proved(res, D, repairs) if not q else Refuted(q, res, D, repairs)
        failure = res
        if len(repairs) >= budget:
            break
        try:
            label = f"c{len(repairs) + 1}"
            A2 = repair(failure, name=label)
        except NoStrictRefinement as exc:
            return OutOfBudget(failure, D, repairs, str(exc))
        added = sorted(set(A2.elements()) - set(D.A.elements())) if A2.enumerable else None
        names = lambda m: sorted(D.ts.names(m), key=D.ts.index.get)  # noqa: E731
        repairs.append({"obligation": failure.describe(), "element": label,
                        "states": names(repair_element(failure)),
                        "added": None if added is None else [names(m) for m in added]})
        D = StackDomain(A2, D.eq.name)
    return OutOfBudget(failure, D, repairs, f"repair budget {budget} exhausted")

