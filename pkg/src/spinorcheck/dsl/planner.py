"""Contraction planning and evaluation for parsed index expressions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..tensor import ParityError, ShapeError, Species, Tensor
from .parser import Expression, SymbolTable, Term, default_symbols

#: exact subset DP up to this many factors; greedy pairing beyond
DP_LIMIT = 8


@dataclass(frozen=True)
class PlanNode:
    """Binary contraction tree over the factors of one term.

    ``factor`` is set on leaves.  ``letters`` are the indices that survive the
    node, ``size`` their product of dimensions and ``flops`` the cost of this
    node alone (product of every dimension it touches).
    """

    letters: tuple[str, ...]
    size: int
    flops: int
    factor: int | None = None
    left: "PlanNode | None" = None
    right: "PlanNode | None" = None

    @property
    def leaves(self) -> tuple[int, ...]:
        if self.factor is not None:
            return (self.factor,)
        return tuple(sorted(self.left.leaves + self.right.leaves))

    def total_flops(self) -> int:
        if self.factor is not None:
            return self.flops
        return self.flops + self.left.total_flops() + self.right.total_flops()

    def describe(self, term: Term) -> str:
        if self.factor is not None:
            return term.factors[self.factor].symbol
        return f"({self.left.describe(term)} * {self.right.describe(term)})"


@dataclass(frozen=True)
class TermPlan:
    term: Term
    root: PlanNode


@dataclass(frozen=True)
class ContractionPlan:
    expression: Expression
    terms: tuple[TermPlan, ...]

    @property
    def total_flops(self) -> int:
        return sum(t.root.total_flops() for t in self.terms)

    def describe(self) -> list[str]:
        return [t.root.describe(t.term) for t in self.terms]


def _dims(letters, species: Mapping[str, Species]) -> int:
    return int(np.prod([species[x].dim for x in letters], dtype=np.int64)) if letters else 1


class _TermContext:
    def __init__(self, term: Term, free: tuple[str, ...], species: Mapping[str, Species]):
        self.term = term
        self.free = set(free)
        self.species = species
        self.letters = [set(f.indices) for f in term.factors]

    def surviving(self, subset: frozenset[int]) -> tuple[str, ...]:
        inside = set().union(*(self.letters[i] for i in subset))
        outside = set().union(*(self.letters[i] for i in range(len(self.letters)) if i not in subset))
        return tuple(sorted(x for x in inside if x in outside or x in self.free))

    def leaf(self, i: int) -> PlanNode:
        keep = self.surviving(frozenset([i]))
        touched = self.letters[i]
        return PlanNode(keep, _dims(keep, self.species), _dims(touched, self.species), factor=i)

    def join(self, a: PlanNode, b: PlanNode) -> PlanNode:
        subset = frozenset(a.leaves + b.leaves)
        keep = self.surviving(subset)
        touched = set(a.letters) | set(b.letters)
        return PlanNode(keep, _dims(keep, self.species), _dims(touched, self.species), left=a, right=b)


def _optimal(ctx: _TermContext) -> PlanNode:
    n = len(ctx.term.factors)
    best: dict[frozenset, PlanNode] = {frozenset([i]): ctx.leaf(i) for i in range(n)}
    for size in range(2, n + 1):
        for combo in itertools.combinations(range(n), size):
            full = frozenset(combo)
            rest = combo[1:]
            choice = None
            # split off subsets containing the lowest factor, so each split is seen once
            for k in range(0, size - 1):
                for extra in itertools.combinations(rest, k):
                    left = frozenset((combo[0],) + extra)
                    right = full - left
                    node = ctx.join(best[left], best[right])
                    if choice is None or node.total_flops() < choice.total_flops():
                        choice = node
            best[full] = choice
    return best[frozenset(range(n))]


def _greedy(ctx: _TermContext) -> PlanNode:
    nodes = [ctx.leaf(i) for i in range(len(ctx.term.factors))]
    while len(nodes) > 1:
        pairs = itertools.combinations(range(len(nodes)), 2)
        i, j = min(pairs, key=lambda p: (ctx.join(nodes[p[0]], nodes[p[1]]).flops, p))
        merged = ctx.join(nodes[i], nodes[j])
        nodes = [x for k, x in enumerate(nodes) if k not in (i, j)] + [merged]
    return nodes[0]


def _left_fold(ctx: _TermContext) -> PlanNode:
    node = ctx.leaf(0)
    for i in range(1, len(ctx.term.factors)):
        node = ctx.join(node, ctx.leaf(i))
    return node


def _right_fold(ctx: _TermContext) -> PlanNode:
    n = len(ctx.term.factors)
    node = ctx.leaf(n - 1)
    for i in range(n - 2, -1, -1):
        node = ctx.join(ctx.leaf(i), node)
    return node


STRATEGIES = ("optimal", "greedy", "left", "right")


def plan_contraction(expr: Expression, strategy: str = "optimal") -> ContractionPlan:
    """Binary contraction order per term.

    ``optimal`` runs the exact subset DP for up to ``DP_LIMIT`` factors and falls
    back to greedy pairing above; ``left``/``right`` folds are the naive orders.
    """
    species = expr.letter_species()
    out = []
    for term in expr.terms:
        ctx = _TermContext(term, expr.free, species)
        if strategy == "optimal":
            root = _optimal(ctx) if len(term.factors) <= DP_LIMIT else _greedy(ctx)
        elif strategy == "greedy":
            root = _greedy(ctx)
        elif strategy == "left":
            root = _left_fold(ctx)
        elif strategy == "right":
            root = _right_fold(ctx)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        out.append(TermPlan(term, root))
    return ContractionPlan(expr, tuple(out))


# -- evaluation -------------------------------------------------------------------------


def resolve_bindings(expr: Expression, bindings: Mapping[str, Tensor],
                     table: SymbolTable | None = None) -> dict[str, Tensor]:
    """Check every used symbol against its declaration; ``Xbar`` falls back to ``X.conjugate()``."""
    table = table or default_symbols()
    used = {f.symbol for t in expr.terms for f in t.factors}
    out = {}
    for name in sorted(used):
        decl = table[name]
        t = bindings.get(name)
        if t is None and name.endswith("bar") and name[:-3] in bindings:
            t = bindings[name[:-3]].conjugate()
        if t is None:
            raise KeyError(f"no binding for symbol {name!r}")
        if tuple(t.slots) != decl.slots:
            raise ShapeError(f"{name} is declared with slots {[str(s) for s in decl.slots]}, "
                             f"bound tensor has {[str(s) for s in t.slots]}")
        if t.parity != decl.parity:
            raise ParityError(f"{name} is declared {decl.parity}, bound tensor is {t.parity}")
        out[name] = t
    return out


@dataclass
class _Partial:
    data: np.ndarray
    letters: tuple[str, ...]
    #: factor position owning each trailing generator axis
    owners: tuple[int, ...]


def _eval_node(node: PlanNode, term: Term, tensors: list[Tensor], ids: dict[str, int]) -> _Partial:
    if node.factor is not None:
        t = tensors[node.factor]
        fac = term.factors[node.factor]
        start = len(ids)
        gens = list(range(start, start + t.degree))
        data = np.einsum(t.data, [ids[x] for x in fac.indices] + gens, [ids[x] for x in node.letters] + gens)
        return _Partial(data, node.letters, (node.factor,) * t.degree)
    a = _eval_node(node.left, term, tensors, ids)
    b = _eval_node(node.right, term, tensors, ids)
    base = len(ids)
    ga = list(range(base, base + len(a.owners)))
    gb = list(range(base + len(a.owners), base + len(a.owners) + len(b.owners)))
    data = np.einsum(a.data, [ids[x] for x in a.letters] + ga, b.data, [ids[x] for x in b.letters] + gb,
                     [ids[x] for x in node.letters] + ga + gb)
    return _Partial(data, node.letters, a.owners + b.owners)


def _evaluate_term(tp: TermPlan, expr: Expression, tensors: list[Tensor]) -> tuple[np.ndarray, int]:
    letters = sorted({x for f in tp.term.factors for x in f.indices})
    ids = {x: k for k, x in enumerate(letters)}
    part = _eval_node(tp.root, tp.term, tensors, ids)
    # Generator axes back into written factor order.  The stored coefficients
    # describe ordered products, so moving axes alone restores the product in
    # the written order; no sign enters.
    order = sorted(range(len(part.owners)), key=lambda k: (part.owners[k], k))
    lead = [part.letters.index(x) for x in expr.free]
    nl = len(part.letters)
    data = np.transpose(part.data, lead + [nl + k for k in order])
    return data, len(part.owners)


def evaluate_plan(plan: ContractionPlan, bindings: Mapping[str, Tensor],
                  table: SymbolTable | None = None) -> Tensor:
    """Value of the planned expression; a rank-0 result is a graded scalar tensor."""
    table = table or default_symbols()
    expr = plan.expression
    bound = resolve_bindings(expr, bindings, table)
    species = expr.letter_species()
    free_slots = []
    for x in expr.free:
        # slot seen on the free letter's single occurrence in the first term
        for f in expr.terms[0].factors:
            if x in f.indices:
                free_slots.append(table[f.symbol].slots[f.indices.index(x)])
                break
    n_gen = max((t.n_gen for t in bound.values()), default=0)
    total, degree = None, None
    for tp in plan.terms:
        tensors = [bound[f.symbol].with_generators(n_gen) for f in tp.term.factors]
        data, deg = _evaluate_term(tp, expr, tensors)
        if degree is None:
            degree = deg
        elif deg != degree:
            raise ParityError(f"terms of Grassmann degree {degree} and {deg} cannot be added")
        c = complex(tp.term.coefficient.numerator / tp.term.coefficient.denominator)
        total = c * data if total is None else total + c * data
    if total is None:
        shape = tuple(species[x].dim for x in expr.free)
        return Tensor(free_slots, np.zeros(shape, dtype=complex))
    return Tensor(free_slots, total, degree)


def evaluate_expression(expr: Expression, bindings: Mapping[str, Tensor], table: SymbolTable | None = None,
                        strategy: str = "optimal") -> Tensor:
    return evaluate_plan(plan_contraction(expr, strategy), bindings, table)
