"""Cooperative-requirement decomposition graphs.

A cooperative requirement (CR) decomposes through one AND/OR connector into
existing (ER) and additional (AR) requirements, or into further CRs.  Since
the resulting formulas are negation-free, inference between CRs is plain
boolean entailment, decided here by exhaustive truth tables.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .core_model import QualifiedName, Violation, is_identifier
from .errors import CapacityError

DEFAULT_MAX_LEAVES = 20


class NodeKind(enum.Enum):
    CR = "cr"
    ER = "er"
    AR = "ar"


class Op(enum.Enum):
    AND = "and"
    OR = "or"


@dataclass(frozen=True)
class RequirementNode:
    id: str
    kind: NodeKind
    text: str = ""
    source_system: Optional[str] = None
    linked_aspects: tuple[str, ...] = ()


@dataclass(frozen=True)
class Connector:
    parent: str
    op: Op
    children: tuple[str, ...]


@dataclass(frozen=True)
class DecompositionGraph:
    name: str
    nodes: tuple[RequirementNode, ...] = ()
    connectors: tuple[Connector, ...] = ()

    def node(self, node_id: str) -> Optional[RequirementNode]:
        for n in self.nodes:
            if n.id == node_id:
                return n
        return None

    def connector_of(self, cr: str) -> Optional[Connector]:
        for c in self.connectors:
            if c.parent == cr:
                return c
        return None

    @property
    def cr_ids(self) -> list[str]:
        return [n.id for n in self.nodes if n.kind is NodeKind.CR]

    @property
    def leaf_ids(self) -> list[str]:
        return [n.id for n in self.nodes if n.kind is not NodeKind.CR]


@dataclass(frozen=True)
class Leaf:
    id: str

    def __str__(self) -> str:
        return self.id


@dataclass(frozen=True)
class Junction:
    op: Op
    operands: tuple["Expression", ...]

    def __str__(self) -> str:
        sep = " & " if self.op is Op.AND else " | "
        parts = [f"({o})" if isinstance(o, Junction) else str(o) for o in self.operands]
        return sep.join(parts)


Expression = Union[Leaf, Junction]


def leaves_of(expr: Expression) -> set[str]:
    if isinstance(expr, Leaf):
        return {expr.id}
    out: set[str] = set()
    for o in expr.operands:
        out |= leaves_of(o)
    return out


def validate_graph(g: DecompositionGraph) -> list[Violation]:
    out: list[Violation] = []
    kinds: dict[str, NodeKind] = {}
    for n in g.nodes:
        path = QualifiedName.of(n.id)
        if not is_identifier(n.id):
            out.append(Violation(path, f"id {n.id!r} is not a valid identifier"))
        if n.id in kinds:
            out.append(Violation(path, f"duplicate requirement id {n.id!r}"))
        kinds.setdefault(n.id, n.kind)
        if n.source_system is not None and n.kind is not NodeKind.ER:
            out.append(Violation(path, "only existing requirements carry a source system"))

    seen_parents: set[str] = set()
    for c in g.connectors:
        path = QualifiedName.of(c.parent)
        kind = kinds.get(c.parent)
        if kind is None:
            out.append(Violation(path, f"connector parent {c.parent!r} does not exist"))
        elif kind is not NodeKind.CR:
            out.append(Violation(path, f"{kind.value} {c.parent!r} is a leaf and cannot decompose"))
        if c.parent in seen_parents:
            out.append(Violation(path, "more than one connector for this requirement"))
        seen_parents.add(c.parent)
        if not c.children:
            out.append(Violation(path, "connector has no children"))
        for child in c.children:
            if child not in kinds:
                out.append(Violation(path, f"child {child!r} does not exist"))
    for n in g.nodes:
        if n.kind is NodeKind.CR and n.id not in seen_parents:
            out.append(Violation(QualifiedName.of(n.id), "cooperative requirement has no connector"))

    # Cycle detection over CR -> child edges (iterative DFS, colour marking).
    edges = {c.parent: [ch for ch in c.children if ch in kinds] for c in g.connectors}
    state: dict[str, int] = {}
    reported: set[str] = set()
    for start in edges:
        if state.get(start):
            continue
        stack = [(start, iter(edges.get(start, ())))]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
                continue
            if state.get(nxt) == 1:
                cycle = [name for name, _ in stack]
                cycle = cycle[cycle.index(nxt):]
                key = min(cycle)
                if key not in reported:
                    reported.add(key)
                    out.append(Violation(QualifiedName.of(key), "decomposition cycle: " + " -> ".join(cycle + [nxt])))
            elif not state.get(nxt):
                state[nxt] = 1
                stack.append((nxt, iter(edges.get(nxt, ()))))
    return sorted(out)


def _require_cr(g: DecompositionGraph, cr: str) -> Connector:
    node = g.node(cr)
    if node is None or node.kind is not NodeKind.CR:
        raise ValueError(f"{cr!r} is not a cooperative requirement of graph {g.name!r}")
    conn = g.connector_of(cr)
    if conn is None:
        raise ValueError(f"{cr!r} has no connector")
    return conn


def expression_of(g: DecompositionGraph, cr: str) -> Expression:
    """Expand ``cr`` into a formula over ER/AR ids by substituting child CRs."""
    _require_cr(g, cr)
    memo: dict[str, Expression] = {}

    def expand(node_id: str) -> Expression:
        if node_id in memo:
            return memo[node_id]
        node = g.node(node_id)
        if node is None:
            raise ValueError(f"unknown requirement {node_id!r}")
        if node.kind is not NodeKind.CR:
            expr: Expression = Leaf(node_id)
        else:
            conn = _require_cr(g, node_id)
            parts = tuple(expand(ch) for ch in conn.children)
            expr = parts[0] if len(parts) == 1 else Junction(conn.op, parts)
        memo[node_id] = expr
        return expr

    return expand(cr)


def evaluate(g: DecompositionGraph, cr: str, satisfied: Iterable[str]) -> bool:
    """Truth value of ``cr`` when exactly the leaves in ``satisfied`` hold."""
    truth = set(satisfied)
    _require_cr(g, cr)
    memo: dict[str, bool] = {}

    def value(node_id: str) -> bool:
        if node_id not in memo:
            node = g.node(node_id)
            if node is None:
                raise ValueError(f"unknown requirement {node_id!r}")
            if node.kind is NodeKind.CR:
                conn = _require_cr(g, node_id)
                combine = all if conn.op is Op.AND else any
                memo[node_id] = combine(value(ch) for ch in conn.children)
            else:
                memo[node_id] = node_id in truth
        return memo[node_id]

    return value(cr)


def _leaf_column(index: int, n: int) -> int:
    """Truth-table column of variable ``index`` over all ``2**n`` assignments.

    Bit ``k`` of the result is set iff assignment ``k`` makes the variable true
    (assignment ``k`` sets variable ``i`` iff bit ``i`` of ``k`` is set).
    """
    half = 1 << index
    width = half << 1
    col = ((1 << half) - 1) << half
    total = 1 << n
    while width < total:
        col |= col << width
        width <<= 1
    return col


def truth_table(expr: Expression, order: list[str]) -> int:
    n = len(order)
    full = (1 << (1 << n)) - 1
    columns = {leaf: _leaf_column(i, n) for i, leaf in enumerate(order)}

    def table(e: Expression) -> int:
        if isinstance(e, Leaf):
            return columns[e.id]
        if e.op is Op.AND:
            acc = full
            for o in e.operands:
                acc &= table(o)
            return acc
        acc = 0
        for o in e.operands:
            acc |= table(o)
        return acc

    return table(expr)


def _check_capacity(n: int, bound: int) -> None:
    if n > bound:
        raise CapacityError(f"{n} leaves exceed the brute-force bound of {bound}")


def is_inferable(
    g: DecompositionGraph,
    target: str,
    given: Iterable[str],
    *,
    max_leaves: int = DEFAULT_MAX_LEAVES,
) -> bool:
    """Whether every leaf assignment satisfying all of ``given`` satisfies ``target``.

    Enumerates the ``2**n`` assignments over the leaves the formulas mention.
    """
    given = list(dict.fromkeys(given))
    if target in given:
        raise ValueError(f"target {target!r} is among the given requirements")
    target_expr = expression_of(g, target)
    given_exprs = [expression_of(g, cr) for cr in given]
    order = sorted(leaves_of(target_expr).union(*(leaves_of(e) for e in given_exprs)))
    _check_capacity(len(order), max_leaves)
    full = (1 << (1 << len(order))) - 1
    premise = full
    for e in given_exprs:
        premise &= truth_table(e, order)
    return premise & ~truth_table(target_expr, order) & full == 0


@dataclass(frozen=True)
class Redundancy:
    cr: str
    inferred_from: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.cr} <= {', '.join(self.inferred_from)}"


def redundant_crs(g: DecompositionGraph, *, max_leaves: int = DEFAULT_MAX_LEAVES) -> list[Redundancy]:
    """Every CR paired with each inclusion-minimal set of other CRs entailing it.

    Results follow CR declaration order, then witness size, then combination
    order.  The search is exponential in the number of CRs.
    """
    crs = g.cr_ids
    exprs = {cr: expression_of(g, cr) for cr in crs}
    order = sorted(set().union(*(leaves_of(e) for e in exprs.values()))) if crs else []
    _check_capacity(len(order), max_leaves)
    full = (1 << (1 << len(order))) - 1
    tables = {cr: truth_table(e, order) for cr, e in exprs.items()}

    found: list[Redundancy] = []
    for cr in crs:
        others = [o for o in crs if o != cr]
        outside = ~tables[cr] & full
        everything = full
        for o in others:
            everything &= tables[o]
        if everything & outside:
            continue  # even all other CRs together do not entail cr
        witnesses: list[frozenset[str]] = []
        for size in range(1, len(others) + 1):
            for combo in itertools.combinations(others, size):
                members = frozenset(combo)
                if any(w <= members for w in witnesses):
                    continue
                acc = full
                for o in combo:
                    acc &= tables[o]
                if acc & outside == 0:
                    witnesses.append(members)
                    found.append(Redundancy(cr, combo))
    return found
