"""Reference implementations written independently of the library.

They trade speed for obviousness: requirement expressions are evaluated by
substituting values into the graph and recursing, entailment is checked
assignment by assignment, and dangling ends are found by scanning names.
"""

from __future__ import annotations

from itertools import product

from modelweave.core_model import CoreModel
from modelweave.requirements import DecompositionGraph


def brute_value(g: DecompositionGraph, node_id: str, assignment: dict[str, bool]) -> bool:
    """Truth of ``node_id`` under ``assignment`` (leaf id -> bool)."""
    for conn in g.connectors:
        if conn.parent == node_id:
            values = [brute_value(g, child, assignment) for child in conn.children]
            return all(values) if conn.op.value == "and" else any(values)
    return assignment[node_id]


def leaf_ids(g: DecompositionGraph) -> list[str]:
    parents = {c.parent for c in g.connectors}
    return [n.id for n in g.nodes if n.id not in parents]


def assignments(leaves: list[str]):
    for bits in product((False, True), repeat=len(leaves)):
        yield dict(zip(leaves, bits))


def brute_entails(g: DecompositionGraph, target: str, given: list[str]) -> bool:
    """Every assignment making all of ``given`` true also makes ``target`` true."""
    leaves = leaf_ids(g)
    for a in assignments(leaves):
        if all(brute_value(g, x, a) for x in given) and not brute_value(g, target, a):
            return False
    return True


def dangling_ends(model: CoreModel) -> list[str]:
    names = {c.name for c in model.classes}
    out = []
    for assoc in model.associations:
        for end in (assoc.end_a, assoc.end_b):
            if end.class_name not in names:
                out.append(f"{assoc.name}.{end.role}")
    return out


def element_names(model: CoreModel) -> set[str]:
    """Dotted names of every element, built without QualifiedName."""
    out = set()
    for c in model.classes:
        out.add(c.name)
        out |= {f"{c.name}.{a.name}" for a in c.attributes}
        out |= {f"{c.name}.{m.name}" for m in c.methods}
    for a in model.associations:
        out.add(f"assoc.{a.name}")
        out |= {f"assoc.{a.name}.{a.end_a.role}", f"assoc.{a.name}.{a.end_b.role}"}
    return out
