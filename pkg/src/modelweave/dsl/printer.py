"""Canonical text for every model kind.

Declaration order is preserved; only layout is normalised (two-space
indentation, one declaration per line, default multiplicities omitted).
"""

from __future__ import annotations

from ..aspect_model import AddPayload, Advice, AspectModel, UpdatePayload, format_priority
from ..core_model import (
    ONE,
    AssociationDecl,
    AttributeDecl,
    ClassDecl,
    CoreModel,
    MethodDecl,
    Multiplicity,
)
from ..requirements import DecompositionGraph, NodeKind
from ..weaving_model import WeavingModel
from .lexer import escape


def _mult(m: Multiplicity) -> str:
    return "" if m == ONE else f" {m}"


def _attribute(a: AttributeDecl) -> str:
    return f"attr {a.name} : {a.type_name}{_mult(a.multiplicity)};"


def _method(m: MethodDecl) -> str:
    params = ", ".join(f"{p.name} : {p.type_name}" for p in m.parameters)
    ret = f" : {m.return_type}" if m.return_type is not None else ""
    return f"op {m.name}({params}){ret};"


def _class(c: ClassDecl, indent: str) -> list[str]:
    head = f"{indent}class {c.name}"
    if c.association_class_of is not None:
        head += f" associationClassOf {c.association_class_of}"
    if not c.attributes and not c.methods:
        return [head + " { }"]
    lines = [head + " {"]
    lines += [f"{indent}  {_attribute(a)}" for a in c.attributes]
    lines += [f"{indent}  {_method(m)}" for m in c.methods]
    lines.append(f"{indent}}}")
    return lines


def _association(a: AssociationDecl, indent: str) -> list[str]:
    lines = [f"{indent}association {a.name} {{"]
    for end in a.ends:
        nav = " navigable" if end.navigable else ""
        lines.append(f"{indent}  end {end.role} : {end.class_name}{nav}{_mult(end.multiplicity)};")
    lines.append(f"{indent}}}")
    return lines


def print_core(model: CoreModel) -> str:
    lines = [f"model {model.name} {{"]
    for c in model.classes:
        lines += _class(c, "  ")
    for a in model.associations:
        lines += _association(a, "  ")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _advice(adv: Advice, indent: str) -> list[str]:
    lines = [
        f"{indent}advice {adv.name} : {adv.advice_type.value} {adv.kind.value} bind {adv.bound_pointcut} {{"
    ]
    inner = indent + "  "
    payload = adv.payload
    if isinstance(payload, AddPayload):
        el = payload.element
        if isinstance(el, AttributeDecl):
            lines.append(inner + _attribute(el))
        elif isinstance(el, MethodDecl):
            lines.append(inner + _method(el))
        elif isinstance(el, ClassDecl):
            lines += _class(el, inner)
        else:
            lines += _association(el, inner)
    elif isinstance(payload, UpdatePayload):
        if payload.new_name is not None:
            lines.append(f"{inner}rename {payload.new_name};")
        if payload.new_type is not None:
            lines.append(f"{inner}retype {payload.new_type};")
    if adv.body:
        lines.append(f'{inner}body "{escape(adv.body)}";')
    lines.append(f"{indent}}}")
    return lines


def print_aspect(model: AspectModel) -> str:
    lines = [f"aspectmodel {model.name} {{"]
    for asp in model.aspects:
        lines.append(f"  aspect {asp.name} priority {format_priority(asp.priority)} {{")
        for pc in asp.pointcuts:
            lines.append(f"    pointcut {pc.name} : {pc.kind.value} on {pc.pattern};")
        for adv in asp.advices:
            lines += _advice(adv, "    ")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_weaving(w: WeavingModel) -> str:
    lines = [f"weaving {w.name} : {w.kind.value} {{"]
    for side, ref in (("left", w.left), ("right", w.right)):
        line = f'  {side} {ref.logical_name} at "{escape(ref.source_path)}"'
        if ref.content_digest is not None:
            line += f' digest "{escape(ref.content_digest)}"'
        lines.append(line + ";")
    for link in w.links:
        lines.append(f"  link {link.name} : {link.kind.value} {link.left} <-> {link.right};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_requirements(g: DecompositionGraph) -> str:
    connectors = {c.parent: c for c in g.connectors}
    lines = [f"requirements {g.name} {{"]
    for n in g.nodes:
        line = f'  {n.kind.value} {n.id} "{escape(n.text)}"'
        if n.kind is NodeKind.CR:
            conn = connectors[n.id]
            line += f" = {conn.op.value}({', '.join(conn.children)})"
        if n.source_system is not None:
            line += f" from {n.source_system}"
        if n.linked_aspects:
            line += f" aspects({', '.join(n.linked_aspects)})"
        lines.append(line + ";")
    lines.append("}")
    return "\n".join(lines) + "\n"
