"""Structured (JSON) interchange and Graphviz DOT export.

Structured documents have the envelope
``{"format": "modelweave", "version": 1, "kind": ..., "model": ...}``; the
field names below are a stable contract (see README).
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Union

from ..aspect_model import (
    AddPayload,
    Advice,
    AdviceKind,
    AdviceType,
    AspectModel,
    AspectRequirement,
    DeletePayload,
    NamePattern,
    Pointcut,
    PointcutKind,
    UpdatePayload,
)
from ..core_model import (
    AssociationDecl,
    AssociationEnd,
    AttributeDecl,
    ClassDecl,
    CoreModel,
    MethodDecl,
    Multiplicity,
    Parameter,
    QualifiedName,
)
from ..requirements import Connector, DecompositionGraph, NodeKind, Op, RequirementNode
from ..weaver import OrderingConstraint, Origin, Provenance, WovenModel
from ..weaving_model import AspectRef, ElementRef, LinkKind, ModelRef, WeaveLink, WeavingKind, WeavingModel
from .printer import format_priority

FORMAT = "modelweave"
VERSION = 1

Exportable = Union[CoreModel, AspectModel, WeavingModel, WovenModel, DecompositionGraph]


class StructuredFormatError(ValueError):
    pass


# -- to documents -------------------------------------------------------------


def _mult(m: Multiplicity) -> dict:
    return {"lower": m.lower, "upper": "*" if m.upper is None else m.upper}


def _attribute(a: AttributeDecl) -> dict:
    return {"name": a.name, "type": a.type_name, "multiplicity": _mult(a.multiplicity)}


def _method(m: MethodDecl) -> dict:
    return {
        "name": m.name,
        "parameters": [{"name": p.name, "type": p.type_name} for p in m.parameters],
        "returnType": m.return_type,
    }


def _class(c: ClassDecl) -> dict:
    return {
        "name": c.name,
        "associationClassOf": c.association_class_of,
        "attributes": [_attribute(a) for a in c.attributes],
        "methods": [_method(m) for m in c.methods],
    }


def _association(a: AssociationDecl) -> dict:
    return {
        "name": a.name,
        "ends": [
            {"role": e.role, "class": e.class_name, "navigable": e.navigable, "multiplicity": _mult(e.multiplicity)}
            for e in a.ends
        ],
    }


def _core(m: CoreModel) -> dict:
    return {
        "name": m.name,
        "classes": [_class(c) for c in m.classes],
        "associations": [_association(a) for a in m.associations],
    }


def _element(el) -> dict:
    if isinstance(el, AttributeDecl):
        return {"elementType": "attribute", **_attribute(el)}
    if isinstance(el, MethodDecl):
        return {"elementType": "method", **_method(el)}
    if isinstance(el, ClassDecl):
        return {"elementType": "class", **_class(el)}
    return {"elementType": "association", **_association(el)}


def _advice(a: Advice) -> dict:
    if isinstance(a.payload, AddPayload):
        payload: dict = {"element": _element(a.payload.element)}
    elif isinstance(a.payload, UpdatePayload):
        payload = {"rename": a.payload.new_name, "retype": a.payload.new_type}
    else:
        payload = {}
    return {
        "name": a.name,
        "adviceType": a.advice_type.value,
        "kind": a.kind.value,
        "bind": a.bound_pointcut,
        "payload": payload,
        "body": a.body,
    }


def _aspect(m: AspectModel) -> dict:
    return {
        "name": m.name,
        "aspects": [
            {
                "name": asp.name,
                "priority": format_priority(asp.priority),
                "pointcuts": [{"name": p.name, "kind": p.kind.value, "pattern": str(p.pattern)} for p in asp.pointcuts],
                "advices": [_advice(a) for a in asp.advices],
            }
            for asp in m.aspects
        ],
    }


def _ref(r: ModelRef) -> dict:
    return {"name": r.logical_name, "path": r.source_path, "digest": r.content_digest}


def _weaving(w: WeavingModel) -> dict:
    return {
        "name": w.name,
        "kind": w.kind.value,
        "left": _ref(w.left),
        "right": _ref(w.right),
        "links": [
            {"name": l.name, "kind": l.kind.value, "left": str(l.left), "right": str(l.right)} for l in w.links
        ],
    }


def _woven(w: WovenModel) -> dict:
    return {
        "base": _core(w.base),
        "orderingConstraints": [
            {
                "adviceMethod": str(c.advice_method),
                "targetMethod": str(c.target_method),
                "position": c.position.value,
                "aspect": c.source_aspect,
            }
            for c in w.ordering_constraints
        ],
        "provenance": [
            {"element": str(p.element), "origin": p.origin.value, "aspect": p.aspect} for p in w.provenance
        ],
    }


def _requirements(g: DecompositionGraph) -> dict:
    return {
        "name": g.name,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "text": n.text,
                "sourceSystem": n.source_system,
                "linkedAspects": list(n.linked_aspects),
            }
            for n in g.nodes
        ],
        "connectors": [{"parent": c.parent, "op": c.op.value, "children": list(c.children)} for c in g.connectors],
    }


_KINDS = (
    (WovenModel, "woven", _woven),
    (CoreModel, "core", _core),
    (AspectModel, "aspect", _aspect),
    (WeavingModel, "weaving", _weaving),
    (DecompositionGraph, "requirements", _requirements),
)


def export_structured(value: Exportable) -> dict:
    for cls, kind, fn in _KINDS:
        if isinstance(value, cls):
            return {"format": FORMAT, "version": VERSION, "kind": kind, "model": fn(value)}
    raise TypeError(f"cannot export {type(value).__name__}")


def dumps_structured(value: Exportable) -> str:
    return json.dumps(export_structured(value), indent=2, ensure_ascii=False) + "\n"


# -- from documents -------------------------------------------------------------


def _from_mult(d: dict) -> Multiplicity:
    upper = d["upper"]
    return Multiplicity(d["lower"], None if upper == "*" else upper)


def _from_attribute(d: dict) -> AttributeDecl:
    return AttributeDecl(d["name"], d["type"], _from_mult(d["multiplicity"]))


def _from_method(d: dict) -> MethodDecl:
    return MethodDecl(d["name"], tuple(Parameter(p["name"], p["type"]) for p in d["parameters"]), d["returnType"])


def _from_class(d: dict) -> ClassDecl:
    return ClassDecl(
        d["name"],
        tuple(_from_attribute(a) for a in d["attributes"]),
        tuple(_from_method(m) for m in d["methods"]),
        d["associationClassOf"],
    )


def _from_association(d: dict) -> AssociationDecl:
    ends = [
        AssociationEnd(e["role"], e["class"], e["navigable"], _from_mult(e["multiplicity"])) for e in d["ends"]
    ]
    if len(ends) != 2:
        raise StructuredFormatError(f"association {d['name']!r} needs exactly two ends")
    return AssociationDecl(d["name"], ends[0], ends[1])


def _from_core(d: dict) -> CoreModel:
    return CoreModel(
        d["name"],
        tuple(_from_class(c) for c in d["classes"]),
        tuple(_from_association(a) for a in d["associations"]),
    )


_ELEMENT_READERS = {
    "attribute": _from_attribute,
    "method": _from_method,
    "class": _from_class,
    "association": _from_association,
}


def _from_advice(d: dict) -> Advice:
    kind = AdviceKind(d["kind"])
    p = d["payload"]
    if kind is AdviceKind.ADD:
        el = p["element"]
        payload = AddPayload(_ELEMENT_READERS[el["elementType"]](el))
    elif kind is AdviceKind.UPDATE:
        payload = UpdatePayload(p.get("rename"), p.get("retype"))
    else:
        payload = DeletePayload()
    return Advice(d["name"], AdviceType(d["adviceType"]), kind, d["bind"], payload, d.get("body", ""))


def _from_aspect(d: dict) -> AspectModel:
    return AspectModel(
        d["name"],
        tuple(
            AspectRequirement(
                a["name"],
                Fraction(a["priority"]),
                tuple(
                    Pointcut(p["name"], PointcutKind(p["kind"]), NamePattern.parse(p["pattern"]))
                    for p in a["pointcuts"]
                ),
                tuple(_from_advice(v) for v in a["advices"]),
            )
            for a in d["aspects"]
        ),
    )


def _from_ref(d: dict) -> ModelRef:
    return ModelRef(d["name"], d["path"], d.get("digest"))


def _from_weaving(d: dict) -> WeavingModel:
    kind = WeavingKind(d["kind"])
    left, right = _from_ref(d["left"]), _from_ref(d["right"])
    links = []
    for l in d["links"]:
        left_end = ElementRef(left.logical_name, QualifiedName.parse(l["left"]))
        if kind is WeavingKind.CORE_ASPECT:
            segs = l["right"].split(".")
            right_end: Union[ElementRef, AspectRef] = AspectRef(
                right.logical_name, segs[0], segs[1] if len(segs) > 1 else None
            )
        else:
            right_end = ElementRef(right.logical_name, QualifiedName.parse(l["right"]))
        links.append(WeaveLink(l["name"], left_end, right_end, LinkKind(l["kind"])))
    return WeavingModel(d["name"], kind, left, right, tuple(links))


def _from_woven(d: dict) -> WovenModel:
    return WovenModel(
        _from_core(d["base"]),
        tuple(
            OrderingConstraint(
                QualifiedName.parse(c["adviceMethod"]),
                QualifiedName.parse(c["targetMethod"]),
                AdviceType(c["position"]),
                c["aspect"],
            )
            for c in d["orderingConstraints"]
        ),
        tuple(Provenance(QualifiedName.parse(p["element"]), Origin(p["origin"]), p["aspect"]) for p in d["provenance"]),
    )


def _from_requirements(d: dict) -> DecompositionGraph:
    return DecompositionGraph(
        d["name"],
        tuple(
            RequirementNode(n["id"], NodeKind(n["kind"]), n["text"], n["sourceSystem"], tuple(n["linkedAspects"]))
            for n in d["nodes"]
        ),
        tuple(Connector(c["parent"], Op(c["op"]), tuple(c["children"])) for c in d["connectors"]),
    )


_READERS = {
    "core": _from_core,
    "aspect": _from_aspect,
    "weaving": _from_weaving,
    "woven": _from_woven,
    "requirements": _from_requirements,
}


def import_structured(doc: Union[dict, str]) -> Exportable:
    """Rebuild a model value from :func:`export_structured` output."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise StructuredFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise StructuredFormatError("document must be a JSON object")
    if doc.get("format") != FORMAT or doc.get("version") != VERSION:
        raise StructuredFormatError("not a modelweave version 1 document")
    reader = _READERS.get(doc.get("kind"))
    if reader is None:
        raise StructuredFormatError(f"unknown document kind {doc.get('kind')!r}")
    try:
        return reader(doc["model"])
    except (KeyError, TypeError, ValueError) as exc:
        raise StructuredFormatError(f"malformed {doc['kind']} document: {exc}") from exc


# -- diagram --------------------------------------------------------------------

_WOVEN_STYLE = 'color="blue", fontcolor="blue"'
_ADDED_STYLE = 'style="dashed", color="blue", fontcolor="blue"'

_DIR = {(True, True): "both", (False, True): "forward", (True, False): "back", (False, False): "none"}


def _node_label(c: ClassDecl) -> str:
    attrs = "".join(f"{a.name} : {a.type_name}\\l" for a in c.attributes)
    ops = []
    for m in c.methods:
        params = ", ".join(f"{p.name} : {p.type_name}" for p in m.parameters)
        ret = f" : {m.return_type}" if m.return_type else ""
        ops.append(f"{m.name}({params}){ret}\\l")
    return "{" + c.name + "|" + attrs + "|" + "".join(ops) + "}"


def export_diagram(value: Union[CoreModel, WovenModel]) -> str:
    """Graphviz ``digraph``: one record node per class, one edge per association.

    For woven models, elements introduced by weaving are drawn dashed and
    blue; classes whose features changed are drawn blue.
    """
    woven = value if isinstance(value, WovenModel) else WovenModel(value)
    model = woven.base
    touched = {p.element for p in woven.provenance}
    lines = [f'digraph "{model.name}" {{', "  node [shape=record];"]
    for c in model.classes:
        qn = QualifiedName.of(c.name)
        style = ""
        if qn in touched:
            style = ", " + _ADDED_STYLE
        elif any(t.startswith(qn) for t in touched):
            style = ", " + _WOVEN_STYLE
        lines.append(f'  "{c.name}" [label="{_node_label(c)}"{style}];')
    for a in model.associations:
        qn = QualifiedName.of("assoc", a.name)
        attrs = [
            f'label="{a.name}"',
            f'dir="{_DIR[(a.end_a.navigable, a.end_b.navigable)]}"',
            f'taillabel="{a.end_a.role} {a.end_a.multiplicity}"',
            f'headlabel="{a.end_b.role} {a.end_b.multiplicity}"',
        ]
        if qn in touched:
            attrs.append(_ADDED_STYLE)
        lines.append(f'  "{a.end_a.class_name}" -> "{a.end_b.class_name}" [{", ".join(attrs)}];')
    for c in woven.ordering_constraints:
        lines.append(f"  // {c.advice_method} runs {c.position.value} {c.target_method} ({c.source_aspect})")
    lines.append("}")
    return "\n".join(lines) + "\n"
