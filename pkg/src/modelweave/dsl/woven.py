"""Woven models as ``.core`` text.

Ordering constraints and provenance travel in a trailing block of ``//@``
comments, so the output still parses as a plain core model::

    //@ order Student.check before Student.NewSubscription aspect Hours
    //@ origin Student.check aspect Hours
    //@ origin Grade additional
"""

from __future__ import annotations

import re
from typing import Union

from ..aspect_model import AdviceType
from ..core_model import QualifiedName
from ..weaver import OrderingConstraint, Origin, Provenance, WovenModel
from .diagnostics import DslSyntaxError, ParseDiagnostic, Severity, SourceSpan
from .parser import ParseResult, decode_source, parse_core
from .printer import print_core

_ANNOTATION = "//@"
_QN = r"[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*"
_ORDER_RE = re.compile(rf"order ({_QN}) (before|after) ({_QN}) aspect ([A-Za-z_][A-Za-z0-9_]*)\Z")
_ORIGIN_RE = re.compile(rf"origin ({_QN}) (additional|aspect ([A-Za-z_][A-Za-z0-9_]*))\Z")


def print_woven(woven: WovenModel) -> str:
    text = print_core(woven.base)
    lines = []
    for c in woven.ordering_constraints:
        lines.append(
            f"{_ANNOTATION} order {c.advice_method} {c.position.value} {c.target_method} aspect {c.source_aspect}"
        )
    for p in woven.provenance:
        if p.origin is Origin.ADDITIONAL:
            lines.append(f"{_ANNOTATION} origin {p.element} additional")
        elif p.origin is Origin.ASPECT:
            lines.append(f"{_ANNOTATION} origin {p.element} aspect {p.aspect}")
    if not lines:
        return text
    return text + "\n" + "\n".join(lines) + "\n"


def parse_woven(data: Union[str, bytes], source: str = "<input>.core", *, validate: bool = True) -> ParseResult[WovenModel]:
    """Parse ``.core`` text together with its woven annotations, if any."""
    base = parse_core(data, source, validate=validate)
    if base.model is None:
        return ParseResult(None, base.diagnostics, base.spans)
    text = decode_source(data, source)
    constraints: list[OrderingConstraint] = []
    constraint_spans: list[SourceSpan] = []
    provenance: list[Provenance] = []
    try:
        for lineno, raw in enumerate(text.split("\n"), start=1):
            line = raw.strip()
            if not line.startswith(_ANNOTATION):
                continue
            body = line[len(_ANNOTATION):].strip()
            span = SourceSpan(source, lineno, 1, lineno, len(raw) + 1)
            m = _ORDER_RE.match(body)
            if m:
                constraints.append(
                    OrderingConstraint(
                        QualifiedName.parse(m.group(1)),
                        QualifiedName.parse(m.group(3)),
                        AdviceType(m.group(2)),
                        m.group(4),
                    )
                )
                constraint_spans.append(span)
                continue
            m = _ORIGIN_RE.match(body)
            if m:
                qn = QualifiedName.parse(m.group(1))
                if m.group(3) is None:
                    provenance.append(Provenance(qn, Origin.ADDITIONAL))
                else:
                    provenance.append(Provenance(qn, Origin.ASPECT, m.group(3)))
                continue
            raise DslSyntaxError(f"malformed woven annotation {body!r}", span)
    except DslSyntaxError as exc:
        return ParseResult(None, base.diagnostics + (exc.diagnostic(),), base.spans)
    woven = WovenModel(base.model, tuple(constraints), tuple(provenance))
    diags = list(base.diagnostics)
    if validate:
        methods = {str(qn) for qn in _method_names(base.model)}
        for c, span in zip(constraints, constraint_spans):
            for qn in (c.advice_method, c.target_method):
                if str(qn) not in methods:
                    diags.append(
                        ParseDiagnostic(Severity.ERROR, span, f"ordering constraint references unknown method {qn}")
                    )
        if any(d.severity is Severity.ERROR for d in diags):
            return ParseResult(None, tuple(diags), base.spans)
    return ParseResult(woven, tuple(diags), base.spans)


def _method_names(model):
    for cls in model.classes:
        for m in cls.methods:
            yield QualifiedName.of(cls.name, m.name)
