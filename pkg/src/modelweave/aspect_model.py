"""Aspect requirements: pointcuts designating join points and advices
describing the edits applied there."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Union

from .core_model import (
    ASSOC,
    AssociationDecl,
    AttributeDecl,
    ClassDecl,
    CoreModel,
    MethodDecl,
    QualifiedName,
    Violation,
    is_identifier,
    validate_core,
)

WILDCARD = "*"
DEFAULT_PRIORITY = Fraction(1, 2)


class PointcutKind(enum.Enum):
    CALL = "call"
    STRUCTURAL = "structural"


class AdviceType(enum.Enum):
    BEFORE = "before"
    AFTER = "after"


class AdviceKind(enum.Enum):
    ADD = "addelt"
    UPDATE = "update"
    DELETE = "deleteelt"


@dataclass(frozen=True)
class NamePattern:
    """Dotted pattern; a ``*`` segment matches exactly one whole segment.

    A wildcard never matches the reserved ``assoc`` segment, so associations
    are only reachable through patterns that spell ``assoc`` literally.
    """

    segments: tuple[str, ...]

    @classmethod
    def parse(cls, text: str) -> "NamePattern":
        return cls(tuple(text.split(".")))

    def matches(self, qn: QualifiedName) -> bool:
        if len(self.segments) != len(qn.segments):
            return False
        for pat, seg in zip(self.segments, qn.segments):
            if pat == WILDCARD:
                if seg == ASSOC:
                    return False
            elif pat != seg:
                return False
        return True

    def __str__(self) -> str:
        return ".".join(self.segments)


@dataclass(frozen=True)
class Pointcut:
    name: str
    kind: PointcutKind
    pattern: NamePattern


@dataclass(frozen=True)
class AddPayload:
    element: Union[AttributeDecl, MethodDecl, ClassDecl, AssociationDecl]


@dataclass(frozen=True)
class UpdatePayload:
    new_name: Optional[str] = None
    new_type: Optional[str] = None  # typeName for attributes, returnType for methods

    @property
    def fields(self) -> frozenset[str]:
        out = set()
        if self.new_name is not None:
            out.add("name")
        if self.new_type is not None:
            out.add("type")
        return frozenset(out)


@dataclass(frozen=True)
class DeletePayload:
    pass


AdvicePayload = Union[AddPayload, UpdatePayload, DeletePayload]

_PAYLOAD_FOR_KIND = {
    AdviceKind.ADD: AddPayload,
    AdviceKind.UPDATE: UpdatePayload,
    AdviceKind.DELETE: DeletePayload,
}


@dataclass(frozen=True)
class Advice:
    name: str
    advice_type: AdviceType
    kind: AdviceKind
    bound_pointcut: str
    payload: AdvicePayload
    body: str = ""


@dataclass(frozen=True)
class AspectRequirement:
    name: str
    priority: Fraction = DEFAULT_PRIORITY
    pointcuts: tuple[Pointcut, ...] = ()
    advices: tuple[Advice, ...] = ()

    def pointcut_named(self, name: str) -> Optional[Pointcut]:
        for pc in self.pointcuts:
            if pc.name == name:
                return pc
        return None

    def advices_for(self, pointcut: str) -> tuple[Advice, ...]:
        return tuple(a for a in self.advices if a.bound_pointcut == pointcut)


@dataclass(frozen=True)
class AspectModel:
    name: str
    aspects: tuple[AspectRequirement, ...] = ()

    def aspect_named(self, name: str) -> Optional[AspectRequirement]:
        for asp in self.aspects:
            if asp.name == name:
                return asp
        return None


def _element_violations(path: QualifiedName, element) -> list[Violation]:
    # Payloads are checked inside a scratch model; references that point
    # outside the payload are resolved at weave time, so they are stubbed here.
    if isinstance(element, ClassDecl):
        found = []
        if element.association_class_of is not None and not is_identifier(element.association_class_of):
            found.append(Violation(path, f"association name {element.association_class_of!r} is not a valid identifier"))
        scratch = CoreModel("payload", classes=(replace(element, association_class_of=None),))
        found += validate_core(scratch)
    elif isinstance(element, (AttributeDecl, MethodDecl)):
        holder = ClassDecl(
            "Payload",
            attributes=(element,) if isinstance(element, AttributeDecl) else (),
            methods=(element,) if isinstance(element, MethodDecl) else (),
        )
        found = validate_core(CoreModel("payload", classes=(holder,)))
    elif isinstance(element, AssociationDecl):
        stubs = tuple(ClassDecl(n) for n in dict.fromkeys(e.class_name for e in element.ends))
        found = validate_core(CoreModel("payload", classes=stubs, associations=(element,)))
    else:
        return [Violation(path, f"unsupported payload element {type(element).__name__}")]
    return [Violation(path, f"payload: {v.message}") for v in found]


def validate_aspect(model: AspectModel) -> list[Violation]:
    """Check aspect-model conformance; an empty list means the model is valid."""
    out: list[Violation] = []
    if not is_identifier(model.name):
        out.append(Violation(QualifiedName.of("_"), f"model name {model.name!r} is not a valid identifier"))
    seen_aspects: set[str] = set()
    for asp in model.aspects:
        aqn = QualifiedName.of(asp.name)
        if not is_identifier(asp.name):
            out.append(Violation(aqn, f"aspect name {asp.name!r} is not a valid identifier"))
        if asp.name in seen_aspects:
            out.append(Violation(aqn, f"duplicate aspect {asp.name!r}"))
        seen_aspects.add(asp.name)
        if not (0 <= asp.priority <= 1):
            out.append(Violation(aqn, f"priority {format_priority(asp.priority)} outside [0, 1]"))

        pointcuts: set[str] = set()
        for pc in asp.pointcuts:
            pqn = aqn.child(pc.name)
            if not is_identifier(pc.name):
                out.append(Violation(pqn, f"pointcut name {pc.name!r} is not a valid identifier"))
            if pc.name in pointcuts:
                out.append(Violation(pqn, f"duplicate pointcut {pc.name!r}"))
            pointcuts.add(pc.name)
            segs = pc.pattern.segments
            if not segs or not all(s == WILDCARD or is_identifier(s) for s in segs):
                out.append(Violation(pqn, f"malformed pattern {pc.pattern}"))

        advices: set[str] = set()
        for adv in asp.advices:
            vqn = aqn.child(adv.name)
            if not is_identifier(adv.name):
                out.append(Violation(vqn, f"advice name {adv.name!r} is not a valid identifier"))
            if adv.name in advices:
                out.append(Violation(vqn, f"duplicate advice {adv.name!r}"))
            advices.add(adv.name)
            if adv.bound_pointcut not in pointcuts:
                out.append(Violation(vqn, f"advice bound to unknown pointcut {adv.bound_pointcut!r}"))
            expected = _PAYLOAD_FOR_KIND[adv.kind]
            if not isinstance(adv.payload, expected):
                out.append(
                    Violation(vqn, f"{adv.kind.value} advice carries a {type(adv.payload).__name__}")
                )
            elif isinstance(adv.payload, AddPayload):
                out.extend(_element_violations(vqn, adv.payload.element))
            elif isinstance(adv.payload, UpdatePayload):
                p = adv.payload
                if not p.fields:
                    out.append(Violation(vqn, "update advice changes nothing"))
                for label in (p.new_name, p.new_type):
                    if label is not None and not is_identifier(label):
                        out.append(Violation(vqn, f"update label {label!r} is not a valid identifier"))
    return sorted(out)


def inert_aspects(model: AspectModel) -> list[str]:
    """Names of aspects that declare no advice at all."""
    return [asp.name for asp in model.aspects if not asp.advices]


def format_priority(value: Fraction) -> str:
    """Exact decimal when one exists, ``n/d`` otherwise."""
    value = Fraction(value)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    places = max(twos, fives)
    if places == 0:
        return str(value.numerator)
    scaled = value * 10**places
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    sign = "-" if value < 0 else ""
    return f"{sign}{digits[:-places]}.{digits[-places:]}"
