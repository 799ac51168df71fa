"""Weaving models: typed, binary links between a left (core) model and a
right (aspect or additional) model.

A weaving model only references the models it links; content stays in the
model files.  Element references use canonical qualified names.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from typing import Optional, Union

from .aspect_model import AspectModel
from .core_model import (
    ASSOC,
    AttributeDecl,
    ClassDecl,
    CoreModel,
    MethodDecl,
    AssociationDecl,
    QualifiedName,
    Violation,
    is_identifier,
    resolve,
)
from .errors import WeavingKindError


class WeavingKind(enum.Enum):
    CORE_ASPECT = "coreaspect"
    CORE_ADDITIONAL = "coreadditional"


class LinkKind(enum.Enum):
    ATTRIBUTE_TO_CLASS = "AttributeToClass"
    METHOD_TO_CLASS = "MethodToClass"
    CLASS_TO_MODEL = "ClassToModel"
    ASSOCIATION_TO_MODEL = "AssociationToModel"
    ASPECT_TO_TARGET = "AspectToTarget"


# Link kinds whose left end is the left model itself rather than an element.
MODEL_LEVEL_KINDS = frozenset({LinkKind.CLASS_TO_MODEL, LinkKind.ASSOCIATION_TO_MODEL})


@dataclass(frozen=True)
class ModelRef:
    logical_name: str
    source_path: str
    content_digest: Optional[str] = None


@dataclass(frozen=True)
class ElementRef:
    """Reference to a class-diagram element (or, for model-level link kinds,
    to the model itself by its logical name)."""

    model: str
    target: QualifiedName

    def __str__(self) -> str:
        return str(self.target)


@dataclass(frozen=True)
class AspectRef:
    """Reference to an aspect, optionally narrowed to one of its pointcuts."""

    model: str
    aspect: str
    pointcut: Optional[str] = None

    def __str__(self) -> str:
        return self.aspect if self.pointcut is None else f"{self.aspect}.{self.pointcut}"


@dataclass(frozen=True)
class WeaveLink:
    name: str
    left: ElementRef
    right: Union[ElementRef, AspectRef]
    kind: LinkKind


@dataclass(frozen=True)
class WeavingModel:
    name: str
    kind: WeavingKind
    left: ModelRef
    right: ModelRef
    links: tuple[WeaveLink, ...] = ()


def structural_violations(w: WeavingModel) -> list[Violation]:
    """Invariants checkable without the linked models."""
    out: list[Violation] = []
    root = QualifiedName.of(w.name if is_identifier(w.name) else "_")
    if not is_identifier(w.name):
        out.append(Violation(root, f"weaving name {w.name!r} is not a valid identifier"))
    for ref, side in ((w.left, "left"), (w.right, "right")):
        if not is_identifier(ref.logical_name):
            out.append(Violation(root, f"{side} logical name {ref.logical_name!r} is not a valid identifier"))
    seen: set[str] = set()
    for link in w.links:
        lqn = root.child(link.name) if is_identifier(link.name) else root.child("_")
        if not is_identifier(link.name):
            out.append(Violation(lqn, f"link name {link.name!r} is not a valid identifier"))
        if link.name in seen:
            out.append(Violation(lqn, f"duplicate link {link.name!r}"))
        seen.add(link.name)
        if link.left.model != w.left.logical_name:
            out.append(Violation(lqn, f"left end refers to model {link.left.model!r}, not the left model"))
        if link.right.model != w.right.logical_name:
            out.append(Violation(lqn, f"right end refers to model {link.right.model!r}, not the right model"))
        if not link.left.target.segments:
            out.append(Violation(lqn, "left end is empty"))
        if w.kind is WeavingKind.CORE_ASPECT:
            if not isinstance(link.right, AspectRef):
                out.append(Violation(lqn, "coreaspect links must point at an aspect"))
            if link.kind is not LinkKind.ASPECT_TO_TARGET:
                out.append(Violation(lqn, f"coreaspect links must be AspectToTarget, not {link.kind.value}"))
        else:
            if not isinstance(link.right, ElementRef):
                out.append(Violation(lqn, "coreadditional links must point at an element"))
            elif not link.right.target.segments:
                out.append(Violation(lqn, "right end is empty"))
            if link.kind is LinkKind.ASPECT_TO_TARGET:
                out.append(Violation(lqn, "AspectToTarget links require a coreaspect weaving"))
    return out


_RIGHT_ELEMENT = {
    LinkKind.ATTRIBUTE_TO_CLASS: (AttributeDecl, "an attribute"),
    LinkKind.METHOD_TO_CLASS: (MethodDecl, "a method"),
    LinkKind.CLASS_TO_MODEL: (ClassDecl, "a class"),
    LinkKind.ASSOCIATION_TO_MODEL: (AssociationDecl, "an association"),
}


def _check_left(w: WeavingModel, link: WeaveLink, left: CoreModel, lqn, out: list[Violation]) -> None:
    target = link.left.target
    if link.kind in MODEL_LEVEL_KINDS:
        if target.segments != (w.left.logical_name,):
            out.append(Violation(lqn, f"left end of {link.kind.value} must name the left model {w.left.logical_name!r}"))
        return
    element = resolve(left, target)
    if element is None:
        out.append(Violation(lqn, f"left end {target} not found in left model"))
    elif link.kind in (LinkKind.ATTRIBUTE_TO_CLASS, LinkKind.METHOD_TO_CLASS) and not isinstance(element, ClassDecl):
        out.append(Violation(lqn, f"left end {target} must be a class"))


def validate_weaving(
    w: WeavingModel, left: CoreModel, right: Union[CoreModel, AspectModel]
) -> list[Violation]:
    """Check that every link end resolves in the models being woven.

    Raises :class:`WeavingKindError` when ``right`` is the wrong kind of
    model for ``w.kind``.
    """
    if w.kind is WeavingKind.CORE_ASPECT and not isinstance(right, AspectModel):
        raise WeavingKindError(f"weaving {w.name!r} is coreaspect but the right model is not an aspect model")
    if w.kind is WeavingKind.CORE_ADDITIONAL and not isinstance(right, CoreModel):
        raise WeavingKindError(f"weaving {w.name!r} is coreadditional but the right model is not a core model")

    out = structural_violations(w)
    root = QualifiedName.of(w.name if is_identifier(w.name) else "_")
    for link in w.links:
        lqn = root.child(link.name if is_identifier(link.name) else "_")
        _check_left(w, link, left, lqn, out)
        if isinstance(link.right, AspectRef):
            if not isinstance(right, AspectModel):
                continue
            asp = right.aspect_named(link.right.aspect)
            if asp is None:
                out.append(Violation(lqn, f"right end names unknown aspect {link.right.aspect!r}"))
            elif link.right.pointcut is not None and asp.pointcut_named(link.right.pointcut) is None:
                out.append(Violation(lqn, f"aspect {asp.name!r} has no pointcut {link.right.pointcut!r}"))
        elif isinstance(right, CoreModel) and link.kind in _RIGHT_ELEMENT:
            element = resolve(right, link.right.target)
            wanted, label = _RIGHT_ELEMENT[link.kind]
            if element is None:
                out.append(Violation(lqn, f"right end {link.right.target} not found in right model"))
            elif not isinstance(element, wanted) or (
                wanted is ClassDecl and link.right.target.segments[0] == ASSOC
            ):
                out.append(Violation(lqn, f"right end {link.right.target} must be {label}"))
    return sorted(out)


def model_digest(model: Union[CoreModel, AspectModel]) -> str:
    """SHA-256 of the canonical text of ``model``."""
    from .dsl.printer import print_aspect, print_core

    text = print_core(model) if isinstance(model, CoreModel) else print_aspect(model)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def digest_check(
    w: WeavingModel, left: CoreModel, right: Union[CoreModel, AspectModel]
) -> tuple[ModelRef, ...]:
    """Return the model references whose recorded digest no longer matches.

    An empty tuple means every recorded digest is current (or none was
    recorded).
    """
    stale = []
    for ref, model in ((w.left, left), (w.right, right)):
        if ref.content_digest and ref.content_digest.lower() != model_digest(model):
            stale.append(ref)
    return tuple(stale)
