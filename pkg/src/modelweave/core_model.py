"""Class-diagram models: classes, features, associations and their names.

A :class:`CoreModel` describes existing or additional requirements as a
simplified UML class diagram.  Every element is addressed by a
:class:`QualifiedName`; associations live under the reserved ``assoc``
segment so they never collide with class names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .errors import ForeignElementError

ASSOC = "assoc"

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_identifier(text: str) -> bool:
    return isinstance(text, str) and _IDENT_RE.match(text) is not None


@dataclass(frozen=True, order=True)
class QualifiedName:
    segments: tuple[str, ...]

    @classmethod
    def parse(cls, text: str) -> "QualifiedName":
        return cls(tuple(text.split(".")))

    @classmethod
    def of(cls, *segments: str) -> "QualifiedName":
        return cls(tuple(segments))

    def is_valid(self) -> bool:
        return bool(self.segments) and all(is_identifier(s) for s in self.segments)

    @property
    def is_association_path(self) -> bool:
        return len(self.segments) >= 2 and self.segments[0] == ASSOC

    def child(self, name: str) -> "QualifiedName":
        return QualifiedName(self.segments + (name,))

    def startswith(self, prefix: "QualifiedName") -> bool:
        n = len(prefix.segments)
        return self.segments[:n] == prefix.segments

    def __str__(self) -> str:
        return ".".join(self.segments)


@dataclass(frozen=True)
class Multiplicity:
    lower: int = 1
    upper: Optional[int] = 1  # None means unbounded ("*")

    def __str__(self) -> str:
        upper = "*" if self.upper is None else str(self.upper)
        return f"{self.lower}..{upper}"


ONE = Multiplicity(1, 1)


@dataclass(frozen=True)
class AttributeDecl:
    name: str
    type_name: str
    multiplicity: Multiplicity = ONE


@dataclass(frozen=True)
class Parameter:
    name: str
    type_name: str


@dataclass(frozen=True)
class MethodDecl:
    name: str
    parameters: tuple[Parameter, ...] = ()
    return_type: Optional[str] = None


Feature = Union[AttributeDecl, MethodDecl]


@dataclass(frozen=True)
class ClassDecl:
    name: str
    attributes: tuple[AttributeDecl, ...] = ()
    methods: tuple[MethodDecl, ...] = ()
    association_class_of: Optional[str] = None

    def feature(self, name: str) -> Optional[Feature]:
        for feat in self.attributes:
            if feat.name == name:
                return feat
        for feat in self.methods:
            if feat.name == name:
                return feat
        return None


@dataclass(frozen=True)
class AssociationEnd:
    role: str
    class_name: str
    navigable: bool = False
    multiplicity: Multiplicity = ONE


@dataclass(frozen=True)
class AssociationDecl:
    name: str
    end_a: AssociationEnd
    end_b: AssociationEnd

    @property
    def ends(self) -> tuple[AssociationEnd, AssociationEnd]:
        return (self.end_a, self.end_b)


@dataclass(frozen=True)
class CoreModel:
    name: str
    classes: tuple[ClassDecl, ...] = ()
    associations: tuple[AssociationDecl, ...] = ()

    def class_named(self, name: str) -> Optional[ClassDecl]:
        for cls in self.classes:
            if cls.name == name:
                return cls
        return None

    def association_named(self, name: str) -> Optional[AssociationDecl]:
        for assoc in self.associations:
            if assoc.name == name:
                return assoc
        return None


Element = Union[ClassDecl, AttributeDecl, MethodDecl, AssociationDecl, AssociationEnd]


@dataclass(frozen=True, order=True)
class Violation:
    """One broken invariant, located by the qualified name of the culprit."""

    path: QualifiedName
    message: str = field(compare=True)

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


def iter_elements(model: CoreModel) -> Iterator[tuple[QualifiedName, Element]]:
    """Yield ``(qualified name, element)`` for every element, in declaration order."""
    for cls in model.classes:
        cqn = QualifiedName.of(cls.name)
        yield cqn, cls
        for attr in cls.attributes:
            yield cqn.child(attr.name), attr
        for meth in cls.methods:
            yield cqn.child(meth.name), meth
    for assoc in model.associations:
        aqn = QualifiedName.of(ASSOC, assoc.name)
        yield aqn, assoc
        for end in assoc.ends:
            yield aqn.child(end.role), end


def _check_multiplicity(path: QualifiedName, mult: Multiplicity, out: list[Violation]) -> None:
    if mult.lower < 0 or (mult.upper is not None and mult.upper < 0):
        out.append(Violation(path, "multiplicity bounds must be non-negative"))
    elif mult.upper is not None and mult.lower > mult.upper:
        out.append(Violation(path, f"multiplicity lower bound exceeds upper bound ({mult})"))


def _check_ident(path: QualifiedName, name: str, what: str, out: list[Violation]) -> None:
    if not is_identifier(name):
        out.append(Violation(path, f"{what} {name!r} is not a valid identifier"))


def validate_core(model: CoreModel) -> list[Violation]:
    """Check class-diagram conformance; an empty list means the model is valid."""
    out: list[Violation] = []
    root = QualifiedName.of(model.name) if is_identifier(model.name) else QualifiedName.of("_")
    _check_ident(root, model.name, "model name", out)

    class_names: set[str] = set()
    for cls in model.classes:
        cqn = QualifiedName.of(cls.name)
        _check_ident(cqn, cls.name, "class name", out)
        if cls.name == ASSOC:
            out.append(Violation(cqn, f"class name {ASSOC!r} is reserved"))
        if cls.name in class_names:
            out.append(Violation(cqn, f"duplicate class {cls.name!r}"))
        class_names.add(cls.name)

        seen: set[str] = set()
        for feat in (*cls.attributes, *cls.methods):
            fqn = cqn.child(feat.name)
            _check_ident(fqn, feat.name, "feature name", out)
            if feat.name in seen:
                out.append(Violation(fqn, f"duplicate feature {feat.name!r} in class {cls.name!r}"))
            seen.add(feat.name)
        for attr in cls.attributes:
            fqn = cqn.child(attr.name)
            _check_ident(fqn, attr.type_name, "type name", out)
            _check_multiplicity(fqn, attr.multiplicity, out)
        for meth in cls.methods:
            fqn = cqn.child(meth.name)
            params: set[str] = set()
            for param in meth.parameters:
                _check_ident(fqn, param.name, "parameter name", out)
                _check_ident(fqn, param.type_name, "type name", out)
                if param.name in params:
                    out.append(Violation(fqn, f"duplicate parameter {param.name!r}"))
                params.add(param.name)
            if meth.return_type is not None:
                _check_ident(fqn, meth.return_type, "type name", out)

    assoc_names: set[str] = set()
    for assoc in model.associations:
        aqn = QualifiedName.of(ASSOC, assoc.name)
        _check_ident(aqn, assoc.name, "association name", out)
        if assoc.name in assoc_names:
            out.append(Violation(aqn, f"duplicate association {assoc.name!r}"))
        assoc_names.add(assoc.name)
        if assoc.end_a.role == assoc.end_b.role:
            out.append(Violation(aqn, f"both ends use role {assoc.end_a.role!r}"))
        for end in assoc.ends:
            eqn = aqn.child(end.role)
            _check_ident(eqn, end.role, "role name", out)
            _check_multiplicity(eqn, end.multiplicity, out)
            if end.class_name not in class_names:
                out.append(Violation(eqn, f"end references unknown class {end.class_name!r}"))

    for cls in model.classes:
        if cls.association_class_of is not None and cls.association_class_of not in assoc_names:
            out.append(
                Violation(
                    QualifiedName.of(cls.name),
                    f"association class of unknown association {cls.association_class_of!r}",
                )
            )
    return sorted(out)


def resolve(model: CoreModel, qn: QualifiedName) -> Optional[Element]:
    """Return the element whose canonical name is ``qn``, or None."""
    segs = qn.segments
    if not segs:
        return None
    if segs[0] == ASSOC:
        if len(segs) < 2 or len(segs) > 3:
            return None
        assoc = model.association_named(segs[1])
        if assoc is None or len(segs) == 2:
            return assoc
        for end in assoc.ends:
            if end.role == segs[2]:
                return end
        return None
    cls = model.class_named(segs[0])
    if cls is None or len(segs) == 1:
        return cls
    if len(segs) != 2:
        return None
    return cls.feature(segs[1])


def qualified_name_of(model: CoreModel, element: Element) -> QualifiedName:
    """Inverse of :func:`resolve` for element objects owned by ``model``.

    Ownership is checked by identity, so an equal-valued element taken from
    another model is rejected with :class:`ForeignElementError`.
    """
    for qn, candidate in iter_elements(model):
        if candidate is element:
            return qn
    raise ForeignElementError(f"{element!r} does not belong to model {model.name!r}")
