"""Weaving execution.

Core+additional weavings copy linked elements into the core model.  Aspect
weavings are planned first (one :class:`Edit` per advice and matched join
point), checked for pairwise conflicts, resolved by aspect priority, and
then applied to yield a :class:`WovenModel`.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Union

from .aspect_model import (
    Advice,
    AdviceKind,
    AdvicePayload,
    AdviceType,
    AspectModel,
    AspectRequirement,
    Pointcut,
    PointcutKind,
    UpdatePayload,
    format_priority,
)
from .core_model import (
    ASSOC,
    AssociationDecl,
    AttributeDecl,
    ClassDecl,
    CoreModel,
    MethodDecl,
    QualifiedName,
    iter_elements,
    resolve,
    validate_core,
)
from .errors import (
    CollisionError,
    StaleTargetError,
    UnresolvedConflictError,
    WeaveError,
    WeavingKindError,
)
from .weaving_model import (
    AspectRef,
    LinkKind,
    WeavingKind,
    WeavingModel,
    validate_weaving,
)

log = logging.getLogger(__name__)

ROOT = QualifiedName(())  # stands for the model itself in footprints


class Origin(enum.Enum):
    CORE = "core"
    ADDITIONAL = "additional"
    ASPECT = "aspect"


@dataclass(frozen=True, order=True)
class Provenance:
    element: QualifiedName
    origin: Origin = field(compare=False)
    aspect: Optional[str] = field(default=None, compare=False)

    def __str__(self) -> str:
        tail = f" {self.aspect}" if self.aspect else ""
        return f"{self.element} {self.origin.value}{tail}"


@dataclass(frozen=True)
class OrderingConstraint:
    """``advice_method`` runs ``position`` the call of ``target_method``."""

    advice_method: QualifiedName
    target_method: QualifiedName
    position: AdviceType
    source_aspect: str

    def __str__(self) -> str:
        return f"{self.advice_method} {self.position.value} {self.target_method} [{self.source_aspect}]"


@dataclass(frozen=True)
class WovenModel:
    base: CoreModel
    ordering_constraints: tuple[OrderingConstraint, ...] = ()
    provenance: tuple[Provenance, ...] = ()

    def origin_of(self, qn: QualifiedName) -> Origin:
        for p in self.provenance:
            if p.element == qn:
                return p.origin
        return Origin.CORE


class EditKind(enum.Enum):
    ADD = "add"
    UPDATE = "update"
    DELETE = "delete"


_EDIT_KIND = {AdviceKind.ADD: EditKind.ADD, AdviceKind.UPDATE: EditKind.UPDATE, AdviceKind.DELETE: EditKind.DELETE}


@dataclass(frozen=True)
class Edit:
    kind: EditKind
    target: QualifiedName  # element created (Add) or modified/removed
    payload: AdvicePayload
    source: str  # aspect name
    link: str
    advice: str
    joinpoint: QualifiedName
    advice_type: AdviceType = AdviceType.BEFORE
    ordered: bool = False  # emits an ordering constraint against the join point

    @property
    def container(self) -> QualifiedName:
        if self.kind is EditKind.ADD and isinstance(self.payload.element, (AttributeDecl, MethodDecl)):
            return QualifiedName(self.target.segments[:1])
        return ROOT

    def __str__(self) -> str:
        order = f" ({self.advice_type.value} {self.joinpoint})" if self.ordered else ""
        return f"{self.kind.value} {self.target}{order} <- {self.source}.{self.advice} via {self.link}"


@dataclass(frozen=True)
class WeavePlan:
    edits: tuple[Edit, ...] = ()
    warnings: tuple[str, ...] = ()


class ConflictCategory(enum.Enum):
    DELETE_VS_OTHER = "DeleteVsOther"
    DOUBLE_UPDATE = "DoubleUpdate"
    DUPLICATE_ADD = "DuplicateAdd"


@dataclass(frozen=True)
class Conflict:
    edits: tuple[Edit, Edit]  # plan order
    target: QualifiedName
    category: ConflictCategory

    def __str__(self) -> str:
        a, b = self.edits
        return f"{self.category.value} on {self.target}: {a.source}.{a.advice} vs {b.source}.{b.advice}"


@dataclass(frozen=True)
class Decision:
    conflict: Conflict
    kept: Edit
    dropped: Edit
    reason: str

    def __str__(self) -> str:
        return f"{self.conflict}: kept {self.kept.source}.{self.kept.advice} ({self.reason})"


@dataclass(frozen=True)
class Resolution:
    decisions: tuple[Decision, ...] = ()
    unresolved: tuple[Conflict, ...] = ()

    @property
    def dropped(self) -> frozenset[Edit]:
        return frozenset(d.dropped for d in self.decisions)


@dataclass
class WeaveReport:
    edits: list[Edit] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    decisions: list[Decision] = field(default_factory=list)

    def warn(self, message: str) -> None:
        log.info(message)
        self.warnings.append(message)


# ---------------------------------------------------------------------------
# Pointcut matching


def match_pointcut(p: Pointcut, m: CoreModel) -> list[QualifiedName]:
    """Join points of ``m`` selected by ``p``, in canonical order.

    Call pointcuts select methods; structural pointcuts select classes,
    attributes and associations.
    """
    wanted = (MethodDecl,) if p.kind is PointcutKind.CALL else (ClassDecl, AttributeDecl, AssociationDecl)
    found = {qn for qn, el in iter_elements(m) if isinstance(el, wanted) and p.pattern.matches(qn)}
    return sorted(found)


# ---------------------------------------------------------------------------
# Mutable workspace used by both weaving kinds


def _rebase(qn: QualifiedName, old: QualifiedName, new: QualifiedName) -> QualifiedName:
    if qn.startswith(old):
        return QualifiedName(new.segments + qn.segments[len(old.segments):])
    return qn


class _Workspace:
    def __init__(self, woven: WovenModel, report: WeaveReport) -> None:
        self.model = woven.base
        self.constraints = list(woven.ordering_constraints)
        self.provenance = {p.element: p for p in woven.provenance}
        self.renames: list[tuple[QualifiedName, QualifiedName]] = []
        self.report = report

    # names ------------------------------------------------------------

    def current(self, qn: QualifiedName) -> QualifiedName:
        for old, new in self.renames:
            qn = _rebase(qn, old, new)
        return qn

    def _current_class(self, name: str) -> str:
        return self.current(QualifiedName.of(name)).segments[0]

    def _current_assoc(self, name: str) -> str:
        return self.current(QualifiedName.of(ASSOC, name)).segments[1]

    def _record(self, qn: QualifiedName, origin: Origin, aspect: Optional[str]) -> None:
        self.provenance[qn] = Provenance(qn, origin, aspect)

    def _record_tree(self, qn: QualifiedName, origin: Origin, aspect: Optional[str]) -> None:
        for eqn, _ in iter_elements(self.model):
            if eqn.startswith(qn):
                self._record(eqn, origin, aspect)

    def _forget(self, gone: set[QualifiedName]) -> None:
        for qn in gone:
            self.provenance.pop(qn, None)
        self.constraints = [
            c for c in self.constraints if c.advice_method not in gone and c.target_method not in gone
        ]

    def _move(self, old: QualifiedName, new: QualifiedName) -> None:
        self.renames.append((old, new))
        self.provenance = {
            _rebase(k, old, new): replace(v, element=_rebase(k, old, new)) for k, v in self.provenance.items()
        }
        self.constraints = [
            replace(c, advice_method=_rebase(c.advice_method, old, new), target_method=_rebase(c.target_method, old, new))
            for c in self.constraints
        ]

    def _set_class(self, old_name: str, new: ClassDecl) -> None:
        self.model = replace(
            self.model, classes=tuple(new if c.name == old_name else c for c in self.model.classes)
        )

    def _set_assoc(self, old_name: str, new: AssociationDecl) -> None:
        self.model = replace(
            self.model, associations=tuple(new if a.name == old_name else a for a in self.model.associations)
        )

    # additions --------------------------------------------------------

    def add_feature(self, class_name: str, feature, origin: Origin, aspect: Optional[str]) -> QualifiedName:
        cls = self.model.class_named(class_name)
        qn = QualifiedName.of(class_name, feature.name)
        if cls is None:
            raise StaleTargetError(QualifiedName.of(class_name), "class missing from model")
        existing = cls.feature(feature.name)
        if existing is not None:
            if existing == feature:
                self.report.warn(f"{qn}: identical element already present, addition skipped")
                return qn
            raise CollisionError(qn, "a different element with this name already exists")
        if isinstance(feature, AttributeDecl):
            cls = replace(cls, attributes=cls.attributes + (feature,))
        else:
            cls = replace(cls, methods=cls.methods + (feature,))
        self._set_class(class_name, cls)
        self._record(qn, origin, aspect)
        return qn

    def add_class(self, cls: ClassDecl, origin: Origin, aspect: Optional[str]) -> None:
        qn = QualifiedName.of(cls.name)
        existing = self.model.class_named(cls.name)
        if existing is not None:
            if existing == cls:
                self.report.warn(f"{qn}: identical class already present, addition skipped")
                return
            raise CollisionError(qn, "a different class with this name already exists")
        self.model = replace(self.model, classes=self.model.classes + (cls,))
        self._record_tree(qn, origin, aspect)

    def add_association(self, assoc: AssociationDecl, origin: Origin, aspect: Optional[str]) -> None:
        qn = QualifiedName.of(ASSOC, assoc.name)
        existing = self.model.association_named(assoc.name)
        if existing is not None:
            if existing == assoc:
                self.report.warn(f"{qn}: identical association already present, addition skipped")
                return
            raise CollisionError(qn, "a different association with this name already exists")
        self.model = replace(self.model, associations=self.model.associations + (assoc,))
        self._record_tree(qn, origin, aspect)

    def constrain(self, constraint: OrderingConstraint) -> None:
        if constraint not in self.constraints:
            self.constraints.append(constraint)

    # updates ----------------------------------------------------------

    def update(self, target: QualifiedName, payload: UpdatePayload, aspect: str) -> None:
        element = resolve(self.model, target)
        if element is None:
            raise StaleTargetError(target)
        new_name = payload.new_name
        if isinstance(element, ClassDecl):
            if payload.new_type is not None:
                self.report.warn(f"{target}: classes carry no type label, retype ignored")
            if new_name is None or new_name == element.name:
                return
            if self.model.class_named(new_name) is not None:
                raise CollisionError(QualifiedName.of(new_name), "rename target already exists")
            old = element.name
            self._set_class(old, replace(element, name=new_name))
            self.model = replace(
                self.model,
                associations=tuple(
                    replace(
                        a,
                        end_a=replace(a.end_a, class_name=new_name) if a.end_a.class_name == old else a.end_a,
                        end_b=replace(a.end_b, class_name=new_name) if a.end_b.class_name == old else a.end_b,
                    )
                    for a in self.model.associations
                ),
            )
            new_qn = QualifiedName.of(new_name)
            self._move(target, new_qn)
            self._record_tree(new_qn, Origin.ASPECT, aspect)
        elif isinstance(element, AssociationDecl):
            if payload.new_type is not None:
                self.report.warn(f"{target}: associations carry no type label, retype ignored")
            if new_name is None or new_name == element.name:
                return
            if self.model.association_named(new_name) is not None:
                raise CollisionError(QualifiedName.of(ASSOC, new_name), "rename target already exists")
            old = element.name
            self._set_assoc(old, replace(element, name=new_name))
            self.model = replace(
                self.model,
                classes=tuple(
                    replace(c, association_class_of=new_name) if c.association_class_of == old else c
                    for c in self.model.classes
                ),
            )
            new_qn = QualifiedName.of(ASSOC, new_name)
            self._move(target, new_qn)
            self._record_tree(new_qn, Origin.ASPECT, aspect)
        elif isinstance(element, (AttributeDecl, MethodDecl)):
            cls = self.model.class_named(target.segments[0])
            changed = element
            if new_name is not None and new_name != element.name:
                if cls.feature(new_name) is not None:
                    raise CollisionError(QualifiedName.of(cls.name, new_name), "rename target already exists")
                changed = replace(changed, name=new_name)
            if payload.new_type is not None:
                if isinstance(changed, AttributeDecl):
                    changed = replace(changed, type_name=payload.new_type)
                else:
                    changed = replace(changed, return_type=payload.new_type)
            if isinstance(element, AttributeDecl):
                cls = replace(cls, attributes=tuple(changed if a is element else a for a in cls.attributes))
            else:
                cls = replace(cls, methods=tuple(changed if m is element else m for m in cls.methods))
            self._set_class(cls.name, cls)
            new_qn = QualifiedName.of(cls.name, changed.name)
            if new_qn != target:
                self._move(target, new_qn)
            self._record(new_qn, Origin.ASPECT, aspect)
        else:
            raise WeaveError(f"{target}: association ends cannot be updated")

    # deletions --------------------------------------------------------

    def _orphan(self, assoc_names: set[str]) -> None:
        classes = []
        for c in self.model.classes:
            if c.association_class_of in assoc_names:
                self.report.warn(
                    f"{c.name}: association {c.association_class_of!r} deleted, association class kept as plain class"
                )
                c = replace(c, association_class_of=None)
            classes.append(c)
        self.model = replace(self.model, classes=tuple(classes))

    def delete(self, target: QualifiedName) -> None:
        element = resolve(self.model, target)
        if element is None:
            raise StaleTargetError(target)
        before = {qn for qn, _ in iter_elements(self.model)}
        if isinstance(element, ClassDecl):
            doomed = {a.name for a in self.model.associations if element.name in (a.end_a.class_name, a.end_b.class_name)}
            self.model = replace(
                self.model,
                classes=tuple(c for c in self.model.classes if c.name != element.name),
                associations=tuple(a for a in self.model.associations if a.name not in doomed),
            )
            self._orphan(doomed)
        elif isinstance(element, AssociationDecl):
            self.model = replace(
                self.model, associations=tuple(a for a in self.model.associations if a.name != element.name)
            )
            self._orphan({element.name})
        elif isinstance(element, (AttributeDecl, MethodDecl)):
            cls = self.model.class_named(target.segments[0])
            cls = replace(
                cls,
                attributes=tuple(a for a in cls.attributes if a is not element),
                methods=tuple(m for m in cls.methods if m is not element),
            )
            self._set_class(cls.name, cls)
        else:
            raise WeaveError(f"{target}: association ends cannot be deleted on their own")
        after = {qn for qn, _ in iter_elements(self.model)}
        self._forget(before - after)

    # result -----------------------------------------------------------

    def finish(self) -> WovenModel:
        violations = validate_core(self.model)
        if violations:
            listing = "; ".join(str(v) for v in violations)
            raise WeaveError(f"weaving produced a non-conformant model: {listing}")
        # Stable sort keeps the relative order of constraints on the same join point.
        constraints = sorted(self.constraints, key=lambda c: c.target_method)
        return WovenModel(self.model, tuple(constraints), tuple(sorted(self.provenance.values())))


# ---------------------------------------------------------------------------
# Core + additional


def _check_weaving(w: WeavingModel, left: CoreModel, right) -> None:
    violations = validate_weaving(w, left, right)
    if violations:
        raise WeaveError(f"weaving {w.name!r} is invalid: " + "; ".join(str(v) for v in violations))


def _weave_additional(woven: WovenModel, additional: CoreModel, w: WeavingModel, report: WeaveReport) -> WovenModel:
    if w.kind is not WeavingKind.CORE_ADDITIONAL:
        raise WeavingKindError(f"weaving {w.name!r} is not a coreadditional weaving")
    _check_weaving(w, woven.base, additional)
    ws = _Workspace(woven, report)
    for link in w.links:
        element = resolve(additional, link.right.target)
        if link.kind in (LinkKind.ATTRIBUTE_TO_CLASS, LinkKind.METHOD_TO_CLASS):
            ws.add_feature(link.left.target.segments[0], element, Origin.ADDITIONAL, None)
        elif link.kind is LinkKind.CLASS_TO_MODEL:
            ws.add_class(element, Origin.ADDITIONAL, None)
        else:
            ws.add_association(element, Origin.ADDITIONAL, None)
    return ws.finish()


def weave_core_additional(
    core: CoreModel, additional: CoreModel, w: WeavingModel, *, report: Optional[WeaveReport] = None
) -> CoreModel:
    """Copy every linked element of ``additional`` into ``core``.

    Unlinked additional elements are left out.  A copy that clashes with a
    different same-named element raises :class:`CollisionError`; an
    identical one is skipped with a warning.
    """
    return _weave_additional(WovenModel(core), additional, w, report or WeaveReport()).base


# ---------------------------------------------------------------------------
# Planning


def _aspect_targets(link, aspects: AspectModel) -> tuple[AspectRequirement, list[Pointcut]]:
    ref: AspectRef = link.right
    asp = aspects.aspect_named(ref.aspect)
    if ref.pointcut is None:
        return asp, list(asp.pointcuts)
    return asp, [asp.pointcut_named(ref.pointcut)]


def _edit_for(
    core: CoreModel, asp: AspectRequirement, pc: Pointcut, adv: Advice, joinpoint: QualifiedName, link: str
) -> tuple[Optional[Edit], Optional[str]]:
    kind = _EDIT_KIND[adv.kind]
    common = dict(
        payload=adv.payload,
        source=asp.name,
        link=link,
        advice=adv.name,
        joinpoint=joinpoint,
        advice_type=adv.advice_type,
    )
    if kind is not EditKind.ADD:
        return Edit(kind, joinpoint, **common), None
    element = adv.payload.element
    if isinstance(element, ClassDecl):
        return Edit(kind, QualifiedName.of(element.name), **common), None
    if isinstance(element, AssociationDecl):
        return Edit(kind, QualifiedName.of(ASSOC, element.name), **common), None
    if joinpoint.is_association_path:
        return None, (
            f"{asp.name}.{adv.name}: cannot add feature {element.name!r} at association {joinpoint}; skipped"
        )
    owner = QualifiedName(joinpoint.segments[:1])
    ordered = pc.kind is PointcutKind.CALL and isinstance(element, MethodDecl)
    return Edit(kind, owner.child(element.name), ordered=ordered, **common), None


def plan_weave(core: CoreModel, aspects: AspectModel, w: WeavingModel) -> tuple[WeavePlan, list[Conflict]]:
    """Expand a core/aspect weaving into edits and detect their conflicts.

    Edits are emitted link by link, then pointcut, matched join point and
    advice, each in declaration (or canonical name) order.
    """
    if w.kind is not WeavingKind.CORE_ASPECT:
        raise WeavingKindError(f"weaving {w.name!r} is not a coreaspect weaving")
    _check_weaving(w, core, aspects)
    edits: list[Edit] = []
    warnings: list[str] = []
    for link in w.links:
        asp, pointcuts = _aspect_targets(link, aspects)
        scope = link.left.target
        for pc in pointcuts:
            advices = asp.advices_for(pc.name)
            for adv in advices:
                meaningful = (
                    pc.kind is PointcutKind.CALL
                    and adv.kind is AdviceKind.ADD
                    and isinstance(adv.payload.element, MethodDecl)
                )
                if not meaningful:
                    warnings.append(
                        f"{asp.name}.{adv.name}: advice type {adv.advice_type.value!r} ignored "
                        f"({pc.kind.value} pointcut, {adv.kind.value} advice)"
                    )
            for jp in match_pointcut(pc, core):
                if not jp.startswith(scope):
                    continue
                for adv in advices:
                    edit, warning = _edit_for(core, asp, pc, adv, jp, link.name)
                    if warning:
                        warnings.append(warning)
                    if edit is not None:
                        edits.append(edit)
    plan = WeavePlan(tuple(edits), tuple(dict.fromkeys(warnings)))
    return plan, find_conflicts(core, plan)


def _cascade(core: CoreModel, qn: QualifiedName) -> set[QualifiedName]:
    """Everything a delete of ``qn`` removes from ``core``."""
    element = resolve(core, qn)
    gone = {qn}
    if isinstance(element, ClassDecl):
        gone |= {eqn for eqn, _ in iter_elements(core) if eqn.startswith(qn)}
        for a in core.associations:
            if element.name in (a.end_a.class_name, a.end_b.class_name):
                aqn = QualifiedName.of(ASSOC, a.name)
                gone |= {aqn, aqn.child(a.end_a.role), aqn.child(a.end_b.role)}
    elif isinstance(element, AssociationDecl):
        gone |= {qn.child(a.role) for a in element.ends}
    return gone


def _dependencies(core: CoreModel, edit: Edit) -> set[QualifiedName]:
    """Names an edit reads or writes when applied against ``core``."""
    if edit.kind is EditKind.DELETE:
        return _cascade(core, edit.target)
    deps = {edit.target}
    if edit.kind is EditKind.ADD:
        element = edit.payload.element
        if isinstance(element, (AttributeDecl, MethodDecl)):
            deps.add(edit.container)
            if edit.ordered:
                deps.add(edit.joinpoint)
        elif isinstance(element, ClassDecl) and element.association_class_of is not None:
            deps.add(QualifiedName.of(ASSOC, element.association_class_of))
        elif isinstance(element, AssociationDecl):
            deps |= {QualifiedName.of(e.class_name) for e in element.ends}
    return deps


def edit_footprint(core: CoreModel, edit: Edit) -> set[QualifiedName]:
    """Dependencies plus every name whose content or position the edit may change.

    Two plans with disjoint footprints can be applied in either order with
    value-equal results.
    """
    out = _dependencies(core, edit)
    out.add(edit.joinpoint)  # the edit exists only while its pointcut still matches
    if edit.kind is EditKind.ADD and edit.container == ROOT:
        out.add(ROOT)  # appends to the model's class or association list
    if edit.kind is EditKind.UPDATE and edit.payload.new_name is not None:
        out.add(QualifiedName(edit.target.segments[:-1] + (edit.payload.new_name,)))
        element = resolve(core, edit.target)
        if isinstance(element, ClassDecl):
            out |= {eqn for eqn, _ in iter_elements(core) if eqn.startswith(edit.target)}
            for a in core.associations:
                if element.name in (a.end_a.class_name, a.end_b.class_name):
                    out.add(QualifiedName.of(ASSOC, a.name))
        elif isinstance(element, AssociationDecl):
            out |= {edit.target.child(e.role) for e in element.ends}
            out |= {QualifiedName.of(c.name) for c in core.classes if c.association_class_of == element.name}
    if edit.kind is EditKind.DELETE:
        element = resolve(core, edit.target)
        doomed = {qn.segments[1] for qn in out if qn.is_association_path and len(qn.segments) == 2}
        out |= {QualifiedName.of(c.name) for c in core.classes if c.association_class_of in doomed}
        if isinstance(element, AssociationDecl):
            out |= {QualifiedName.of(c.name) for c in core.classes if c.association_class_of == element.name}
    return out


def plan_footprint(core: CoreModel, plan: WeavePlan) -> set[QualifiedName]:
    out: set[QualifiedName] = set()
    for edit in plan.edits:
        out |= edit_footprint(core, edit)
    return out


def _created_names(plan: WeavePlan) -> set[QualifiedName]:
    """Names that exist only after ``plan`` is applied."""
    out: set[QualifiedName] = set()
    for edit in plan.edits:
        if edit.kind is EditKind.ADD:
            out.add(edit.target)
            element = edit.payload.element
            if isinstance(element, ClassDecl):
                out |= {edit.target.child(f.name) for f in element.attributes + element.methods}
            elif isinstance(element, AssociationDecl):
                out |= {edit.target.child(e.role) for e in element.ends}
        elif edit.kind is EditKind.UPDATE and edit.payload.new_name is not None:
            out.add(QualifiedName(edit.target.segments[:-1] + (edit.payload.new_name,)))
    return out


def _reach(w: WeavingModel, aspects: AspectModel, names: set[QualifiedName]) -> set[QualifiedName]:
    """The subset of ``names`` that the pointcuts linked by ``w`` would select."""
    out = set()
    for link in w.links:
        _, pointcuts = _aspect_targets(link, aspects)
        for pc in pointcuts:
            out |= {qn for qn in names if pc.pattern.matches(qn) and qn.startswith(link.left.target)}
    return out


def independent(
    core: CoreModel,
    first: tuple[WeavingModel, AspectModel],
    second: tuple[WeavingModel, AspectModel],
) -> bool:
    """True when two coreaspect weavings can be applied to ``core`` in either order.

    Their plans must have disjoint footprints, and neither weaving's
    pointcuts may select a name the other one creates.
    """
    (w1, a1), (w2, a2) = first, second
    p1, _ = plan_weave(core, a1, w1)
    p2, _ = plan_weave(core, a2, w2)
    if plan_footprint(core, p1) & plan_footprint(core, p2):
        return False
    return not _reach(w2, a2, _created_names(p1)) and not _reach(w1, a1, _created_names(p2))


def find_conflicts(core: CoreModel, plan: WeavePlan) -> list[Conflict]:
    """Pairwise conflicts between edits of different aspects or links."""
    deps = [_dependencies(core, e) for e in plan.edits]
    conflicts: list[Conflict] = []
    edits = plan.edits
    for i in range(len(edits)):
        for j in range(i + 1, len(edits)):
            a, b = edits[i], edits[j]
            if a.source == b.source and a.link == b.link:
                continue
            if a.kind is EditKind.DELETE or b.kind is EditKind.DELETE:
                if a.kind is EditKind.DELETE and deps[i] & deps[j]:
                    conflicts.append(Conflict((a, b), a.target, ConflictCategory.DELETE_VS_OTHER))
                elif b.kind is EditKind.DELETE and deps[j] & deps[i]:
                    conflicts.append(Conflict((a, b), b.target, ConflictCategory.DELETE_VS_OTHER))
            elif a.kind is EditKind.UPDATE and b.kind is EditKind.UPDATE:
                if a.target == b.target and a.payload.fields & b.payload.fields:
                    conflicts.append(Conflict((a, b), a.target, ConflictCategory.DOUBLE_UPDATE))
            elif a.kind is EditKind.ADD and b.kind is EditKind.ADD:
                if a.target == b.target and a.payload.element != b.payload.element:
                    conflicts.append(Conflict((a, b), a.target, ConflictCategory.DUPLICATE_ADD))
    return conflicts


# ---------------------------------------------------------------------------
# Resolution and application


def resolve_conflicts(conflicts: Iterable[Conflict], aspects: AspectModel, *, force_first: bool = False) -> Resolution:
    """Keep the edit of the strictly higher-priority aspect in each conflict.

    Ties stay unresolved unless ``force_first`` is set, in which case the
    edit earlier in plan order wins.  A tie whose loser candidate was
    already dropped by another decision is moot.
    """
    conflicts = list(conflicts)
    priority = {asp.name: asp.priority for asp in aspects.aspects}
    decisions: list[Decision] = []
    ties: list[Conflict] = []
    for c in conflicts:
        a, b = c.edits
        pa, pb = priority[a.source], priority[b.source]
        if pa > pb:
            decisions.append(Decision(c, a, b, f"priority {format_priority(pa)} > {format_priority(pb)}"))
        elif pb > pa:
            decisions.append(Decision(c, b, a, f"priority {format_priority(pb)} > {format_priority(pa)}"))
        else:
            ties.append(c)
    dropped = {d.dropped for d in decisions}
    unresolved: list[Conflict] = []
    for c in ties:
        a, b = c.edits
        if a in dropped or b in dropped:
            continue
        if force_first:
            decisions.append(Decision(c, a, b, "equal priority, first in declaration order"))
            dropped.add(b)
        else:
            unresolved.append(c)
    return Resolution(tuple(decisions), tuple(unresolved))


def _apply(woven: WovenModel, plan: WeavePlan, report: WeaveReport) -> WovenModel:
    ws = _Workspace(woven, report)
    for edit in plan.edits:
        if edit.kind is EditKind.ADD:
            element = edit.payload.element
            if isinstance(element, (AttributeDecl, MethodDecl)):
                owner = ws._current_class(edit.container.segments[0])
                added = ws.add_feature(owner, element, Origin.ASPECT, edit.source)
                if edit.ordered:
                    target = ws.current(edit.joinpoint)
                    if resolve(ws.model, target) is None:
                        # removed by an earlier edit of the same aspect and link
                        ws.report.warn(f"{edit.source}.{edit.advice}: join point {target} was deleted; no ordering constraint")
                    else:
                        ws.constrain(OrderingConstraint(added, target, edit.advice_type, edit.source))
            elif isinstance(element, ClassDecl):
                if element.association_class_of is not None:
                    element = replace(element, association_class_of=ws._current_assoc(element.association_class_of))
                ws.add_class(element, Origin.ASPECT, edit.source)
            else:
                element = replace(
                    element,
                    end_a=replace(element.end_a, class_name=ws._current_class(element.end_a.class_name)),
                    end_b=replace(element.end_b, class_name=ws._current_class(element.end_b.class_name)),
                )
                ws.add_association(element, Origin.ASPECT, edit.source)
        elif edit.kind is EditKind.UPDATE:
            ws.update(ws.current(edit.target), edit.payload, edit.source)
        else:
            ws.delete(ws.current(edit.target))
        report.edits.append(edit)
    return ws.finish()


def apply_plan(core: Union[CoreModel, WovenModel], plan: WeavePlan, *, report: Optional[WeaveReport] = None) -> WovenModel:
    """Apply a conflict-free plan.

    Plan targets use the names the model had when the plan was made; renames
    performed by earlier edits are followed.  A target that no longer exists
    raises :class:`StaleTargetError`.
    """
    woven = core if isinstance(core, WovenModel) else WovenModel(core)
    return _apply(woven, plan, report or WeaveReport())


def weave(
    core: CoreModel,
    steps: Sequence[tuple[WeavingModel, Union[CoreModel, AspectModel]]],
    *,
    force_first: bool = False,
) -> tuple[WovenModel, WeaveReport]:
    """Run every weaving against ``core``: all coreadditional ones first,
    then all coreaspect ones, each group in the given order."""
    report = WeaveReport()
    woven = WovenModel(core)
    ordered = [s for s in steps if s[0].kind is WeavingKind.CORE_ADDITIONAL]
    ordered += [s for s in steps if s[0].kind is WeavingKind.CORE_ASPECT]
    for w, right in ordered:
        if w.kind is WeavingKind.CORE_ADDITIONAL:
            if not isinstance(right, CoreModel):
                raise WeavingKindError(f"weaving {w.name!r} needs a core model on its right")
            woven = _weave_additional(woven, right, w, report)
            continue
        if not isinstance(right, AspectModel):
            raise WeavingKindError(f"weaving {w.name!r} needs an aspect model on its right")
        plan, conflicts = plan_weave(woven.base, right, w)
        report.warnings.extend(plan.warnings)
        if conflicts:
            resolution = resolve_conflicts(conflicts, right, force_first=force_first)
            if resolution.unresolved:
                raise UnresolvedConflictError(resolution.unresolved)
            report.decisions.extend(resolution.decisions)
            plan = replace(plan, edits=tuple(e for e in plan.edits if e not in resolution.dropped))
        woven = _apply(woven, plan, report)
    return woven, report
