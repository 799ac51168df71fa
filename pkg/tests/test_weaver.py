from __future__ import annotations

import random
from dataclasses import replace
from fractions import Fraction

import pytest

from conftest import FIXTURES
from gen import gen_additional, gen_aspect_model, gen_aspect_weaving, gen_core, gen_targeted
from modelweave.aspect_model import AdviceType, NamePattern, Pointcut, PointcutKind
from modelweave.core_model import QualifiedName, validate_core
from modelweave.dsl import parse_aspect, parse_core, parse_weaving
from modelweave.errors import (
    CollisionError,
    StaleTargetError,
    UnresolvedConflictError,
    WeaveError,
    WeavingKindError,
)
from modelweave.weaver import (
    ConflictCategory,
    EditKind,
    OrderingConstraint,
    Origin,
    WovenModel,
    apply_plan,
    independent,
    match_pointcut,
    plan_weave,
    resolve_conflicts,
    weave,
    weave_core_additional,
)
from oracles import dangling_ends, element_names

QN = QualifiedName.parse


def fixture(name, parse):
    path = FIXTURES / name
    result = parse(path.read_bytes(), str(path))
    assert result.ok, result.diagnostics
    return result.model


@pytest.fixture
def m1():
    return fixture("M1.core", parse_core)


def aspects(text):
    result = parse_aspect(text, "inline.aspect")
    assert result.ok, result.diagnostics
    return result.model


def weaving(*links, right="A"):
    body = "".join(f"  link L{i} : AspectToTarget {left} <-> {ref};\n" for i, (left, ref) in enumerate(links, 1))
    text = f'weaving W : coreaspect {{\n  left M1 at "M1.core";\n  right {right} at "a.aspect";\n{body}}}\n'
    return parse_weaving(text).model


# -- the worked example ---------------------------------------------------------


def test_worked_example_plan(m1):
    m2 = fixture("M2.aspect", parse_aspect)
    cr1 = fixture("CR1.weave", parse_weaving)
    plan, conflicts = plan_weave(m1, m2, cr1)
    assert conflicts == []
    assert [(e.kind, str(e.target)) for e in plan.edits] == [
        (EditKind.ADD, "Student.VerifySpecialityNbreOfHours"),
        (EditKind.ADD, "Student.getSecondSpeciality"),
    ]
    woven = apply_plan(m1, plan)
    student = woven.base.class_named("Student")
    assert [m.name for m in student.methods] == [
        "NewSubscription",
        "VerifySpecialityNbreOfHours",
        "getSecondSpeciality",
    ]
    target = QN("Student.NewSubscription")
    assert woven.ordering_constraints == (
        OrderingConstraint(QN("Student.VerifySpecialityNbreOfHours"), target, AdviceType.BEFORE, "NbreOfHoursConstraint"),
        OrderingConstraint(QN("Student.getSecondSpeciality"), target, AdviceType.BEFORE, "NbreOfHoursConstraint"),
    )
    assert woven.origin_of(QN("Student.getSecondSpeciality")) is Origin.ASPECT
    assert woven.origin_of(QN("Student.Name")) is Origin.CORE


def test_empty_plan_and_identity(m1):
    nothing = aspects("aspectmodel A { aspect X { pointcut P : call on Nobody.f; advice a : before deleteelt bind P { } } }")
    plan, conflicts = plan_weave(m1, nothing, weaving(("Student", "X")))
    assert plan.edits == () and conflicts == []
    assert apply_plan(m1, plan) == WovenModel(m1)
    woven, report = weave(m1, [])
    assert woven == WovenModel(m1) and report.edits == []
    woven, _ = weave(m1, [(weaving(), nothing)])
    assert woven.base == m1


# -- matching -------------------------------------------------------------------


def test_match_pointcut(m1):
    call = Pointcut("P", PointcutKind.CALL, NamePattern(("*", "*")))
    assert [str(q) for q in match_pointcut(call, m1)] == ["Student.NewSubscription"]
    structural = Pointcut("P", PointcutKind.STRUCTURAL, NamePattern(("Speciality", "*")))
    assert [str(q) for q in match_pointcut(structural, m1)] == [
        "Speciality.IdSpeciality",
        "Speciality.Label",
        "Speciality.NbreOfHours",
    ]
    assocs = Pointcut("P", PointcutKind.STRUCTURAL, NamePattern(("assoc", "*")))
    assert [str(q) for q in match_pointcut(assocs, m1)] == ["assoc.Enrols", "assoc.Follows", "assoc.Offers"]


def test_link_left_end_scopes_the_join_points(m1):
    a = aspects("aspectmodel A { aspect X { pointcut P : structural on *.Name; advice r : after update bind P { retype Text; } } }")
    plan, _ = plan_weave(m1, a, weaving(("Student", "X.P")))
    assert [str(e.target) for e in plan.edits] == ["Student.Name"]
    plan, _ = plan_weave(m1, a, weaving(("University", "X.P")))
    assert [str(e.target) for e in plan.edits] == ["University.Name"]


def test_structural_advice_type_is_ignored_with_warning(m1):
    a = aspects("aspectmodel A { aspect X { pointcut P : structural on Student.Name; advice r : before update bind P { retype Text; } } }")
    plan, _ = plan_weave(m1, a, weaving(("Student", "X")))
    assert plan.warnings == ("X.r: advice type 'before' ignored (structural pointcut, update advice)",)


# -- conflicts ------------------------------------------------------------------


@pytest.mark.parametrize(
    "name, category",
    [
        ("delete_vs_other", ConflictCategory.DELETE_VS_OTHER),
        ("double_update", ConflictCategory.DOUBLE_UPDATE),
        ("duplicate_add", ConflictCategory.DUPLICATE_ADD),
    ],
)
def test_conflict_fixtures(m1, name, category):
    a = fixture(f"conflicts/{name}.aspect", parse_aspect)
    w = fixture(f"conflicts/{name}.weave", parse_weaving)
    _, conflicts = plan_weave(m1, a, w)
    assert [c.category for c in conflicts] == [category]


def test_higher_priority_wins(m1):
    a = fixture("conflicts/double_update.aspect", parse_aspect)
    w = fixture("conflicts/double_update.weave", parse_weaving)
    _, conflicts = plan_weave(m1, a, w)
    resolution = resolve_conflicts(conflicts, a)
    (decision,) = resolution.decisions
    assert decision.kept.source == "Naming" and decision.dropped.source == "Legacy"
    assert resolution.unresolved == ()
    woven, report = weave(m1, [(w, a)])
    assert woven.base.class_named("Student").feature("FullName") is not None
    assert report.decisions == [decision]


def test_rescaling_priorities_keeps_the_decision(m1):
    a = fixture("conflicts/double_update.aspect", parse_aspect)
    w = fixture("conflicts/double_update.weave", parse_weaving)
    _, conflicts = plan_weave(m1, a, w)
    halved = replace(a, aspects=tuple(replace(x, priority=x.priority / 2) for x in a.aspects))
    kept = [d.kept for d in resolve_conflicts(conflicts, a).decisions]
    assert [d.kept for d in resolve_conflicts(conflicts, halved).decisions] == kept


def test_equal_priorities_are_unresolved(m1):
    a = fixture("conflicts/duplicate_add.aspect", parse_aspect)
    w = fixture("conflicts/duplicate_add.weave", parse_weaving)
    with pytest.raises(UnresolvedConflictError) as info:
        weave(m1, [(w, a)])
    assert "Audit, Quota" in str(info.value)
    woven, report = weave(m1, [(w, a)], force_first=True)
    assert woven.base.class_named("Student").feature("check").parameters  # Quota's version
    assert report.decisions[0].reason == "equal priority, first in declaration order"


def test_same_aspect_same_link_never_conflicts(m1):
    a = aspects(
        "aspectmodel A { aspect X { pointcut P : structural on Student.Name;"
        " advice one : after update bind P { rename First; }"
        " advice two : after update bind P { rename Second; } } }"
    )
    plan, conflicts = plan_weave(m1, a, weaving(("Student", "X")))
    assert conflicts == []
    woven = apply_plan(m1, plan)  # the second rename follows the first
    assert woven.base.class_named("Student").feature("Second") is not None


# -- application ----------------------------------------------------------------


def delete(m1, pattern, kind="structural"):
    a = aspects(f"aspectmodel A {{ aspect X {{ pointcut P : {kind} on {pattern}; advice d : before deleteelt bind P {{ }} }} }}")
    left = pattern.split(".")[0] if not pattern.startswith("assoc") else pattern
    woven, report = weave(m1, [(weaving((left, "X")), a)])
    return woven, report


def test_delete_class_cascades_to_associations(m1):
    woven, _ = delete(m1, "Speciality")
    assert woven.base.class_named("Speciality") is None
    assert [a.name for a in woven.base.associations] == ["Enrols"]
    assert dangling_ends(woven.base) == []


def test_delete_association_orphans_its_association_class(m1):
    m = replace(m1, classes=m1.classes + (parse_core("model X { class Grade { } }").model.classes[0],))
    m = replace(m, classes=m.classes[:-1] + (replace(m.classes[-1], association_class_of="Follows"),))
    assert validate_core(m) == []
    woven, report = delete(m, "assoc.Follows")
    assert woven.base.class_named("Grade").association_class_of is None
    assert any("association class kept as plain class" in w for w in report.warnings)


def test_delete_removes_constraints_and_provenance(m1):
    woven, _ = weave(m1, [(fixture("CR1.weave", parse_weaving), fixture("M2.aspect", parse_aspect))])
    a = aspects("aspectmodel A { aspect X { pointcut P : call on Student.NewSubscription; advice d : after deleteelt bind P { } } }")
    plan, _ = plan_weave(woven.base, a, weaving(("Student", "X")))
    after = apply_plan(woven, plan)
    assert after.ordering_constraints == ()
    assert len(after.provenance) == 2


def test_rename_class_follows_references(m1):
    a = aspects("aspectmodel A { aspect X { pointcut P : structural on Student; advice r : after update bind P { rename Pupil; } } }")
    woven, _ = weave(m1, [(weaving(("Student", "X")), a)])
    assert woven.base.class_named("Pupil") is not None
    ends = {e.class_name for assoc in woven.base.associations for e in assoc.ends}
    assert "Student" not in ends and "Pupil" in ends
    assert woven.origin_of(QN("Pupil.Name")) is Origin.ASPECT


def test_retype_attribute_and_method(m1):
    a = aspects(
        "aspectmodel A { aspect X {"
        " pointcut Attr : structural on Speciality.NbreOfHours;"
        " pointcut Call : call on Student.NewSubscription;"
        " advice t : after update bind Attr { retype Real; }"
        " advice r : after update bind Call { retype Boolean; } } }"
    )
    woven, _ = weave(m1, [(weaving(("Speciality", "X.Attr"), ("Student", "X.Call")), a)])
    assert woven.base.class_named("Speciality").feature("NbreOfHours").type_name == "Real"
    assert woven.base.class_named("Student").feature("NewSubscription").return_type == "Boolean"


def test_class_retype_is_ignored_with_warning(m1):
    a = aspects("aspectmodel A { aspect X { pointcut P : structural on Student; advice r : after update bind P { retype T; } } }")
    woven, report = weave(m1, [(weaving(("Student", "X")), a)])
    assert woven.base == m1
    assert "Student: classes carry no type label, retype ignored" in report.warnings


def test_identical_add_is_idempotent_and_different_add_collides(m1):
    same = aspects("aspectmodel A { aspect X { pointcut P : structural on Student; advice a : after addelt bind P { attr Name : String; } } }")
    woven, report = weave(m1, [(weaving(("Student", "X")), same)])
    assert woven.base == m1
    assert "Student.Name: identical element already present, addition skipped" in report.warnings
    other = aspects("aspectmodel A { aspect X { pointcut P : structural on Student; advice a : after addelt bind P { attr Name : Integer; } } }")
    with pytest.raises(CollisionError):
        weave(m1, [(weaving(("Student", "X")), other)])


def test_feature_add_at_association_is_skipped(m1):
    a = aspects("aspectmodel A { aspect X { pointcut P : structural on assoc.Follows; advice a : after addelt bind P { attr x : Integer; } } }")
    plan, _ = plan_weave(m1, a, weaving(("assoc.Follows", "X")))
    assert plan.edits == ()
    assert any("cannot add feature 'x' at association assoc.Follows" in w for w in plan.warnings)


def test_ordered_add_after_its_join_point_was_deleted(m1):
    a = aspects(
        "aspectmodel A { aspect X { pointcut P : call on Student.NewSubscription;"
        " advice d : before deleteelt bind P { }"
        " advice a : before addelt bind P { op check(); } } }"
    )
    woven, report = weave(m1, [(weaving(("Student", "X")), a)])
    assert woven.base.class_named("Student").feature("check") is not None
    assert woven.ordering_constraints == ()
    assert any("was deleted; no ordering constraint" in w for w in report.warnings)


def test_stale_plan_raises(m1):
    a = aspects("aspectmodel A { aspect X { pointcut P : structural on Student.Name; advice d : after deleteelt bind P { } } }")
    plan, _ = plan_weave(m1, a, weaving(("Student", "X")))
    drifted = replace(m1, classes=tuple(c for c in m1.classes if c.name != "Student"), associations=())
    with pytest.raises(StaleTargetError):
        apply_plan(drifted, plan)


def test_wrong_model_kinds(m1):
    m2 = fixture("M2.aspect", parse_aspect)
    with pytest.raises(WeavingKindError):
        weave(m1, [(fixture("CR1.weave", parse_weaving), m1)])
    with pytest.raises(WeavingKindError):
        plan_weave(m1, m2, fixture("AR1.weave", parse_weaving))


def test_invalid_weaving_is_rejected(m1):
    m2 = fixture("M2.aspect", parse_aspect)
    with pytest.raises(WeaveError):
        plan_weave(m1, m2, weaving(("Student", "Ghost")))


# -- core + additional ----------------------------------------------------------


def test_additional_weave(m1):
    m3 = fixture("M3.core", parse_core)
    w = fixture("AR1.weave", parse_weaving)
    merged = weave_core_additional(m1, m3, w)
    assert validate_core(merged) == []
    assert merged.class_named("Register") is not None
    assert [a.name for a in merged.class_named("Speciality").attributes][-1] == "MaxHours"
    assert merged.association_named("Keeps") is not None


def test_additional_runs_before_aspects_whatever_the_order(m1):
    m2 = fixture("M2.aspect", parse_aspect)
    m3 = fixture("M3.core", parse_core)
    cr1 = fixture("CR1.weave", parse_weaving)
    ar1 = fixture("AR1.weave", parse_weaving)
    one, _ = weave(m1, [(cr1, m2), (ar1, m3)])
    two, _ = weave(m1, [(ar1, m3), (cr1, m2)])
    assert one == two
    assert one.origin_of(QN("Register")) is Origin.ADDITIONAL
    assert one.origin_of(QN("Student.getSecondSpeciality")) is Origin.ASPECT


# -- properties on generated inputs ----------------------------------------------


@pytest.mark.parametrize("seed", range(60))
def test_provenance_covers_every_new_element(seed):
    rng = random.Random(seed)
    core = gen_core(rng)
    extra, wx = gen_additional(rng, core)
    a = gen_aspect_model(rng, core)
    w = gen_aspect_weaving(rng, core, a)
    try:
        woven, _ = weave(core, [(wx, extra), (w, a)])
    except WeaveError:
        return
    assert validate_core(woven.base) == []
    before = element_names(core)
    recorded = {str(p.element) for p in woven.provenance if p.origin is not Origin.CORE}
    assert element_names(woven.base) - before <= recorded
    assert recorded <= element_names(woven.base)


@pytest.mark.parametrize("seed", range(60))
def test_independent_weavings_commute(seed):
    rng = random.Random(seed)
    core = gen_core(rng)
    if not core.classes:
        return
    a1, w1 = gen_targeted(rng, core, rng.choice(core.classes).name, "X")
    a2, w2 = gen_targeted(rng, core, rng.choice(core.classes).name, "Y")
    if not independent(core, (w1, a1), (w2, a2)):
        return
    try:
        forward, _ = weave(core, [(w1, a1), (w2, a2)])
    except WeaveError:
        return
    backward, _ = weave(core, [(w2, a2), (w1, a1)])
    assert forward == backward


def test_priority_fraction_default():
    a = aspects("aspectmodel A { aspect X { } }")
    assert a.aspects[0].priority == Fraction(1, 2)
