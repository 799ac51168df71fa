from __future__ import annotations

from dataclasses import replace

import pytest

from conftest import FIXTURES
from modelweave.core_model import QualifiedName
from modelweave.dsl import parse_aspect, parse_core, parse_weaving
from modelweave.errors import WeavingKindError
from modelweave.weaving_model import (
    AspectRef,
    ElementRef,
    LinkKind,
    WeaveLink,
    WeavingKind,
    digest_check,
    model_digest,
    structural_violations,
    validate_weaving,
)


def load(name, parse):
    path = FIXTURES / name
    result = parse(path.read_bytes(), str(path))
    assert result.ok, result.diagnostics
    return result.model


@pytest.fixture
def m1():
    return load("M1.core", parse_core)


@pytest.fixture
def m2():
    return load("M2.aspect", parse_aspect)


@pytest.fixture
def m3():
    return load("M3.core", parse_core)


@pytest.fixture
def cr1():
    return load("CR1.weave", parse_weaving)


def messages(w, left, right):
    return [v.message for v in validate_weaving(w, left, right)]


def test_worked_example_weaving_is_valid(cr1, m1, m2):
    assert cr1.kind is WeavingKind.CORE_ASPECT
    assert validate_weaving(cr1, m1, m2) == []
    (link,) = cr1.links
    assert link.right == AspectRef("M2", "NbreOfHoursConstraint", "Pointcut1")
    assert str(link.right) == "NbreOfHoursConstraint.Pointcut1"


def test_additional_weaving_is_valid(m1, m3):
    w = load("AR1.weave", parse_weaving)
    assert validate_weaving(w, m1, m3) == []


def test_wrong_right_model_kind(cr1, m1, m3):
    with pytest.raises(WeavingKindError):
        validate_weaving(cr1, m1, m3)
    w = load("AR1.weave", parse_weaving)
    with pytest.raises(WeavingKindError):
        validate_weaving(w, m1, load("M2.aspect", parse_aspect))


def test_unknown_aspect_and_pointcut(cr1, m1, m2):
    (link,) = cr1.links
    w = replace(cr1, links=(replace(link, right=AspectRef("M2", "Ghost")),))
    assert messages(w, m1, m2) == ["right end names unknown aspect 'Ghost'"]
    w = replace(cr1, links=(replace(link, right=AspectRef("M2", "NbreOfHoursConstraint", "P9")),))
    assert messages(w, m1, m2) == ["aspect 'NbreOfHoursConstraint' has no pointcut 'P9'"]


def test_left_end_must_resolve(cr1, m1, m2):
    (link,) = cr1.links
    gone = replace(link, left=ElementRef("M1", QualifiedName.parse("Student.Missing")))
    assert messages(replace(cr1, links=(gone,)), m1, m2) == ["left end Student.Missing not found in left model"]


def test_additional_right_end_type(m1, m3):
    w = load("AR1.weave", parse_weaving)
    wrong = WeaveLink("X", ElementRef("M1", QualifiedName.of("Speciality")),
                      ElementRef("M3", QualifiedName.of("Register")), LinkKind.ATTRIBUTE_TO_CLASS)
    assert messages(replace(w, links=(wrong,)), m1, m3) == ["right end Register must be an attribute"]
    model_level = WeaveLink("Y", ElementRef("M1", QualifiedName.of("Student")),
                            ElementRef("M3", QualifiedName.of("Register")), LinkKind.CLASS_TO_MODEL)
    assert messages(replace(w, links=(model_level,)), m1, m3) == [
        "left end of ClassToModel must name the left model 'M1'"
    ]


def test_structural_checks(cr1):
    (link,) = cr1.links
    dup = replace(cr1, links=(link, link))
    assert [v.message for v in structural_violations(dup)] == ["duplicate link 'L1'"]
    wrong_kind = replace(cr1, links=(replace(link, kind=LinkKind.CLASS_TO_MODEL),))
    assert [v.message for v in structural_violations(wrong_kind)] == [
        "coreaspect links must be AspectToTarget, not ClassToModel"
    ]
    foreign = replace(cr1, links=(replace(link, left=ElementRef("Other", link.left.target)),))
    assert "left end refers to model 'Other', not the left model" in [v.message for v in structural_violations(foreign)]


def test_digest_check(cr1, m1, m2):
    assert digest_check(cr1, m1, m2) == ()  # nothing recorded
    pinned = replace(cr1, left=replace(cr1.left, content_digest=model_digest(m1)))
    assert digest_check(pinned, m1, m2) == ()
    edited = replace(m1, name="M1b")
    assert digest_check(pinned, edited, m2) == (pinned.left,)


def test_digest_is_sha256_of_canonical_text(m1):
    import hashlib

    from modelweave.dsl import print_core

    assert model_digest(m1) == hashlib.sha256(print_core(m1).encode()).hexdigest()
    assert len(model_digest(m1)) == 64
