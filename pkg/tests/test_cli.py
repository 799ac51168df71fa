from __future__ import annotations

import io
import json
import shutil
import subprocess
import sys

import pytest

from conftest import FIXTURES
from modelweave.cli import main
from modelweave.dsl import parse_core
from modelweave.weaving_model import model_digest


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def work(tmp_path):
    """A writable copy of the fixture directory."""
    dest = tmp_path / "fx"
    shutil.copytree(FIXTURES, dest)
    return dest


def test_validate_ok(work):
    code, out, _ = run("validate", work / "M1.core", work / "M2.aspect", work / "CR1.weave", work / "HGS.reqs")
    assert code == 0
    assert out.count(": ok (0 warning(s))") == 4


def test_validate_reports_errors_with_positions(work):
    bad = work / "bad.core"
    bad.write_text("model M {\n  association S { end a : Ghost; end b : Ghost; }\n}\n")
    code, out, _ = run("validate", bad)
    assert code == 1
    assert f"{bad}: FAILED (2 error(s), 0 warning(s))" in out
    assert f"{bad}:2:19: error: assoc.S.a: end references unknown class 'Ghost'" in out


def test_validate_weave_checks_link_ends(work):
    text = (work / "CR1.weave").read_text().replace("Pointcut1", "Pointcut9")
    (work / "CR1.weave").write_text(text)
    code, out, _ = run("validate", work / "CR1.weave")
    assert code == 1
    assert "aspect 'NbreOfHoursConstraint' has no pointcut 'Pointcut9'" in out


def test_validate_weave_with_missing_model_is_an_io_error(work):
    (work / "M2.aspect").unlink()
    code, _, err = run("validate", work / "CR1.weave")
    assert code == 2
    assert "cannot read file" in err


def test_validate_warns_on_stale_digest(work):
    m1 = parse_core((work / "M1.core").read_bytes(), "M1.core").model
    text = (work / "CR1.weave").read_text().replace('at "M1.core"', f'at "M1.core" digest "{model_digest(m1)}"')
    (work / "CR1.weave").write_text(text)
    assert run("validate", work / "CR1.weave")[0] == 0
    (work / "M1.core").write_text((work / "M1.core").read_text().replace("Label", "Title"))
    code, out, _ = run("validate", work / "CR1.weave")
    assert code == 0
    assert "warning: digest of 'M1' (M1.core) does not match the current model" in out


def test_usage_errors_exit_2(work):
    assert run()[0] == 2
    assert run("validate")[0] == 2
    assert run("validate", work / "nope.core")[0] == 2
    assert run("validate", work / "golden" / "M1.json")[0] == 2
    assert run("weave", work / "M1.core", "--with-weaving", work / "CR1.weave")[0] == 2
    assert run("export", work / "M1.core")[0] == 2


def test_weave_worked_example(work, tmp_path):
    out_file = tmp_path / "woven.core"
    code, out, err = run(
        "weave", work / "M1.core", "--aspects", work / "M2.aspect", "--with-weaving", work / "CR1.weave", "-o", out_file
    )
    assert code == 0, err
    assert out_file.read_text() == (FIXTURES / "golden" / "CR1_woven.core").read_text()
    assert out.startswith("woven M1: 2 aspect edit(s), 0 conflict(s) resolved, 2 ordering constraint(s)\n")


def test_weave_without_output_prints_model(work):
    code, out, err = run("weave", work / "M1.core", "--aspects", work / "M2.aspect", "--with-weaving", work / "CR1.weave")
    assert code == 0
    assert out == (FIXTURES / "golden" / "CR1_woven.core").read_text()
    assert "woven M1" in err


def test_weave_plan_only(work, tmp_path):
    out_file = tmp_path / "never.core"
    code, out, _ = run(
        "weave", work / "M1.core", "--aspects", work / "M2.aspect", "--with-weaving", work / "CR1.weave",
        "--plan", "-o", out_file,
    )
    assert code == 0
    assert "add Student.getSecondSpeciality (before Student.NewSubscription)" in out
    assert not out_file.exists()


def test_weave_tie_fails_unless_forced(work):
    args = ("weave", work / "M1.core", "--aspects", work / "conflicts/duplicate_add.aspect",
            "--with-weaving", work / "conflicts/duplicate_add.weave")
    code, out, err = run(*args)
    assert code == 1
    assert "unresolved DuplicateAdd on Student.check: Quota.addCheck vs Audit.addCheck" in out
    assert "Audit, Quota" in err
    code, out, _ = run(*args, "--force-first")
    assert code == 0
    assert "op check(IdSpeciality : Integer) : Boolean;" in out


def test_weave_priority_resolution(work):
    code, out, err = run(
        "weave", work / "M1.core", "--aspects", work / "conflicts/double_update.aspect",
        "--with-weaving", work / "conflicts/double_update.weave",
    )
    assert code == 0
    assert "attr FullName : String;" in out
    assert "kept Naming.toFullName (priority 0.8 > 0.5)" in err


def test_weave_with_additional(work):
    code, out, _ = run(
        "weave", work / "M1.core",
        "--additional", work / "M3.core", "--with-weaving", work / "AR1.weave",
        "--aspects", work / "M2.aspect", "--with-weaving", work / "CR1.weave",
    )
    assert code == 0
    assert "//@ origin Register additional" in out


def test_weave_kind_mismatch_is_a_domain_error(work):
    code, _, err = run("weave", work / "M1.core", "--additional", work / "M3.core", "--with-weaving", work / "CR1.weave")
    assert code == 1
    assert "coreaspect weaving given with --additional" in err


def test_strict_fails_on_stale_digest(work):
    text = (work / "CR1.weave").read_text().replace('at "M1.core"', 'at "M1.core" digest "00"')
    (work / "CR1.weave").write_text(text)
    args = ("weave", work / "M1.core", "--aspects", work / "M2.aspect", "--with-weaving", work / "CR1.weave")
    code, _, err = run(*args)
    assert code == 0 and "does not match" in err
    assert run(*args, "--strict")[0] == 1


def test_weave_invalid_input_exits_1(work):
    (work / "M1.core").write_text("model M1 { class A { attr x : Integer } }")
    code, _, err = run("weave", work / "M1.core", "--aspects", work / "M2.aspect", "--with-weaving", work / "CR1.weave")
    assert code == 1
    assert "expected ';'" in err


def test_export_structured_and_diagram(work, tmp_path):
    code, out, _ = run("export", work / "M1.core", "--format", "structured")
    assert code == 0
    assert out == (FIXTURES / "golden" / "M1.json").read_text()
    code, out, _ = run("export", work / "M2.aspect", "--format", "structured")
    assert json.loads(out)["kind"] == "aspect"
    dot = tmp_path / "m1.dot"
    assert run("export", work / "golden" / "CR1_woven.core", "--format", "diagram", "-o", dot)[0] == 0
    assert dot.read_text().startswith('digraph "M1" {')
    assert run("export", work / "HGS.reqs", "--format", "diagram")[0] == 2


def test_reqs_commands(work):
    graph = work / "HGS.reqs"
    assert run("reqs", graph, "--check-redundancy") == (
        0, "CR2 inferable from {CR1}\nCR2 inferable from {CR3}\n", ""
    )
    assert run("reqs", graph, "--eval", "ER1,ER2", "--cr", "CR1")[1] == "CR1 = true\n"
    assert run("reqs", graph, "--eval", "", "--cr", "CR1")[1] == "CR1 = false\n"
    assert run("reqs", graph, "--expression", "--cr", "CR2")[1] == "CR2 = ER1 | (ER1 & ER2)\n"
    assert run("reqs", graph, "--eval", "ER9", "--cr", "CR1")[0] == 2
    assert run("reqs", graph, "--eval", "ER1", "--cr", "ER1")[0] == 2
    assert run("reqs", graph, "--eval", "ER1")[0] == 2
    assert run("reqs", graph, "--check-redundancy", "--max-leaves", "1")[0] == 1


def test_reqs_without_redundancy(work):
    g = work / "single.reqs"
    g.write_text('requirements R { cr C "c" = and(E, F); er E "e"; er F "f"; }\n')
    assert run("reqs", g, "--check-redundancy")[1] == "no redundant cooperative requirements\n"


def test_module_entry_point(work):
    proc = subprocess.run(
        [sys.executable, "-m", "modelweave", "validate", str(work / "M1.core")], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout.endswith(": ok (0 warning(s))\n")
