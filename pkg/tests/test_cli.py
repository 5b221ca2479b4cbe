import pytest

from conftest import FIXTURES
from metakernel.cli import main
from metakernel.syntax_io import parse_metamodel, parse_model


def fx(name):
    return str(FIXTURES / name)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out.splitlines(), err.splitlines()


def test_check_clean_fixture(capsys):
    assert run(capsys, "check", fx("nested_clone.mdl"), fx("signalflow.mm")) == (0, [], [])


def test_validate(capsys):
    assert run(capsys, "validate", fx("empty.mm"))[0] == 0


def test_validate_reports_each_problem(tmp_path, capsys):
    bad = tmp_path / "bad.mm"
    bad.write_text("metamodel Bad version 1\nclass A extends A {}\nclass B { contains Ghost }\n")
    code, out, err = run(capsys, "validate", str(bad))
    assert code == 1
    assert out == ["INVALID B contains Ghost", "INVALID A"]  # cycles are reported last
    assert len(err) == len(out)


def test_check_failure_lines_match_diagnostics(capsys):
    code, out, err = run(capsys, "check", fx("short_circuit.mdl"), fx("signalflow.mm"))
    assert code == 1
    assert out == ["NONCONFORMING constraint /Top/Filter/BufferedConnection#5"]
    assert len(err) == 1
    assert run(capsys, "check", fx("short_circuit.mdl"), fx("signalflow.mm"), "--skip-constraints")[0] == 0


def test_version_mismatch_is_an_error(capsys):
    code, out, err = run(capsys, "check", fx("nested_clone.mdl"), fx("signalflow_base.mm"))
    assert code == 2 and out == [] and "MetamodelMismatch" in err[0]


def test_missing_file(capsys):
    code, _, err = run(capsys, "validate", fx("nope.mm"))
    assert code == 2 and len(err) == 1


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_constraints_eval(capsys):
    code, out, err = run(capsys, "constraints", "eval", fx("short_circuit.mdl"), fx("signalflow.mm"))
    assert code == 1
    assert out == ["CONSTRAINT OutPortHierarchy VIOLATED at /Top/Filter/a"]
    assert run(capsys, "constraints", "eval", fx("pass_up.mdl"), fx("signalflow.mm"))[:2] == (0, [])


def test_clone_and_tree(tmp_path, capsys):
    out_path = tmp_path / "cloned.mdl"
    code, out, _ = run(
        capsys, "clone", fx("nested_clone.mdl"), fx("signalflow.mm"), "/Component1/Component2", "/Component1", "--name", "C3", "-o", str(out_path)
    )
    assert code == 0 and out == ["CLONED /Component1/Component2 -> /Component1/C3"]
    mm = parse_metamodel((FIXTURES / "signalflow.mm").read_text())
    assert len(parse_model(out_path.read_text(), mm).correspondences) == 2
    code, out, _ = run(capsys, "clone", "tree", str(out_path), fx("signalflow.mm"))
    assert out == ["CLONE /Component1/Component2 -> /Component1/C2", "CLONE /Component1/Component2 -> /Component1/C3"]
    assert run(capsys, "check", str(out_path), fx("signalflow.mm"))[0] == 0


def test_clone_into_clone_refused(capsys):
    code, out, err = run(capsys, "clone", fx("nested_clone.mdl"), fx("signalflow.mm"), "#2", "/Component1/C2", "-o", "-")
    assert code == 2 and "CloneRestriction" in err[0]


def test_merge_then_check(tmp_path, capsys):
    merged = tmp_path / "hybrid.mm"
    report = tmp_path / "report.txt"
    code, out, err = run(
        capsys, "merge", fx("discrete.mm"), fx("continuous.mm"), fx("hybrid.eqv"), "-o", str(merged), "--report", str(report)
    )
    assert code == 0 and out == [] and err == []
    assert report.read_text().splitlines() == [
        "PRODUCED System",
        "REWRITTEN SiblingTransitions: unchanged",
        "REWRITTEN FlowAssigns: unchanged",
    ]
    assert run(capsys, "check", fx("hybrid_model.mdl"), str(merged)) == (0, [], [])


def test_evolve_report(capsys):
    code, out, err = run(capsys, "evolve", "report", fx("signalflow_base.mm"), fx("signalflow_no_outport.mm"), fx("evolve_model.mdl"))
    assert code == 1
    assert [l.split()[1] for l in out] == ["Orphaned"] * 3 + ["LinkInvalid"] * 2
    assert err[0] == "note ClassRemoved OutPort"
    code, out, _ = run(capsys, "evolve", "report", fx("signalflow_base.mm"), fx("signalflow.mm"), fx("evolve_model.mdl"))
    assert out == ["IMPACT NewConstraintViolation /Top/Mixer/BufferedConnection#8"]


def test_lint_exits_zero(tmp_path, capsys):
    text = (FIXTURES / "nested_clone.mdl").read_text().replace('entity #3 OutPort "out" {\n', 'entity #3 OutPort "out" {\n    ext glyph = "star"\n')
    path = tmp_path / "styled.mdl"
    path.write_text(text)
    code, out, err = run(capsys, "lint", str(path), fx("signalflow.mm"))
    assert code == 0 and out == ["LINT glyph-override /Component1/out"] and len(err) == 1


def test_color(monkeypatch, capsys):
    monkeypatch.setenv("METAKERNEL_COLOR", "1")
    _, _, err = run(capsys, "check", fx("short_circuit.mdl"), fx("signalflow.mm"))
    assert err[0].startswith("\x1b[31m")
    monkeypatch.setenv("METAKERNEL_COLOR", "0")
    _, _, err = run(capsys, "check", fx("short_circuit.mdl"), fx("signalflow.mm"))
    assert "\x1b" not in err[0]


def test_inputs_untouched(tmp_path, capsys):
    before = {p.name: p.read_bytes() for p in FIXTURES.iterdir()}
    run(capsys, "clone", fx("nested_clone.mdl"), fx("signalflow.mm"), "#4", "/", "-o", str(tmp_path / "x.mdl"))
    run(capsys, "merge", fx("discrete.mm"), fx("continuous.mm"), fx("hybrid.eqv"), "-o", str(tmp_path / "y.mm"))
    assert {p.name: p.read_bytes() for p in FIXTURES.iterdir()} == before
