import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from quasilin.algfile import (
    AlgebraFileError,
    BUILTIN_NAMES,
    builtin_bundle,
    bundles_equal,
    export_builtin,
    load_algebra_dict,
    load_algebra_file,
    parse_rep_spec,
    save_algebra_file,
)
from quasilin.cli import _parse_tgrid, main
from quasilin.ncrewrite import RewriteSystem
from quasilin.report import Check, Report, Table
from quasilin.reps import rep_krawtchouk


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_doc(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


NAMBU = {
    "kind": "poisson",
    "vars": ["x", "y", "z"],
    "brackets": {"y,z": "y*z", "z,x": "x*z", "x,y": "x*y"},
}

CASE_I = {
    "kind": "poisson",
    "vars": ["x", "y", "z"],
    "brackets": {"y,z": "y*z + x + 2", "z,x": "x*z + y", "x,y": "x*y + z"},
}

NON_JACOBI = {
    "kind": "poisson",
    "vars": ["x", "y", "z"],
    "brackets": {"y,z": "y*z + x + y", "z,x": "x*z + y", "x,y": "x*y + z"},
}


# ---------------------------------------------------------------------------
# definition files and the builtin registry


def test_builtin_export_round_trips_exactly():
    for name in BUILTIN_NAMES:
        doc = json.loads(json.dumps(export_builtin(name)))
        assert bundles_equal(load_algebra_dict(doc), builtin_bundle(name))


def test_builtin_export_keeps_overrides():
    doc = export_builtin("qosc", {"q": Fraction(-1, 3)})
    assert doc["params"]["q"] == "-1/3"
    back = load_algebra_dict(json.loads(json.dumps(doc)))
    assert bundles_equal(back, builtin_bundle("qosc", {"q": Fraction(-1, 3)}))
    assert not bundles_equal(back, builtin_bundle("qosc"))


def test_builtin_rejects_unknown_parameter():
    with pytest.raises(ValueError, match="no parameter"):
        builtin_bundle("qosc", {"zeta": 1})
    with pytest.raises(ValueError, match="unknown builtin"):
        builtin_bundle("qrac")


def test_save_algebra_file_round_trip(tmp_path):
    path = str(tmp_path / "kraw.json")
    save_algebra_file(export_builtin("krawtchouk", {"d": 7}), path)
    assert bundles_equal(load_algebra_file(path), builtin_bundle("krawtchouk", {"d": 7}))


def test_rewrite_file_matches_builtin_presentation(tmp_path):
    doc = {
        "kind": "rewrite",
        "generators": ["Y", "Z", "X"],
        "params": {"q": "1/2"},
        "rules": {
            "X*Y": "q*Y*X + Z + 1",
            "Z*Y": "2*Y*Z - 2*X - 2",
            "X*Z": "2*Z*X - 2*Y - 2",
        },
    }
    rs = load_algebra_file(write_doc(tmp_path, "awz.json", doc)).rewrite
    want = RewriteSystem.aw_z(Fraction(1, 2), 1, 1, 1)
    assert rs.generators == want.generators
    assert rs.rules == want.rules


def test_difference_op_file_matches_builtin_krawtchouk(tmp_path):
    doc = {
        "kind": "difference_op",
        "d": 12,
        "params": {"p": "1/3", "d": "12"},
        "A": "p*(d - 1 - s)",
        "B": "-p*(d - 1 - s) - (1 - p)*s",
        "C": "(1 - p)*s",
        "grid": {"kind": "linear", "c1": 1},
    }
    rep = load_algebra_file(write_doc(tmp_path, "kraw.json", doc)).rep
    want = rep_krawtchouk(12, Fraction(1, 3))
    assert np.array_equal(rep.ops["H"], want.ops["H"])
    assert np.array_equal(rep.ops["X"], want.ops["X"])


def test_schema_errors_carry_field_paths(tmp_path):
    with pytest.raises(AlgebraFileError, match='field "kind"'):
        load_algebra_dict({"kind": "spectral"})
    with pytest.raises(AlgebraFileError, match='field "vars"'):
        load_algebra_dict({"kind": "poisson", "vars": ["x"], "brackets": {}})
    with pytest.raises(AlgebraFileError, match='field "brackets"'):
        load_algebra_dict(
            {"kind": "poisson", "vars": ["x", "y"], "brackets": {"x,w": "1"}}
        )
    with pytest.raises(AlgebraFileError, match=r'field "F\[0\]\[1\]"'):
        load_algebra_dict(
            {
                "kind": "adaction",
                "hamiltonian": "Y",
                "basis": ["X", "1"],
                "F": [["1", "x +"], ["0", "0"]],
            }
        )
    # floats lose exactness silently, so they are refused up front
    with pytest.raises(AlgebraFileError, match="non-integers as strings"):
        load_algebra_dict(
            {"kind": "builtin", "name": "qosc", "params": {"q": 0.5}}
        )
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "poisson",\n "vars": [}', encoding="utf-8")
    with pytest.raises(AlgebraFileError, match="line 2, column 11"):
        load_algebra_file(str(bad))


def test_parse_rep_spec_forms_and_errors():
    rep, verified = parse_rep_spec("qosc:8:1/2")
    assert rep.dim == 8 and verified == 4
    rep, verified = parse_rep_spec("krawtchouk:6:1/4")
    assert rep.dim == 6 and verified is None
    rep, verified = parse_rep_spec("dg_pauli")
    assert rep.dim == 2
    with pytest.raises(ValueError, match="rep spec"):
        parse_rep_spec("qosc")
    with pytest.raises(ValueError, match="unknown rep family"):
        parse_rep_spec("fock:8:1/2")


# ---------------------------------------------------------------------------
# report rendering


def _sample_report():
    r = Report(title="sample")
    r.checks.append(Check("closes", True, residual=1e-16, tol=1e-10))
    r.checks.append(Check("flows, too", False, residual=2.5, tol=1e-10, note="a, note"))
    r.tables.append(Table("values", ("k", "v"), ((0, 1 + 2j), (1, 0.5))))
    r.notes.append("one remark")
    return r


def test_render_text_layout():
    text = _sample_report().render("text")
    assert "[PASS] closes" in text
    assert "[FAIL] flows, too" in text
    assert "2 checks, 1 failed" in text
    assert "note: one remark" in text


def test_render_json_is_loadable():
    doc = json.loads(_sample_report().render("json"))
    assert doc["ok"] is False
    assert doc["checks"][0]["status"] == "pass"
    assert doc["checks"][1]["residual"] == 2.5
    cell = doc["tables"][0]["rows"][0][1]
    assert cell == {"re": 1.0, "im": 2.0}


def test_render_csv_blocks_and_quoting():
    lines = _sample_report().render("csv").splitlines()
    assert lines[0] == "name,status,residual,tolerance,note"
    assert '"a, note"' in lines[2]
    assert "# values" in lines
    k = lines.index("# values")
    assert lines[k + 1] == "k,v"
    assert lines[k + 2] == "0,1.0+2.0j"


# ---------------------------------------------------------------------------
# jacobi and classify commands


def test_jacobi_passes_on_conserving_bracket(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "jacobi", write_doc(tmp_path, "n.json", NAMBU))
    assert code == 0
    assert "0 failed" in out


def test_jacobi_prints_defect_on_failure(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "jacobi", write_doc(tmp_path, "b.json", NON_JACOBI))
    assert code == 1
    assert "[FAIL]" in out
    assert "defect = " in out
    assert "(F, curl F) = " in out


def test_jacobi_two_variables_is_vacuous(tmp_path, capsys):
    doc = {"kind": "poisson", "vars": ["x", "y"], "brackets": {"x,y": "x*y - 1"}}
    code, out, _ = run_cli(capsys, "jacobi", write_doc(tmp_path, "t.json", doc))
    assert code == 0
    assert "vacuous" in out


def test_classify_names_the_canonical_case(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "classify", write_doc(tmp_path, "c.json", CASE_I))
    assert code == 0
    assert "case (i)" in out
    assert "quasi-linearity by Hamiltonian" in out


def test_classify_two_variable_canonical_form(tmp_path, capsys):
    doc = {"kind": "poisson", "vars": ["x", "y"], "brackets": {"x,y": "2*x*y - 1"}}
    code, out, _ = run_cli(capsys, "classify", write_doc(tmp_path, "q.json", doc))
    assert code == 0
    assert "(2,0): canonical q-oscillator bracket" in out
    doc = {"kind": "poisson", "vars": ["x", "y"], "brackets": {"x,y": "x^2 + 1"}}
    code, out, _ = run_cli(capsys, "classify", write_doc(tmp_path, "s.json", doc))
    assert code == 1
    assert "not of the quadratic canonical shape" in out


def test_classify_rejects_broken_jacobi(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "classify", write_doc(tmp_path, "b.json", NON_JACOBI))
    assert code == 1
    assert "unclassified (Jacobi fails)" in out


# ---------------------------------------------------------------------------
# flow command


def test_parse_tgrid_forms():
    assert _parse_tgrid("0.5") == [0.5]
    assert _parse_tgrid("0,0.1,0.2") == [0.0, 0.1, 0.2]
    grid = _parse_tgrid("0:1:11")
    assert len(grid) == 11 and grid[0] == 0.0 and grid[-1] == 1.0
    assert _parse_tgrid("2:9:1") == [2.0]
    with pytest.raises(ValueError):
        _parse_tgrid("0:1")
    with pytest.raises(ValueError):
        _parse_tgrid("0:1:0")


def test_flow_csv_contract_and_oracle_column(capsys):
    code, out, _ = run_cli(
        capsys,
        "flow", "qosc", "--t", "0.1", "--rep", "qosc:40:1/2", "--format", "csv",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# coefficients of the evolved operators")
    assert lines[1] == "t,target,component,value_re,value_im,oracle_dev"
    rows = [ln.split(",") for ln in lines[2:] if ln and not ln.startswith("#")]
    assert [(r[1], r[2]) for r in rows] == [("X", "X"), ("X", "1")]
    # exp(t * F(h)) with F = [[w*h, -1], [0, 0]] at h = 1, w = 1 - q
    assert abs(float(rows[0][3]) - np.exp(0.05)) < 1e-12
    assert all(float(r[5]) < 1e-12 for r in rows)


def test_flow_at_zero_is_the_identity(capsys):
    code, out, _ = run_cli(capsys, "flow", "qosc", "--t", "0", "--format", "csv")
    assert code == 0
    rows = [ln.split(",") for ln in out.splitlines()[2:] if ln]
    assert float(rows[0][3]) == 1.0 and float(rows[1][3]) == 0.0
    assert rows[0][5] == ""


def test_flow_adaction_file_runs(tmp_path, capsys):
    doc = {
        "kind": "adaction",
        "hamiltonian": "Y",
        "params": {"w": "1/2"},
        "basis": ["X", "1"],
        "F": [["w*H", "-1"], ["0", "0"]],
    }
    path = write_doc(tmp_path, "ad.json", doc)
    code, out, _ = run_cli(capsys, "flow", path, "--t", "0.1", "--format", "csv")
    assert code == 0
    rows = [ln.split(",") for ln in out.splitlines()[2:] if ln]
    assert abs(float(rows[0][3]) - np.exp(0.05)) < 1e-14


def test_flow_unknown_hamiltonian_is_a_clean_error(capsys):
    code, out, err = run_cli(capsys, "flow", "qosc", "--hamiltonian", "Q")
    assert code == 2
    assert out == ""
    assert "unknown Hamiltonian name 'Q'" in err


def test_flow_rejects_non_flowable_kind(tmp_path, capsys):
    path = write_doc(tmp_path, "p.json", NAMBU)
    code, _, err = run_cli(capsys, "flow", path)
    assert code == 2
    assert "not a flowable algebra" in err


def test_flow_missing_file_is_a_clean_error(capsys):
    code, _, err = run_cli(capsys, "jacobi", "/nonexistent/alg.json")
    assert code == 2
    assert "error:" in err


def test_flow_writes_figures(tmp_path, capsys):
    outdir = tmp_path / "figs"
    code, out, _ = run_cli(
        capsys,
        "flow", "dg_pauli", "--t", "0:0.5:6", "--plot", str(outdir),
    )
    assert code == 0
    made = sorted(p.name for p in outdir.glob("*.png"))
    assert made == ["flow_A1.png", "flow_A2.png", "flow_A3.png"]
    assert "figure:" in out


# ---------------------------------------------------------------------------
# verify command


def test_verify_all_passes_and_is_deterministic(capsys):
    code1, out1, _ = run_cli(capsys, "verify", "--suite", "all", "--format", "json")
    code2, out2, _ = run_cli(capsys, "verify", "--suite", "all", "--format", "json")
    assert code1 == 0 and code2 == 0
    assert out1 == out2
    doc = json.loads(out1)
    assert doc["ok"] is True
    assert all(c["status"] == "pass" for c in doc["checks"])


def test_verify_threads_do_not_change_the_report(capsys, monkeypatch):
    code, base, _ = run_cli(capsys, "verify", "--suite", "detect", "--format", "json")
    assert code == 0
    monkeypatch.setenv("QUASILIN_THREADS", "4")
    code, threaded, _ = run_cli(capsys, "verify", "--suite", "detect", "--format", "json")
    assert code == 0
    assert threaded == base


def test_verify_seed_changes_draws_not_verdicts(capsys):
    code1, out1, _ = run_cli(capsys, "verify", "--suite", "dg", "--seed", "7")
    code2, out2, _ = run_cli(capsys, "verify", "--suite", "dg", "--seed", "8")
    assert code1 == 0 and code2 == 0
    assert "0 failed" in out1 and "0 failed" in out2


def test_verify_param_injection_reaches_the_suite(capsys):
    code, _, err = run_cli(capsys, "verify", "--suite", "aw", "--param", "q=0")
    assert code == 2
    assert "q must be nonzero" in err
    code, out, _ = run_cli(capsys, "verify", "--suite", "aw", "--param", "q=1/3")
    assert code == 0
    assert "0 failed" in out


def test_verify_rejects_bad_input(capsys):
    code, _, err = run_cli(capsys, "verify", "--suite", "spectra")
    assert code == 2
    assert "unknown suite" in err
    code, _, err = run_cli(capsys, "verify", "--suite", "dg", "--param", "omega")
    assert code == 2
    assert "name=value" in err


# ---------------------------------------------------------------------------
# detect command


def test_detect_krawtchouk_names_the_grid(capsys):
    code, out, _ = run_cli(capsys, "detect", "--rep", "krawtchouk:12:1/3")
    assert code == 0
    assert "verdict positive" in out
    assert "linear (degenerate AW)" in out


def test_detect_weyl_lattice_pair_names_the_q_grid(tmp_path, capsys):
    # H the unit shift, X = diag(q^s): a lattice pair with X H = q H X
    doc = {
        "kind": "difference_op",
        "d": 10,
        "A": "1",
        "B": "0",
        "C": "0",
        "grid": {"kind": "q_quadratic", "c1": 1, "q": "1/2"},
    }
    path = write_doc(tmp_path, "weyl.json", doc)
    code, out, _ = run_cli(capsys, "detect", path)
    assert code == 0
    assert "verdict positive (rank-deficient basis, minimum-norm fit)" in out
    assert "q-quadratic (q = 0.5" in out


def test_detect_hahn_stencil_closure(tmp_path, capsys):
    doc = {
        "kind": "difference_op",
        "d": 10,
        "params": {"N": "9"},
        "A": "(s + 1)*(s - N)",
        "B": "-( (s + 1)*(s - N) + s*(s - N - 1) )",
        "C": "s*(s - N - 1)",
        "grid": {"kind": "linear"},
    }
    path = write_doc(tmp_path, "hahn.json", doc)
    code, out, _ = run_cli(capsys, "detect", path, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert all(c["status"] == "pass" for c in doc["checks"])
    tri = next(t for t in doc["tables"] if t["title"] == "tridiagonal constants")
    values = {row[0]: row[1]["re"] for row in tri["rows"]}
    assert abs(values["beta"] - 2.0) < 1e-10
    assert abs(values["gamma"] - 2.0) < 1e-10
    assert abs(values["alpha1"] - 1.0) < 1e-10
    grid = next(c for c in doc["checks"] if c["name"] == "grid recurrence certified")
    assert "linear (degenerate AW)" in grid["note"]


def test_detect_tridiagonal_constants_table(capsys):
    code, out, _ = run_cli(capsys, "detect", "--rep", "dg_pauli", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    tri = next(t for t in doc["tables"] if t["title"] == "tridiagonal constants")
    values = {row[0]: row[1]["re"] for row in tri["rows"]}
    assert abs(values["beta"] - 2.0) < 1e-10
    assert abs(values["alpha"] - 4.0) < 1e-10
    assert abs(values["alpha1"] - 4.0) < 1e-10
    assert any("rank-deficient" in c["note"] for c in doc["checks"])


def test_detect_negative_on_cubic_stencil(tmp_path, capsys):
    doc = {
        "kind": "difference_op",
        "d": 10,
        "A": "1 + s^3",
        "B": "-2 - 2*s^3",
        "C": "1 + s^3",
        "grid": {"kind": "custom", "points": [str(s**3) for s in range(10)]},
    }
    path = write_doc(tmp_path, "cubic.json", doc)
    code, out, _ = run_cli(capsys, "detect", path)
    assert code == 1
    assert "verdict negative" in out


def test_detect_requires_exactly_one_source(tmp_path, capsys):
    code, _, err = run_cli(capsys, "detect")
    assert code == 2
    assert "exactly one" in err
    path = write_doc(tmp_path, "n.json", NAMBU)
    code, _, err = run_cli(capsys, "detect", path, "--rep", "dg_pauli")
    assert code == 2
    assert "exactly one" in err


def test_detect_writes_figures(tmp_path, capsys):
    outdir = tmp_path / "figs"
    code, out, _ = run_cli(
        capsys, "detect", "--rep", "krawtchouk:12:1/3", "--plot", str(outdir)
    )
    assert code == 0
    made = sorted(p.name for p in outdir.glob("*.png"))
    assert made == ["grid.png", "residuals.png"]


# ---------------------------------------------------------------------------
# the installed entry point


def test_module_invocation_matches_in_process_run(capsys):
    proc = subprocess.run(
        [sys.executable, "-m", "quasilin.cli", "verify", "--suite", "qosc", "--format", "json"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    code, out, _ = run_cli(capsys, "verify", "--suite", "qosc", "--format", "json")
    assert code == 0
    assert proc.stdout == out
