import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest

from roughbundle.approximation import SmoothControlData
from roughbundle.cli import main
from roughbundle.controlled import ControlledPath, compose, tautological
from roughbundle.drivers import oscillation_path
from roughbundle.io import (
    control_from_json, control_to_json, controlled_from_json, controlled_to_json, field_to_json,
    gridpath_to_json, roughpath_from_json, roughpath_to_json,
)
from roughbundle.polynomials import Poly
from roughbundle.rde import PolyVectorField
from roughbundle.roughpath import GridPath, lift_piecewise_linear


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out.strip(), err.strip()


@pytest.mark.parametrize("argv, want", [
    (["algebra", "star", "[]", "[]", "--basis", "zeta"], "z([][]) + z([[]])"),
    (["algebra", "pi1", "[][]"], "[][] - 2*[[]]"),
    (["algebra", "primitives", "--N", "4", "--golden"], "OK: 5 basis vectors match"),
    (["algebra", "star", "--golden"], "OK: 9 products match"),
])
def test_algebra_examples(capsys, argv, want):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out.splitlines()[-1] == want


def test_ptop_golden_reports_corrected_typos(capsys):
    code, out, _ = run(capsys, "algebra", "ptop", "--golden")
    lines = out.splitlines()
    assert code == 0
    assert sum(line.startswith("NOTE") for line in lines) == 3
    assert lines[-1] == "OK: 11 natural-growth elements match"


def test_algebra_misc_ops(capsys):
    assert run(capsys, "algebra", "symmetry", "[[][]]")[1] == "2"
    code, out, _ = run(capsys, "algebra", "enumerate", "--N", "3")
    assert code == 0 and out.splitlines()[0] == "degree,forest,symmetry_factor"
    assert len(out.splitlines()) == 1 + 1 + 1 + 2 + 4
    assert run(capsys, "algebra", "coproduct", "[[]]")[1] == "1⊗[[]] + []⊗[] + [[]]⊗1"
    assert run(capsys, "algebra", "antipode", "[[]]")[1] == "[][] - [[]]"


def test_parse_error_shows_position(capsys):
    code, _, err = run(capsys, "algebra", "coproduct", "[[]")
    assert code == 2
    assert "^" in err and "error" in err


def test_wrong_operand_count(capsys):
    code, _, err = run(capsys, "algebra", "star", "[]")
    assert code == 2 and "operands" in err


@pytest.fixture
def files(tmp_path):
    P = oscillation_path(257, 0.3, 8)
    path = tmp_path / "path.json"
    gridpath_to_json(P, path)
    return tmp_path, path


def test_lift_writes_roughpath_and_report(capsys, files):
    tmp, path = files
    out = tmp / "rp.json"
    code, _, err = run(capsys, "lift", str(path), "--alpha", "0.3", "--out", str(out))
    assert code == 0
    rep = json.loads(err)
    assert rep["N"] == 3 and rep["chen_defect"] <= 1e-10 and rep["multiplicativity_defect"] <= 1e-10
    X = roughpath_from_json(out)
    assert X.N == 3 and len(X.times) == 257


def test_lift_linear_closed_form(capsys, tmp_path):
    t = np.linspace(0, 1, 11)
    gridpath_to_json(GridPath(t, 1.5 * t), tmp_path / "p.json")
    code, out, _ = run(capsys, "lift", str(tmp_path / "p.json"), "--alpha", "0.4")
    X = roughpath_from_json(json.loads(out))
    assert code == 0 and X.N == 2
    np.testing.assert_allclose(X.values[:, X.tables.index[X.forests[-1]]], 2.25 * t ** 2 / 2, atol=1e-13)


def test_lift_rejects_reciprocal_integer_alpha(capsys, files):
    _, path = files
    code, _, err = run(capsys, "lift", str(path), "--alpha", "0.5")
    assert code == 2 and "alpha must avoid 1/n" in err
    code, _, err = run(capsys, "lift", str(path))
    assert code == 2 and "--alpha" in err


def _lifted(capsys, files):
    tmp, path = files
    rp = tmp / "rp.json"
    assert run(capsys, "lift", str(path), "--alpha", "0.3", "--out", str(rp))[0] == 0
    return rp


def test_approx_tautological(capsys, files):
    rp = _lifted(capsys, files)
    code, out, _ = run(capsys, "approx", str(rp), "--tautological", "--beta", "0.15", "--mesh-levels", "2-6")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["level", "theta", "error_beta"] and len(rows) == 1 + 5 + 1
    assert "passed=True" in out.splitlines()[-1]


def test_approx_with_controlled_input(capsys, files):
    tmp, _ = files
    rp = _lifted(capsys, files)
    X = roughpath_from_json(rp)
    Z = compose(Poly(1, {(4,): Fraction(1, 4), (3,): Fraction(1, 3), (1,): -1}),
                [tautological(X, start=float(X.values[0, 1]))])
    controlled_to_json(Z, tmp / "z.json")
    code, out, _ = run(capsys, "approx", str(rp), str(tmp / "z.json"), "--mesh-levels", "2,3,4,5,6", "--jobs", "2")
    assert code == 0 and "passed=True" in out


def test_approx_usage_errors(capsys, files):
    rp = _lifted(capsys, files)
    code, _, err = run(capsys, "approx", str(rp), "--beta", "0.3")
    assert code == 2 and "beta" in err
    code, _, err = run(capsys, "approx", str(rp), "--mesh-levels", "3")
    assert code == 2 and "insufficient scales for fit" in err


def _field(tmp, F):
    field_to_json(F, tmp / "f.json")
    return tmp / "f.json"


def test_rde_exponential(capsys, tmp_path):
    t = np.linspace(0, 1, 1001)
    x = np.sin(3 * t) + t / 2
    roughpath_to_json(lift_piecewise_linear(GridPath(t, x), 0.3), tmp_path / "rp.json")
    f = _field(tmp_path, PolyVectorField.linear(1))
    code, out, _ = run(capsys, "rde", str(tmp_path / "rp.json"), str(f), "--xi", "1.0")
    assert code == 0
    last = out.splitlines()[-1].split(",")
    assert abs(float(last[1]) - np.exp(x[-1] - x[0])) <= 1e-6


def test_rde_zero_field_lifted_and_stability(capsys, files):
    tmp, _ = files
    rp = _lifted(capsys, files)
    zero = _field(tmp, PolyVectorField([[Poly(1)]]))
    code, out, _ = run(capsys, "rde", str(rp), str(zero), "--xi", "0.5", "--lifted")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][:3] == ["t", "Y0", "Y0:[]"]
    assert {r[1] for r in rows[1:]} == {"0.5"}
    lin = _field(tmp, PolyVectorField.linear(0.5))
    code, _, err = run(capsys, "rde", str(rp), str(lin), "--xi", "0.5", "--stability", "--seed", "3")
    ratios = [float(line.split(",")[1]) for line in err.splitlines()[1:]]
    assert code == 0 and len(ratios) == 4 and max(ratios) / min(ratios) < 10


def test_rde_errors(capsys, files):
    tmp, _ = files
    rp = _lifted(capsys, files)
    code, _, err = run(capsys, "rde", str(rp), str(_field(tmp, PolyVectorField.linear(1))), "--xi", "1,2")
    assert code == 2 and "--xi" in err
    t = np.linspace(0, 1, 201)
    roughpath_to_json(lift_piecewise_linear(GridPath(t, 5 * t), 0.3), tmp / "fast.json")
    square = _field(tmp, PolyVectorField([[Poly(1, {(2,): 1})]]))
    code, _, err = run(capsys, "rde", str(tmp / "fast.json"), str(square), "--xi", "1")
    assert code == 1 and "divergence guard" in err


def test_metric_report_with_tube(capsys, tmp_path):
    t = np.linspace(0, 1, 17)
    X1 = lift_piecewise_linear(GridPath(t, np.sin(3 * t)), 0.3)
    X2 = lift_piecewise_linear(GridPath(t, np.sin(3 * t) + 1e-3 * t), 0.3)
    roughpath_to_json(X1, tmp_path / "rp1.json")
    roughpath_to_json(X2, tmp_path / "rp2.json")
    controlled_to_json(tautological(X1), tmp_path / "z1.json")
    controlled_to_json(tautological(X2), tmp_path / "z2.json")
    f = SmoothControlData.zeros_like(X1)
    tube = {"control": json.loads(control_to_json(f)), "center": json.loads(roughpath_to_json(X1)),
            "radius": 0.5, "epsilon": 0.5}
    (tmp_path / "tube.json").write_text(json.dumps(tube))
    argv = [str(tmp_path / n) for n in ("rp1.json", "z1.json", "rp2.json", "z2.json")]
    code, out, _ = run(capsys, "metric", *argv, "--tube", str(tmp_path / "tube.json"))
    rep = json.loads(out)
    assert code == 0 and rep["flat_distance"] > 0 and 0 <= rep["tube_distance"] <= 0.5
    code, out, _ = run(capsys, "metric", argv[0], argv[1], argv[0], argv[1])
    assert json.loads(out) == {"flat_distance": 0.0}


def test_json_round_trips(tmp_path):
    X = lift_piecewise_linear(oscillation_path(33, 0.3, 5, dim=2), 0.3)
    Y = roughpath_from_json(json.loads(roughpath_to_json(X)))
    np.testing.assert_array_equal(Y.values, X.values)
    assert (Y.alpha, Y.alphabet, Y.N) == (X.alpha, X.alphabet, X.N)
    Z = ControlledPath.zeros(X)
    Z.values[:] = np.random.default_rng(0).normal(size=Z.values.shape)
    np.testing.assert_array_equal(controlled_from_json(json.loads(controlled_to_json(Z)), X).values, Z.values)
    f = SmoothControlData.zeros_like(X)
    g = control_from_json(json.loads(control_to_json(f)))
    assert g.epsilon == f.epsilon and g.values.shape == f.values.shape
