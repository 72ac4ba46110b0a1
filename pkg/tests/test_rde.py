import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
import sympy

from roughbundle.controlled import cp_norm, fit_rate, remainders, rough_integral
from roughbundle.drivers import oscillation_path
from roughbundle.forest import UNIT, Forest, enumerate_trees, parse_forest
from roughbundle.polynomials import Poly
from roughbundle.rde import (
    PolyVectorField, RDEDivergence, check_grafting_identity, elementary_differential, field_along,
    ito_lyons_stability, lift_solution, local_error_fit, rde_step, solve_rde,
)
from roughbundle.roughpath import GridPath, lift_piecewise_linear

F = parse_forest


def _random_poly(rng, n, deg):
    terms = {}
    for e in itertools.product(range(deg + 1), repeat=n):
        if sum(e) <= deg and rng.random() < 0.6:
            terms[e] = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
    return Poly(n, terms)


def _random_field(seed, n, d, deg=3):
    rng = np.random.default_rng(seed)
    return PolyVectorField([[_random_poly(rng, n, deg) for _ in range(n)] for _ in range(d)])


def _to_sympy(p: Poly, ys):
    return sum(sympy.Rational(c.numerator, c.denominator) * sympy.prod([y ** k for y, k in zip(ys, e)])
               for e, c in p.terms.items())


def _sympy_elementary(fields, tree, ys):
    """f_τ by direct sympy differentiation, independent of the package recursion."""
    f = fields[tree.label_index]
    kids = [_sympy_elementary(fields, c, ys) for c in tree.children]
    out = []
    for comp in f:
        acc = 0
        for ks in itertools.product(range(len(ys)), repeat=len(kids)):
            term = sympy.diff(comp, *[ys[k] for k in ks]) if ks else comp
            for k, v in zip(ks, kids):
                term = term * v[k]
            acc += term
        out.append(sympy.expand(acc))
    return out


class _T:
    def __init__(self, tree, alphabet):
        self.label_index = alphabet.index(tree.label)
        self.children = [_T(c, alphabet) for c in tree.children]


def test_unit_and_single_node():
    Fv = _random_field(0, 2, 2)
    y = np.array([0.3, -1.2])
    np.testing.assert_allclose(elementary_differential(Fv, UNIT, y), y)
    for a in Fv.alphabet:
        want = [p(y) for p in Fv.field(a)]
        np.testing.assert_allclose(elementary_differential(Fv, F(f"[{a}]"), y), want)


def test_ladder_for_square_field():
    Fv = PolyVectorField([[Poly(1, {(2,): 1})]])
    assert Fv.elementary(F("[[]]")) == [Poly(1, {(3,): 2})]
    assert elementary_differential(Fv, F("[[]]"), [Fraction(3)])[0] == 54


@pytest.mark.parametrize("n, d, seed", [(1, 1, 0), (2, 1, 1), (2, 2, 2), (3, 1, 3)])
def test_elementary_differentials_against_sympy(n, d, seed):
    Fv = _random_field(seed, n, d)
    ys = sympy.symbols(f"y0:{n}")
    fields = [[_to_sympy(p, ys) for p in f] for f in Fv.fields]
    for tree in enumerate_trees(4 if n < 3 else 3, Fv.alphabet):
        got = [sympy.expand(_to_sympy(p, ys)) for p in Fv.elementary(Forest((tree,)))]
        want = _sympy_elementary(fields, _T(tree, Fv.alphabet), ys)
        assert [sympy.expand(a - b) for a, b in zip(got, want)] == [0] * n, tree


def _grafting_cases(alphabet, total):
    trees = enumerate_trees(total, alphabet)
    for tau in trees:
        room = total - tau.degree
        for m in range(0, room + 1):
            for rhos in itertools.combinations_with_replacement(trees, m):
                if sum(r.degree for r in rhos) <= room:
                    yield Forest((tau,)), [Forest((r,)) for r in rhos]


@pytest.mark.parametrize("n, d, seed", [(1, 1, 10), (2, 1, 11), (2, 2, 12), (1, 2, 13)])
def test_grafting_identity_exact(n, d, seed):
    Fv = _random_field(seed, n, d)
    count = 0
    for tau, rhos in _grafting_cases(Fv.alphabet, 4):
        assert check_grafting_identity(Fv, tau, rhos), (tau, rhos)
        count += 1
    assert count > 0


def test_grafting_identity_small_cases():
    quad = PolyVectorField([[Poly(1, {(2,): 1, (1,): -3, (0,): 2})]])
    assert check_grafting_identity(quad, F("[[]]"), [F("[]")])
    zero = PolyVectorField([[Poly(1)]])
    assert check_grafting_identity(zero, F("[[]]"), [F("[]")])
    assert zero.elementary(F("[[]]")) == [Poly(1)]


def test_grafting_identity_detects_wrong_field_cache():
    Fv = _random_field(5, 1, 1)
    Fv.elementary(F("[[]]"))
    Fv._cache[F("[[]]").trees[0]] = [Poly(1, {(0,): 1})]
    assert not check_grafting_identity(Fv, F("[]"), [F("[]")])


def test_zero_field_keeps_initial_value():
    X = lift_piecewise_linear(oscillation_path(65, 0.3, 6, dim=2), 0.3)
    zero = PolyVectorField([[Poly(2), Poly(2)], [Poly(2), Poly(2)]])
    sol = solve_rde(X, zero, [1.0, -2.0])
    assert np.all(sol.Y == [1.0, -2.0])


def test_one_step_is_cubic_taylor_of_exponential():
    lam, h, y0 = Fraction(3, 2), 0.1, 0.7
    X = lift_piecewise_linear(GridPath([0.0, h], [0.0, h]), 0.3)
    Fv = PolyVectorField.linear(lam)
    got = rde_step(X, Fv, [y0], 0, 1)[0]
    # symbolic oracle: the scheme's increments are Σ_τ f_τ X^τ / Σ(τ)
    hs, ys = sympy.symbols("h y")
    lam_s = sympy.Rational(lam.numerator, lam.denominator)
    taylor = sum((lam_s * hs) ** k / sympy.factorial(k) for k in range(4)) * ys
    assert got == pytest.approx(float(taylor.subs({hs: h, ys: y0})), rel=1e-14)


def test_exponential_oracle():
    t = np.linspace(0, 1, 1001)
    x = np.sin(3 * t) + t / 2
    X = lift_piecewise_linear(GridPath(t, x), 0.3)
    sol = solve_rde(X, PolyVectorField.linear(1), [2.0])
    assert abs(sol.Y[-1, 0] - 2.0 * np.exp(x[-1] - x[0])) <= 1e-6


def test_divergence_guard():
    t = np.linspace(0, 1, 201)
    X = lift_piecewise_linear(GridPath(t, 5 * t), 0.3)
    blowup = PolyVectorField([[Poly(1, {(2,): 1})]])
    with pytest.raises(RDEDivergence, match="radius"):
        solve_rde(X, blowup, [1.0])


def test_alphabet_mismatch():
    X = lift_piecewise_linear(oscillation_path(17, 0.3, 4, dim=2), 0.3)
    with pytest.raises(ValueError):
        solve_rde(X, PolyVectorField.linear(1), [1.0])


@pytest.mark.parametrize("alpha", [0.4, 0.3, 0.22])
def test_one_step_order(alpha):
    Fv = _random_field(21, 2, 2, deg=2)
    N = {0.4: 2, 0.3: 3, 0.22: 4}[alpha]
    fit = local_error_fit(Fv, [0.3, -0.2], [1.0, -0.5], np.geomspace(0.01, 0.1, 6), alpha)
    assert fit.slope >= N + 1 - 0.15


def test_lifted_solution_components():
    X = lift_piecewise_linear(oscillation_path(129, 0.3, 7), 0.3)
    Fv = PolyVectorField([[Poly(1, {(1,): Fraction(1, 2), (0,): 1})]])
    sol = solve_rde(X, Fv, [0.5])
    Z = sol.lifted[0]
    np.testing.assert_array_equal(Z.component(UNIT), sol.Y[:, 0])
    # [[]] has Σ = 1; [][] is not a tree and carries nothing
    np.testing.assert_allclose(Z.component(F("[[]]")), 0.5 * (0.5 * sol.Y[:, 0] + 1), atol=1e-14)
    assert np.all(Z.component(F("[][]")) == 0)
    assert lift_solution(X, Fv, sol.Y)[0].values.shape == Z.values.shape


def test_lifted_solution_is_controlled():
    X = lift_piecewise_linear(oscillation_path(1025, 0.3, 9), 0.3)
    Fv = PolyVectorField([[Poly(1, {(2,): Fraction(-1, 2), (0,): 1})]])
    Z = solve_rde(X, Fv, [0.2]).lifted[0]
    assert np.isfinite(cp_norm(Z))
    lags = np.array([4, 8, 16, 32])
    sup = []
    for lag in lags:
        i = np.arange(0, 1025 - lag)
        sup.append(np.abs(remainders(Z, i, i + lag)[:, 0]).max())
    fit = fit_rate(lags / 1024, sup)
    assert fit.slope >= X.N * X.alpha - 0.15


def test_fixed_point_consistency():
    # Y_t - Y_0 against ∫ f(𝐘) dX, both on the same grid; the gap shrinks as the grid is refined
    gaps = []
    for n in (257, 1025):
        X = lift_piecewise_linear(oscillation_path(n, 0.3, 7), 0.3)
        Fv = PolyVectorField([[Poly(1, {(2,): Fraction(-1, 2), (1,): Fraction(1, 3), (0,): 1})]])
        sol = solve_rde(X, Fv, [0.2])
        I = rough_integral(field_along(Fv, sol, Fv.alphabet[0])[0]).values[:, 0]
        gaps.append(np.abs(sol.Y[:, 0] - sol.Y[0, 0] - I).max())
    assert gaps[1] < gaps[0] and gaps[1] < 1e-4


def test_ito_lyons_ratio_stable():
    base = oscillation_path(257, 0.3, 8, dim=2)
    X = lift_piecewise_linear(base, 0.3)
    # affine fields: globally Lipschitz, so the solution stays bounded on a rough driver
    q = Fraction
    Fv = PolyVectorField([
        [Poly(2, {(0, 1): q(1, 2), (0, 0): 1}), Poly(2, {(1, 0): q(-1, 2)})],
        [Poly(2, {(1, 0): q(1, 3)}), Poly(2, {(0, 0): 1, (0, 1): q(-1, 4)})],
    ])
    xi = np.array([0.1, -0.1])
    assert ito_lyons_stability(xi, X, xi, X, Fv)["distance"] == 0
    init, drive = [], []
    bump = np.stack([np.sin(5 * base.times), np.cos(3 * base.times)], axis=1)
    for eps in (1e-1, 1e-2, 1e-3, 1e-4):
        init.append(ito_lyons_stability(xi, X, xi + eps, X, Fv)["ratio"])
        Xe = lift_piecewise_linear(GridPath(base.times, base.values + eps * bump), 0.3)
        drive.append(ito_lyons_stability(xi, X, xi, Xe, Fv)["ratio"])
    for r in (np.array(init), np.array(drive)):
        assert np.all(np.isfinite(r)) and r.max() / r.min() < 10


def test_field_json_round_trip():
    Fv = _random_field(41, 2, 2)
    back = PolyVectorField.from_json(json.loads(json.dumps(Fv.to_json())))
    assert back.alphabet == Fv.alphabet
    assert all(a == b for fa, fb in zip(Fv.fields, back.fields) for a, b in zip(fa, fb))
