"""Rough differential equations with polynomial vector fields.

dY = Σ_a f_a(Y) dX^a is solved on the grid of the driver with the
branched Euler scheme

    Y_t − Y_s ≈ Σ_τ f_τ(Y_s) X^τ_{s,t} / Σ(τ),

τ running over trees of degree <= N, where f_τ are the elementary
differentials: f_{[τ1...τm]_a} = D^m f_a : (f_τ1, ..., f_τm).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .algebra import grafting, symmetry_factor
from .controlled import ControlledPath, cp_distance, fit_rate
from .forest import UNIT, Forest, Tree, as_forest, enumerate_trees
from .polynomials import Poly, directional, identity_vector
from .roughpath import BranchedRoughPath, rp_distance


class RDEDivergence(RuntimeError):
    pass


DIVERGENCE_BOUND = 1e9


class PolyVectorField:
    """d polynomial vector fields on R^n; field k drives the k-th label of the alphabet."""

    def __init__(self, fields: list, alphabet=None):
        self.fields = [list(f) for f in fields]
        self.n = len(self.fields[0])
        for f in self.fields:
            if len(f) != self.n or any(p.nvars != self.n for p in f):
                raise ValueError("every field must have n polynomial components in n variables")
        from .forest import default_alphabet
        self.alphabet = tuple(alphabet) if alphabet is not None else default_alphabet(len(self.fields))
        if len(self.alphabet) != len(self.fields):
            raise ValueError("one label per field")
        self._cache = {}

    @property
    def d(self) -> int:
        return len(self.fields)

    def field(self, label) -> list:
        return self.fields[self.alphabet.index(label)]

    def elementary(self, tau) -> list:
        """f_τ as a vector of polynomials; the unit gives the identity."""
        if isinstance(tau, Forest):
            if tau.is_unit:
                return identity_vector(self.n)
            if not tau.is_tree:
                raise ValueError("elementary differentials are indexed by trees")
            tau = tau.trees[0]
        hit = self._cache.get(tau)
        if hit is None:
            kids = [self.elementary(c) for c in tau.children]
            hit = [directional(p, kids) for p in self.field(tau.label)]
            self._cache[tau] = hit
        return hit

    def to_json(self) -> dict:
        return {"n": self.n, "alphabet": list(self.alphabet),
                "fields": [[p.to_json() for p in f] for f in self.fields]}

    @classmethod
    def from_json(cls, data: dict) -> "PolyVectorField":
        n = int(data["n"])
        fields = [[Poly.from_json(n, comp) for comp in f] for f in data["fields"]]
        return cls(fields, data.get("alphabet"))

    @classmethod
    def linear(cls, lam=1, n: int = 1) -> "PolyVectorField":
        """f(y) = λ y in one noise."""
        return cls([[Poly.variable(n, k) * Fraction(lam) for k in range(n)]])


def elementary_differential(F: PolyVectorField, tau, y) -> np.ndarray:
    return np.array([p(y) for p in F.elementary(tau)])


def check_grafting_identity(F: PolyVectorField, tau, rhos) -> bool:
    """D^n f_τ : (f_ρ1, ..., f_ρn) == Σ c f_σ over σ in τ ↶ ρ1⋯ρn, as exact polynomials."""
    tau = as_forest(tau)
    rho_trees = [as_forest(r).trees[0] for r in rhos]
    lhs = [directional(p, [F.elementary(r) for r in rho_trees]) for p in F.elementary(tau)]
    rhs = [Poly(F.n) for _ in range(F.n)]
    for sigma, c in grafting(tau, Forest(rho_trees)).terms.items():
        for k, p in enumerate(F.elementary(sigma)):
            rhs[k] = rhs[k] + p * c
    return all(a == b for a, b in zip(lhs, rhs))


@lru_cache(maxsize=None)
def _tree_columns(alphabet: tuple, N: int):
    from .roughpath import algebra_tables
    xt = algebra_tables(alphabet, N)
    trees = enumerate_trees(N, alphabet)
    cols = np.array([xt.index[Forest((t,))] for t in trees])
    sig = np.array([float(symmetry_factor(t)) for t in trees])
    return trees, cols, sig


class _Evaluator:
    def __init__(self, F: PolyVectorField, X: BranchedRoughPath):
        if F.alphabet != X.alphabet:
            raise ValueError("vector field labels must match the driver alphabet")
        self.trees, self.cols, self.sig = _tree_columns(X.alphabet, X.N)
        self.polys = [F.elementary(t) for t in self.trees]

    def values(self, y: np.ndarray) -> np.ndarray:
        """Matrix (n_trees, n) of f_τ(y)."""
        return np.array([[p(y) for p in vec] for vec in self.polys])

    def step(self, y: np.ndarray, xinc: np.ndarray) -> np.ndarray:
        w = xinc[self.cols] / self.sig
        return y + w @ self.values(y)


def rde_step(X: BranchedRoughPath, F: PolyVectorField, y, s: int, t: int) -> np.ndarray:
    """One step of the scheme from grid index s to grid index t."""
    ev = _Evaluator(F, X)
    return ev.step(np.asarray(y, float), X.pair_increments(s, t))


@dataclass
class RDESolution:
    Y: np.ndarray
    lifted: list

    @property
    def times(self):
        return self.lifted[0].times


def lift_solution(X: BranchedRoughPath, F: PolyVectorField, Y: np.ndarray) -> list:
    """One controlled path per coordinate: ⟨τ, 𝐘⟩ = f_τ(Y)/Σ(τ) on trees, 0 on other forests."""
    out = [ControlledPath.zeros(X) for _ in range(F.n)]
    for Zk, k in zip(out, range(F.n)):
        Zk.values[:, 0] = Y[:, k]
    for hi, h in enumerate(out[0].forests):
        if h.is_tree:
            vec = F.elementary(h)
            s = symmetry_factor(h)
            for k in range(F.n):
                out[k].values[:, hi] = vec[k](Y) / s
    return out


def solve_rde(X: BranchedRoughPath, F: PolyVectorField, xi, bound: float = DIVERGENCE_BOUND) -> RDESolution:
    ev = _Evaluator(F, X)
    xinc = X.consecutive_increments()
    Y = np.empty((len(X.times), F.n))
    Y[0] = np.asarray(xi, float)
    for k in range(len(xinc)):
        Y[k + 1] = ev.step(Y[k], xinc[k])
        if not np.all(np.isfinite(Y[k + 1])) or np.abs(Y[k + 1]).max() > bound:
            raise RDEDivergence(f"solution left the ball of radius {bound:g} at t={X.times[k + 1]:g}")
    return RDESolution(Y, lift_solution(X, F, Y))


def field_along(F: PolyVectorField, sol: RDESolution, label) -> list:
    """f_a(𝐘) as controlled paths, one per coordinate, by polynomial composition."""
    from .controlled import compose
    return [compose(p, sol.lifted) for p in F.field(label)]


def ito_lyons_stability(xi, X: BranchedRoughPath, xi2, X2: BranchedRoughPath, F: PolyVectorField) -> dict:
    """⦀Y; Ỹ⦀ / (|ξ − ξ̃| + ρ_α(X, X̃)) for the two lifted solutions."""
    a = solve_rde(X, F, xi)
    b = solve_rde(X2, F, xi2)
    num = sum(cp_distance(p, q) for p, q in zip(a.lifted, b.lifted))
    den = float(np.abs(np.asarray(xi, float) - np.asarray(xi2, float)).sum()) + rp_distance(X, X2).distance
    return {"distance": num, "input_distance": den, "ratio": num / den if den > 0 else float("nan")}


def local_error_fit(F: PolyVectorField, xi, velocity, steps, alpha: float = 0.3):
    """Local error of one step along a straight driver against a tight ODE solve."""
    from scipy.integrate import solve_ivp
    from .roughpath import GridPath, lift_piecewise_linear

    velocity = np.asarray(velocity, float)
    xi = np.asarray(xi, float)

    def rhs(_, y):
        out = np.zeros_like(y)
        for a, f in enumerate(F.fields):
            out = out + velocity[a] * np.array([p(y) for p in f])
        return out

    errs = []
    for h in steps:
        X = lift_piecewise_linear(GridPath([0.0, h], np.stack([np.zeros_like(velocity), velocity * h])),
                                  alpha, F.alphabet)
        y1 = rde_step(X, F, xi, 0, 1)
        ref = solve_ivp(rhs, (0, h), xi, rtol=1e-13, atol=1e-15, method="DOP853").y[:, -1]
        errs.append(float(np.abs(y1 - ref).max()))
    return fit_rate(steps, errs, floor=1e-15)
