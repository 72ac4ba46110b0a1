"""Controlled paths over a branched rough path, remainders, and rough integration."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.stats import linregress

from .forest import UNIT, Forest, Tree, as_forest, enumerate_forests
from .algebra import coproduct_terms
from .polynomials import Poly, partial
from .roughpath import BranchedRoughPath, algebra_tables, auto_block, holder_sup


class GridMismatch(ValueError):
    pass


class ControlTables:
    """Exact ⋆-coefficients needed by remainders, as dense float tensors.

    ``weights[h, u, g]`` is the multiplicity of u⊗h in Δg, so that
    Σ_g weights[h, u, g] Z^g = ⟨u⋆h, Z⟩ in the delta basis.
    """

    def __init__(self, alphabet: tuple, N: int):
        self.alphabet = alphabet
        self.N = N
        self.xt = algebra_tables(alphabet, N)
        self.forests = enumerate_forests(N - 1, alphabet)
        self.index = {h: i for i, h in enumerate(self.forests)}
        self.degrees = np.array([h.degree for h in self.forests])
        C, F = len(self.forests), len(self.xt.forests)
        W = np.zeros((C, F, C))
        for gi, g in enumerate(self.forests):
            for (u, v), c in coproduct_terms(g):
                if u.is_unit:
                    continue
                W[self.index[v], self.xt.index[u], gi] += c
        self.weights = W
        # only the X-columns that actually occur
        self.used = np.nonzero(W.any(axis=(0, 2)))[0]

    def star_weights(self, u, h) -> dict:
        u, h = as_forest(u), as_forest(h)
        col = self.weights[self.index[h], self.xt.index[u]]
        return {self.forests[g]: int(c) for g, c in enumerate(col) if c}


@lru_cache(maxsize=None)
def control_tables(alphabet: tuple, N: int) -> ControlTables:
    return ControlTables(alphabet, N)


def grid_index(times: np.ndarray, s) -> int:
    if isinstance(s, (int, np.integer)):
        return int(s)
    hit = np.nonzero(np.isclose(times, s, rtol=0, atol=1e-12))[0]
    if len(hit) == 0:
        raise ValueError(f"time {s} is not a grid point")
    return int(hit[0])


@dataclass
class ControlledPath:
    """Z^h on the grid of ``reference`` for every forest h of degree <= N-1."""

    reference: BranchedRoughPath
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        want = (len(self.reference.times), len(self.tables.forests))
        if self.values.shape != want:
            raise ValueError(f"values must have shape {want}, got {self.values.shape}")

    @property
    def tables(self) -> ControlTables:
        return control_tables(self.reference.alphabet, self.reference.N)

    @property
    def forests(self) -> tuple:
        return self.tables.forests

    @property
    def times(self) -> np.ndarray:
        return self.reference.times

    @property
    def N(self) -> int:
        return self.reference.N

    @classmethod
    def zeros(cls, X: BranchedRoughPath) -> "ControlledPath":
        return cls(X, np.zeros((len(X.times), len(control_tables(X.alphabet, X.N).forests))))

    @classmethod
    def from_components(cls, X: BranchedRoughPath, components: dict) -> "ControlledPath":
        Z = cls.zeros(X)
        for h, col in components.items():
            Z.values[:, Z.tables.index[as_forest(h)]] = col
        return Z

    def component(self, h) -> np.ndarray:
        return self.values[:, self.tables.index[as_forest(h)]]

    def _same_fiber(self, other):
        if other.reference is not self.reference and not (
                np.array_equal(other.reference.values, self.reference.values)
                and np.array_equal(other.times, self.times)):
            raise GridMismatch("controlled paths live over different rough paths")

    def __add__(self, other):
        self._same_fiber(other)
        return ControlledPath(self.reference, self.values + other.values)

    def __sub__(self, other):
        self._same_fiber(other)
        return ControlledPath(self.reference, self.values - other.values)

    def __mul__(self, lam: float):
        return ControlledPath(self.reference, self.values * lam)

    __rmul__ = __mul__

    def window(self, start: int, stop: int) -> "ControlledPath":
        return ControlledPath(self.reference.window(start, stop), self.values[start:stop + 1])

    def expansion_coefficients(self) -> np.ndarray:
        """A[s, h, u] = ⟨u⋆h, Z_s⟩ for every grid point s."""
        return np.einsum("hug,sg->shu", self.tables.weights, self.values)


def _remainder_block(Z: ControlledPath):
    X = Z.reference
    inv = X.inverse_values()
    A = Z.expansion_coefficients()
    used = Z.tables.used
    def fn(rows, cols):
        xinc = X.tables.star(inv[rows][:, None, :], X.values[cols][None, :, :])
        pred = np.einsum("shu,stu->sth", A[rows][:, :, used], xinc[..., used])
        return Z.values[cols][None, :, :] - Z.values[rows][:, None, :] - pred
    return fn


def remainder(Z: ControlledPath, h, s, t) -> float:
    """R^h_{s,t} = δZ^h_{s,t} − Σ_u ⟨u⋆h, Z_s⟩ X^u_{s,t}; s and t are grid indices or grid times."""
    i, j = grid_index(Z.times, s), grid_index(Z.times, t)
    row = _remainder_block(Z)(np.array([i]), np.array([j]))[0, 0]
    return float(row[Z.tables.index[as_forest(h)]])


def remainders(Z: ControlledPath, i, j) -> np.ndarray:
    """All remainder components for index arrays i, j of equal length, shape (len, C)."""
    i, j = np.asarray(i), np.asarray(j)
    X = Z.reference
    inv = X.inverse_values()
    A = Z.expansion_coefficients()
    xinc = X.tables.star(inv[i], X.values[j])
    pred = np.einsum("khu,ku->kh", A[i], xinc)
    return Z.values[j] - Z.values[i] - pred


def _exponents(Z: ControlledPath, gamma: float) -> np.ndarray:
    return (Z.N - Z.tables.degrees) * gamma


def remainder_norms(Z: ControlledPath, gamma: float | None = None, **kw) -> np.ndarray:
    gamma = Z.reference.alpha if gamma is None else gamma
    kw.setdefault("width", Z.reference.tables.n_terms)
    return holder_sup(Z.times, _remainder_block(Z), _exponents(Z, gamma), **kw)


def cp_norm(Z: ControlledPath, gamma: float | None = None, **kw) -> float:
    """Σ_h |Z^h_0| + ‖R^h‖_{(N−|h|)γ}, summed in canonical forest order."""
    sup = remainder_norms(Z, gamma, **kw)
    return float(sum(abs(Z.values[0, k]) + sup[k] for k in range(len(sup))))


def cp_distance(Z: ControlledPath, W: ControlledPath, gamma: float | None = None, **kw) -> float:
    """Σ_h |Z^h_0 − W^h_0| + ‖R^h(Z) − R^h(W)‖; the two paths may sit over different drivers."""
    if len(Z.times) != len(W.times) or not np.allclose(Z.times, W.times, rtol=0, atol=1e-14):
        raise GridMismatch("cross-fiber distance needs a shared grid")
    if Z.N != W.N or Z.reference.alphabet != W.reference.alphabet:
        raise GridMismatch("controlled paths have different component sets")
    gamma = Z.reference.alpha if gamma is None else gamma
    fz, fw = _remainder_block(Z), _remainder_block(W)
    kw.setdefault("width", 2 * Z.reference.tables.n_terms)
    sup = holder_sup(Z.times, lambda r, c: fz(r, c) - fw(r, c), _exponents(Z, gamma), **kw)
    init = np.abs(Z.values[0] - W.values[0])
    return float(sum(init[k] + sup[k] for k in range(len(sup))))


def tautological(X: BranchedRoughPath, label=None, start: float = 0.0) -> ControlledPath:
    """The driver coordinate itself: Z^1 = start + X^{[a]}_{0,t}, Z^{[a]} = 1."""
    label = X.alphabet[0] if label is None else label
    node = Forest((Tree(label),))
    comps = {UNIT: start + X.column(node)}
    if X.N >= 2:
        comps[node] = np.ones(len(X.times))
    return ControlledPath.from_components(X, comps)


# ------------------------------------------------------------ integration

def _integrand_columns(Z: ControlledPath, label) -> np.ndarray:
    X = Z.reference
    return np.array([X.tables.index[Forest((Tree(label, h.trees),))] for h in Z.forests])


def rough_integral(Z: ControlledPath, label=None) -> ControlledPath:
    """∫ Z dX^a as a controlled path, using the compensated sum on the full grid."""
    X = Z.reference
    label = X.alphabet[0] if label is None else label
    if label not in X.alphabet:
        raise ValueError(f"unknown label {label!r}")
    cols = _integrand_columns(Z, label)
    inc = X.consecutive_increments()[:, cols]
    germs = np.einsum("kh,kh->k", Z.values[:-1], inc)
    out = ControlledPath.zeros(X)
    out.values[1:, 0] = np.cumsum(germs)
    for k, h in enumerate(Z.forests):
        if h.degree <= Z.N - 2:
            target = Forest((Tree(label, h.trees),))
            out.values[:, out.tables.index[target]] = Z.values[:, k]
    return out


@dataclass
class RateFit:
    slope: float
    lengths: np.ndarray
    defects: np.ndarray
    exact: bool = False

    def passes(self, threshold: float) -> bool:
        return self.exact or self.slope >= threshold


def fit_rate(lengths, errors, floor: float = 1e-13) -> RateFit:
    lengths = np.asarray(lengths, float)
    errors = np.asarray(errors, float)
    if len(lengths) < 2:
        raise ValueError("insufficient scales for fit")
    scale = max(1.0, float(np.max(np.abs(errors))))
    if np.all(errors <= floor * scale):
        return RateFit(float("inf"), lengths, errors, exact=True)
    good = errors > 0
    if good.sum() < 2:
        return RateFit(float("inf"), lengths, errors, exact=True)
    res = linregress(np.log(lengths[good]), np.log(errors[good]))
    return RateFit(float(res.slope), lengths, errors)


def integral_germ_defects(Z: ControlledPath, label, steps) -> tuple:
    """Largest |∫_s^t Z dX^a − Σ_h Z^h_s X^{[h]_a}_{s,t}| over windows of each length in ``steps``."""
    X = Z.reference
    label = X.alphabet[0] if label is None else label
    I = rough_integral(Z, label).values[:, 0]
    cols = _integrand_columns(Z, label)
    n = len(X.times)
    lengths, defects = [], []
    for L in steps:
        L = int(L)
        if L < 1 or L >= n:
            raise ValueError(f"scale {L} does not fit the grid")
        i = np.arange(0, n - L)
        j = i + L
        inc = X.pair_increments(i, j)[:, cols]
        germ = np.einsum("kh,kh->k", Z.values[i], inc)
        defects.append(float(np.abs(I[j] - I[i] - germ).max()))
        lengths.append(float(np.mean(X.times[j] - X.times[i])))
    return np.array(lengths), np.array(defects)


def integral_remainder_rate(Z: ControlledPath, label=None, scales=(4, 8, 16, 32)) -> RateFit:
    """Fitted exponent of the germ defect against the window length (scales in grid steps)."""
    lengths, defects = integral_germ_defects(Z, label, scales)
    return fit_rate(lengths, defects)


def integral_bound_check(Z: ControlledPath, label=None, other: ControlledPath | None = None) -> dict:
    """Ratios of the integration bounds; only their stability is meaningful."""
    from .roughpath import holder_norm, rp_distance

    X = Z.reference
    T = X.times[-1] - X.times[0]
    I = rough_integral(Z, label)
    zn = cp_norm(Z)
    denom = (1 + T ** X.alpha) * (1 + holder_norm(X)) * zn
    report = {"integral_norm": cp_norm(I), "integrand_norm": zn}
    report["bounded_ratio"] = report["integral_norm"] / denom if denom > 0 else float("nan")
    report["status"] = "ok" if denom > 0 else "degenerate"
    if other is not None:
        J = rough_integral(other, label)
        num = cp_distance(I, J)
        den = cp_distance(Z, other) + rp_distance(X, other.reference).distance
        report["continuity_ratio"] = num / den if den > 0 else float("nan")
    return report


# ------------------------------------------------------------- composition

def ordered_factorizations(h: Forest, k: int) -> list:
    """Distinct ordered tuples (f_1, ..., f_k) of nonempty forests with f_1⋯f_k = h."""
    if k == 0:
        return [()] if h.is_unit else []
    counts = Counter(h.trees)
    keys = list(counts)
    out = []
    for picks in itertools.product(*(range(counts[t] + 1) for t in keys)):
        if sum(picks) == 0:
            continue
        first = Forest(t for t, m in zip(keys, picks) for _ in range(m))
        rest = Forest(t for t, m in zip(keys, picks) for _ in range(counts[t] - m))
        if k == 1 and not rest.is_unit:
            continue
        for tail in ordered_factorizations(rest, k - 1):
            out.append((first,) + tail)
    return out


def compose(phi: Poly, paths: list) -> ControlledPath:
    """φ(Z) for a polynomial φ: R^n → R and n controlled paths over one driver."""
    if phi.nvars != len(paths):
        raise ValueError("polynomial arity must match the number of paths")
    Z0 = paths[0]
    for P in paths[1:]:
        Z0._same_fiber(P)
    base = np.stack([P.values[:, 0] for P in paths], axis=1)
    out = ControlledPath.zeros(Z0.reference)
    out.values[:, 0] = phi(base)
    n = phi.nvars
    for hi, h in enumerate(Z0.forests):
        if h.is_unit:
            continue
        col = np.zeros(len(Z0.times))
        for k in range(1, h.degree + 1):
            facs = ordered_factorizations(h, k)
            if not facs:
                continue
            for ks in itertools.product(range(n), repeat=k):
                d = partial(phi, ks)
                if d.is_zero():
                    continue
                dval = d(base) / factorial(k)
                for fs in facs:
                    term = dval.copy()
                    for kk, f in zip(ks, fs):
                        term = term * paths[kk].component(f)
                    col = col + term
        out.values[:, hi] = col
    return out
