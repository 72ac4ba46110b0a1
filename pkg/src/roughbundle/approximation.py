"""Controlled paths generated by smooth data, and their piecewise-linear approximation.

Given one piecewise-linear function f^h per forest h of degree <= N-1, the
map Γ_X(f) builds a controlled path degree by degree from the top down:

    Γ^h = f^h                                          for |h| = N-1
    Γ^h = Σ_p ∫ Γ^{p*⋆h} dX^p + f^h                    otherwise

with p running over the primitive basis. Each integral against a primitive
coordinate is a compensated sum whose germ on [a, b] is
Σ_ρ Γ^{ρ*⋆p*⋆h}_a X^{ρ⊤p}_{a,b}, ρ running over the empty word and the
natural-growth words short enough to keep the degree below N.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import ForestSeries, convolution
from .controlled import ControlledPath, GridMismatch, RateFit, control_tables, cp_distance, cp_norm, fit_rate
from .primitives import PrimitiveBasis, build_primitive_basis
from .roughpath import BranchedRoughPath, holder_sup, rp_distance


def default_epsilon(alpha: float, N: int) -> float:
    return (1 - N * alpha) / 2


@dataclass
class SmoothControlData:
    """One grid function per forest of degree <= N-1 (linear between grid points)."""

    times: np.ndarray
    alphabet: tuple
    N: int
    values: np.ndarray
    epsilon: float | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, float)
        self.values = np.asarray(self.values, float)
        want = (len(self.times), len(self.forests))
        if self.values.shape != want:
            raise ValueError(f"values must have shape {want}")

    @property
    def forests(self) -> tuple:
        return control_tables(tuple(self.alphabet), self.N).forests

    def component(self, h):
        from .forest import as_forest
        return self.values[:, control_tables(tuple(self.alphabet), self.N).index[as_forest(h)]]

    def norm(self, epsilon: float | None = None) -> float:
        """max_h of the discrete (1-ε)-Hölder norm of f^h."""
        eps = self.epsilon if epsilon is None else epsilon
        if eps is None:
            raise ValueError("epsilon is required")
        C = self.values.shape[1]
        v = self.values
        fn = lambda r, c: v[c][None, :, :] - v[r][:, None, :]
        return float(holder_sup(self.times, fn, np.full(C, 1 - eps)).max(initial=0.0))

    def __add__(self, other):
        return SmoothControlData(self.times, self.alphabet, self.N, self.values + other.values, self.epsilon)

    def __mul__(self, lam):
        return SmoothControlData(self.times, self.alphabet, self.N, self.values * lam, self.epsilon)

    __rmul__ = __mul__

    @classmethod
    def zeros_like(cls, X: BranchedRoughPath, epsilon=None) -> "SmoothControlData":
        C = len(control_tables(X.alphabet, X.N).forests)
        eps = default_epsilon(X.alpha, X.N) if epsilon is None else epsilon
        return cls(X.times, X.alphabet, X.N, np.zeros((len(X.times), C)), eps)


@dataclass
class _GermSpec:
    words: list
    weights: np.ndarray   # (R, C): ρ*⋆p*⋆h over component forests
    xcoef: np.ndarray     # (R, F): ρ⊤p over rough-path forests


class GammaTables:
    """Exact germ coefficients, converted to float arrays, for one (alphabet, N)."""

    def __init__(self, basis: PrimitiveBasis, alphabet: tuple, N: int):
        if tuple(basis.alphabet) != tuple(alphabet) or basis.N < N:
            raise ValueError("primitive basis does not match the rough path")
        self.basis = basis
        ct = control_tables(alphabet, N)
        self.ct = ct
        xi = ct.xt.index
        C, F = len(ct.forests), len(ct.xt.forests)
        self.order = sorted(range(C), key=lambda k: (-ct.forests[k].degree, k))
        self.germs = {}
        prim_words = [(i,) for i in range(len(basis.primitives))]
        for hk, h in enumerate(ct.forests):
            n = h.degree
            if n >= N - 1:
                continue
            specs = []
            for pw in prim_words:
                pdeg = basis.primitive_degree(pw[0])
                if pdeg >= N - n:
                    continue
                pstar_h = convolution(basis.dual(pw), ForestSeries.of(h), cutoff=N - 1)
                words, W, Xc = [], [], []
                for rho in basis.words_below(N - n - pdeg):
                    D = convolution(basis.dual(rho), pstar_h, cutoff=N - 1)
                    w = np.zeros(C)
                    for g, c in D.terms.items():
                        w[ct.index[g]] = float(c)
                    x = np.zeros(F)
                    for g, c in basis.element(rho + pw).terms.items():
                        x[xi[g]] = float(c)
                    words.append(rho + pw)
                    W.append(w)
                    Xc.append(x)
                specs.append(_GermSpec(words, np.array(W), np.array(Xc)))
            self.germs[hk] = specs


@lru_cache(maxsize=None)
def _gamma_tables_cached(basis_key, alphabet, N):
    basis = build_primitive_basis(alphabet, basis_key)
    return GammaTables(basis, alphabet, N)


def gamma_tables(basis: PrimitiveBasis | None, X: BranchedRoughPath) -> GammaTables:
    if basis is None or (tuple(basis.alphabet) == X.alphabet and basis.N == X.N):
        return _gamma_tables_cached(X.N, X.alphabet, X.N)
    return GammaTables(basis, X.alphabet, X.N)


def _gamma_values(xinc: np.ndarray, f: np.ndarray, gt: GammaTables, affine_targets=None) -> tuple:
    """Run the top-down recursion on one window.

    ``xinc`` holds consecutive rough-path increments (n-1, F), ``f`` the data (n, C).
    With ``affine_targets`` (start values, end values) the lower-degree data is
    rebuilt on the fly as the affine correction that pins both endpoints.
    Returns (Γ values, data values).
    """
    G = np.zeros_like(f)
    f = f.copy()
    n = len(f)
    for hk in gt.order:
        specs = gt.germs.get(hk)
        if specs is None:
            G[:, hk] = f[:, hk]
            continue
        integ = np.zeros(n)
        for spec in specs:
            lead = G[:-1] @ spec.weights.T          # (n-1, R)
            xs = xinc @ spec.xcoef.T                # (n-1, R)
            integ[1:] += np.cumsum((lead * xs).sum(axis=1))
        if affine_targets is not None:
            z0, z1, frac = affine_targets
            f[:, hk] = z0[hk] + frac * (z1[hk] - z0[hk] - integ[-1])
        G[:, hk] = integ + f[:, hk]
    return G, f


def gamma(X: BranchedRoughPath, f: SmoothControlData, basis: PrimitiveBasis | None = None) -> ControlledPath:
    """Γ_X(f)."""
    if len(f.times) != len(X.times) or not np.allclose(f.times, X.times, rtol=0, atol=1e-14):
        raise GridMismatch("control data and rough path must share a grid")
    if f.N != X.N or tuple(f.alphabet) != X.alphabet:
        raise GridMismatch("control data has the wrong component set")
    if f.epsilon is not None and not 0 < f.epsilon < 1 - X.N * X.alpha:
        raise ValueError(f"epsilon must lie in (0, {1 - X.N * X.alpha:g})")
    gt = gamma_tables(basis, X)
    G, _ = _gamma_values(X.consecutive_increments(), f.values, gt)
    return ControlledPath(X, G)


def implied_control(Z: ControlledPath, basis: PrimitiveBasis | None = None,
                    epsilon: float | None = None) -> SmoothControlData:
    """The data f with Γ_X(f) = Z: subtract from each Z^h the integrals built from Z itself."""
    X = Z.reference
    gt = gamma_tables(basis, X)
    xinc = X.consecutive_increments()
    f = Z.values.copy()
    n = len(X.times)
    for hk, specs in gt.germs.items():
        integ = np.zeros(n)
        for spec in specs:
            lead = Z.values[:-1] @ spec.weights.T
            xs = xinc @ spec.xcoef.T
            integ[1:] += np.cumsum((lead * xs).sum(axis=1))
        f[:, hk] -= integ
    eps = default_epsilon(X.alpha, X.N) if epsilon is None else epsilon
    return SmoothControlData(X.times, X.alphabet, X.N, f, eps)


def gamma_stability(X: BranchedRoughPath, Xt: BranchedRoughPath, f: SmoothControlData,
                    basis: PrimitiveBasis | None = None) -> float:
    """⦀Γ_X(f); Γ_X̃(f)⦀ / (⦀f⦀ ρ_α(X, X̃))."""
    num = cp_distance(gamma(X, f, basis), gamma(Xt, f, basis))
    den = f.norm() * rp_distance(X, Xt).distance
    if den == 0:
        return float("nan")
    return num / den


# ------------------------------------------------------------ local pieces

def _window_args(Z: ControlledPath, start: int, stop: int):
    if not 0 <= start < stop < len(Z.times):
        raise ValueError("interval must be given by grid indices start < stop")
    W = Z.window(start, stop)
    t = W.times
    frac = (t - t[0]) / (t[-1] - t[0])
    return W, frac


def _local_affine(Z: ControlledPath, start: int, stop: int, gt: GammaTables) -> tuple:
    W, frac = _window_args(Z, start, stop)
    z0, z1 = W.values[0], W.values[-1]
    f = z0[None, :] + frac[:, None] * (z1 - z0)[None, :]
    G, f = _gamma_values(W.reference.consecutive_increments(), f, gt, (z0, z1, frac))
    return W, G, f


def local_affine_data(Z: ControlledPath, start: int, stop: int,
                      basis: PrimitiveBasis | None = None) -> SmoothControlData:
    """Affine data on [t_start, t_stop] whose Γ matches Z at both ends.

    Top-degree data interpolates Z linearly. Lower degrees interpolate the
    part of δZ^h not already produced by the integrals.
    """
    gt = gamma_tables(basis, Z.reference)
    W, _, f = _local_affine(Z, start, stop, gt)
    X = Z.reference
    return SmoothControlData(W.times, X.alphabet, X.N, f, default_epsilon(X.alpha, X.N))


def local_approximation(Z: ControlledPath, start: int, stop: int,
                        basis: PrimitiveBasis | None = None) -> ControlledPath:
    gt = gamma_tables(basis, Z.reference)
    W, G, _ = _local_affine(Z, start, stop, gt)
    return ControlledPath(W.reference, G)


def glue(pieces: list, rtol: float = 1e-10) -> ControlledPath:
    """Concatenate controlled paths on contiguous windows of one grid."""
    if not pieces:
        raise ValueError("nothing to glue")
    times = [pieces[0].times]
    refv = [pieces[0].reference.values]
    vals = [pieces[0].values]
    for prev, nxt in zip(pieces, pieces[1:]):
        if prev.times[-1] != nxt.times[0]:
            raise ValueError("pieces are not contiguous")
        scale = max(1.0, float(np.abs(prev.values[-1]).max()))
        if np.abs(prev.values[-1] - nxt.values[0]).max() > rtol * scale:
            raise ValueError("pieces disagree at a shared endpoint")
        times.append(nxt.times[1:])
        refv.append(nxt.reference.values[1:])
        vals.append(nxt.values[1:])
    X0 = pieces[0].reference
    X = BranchedRoughPath(np.concatenate(times), X0.alpha, X0.alphabet, np.concatenate(refv), X0.geometric)
    return ControlledPath(X, np.concatenate(vals))


def dyadic_dissection(n_points: int, level: int) -> np.ndarray:
    """Grid indices of the mesh with 2^level equal intervals (nearest grid points)."""
    idx = np.unique(np.round(np.linspace(0, n_points - 1, 2 ** level + 1)).astype(int))
    if len(idx) != 2 ** level + 1:
        raise ValueError(f"grid of {n_points} points is too coarse for level {level}")
    return idx


def approximate(Z: ControlledPath, dissection, basis: PrimitiveBasis | None = None) -> ControlledPath:
    """Piecewise construction: local affine data on each mesh interval, glued."""
    gt = gamma_tables(basis, Z.reference)
    dis = np.asarray(dissection, int)
    if dis[0] != 0 or dis[-1] != len(Z.times) - 1 or np.any(np.diff(dis) <= 0):
        raise ValueError("dissection must run from the first to the last grid index")
    vals = np.empty_like(Z.values)
    for a, b in zip(dis[:-1], dis[1:]):
        _, G, _ = _local_affine(Z, a, b, gt)
        vals[a:b + 1] = G
    return ControlledPath(Z.reference, vals)


def cocycle_remainder(Z: ControlledPath, i: int, k: int, j: int) -> np.ndarray:
    """R_{s,u} + R_{u,t} + Σ_u R^{ū⋆h}_{s,u} X^ū_{u,t}, which must equal R_{s,t}."""
    from .controlled import remainders

    X = Z.reference
    ct = Z.tables
    Rsu = remainders(Z, [i], [k])[0]
    Rut = remainders(Z, [k], [j])[0]
    Xut = X.pair_increments(k, j)
    # Σ_u Σ_g weights[h,u,g] R^g_{s,u} X^u_{u,t}
    corr = np.einsum("hug,g,u->h", ct.weights, Rsu, Xut)
    return Rsu + Rut + corr


@dataclass
class ConvergenceReport:
    levels: list
    thetas: np.ndarray
    errors: np.ndarray
    fit: RateFit
    beta: float
    alpha: float
    monotone: bool
    threshold: float = field(init=False)

    def __post_init__(self):
        self.threshold = self.alpha - self.beta - 0.1

    @property
    def passed(self) -> bool:
        return self.monotone and self.fit.passes(self.threshold)

    def rows(self) -> list:
        return [(lv, float(th), float(er)) for lv, th, er in zip(self.levels, self.thetas, self.errors)]


def convergence_study(Z: ControlledPath, beta: float, levels=(2, 3, 4, 5, 6),
                      basis: PrimitiveBasis | None = None, noise: float = 0.10,
                      jobs: int = 1) -> ConvergenceReport:
    """β-distance between Z and its mesh-θ approximation for θ = T 2^{-k}."""
    alpha = Z.reference.alpha
    if not 0 < beta < alpha:
        raise ValueError("beta must satisfy 0 < beta < alpha")
    levels = list(levels)
    if len(levels) < 2:
        raise ValueError("insufficient scales for fit")
    T = Z.times[-1] - Z.times[0]
    gamma_tables(basis, Z.reference)  # build shared tables before any threads start

    def one(k):
        return cp_distance(Z, approximate(Z, dyadic_dissection(len(Z.times), k), basis), beta)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(jobs) as pool:
            errs = list(pool.map(one, levels))
    else:
        errs = [one(k) for k in levels]
    thetas = [T * 2.0 ** -k for k in levels]
    errs = np.array(errs)
    scale = max(1.0, float(errs.max()))
    monotone = bool(np.all(errs[1:] <= errs[:-1] * (1 + noise) + 1e-13 * scale))
    return ConvergenceReport(levels, np.array(thetas), errs, fit_rate(thetas, errs), beta, alpha, monotone)


@dataclass
class SmoothApproxReport:
    budget: tuple
    level: int | None
    mesh_error: float
    control: SmoothControlData | None
    paths: list
    errors: list

    @property
    def certified(self) -> list:
        return [e <= sum(self.budget) for e in self.errors]


def smooth_approximation(Z: ControlledPath, drivers: list, delta: float, beta: float | None = None,
                         basis: PrimitiveBasis | None = None, levels=range(1, 11)) -> SmoothApproxReport:
    """Approximate Z over smoother drivers with a shared piecewise-linear control.

    Half of the budget goes to the mesh (smallest level reaching δ/2), the
    other half is left for the change of driver.
    """
    X = Z.reference
    beta = X.alpha / 2 if beta is None else beta
    budget = (delta / 2, delta / 2)
    chosen, err, Zt = None, float("inf"), None
    for k in levels:
        try:
            dis = dyadic_dissection(len(Z.times), k)
        except ValueError:
            break
        Zt = approximate(Z, dis, basis)
        err = cp_distance(Z, Zt, beta)
        if err <= budget[0]:
            chosen = k
            break
    if chosen is None:
        return SmoothApproxReport(budget, None, err, None, [], [])
    f = implied_control(Zt, basis)
    paths, errors = [], []
    for Xe in drivers:
        Ze = gamma(Xe, f, basis)
        paths.append(Ze)
        errors.append(cp_distance(Z, Ze, beta))
    return SmoothApproxReport(budget, chosen, err, f, paths, errors)
