"""Branched rough paths on a time grid.

Only the path started at zero, X_{0,t}, is stored; every increment is rebuilt
as X_{0,s}^{-1} ⋆ X_{0,t} with the inverse given by the antipode. Chen's
relation then holds by construction, and ``chen_defect`` verifies it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import floor

import numpy as np

from .algebra import antipode, coproduct_terms
from .forest import UNIT, Forest, as_forest, default_alphabet, enumerate_forests

DEFAULT_MAX_GRID = 4096


class AlphaError(ValueError):
    pass


def degree_for_alpha(alpha: float) -> int:
    """N = floor(1/α); α must lie in (0, 1) and avoid the values 1/n."""
    if not 0 < alpha < 1:
        raise AlphaError("alpha must lie in (0, 1)")
    inv = 1.0 / alpha
    if abs(inv - round(inv)) < 1e-12:
        raise AlphaError("alpha must avoid 1/n (standing assumption: 1/alpha is not an integer)")
    return int(floor(inv))


@dataclass
class GridPath:
    """Samples of a continuous path; linear interpolation is implied between them."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        self.values = vals
        if self.times.ndim != 1 or len(self.times) < 2:
            raise ValueError("a grid path needs at least two times")
        if len(self.times) != len(self.values):
            raise ValueError("times and values have different lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.values.shape[1]


class AlgebraTables:
    """Index bookkeeping for forests of degree <= N used by the numerical layer."""

    def __init__(self, alphabet: tuple, N: int):
        self.alphabet = alphabet
        self.N = N
        self.forests = enumerate_forests(N, alphabet)
        self.index = {h: i for i, h in enumerate(self.forests)}
        self.degrees = np.array([h.degree for h in self.forests])
        F = len(self.forests)
        # coproduct terms as parallel arrays: Δh = Σ c u⊗v
        hs, us, vs, cs = [], [], [], []
        for i, h in enumerate(self.forests):
            for (u, v), c in coproduct_terms(h):
                hs.append(i)
                us.append(self.index[u])
                vs.append(self.index[v])
                cs.append(c)
        self.cop_h = np.array(hs)
        self.cop_u = np.array(us)
        self.cop_v = np.array(vs)
        self.cop_c = np.array(cs, dtype=float)
        scatter = np.zeros((len(hs), F))
        scatter[np.arange(len(hs)), hs] = 1.0
        self.scatter = scatter
        S = np.zeros((F, F))
        for j, h in enumerate(self.forests):
            for g, c in antipode(h).terms.items():
                S[self.index[g], j] = float(c)
        self.antipode_matrix = S
        # products of trees, for the multiplicativity check
        self.tree_factors = [[self.index[Forest((t,))] for t in h.trees] for h in self.forests]

    def star(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Row-wise convolution of characters stored as arrays (..., F)."""
        prod = self.cop_c * A[..., self.cop_u] * B[..., self.cop_v]
        return prod @ self.scatter

    @property
    def n_terms(self) -> int:
        return len(self.cop_h)


def auto_block(n: int, width: int, budget: int = 3_000_000) -> int:
    """Rows per block so that a (block, n, width) float array stays near ``budget`` entries."""
    return max(1, min(n, budget // max(1, n * width)))


@lru_cache(maxsize=None)
def algebra_tables(alphabet: tuple, N: int) -> AlgebraTables:
    return AlgebraTables(alphabet, N)


@dataclass
class BranchedRoughPath:
    """X_{0,t} on a grid, one column per forest of degree <= N (column 0 is the unit)."""

    times: np.ndarray
    alpha: float
    alphabet: tuple
    values: np.ndarray
    geometric: bool = False
    N: int = field(init=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.N = degree_for_alpha(self.alpha)
        self.alphabet = tuple(self.alphabet)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.times), len(self.tables.forests)):
            raise ValueError("values must have one column per forest of degree <= N")

    @property
    def tables(self) -> AlgebraTables:
        return algebra_tables(self.alphabet, self.N)

    @property
    def forests(self) -> tuple:
        return self.tables.forests

    @property
    def dim(self) -> int:
        return len(self.alphabet)

    def __len__(self):
        return len(self.times)

    def column(self, h) -> np.ndarray:
        return self.values[:, self.tables.index[as_forest(h)]]

    def inverse_values(self) -> np.ndarray:
        """⟨X_{0,s}^{-1}, h⟩ = ⟨X_{0,s}, S(h)⟩ for every grid point."""
        return self.values @ self.tables.antipode_matrix

    def pair_increments(self, i, j) -> np.ndarray:
        """X_{t_i, t_j} for index arrays i, j (broadcast), shape (..., F)."""
        i = np.asarray(i)
        j = np.asarray(j)
        inv = self.inverse_values()
        return self.tables.star(inv[i], self.values[j])

    def increment(self, s: int, t: int) -> dict:
        row = self.pair_increments(s, t)
        return {h: float(row[k]) for k, h in enumerate(self.forests)}

    def consecutive_increments(self) -> np.ndarray:
        n = len(self.times)
        return self.pair_increments(np.arange(n - 1), np.arange(1, n))

    def window(self, start: int, stop: int) -> "BranchedRoughPath":
        """The same path restricted to grid indices start..stop inclusive."""
        return BranchedRoughPath(self.times[start:stop + 1], self.alpha, self.alphabet,
                                 self.values[start:stop + 1], self.geometric)

    def scaled(self, lam: float) -> "BranchedRoughPath":
        """Dilation: X^h multiplied by lam^{|h|}."""
        return BranchedRoughPath(self.times, self.alpha, self.alphabet,
                                 self.values * lam ** self.tables.degrees, self.geometric)

    def with_alpha(self, alpha: float) -> "BranchedRoughPath":
        if degree_for_alpha(alpha) != self.N:
            raise AlphaError("changing alpha must keep N fixed")
        return BranchedRoughPath(self.times, alpha, self.alphabet, self.values, self.geometric)


def segment_character(v: np.ndarray, tables: AlgebraTables) -> np.ndarray:
    """Exact signature of a straight segment with increment v (rows of v are segments).

    For a linear path every forest evaluates to Π v_label / h!, with h! the
    tree factorial.
    """
    v = np.atleast_2d(v)
    out = np.empty((v.shape[0], len(tables.forests)))
    lab = {a: k for k, a in enumerate(tables.alphabet)}
    for j, h in enumerate(tables.forests):
        coef = 1.0 / _forest_factorial(h)
        col = np.full(v.shape[0], coef)
        for a, m in h.labels().items():
            col = col * v[:, lab[a]] ** m
        out[:, j] = col
    return out


@lru_cache(maxsize=None)
def _tree_factorial(t) -> int:
    out = t.degree
    for c in t.children:
        out *= _tree_factorial(c)
    return out


def _forest_factorial(h: Forest) -> int:
    out = 1
    for t in h.trees:
        out *= _tree_factorial(t)
    return out


def lift_piecewise_linear(path: GridPath, alpha: float, alphabet=None) -> BranchedRoughPath:
    """Branched lift of the piecewise-linear interpolation of ``path``.

    Each segment is integrated in closed form and segments are joined with
    Chen's relation.
    """
    N = degree_for_alpha(alpha)
    alphabet = tuple(alphabet) if alphabet is not None else default_alphabet(path.dim)
    if len(alphabet) != path.dim:
        raise ValueError("alphabet size must match the path dimension")
    tables = algebra_tables(alphabet, N)
    seg = segment_character(np.diff(path.values, axis=0), tables)
    vals = np.zeros((len(path.times), len(tables.forests)))
    vals[0, 0] = 1.0
    for k in range(len(seg)):
        vals[k + 1] = tables.star(vals[k], seg[k])
    return BranchedRoughPath(path.times, alpha, alphabet, vals, geometric=True)


def zero_path(times, alpha: float, alphabet=("",)) -> BranchedRoughPath:
    tables = algebra_tables(tuple(alphabet), degree_for_alpha(alpha))
    vals = np.zeros((len(times), len(tables.forests)))
    vals[:, 0] = 1.0
    return BranchedRoughPath(times, alpha, alphabet, vals, geometric=True)


# ------------------------------------------------------------- diagnostics

def _triples(n: int, max_triples: int | None, rng) -> np.ndarray:
    if max_triples is None or n ** 3 // 6 <= max_triples:
        idx = np.array([(s, u, t) for s in range(n) for u in range(s + 1, n) for t in range(u + 1, n)])
        return idx.reshape(-1, 3)
    raw = np.sort(rng.integers(0, n, size=(max_triples, 3)), axis=1)
    keep = (raw[:, 0] < raw[:, 1]) & (raw[:, 1] < raw[:, 2])
    return raw[keep]


def chen_defect(X: BranchedRoughPath, max_triples: int | None = 20000, seed: int = 0,
                relative: bool = True) -> float:
    """max |δX^h_{s,u,t} − ⟨X_{s,u}⊗X_{u,t}, Δ'h⟩| over grid triples.

    With ``relative=True`` the defect is divided by 1 + the largest increment involved.
    """
    trip = _triples(len(X.times), max_triples, np.random.default_rng(seed))
    if len(trip) == 0:
        return 0.0
    s, u, t = trip.T
    Xst = X.pair_increments(s, t)
    Xsu = X.pair_increments(s, u)
    Xut = X.pair_increments(u, t)
    tb = X.tables
    prod = tb.star(Xsu, Xut)
    defect = np.abs(Xst - prod)[:, 1:]
    if defect.size == 0:
        return 0.0
    scale = 1.0 + max(np.abs(Xst).max(), np.abs(Xsu).max(), np.abs(Xut).max()) if relative else 1.0
    return float(defect.max() / scale)


def multiplicativity_defect(X: BranchedRoughPath, relative: bool = True) -> float:
    """max over grid times and forests of |X^{h1...hk} − Π X^{hi}|."""
    worst = 0.0
    for j, factors in enumerate(X.tables.tree_factors):
        if len(factors) < 2:
            continue
        prod = np.prod(X.values[:, factors], axis=1)
        worst = max(worst, float(np.abs(X.values[:, j] - prod).max()))
    if relative:
        worst /= 1.0 + float(np.abs(X.values).max())
    return worst


def primitive_path(X: BranchedRoughPath, p) -> np.ndarray:
    """Γ^p_t with Γ^p_0 = 0 for a primitive series p; increments of Γ^p equal X^p."""
    from .algebra import series

    col = np.zeros(len(X.times))
    for h, c in series(p).terms.items():
        col = col + float(c) * X.column(h)
    return col - col[0]


# -------------------------------------------------------------- Hölder norms

def pair_iterator(n: int, block: int = 256, dyadic: bool = False):
    """Yield (rows, cols, mask) blocks covering grid pairs s < t."""
    for start in range(0, n - 1, block):
        rows = np.arange(start, min(start + block, n - 1))
        cols = np.arange(start + 1, n)
        mask = cols[None, :] > rows[:, None]
        if dyadic:
            gap = cols[None, :] - rows[:, None]
            mask &= (gap > 0) & ((gap & (gap - 1)) == 0)
        yield rows, cols, mask


def holder_sup(times: np.ndarray, two_param, exponents: np.ndarray, block: int | None = None,
               dyadic: bool = False, max_grid: int = DEFAULT_MAX_GRID, width: int | None = None) -> np.ndarray:
    """Per-component sup over s < t of |f_{s,t}| / |t − s|^γ.

    ``two_param(rows, cols)`` must return an array (len(rows), len(cols), K).
    """
    n = len(times)
    if n > max_grid and not dyadic:
        raise ValueError(f"grid of {n} points exceeds {max_grid}; use dyadic=True")
    exponents = np.asarray(exponents, dtype=float)
    if block is None:
        block = auto_block(n, width or len(exponents))
    best = np.zeros(len(exponents))
    for rows, cols, mask in pair_iterator(n, block, dyadic):
        vals = two_param(rows, cols)
        dt = np.abs(times[cols][None, :] - times[rows][:, None])
        dt = np.where(mask, dt, 1.0)
        q = np.abs(vals) / dt[..., None] ** exponents
        q = np.where(mask[..., None], q, 0.0)
        best = np.maximum(best, q.reshape(-1, len(exponents)).max(axis=0))
    return best


def _increment_block(X: BranchedRoughPath, inv=None):
    inv = X.inverse_values() if inv is None else inv
    def fn(rows, cols):
        return X.tables.star(inv[rows][:, None, :], X.values[cols][None, :, :])
    return fn


def holder_norms(X: BranchedRoughPath, alpha: float | None = None, **kw) -> dict:
    """‖X^h‖_{|h|α} for every nonempty forest h."""
    alpha = X.alpha if alpha is None else alpha
    fn = _increment_block(X)
    ex = X.tables.degrees * alpha
    kw.setdefault("width", X.tables.n_terms)
    sup = holder_sup(X.times, lambda r, c: fn(r, c)[..., 1:], ex[1:], **kw)
    return {h: float(v) for h, v in zip(X.forests[1:], sup)}


def holder_norm(X: BranchedRoughPath, alpha: float | None = None, **kw) -> float:
    """Homogeneous norm max_h ‖X^h‖_{|h|α}^{1/|h|}."""
    norms = holder_norms(X, alpha, **kw)
    return max((v ** (1.0 / h.degree) for h, v in norms.items()), default=0.0)


@dataclass
class RoughPathDistanceReport:
    distance: float
    per_forest: dict
    worst_forest: Forest | None

    def __float__(self):
        return self.distance


def _check_same_grid(X, Y):
    if X.alphabet != Y.alphabet or X.N != Y.N:
        raise ValueError("rough paths live over different algebras")
    if len(X.times) != len(Y.times) or not np.allclose(X.times, Y.times, rtol=0, atol=1e-14):
        raise ValueError("rough paths must share a grid")


def rp_distance(X: BranchedRoughPath, Y: BranchedRoughPath, alpha: float | None = None,
                **kw) -> RoughPathDistanceReport:
    """ρ_α(X, Y) = max_h ‖X^h − Y^h‖_{|h|α}."""
    _check_same_grid(X, Y)
    alpha = X.alpha if alpha is None else alpha
    fx, fy = _increment_block(X), _increment_block(Y)
    ex = X.tables.degrees * alpha
    kw.setdefault("width", 2 * X.tables.n_terms)
    sup = holder_sup(X.times, lambda r, c: (fx(r, c) - fy(r, c))[..., 1:], ex[1:], **kw)
    per = {h: float(v) for h, v in zip(X.forests[1:], sup)}
    worst = max(per, key=per.get) if per else None
    return RoughPathDistanceReport(max(per.values(), default=0.0), per, worst)


def estimate_holder_exponent(times, values, scales=None) -> float:
    """Log-log slope of the largest increment against the lag, over dyadic lags."""
    from scipy.stats import linregress

    times = np.asarray(times, float)
    v = np.asarray(values, float)
    if v.ndim == 1:
        v = v[:, None]
    n = len(times)
    if scales is None:
        scales = [2 ** k for k in range(int(np.log2(n - 1)) - 1) if 2 ** k < n // 4] or [1]
    xs, ys = [], []
    for L in scales:
        inc = np.linalg.norm(v[L:] - v[:-L], axis=1).max()
        if inc > 0:
            xs.append(np.log(times[L] - times[0]))
            ys.append(np.log(inc))
    return float(linregress(xs, ys).slope)
