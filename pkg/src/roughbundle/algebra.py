"""Connes-Kreimer Hopf algebra of decorated forests and its pre-Lie structure.

Everything here is exact: coefficients are ``fractions.Fraction``. Series
are plain linear combinations of forests; whether a series is read as a
primal element or as a dual functional in the delta or zeta basis is up to
the caller, and the ``basis`` arguments say which reading is meant.
"""
from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Mapping

from .forest import (
    DEFAULT_LABEL, UNIT, Forest, Tree, as_forest, check_degree, forests_of_degree,
)


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


def _format_coeff(c: Fraction, first: bool) -> tuple:
    sign = "-" if c < 0 else "+"
    mag = abs(c)
    if mag == 1:
        body = ""
    elif mag.denominator == 1:
        body = f"{mag.numerator}*"
    else:
        body = f"{mag.numerator}/{mag.denominator}*"
    if first:
        return ("-" if c < 0 else ""), body
    return f" {sign} ", body


class ForestSeries:
    """Finite linear combination of forests with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | Iterable = ()):
        acc = defaultdict(Fraction)
        items = terms.items() if isinstance(terms, Mapping) else terms
        for h, c in items:
            acc[as_forest(h)] += _frac(c)
        self.terms = {h: c for h, c in acc.items() if c != 0}

    @classmethod
    def of(cls, h, coeff=1) -> "ForestSeries":
        return cls({as_forest(h): coeff})

    @classmethod
    def unit(cls) -> "ForestSeries":
        return cls({UNIT: 1})

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key)

    def __getitem__(self, h) -> Fraction:
        return self.terms.get(as_forest(h), Fraction(0))

    def __eq__(self, other):
        if isinstance(other, (Forest, Tree)):
            other = ForestSeries.of(other)
        if not isinstance(other, ForestSeries):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        other = _series(other)
        acc = dict(self.terms)
        for h, c in other.terms.items():
            acc[h] = acc.get(h, 0) + c
        return ForestSeries(acc)

    __radd__ = __add__

    def __neg__(self):
        return ForestSeries({h: -c for h, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_series(other))

    def __rsub__(self, other):
        return _series(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ForestSeries({h: c * other for h, c in self.terms.items()})
        other = _series(other)
        acc = defaultdict(Fraction)
        for h1, c1 in self.terms.items():
            for h2, c2 in other.terms.items():
                acc[h1 * h2] += c1 * c2
        return ForestSeries(acc)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return _series(other) * self

    def __truediv__(self, k):
        return ForestSeries({h: c / _frac(k) for h, c in self.terms.items()})

    def __repr__(self):
        return f"ForestSeries({self})"

    def __str__(self):
        return self.format()

    def format(self, wrap: str | None = None) -> str:
        """Render as ``q1*F1 + q2*F2``; ``wrap="z"`` renders ``z(F)`` atoms."""
        if not self.terms:
            return "0"
        parts = []
        for i, (h, c) in enumerate(self.items()):
            sep, body = _format_coeff(c, i == 0)
            atom = f"{wrap}({h})" if wrap else str(h)
            if body == "" and h.is_unit and not wrap:
                atom = "1"
            parts.append(sep + body + atom)
        return "".join(parts)

    def degrees(self) -> set:
        return {h.degree for h in self.terms}

    def max_degree(self) -> int:
        return max((h.degree for h in self.terms), default=-1)

    def homogeneous(self, n: int) -> "ForestSeries":
        return ForestSeries({h: c for h, c in self.terms.items() if h.degree == n})

    def truncate(self, n: int) -> "ForestSeries":
        return ForestSeries({h: c for h, c in self.terms.items() if h.degree <= n})

    def trees_only(self) -> "ForestSeries":
        """Projection onto single trees."""
        return ForestSeries({h: c for h, c in self.terms.items() if h.is_tree})

    def pair(self, values: Mapping) -> Fraction:
        """Evaluate against a mapping forest -> number."""
        return sum((c * values.get(h, 0) for h, c in self.terms.items()), Fraction(0))


def _series(x) -> ForestSeries:
    if isinstance(x, ForestSeries):
        return x
    if isinstance(x, (int, Fraction)):
        return ForestSeries({UNIT: x})
    return ForestSeries.of(x)


def series(x) -> ForestSeries:
    """Coerce a forest, tree, literal, scalar or series into a ForestSeries."""
    if isinstance(x, str):
        return parse_series(x)
    return _series(x)


class TensorSeries:
    """Finite linear combination of pairs of forests."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | Iterable = ()):
        acc = defaultdict(Fraction)
        items = terms.items() if isinstance(terms, Mapping) else terms
        for (u, v), c in items:
            acc[(as_forest(u), as_forest(v))] += _frac(c)
        self.terms = {k: c for k, c in acc.items() if c != 0}

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0].sort_key, kv[0][1].sort_key))

    def __getitem__(self, pair) -> Fraction:
        u, v = pair
        return self.terms.get((as_forest(u), as_forest(v)), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, TensorSeries):
            return NotImplemented
        return self.terms == other.terms

    def __add__(self, other):
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc.get(k, 0) + c
        return TensorSeries(acc)

    def __sub__(self, other):
        return self + TensorSeries({k: -c for k, c in other.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return TensorSeries({k: c * other for k, c in self.terms.items()})
        acc = defaultdict(Fraction)
        for (u1, v1), c1 in self.terms.items():
            for (u2, v2), c2 in other.terms.items():
                acc[(u1 * u2, v1 * v2)] += c1 * c2
        return TensorSeries(acc)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for i, ((u, v), c) in enumerate(self.items()):
            sep, body = _format_coeff(c, i == 0)
            parts.append(f"{sep}{body}{u}⊗{v}")
        return "".join(parts)

    __repr__ = __str__

    @staticmethod
    def tensor(x, y) -> "TensorSeries":
        x, y = _series(x), _series(y)
        return TensorSeries({(u, v): a * b for u, a in x.terms.items() for v, b in y.terms.items()})

    def multiply(self) -> ForestSeries:
        """The algebra product m: u⊗v -> uv."""
        return ForestSeries([(u * v, c) for (u, v), c in self.terms.items()])


# ------------------------------------------------------------- coproduct

@lru_cache(maxsize=None)
def _tree_coproduct(t: Tree) -> tuple:
    inner = _forest_coproduct(Forest(t.children))
    acc = defaultdict(int)
    for (u, v), c in inner:
        acc[(u, Forest((Tree(t.label, v.trees),)))] += c
    acc[(Forest((t,)), UNIT)] += 1
    return tuple(acc.items())


@lru_cache(maxsize=None)
def _forest_coproduct(h: Forest) -> tuple:
    acc = {(UNIT, UNIT): 1}
    for t in h.trees:
        nxt = defaultdict(int)
        for (u1, v1), c1 in acc.items():
            for (u2, v2), c2 in _tree_coproduct(t):
                nxt[(u1 * u2, v1 * v2)] += c1 * c2
        acc = nxt
    return tuple(acc.items())


def coproduct_terms(h: Forest) -> tuple:
    """Cached ``((left, right), multiplicity)`` pairs of the coproduct of ``h``.

    The left factor collects the pruned branches, the right factor keeps the roots.
    """
    return _forest_coproduct(h)


def coproduct(h) -> TensorSeries:
    if isinstance(h, ForestSeries):
        out = TensorSeries()
        for f, c in h.terms.items():
            out = out + coproduct(f) * c
        return out
    return TensorSeries(coproduct_terms(as_forest(h)))


def reduced_coproduct(h) -> TensorSeries:
    h = as_forest(h)
    if h.is_unit:
        return TensorSeries()
    return TensorSeries([((u, v), c) for (u, v), c in coproduct_terms(h)
                         if not u.is_unit and not v.is_unit])


def counit(x) -> Fraction:
    return _series(x)[UNIT]


# --------------------------------------------------------------- antipode

@lru_cache(maxsize=None)
def _tree_antipode(t: Tree) -> ForestSeries:
    acc = ForestSeries.of(Forest((t,)), -1)
    for (u, v), c in coproduct_terms(Forest((t,))):
        if u.is_unit or v.is_unit:
            continue
        acc = acc - _forest_antipode(u) * ForestSeries.of(v) * c
    return acc


@lru_cache(maxsize=None)
def _forest_antipode(h: Forest) -> ForestSeries:
    acc = ForestSeries.unit()
    for t in h.trees:
        acc = acc * _tree_antipode(t)
    return acc


def antipode(h) -> ForestSeries:
    if isinstance(h, ForestSeries):
        return sum((antipode(f) * c for f, c in h.terms.items()), ForestSeries())
    return _forest_antipode(as_forest(h))


# --------------------------------------------------------- symmetry factor

@lru_cache(maxsize=None)
def _tree_symmetry(t: Tree) -> int:
    out = 1
    for child, m in Counter(t.children).items():
        out *= factorial(m) * _tree_symmetry(child) ** m
    return out


def symmetry_factor(h) -> int:
    """Order of the group permuting identical branches; for a forest, of its rooted tree."""
    if isinstance(h, Tree):
        return _tree_symmetry(h)
    h = as_forest(h)
    return _tree_symmetry(Tree(DEFAULT_LABEL, h.trees))


def zeta_to_delta(x: ForestSeries) -> ForestSeries:
    """Coefficients of a zeta-basis dual element, rewritten in the delta basis."""
    return ForestSeries({h: c * symmetry_factor(h) for h, c in x.terms.items()})


def delta_to_zeta(x: ForestSeries) -> ForestSeries:
    return ForestSeries({h: c / symmetry_factor(h) for h, c in x.terms.items()})


# ---------------------------------------------------------------- grafting

@lru_cache(maxsize=None)
def _graft_onto_tree(t: Tree, sigmas: tuple) -> tuple:
    """Sum over every map sending each tree of ``sigmas`` to a node of ``t``."""
    if not sigmas:
        return ((t, 1),)
    kids = t.children
    m = len(kids)
    acc = defaultdict(int)
    for dest in itertools.product(range(m + 1), repeat=len(sigmas)):
        at_root = [s for s, d in zip(sigmas, dest) if d == m]
        per_child = [tuple(s for s, d in zip(sigmas, dest) if d == j) for j in range(m)]
        options = [_graft_onto_tree(kids[j], per_child[j]) for j in range(m)]
        for combo in itertools.product(*options):
            coeff = 1
            new_kids = []
            for tree, c in combo:
                coeff *= c
                new_kids.append(tree)
            acc[Tree(t.label, new_kids + at_root)] += coeff
    return tuple(acc.items())


@lru_cache(maxsize=None)
def _graft_forest(x: Forest, y: Forest) -> tuple:
    """x ↶ y: every tree of y goes below some node of x, over all choices."""
    if y.is_unit:
        return ((x, 1),)
    if x.is_unit:
        return ()
    k = len(x.trees)
    acc = defaultdict(int)
    for dest in itertools.product(range(k), repeat=len(y.trees)):
        parts = [tuple(s for s, d in zip(y.trees, dest) if d == j) for j in range(k)]
        options = [_graft_onto_tree(x.trees[j], parts[j]) for j in range(k)]
        for combo in itertools.product(*options):
            coeff = 1
            for _, c in combo:
                coeff *= c
            acc[Forest(tree for tree, _ in combo)] += coeff
    return tuple(acc.items())


def grafting(x, y) -> ForestSeries:
    """Bilinear extension of x ↶ y (symmetric brace on forests)."""
    x, y = _series(x), _series(y)
    acc = defaultdict(Fraction)
    for u, a in x.terms.items():
        for v, b in y.terms.items():
            for f, c in _graft_forest(u, v):
                acc[f] += a * b * c
    return ForestSeries(acc)


@lru_cache(maxsize=None)
def _gl_product(hbar: Forest, h: Forest) -> tuple:
    """Zeta-basis product: sum of (h ↶ A) * B over splittings hbar = A B."""
    acc = defaultdict(int)
    trees = hbar.trees
    for mask in itertools.product((0, 1), repeat=len(trees)):
        grafted = Forest(t for t, m in zip(trees, mask) if m)
        kept = Forest(t for t, m in zip(trees, mask) if not m)
        for f, c in _graft_forest(h, grafted):
            acc[f * kept] += c
    return tuple(acc.items())


def zeta_product(x, y) -> ForestSeries:
    """Convolution of zeta-basis dual elements, via grafting."""
    x, y = _series(x), _series(y)
    acc = defaultdict(Fraction)
    for u, a in x.terms.items():
        for v, b in y.terms.items():
            for f, c in _gl_product(u, v):
                acc[f] += a * b * c
    return ForestSeries(acc)


# ------------------------------------------------------------ convolution

@lru_cache(maxsize=None)
def _forests_with_labels(n: int, labels: tuple) -> tuple:
    alphabet = tuple(sorted(set(labels)))
    want = Counter(labels)
    return tuple(f for f in forests_of_degree(n, alphabet, cap=max(n, 8)) if f.labels() == want)


@lru_cache(maxsize=None)
def _delta_star(u: Forest, v: Forest) -> tuple:
    """Delta-basis product: g weighted by the multiplicity of u⊗v in Δg."""
    labels = tuple(sorted((u.labels() + v.labels()).elements()))
    acc = []
    for g in _forests_with_labels(u.degree + v.degree, labels):
        for (a, b), c in coproduct_terms(g):
            if a == u and b == v:
                acc.append((g, c))
                break
    return tuple(acc)


def convolution(x, y, cutoff: int | None = None, basis: str = "delta",
                method: str = "coproduct") -> ForestSeries:
    """⟨x⋆y, h⟩ = Σ x(h_(1)) y(h_(2)) for dual elements, truncated at ``cutoff``.

    ``basis`` names how the coefficients of x, y and the result are read.
    ``method="coproduct"`` evaluates through Δ, ``method="grafting"`` through
    the zeta-basis grafting formula; the two must agree.
    """
    x, y = _series(x), _series(y)
    if cutoff is not None:
        check_degree(cutoff)
    if method == "grafting":
        if basis == "delta":
            out = zeta_to_delta(zeta_product(delta_to_zeta(x), delta_to_zeta(y)))
        else:
            out = zeta_product(x, y)
    elif method == "coproduct":
        if basis == "zeta":
            return delta_to_zeta(convolution(zeta_to_delta(x), zeta_to_delta(y), cutoff, "delta"))
        acc = defaultdict(Fraction)
        for u, a in x.terms.items():
            for v, b in y.terms.items():
                if cutoff is not None and u.degree + v.degree > cutoff:
                    continue
                for g, c in _delta_star(u, v):
                    acc[g] += a * b * c
        out = ForestSeries(acc)
    else:
        raise ValueError(f"unknown method {method!r}")
    return out.truncate(cutoff) if cutoff is not None else out


# ---------------------------------------------------------- natural growth

def _graft_at_each_node(t: Tree, extra: tuple) -> list:
    out = [Tree(t.label, t.children + extra)]
    for j, child in enumerate(t.children):
        for g in _graft_at_each_node(child, extra):
            out.append(Tree(t.label, t.children[:j] + (g,) + t.children[j + 1:]))
    return out


@lru_cache(maxsize=None)
def _growth(u: Forest, v: Forest) -> tuple:
    if v.is_unit:
        raise ValueError("natural growth onto the empty forest is undefined")
    acc = defaultdict(Fraction)
    for j, t in enumerate(v.trees):
        rest = v.trees[:j] + v.trees[j + 1:]
        for g in _graft_at_each_node(t, u.trees):
            acc[Forest(rest + (g,))] += Fraction(1, v.degree)
    return tuple(acc.items())


def natural_growth(x, y) -> ForestSeries:
    """x ⊤ y: graft x onto each node of y, averaged over the nodes of y."""
    x, y = _series(x), _series(y)
    acc = defaultdict(Fraction)
    for u, a in x.terms.items():
        for v, b in y.terms.items():
            for f, c in _growth(u, v):
                acc[f] += a * b * c
    return ForestSeries(acc)


def top(*elements) -> ForestSeries:
    """Left-nested natural growth ⊤(p1, ..., pn) = (...(p1 ⊤ p2) ⊤ ...) ⊤ pn."""
    if not elements:
        return ForestSeries.unit()
    acc = _series(elements[0])
    for e in elements[1:]:
        acc = natural_growth(acc, e)
    return acc


@lru_cache(maxsize=None)
def _pi1(h: Forest) -> ForestSeries:
    acc = ForestSeries.of(h)
    for (u, v), c in reduced_coproduct(h).terms.items():
        acc = acc - natural_growth(ForestSeries.of(u), _pi1(v)) * c
    return acc


def primitive_projector(h) -> ForestSeries:
    """Projection onto primitive elements built from natural growth."""
    if isinstance(h, ForestSeries):
        return sum((_pi1(f) * c for f, c in h.terms.items()), ForestSeries())
    h = as_forest(h)
    if h.is_unit:
        raise ValueError("the unit has no primitive part")
    return _pi1(h)


# ----------------------------------------------------------- series text

def parse_series(text: str) -> ForestSeries:
    """Parse ``"q1*F1 + q2*F2"``; a bare forest literal is also accepted."""
    from .forest import ForestParseError, parse_forest

    s = text.strip()
    if not s:
        raise ForestParseError("empty series", text, 0)
    if s == "0":
        return ForestSeries()
    acc = ForestSeries()
    pos = 0
    sign = 1
    while pos < len(s):
        while pos < len(s) and s[pos].isspace():
            pos += 1
        if pos < len(s) and s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos += 1
            while pos < len(s) and s[pos].isspace():
                pos += 1
        start = pos
        depth = 0
        while pos < len(s):
            ch = s[pos]
            if ch == "[":
                depth += 1
            elif ch == "]":
                depth -= 1
            elif depth == 0 and ch in "+-" and pos > start:
                break
            pos += 1
        chunk = s[start:pos].strip()
        if not chunk:
            raise ForestParseError("missing term", text, start)
        coeff = Fraction(1)
        if "*" in chunk:
            num, lit = chunk.split("*", 1)
            try:
                coeff = Fraction(num.strip())
            except ValueError:
                raise ForestParseError(f"bad coefficient {num.strip()!r}", text, start) from None
        elif chunk[0].isdigit() and chunk != "1":
            try:
                coeff, lit = Fraction(chunk), "1"
            except ValueError:
                raise ForestParseError(f"bad term {chunk!r}", text, start) from None
        else:
            lit = chunk
        lit = lit.strip()
        if lit.startswith("z(") and lit.endswith(")"):
            lit = lit[2:-1]
        acc = acc + ForestSeries.of(parse_forest(lit), sign * coeff)
        sign = 1
    return acc
