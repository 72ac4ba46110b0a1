"""Sparse multivariate polynomials with rational coefficients."""
from __future__ import annotations

import itertools
from collections import defaultdict
from fractions import Fraction

import numpy as np


class Poly:
    __slots__ = ("nvars", "terms", "_compiled")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        acc = defaultdict(Fraction)
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError("exponent vector has the wrong length")
            acc[exps] += Fraction(c)
        self.terms = {e: c for e, c in acc.items() if c != 0}
        self._compiled = None

    @classmethod
    def constant(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, k: int) -> "Poly":
        e = [0] * nvars
        e[k] = 1
        return cls(nvars, {tuple(e): 1})

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(self.nvars, other)
        return isinstance(other, Poly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(self.nvars, other)
        acc = dict(self.terms)
        for e, c in other.terms.items():
            acc[e] = acc.get(e, 0) + c
        return Poly(self.nvars, acc)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly(self.nvars, {e: c * other for e, c in self.terms.items()})
        acc = defaultdict(Fraction)
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                acc[tuple(a + b for a, b in zip(e1, e2))] += c1 * c2
        return Poly(self.nvars, acc)

    __rmul__ = __mul__

    def diff(self, k: int) -> "Poly":
        acc = {}
        for e, c in self.terms.items():
            if e[k]:
                e2 = list(e)
                e2[k] -= 1
                acc[tuple(e2)] = c * e[k]
        return Poly(self.nvars, acc)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, y):
        """Evaluate; Fractions stay exact, floats go through numpy."""
        if all(isinstance(v, (int, Fraction)) for v in np.ravel(y)):
            return sum((c * _monomial(e, y) for e, c in self.terms.items()), Fraction(0))
        if self._compiled is None:
            if self.terms:
                exps = np.array(list(self.terms.keys()), dtype=float)
                coefs = np.array([float(c) for c in self.terms.values()])
            else:
                exps, coefs = np.zeros((0, self.nvars)), np.zeros(0)
            self._compiled = (exps, coefs)
        exps, coefs = self._compiled
        y = np.asarray(y, dtype=float)
        mon = np.prod(y[..., None, :] ** exps, axis=-1)
        return mon @ coefs

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"y{k}^{p}" if p > 1 else f"y{k}" for k, p in enumerate(e) if p)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def to_json(self) -> list:
        return [[list(e), str(c)] for e, c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, nvars: int, data) -> "Poly":
        return cls(nvars, {tuple(e): Fraction(c) for e, c in data})


def _monomial(e, y):
    out = Fraction(1)
    for p, v in zip(e, y):
        if p:
            out *= Fraction(v) ** p
    return out


def partial(p: Poly, ks: tuple) -> Poly:
    for k in ks:
        p = p.diff(k)
    return p


def directional(p: Poly, vectors: list) -> Poly:
    """D^m p : (v_1, ..., v_m) with each v_j a vector of polynomials held fixed."""
    n = p.nvars
    acc = Poly(n)
    for ks in itertools.product(range(n), repeat=len(vectors)):
        d = partial(p, ks)
        if d.is_zero():
            continue
        term = d
        for k, v in zip(ks, vectors):
            term = term * v[k]
            if term.is_zero():
                break
        acc = acc + term
    return acc


def identity_vector(n: int) -> list:
    return [Poly.variable(n, k) for k in range(n)]
