"""Primitive elements and the natural-growth basis built on them."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .algebra import ForestSeries, convolution, primitive_projector, top
from .forest import DEFAULT_LABEL, UNIT, Forest, check_degree, forests_of_degree
from .linalg import independent_rows, invert


@dataclass(frozen=True)
class PtopElement:
    """Natural-growth word ⊤(p_{i1}, ..., p_{ik}) over the primitive basis."""

    word: tuple
    degree: int
    value: ForestSeries

    @property
    def prefix(self) -> tuple:
        return self.word[:-1]

    @property
    def last(self) -> int:
        return self.word[-1]


@dataclass
class PrimitiveBasis:
    alphabet: tuple
    N: int
    primitives: list
    sources: list
    ptop: list
    change_of_basis: dict = field(repr=False)
    duals: dict = field(repr=False)

    def primitive_dimensions(self) -> list:
        dims = [0] * (self.N + 1)
        for p in self.primitives:
            dims[p.max_degree()] += 1
        return dims[1:]

    def primitive_degree(self, i: int) -> int:
        return self.primitives[i].max_degree()

    def dual(self, word: tuple) -> ForestSeries:
        """ρ* as a delta-basis functional; the empty word gives the counit."""
        if not word:
            return ForestSeries.unit()
        return self.duals[word]

    def coefficient(self, word: tuple, h: Forest) -> Fraction:
        """c_ρ(h) = ⟨ρ*, h⟩."""
        return self.dual(word)[h]

    def element(self, word: tuple) -> ForestSeries:
        if not word:
            return ForestSeries.unit()
        return self._by_word[word].value

    @property
    def _by_word(self):
        return {e.word: e for e in self.ptop}

    def words_below(self, degree: int, include_empty: bool = True) -> list:
        """Words of total degree < ``degree``."""
        out = [()] if include_empty and degree > 0 else []
        out += [e.word for e in self.ptop if e.degree < degree]
        return out

    def expand(self, h: Forest) -> ForestSeries:
        """Rewrite a forest in the ⊤ basis, returned as Σ c_ρ(h) ρ evaluated back in forests."""
        acc = ForestSeries()
        for e in self.ptop:
            c = self.coefficient(e.word, h)
            if c:
                acc = acc + e.value * c
        return acc


def _words(prim_degrees: list, N: int) -> list:
    out = []
    def rec(prefix, deg):
        if prefix:
            out.append((tuple(prefix), deg))
        for i, d in enumerate(prim_degrees):
            if deg + d <= N:
                rec(prefix + [i], deg + d)
    rec([], 0)
    out.sort(key=lambda wd: (wd[1], -len(wd[0]), wd[0]))
    return out


@lru_cache(maxsize=None)
def _build(alphabet: tuple, N: int) -> PrimitiveBasis:
    primitives, sources = [], []
    for n in range(1, N + 1):
        forests = forests_of_degree(n, alphabet)
        candidates = [primitive_projector(h) for h in forests]
        rows = [[c[h] for h in forests] for c in candidates]
        for j in independent_rows(rows):
            primitives.append(candidates[j])
            sources.append(forests[j])
    prim_degrees = [p.max_degree() for p in primitives]
    ptop = []
    for word, deg in _words(prim_degrees, N):
        ptop.append(PtopElement(word, deg, top(*(primitives[i] for i in word))))

    change, duals = {}, {}
    for n in range(1, N + 1):
        forests = forests_of_degree(n, alphabet)
        elems = [e for e in ptop if e.degree == n]
        if len(elems) != len(forests):
            raise ArithmeticError(f"degree {n}: {len(elems)} words for {len(forests)} forests")
        M = [[e.value[h] for h in forests] for e in elems]
        change[n] = (tuple(e.word for e in elems), forests, M)
        C = invert(M)  # C[h][rho] = c_rho(h)
        for k, e in enumerate(elems):
            duals[e.word] = ForestSeries({h: C[j][k] for j, h in enumerate(forests)})
    return PrimitiveBasis(alphabet, N, primitives, sources, ptop, change, duals)


def build_primitive_basis(alphabet=(DEFAULT_LABEL,), N: int = 4) -> PrimitiveBasis:
    """Primitives by projecting forests in canonical order, then all ⊤-words up to degree N."""
    check_degree(N)
    return _build(tuple(alphabet), N)


def dual_convolution_check(basis: PrimitiveBasis, word: tuple) -> bool:
    """Whether (ρ'⊤p)* equals ρ'* ⋆ p* for the word ρ = (ρ', p)."""
    if len(word) < 2:
        return True
    lhs = basis.dual(word)
    rhs = convolution(basis.dual(word[:-1]), basis.dual(word[-1:]), cutoff=basis.N)
    return lhs == rhs
