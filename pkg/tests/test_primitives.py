from fractions import Fraction

import pytest
import sympy

from roughbundle import goldens
from roughbundle.algebra import ForestSeries, TensorSeries, parse_series, reduced_coproduct, top
from roughbundle.forest import forests_of_degree
from roughbundle.linalg import independent_rows, invert, rank
from roughbundle.primitives import build_primitive_basis, dual_convolution_check

B4 = build_primitive_basis(("",), 4)
B3_PAIR = build_primitive_basis(("1", "2"), 3)


def _reduced(x: ForestSeries) -> TensorSeries:
    out = TensorSeries()
    for f, c in x.terms.items():
        out = out + reduced_coproduct(f) * c
    return out


def test_dimensions_and_word_count():
    assert tuple(B4.primitive_dimensions()) == goldens.PRIMITIVE_DIMENSIONS
    assert len(B4.ptop) == 1 + 2 + 4 + 9 == 16


def test_primitives_match_tables():
    assert [str(s) for s in B4.sources] == [src for src, _ in goldens.PRIMITIVES]
    for p, (_, want) in zip(B4.primitives, goldens.PRIMITIVES):
        assert p == parse_series(want)


@pytest.mark.parametrize("basis", [B4, B3_PAIR], ids=["single", "pair"])
def test_every_primitive_is_primitive(basis):
    for p in basis.primitives:
        assert len(_reduced(p)) == 0


def _dims_from_forest_counts(alphabet, N):
    # words over primitives must be equinumerous with forests: W(n) = Σ_k l_k W(n-k)
    F = [1] + [len(forests_of_degree(n, alphabet)) for n in range(1, N + 1)]
    W, dims = [1], []
    for n in range(1, N + 1):
        partial = sum(dims[k - 1] * W[n - k] for k in range(1, n))
        dims.append(F[n] - partial)
        W.append(F[n])
    return dims


def test_dimensions_agree_with_forest_counts():
    assert B4.primitive_dimensions() == _dims_from_forest_counts(("",), 4) == [1, 1, 1, 2]
    assert B3_PAIR.primitive_dimensions() == _dims_from_forest_counts(("1", "2"), 3) == [2, 3, 6]


@pytest.mark.parametrize("word, want, printed", goldens.TOP_BASIS)
def test_top_table(word, want, printed):
    got = top(*(B4.primitives[i] for i in word))
    assert got == parse_series(want)
    assert B4.element(word) == got
    if printed is not None:
        # the printed literal is not even homogeneous
        assert len(parse_series(printed).degrees()) > 1


@pytest.mark.parametrize("basis", [B4, B3_PAIR], ids=["single", "pair"])
def test_duals_are_biorthogonal(basis):
    for e in basis.ptop:
        for f in basis.ptop:
            pairing = sum((c * f.value[h] for h, c in basis.dual(e.word).terms.items()), Fraction(0))
            assert pairing == (1 if e.word == f.word else 0)


def test_change_of_basis_inverse_against_sympy():
    for n, (words, forests, M) in B4.change_of_basis.items():
        inv = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row] for row in M]).inv()
        for k, w in enumerate(words):
            for j, h in enumerate(forests):
                c = B4.coefficient(w, h)
                assert sympy.Rational(c.numerator, c.denominator) == inv[j, k]


@pytest.mark.parametrize("basis", [B4, B3_PAIR], ids=["single", "pair"])
def test_dual_of_word_is_convolution_of_duals(basis):
    for e in basis.ptop:
        assert dual_convolution_check(basis, e.word)


@pytest.mark.parametrize("basis", [B4, B3_PAIR], ids=["single", "pair"])
def test_telescoping_coproduct_of_top_words(basis):
    # Δ'⊤(p1..pn) = Σ_j ⊤(p1..pj) ⊗ ⊤(p_{j+1}..pn)
    for e in basis.ptop:
        w = e.word
        want = TensorSeries()
        for j in range(1, len(w)):
            want = want + TensorSeries.tensor(basis.element(w[:j]), basis.element(w[j:]))
        assert _reduced(e.value) == want, w


def test_expand_reconstructs_forests():
    for n in range(1, 5):
        for h in forests_of_degree(n):
            assert B4.expand(h) == ForestSeries.of(h)


def test_words_below():
    assert B4.words_below(1) == [()]
    assert B4.words_below(0) == []
    assert set(B4.words_below(3, include_empty=False)) == {(0,), (1,), (0, 0)}


def test_linalg_helpers():
    rows = [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)], [Fraction(0), Fraction(1)]]
    assert independent_rows(rows) == [0, 2]
    assert rank(rows) == 2
    inv = invert([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]])
    assert inv == [[1, -1], [-1, 2]]
    with pytest.raises(ValueError):
        invert([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]])
