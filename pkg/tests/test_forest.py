import pytest

from roughbundle.forest import (
    UNIT, DegreeCapError, Forest, ForestParseError, Tree, default_alphabet, enumerate_forests,
    enumerate_trees, forests_of_degree, graft_root, parse_forest, parse_tree, trees_of_degree,
)

from oracles import brute_forests


def test_unit_prints_as_one():
    assert str(UNIT) == "1"
    assert parse_forest("1") == UNIT
    assert UNIT.degree == 0 and UNIT.is_unit


@pytest.mark.parametrize("text", ["[]", "[[]]", "[][[]]", "[[][]]", "[a[b][c]]", "[1][2[1]]"])
def test_literal_round_trip(text):
    assert str(parse_forest(text)) == text


def test_children_are_canonical():
    assert parse_forest("[[[]][]]") == parse_forest("[[][[]]]")
    assert parse_forest("[[]] []") == parse_forest("[][[]]")
    assert str(parse_forest(" [ [ ] ] [ ] ")) == "[][[]]"
    assert hash(parse_forest("[b][a]")) == hash(parse_forest("[a][b]"))


@pytest.mark.parametrize("bad, pos", [("[[]", 3), ("[]]", 2), ("[x", 2), ("]", 0)])
def test_parse_error_reports_position(bad, pos):
    with pytest.raises(ForestParseError) as err:
        parse_forest(bad)
    assert err.value.position == pos


def test_parse_tree_rejects_forests():
    assert parse_tree("[[]]") == Tree("", [Tree()])
    with pytest.raises(ForestParseError):
        parse_tree("[][]")


def test_graft_root():
    assert str(graft_root(parse_forest("[][]"))) == "[[][]]"
    assert str(graft_root(UNIT)) == "[]"
    assert str(graft_root(parse_forest("[[]]"))) == "[[[]]]"
    assert graft_root(parse_forest("[1]"), "2").degree == 2


def test_degree_and_product():
    h = parse_forest("[][[]]")
    assert h.degree == 3
    assert h * UNIT == h
    assert parse_forest("[]") * parse_forest("[[]]") == h
    assert len(h) == 2 and not h.is_tree


def test_small_enumerations():
    assert [str(h) for h in enumerate_forests(1)] == ["1", "[]"]
    assert [str(h) for h in forests_of_degree(2)] == ["[][]", "[[]]"]


def test_counts_match_brute_force_single_label():
    for n in range(1, 6):
        assert set(forests_of_degree(n)) == {parse_forest(c) for c in brute_forests(n)}
    assert [len(forests_of_degree(n)) for n in range(1, 6)] == [1, 2, 4, 9, 20]
    assert len(enumerate_forests(5)) == 37  # 36 nonempty plus the unit


def test_counts_match_brute_force_two_labels():
    for n in range(1, 5):
        want = {parse_forest(c) for c in brute_forests(n, ("1", "2"))}
        assert set(forests_of_degree(n, ("1", "2"))) == want


def test_tree_counts_are_shifted_forest_counts():
    # rooted trees with n+1 nodes correspond to forests with n nodes
    for n in range(1, 6):
        assert len(trees_of_degree(n + 1)) == len(forests_of_degree(n))
    assert all(Forest((t,)).is_tree for t in enumerate_trees(4))


def test_enumeration_is_sorted_and_unique():
    fs = enumerate_forests(5)
    assert len(set(fs)) == len(fs)
    assert list(fs) == sorted(fs, key=lambda h: h.sort_key)


def test_degree_cap():
    with pytest.raises(DegreeCapError):
        enumerate_forests(9)
    assert len(forests_of_degree(3, cap=3)) == 4


def test_default_alphabet():
    assert default_alphabet(1) == ("",)
    assert default_alphabet(3) == ("1", "2", "3")
