"""Decorated rooted trees and forests.

Trees keep their children in a canonical order, so two trees that differ
only by a permutation of branches are the same object for equality and
hashing. A forest is a sorted multiset of trees; the empty forest is the
unit of the algebra and prints as ``1``.

Literal grammar::

    tree   := "[" label? forest "]"
    forest := tree*          (whitespace between trees is ignored)

Labels are runs of letters, digits or underscores. The empty label is the
undecorated case.
"""
from __future__ import annotations

from collections import Counter
from functools import lru_cache
from typing import Iterable, Sequence

DEFAULT_LABEL = ""
DEGREE_CAP = 8


class ForestParseError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        pointer = " " * position + "^"
        super().__init__(f"{message} at position {position}\n  {text}\n  {pointer}")


class DegreeCapError(ValueError):
    pass


class Tree:
    __slots__ = ("label", "children", "key", "degree", "_hash")

    def __init__(self, label: str = DEFAULT_LABEL, children: Iterable["Tree"] = ()):
        kids = tuple(sorted(children, key=_tree_key))
        self.label = label
        self.children = kids
        self.key = (label, tuple(c.key for c in kids))
        self.degree = 1 + sum(c.degree for c in kids)
        self._hash = hash(self.key)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, Tree) and self.key == other.key

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"Tree({self})"

    def __str__(self):
        return "[" + self.label + "".join(str(c) for c in self.children) + "]"

    def labels(self) -> Counter:
        out = Counter([self.label])
        for c in self.children:
            out.update(c.labels())
        return out

    def as_forest(self) -> "Forest":
        return Forest((self,))


def _tree_key(t: Tree):
    return t.key


class Forest:
    """Commutative monomial in trees, stored as a sorted tuple."""

    __slots__ = ("trees", "key", "degree", "_hash")

    def __init__(self, trees: Iterable[Tree] = ()):
        ts = tuple(sorted(trees, key=_tree_key))
        self.trees = ts
        self.key = tuple(t.key for t in ts)
        self.degree = sum(t.degree for t in ts)
        self._hash = hash(("F",) + self.key)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, Forest) and self.key == other.key

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    @property
    def sort_key(self):
        return (self.degree, self.key)

    def __len__(self):
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)

    def __bool__(self):
        # the empty forest is a legitimate value, never falsy by accident
        return True

    def __repr__(self):
        return f"Forest({self})"

    def __str__(self):
        if not self.trees:
            return "1"
        return "".join(str(t) for t in self.trees)

    def __mul__(self, other: "Forest") -> "Forest":
        if isinstance(other, Tree):
            other = Forest((other,))
        if not isinstance(other, Forest):
            return NotImplemented
        return Forest(self.trees + other.trees)

    @property
    def is_unit(self) -> bool:
        return not self.trees

    @property
    def is_tree(self) -> bool:
        return len(self.trees) == 1

    def labels(self) -> Counter:
        out = Counter()
        for t in self.trees:
            out.update(t.labels())
        return out


UNIT = Forest()


def graft_root(h: Forest, a: str = DEFAULT_LABEL) -> Tree:
    """Attach every tree of ``h`` to a new root labelled ``a``."""
    return Tree(a, h.trees)


def as_forest(x) -> Forest:
    if isinstance(x, Forest):
        return x
    if isinstance(x, Tree):
        return Forest((x,))
    if isinstance(x, str):
        return parse_forest(x)
    raise TypeError(f"cannot interpret {x!r} as a forest")


# ---------------------------------------------------------------- parsing

def _is_label_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def fail(self, message):
        raise ForestParseError(message, self.text, self.pos)

    def tree(self) -> Tree:
        if self.peek() != "[":
            self.fail("expected '['")
        self.pos += 1
        start = self.pos
        while self.pos < len(self.text) and _is_label_char(self.text[self.pos]):
            self.pos += 1
        label = self.text[start:self.pos]
        children = self.trees_until("]")
        if self.peek() != "]":
            self.fail("expected ']'")
        self.pos += 1
        return Tree(label, children)

    def trees_until(self, stop: str) -> list:
        out = []
        while True:
            self.skip_ws()
            ch = self.peek()
            if ch == "[":
                out.append(self.tree())
            elif ch == stop:
                return out
            else:
                self.fail(f"unexpected {ch!r}" if ch else "unexpected end of input")


def parse_forest(text: str) -> Forest:
    """Parse a forest literal such as ``"[a[b][c]] []"`` or ``"1"``."""
    stripped = text.strip()
    if stripped == "1":
        return UNIT
    r = _Reader(text)
    trees = r.trees_until("")
    return Forest(trees)


def parse_tree(text: str) -> Tree:
    f = parse_forest(text)
    if not f.is_tree:
        raise ForestParseError("expected exactly one tree", text, 0)
    return f.trees[0]


# ------------------------------------------------------------ enumeration

def check_degree(n: int, cap: int = DEGREE_CAP):
    if n > cap:
        raise DegreeCapError(f"degree {n} exceeds the safety cap {cap}")


@lru_cache(maxsize=None)
def _trees_of_degree(n: int, alphabet: tuple) -> tuple:
    if n < 1:
        return ()
    out = [Tree(a, f.trees) for a in alphabet for f in _forests_of_degree(n - 1, alphabet)]
    return tuple(sorted(out, key=_tree_key))


@lru_cache(maxsize=None)
def _forests_bounded(n: int, alphabet: tuple, smallest: tuple | None) -> tuple:
    """Forests of degree ``n`` (as sorted tree tuples) whose trees all have key >= smallest."""
    if n == 0:
        return ((),)
    out = []
    for k in range(1, n + 1):
        for t in _trees_of_degree(k, alphabet):
            if smallest is not None and t.key < smallest:
                continue
            for rest in _forests_bounded(n - k, alphabet, t.key):
                out.append((t,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _forests_of_degree(n: int, alphabet: tuple) -> tuple:
    return tuple(sorted((Forest(ts) for ts in _forests_bounded(n, alphabet, None)), key=lambda f: f.key))


def forests_of_degree(n: int, alphabet: Sequence[str] = (DEFAULT_LABEL,), cap: int = DEGREE_CAP) -> tuple:
    check_degree(n, cap)
    return _forests_of_degree(n, tuple(alphabet))


def trees_of_degree(n: int, alphabet: Sequence[str] = (DEFAULT_LABEL,), cap: int = DEGREE_CAP) -> tuple:
    check_degree(n, cap)
    return _trees_of_degree(n, tuple(alphabet))


def enumerate_forests(n: int, alphabet: Sequence[str] = (DEFAULT_LABEL,), cap: int = DEGREE_CAP) -> tuple:
    """All forests of degree <= n in canonical order, starting with the unit."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    check_degree(n, cap)
    out = []
    for k in range(n + 1):
        out.extend(_forests_of_degree(k, tuple(alphabet)))
    return tuple(out)


def enumerate_trees(n: int, alphabet: Sequence[str] = (DEFAULT_LABEL,), cap: int = DEGREE_CAP) -> tuple:
    check_degree(n, cap)
    out = []
    for k in range(1, n + 1):
        out.extend(_trees_of_degree(k, tuple(alphabet)))
    return tuple(out)


def default_alphabet(d: int) -> tuple:
    """Labels used for a d-dimensional driver: undecorated when d == 1."""
    if d == 1:
        return (DEFAULT_LABEL,)
    return tuple(str(i + 1) for i in range(d))
