"""Reference tables in forest-literal form.

Star products are stated in the zeta basis (``z`` atoms) or the delta basis.
Level-4 natural-growth entries carry the corrected forms; the ``printed``
field keeps the literal as originally tabulated where it differs.
"""
from __future__ import annotations

ZETA_PRODUCTS = [
    ("[]", "[]", "z([][]) + z([[]])"),
    ("[][]", "[]", "z([][][]) + 2*z([][[]]) + z([[][]])"),
    ("[]", "[][]", "z([][][]) + 2*z([][[]])"),
    ("[[]]", "[]", "z([][[]]) + z([[[]]])"),
    ("[]", "[[]]", "z([][[]]) + z([[][]]) + z([[[]]])"),
]

DELTA_PRODUCTS = [
    ("[]", "[]", "2*[][] + [[]]"),
    ("[][]", "[]", "3*[][][] + [][[]] + [[][]]"),
    ("[i]", "[j]", "[i][j] + [j[i]]"),
    ("[i]", "[i]", "2*[i][i] + [i[i]]"),
]

PRIMITIVES = [
    ("[]", "[]"),
    ("[][]", "[][] - 2*[[]]"),
    ("[][][]", "[][][] - 3*[][[]] + 3*[[[]]]"),
    ("[][][][]", "[][][][] - 4*[][][[]] + 4*[][[[]]] - 4*[[[[]]]] + 4*[[]][[]] + 2*[[][][]]"
                 " - 4*[[][[]]] + 2*[[[][]]] - 2*[][[][]]"),
    ("[][][[]]", "[[][][]] + [[]][[]] - 2*[[][[]]] + [[[][]]] - [][[][]]"),
]

# (word over primitive indices, expected value, literal as printed when it differs)
TOP_BASIS = [
    ((0, 0), "[[]]", None),
    ((0, 0, 0), "[[[]]]", None),
    ((1, 0), "[[][]] - 2*[[[]]]", None),
    ((0, 1), "[][[]] - [[[]]] - [[][]]", None),
    ((0, 0, 1), "[][[[]]] - [[[[]]]] - [[][[]]]", "[][[[]]] - [[[]]] - [[][[]]]"),
    ((0, 1, 0), "[[][[]]] - [[[[]]]] - [[[][]]]", "[[][[]]] - [[[]]] - [[[][]]]"),
    ((1, 0, 0), "[[[][]]] - 2*[[[[]]]]", None),
    ((1, 1), "[][[][]] - [[[][]]] - [[][][]] - 2*[][[[]]] + 2*[[[[]]]] + 2*[[][[]]]", None),
    ((2, 0), "[[][][]] - 3*[[][[]]] + 3*[[[[]]]]", None),
    ((0, 2), "[][][[]] - [[]][[]] - [][[[]]] - [][[][]] + [[[[]]]] + [[[][]]] + [[][[]]]",
     "[][][][[]] - [[]][[]] - [][[[]]] - [][[][]] + [[[[]]]] + [[[][]]] + [[][[]]]"),
    ((0, 0, 0, 0), "[[[[]]]]", None),
]

PRIMITIVE_DIMENSIONS = (1, 1, 1, 2)
