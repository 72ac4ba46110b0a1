"""A walk through the forest Hopf algebra: coproducts, products, primitives."""
from roughbundle.algebra import antipode, convolution, coproduct, grafting, parse_series, primitive_projector
from roughbundle.forest import enumerate_forests, parse_forest
from roughbundle.primitives import build_primitive_basis

F = parse_forest

# forests are bracket literals; [] is a single node, [[]] a two-node ladder
print("forests up to degree 3:", [str(h) for h in enumerate_forests(3)])

# cut off branches on the left, keep the trunk on the right
print("coproduct of [[][]]:", coproduct(F("[[][]]")))
print("antipode of [[]]:   ", antipode(F("[[]]")))

# grafting [] onto every node of [[]]
print("[[]] graft []:", grafting(F("[[]]"), F("[]")))

# the convolution product in both bases
print("[] * []  (delta):", convolution(F("[]"), F("[]")))
print("[] * []  (zeta): ", convolution(F("[]"), F("[]"), basis="zeta").format("z"))
print("[] * [[]] (zeta):", convolution(F("[]"), F("[[]]"), basis="zeta").format("z"))

# projecting onto primitives
for lit in ("[]", "[][]", "[][][]"):
    print(f"pi1({lit}) =", primitive_projector(F(lit)))

B = build_primitive_basis(("",), 4)
print("primitive dimensions by degree:", B.primitive_dimensions())
for e in B.ptop[:6]:
    word = ",".join(f"p{i + 1}" for i in e.word)
    print(f"top({word}) = {e.value}")

# dual functionals let a controlled path's increments be rewritten in this basis
print("dual of (p1,p1):", B.dual((0, 0)).truncate(3))
print("check:", B.dual((0, 0)).truncate(3) == parse_series("2*[][] + [[]]"))
