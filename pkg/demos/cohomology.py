"""Simplicial cohomology with localized coefficients, named and triangulated."""

from ssatdual.abgroup import Z, Zloc, Zmod, is_isomorphic
from ssatdual.topology import RealProjectivePlane, Torus, Triangulated, cohomology, integral_homology, simplicial_homology, triangulate

for X in (RealProjectivePlane(), Torus(2)):
    T = triangulate(X)
    for k in range(X.dim + 1):
        named, tri = integral_homology(X, k), simplicial_homology(T, k)
        print(f"H_{k}({X.name}) = {named}   triangulated: {tri}   agree: {is_isomorphic(named, tri)}")

rp2 = Triangulated(triangulate(RealProjectivePlane()), "RP2 (6 vertices)")
for M in (Z(), Zmod(2), Zloc({2}), Zloc({3})):
    print(f"H^2(RP2; {M}) = {cohomology(rp2, 2, M)}")
