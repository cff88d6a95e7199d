"""K-theory of corners and bundles, with the derivation trace."""

from ssatdual.abgroup import Z, Zmod
from ssatdual.calg import Fiber, FunctionsOn, Tensor, bundle
from ssatdual.catalog import KPair, SSAlgebra, parse_algebra
from ssatdual.ktheory import k_of_expr, torsion_diamond_k
from ssatdual.topology import Circle, Sphere, Torus

K = Fiber(SSAlgebra.complex(), True)
EXPRS = [
    Tensor((FunctionsOn(Torus(2)), Fiber(parse_algebra("UHF:2")), K)),
    Tensor((FunctionsOn(Sphere(2)), FunctionsOn(Circle()), Fiber(SSAlgebra.jiang_su()), K)),
    bundle(Circle(), parse_algebra("UHF:2")),
    bundle(Circle(), parse_algebra("UHF:2"), {1: (1,)}),
]

for e in EXPRS:
    res = k_of_expr(e)
    print(f"K({e}) = {res}")
    for t in res.trace:
        print(f"    {t}")
    for n in res.notes:
        print(f"    note: {n}")

print("torsion diamond with K(B^alpha) = (Z, Z/2):", torsion_diamond_k(KPair(Z(), Zmod(2))))
