"""Classical T-duality for continuous-trace bundles over tori."""

from ssatdual.calg import bundle, mathai_rosenberg_dual
from ssatdual.catalog import SSAlgebra
from ssatdual.topology import Circle, Product, Sphere, Torus

C = SSAlgebra.complex()
for X, k in [(Torus(3), 0), (Torus(3), 5), (Product((Sphere(2), Circle())), 1)]:
    mr = mathai_rosenberg_dual(bundle(X, C, {3: (k,)}))
    flux = mr.flux.label() if mr.determined else "underdetermined"
    print(f"{X.name} with H = {k}: dual space {mr.space}, c1# = {mr.c1_dual.label()}, flux {flux}")
    for c in mr.constraints:
        print(f"    constraint: {c}")
