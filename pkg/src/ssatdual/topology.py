"""Finite spaces, integral homology, and cohomology with S-local coefficients.

Named spaces (point, circle, spheres, tori, the real projective plane and
finite products of these) use closed formulas; anything else goes through
an explicit triangulation and Smith normal form.  The triangulations of the
named spaces are kept as an independent check of the formulas.

>>> print(integral_homology(RealProjectivePlane(), 1))
Z/2
>>> from ssatdual.abgroup import Zloc
>>> print(cohomology(Torus(3), 3, Zloc({2})))
Z[1/2]
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd

from .abgroup import (
    IntMatrix,
    SLocalGroup,
    Z,
    direct_sum,
    ext_into,
    hom_into,
    is_unit_at,
    smith_normal_form,
    tensor,
    tor,
    trivial,
)
from .errors import UnsupportedError, ValidationError

__all__ = [
    "SimplicialComplex",
    "Space",
    "Point",
    "Circle",
    "Sphere",
    "Torus",
    "RealProjectivePlane",
    "Product",
    "Triangulated",
    "FiberProduct",
    "NCSpace",
    "CircleBundle",
    "CohClass",
    "class_in",
    "chain_complex",
    "simplicial_homology",
    "integral_homology",
    "cohomology",
    "kunneth_homology",
    "kunneth_blocks",
    "split_circle",
    "gysin_pushforward",
    "triangulate",
    "torus_triangulation",
    "parse_space",
    "has_circle_action",
]


# ---------------------------------------------------------------------------
# Simplicial complexes


@dataclass(frozen=True)
class SimplicialComplex:
    """A finite abstract simplicial complex given by its maximal simplices."""

    n_vertices: int
    maximal: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n_vertices < 0:
            raise ValidationError("vertex count must be nonnegative")
        cleaned = []
        for s in self.maximal:
            s = tuple(int(v) for v in s)
            if not s:
                raise ValidationError("empty simplex")
            if len(set(s)) != len(s):
                raise ValidationError(f"simplex {s} repeats a vertex")
            if any(v < 0 or v >= self.n_vertices for v in s):
                raise ValidationError(f"simplex {s} uses a vertex outside 0..{self.n_vertices - 1}")
            cleaned.append(tuple(sorted(s)))
        object.__setattr__(self, "maximal", tuple(sorted(set(cleaned))))

    @property
    def dim(self) -> int:
        return max((len(s) for s in self.maximal), default=0) - 1

    def simplices(self, k: int) -> list[tuple[int, ...]]:
        """All k-simplices, sorted lexicographically."""
        return list(_faces(self)[k]) if 0 <= k < len(_faces(self)) else []

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * len(self.simplices(k)) for k in range(self.dim + 1))


@lru_cache(maxsize=64)
def _faces(K: SimplicialComplex) -> tuple[tuple[tuple[int, ...], ...], ...]:
    by_dim: list[set] = [set() for _ in range(K.dim + 1)]
    for s in K.maximal:
        for r in range(1, len(s) + 1):
            by_dim[r - 1].update(itertools.combinations(s, r))
    return tuple(tuple(sorted(d)) for d in by_dim)


def chain_complex(K: SimplicialComplex) -> list[IntMatrix]:
    """Boundary matrices ``[d_0, d_1, ..., d_dim]``.

    ``d_k`` maps k-chains to (k-1)-chains (``d_0`` is the zero map to the
    zero group) with the convention ``d[v_0..v_k] = sum (-1)^i [.. v_i omitted ..]``
    and simplices ordered lexicographically.

    >>> chain_complex(SimplicialComplex(3, ((0, 1, 2),)))[2].tolist()
    [[1], [-1], [1]]
    """
    faces = _faces(K)
    mats = [IntMatrix.zeros(0, len(faces[0]) if faces else 0)]
    for k in range(1, len(faces)):
        index = {s: i for i, s in enumerate(faces[k - 1])}
        rows = [[0] * len(faces[k]) for _ in faces[k - 1]]
        for j, s in enumerate(faces[k]):
            for i in range(len(s)):
                rows[index[s[:i] + s[i + 1:]]][j] += (-1) ** i
        mats.append(IntMatrix.of(rows, len(faces[k])))
    return mats


@lru_cache(maxsize=64)
def _simplicial_homology_all(K: SimplicialComplex) -> tuple[SLocalGroup, ...]:
    d = chain_complex(K)
    ranks, diags = [], []
    for m in d:
        _, D, _ = smith_normal_form(m)
        nz = [x for x in D.diagonal() if x]
        ranks.append(len(nz))
        diags.append(nz)
    ranks.append(0)
    diags.append([])
    out = []
    for k in range(len(d)):
        n_k = d[k].cols
        free = n_k - ranks[k] - ranks[k + 1]
        out.append(SLocalGroup(free, tuple(x for x in diags[k + 1] if x > 1)))
    return tuple(out)


def simplicial_homology(K: SimplicialComplex, k: int) -> SLocalGroup:
    if k < 0:
        return trivial()
    groups = _simplicial_homology_all(K)
    return groups[k] if k < len(groups) else trivial()


# ---------------------------------------------------------------------------
# Spaces


class Space:
    """Base class of the space variants."""

    @property
    def dim(self) -> int:  # pragma: no cover - overridden
        raise NotImplementedError

    @property
    def name(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Point(Space):
    @property
    def dim(self):
        return 0

    @property
    def name(self):
        return "pt"


@dataclass(frozen=True)
class Circle(Space):
    @property
    def dim(self):
        return 1

    @property
    def name(self):
        return "S1"


@dataclass(frozen=True)
class Sphere(Space):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("sphere dimension must be at least 1")

    @property
    def dim(self):
        return self.n

    @property
    def name(self):
        return f"S{self.n}"


@dataclass(frozen=True)
class Torus(Space):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("torus dimension must be at least 1")

    @property
    def dim(self):
        return self.n

    @property
    def name(self):
        return f"T{self.n}"


@dataclass(frozen=True)
class RealProjectivePlane(Space):
    @property
    def dim(self):
        return 2

    @property
    def name(self):
        return "RP2"


@dataclass(frozen=True)
class Product(Space):
    factors: tuple[Space, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValidationError("a product needs at least one factor")
        flat = []
        for f in self.factors:
            flat.extend(f.factors if isinstance(f, Product) else (f,))
        object.__setattr__(self, "factors", tuple(flat))

    @property
    def dim(self):
        return sum(f.dim for f in self.factors)

    @property
    def name(self):
        return " x ".join(f.name for f in self.factors)


@dataclass(frozen=True)
class Triangulated(Space):
    complex: SimplicialComplex
    label: str = "K"

    @property
    def dim(self):
        return self.complex.dim

    @property
    def name(self):
        return self.label


@dataclass(frozen=True)
class FiberProduct(Space):
    """``left x_base right``; homology only through an explicit triangulation."""

    left: Space
    right: Space
    base: Space
    triangulation: SimplicialComplex | None = None

    @property
    def dim(self):
        return self.left.dim + self.right.dim - self.base.dim

    @property
    def name(self):
        return f"{self.left.name} x_{self.base.name} {self.right.name}"


@dataclass(frozen=True)
class NCSpace(Space):
    """Marker for a noncommutative spectrum with no classical model."""

    tag: str

    @property
    def dim(self):
        raise UnsupportedError(f"noncommutative space {self.tag} has no dimension")

    @property
    def name(self):
        return f"NC[{self.tag}]"


@dataclass(frozen=True)
class CircleBundle(Space):
    """Principal circle bundle over ``base`` with first Chern class ``c1``.

    Homology is known only for the trivial bundle (the product with a
    circle) or when supplied in ``homology`` as one group per degree.
    """

    base: Space
    c1: "CohClass"
    homology: tuple[SLocalGroup, ...] | None = None

    def __post_init__(self):
        if self.c1.degree != 2:
            raise ValidationError("the Chern class of a circle bundle has degree 2")

    def is_trivial(self) -> bool:
        return self.c1.is_zero()

    def total_space(self) -> Space:
        return Product((self.base, Circle())) if self.is_trivial() else self

    @property
    def dim(self):
        return self.base.dim + 1

    @property
    def name(self):
        if self.is_trivial():
            return f"{self.base.name} x S1"
        return f"P({self.base.name}, c1={self.c1.label()})"


def has_circle_action(X: Space) -> bool:
    """True when ``X`` carries an evident free circle action."""
    if isinstance(X, (Circle, Torus, CircleBundle)):
        return True
    if isinstance(X, Sphere):
        return X.n == 1
    if isinstance(X, Product):
        return any(has_circle_action(f) for f in X.factors)
    return False


# ---------------------------------------------------------------------------
# Triangulations


def sphere_triangulation(n: int) -> SimplicialComplex:
    """Boundary of the (n+1)-simplex."""
    return SimplicialComplex(n + 2, tuple(itertools.combinations(range(n + 2), n + 1)))


RP2_TRIANGULATION = SimplicialComplex(
    6,
    (
        (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
        (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5),
    ),
)


def torus_triangulation(n: int, m: int = 3) -> SimplicialComplex:
    """Freudenthal triangulation of the n-torus on an ``m^n`` vertex grid."""
    if m < 3:
        raise ValidationError("torus triangulation needs at least 3 vertices per axis")
    pts = list(itertools.product(range(m), repeat=n))
    index = {p: i for i, p in enumerate(pts)}
    simplices = []
    for p in pts:
        for perm in itertools.permutations(range(n)):
            cur = list(p)
            verts = [index[tuple(cur)]]
            for axis in perm:
                cur[axis] = (cur[axis] + 1) % m
                verts.append(index[tuple(cur)])
            simplices.append(tuple(verts))
    return SimplicialComplex(len(pts), tuple(simplices))


def triangulate(X: Space) -> SimplicialComplex:
    """An explicit triangulation for the named spaces that have one on file."""
    if isinstance(X, Point):
        return SimplicialComplex(1, ((0,),))
    if isinstance(X, Circle):
        return sphere_triangulation(1)
    if isinstance(X, Sphere):
        return sphere_triangulation(X.n)
    if isinstance(X, Torus):
        return torus_triangulation(X.n)
    if isinstance(X, RealProjectivePlane):
        return RP2_TRIANGULATION
    if isinstance(X, Triangulated):
        return X.complex
    if isinstance(X, FiberProduct) and X.triangulation is not None:
        return X.triangulation
    raise UnsupportedError(f"no triangulation on file for {X.name}")


# ---------------------------------------------------------------------------
# Homology and cohomology


def integral_homology(X: Space, k: int) -> SLocalGroup:
    """``H_k(X; Z)``."""
    if k < 0:
        return trivial()
    if isinstance(X, Point):
        return Z() if k == 0 else trivial()
    if isinstance(X, Circle) or (isinstance(X, Sphere)):
        n = 1 if isinstance(X, Circle) else X.n
        return Z() if k in (0, n) else trivial()
    if isinstance(X, Torus):
        return SLocalGroup(comb(X.n, k))
    if isinstance(X, RealProjectivePlane):
        return {0: Z(), 1: SLocalGroup(0, (2,))}.get(k, trivial())
    if isinstance(X, Product):
        first, rest = X.factors[0], X.factors[1:]
        if not rest:
            return integral_homology(first, k)
        return kunneth_homology(first, Product(rest) if len(rest) > 1 else rest[0], k)
    if isinstance(X, Triangulated):
        return simplicial_homology(X.complex, k)
    if isinstance(X, FiberProduct):
        if X.triangulation is None:
            raise UnsupportedError(f"fiber product {X.name} needs an explicit triangulation")
        return simplicial_homology(X.triangulation, k)
    if isinstance(X, CircleBundle):
        if X.is_trivial():
            return integral_homology(X.total_space(), k)
        if X.homology is not None:
            return X.homology[k] if k < len(X.homology) else trivial()
        raise UnsupportedError(
            f"homology of the nontrivial circle bundle {X.name} must be supplied explicitly"
        )
    if isinstance(X, NCSpace):
        raise UnsupportedError(f"{X.name} has no classical homology")
    raise ValidationError(f"unknown space {X!r}")


def kunneth_homology(X: Space, Y: Space, k: int) -> SLocalGroup:
    """``H_k(X x Y)`` from the Kunneth formula."""
    parts = []
    for i in range(k + 1):
        parts.append(tensor(integral_homology(X, i), integral_homology(Y, k - i)))
    for i in range(k):
        parts.append(tor(integral_homology(X, i), integral_homology(Y, k - 1 - i)))
    return direct_sum(*parts)


def _coefficients(M) -> SLocalGroup:
    if isinstance(M, SLocalGroup):
        return M
    as_coeff = getattr(M, "as_coefficients", None)
    if as_coeff is None:
        raise ValidationError(f"cannot use {M!r} as coefficients")
    return as_coeff()


def cohomology(X: Space, k: int, M) -> SLocalGroup:
    """``H^k(X; M) = Hom(H_k, M) + Ext(H_{k-1}, M)``."""
    M = _coefficients(M)
    if k < 0:
        return trivial()
    return direct_sum(hom_into(integral_homology(X, k), M), ext_into(integral_homology(X, k - 1), M))


def split_circle(X: Space) -> Space | None:
    """``W`` when ``X`` is presented as ``W x S1`` (circle last), else None."""
    if isinstance(X, Circle) or (isinstance(X, Sphere) and X.n == 1):
        return Point()
    if isinstance(X, Torus):
        return Point() if X.n == 1 else (Circle() if X.n == 2 else Torus(X.n - 1))
    if isinstance(X, Product):
        last = X.factors[-1]
        if split_circle(last) == Point():
            rest = X.factors[:-1]
            return rest[0] if len(rest) == 1 else Product(rest)
        return None
    if isinstance(X, CircleBundle) and X.is_trivial():
        return X.base
    return None


def kunneth_blocks(X: Space, k: int, M) -> tuple[SLocalGroup, SLocalGroup]:
    """``(H^k(W;M), H^{k-1}(W;M))`` for ``X = W x S1``.

    The first block holds classes ``a x 1`` and the second ``b x dtheta``.
    """
    W = split_circle(X)
    if W is None:
        raise UnsupportedError(f"{X.name} is not presented as a product with a circle")
    return cohomology(W, k, M), cohomology(W, k - 1, M)


# ---------------------------------------------------------------------------
# Cohomology classes


@dataclass(frozen=True)
class CohClass:
    """An element of a cohomology group, stored in block coordinates.

    ``summands`` is a tuple of groups whose direct sum is the cohomology
    group; ``vector`` lists coordinates over their generators in order.
    Free coordinates may be fractions whose denominators are units of the
    coefficient ring; torsion coordinates are reduced modulo their order.
    """

    degree: int
    summands: tuple[SLocalGroup, ...]
    vector: tuple = ()

    def __post_init__(self):
        if self.degree < 0:
            raise ValidationError("cohomology degree must be nonnegative")
        orders = [o for g in self.summands for o in g.orders]
        prims = [g.inverted_primes for g in self.summands for _ in g.orders]
        vec = tuple(self.vector) if self.vector else (0,) * len(orders)
        if len(vec) != len(orders):
            raise ValidationError(
                f"class vector has length {len(vec)}, the group has {len(orders)} generators"
            )
        out = []
        for x, o, S in zip(vec, orders, prims):
            x = Fraction(x)
            if o:
                if x.denominator != 1:
                    raise ValidationError("torsion coordinates must be integers")
                out.append(int(x) % o)
            else:
                if x.denominator != 1 and not is_unit_at(x.denominator, S):
                    raise ValidationError(f"coordinate {x} is not in the coefficient ring")
                out.append(int(x) if x.denominator == 1 else x)
        object.__setattr__(self, "vector", tuple(out))

    @classmethod
    def zero(cls, degree: int, *summands: SLocalGroup) -> "CohClass":
        return cls(degree, tuple(summands))

    @property
    def group(self) -> SLocalGroup:
        return direct_sum(*self.summands) if self.summands else trivial()

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.vector)

    def order(self) -> int | None:
        """Element order, ``None`` for infinite order."""
        n = 1
        for x, o in zip(self.vector, [o for g in self.summands for o in g.orders]):
            if x == 0:
                continue
            if o == 0:
                return None
            q = o // gcd(o, int(x))
            n = n * q // gcd(n, q)
        return n

    def block(self, i: int) -> tuple:
        start = sum(g.ngens for g in self.summands[:i])
        return self.vector[start:start + self.summands[i].ngens]

    def __add__(self, other: "CohClass") -> "CohClass":
        if (self.degree, self.summands) != (other.degree, other.summands):
            raise ValidationError("adding classes from different groups")
        return CohClass(self.degree, self.summands, tuple(a + b for a, b in zip(self.vector, other.vector)))

    def scale(self, n: int) -> "CohClass":
        return CohClass(self.degree, self.summands, tuple(n * a for a in self.vector))

    def label(self) -> str:
        return "(" + ", ".join(str(x) for x in self.vector) + ")"


def class_in(X: Space, k: int, M, vector=()) -> CohClass:
    """A class of ``H^k(X; M)``; product-with-circle spaces use Kunneth blocks."""
    if split_circle(X) is not None and not isinstance(X, (Circle, Sphere)):
        a, b = kunneth_blocks(X, k, M)
        return CohClass(k, (a, b), tuple(vector))
    return CohClass(k, (cohomology(X, k, M),), tuple(vector))


def gysin_pushforward(X: Space, c: CohClass) -> CohClass:
    """Integration over the circle fibre of ``X = W x S1``.

    ``a x dtheta`` goes to ``a`` and ``a x 1`` goes to 0.
    """
    W = split_circle(X)
    if W is None:
        raise UnsupportedError("Gysin pushforward is implemented only for products with a circle")
    if len(c.summands) != 2:
        raise ValidationError("class must be given in Kunneth block coordinates")
    return CohClass(c.degree - 1, (c.summands[1],), c.block(1))


# ---------------------------------------------------------------------------
# Parsing names

_ATOM = re.compile(r"^(pt|point|S(\d+)|T(\d+)|RP2)$")


def _parse_atom(tok: str) -> Space:
    m = _ATOM.match(tok)
    if not m:
        raise ValidationError(f"unknown space {tok!r}")
    if m.group(1) in ("pt", "point"):
        return Point()
    if m.group(2):
        n = int(m.group(2))
        return Circle() if n == 1 else Sphere(n)
    if m.group(3):
        n = int(m.group(3))
        return Circle() if n == 1 else Torus(n)
    return RealProjectivePlane()


def parse_space(text: str) -> Space:
    """Parse ``"S2 x S1"``, ``"T3"``, ``"RP2"`` and similar names.

    >>> parse_space("T2 x S1")
    Product(factors=(Torus(n=2), Circle()))
    """
    toks = [t.strip() for t in re.split(r"\s+x\s+|\s*×\s*", text.strip()) if t.strip()]
    if not toks:
        raise ValidationError("empty space name")
    spaces = [_parse_atom(t) for t in toks]
    return spaces[0] if len(spaces) == 1 else Product(tuple(spaces))
