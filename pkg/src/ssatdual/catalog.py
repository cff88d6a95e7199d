"""The strongly self-absorbing fiber algebras and their invariants.

The known strongly self-absorbing C*-algebras are ``C``, the Jiang-Su
algebra ``Z``, UHF algebras of infinite type ``M_{n^inf}``, ``O2``,
``Oinf`` and ``M_{n^inf} (x) Oinf``; the nonunital Razak-Jacelon algebra
``W`` sits alongside them.  ``CuntzN(n)`` and ``MappingTorusAF(p, q)`` only
appear as outputs of the crossed-product rules.

>>> print(tensor_ssa(parse_algebra("O2"), parse_algebra("UHF:2")))
O2
>>> print(k_theory_ssa(parse_algebra("UHF:2")))
(Z[1/2], 0)
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from math import prod

from sympy import factorint

from .abgroup import ALL, SLocalGroup, Z, normalize_primes, trivial, union_primes
from .errors import UnsupportedCoefficientError, UnsupportedError, ValidationError

__all__ = [
    "SupernaturalNumber",
    "Kind",
    "SSAlgebra",
    "KPair",
    "Unevaluated",
    "UnitGroup",
    "tensor_ssa",
    "k_theory_ssa",
    "units_positive",
    "is_purely_infinite",
    "is_stably_finite",
    "absorbs_uhf",
    "parse_algebra",
    "BASE_CATALOG",
]


@dataclass(frozen=True)
class SupernaturalNumber:
    """A supernatural number of infinite type, given by its prime support."""

    support: frozenset | object

    def __post_init__(self):
        S = normalize_primes(self.support)
        if S is not ALL and not S:
            raise ValidationError("a UHF algebra of infinite type needs a nonempty prime support")
        object.__setattr__(self, "support", S)

    @classmethod
    def of(cls, n: int) -> "SupernaturalNumber":
        """``n^inf``: the support is the set of primes dividing ``n``."""
        if n < 2:
            raise ValidationError(f"{n}^inf is not a UHF type")
        return cls(frozenset(factorint(n)))

    def __str__(self):
        if self.support is ALL:
            return "ALL"
        return ",".join(str(p) for p in sorted(self.support))

    def __mul__(self, other: "SupernaturalNumber") -> "SupernaturalNumber":
        return SupernaturalNumber(union_primes(self.support, other.support))


class Kind(enum.Enum):
    COMPLEX = "C"
    JIANG_SU = "Z"
    UHF = "UHF"
    CUNTZ2 = "O2"
    CUNTZ_INF = "Oinf"
    UHF_OINF = "UHF*Oinf"
    RAZAK_JACELON = "W"
    CUNTZ_N = "On"
    MAPPING_TORUS_AF = "MT"


_DERIVED = {Kind.CUNTZ_N, Kind.MAPPING_TORUS_AF}
_PURELY_INFINITE = {Kind.CUNTZ2, Kind.CUNTZ_INF, Kind.UHF_OINF, Kind.CUNTZ_N}


@dataclass(frozen=True)
class SSAlgebra:
    """One catalog entry.  Build with the class methods, not directly."""

    kind: Kind
    uhf: SupernaturalNumber | None = None
    n: int | None = None
    pq: tuple[int, int] | None = None

    def __post_init__(self):
        needs_uhf = self.kind in (Kind.UHF, Kind.UHF_OINF)
        if needs_uhf != (self.uhf is not None):
            raise ValidationError(f"{self.kind.value} {'needs' if needs_uhf else 'takes no'} supernatural number")
        if self.kind is Kind.CUNTZ_N:
            if self.n is None or self.n < 2:
                raise ValidationError("CuntzN needs n >= 2")
            if self.n == 2:
                object.__setattr__(self, "kind", Kind.CUNTZ2)
                object.__setattr__(self, "n", None)
        elif self.n is not None:
            raise ValidationError("only CuntzN takes n")
        if self.kind is Kind.MAPPING_TORUS_AF:
            if self.pq is None or self.pq[1] <= 0:
                raise ValidationError("MappingTorusAF needs (p, q) with q > 0")
        elif self.pq is not None:
            raise ValidationError("only MappingTorusAF takes (p, q)")

    # constructors
    @classmethod
    def complex(cls):
        return cls(Kind.COMPLEX)

    @classmethod
    def jiang_su(cls):
        return cls(Kind.JIANG_SU)

    @classmethod
    def uhf_alg(cls, primes):
        return cls(Kind.UHF, SupernaturalNumber(primes))

    @classmethod
    def cuntz2(cls):
        return cls(Kind.CUNTZ2)

    @classmethod
    def cuntz_inf(cls):
        return cls(Kind.CUNTZ_INF)

    @classmethod
    def uhf_oinf(cls, primes):
        return cls(Kind.UHF_OINF, SupernaturalNumber(primes))

    @classmethod
    def razak_jacelon(cls):
        return cls(Kind.RAZAK_JACELON)

    @classmethod
    def cuntz_n(cls, n: int):
        return cls(Kind.CUNTZ_N, n=n)

    @classmethod
    def mapping_torus_af(cls, p: int, q: int):
        return cls(Kind.MAPPING_TORUS_AF, pq=(p, q))

    @property
    def is_derived(self) -> bool:
        return self.kind in _DERIVED

    @property
    def is_unital(self) -> bool:
        return self.kind is not Kind.RAZAK_JACELON

    @property
    def support(self):
        return self.uhf.support if self.uhf is not None else frozenset()

    @property
    def name(self) -> str:
        k = self.kind
        if k is Kind.UHF:
            return f"UHF:{self.uhf}"
        if k is Kind.UHF_OINF:
            return f"UHF:{self.uhf}*Oinf"
        if k is Kind.CUNTZ_N:
            return f"O{self.n}"
        if k is Kind.MAPPING_TORUS_AF:
            p, q = self.pq
            return f"MT(A({p},{q}))"
        return k.value

    def __str__(self):
        return self.name


BASE_CATALOG = (
    SSAlgebra.complex(),
    SSAlgebra.jiang_su(),
    SSAlgebra.uhf_alg({2}),
    SSAlgebra.cuntz2(),
    SSAlgebra.cuntz_inf(),
    SSAlgebra.uhf_oinf({2}),
    SSAlgebra.razak_jacelon(),
)


_NAME = re.compile(r"^(?:UHF:(?P<uhf>ALL|[\d,]+)(?P<oinf>\*Oinf)?|O(?P<n>\d+)|MT\(A\((?P<p>-?\d+),(?P<q>\d+)\)\))$")


def parse_algebra(name: str) -> SSAlgebra:
    """Parse a catalog name such as ``"UHF:2,3"`` or ``"UHF:2*Oinf"``.

    ``UHF:n`` is ``M_{n^inf}``, so ``UHF:6`` and ``UHF:2,3`` agree.

    >>> parse_algebra("UHF:6") == parse_algebra("UHF:2,3")
    True
    """
    text = name.strip().replace(" ", "")
    simple = {
        "C": SSAlgebra.complex,
        "Z": SSAlgebra.jiang_su,
        "O2": SSAlgebra.cuntz2,
        "Oinf": SSAlgebra.cuntz_inf,
        "W": SSAlgebra.razak_jacelon,
    }
    if text in simple:
        return simple[text]()
    m = _NAME.match(text)
    if not m:
        raise ValidationError(f"unknown fiber algebra {name!r}")
    if m.group("uhf"):
        spec = m.group("uhf")
        if spec == "ALL":
            primes = ALL
        else:
            primes = set()
            for part in spec.split(","):
                if not part:
                    raise ValidationError(f"bad UHF support in {name!r}")
                if int(part) < 2:
                    raise ValidationError(f"bad UHF support in {name!r}")
                primes |= set(factorint(int(part)))
        return SSAlgebra.uhf_oinf(primes) if m.group("oinf") else SSAlgebra.uhf_alg(primes)
    if m.group("n"):
        return SSAlgebra.cuntz_n(int(m.group("n")))
    return SSAlgebra.mapping_torus_af(int(m.group("p")), int(m.group("q")))


# ---------------------------------------------------------------------------
# Tensor products


def tensor_ssa(A: SSAlgebra, B: SSAlgebra) -> SSAlgebra:
    """Minimal tensor product inside the catalog.

    This is commutative, associative and idempotent on the base variants.
    Products with ``W`` are tabulated only against ``C``, ``Z`` and ``W``.
    """
    if A.is_derived or B.is_derived:
        raise UnsupportedError(f"no tensor table entry for {A} (x) {B}")
    if A == B:
        return A
    a, b = sorted((A, B), key=lambda x: list(Kind).index(x.kind))
    if a.kind is Kind.COMPLEX:
        return b
    if a.kind is Kind.JIANG_SU:
        return b
    if Kind.RAZAK_JACELON in (a.kind, b.kind):
        raise UnsupportedError(f"no tensor table entry for {A} (x) {B}")
    if Kind.CUNTZ2 in (a.kind, b.kind):
        return SSAlgebra.cuntz2()
    # remaining kinds: UHF, CUNTZ_INF, UHF_OINF
    primes = union_primes(a.support, b.support)
    if a.kind is Kind.UHF and b.kind is Kind.UHF:
        return SSAlgebra.uhf_alg(primes)
    if a.kind is Kind.CUNTZ_INF and b.kind is Kind.CUNTZ_INF:
        return a
    return SSAlgebra.uhf_oinf(primes)


# ---------------------------------------------------------------------------
# K-theory and unit data


@dataclass(frozen=True)
class KPair:
    k0: SLocalGroup
    k1: SLocalGroup

    def __str__(self):
        return f"({self.k0}, {self.k1})"

    def isomorphic(self, other: "KPair") -> bool:
        from .abgroup import is_isomorphic

        return is_isomorphic(self.k0, other.k0) and is_isomorphic(self.k1, other.k1)

    def swap(self) -> "KPair":
        return KPair(self.k1, self.k0)

    def degree(self, i: int) -> SLocalGroup:
        return self.k0 if i % 2 == 0 else self.k1


@dataclass(frozen=True)
class Unevaluated:
    """A K-theory value that could not be computed, with the reason."""

    reason: str
    constraints: tuple[str, ...] = ()

    def __str__(self):
        return f"unevaluated: {self.reason}"


def k_theory_ssa(A: SSAlgebra) -> KPair | Unevaluated:
    k = A.kind
    if k in (Kind.COMPLEX, Kind.JIANG_SU, Kind.CUNTZ_INF):
        return KPair(Z(), trivial())
    if k in (Kind.UHF, Kind.UHF_OINF):
        return KPair(SLocalGroup(1, (), A.support), trivial())
    if k in (Kind.CUNTZ2, Kind.RAZAK_JACELON):
        return KPair(trivial(), trivial())
    if k is Kind.CUNTZ_N:
        return KPair(SLocalGroup(0, (A.n - 1,)), trivial())
    return Unevaluated(f"K-theory of {A} is not tabulated; evaluate through its mapping-torus origin")


OINF_UNIT_ASSUMPTION = "positive units of K0(Oinf) taken to be trivial (default, not computed)"
UHF_OINF_UNIT_ASSUMPTION = "positive units of K0(UHF*Oinf) taken to be free on the UHF primes (default, not computed)"
W_UNIT_ASSUMPTION = "W is nonunital with K0 = 0; unit group taken to be trivial"
W_K_ASSUMPTION = "K(W) = (0, 0) is an external standard value"


@dataclass(frozen=True)
class UnitGroup:
    """The positive units ``K0(A)^x_+`` as a multiplicative group.

    ``generators`` names a multiplicative generator for each free summand.
    ``infinite`` marks the symbolic infinitely generated case (all primes),
    which cannot be used as a coefficient group.
    """

    group: SLocalGroup
    generators: tuple[str, ...] = ()
    assumption: str | None = None
    infinite: bool = False

    def as_coefficients(self) -> SLocalGroup:
        if self.infinite:
            raise UnsupportedCoefficientError(
                "the positive units of the universal UHF algebra are free on all primes; "
                "not admitted as cohomology coefficients"
            )
        return self.group

    def __str__(self):
        if self.infinite:
            return "free abelian on all primes"
        if self.group.is_trivial():
            return "1"
        return f"{self.group} (generators {', '.join(self.generators)})"


def units_positive(A: SSAlgebra) -> UnitGroup:
    k = A.kind
    if A.is_derived:
        raise UnsupportedError(f"no unit-group entry for {A}")
    if k in (Kind.COMPLEX, Kind.JIANG_SU, Kind.CUNTZ2):
        return UnitGroup(trivial())
    if k is Kind.RAZAK_JACELON:
        return UnitGroup(trivial(), assumption=W_UNIT_ASSUMPTION)
    if k is Kind.CUNTZ_INF:
        return UnitGroup(trivial(), assumption=OINF_UNIT_ASSUMPTION)
    assumption = UHF_OINF_UNIT_ASSUMPTION if k is Kind.UHF_OINF else None
    if A.support is ALL:
        return UnitGroup(trivial(), assumption=assumption, infinite=True)
    primes = sorted(A.support)
    return UnitGroup(SLocalGroup(len(primes)), tuple(str(p) for p in primes), assumption)


def is_purely_infinite(A: SSAlgebra) -> bool:
    return A.kind in _PURELY_INFINITE


def is_stably_finite(A: SSAlgebra) -> bool:
    return not is_purely_infinite(A)


def absorbs_uhf(A: SSAlgebra) -> bool:
    """True when ``A`` absorbs some UHF algebra of infinite type."""
    return A.kind in (Kind.UHF, Kind.UHF_OINF, Kind.CUNTZ2)


def assumptions_for(A: SSAlgebra) -> list[str]:
    """Assumption flags a report must carry when ``A`` is used."""
    out = []
    if A.kind is Kind.CUNTZ_INF:
        out.append(OINF_UNIT_ASSUMPTION)
    if A.kind is Kind.UHF_OINF:
        out.append(UHF_OINF_UNIT_ASSUMPTION)
    if A.kind is Kind.RAZAK_JACELON:
        out.extend([W_UNIT_ASSUMPTION, W_K_ASSUMPTION])
    return out


def uhf_label(primes) -> str:
    return "ALL" if primes is ALL else str(prod(sorted(primes)))
