"""Finitely generated abelian groups localized at a finite set of primes.

Every group value in the package is an :class:`SLocalGroup`: a direct sum
``Z_S^r + Z/d_1 + ... + Z/d_k`` where ``Z_S`` is the integers with the primes
of ``S`` inverted and ``d_1 | d_2 | ... | d_k`` are coprime to ``S``.  This
covers ``Z``, ``Z/n``, ``Z[1/p]``, ``Q`` (``S = ALL``) and their finite sums.

All arithmetic is exact (Python integers and :class:`fractions.Fraction`).

>>> print(group_from_presentation(2, [[2, 0]]))
Z + Z/2
>>> print(tensor(Zmod(4), Zmod(6)))
Z/2
>>> print(ext_into(Zmod(12), Zloc({2})))
Z/3
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd, prod
from typing import Iterable, Sequence

from sympy import factorint, isprime

from .errors import UnsupportedError, ValidationError

__all__ = [
    "ALL",
    "IntMatrix",
    "SLocalGroup",
    "GroupMap",
    "smith_normal_form",
    "group_from_presentation",
    "tensor",
    "tor",
    "hom_into",
    "ext_into",
    "direct_sum",
    "colimit_along",
    "colimit_with_map",
    "is_isomorphic",
    "parse_group",
    "Z",
    "Zmod",
    "Zloc",
    "Q",
    "trivial",
]


class _AllPrimes:
    """Marker for 'every prime inverted' (rational coefficients)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ALL"

    def __reduce__(self):
        return (_AllPrimes, ())


ALL = _AllPrimes()


def normalize_primes(primes) -> frozenset | _AllPrimes:
    if primes is ALL:
        return ALL
    if primes is None:
        return frozenset()
    out = frozenset(int(p) for p in primes)
    for p in out:
        if not isprime(p):
            raise ValidationError(f"{p} is not a prime")
    return out


def union_primes(a, b):
    if a is ALL or b is ALL:
        return ALL
    return a | b


def strip_primes(n: int, primes) -> int:
    """Remove every prime of ``primes`` from the positive integer ``n``."""
    if primes is ALL:
        return 1
    for p in primes:
        while n % p == 0:
            n //= p
    return n


def is_unit_at(n: int, primes) -> bool:
    """True when the nonzero integer ``n`` is invertible in ``Z_S``."""
    if n == 0:
        return False
    return strip_primes(abs(n), primes) == 1


# ---------------------------------------------------------------------------
# Integer matrices


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValidationError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValidationError("matrix entries do not match its dimensions")
        for r in self.entries:
            for x in r:
                if not isinstance(x, int) or isinstance(x, bool):
                    raise ValidationError(f"non-integer matrix entry {x!r}")

    @classmethod
    def of(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = [tuple(int(x) for x in r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(len(rows), cols, tuple(rows))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValidationError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        cols_b = list(zip(*other.entries)) if other.rows else [()] * other.cols
        out = tuple(
            tuple(sum(a * b for a, b in zip(row, col)) for col in cols_b) for row in self.entries
        )
        return IntMatrix(self.rows, other.cols, out)

    def transpose(self) -> "IntMatrix":
        if self.rows == 0:
            return IntMatrix.zeros(self.cols, 0)
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.entries)))

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.entries)

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    def diagonal(self) -> list[int]:
        return [self.entries[i][i] for i in range(min(self.rows, self.cols))]

    def det(self) -> int:
        """Exact determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValidationError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = [list(r) for r in self.entries]
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def rank(self) -> int:
        _, d, _ = smith_normal_form(self)
        return sum(1 for x in d.diagonal() if x != 0)


def smith_normal_form(M: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(U, D, V)`` with ``U @ M @ V == D``.

    ``U`` and ``V`` are unimodular and ``D`` is diagonal with nonnegative
    entries ``d_1 | d_2 | ...``.  The pivot at each stage is the nonzero entry
    of smallest absolute value in the remaining block, ties broken row-major,
    so the output is a deterministic function of the input.
    """
    m, n = M.rows, M.cols
    a = [list(r) for r in M.entries]
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, k):
        a[i], a[k] = a[k], a[i]
        u[i], u[k] = u[k], u[i]

    def swap_cols(j, k):
        for row in a:
            row[j], row[k] = row[k], row[j]
        for row in v:
            row[j], row[k] = row[k], row[j]

    def add_row(dst, src, q):  # row_dst += q * row_src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, q):  # col_dst += q * col_src
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    def smallest(t):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = a[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        return best

    for t in range(min(m, n)):
        found = smallest(t)
        if found is None:
            break
        while True:
            _, i, j = found
            swap_rows(t, i)
            swap_cols(t, j)
            p = a[t][t]
            for i in range(t + 1, m):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
            for j in range(t + 1, n):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
            if any(a[i][t] for i in range(t + 1, m)) or any(a[t][j] for j in range(t + 1, n)):
                found = smallest(t)
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if a[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
            found = smallest(t)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return IntMatrix.of(u, m), IntMatrix.of(a, n), IntMatrix.of(v, n)


# ---------------------------------------------------------------------------
# Exact rational helpers used by the lattice routines


def _solve_columns(basis: list[list[int]], targets: list[list[int]]) -> list[list[int]]:
    """Solve ``basis @ c = t`` for each target column ``t``.

    ``basis`` is given as a list of columns (each of length ``dim``) with full
    column rank; every solution must be integral.
    """
    r = len(basis)
    if r == 0:
        return [[] for _ in targets]
    dim = len(basis[0])
    aug = [[Fraction(basis[j][i]) for j in range(r)] + [Fraction(t[i]) for t in targets] for i in range(dim)]
    pivots = []
    row = 0
    for col in range(r):
        piv = next((i for i in range(row, dim) if aug[i][col] != 0), None)
        if piv is None:
            raise ValidationError("basis columns are linearly dependent")
        aug[row], aug[piv] = aug[piv], aug[row]
        pv = aug[row][col]
        aug[row] = [x / pv for x in aug[row]]
        for i in range(dim):
            if i != row and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[row])]
        pivots.append(col)
        row += 1
    for i in range(row, dim):
        if any(x != 0 for x in aug[i][r:]):
            raise ValidationError("target is not in the span of the basis")
    out = []
    for k in range(len(targets)):
        c = [aug[i][r + k] for i in range(r)]
        if any(x.denominator != 1 for x in c):
            raise ValidationError("target is not in the lattice spanned by the basis")
        out.append([int(x) for x in c])
    return out


def _lattice_basis(gens: list[list[int]], dim: int) -> list[list[int]]:
    """A Z-basis (list of columns) of the lattice spanned by ``gens`` in Z^dim."""
    if not gens:
        return []
    M = IntMatrix.of([[g[i] for g in gens] for i in range(dim)], len(gens))
    U, D, _ = smith_normal_form(M)
    uinv = _inverse_unimodular(U)
    basis = []
    for k, d in enumerate(D.diagonal()):
        if d == 0:
            break
        basis.append([uinv[i][k] * d for i in range(dim)])
    return basis


def _inverse_unimodular(U: IntMatrix) -> list[list[int]]:
    n = U.rows
    ident = [[int(i == j) for i in range(n)] for j in range(n)]
    cols = _solve_columns([list(U.column(j)) for j in range(n)], ident)
    # cols[k] is column k of the inverse
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _kernel_basis(M: IntMatrix) -> list[list[int]]:
    """Z-basis (list of columns) of the integer kernel of ``M``."""
    _, D, V = smith_normal_form(M)
    r = sum(1 for x in D.diagonal() if x != 0)
    return [list(V.column(j)) for j in range(r, M.cols)]


# ---------------------------------------------------------------------------
# Groups


def _invariant_factors(orders: Iterable[int]) -> tuple[int, ...]:
    by_prime: dict[int, list[int]] = {}
    for d in orders:
        if d < 1:
            raise ValidationError(f"torsion order must be positive, got {d}")
        for p, e in factorint(d).items():
            by_prime.setdefault(p, []).append(e)
    if not by_prime:
        return ()
    k = max(len(v) for v in by_prime.values())
    factors = [1] * k
    for p, exps in by_prime.items():
        exps = sorted(exps, reverse=True)
        for idx, e in enumerate(exps):
            factors[k - 1 - idx] *= p**e
    return tuple(factors)


@dataclass(frozen=True)
class SLocalGroup:
    """``Z_S^free_rank + Z/d_1 + ... + Z/d_k`` in canonical form.

    The constructor accepts any list of positive torsion orders and
    normalizes it: primes of ``S`` are removed (they are units) and the
    remainder is rewritten as invariant factors ``d_1 | d_2 | ...``.
    Generators are ordered free first, then one per invariant factor.
    """

    free_rank: int = 0
    torsion: tuple[int, ...] = ()
    inverted_primes: frozenset | _AllPrimes = field(default_factory=frozenset)

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValidationError("free rank must be nonnegative")
        S = normalize_primes(self.inverted_primes)
        tors = _invariant_factors(strip_primes(int(d), S) for d in self.torsion)
        object.__setattr__(self, "inverted_primes", S)
        object.__setattr__(self, "torsion", tors)

    @property
    def ngens(self) -> int:
        return self.free_rank + len(self.torsion)

    @property
    def orders(self) -> tuple[int, ...]:
        """Order of each generator, 0 standing for infinite order."""
        return (0,) * self.free_rank + self.torsion

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def is_finite(self) -> bool:
        return self.free_rank == 0

    def is_torsion_free(self) -> bool:
        return not self.torsion

    def order(self) -> int | None:
        return prod(self.torsion) if self.free_rank == 0 else None

    def relocalize(self, primes) -> "SLocalGroup":
        return SLocalGroup(self.free_rank, self.torsion, union_primes(self.inverted_primes, normalize_primes(primes)))

    def summands(self) -> list["SLocalGroup"]:
        S = self.inverted_primes
        return [SLocalGroup(1, (), S)] * self.free_rank + [SLocalGroup(0, (d,), S) for d in self.torsion]

    def free_label(self) -> str:
        S = self.inverted_primes
        if S is ALL:
            return "Q"
        if not S:
            return "Z"
        return f"Z[1/{prod(sorted(S))}]"

    def __str__(self):
        parts = []
        if self.free_rank:
            base = self.free_label()
            parts.append(base if self.free_rank == 1 else f"{base}^{self.free_rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts) if parts else "0"


def Z() -> SLocalGroup:
    return SLocalGroup(1)


def Zmod(n: int) -> SLocalGroup:
    return SLocalGroup(0, (n,))


def Zloc(primes, rank: int = 1) -> SLocalGroup:
    return SLocalGroup(rank, (), normalize_primes(primes))


def Q(rank: int = 1) -> SLocalGroup:
    return SLocalGroup(rank, (), ALL)


def trivial() -> SLocalGroup:
    return SLocalGroup()


def is_isomorphic(G: SLocalGroup, H: SLocalGroup) -> bool:
    """Isomorphism test on canonical forms.

    For finite groups the inverted primes carry no information (the torsion
    is already coprime to them), so they are compared only when there is a
    free part.
    """
    if G.free_rank != H.free_rank or G.torsion != H.torsion:
        return False
    return G.free_rank == 0 or G.inverted_primes == H.inverted_primes


def direct_sum(*groups: SLocalGroup) -> SLocalGroup:
    if not groups:
        return trivial()
    free_S = {g.inverted_primes for g in groups if g.free_rank}
    if len(free_S) > 1:
        raise UnsupportedError(
            "direct sum of free parts with different inverted primes is not an S-local group: "
            + ", ".join(str(g) for g in groups)
        )
    S = free_S.pop() if free_S else frozenset()
    tors = [d for g in groups for d in g.torsion]
    if any(strip_primes(d, S) != d for d in tors):
        raise UnsupportedError("torsion at an inverted prime cannot be represented")
    return SLocalGroup(sum(g.free_rank for g in groups), tuple(tors), S)


def group_from_presentation(generators: int, relations, primes=None) -> SLocalGroup:
    """The group ``Z^generators / <relations>`` tensored with ``Z_S``.

    ``relations`` is a matrix (or list of rows) with one relation per row.
    """
    if isinstance(relations, IntMatrix):
        rel = relations
    else:
        rows = [list(r) for r in relations]
        rel = IntMatrix.of(rows, generators)
    if rel.cols != generators:
        raise ValidationError(f"relations have {rel.cols} columns, expected {generators}")
    _, D, _ = smith_normal_form(rel)
    diag = [d for d in D.diagonal() if d != 0]
    return SLocalGroup(generators - len(diag), tuple(d for d in diag if d > 1), normalize_primes(primes))


def tensor(G: SLocalGroup, H: SLocalGroup) -> SLocalGroup:
    S = union_primes(G.inverted_primes, H.inverted_primes)
    free = G.free_rank * H.free_rank
    tors = [d for d in H.torsion for _ in range(G.free_rank)]
    tors += [d for d in G.torsion for _ in range(H.free_rank)]
    tors += [gcd(m, n) for m in G.torsion for n in H.torsion]
    return SLocalGroup(free, tuple(tors), S)


def tor(G: SLocalGroup, H: SLocalGroup) -> SLocalGroup:
    S = union_primes(G.inverted_primes, H.inverted_primes)
    return SLocalGroup(0, tuple(gcd(m, n) for m in G.torsion for n in H.torsion), S)


def _require_integral(G: SLocalGroup, op: str):
    if G.inverted_primes is ALL or G.inverted_primes:
        raise ValidationError(f"{op} requires an integral first argument, got {G}")


def hom_into(G: SLocalGroup, M: SLocalGroup) -> SLocalGroup:
    """``Hom(G, M)`` for integral ``G``."""
    _require_integral(G, "hom_into")
    tors = [t for _ in range(G.free_rank) for t in M.torsion]
    tors += [gcd(n, t) for n in G.torsion for t in M.torsion]
    return SLocalGroup(G.free_rank * M.free_rank, tuple(tors), M.inverted_primes)


def ext_into(G: SLocalGroup, M: SLocalGroup) -> SLocalGroup:
    """``Ext^1(G, M)`` for integral ``G``."""
    _require_integral(G, "ext_into")
    S = M.inverted_primes
    tors = [strip_primes(n, S) for n in G.torsion for _ in range(M.free_rank)]
    tors += [gcd(n, t) for n in G.torsion for t in M.torsion]
    return SLocalGroup(0, tuple(tors), S)


# ---------------------------------------------------------------------------
# Homomorphisms


@dataclass(frozen=True)
class GroupMap:
    """A homomorphism given on generators.

    Column ``j`` of ``matrix`` is the image of generator ``j`` of ``source``
    in the generators of ``target``, all divided by ``denominator`` (which
    must be a unit of the target's localization).
    """

    source: SLocalGroup
    target: SLocalGroup
    matrix: IntMatrix
    denominator: int = 1

    def __post_init__(self):
        src, tgt, N = self.source, self.target, self.matrix
        if (N.rows, N.cols) != (tgt.ngens, src.ngens):
            raise ValidationError(
                f"map matrix is {N.rows}x{N.cols}, expected {tgt.ngens}x{src.ngens}"
            )
        if not is_unit_at(self.denominator, tgt.inverted_primes):
            raise ValidationError(f"denominator {self.denominator} is not a unit in {tgt.free_label()}")
        t_orders = tgt.orders
        for j, d in enumerate(src.orders):
            for i, t in enumerate(t_orders):
                x = N[i, j]
                if d == 0:
                    if x and not _divisible_target(src.inverted_primes, tgt.inverted_primes, t):
                        raise ValidationError(
                            f"generator {j} of {src} cannot map nontrivially to a summand of {tgt}"
                        )
                elif t == 0:
                    if x:
                        raise ValidationError(f"torsion generator {j} of {src} maps to a free summand")
                elif (d * x) % t:
                    raise ValidationError(f"map does not respect the relation of order {d}")

    @classmethod
    def identity(cls, G: SLocalGroup) -> "GroupMap":
        return cls(G, G, IntMatrix.identity(G.ngens))

    @classmethod
    def scalar(cls, G: SLocalGroup, value) -> "GroupMap":
        value = Fraction(value)
        n = G.ngens
        num = value.numerator
        return cls(G, G, IntMatrix.of([[num * (i == j) for j in range(n)] for i in range(n)], n), value.denominator)

    @classmethod
    def zero(cls, G: SLocalGroup, H: SLocalGroup) -> "GroupMap":
        return cls(G, H, IntMatrix.zeros(H.ngens, G.ngens))

    def is_endomorphism(self) -> bool:
        return self.source == self.target

    def scalar_value(self) -> Fraction | None:
        """The scalar ``c`` when this map is ``c * identity``, else ``None``."""
        N = self.matrix
        if N.rows != N.cols:
            return None
        vals = {N[i, i] for i in range(N.rows)}
        off = any(N[i, j] for i in range(N.rows) for j in range(N.cols) if i != j)
        if off or len(vals) > 1:
            return None
        return Fraction(vals.pop() if vals else 0, self.denominator)

    def compose(self, other: "GroupMap") -> "GroupMap":
        """``self after other``."""
        if other.target != self.source:
            raise ValidationError("maps are not composable")
        return GroupMap(other.source, self.target, self.matrix @ other.matrix, self.denominator * other.denominator)

    def one_minus(self) -> "GroupMap":
        """``identity - self`` on an endomorphism."""
        if not self.is_endomorphism():
            raise ValidationError("one_minus needs an endomorphism")
        n, d = self.source.ngens, self.denominator
        rows = [[d * (i == j) - self.matrix[i, j] for j in range(n)] for i in range(n)]
        return GroupMap(self.source, self.source, IntMatrix.of(rows, n), d)

    def kernel(self) -> SLocalGroup:
        _same_localization(self)
        src, tgt, N = self.source, self.target, self.matrix
        t_rel = _relation_columns(tgt)
        n = src.ngens
        block = IntMatrix.of(
            [list(N.entries[i]) + [c[i] for c in t_rel] for i in range(tgt.ngens)], n + len(t_rel)
        ) if tgt.ngens else IntMatrix.zeros(0, n + len(t_rel))
        kgens = [v[:n] for v in _kernel_basis(block)]
        kgens = [v for v in kgens if any(v)]
        big = _lattice_basis(kgens, n)
        small = _relation_columns(src)
        coords = _solve_columns(big, small)
        G = group_from_presentation(len(big), coords if coords else IntMatrix.zeros(0, len(big)), src.inverted_primes)
        return G

    def cokernel(self) -> SLocalGroup:
        _same_localization(self)
        tgt, N = self.target, self.matrix
        rels = _relation_columns(tgt) + [list(N.column(j)) for j in range(N.cols)]
        return group_from_presentation(tgt.ngens, rels if rels else IntMatrix.zeros(0, tgt.ngens), tgt.inverted_primes)

    def is_isomorphism(self) -> bool:
        return self.kernel().is_trivial() and self.cokernel().is_trivial()

    def __str__(self):
        mat = "[" + ", ".join(str(list(r)) for r in self.matrix.entries) + "]"
        den = f"/{self.denominator}" if self.denominator != 1 else ""
        return f"{self.source} -> {self.target} : {mat}{den}"


def _divisible_target(src_S, tgt_S, t: int) -> bool:
    """Can a ``Z_{src_S}`` generator map to a summand of order ``t`` (0 = free)?"""
    if src_S is not ALL and not src_S:
        return True
    if t == 0:
        return tgt_S is ALL or (src_S is not ALL and src_S <= tgt_S)
    return strip_primes(t, src_S) == t


def _same_localization(f: GroupMap):
    a, b = f.source, f.target
    if a.free_rank and b.free_rank and a.inverted_primes != b.inverted_primes:
        raise UnsupportedError("kernel/cokernel across different localizations")


def _relation_columns(G: SLocalGroup) -> list[list[int]]:
    n = G.ngens
    out = []
    for j, d in enumerate(G.orders):
        if d:
            out.append([d * (i == j) for i in range(n)])
    return out


# ---------------------------------------------------------------------------
# Sequential colimits


def _split_blocks(e: GroupMap):
    G = e.source
    r = G.free_rank
    N = e.matrix
    free = [[N[i, j] for j in range(r)] for i in range(r)]
    tors_idx = range(r, G.ngens)
    tors = [[N[i, j] for j in tors_idx] for i in tors_idx]
    return free, tors


def _torsion_stable_image(G: SLocalGroup, block: list[list[int]], den: int):
    """Stable image of the endomorphism on the torsion subgroup."""
    mods = list(G.torsion)
    k = len(mods)
    if k == 0:
        return trivial(), 0
    # divide by the unit ``den`` row by row
    E = []
    for i, t in enumerate(mods):
        inv = pow(den, -1, t) if t > 1 else 0
        E.append([(x * inv) % t for x in block[i]])
    relations = [[t * (i == j) for i in range(k)] for j, t in enumerate(mods)]
    gens = [[int(i == j) for i in range(k)] for j in range(k)]

    def iso_type(gs):
        big = _lattice_basis(gs + relations, k)
        coords = _solve_columns(big, relations)
        return group_from_presentation(len(big), coords, None)

    current = iso_type(gens)
    steps = 0
    while True:
        gens = [[sum(E[i][j] * g[j] for j in range(k)) % mods[i] for i in range(k)] for g in gens]
        nxt = iso_type(gens)
        steps += 1
        if nxt.order() == current.order():
            return current, steps - 1
        current = nxt


def colimit_with_map(G: SLocalGroup, e: GroupMap) -> tuple[SLocalGroup, GroupMap | None]:
    """Colimit of ``G -e-> G -e-> ...`` and, for torsion-free ``G``, the
    canonical map of the first stage into it.

    Raises :class:`UnsupportedError` when the colimit is not an S-local
    group for a single prime set (e.g. ``Z + Z`` along ``diag(2, 3)``).
    """
    if e.source != G or e.target != G:
        raise ValidationError("colimit_along needs an endomorphism of the given group")
    S = G.inverted_primes
    free, tblock = _split_blocks(e)
    T_inf, _ = _torsion_stable_image(G, tblock, e.denominator)
    r = G.free_rank
    if r == 0:
        return T_inf, GroupMap.zero(G, T_inf) if T_inf.is_trivial() else None
    Nmat = IntMatrix.of(free, r)
    P = IntMatrix.identity(r)
    for _ in range(r):
        P = P @ Nmat
    basis = _lattice_basis([list(P.column(j)) for j in range(r)], r)
    s = len(basis)
    if s == 0:
        return T_inf, GroupMap.zero(G, T_inf) if T_inf.is_trivial() else None
    images = [[sum(free[i][k] * b[k] for k in range(r)) for i in range(r)] for b in basis]
    C = _solve_columns(basis, images)  # C[j] = coordinates of N * basis_j
    Cmat = IntMatrix.of([[C[j][i] for j in range(s)] for i in range(s)], s)
    det = abs(Cmat.det())
    new_primes = set()
    if S is not ALL:
        for p in factorint(det):
            if p in S:
                continue
            Pk = IntMatrix.identity(s)
            for _ in range(s):
                Pk = Pk @ Cmat
            if all(x % p == 0 for row in Pk.entries for x in row):
                new_primes.add(p)
            else:
                raise UnsupportedError(
                    f"colimit inverts {p} on only part of the free summand; not a single S-local group"
                )
    S2 = union_primes(S, frozenset(new_primes))
    if any(strip_primes(d, S2) != d for d in T_inf.torsion):
        raise UnsupportedError("colimit mixes torsion with an inverted prime")
    result = SLocalGroup(s, T_inf.torsion, S2)
    phi = None
    if G.is_torsion_free():
        coords = _solve_columns(basis, [list(P.column(j)) for j in range(r)])
        mat = IntMatrix.of([[coords[j][i] for j in range(r)] for i in range(s)], r)
        phi = GroupMap(G, result, mat, e.denominator**r)
    return result, phi


def colimit_along(G: SLocalGroup, e: GroupMap) -> SLocalGroup:
    """Sequential colimit of ``G`` along the endomorphism ``e``.

    >>> print(colimit_along(Z(), GroupMap.scalar(Z(), 2)))
    Z[1/2]
    >>> print(colimit_along(Zmod(6), GroupMap.scalar(Zmod(6), 2)))
    Z/3
    """
    return colimit_with_map(G, e)[0]


# ---------------------------------------------------------------------------
# Parsing the printed form back

_TERM = re.compile(r"^(?:(?P<free>Z|Q|Z\[1/(?P<den>\d+)\])(?:\^(?P<rank>\d+))?|Z/(?P<mod>\d+)|0)$")


def parse_group(text: str) -> SLocalGroup:
    """Inverse of ``str(SLocalGroup)``: ``"Z[1/2]^2 + Z/3"`` and friends."""
    free, tors, S = 0, [], frozenset()
    for raw in text.split("+"):
        term = raw.strip().replace(" ", "")
        m = _TERM.match(term)
        if not m:
            raise ValidationError(f"cannot parse group term {raw.strip()!r}")
        if m.group("mod"):
            tors.append(int(m.group("mod")))
        elif m.group("free"):
            rank = int(m.group("rank") or 1)
            if m.group("free") == "Q":
                here = ALL
            elif m.group("den"):
                here = frozenset(factorint(int(m.group("den"))))
            else:
                here = frozenset()
            if free and here != S:
                raise ValidationError(f"mixed localizations in {text!r}")
            S = here
            free += rank
    return SLocalGroup(free, tuple(tors), S)


def lcm(*xs: int) -> int:
    return reduce(lambda a, b: a * b // gcd(a, b), xs, 1)
