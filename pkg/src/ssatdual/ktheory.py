"""K-theory of symbolic expressions.

Values are :class:`~ssatdual.catalog.KPair` when computed exactly and
:class:`~ssatdual.catalog.Unevaluated` otherwise; extension problems are
never resolved by guessing the split extension.

>>> print(k_of_space(Torus(2)))
(Z^2, Z^2)
>>> print(connes_thom(KPair(Z(), trivial())))
(0, Z)
"""

from __future__ import annotations

from dataclasses import dataclass

from .abgroup import (
    ALL,
    GroupMap,
    SLocalGroup,
    Z,
    colimit_with_map,
    strip_primes,
    direct_sum,
    tensor,
    tor,
    trivial,
    Zmod,
)
from .calg import (
    Action,
    ActionKind,
    BundleAlg,
    Crossed,
    CstarExpr,
    CuntzPimsner,
    Fiber,
    FixedPoint,
    FunctionsOn,
    Induced,
    Stabilize,
    Tensor,
    TensorOverBase,
    simplify,
)
from .catalog import (
    W_K_ASSUMPTION,
    Kind,
    KPair,
    Unevaluated,
    k_theory_ssa,
)
from .errors import SSATError, UnevaluatedError, UnsupportedError, ValidationError
from .topology import (
    Circle,
    CircleBundle,
    Point,
    Product,
    RealProjectivePlane,
    Space,
    Sphere,
    Torus,
    cohomology,
)

__all__ = [
    "KResult",
    "KEndomorphism",
    "k_of_space",
    "kunneth_c",
    "connes_thom",
    "pimsner_voiculescu",
    "schafhauser_map",
    "torsion_diamond_k",
    "k_endomorphism",
    "k_of_expr",
    "CAR_K1_NOTE",
    "K_RULES",
    "k_step",
]

K_RULES: dict[str, str] = {
    "Kunneth": "Kunneth theorem for C*-algebras in the bootstrap class (Schochet)",
    "Connes-Thom": "Connes-Thom isomorphism: K_i(A x| R) = K_(i+1)(A)",
    "PV": "Pimsner-Voiculescu six-term sequence for A x| Z",
    "Pimsner": "Pimsner: K-theory of a Cuntz-Pimsner algebra fits a PV-type sequence in 1 - [H]",
    "torsion-diamond": "K0(B) = K1(B) = K0(B^alpha) + K1(B^alpha) for a torsion class",
    "Mathai-Rosenberg": "Mathai-Rosenberg: the dual Chern class is the circle pushforward of [H]",
}


def k_step(rule: str, text: str) -> str:
    """A trace line for a K-rule, with its citation."""
    return f"{rule}: {text}   [{K_RULES[rule]}]"


@dataclass(frozen=True)
class KResult:
    value: KPair | Unevaluated
    trace: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    @property
    def evaluated(self) -> bool:
        return isinstance(self.value, KPair)

    @property
    def reason(self) -> str | None:
        return None if self.evaluated else self.value.reason

    @property
    def constraints(self) -> tuple[str, ...]:
        return () if self.evaluated else self.value.constraints

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class KEndomorphism:
    """An endomorphism of a :class:`KPair`, one map per degree."""

    e0: GroupMap
    e1: GroupMap

    def __post_init__(self):
        for e in (self.e0, self.e1):
            if not e.is_endomorphism():
                raise ValidationError(f"K-endomorphism component {e} is not an endomorphism")

    @property
    def k(self) -> KPair:
        return KPair(self.e0.source, self.e1.source)

    @classmethod
    def identity(cls, k: KPair) -> "KEndomorphism":
        return cls(GroupMap.identity(k.k0), GroupMap.identity(k.k1))

    @classmethod
    def scalar(cls, k: KPair, s0, s1=1) -> "KEndomorphism":
        return cls(GroupMap.scalar(k.k0, s0), GroupMap.scalar(k.k1, s1))

    def degree(self, i: int) -> GroupMap:
        return self.e0 if i % 2 == 0 else self.e1


# ---------------------------------------------------------------------------
# Building blocks


def _even_odd(X: Space) -> KPair:
    even = [cohomology(X, k, Z()) for k in range(0, X.dim + 1, 2)]
    odd = [cohomology(X, k, Z()) for k in range(1, X.dim + 1, 2)]
    return KPair(direct_sum(*even) if even else trivial(), direct_sum(*odd) if odd else trivial())


def k_of_space(X: Space) -> KPair:
    """Topological K-theory ``(K^0(X), K^1(X))``.

    Torsion-free catalog spaces use even/odd cohomology; ``RP2`` is the
    constant ``(Z + Z/2, 0)``; products go through :func:`kunneth_c`.

    >>> print(k_of_space(Product((Sphere(2), Circle()))))
    (Z^2, Z^2)
    """
    if isinstance(X, (Point, Circle, Sphere, Torus)):
        return _even_odd(X)
    if isinstance(X, RealProjectivePlane):
        return KPair(direct_sum(Z(), Zmod(2)), trivial())
    if isinstance(X, CircleBundle) and X.is_trivial():
        return k_of_space(X.total_space())
    if isinstance(X, Product):
        out = KPair(Z(), trivial())
        for f in X.factors:
            out = kunneth_c(out, k_of_space(f))
            if isinstance(out, Unevaluated):
                raise UnevaluatedError(out.reason, out.constraints)
        return out
    raise UnevaluatedError(f"K-theory of {X} needs the Atiyah-Hirzebruch spectral sequence, which is not implemented")


def kunneth_c(a: KPair, b: KPair) -> KPair | Unevaluated:
    """Graded Kunneth for K-theory; a nonzero Tor term leaves it unevaluated.

    >>> print(kunneth_c(KPair(Z(), Z()), KPair(SLocalGroup(1, (), {2}), trivial())))
    (Z[1/2], Z[1/2])
    """
    tors = [tor(a.k0, b.k0), tor(a.k1, b.k1), tor(a.k0, b.k1), tor(a.k1, b.k0)]
    if any(not t.is_trivial() for t in tors):
        return Unevaluated(
            "extension-ambiguity",
            (
                f"0 -> {a.k0} (x) {b.k0} + {a.k1} (x) {b.k1} -> K0 -> Tor({a.k0},{b.k1}) + Tor({a.k1},{b.k0}) -> 0",
                f"0 -> {a.k0} (x) {b.k1} + {a.k1} (x) {b.k0} -> K1 -> Tor({a.k0},{b.k0}) + Tor({a.k1},{b.k1}) -> 0",
            ),
        )
    try:
        k0 = direct_sum(tensor(a.k0, b.k0), tensor(a.k1, b.k1))
        k1 = direct_sum(tensor(a.k0, b.k1), tensor(a.k1, b.k0))
    except UnsupportedError as exc:
        return Unevaluated(f"mixed localizations: {exc}")
    return KPair(k0, k1)


def connes_thom(k: KPair) -> KPair:
    """Degree shift ``K_i(A x| R) = K_{i+1}(A)``."""
    return k.swap()


def _pv_degree(coker: SLocalGroup, ker: SLocalGroup) -> SLocalGroup | None:
    """Middle term of ``0 -> coker -> ? -> ker -> 0`` when it must split."""
    if ker.is_trivial():
        return coker
    if coker.is_trivial():
        return ker
    S = ker.inverted_primes
    if not ker.is_torsion_free():
        return None
    # Ext(Z_S^r, M) = 0 for a Z_S-module M
    if S is ALL or S:
        cS = coker.inverted_primes
        if coker.free_rank and not (cS is ALL or (S is not ALL and S <= cS)):
            return None
        if any(d != strip_primes(d, S) for d in coker.torsion):
            return None
    try:
        return direct_sum(coker, ker)
    except UnsupportedError:
        return None


def pimsner_voiculescu(k: KPair, e: KEndomorphism) -> KResult:
    """K-theory of ``A x| Z`` from ``K(A)`` and the induced endomorphism.

    ``0 -> coker(1-e0) -> K0 -> ker(1-e1) -> 0`` and
    ``0 -> coker(1-e1) -> K1 -> ker(1-e0) -> 0``.

    >>> kc = KPair(Z(), Z())
    >>> print(pimsner_voiculescu(kc, KEndomorphism.identity(kc)))
    (Z^2, Z^2)
    """
    if e.k != k:
        raise ValidationError(f"endomorphism acts on {e.k}, not on {k}")
    try:
        m0, m1 = e.e0.one_minus(), e.e1.one_minus()
        coker0, ker0, coker1, ker1 = m0.cokernel(), m0.kernel(), m1.cokernel(), m1.kernel()
    except UnsupportedError as exc:
        return KResult(Unevaluated(f"PV kernels not computable: {exc}"), (k_step("PV", "kernels not computable"),))
    g0 = _pv_degree(coker0, ker1)
    g1 = _pv_degree(coker1, ker0)
    step = k_step("PV", f"coker/ker of 1 - e = ({coker0}, {ker0}) / ({coker1}, {ker1})")
    if g0 is None or g1 is None:
        cons = (
            f"0 -> {coker0} -> K0 -> {ker1} -> 0",
            f"0 -> {coker1} -> K1 -> {ker0} -> 0",
        )
        return KResult(Unevaluated("extension-ambiguity in the Pimsner-Voiculescu sequence", cons), (step,))
    return KResult(KPair(g0, g1), (step,))


def schafhauser_map(kD: KPair, h: KEndomorphism) -> tuple[KPair, tuple[GroupMap | None, GroupMap | None]]:
    """Colimit of ``K(D)`` along ``h`` and the canonical map of the first stage.

    >>> k, (phi0, _) = schafhauser_map(KPair(Z(), trivial()), KEndomorphism.scalar(KPair(Z(), trivial()), 2))
    >>> print(k, phi0.matrix.tolist())
    (Z[1/2], 0) [[1]]
    """
    if h.k != kD:
        raise ValidationError(f"endomorphism acts on {h.k}, not on {kD}")
    g0, phi0 = colimit_with_map(kD.k0, h.e0)
    g1, phi1 = colimit_with_map(kD.k1, h.e1)
    return KPair(g0, g1), (phi0, phi1)


def torsion_diamond_k(k_fixed: KPair) -> KPair:
    """``K0(B) = K1(B) = K0(B^alpha) + K1(B^alpha)``.

    >>> print(torsion_diamond_k(KPair(Z(), Zmod(2))))
    (Z + Z/2, Z + Z/2)
    """
    G = direct_sum(k_fixed.k0, k_fixed.k1)
    return KPair(G, G)


# ---------------------------------------------------------------------------
# Expressions


def k_endomorphism(a: Action, k: KPair) -> KEndomorphism | None:
    """Induced map on ``k`` for the catalogued action kinds, else ``None``.

    Trace scaling by ``s`` multiplies ``K0`` of a UHF fiber by ``s``; a
    spectrum-fixing action built from it multiplies both degrees of
    ``K(X) (x) K0(fiber)``; a lifted translation is homotopic to the identity.
    """
    try:
        if a.kind is ActionKind.TRACE_SCALING:
            return KEndomorphism.scalar(k, a.factor, 1)
        if a.kind is ActionKind.SPECTRUM_FIXING and a.inner.kind is ActionKind.TRACE_SCALING:
            return KEndomorphism.scalar(k, a.inner.factor, a.inner.factor)
        if a.kind is ActionKind.TRANSLATION_LIFT:
            return KEndomorphism.identity(k)
    except ValidationError:
        return None
    return None


CAR_K1_NOTE = (
    "discrepancy: Kunneth with K(S1) = (Z, Z) gives K1 = {k1} for the trivial {fiber} bundle over S1; "
    "a stated value K1 = 0 disagrees and is not followed"
)


class _Ctx:
    def __init__(self):
        self.trace: list[str] = []
        self.notes: list[str] = []


def _uneval(reason: str, constraints=()) -> Unevaluated:
    return Unevaluated(reason, tuple(constraints))


def _k(e: CstarExpr, ctx: _Ctx) -> KPair | Unevaluated:
    if isinstance(e, Stabilize):
        return _k(e.child, ctx)
    if isinstance(e, Fiber):
        v = k_theory_ssa(e.algebra)
        if e.algebra.kind is Kind.RAZAK_JACELON and W_K_ASSUMPTION not in ctx.notes:
            ctx.notes.append(W_K_ASSUMPTION)
        if isinstance(v, Unevaluated):
            src = _r_origin(e)
            if src is not None:
                inner = _k(src.child, ctx)
                if isinstance(inner, KPair):
                    ctx.trace.append(k_step("Connes-Thom", f"on the origin {src}"))
                    return connes_thom(inner)
        return v
    if isinstance(e, FunctionsOn):
        try:
            return k_of_space(e.space)
        except UnevaluatedError as exc:
            return _uneval(exc.reason, exc.constraints)
    if isinstance(e, Tensor):
        out: KPair | Unevaluated = KPair(Z(), trivial())
        for f in e.factors:
            kf = _k(f, ctx)
            if isinstance(kf, Unevaluated):
                return kf
            out = kunneth_c(out, kf)
            if isinstance(out, Unevaluated):
                return out
        ctx.trace.append(k_step("Kunneth", str(e)))
        return out
    if isinstance(e, Crossed):
        base = _k(e.child, ctx)
        if isinstance(base, Unevaluated):
            return base
        if e.group == "R":
            ctx.trace.append(k_step("Connes-Thom", str(e)))
            return connes_thom(base)
        if e.group == "Z":
            return _pv(base, e.action, str(e), ctx)
        return _uneval(f"no K-rule for the {e.group} crossed product {e}")
    if isinstance(e, Induced):
        base = _k(e.child, ctx)
        if isinstance(base, Unevaluated):
            return base
        pv = _pv(base, e.action, str(e), ctx)
        if isinstance(pv, Unevaluated):
            return pv
        ctx.trace.append(k_step("Connes-Thom", "induced algebra is Morita equivalent to the R-dual of the Z crossed product"))
        return connes_thom(pv)
    if isinstance(e, CuntzPimsner):
        base = _k(e.child, ctx)
        if isinstance(base, Unevaluated):
            return base
        ctx.trace.append(k_step("Pimsner", str(e)))
        v = _pv(base, e.module.action, str(e), ctx)
        h = k_endomorphism(e.module.action, base)
        if h is not None:
            try:
                lim, _ = schafhauser_map(base, h)
                ctx.notes.append(
                    f"Schafhauser colimit of K({e.child}) along [{e.module}] is {lim}; this is the K-theory "
                    "of the gauge-action crossed product, recorded with its natural map"
                )
            except SSATError:
                pass
        return v
    if isinstance(e, BundleAlg):
        return _uneval(f"no K-rule for the bundle {e}: class nontrivial or unspecified")
    if isinstance(e, FixedPoint):
        return _uneval(f"K-theory of the fixed-point algebra {e} is not computed; supply it to torsion_diamond_k")
    if isinstance(e, TensorOverBase):
        return _uneval(f"no Kunneth rule over a base space for {e}")
    return _uneval(f"no K-rule for {e}")


def _r_origin(e: CstarExpr) -> Crossed | None:
    x, n = e.origin, 0
    while x is not None and n < 100:
        if isinstance(x, Crossed) and x.group == "R":
            return x
        x, n = x.origin, n + 1
    return None


def _pv(base: KPair, a: Action, where: str, ctx: _Ctx) -> KPair | Unevaluated:
    e = k_endomorphism(a, base)
    if e is None:
        return _uneval(f"induced K-map of the action {a} in {where} is unknown")
    res = pimsner_voiculescu(base, e)
    ctx.trace.extend(res.trace)
    return res.value


def _car_note(e: CstarExpr, v) -> str | None:
    if not (isinstance(e, Tensor) and len(e.factors) == 2 and isinstance(v, KPair)):
        return None
    f, g = e.factors
    if isinstance(f, FunctionsOn) and isinstance(f.space, Circle) and isinstance(g, Fiber) and g.algebra.kind is Kind.UHF:
        return CAR_K1_NOTE.format(k1=v.k1, fiber=g.algebra)
    return None


def k_of_expr(e: CstarExpr) -> KResult:
    """K-theory of ``e`` after simplification.

    >>> from ssatdual.calg import bundle
    >>> from ssatdual.catalog import SSAlgebra
    >>> print(k_of_expr(bundle(Circle(), SSAlgebra.jiang_su())))
    (Z, Z)
    """
    s = simplify(e)
    ctx = _Ctx()
    v = _k(s, ctx)
    note = _car_note(s, v)
    if note:
        ctx.notes.append(note)
    return KResult(v, tuple(ctx.trace), tuple(ctx.notes))
