import random
from fractions import Fraction

import pytest

from ssatdual import calg
from ssatdual.abgroup import SLocalGroup, Z, Zloc, is_isomorphic
from ssatdual.calg import (
    Action,
    Branch,
    BundleAlg,
    Crossed,
    CuntzPimsner,
    Fiber,
    FunctionsOn,
    Induced,
    Stabilize,
    Tensor,
    TensorOverBase,
    bundle,
    check_action,
    classification_warnings,
    classify_bundles,
    is_torsion_class,
    mathai_rosenberg_dual,
    prim,
    redualize,
    simplify,
    t_dualize,
    validate_action,
)
from ssatdual.catalog import SSAlgebra, parse_algebra
from ssatdual.cli import load_scenario
from ssatdual.errors import PreconditionError, RewriteLoopError, UnsupportedError, ValidationError
from ssatdual.topology import (
    Circle,
    NCSpace,
    Point,
    Product,
    RealProjectivePlane,
    Sphere,
    Torus,
)

U2 = parse_algebra("UHF:2")
O2 = SSAlgebra.cuntz2()
JS = SSAlgebra.jiang_su()
C = SSAlgebra.complex()
K = Fiber(C, True)


def sf_trace(s, **kw):
    return Action.spectrum_fixing(Action.trace_scaling(s), rokhlin_dimension=0, commutes_with_translation=True, label="alpha", **kw)


GAMMA = Action.translation(label="gamma")


def eek(s, uhf):
    return simplify(Crossed(Fiber(parse_algebra(uhf), True), "Z", Action.trace_scaling(Fraction(s))))


class TestRules:
    @pytest.mark.parametrize(
        "s,uhf,out",
        [("2", "UHF:2", "O2"), ("1/2", "UHF:2", "O2"), ("2/3", "UHF:6", "O2"), ("3/2", "UHF:6", "O2"), ("4", "UHF:4", "O4"), ("3", "UHF:3", "O3")],
    )
    def test_eek(self, s, uhf, out):
        assert eek(s, uhf) == Fiber(parse_algebra(out), True)

    def test_eek_rejects_support_mismatch_and_unstable_fiber(self):
        with pytest.raises(ValidationError):
            eek("3", "UHF:2")
        with pytest.raises(ValidationError):
            simplify(Crossed(Fiber(U2), "Z", Action.trace_scaling(2)))

    def test_trace_one_does_not_fire(self):
        e = Crossed(Fiber(U2, True), "Z", Action.trace_scaling(1))
        assert simplify(e) == e

    def test_quasi_free_dichotomy(self):
        assert simplify(Crossed(Fiber(O2), "R", Action.quasi_free(sign=1))) == Fiber(SSAlgebra.razak_jacelon(), True)
        assert simplify(Crossed(Fiber(O2), "R", Action.quasi_free(sign=-1))) == Fiber(O2, True)
        out = simplify(Crossed(Fiber(O2), "R", Action.quasi_free(Fraction(2, 5))))
        assert out.algebra == SSAlgebra.mapping_torus_af(2, 5)

    def test_takai(self):
        q = Action.quasi_free(sign=-1)
        assert simplify(Crossed(Crossed(Fiber(O2), "R", q), "R", Action.dual_of(q))) == Fiber(O2, True)
        a = Action.named("a")
        x = Tensor((FunctionsOn(Torus(2)), Fiber(U2, True)))
        assert simplify(Crossed(Crossed(x, "Z", a), "S1", Action.dual_of(a))) == simplify(x)
        # wrong group: no rewrite
        e = Crossed(Crossed(x, "Z", a), "Z", Action.dual_of(a))
        assert isinstance(simplify(e), Crossed)

    def test_trivial_bundles(self):
        assert simplify(bundle(Circle(), JS)) == Tensor((FunctionsOn(Circle()), Fiber(JS, True)))
        # unspecified class, but the classification is trivial
        assert simplify(BundleAlg(Circle(), O2, None)) == Tensor((FunctionsOn(Circle()), Fiber(O2, True)))
        nontrivial = bundle(Circle(), U2, {1: (1,)})
        assert simplify(nontrivial) == nontrivial

    def test_spectrum_fixing_over_product(self):
        e = Crossed(Tensor((FunctionsOn(Circle()), Fiber(U2, True))), "Z", sf_trace(2))
        assert str(simplify(e)) == "C(S1) ⊗ O2 ⊗ K"

    def test_spectrum_fixing_on_nontrivial_bundle(self):
        D = bundle(Circle(), U2, {1: (3,)})
        assert str(simplify(Crossed(D, "Z", sf_trace(2)))) == "C(S1) ⊗ O2 ⊗ K"

    def test_absorption(self):
        assert simplify(Stabilize(Stabilize(Fiber(U2)))) == Fiber(U2, True)
        assert simplify(Tensor((Fiber(U2), Fiber(parse_algebra("UHF:3")), K))) == Fiber(parse_algebra("UHF:6"), True)
        assert simplify(Tensor((FunctionsOn(Point()), Fiber(O2)))) == Fiber(O2)
        assert simplify(Tensor((FunctionsOn(Sphere(2)), FunctionsOn(Circle()), K))) == Tensor(
            (FunctionsOn(Product((Sphere(2), Circle()))), K)
        )

    def test_green(self):
        e = Crossed(Tensor((FunctionsOn(Torus(3)), Fiber(O2, True))), "S1", GAMMA)
        assert str(simplify(e)) == "C(T2) ⊗ O2 ⊗ K"
        r = Crossed(Tensor((FunctionsOn(Circle()), Fiber(O2, True))), "R", GAMMA)
        assert str(simplify(r)) == "C(S1) ⊗ O2 ⊗ K"

    def test_trace_records_citations(self):
        steps = []
        simplify(Crossed(bundle(Circle(), U2), "Z", sf_trace(2)), trace=steps)
        assert [s.rule.split()[0] for s in steps] == ["R6", "R7", "R1"]
        assert all(s.citation for s in steps)

    def test_loop_guard(self, monkeypatch):
        monkeypatch.setattr(calg, "MAX_REWRITES", 0)
        with pytest.raises(RewriteLoopError):
            simplify(Stabilize(Stabilize(Stabilize(Fiber(U2)))))

    def test_bad_group(self):
        with pytest.raises(ValidationError):
            Crossed(Fiber(U2), "Q", Action.named("a"))
        Crossed(Fiber(U2), "Z^2", Action.named("a"))


class TestActions:
    def test_constructor_validation(self):
        with pytest.raises(ValidationError):
            Action.trace_scaling(0)
        with pytest.raises(ValidationError):
            Action.quasi_free(Fraction(1, 2), sign=1)
        with pytest.raises(ValidationError):
            Action.quasi_free(sign=2)
        with pytest.raises(ValidationError):
            Action.named("a", rokhlin_dimension=3)

    def test_rokhlin_genericity(self):
        js = bundle(Circle(), JS)
        diags = validate_action(js, Action.named("a", rokhlin_dimension=0), "Z")
        assert [d.code for d in diags] == ["rokhlin"] and "Rokhlin dimension <= 1" in diags[0].message
        assert validate_action(js, Action.named("a", rokhlin_dimension=1), "Z") == []
        assert validate_action(bundle(Circle(), U2), sf_trace(2), "Z") == []
        info = validate_action(Fiber(O2, True), Action.named("r", rokhlin_dimension=0), "R")
        assert [d.code for d in info] == ["unique"]
        with pytest.raises(ValidationError):
            check_action(js, Action.named("a", rokhlin_dimension=0), "Z")

    def test_eek_support_diagnostic(self):
        diags = validate_action(bundle(Circle(), U2), sf_trace(3), "Z")
        assert [d.code for d in diags] == ["eek-support"]


class TestClassification:
    def test_examples(self):
        [(d, g)] = classify_bundles(Circle(), U2)
        assert d == 1 and is_isomorphic(g, Z())
        assert all(g.is_trivial() for _, g in classify_bundles(Circle(), O2))
        got = classify_bundles(Torus(3), U2)
        assert [d for d, _ in got] == [1, 3]
        assert is_isomorphic(got[0][1], SLocalGroup(3)) and is_isomorphic(got[1][1], Zloc({2}))
        assert [d for d, _ in classify_bundles(Torus(3), C)] == [3]

    def test_warning_for_tori(self):
        assert any("discrepancy" in w for w in classification_warnings(Torus(3), U2))
        assert classification_warnings(Circle(), U2) == []

    def test_degree_mismatch(self):
        with pytest.raises(ValidationError, match="does not exist"):
            bundle(Circle(), U2, {3: (1,)})

    def test_torsion_classes(self):
        assert is_torsion_class(bundle(Torus(2), U2))
        assert is_torsion_class(bundle(Product((RealProjectivePlane(), Circle())), parse_algebra("UHF:3"), {3: (1,)}))
        assert not is_torsion_class(bundle(Circle(), U2, {1: (1,)}))
        assert not is_torsion_class(bundle(Torus(3), U2, {3: (1,)}))


class TestPrim:
    def test_examples(self):
        assert prim(BundleAlg(Circle(), U2, None)) == Circle()
        assert prim(Fiber(O2, True)) == Point()
        assert prim(Tensor((FunctionsOn(Sphere(2)), FunctionsOn(Circle())))) == Product((Sphere(2), Circle()))
        assert isinstance(prim(Crossed(bundle(Circle(), U2), "R", Action.named("x"))), NCSpace)
        assert prim(Crossed(Fiber(U2, True), "Z", Action.trace_scaling(2))) == Point()
        assert prim(Induced(Fiber(U2, True), Action.trace_scaling(2))) == Circle()
        fp = prim(TensorOverBase((FunctionsOn(Torus(2)), FunctionsOn(Torus(2))), Circle()))
        assert fp.name == "T2 x_S1 T2"


class TestDiamonds:
    def test_car_over_circle(self):
        d = t_dualize(bundle(Circle(), U2), sf_trace(2), GAMMA)
        assert d.branch is Branch.STABLY_FINITE
        assert str(d.top) == "C(S1) ⊗ O2 ⊗ K"
        assert str(d.right) == "O2 ⊗ K"
        assert str(d.bottom) == "UHF:2 ⊗ K"
        assert isinstance(d.aliases["top"], CuntzPimsner) and isinstance(d.aliases["right"], CuntzPimsner)
        assert d.parameters["trace_scaling"] == "2"
        assert redualize(d) == simplify(Stabilize(d.left))

    def test_purely_infinite(self):
        D = bundle(Product((Sphere(2), Circle())), O2)
        d = t_dualize(D, r_action=Action.translation(rokhlin_dimension=0, label="r"))
        assert d.branch is Branch.PURELY_INFINITE and d.unique
        assert d.right == simplify(Crossed(D, "R", d.actions["r"]))
        assert redualize(d) == simplify(Stabilize(D))

    def test_purely_infinite_needs_action(self):
        with pytest.raises(ValidationError):
            t_dualize(bundle(Circle(), O2))

    def test_torsion(self):
        D = bundle(Product((RealProjectivePlane(), Circle())), parse_algebra("UHF:3"), {3: (1,)})
        d = t_dualize(D)
        assert d.branch is Branch.TORSION_CLASS
        assert d.left == D
        assert "^alpha" in str(d.bottom) and "theta#" in str(d.right) and "theta" in str(d.aliases["left"])
        assert redualize(d) == simplify(Stabilize(D))
        assert simplify(d.aliases["left"]) == simplify(Stabilize(D))
        # theta# is not the splitting automorphism of D
        assert simplify(d.right) == d.right

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            t_dualize(bundle(Sphere(2), U2), sf_trace(2), GAMMA)
        with pytest.raises(PreconditionError):
            t_dualize(Fiber(U2, True), sf_trace(2), GAMMA)

    def test_missing_actions(self):
        with pytest.raises(ValidationError):
            t_dualize(bundle(Circle(), U2, {1: (1,)}), None, GAMMA)
        with pytest.raises(ValidationError):
            t_dualize(bundle(Circle(), U2), sf_trace(2), None)

    def test_illegal_action_rejected(self):
        with pytest.raises(ValidationError):
            t_dualize(bundle(Circle(), JS), Action.named("a", rokhlin_dimension=0), GAMMA)


GOLDEN_DIAMONDS = [
    "car_s1_tdualize.toml",
    "car_t2_tdualize.toml",
    "jiang_su_s1_tdualize.toml",
    "o2_s2xs1_tdualize.toml",
    "torsion_rp2xs1_tdualize.toml",
]


def _diamond(scenario_dir, name, rng=None):
    sc = load_scenario(scenario_dir / name)
    D = bundle(sc.space, sc.fiber, sc.class_vectors)
    return t_dualize(D, sc.roles.get("z"), sc.roles.get("circle"), sc.roles.get("r"), branch=sc.branch, rng=rng)


@pytest.mark.parametrize("name", GOLDEN_DIAMONDS)
def test_confluence_on_golden_diamonds(scenario_dir, name):
    ref = _diamond(scenario_dir, name)
    rng = random.Random(name)
    for _ in range(100):
        assert _diamond(scenario_dir, name, rng) == ref


@pytest.mark.parametrize("name", GOLDEN_DIAMONDS)
def test_involution_on_golden_diamonds(scenario_dir, name):
    d = _diamond(scenario_dir, name)
    rng = random.Random(name)
    expected = simplify(Stabilize(d.left))
    assert redualize(d) == expected
    for _ in range(50):
        assert redualize(_diamond(scenario_dir, name, rng), rng=rng) == expected


class TestMathaiRosenberg:
    def test_flux_on_t3(self):
        mr = mathai_rosenberg_dual(bundle(Torus(3), C, {3: (4,)}))
        assert mr.c1_dual.vector == (4,)
        assert mr.space.c1.vector == (4,)
        assert not mr.determined and mr.constraints

    def test_zero_flux_self_dual(self):
        mr = mathai_rosenberg_dual(bundle(Torus(3), C))
        assert mr.space == Torus(3) and mr.c1_dual.is_zero() and mr.determined
        mr2 = mathai_rosenberg_dual(bundle(Product((Sphere(2), Circle())), C))
        assert mr2.space == Product((Sphere(2), Circle())) and mr2.flux.is_zero()

    def test_errors(self):
        with pytest.raises(ValidationError):
            mathai_rosenberg_dual(bundle(Circle(), U2))
        with pytest.raises(UnsupportedError):
            mathai_rosenberg_dual(bundle(Sphere(3), C, {3: (1,)}))
