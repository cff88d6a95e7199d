"""Crossed-product rewriting: trace-scaling, quasi-free flows and Takai duality."""

from fractions import Fraction

from ssatdual.calg import Action, Crossed, Fiber, simplify
from ssatdual.catalog import SSAlgebra, parse_algebra


def show(e):
    trace = []
    out = simplify(e, trace=trace)
    print(f"{e}\n  = {out}")
    for step in trace:
        print(f"    {step.rule}: {step.before} -> {step.after}")


for s, uhf in [("2", "UHF:2"), ("2/3", "UHF:6"), ("4", "UHF:4")]:
    show(Crossed(Fiber(parse_algebra(uhf), True), "Z", Action.trace_scaling(Fraction(s))))

O2 = Fiber(SSAlgebra.cuntz2())
for q in (Action.quasi_free(sign=1), Action.quasi_free(sign=-1), Action.quasi_free(Fraction(2, 5))):
    show(Crossed(O2, "R", q))

q = Action.quasi_free(sign=-1)
show(Crossed(Crossed(O2, "R", q), "R", Action.dual_of(q)))
