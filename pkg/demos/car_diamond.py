"""The T-duality diamond of the trivial CAR bundle over the circle, then back."""

from ssatdual.calg import Action, Stabilize, bundle, redualize, simplify, t_dualize
from ssatdual.catalog import parse_algebra
from ssatdual.cli import render_diamond
from ssatdual.topology import Circle

D = bundle(Circle(), parse_algebra("UHF:2"))
alpha = Action.spectrum_fixing(
    Action.trace_scaling(2), rokhlin_dimension=0, commutes_with_translation=True, label="alpha"
)
gamma = Action.translation(label="gamma")

d = t_dualize(D, alpha, gamma)
print(render_diamond(d))
for step in d.trace:
    print(f"  {step}")
print()
print("dualizing the right corner back gives", redualize(d))
print("stabilized original                  ", simplify(Stabilize(D)))
print()
print(render_diamond(d, "dot"))
