"""Classification groups of strongly self-absorbing bundles over named spaces."""

from ssatdual.calg import classification_warnings, classify_bundles
from ssatdual.catalog import parse_algebra
from ssatdual.topology import parse_space

CASES = [("S1", "UHF:2"), ("T3", "UHF:2"), ("S2 x S1", "O2"), ("S1", "Z"), ("RP2", "UHF:3"), ("T3", "C")]

for space, fiber in CASES:
    X, A = parse_space(space), parse_algebra(fiber)
    parts = ", ".join(f"deg {d}: {g}" for d, g in classify_bundles(X, A))
    print(f"{fiber:>6} over {space:<8} {parts}")
    for w in classification_warnings(X, A):
        print(f"         note: {w}")
