"""Two charts for the half line [0, 1) and what their groupoids remember.

Both charts are (-1, 1) with the reflection group {id, -id}.  One projects
by |x|, the other by x^2.  They describe the same quotient, yet no change of
charts relates them, and the marked groupoids tell them apart.
"""

from __future__ import annotations

from fractions import Fraction as F

from orbifoldkit.charts import charts_compatible
from orbifoldkit.fixtures import ATLAS_ABS, ATLAS_SQUARE, V1, V2
from orbifoldkit.groupoid import ObjPoint, arrows_between, build_groupoid, marking_value, serialize


def main() -> None:
    print("Looking for a change of charts from the x^2 chart to the |x| chart.")
    res = charts_compatible(V1, V2)
    print(f"  verdict: {type(res).__name__}")
    for cand in res.certificate.candidates:
        print(f"  candidate {cand.fn.text()}: {cand.verdict.text()}")

    print("\nArrows of the germ groupoid of the |x| chart.")
    G = build_groupoid(ATLAS_ABS)
    for x, y in [(0, 0), (F(1, 2), F(1, 2)), (F(1, 2), F(-1, 2)), (F(1, 2), F(1, 4))]:
        arrows, status = arrows_between(G, ObjPoint("V1", F(x)), ObjPoint("V1", F(y)))
        print(f"  |arrows({x}, {y})| = {len(arrows)}  [{status}]")

    print("\nThe marking sends the orbit of 1/2 to a point of [0, 1).")
    H = build_groupoid(ATLAS_SQUARE)
    print(f"  |x| chart: {marking_value(G, ObjPoint('V1', F(1, 2)))}")
    print(f"  x^2 chart: {marking_value(H, ObjPoint('V2', F(1, 2)))}")
    print(f"  unmarked serializations equal: {serialize(G, marked=False) == serialize(H, marked=False)}")
    print(f"  marked serializations equal:   {serialize(G) == serialize(H)}")


if __name__ == "__main__":
    main()
