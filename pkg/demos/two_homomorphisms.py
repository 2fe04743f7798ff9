"""One family of local lifts, two different maps.

The constant map to 0 lifts to the zero function on the |x| chart.  The
lifts alone do not pin down where -id goes: it may go to id or to -id.
Each choice gives a valid representative, and their groupoid
homomorphisms are told apart by the size of an isotropy image at 0.
"""

from __future__ import annotations

from orbifoldkit.charts import probe_points
from orbifoldkit.fixtures import V1, constant_rep
from orbifoldkit.groupoid import MarkedAtlasGroupoid, build_groupoid
from orbifoldkit.maps import (
    from_hom,
    refute_hom_equivalence,
    representatives_equivalent,
    to_hom,
    validate_representative,
)


def main() -> None:
    keep, flip = constant_rep(False), constant_rep(True)
    for name, rep in (("-id -> id", keep), ("-id -> -id", flip)):
        print(f"{name}: representative {validate_representative(rep).status}")

    phi, psi = to_hom(keep), to_hom(flip)
    neg = next(lam for lam in keep.P.elements if lam.name == "-id")
    print("\nImage of the germ of -id:")
    for x in probe_points(V1):
        if neg.fn.domain.contains(x):
            print(f"  at {x}: {phi.on_generator_germ(neg, x).germ.text()}  vs  "
                  f"{psi.on_generator_germ(neg, x).germ.text()}")

    print(f"\nrepresentatives equivalent: {representatives_equivalent(keep, flip)}")
    print(refute_hom_equivalence(phi, psi, keep.domain, flip.domain).text())

    back = from_hom(phi, MarkedAtlasGroupoid(keep.domain, keep.P), build_groupoid(keep.range))
    print(f"\nhomomorphism back to a representative, equivalent to the original: "
          f"{representatives_equivalent(back, keep)}")


if __name__ == "__main__":
    main()
