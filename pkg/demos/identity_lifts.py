"""Lifts of the identity all name the same map.

Each restriction atlas of the |x| chart maps into it by inclusions, possibly
composed with -id.  These are lifts of the identity: their homomorphisms are
unit weak equivalences, and any two of them share a common refinement.
"""

from __future__ import annotations

from itertools import combinations

from orbifoldkit.fixtures import constant_rep, identity_lifts, square_lift_rep
from orbifoldkit.groupoid import MarkedAtlasGroupoid, build_groupoid
from orbifoldkit.maps import (
    common_refinement_witness,
    is_unit_weak_equivalence,
    to_hom,
    verify_equivalence_witness,
)


def verdict(m):
    rep = getattr(m, "rep", m)
    return is_unit_weak_equivalence(to_hom(m), MarkedAtlasGroupoid(rep.domain, rep.P),
                                    build_groupoid(rep.range))


def main() -> None:
    lifts = identity_lifts()
    print("Unit weak equivalence (induced lift check / structural check):")
    for k, e in enumerate(lifts):
        v = verdict(e)
        print(f"  lift {k} from {e.rep.domain.ids()}: {v.via_f2} / {v.structural}")
    for name, rep in (("x^2 lift", square_lift_rep()), ("constant 0", constant_rep(False))):
        v = verdict(rep)
        print(f"  {name}: {v.via_f2} / {v.structural}  ({v.reason})")

    print("\nCommon refinements between lifts:")
    for (i, a), (j, b) in combinations(enumerate(lifts), 2):
        w = common_refinement_witness(a, b)
        print(f"  {i} ~ {j}: {type(w).__name__}, verified {verify_equivalence_witness(a, b, w)}")


if __name__ == "__main__":
    main()
