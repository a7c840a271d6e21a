#!/usr/bin/env python3
"""Scan the pulled-to-pushed transition point (M2 - M1)_trans against D2.

Writes d2,m_trans rows and prints least-squares slopes over the moderate
window [0.5, 3] and, when scanned, the large-D2 window [10, 20].  Points
where the pushed predicate never flips inside m in [0, 50] (the large-D2
regime where even M1 = M2 fronts are pushed) are recorded as m_trans = 0.
"""
import argparse

from gfkpp import speed
from gfkpp.errors import NoTransitionError


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d2", type=float, nargs="+",
                    default=[0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5,
                             2.75, 3.0, 3.5, 4.0, 4.5, 5.0])
    ap.add_argument("--out", default="transition_points.csv")
    args = ap.parse_args()

    pairs = []
    with open(args.out, "w") as fh:
        fh.write("d2,m_trans\n")
        for d2 in args.d2:
            try:
                m_trans = speed.transition_scan(d2).m_trans
            except NoTransitionError:
                m_trans = 0.0  # pushed already at M1 = M2
            pairs.append((d2, m_trans))
            fh.write(f"{d2:.12g},{m_trans:.12g}\n")
            print(f"d2={d2:g}: m_trans={m_trans:.5f}")
    for lo, hi in ((0.5, 3.0), (10.0, 20.0)):
        pts = [(d, v) for d, v in pairs if lo <= d <= hi]
        if len(pts) >= 3:
            slope, _, r2 = speed.linear_fit([p[0] for p in pts],
                                            [p[1] for p in pts])
            print(f"fit over d2 in [{lo:g},{hi:g}]: slope={slope:.4f} r2={r2:.4f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
