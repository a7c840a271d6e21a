#!/usr/bin/env python3
"""Scan the asymptotic growth rate K = c*(M2 - M1 = 50) / 50 against D2.

Also fits K against log(D2) over the scanned range.
"""
import argparse
import math

from gfkpp import speed


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d2", type=float, nargs="+",
                    default=[0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0])
    ap.add_argument("--m-at", type=float, default=50.0)
    ap.add_argument("--out", default="asymptotic_slopes.csv")
    args = ap.parse_args()

    pairs = []
    with open(args.out, "w") as fh:
        fh.write("d2,K\n")
        for d2 in args.d2:
            k_val = speed.asymptotic_slope(d2, m_at=args.m_at)
            pairs.append((d2, k_val))
            fh.write(f"{d2:.12g},{k_val:.12g}\n")
            print(f"d2={d2:g}: K={k_val:.6f}")
    slope, intercept, r2 = speed.linear_fit([math.log(d) for d, _ in pairs],
                                            [v for _, v in pairs])
    print(f"K vs log(d2): slope={slope:.5f} intercept={intercept:.5f} r2={r2:.5f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
