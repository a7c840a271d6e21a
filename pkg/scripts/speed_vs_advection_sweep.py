#!/usr/bin/env python3
"""Sweep the minimal wave speed against the advection difference M2 - M1.

Produces the three-curve study (D2 in {0.5, 1, 2}, D1 = k = 1): the D2 = 1
curve has a closed form; the others run the phase-plane solver.
"""
import argparse

from gfkpp import speed


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d2", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--m-max", type=float, default=10.0)
    ap.add_argument("--m-step", type=float, default=0.1)
    ap.add_argument("--out", default="speed_vs_advection.csv")
    args = ap.parse_args()

    n = int(round(args.m_max / args.m_step))
    m_vals = [i * args.m_step for i in range(n + 1)]
    rows = speed.sweep_m2(args.d2, m_vals)
    with open(args.out, "w") as fh:
        fh.write("d2,m2_minus_m1,c_star,regime\n")
        for d2, m, c, front in rows:
            c_txt = "nan" if c is None else f"{c:.12g}"
            fh.write(f"{d2:.12g},{m:.12g},{c_txt},{front}\n")
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
