"""Empirical number of points needed for C1 >= target on v-term trigonometric subspaces, for several N."""

import argparse

from srlab import estimate_m_required, trig_centered


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, nargs="+", default=[8, 16, 32])
    ap.add_argument("--v", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--C1", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'N':>4s} {'v':>3s} {'m':>6s}")
    for N in args.N:
        for v in args.v:
            m = estimate_m_required(trig_centered(N), v, args.C1, seed=args.seed, m_cap=2048)
            print(f"{N:4d} {v:3d} {m:>6}")


if __name__ == "__main__":
    main()
