"""Print the upper and lower n-term error curves for the Gegenbauer class and their fitted slopes."""

import argparse

from srlab.experiments import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--r", type=float, default=1.0)
    ap.add_argument("--theta", type=float, default=1.0)
    ap.add_argument("--degrees", type=int, default=256)
    ap.add_argument("--samples", type=int, default=8)
    ap.add_argument("--profile", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = ExperimentConfig(kind="gegenbauer-rate", samples=args.samples, seed=args.seed,
                           options={"alpha": args.alpha, "r": args.r, "theta": args.theta,
                                    "degree_count": args.degrees, "profile": args.profile})
    rep = run_experiment(cfg)
    rec = {r.instance: r for r in rep.records}
    up, lo = rec["upper/slope"].details, rec["lower/constant"].details
    print(f"{'n':>4s} {'upper':>12s} {'lower':>12s}  worst member")
    for n, u, low, w in zip(up["n"], up["curve"], lo["curve"], up["worst"]):
        print(f"{n:4d} {u:12.4e} {low:12.4e}  {w}")
    s = rep.summary
    print(f"target exponent -{s['rate']:.3f}; upper slope {s['upper_slope']:.3f} (bound {s['upper_bound']:.3f}); "
          f"lower slope {s['lower_slope']:.3f}, c = {s['lower_c']:.4e}")


if __name__ == "__main__":
    main()
