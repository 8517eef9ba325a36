"""Run every experiment config in configs/ and write JSON reports to results/."""

import argparse
import sys
import time
from pathlib import Path

from srlab.cli import load_config
from srlab.experiments import ExperimentConfig, emit_report, run_experiment

ROOT = Path(__file__).resolve().parent.parent
EXPERIMENT_CONFIGS = ["lebesgue_it2", "lebesgue_bt2", "discretization_curve", "bp1_rate", "oga_rate", "kashin",
                      "tau_lower", "gegenbauer_rate"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--only", nargs="*", default=None, help="config names to run")
    ap.add_argument("--out", default=str(ROOT / "results"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failed = []
    for name in args.only or EXPERIMENT_CONFIGS:
        t0 = time.perf_counter()
        report = run_experiment(ExperimentConfig.from_dict(load_config(ROOT / "configs" / f"{name}.yaml")))
        emit_report(report, "json", out / f"{name}.json")
        dt = time.perf_counter() - t0
        print(f"{name:22s} records={len(report.records):4d} pass_rate={report.pass_rate:.3f} {dt:6.1f}s")
        if not report.all_passed:
            failed.append(name)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
