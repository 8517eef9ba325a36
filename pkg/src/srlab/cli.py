"""Command line entry point: ``srlab <subcommand> --config FILE [--seed S] [--out PATH] [--format json|csv]``.

Config files are YAML (JSON is accepted as a subset).  The exit code is 0
exactly when every asserted inequality of the run holds.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import yaml

from .analysis import as_points
from .dictionaries import Dictionary, Expansion, load_dictionary
from .discretization import (PointSet, equispaced_points, find_universal_points, random_points,
                             verify_universal_discretization)
from .errors import ParameterError, SrlabError
from .experiments import ExperimentConfig, dumps_json, emit_report, run_experiment
from .lower_bounds import check_condition_D1, tau_m_witness
from .oracles import sigma_v
from .recovery import recover_function, sparse_ls_recover
from .subsets import DEFAULT_CAP

SUBCOMMANDS = ("verify", "find-points", "recover", "sigma", "lower-bound", "experiment")


def load_config(path: str | Path) -> dict:
    data = yaml.safe_load(Path(path).read_text())
    if not isinstance(data, dict):
        raise ParameterError(f"{path}: config must be a mapping")
    return data


def load_points(spec, dictionary: Dictionary, seed: int = 0) -> PointSet:
    """``{kind: equispaced, m}``, ``{kind: random, m, seed}``, ``{file: PATH}`` or ``{values: [...], weights}``."""
    measure = dictionary.measure
    if "file" in spec:
        data = yaml.safe_load(Path(spec["file"]).read_text())
        return PointSet.from_dict(data["points"] if "points" in data and isinstance(data["points"], dict)
                                  else data)
    if "values" in spec:
        return PointSet(as_points(np.asarray(spec["values"], dtype=float), measure.d), spec.get("weights"),
                        "user", None, measure)
    kind = spec.get("kind", "random")
    if kind == "equispaced":
        return equispaced_points(measure, int(spec["m"]))
    if kind == "random":
        s = int(spec.get("seed", seed))
        return random_points(measure, int(spec["m"]), np.random.default_rng(s), seed=s)
    raise ParameterError(f"unknown point set kind {kind!r}")


def _coefficients(spec) -> np.ndarray:
    c = spec["coefficients"]
    if isinstance(c, dict):
        return np.asarray(c["re"], dtype=float) + 1j * np.asarray(c.get("im", np.zeros(len(c["re"]))), dtype=float)
    return np.asarray(c, dtype=float)


def load_function(spec, dictionary: Dictionary) -> Expansion:
    """``{coefficients: [...] | {re, im}, dictionary: <optional other system>}``."""
    dic = load_dictionary(spec["dictionary"]) if "dictionary" in spec else dictionary
    c = _coefficients(spec)
    if len(c) != dic.size:
        raise ParameterError(f"expected {dic.size} coefficients, got {len(c)}")
    return Expansion(dic, c)


def _cmd_verify(cfg, args):
    dic = load_dictionary(cfg["dictionary"])
    ps = load_points(cfg["points"], dic, args.seed)
    rep = verify_universal_discretization(dic, ps, int(cfg["v"]), side=cfg.get("side", "one-sided"),
                                          cap=int(cfg.get("cap", DEFAULT_CAP)))
    ok = True
    if "target_C1" in cfg:
        rep.target_C1 = float(cfg["target_C1"])
        rep.target_met = ok = rep.C1 >= rep.target_C1
    return rep.to_dict(), ok


def _cmd_find_points(cfg, args):
    dic = load_dictionary(cfg["dictionary"])
    ps, rep = find_universal_points(dic, int(cfg["v"]), float(cfg.get("target_C1", 0.5)), int(cfg["m"]),
                                    seed=args.seed, max_attempts=int(cfg.get("max_attempts", 20)),
                                    side=cfg.get("side", "one-sided"), sampling=cfg.get("sampling", "random"),
                                    cap=int(cfg.get("cap", DEFAULT_CAP)))
    return {"points": ps.to_dict(), "report": rep.to_dict()}, bool(rep.target_met)


def _cmd_recover(cfg, args):
    dic = load_dictionary(cfg["dictionary"])
    ps = load_points(cfg["points"], dic, args.seed)
    v = int(cfg["v"])
    strategy = cfg.get("strategy", "exhaustive")
    cap = int(cfg.get("cap", DEFAULT_CAP))
    if "function" in cfg:
        approx = recover_function(load_function(cfg["function"], dic), ps, dic, v, strategy=strategy, cap=cap)
    else:
        samples = np.asarray(cfg["samples"], dtype=float)
        if "samples_im" in cfg:
            samples = samples + 1j * np.asarray(cfg["samples_im"], dtype=float)
        q = dic.quadrature()
        if "quadrature_values" in cfg:
            fq = np.asarray(cfg["quadrature_values"], dtype=float)
            if "quadrature_values_im" in cfg:
                fq = fq + 1j * np.asarray(cfg["quadrature_values_im"], dtype=float)
        elif strategy == "greedy":
            fq = np.zeros(len(q.nodes))
        else:
            raise ParameterError("exhaustive recovery needs quadrature_values (the L2 error selects the subset)")
        approx = sparse_ls_recover(samples, fq, ps, dic, v, q, strategy, cap)
        if "quadrature_values" not in cfg:
            approx.residual_l2 = approx.residual_mu_xi = None
    return approx.to_dict(), True


def _cmd_sigma(cfg, args):
    dic = load_dictionary(cfg["dictionary"])
    f = load_function(cfg["function"], dic)
    norm = cfg.get("norm", "l2")
    ps = load_points(cfg["points"], dic, args.seed) if "points" in cfg else None
    res = sigma_v(f, dic, int(cfg["v"]), norm, points=ps, grid_size=cfg.get("grid_size"),
                  cap=int(cfg.get("cap", DEFAULT_CAP)), extra_points=ps if norm == "uniform" else None)
    return res.to_dict(), True


def _cmd_lower_bound(cfg, args):
    dic = load_dictionary(cfg["dictionary"])
    p = float(cfg.get("p", 2.0))
    d1 = load_points(cfg.get("d1_points", {"kind": "equispaced", "m": dic.size}), dic, args.seed)
    xi = load_points(cfg["xi"], dic, args.seed)
    rng = np.random.default_rng(args.seed)
    cert = check_condition_D1(dic, d1, p, rng=rng)
    wit = tau_m_witness(dic, xi, p, cert, rng=rng)
    return {"D1": cert.to_dict() | {"points": cert.points.tolist()}, "witness": wit.to_dict(),
            "tau_lower": wit.tau_lower, "theorem_bound": wit.theorem_bound}, bool(wit.valid)


def _cmd_experiment(cfg, args):
    if args.seed is not None:
        cfg["seed"] = args.seed
    report = run_experiment(ExperimentConfig.from_dict(cfg))
    return report, report.all_passed


HANDLERS = {"verify": _cmd_verify, "find-points": _cmd_find_points, "recover": _cmd_recover,
            "sigma": _cmd_sigma, "lower-bound": _cmd_lower_bound, "experiment": _cmd_experiment}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="srlab", description="Sparse recovery and discretization experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="YAML or JSON config file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None, help="output path (stdout when omitted)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command != "experiment":
            args.seed = int(cfg.get("seed", 0)) if args.seed is None else args.seed
        result, ok = HANDLERS[args.command](cfg, args)
        if args.command == "experiment":
            out = args.out or cfg.get("output")
            text = emit_report(result, args.format, out)
        else:
            if args.format == "csv":
                raise ParameterError("csv output is only available for experiment reports")
            text = dumps_json(result)
            out = args.out
            if out:
                Path(out).write_text(text)
        if not out:
            sys.stdout.write(text)
    except (SrlabError, OSError, KeyError, yaml.YAMLError) as exc:
        print(f"srlab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
