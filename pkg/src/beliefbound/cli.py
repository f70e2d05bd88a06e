"""Command-line front end.

Subcommands
-----------
check       structural checks plus empirical filter-monotonicity validation
bounds      solve the transform feasibility systems, write a certificate file
plan        run the planner at one belief (with a certificate or --no-prune)
policy-map  tabulate the myopic policy interval over a simplex grid (CSV)
gen-domain  generate a tracking model file
experiment  pruning / gap / sweep experiment CSVs

Exit codes: 0 success (including a cleanly reported infeasibility),
1 domain or assumption failure, 2 I/O or parse failure.  All floating
point output uses 17 significant digits so reruns are byte-stable.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import domains, mlr, planner, structure
from .filter import sample_belief, sample_reachable
from .model import (
    ModelFormatError,
    ModelValidationError,
    PomdpModel,
    RewardSpec,
    UncertaintyKind,
    load_model,
    save_model,
)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Read a CSV written by :func:`write_csv`; returns (header, rows of strings)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"{path}: row width {len(row)} != header width {len(header)}")
    return header, rows


class _CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_model_or_exit(path) -> PomdpModel:
    try:
        return load_model(path)
    except FileNotFoundError as exc:
        raise _CliError(f"cannot read model file: {exc}", EXIT_IO)
    except (ModelFormatError, ModelValidationError) as exc:
        raise _CliError(str(exc), EXIT_IO)


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_check(args) -> int:
    model = _load_model_or_exit(args.model)
    report = structure.check_all(model, n_samples=args.a2_samples, seed=args.seed)
    mono = structure.validate_filter_monotonicity(model, n_samples=args.samples, seed=args.seed)
    doc = {
        "a1_pass": report.a1_pass,
        "a2_relaxed_pass": report.a2_relaxed_pass,
        "a2_relaxed_level": "sufficient",
        "a2_sampled_pass": report.a2_sampled_pass,
        "a2_sampled_level": "evidence",
        "a3_pass": report.a3_pass,
        "counterexamples": [
            {"tag": tag, "index": list(idx), "value": val}
            for tag, idx, val in report.counterexamples
        ],
        "filter_monotonicity": {
            "n_samples": mono.n_samples,
            "likelihood_violations": mono.likelihood_violations,
            "posterior_violations": mono.posterior_violations,
        },
    }
    print(json.dumps(doc, indent=2))
    ok = report.a1_pass and report.a2_relaxed_pass and report.a3_pass
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_bounds(args) -> int:
    model = _load_model_or_exit(args.model)
    if args.epsilon is not None:
        reward = RewardSpec(state_reward=model.reward.state_reward,
                            weights=model.reward.weights,
                            kind=model.reward.kind, epsilon=args.epsilon)
        model = PomdpModel(transitions=model.transitions,
                           observations=model.observations,
                           discount=model.discount, reward=reward)
    try:
        cert = mlr.compute_certificate(model, mode=args.mode)
    except mlr.NumericFailureError as exc:
        return _fail(f"feasibility solve failed: {exc}", EXIT_DOMAIN)
    if args.out:
        mlr.save_certificate(cert, args.out)
    doc = {
        "mode": cert.mode,
        "lower": {"status": "feasible" if cert.g is not None else "infeasible",
                  "min_slack": cert.min_slack_g},
        "upper": {"status": "feasible" if cert.h is not None else "infeasible",
                  "min_slack": cert.min_slack_h},
        "epsilon": cert.epsilon,
        "certificate": args.out,
    }
    if args.mode == mlr.MODE_TIGHT and model.reward.kind is UncertaintyKind.RENYI_QUADRATIC:
        doc["caveat"] = ("tight-mode quadratic-entropy bound is not a supremum of the "
                         "belief term; conservative mode is provably sufficient")
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def _parse_belief(text: str, num_states: int) -> np.ndarray:
    try:
        values = np.array([float(tok) for tok in text.split(",")], dtype=float)
    except ValueError as exc:
        raise _CliError(f"belief is not a comma-separated number list: {exc}", EXIT_IO)
    if len(values) != num_states:
        raise _CliError(f"belief has {len(values)} entries, model has {num_states} states",
                        EXIT_DOMAIN)
    if not np.isfinite(values).all() or abs(values.sum() - 1.0) > 1e-6 or (values < 0).any():
        raise _CliError(f"belief must be finite, nonnegative and sum to 1 "
                        f"(got sum {values.sum()})", EXIT_DOMAIN)
    return values / values.sum()


def cmd_plan(args) -> int:
    model = _load_model_or_exit(args.model)
    belief = _parse_belief(args.belief, model.num_states)
    if args.no_prune:
        cert = None
    elif args.cert:
        cert = mlr.load_certificate(args.cert)
    else:
        return _fail("plan needs a certificate path or --no-prune", EXIT_IO)
    t0 = time.perf_counter()
    if cert is None:
        result = planner.expectimax(model, belief, args.depth)
        interval = None
    else:
        result = planner.branch_and_bound(model, cert, belief, args.depth)
        interval = list(mlr.action_interval(model, cert, belief))
    wall_ms = (time.perf_counter() - t0) * 1e3
    doc = {
        "best_action": result.best_action,
        "value": result.value,
        "expanded": result.expanded,
        "pruned": result.pruned,
        "root_interval": interval,
        "depth": args.depth,
        "wall_ms": wall_ms,
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def _simplex_grid(num_states: int, resolution: int):
    if num_states == 2:
        for i in range(resolution + 1):
            yield np.array([i, resolution - i], dtype=float) / resolution
    elif num_states == 3:
        for i in range(resolution + 1):
            for j in range(resolution + 1 - i):
                yield np.array([i, j, resolution - i - j], dtype=float) / resolution
    else:
        raise ValueError("simplex grids are only generated for 2 or 3 states")


def cmd_policy_map(args) -> int:
    model = _load_model_or_exit(args.model)
    cert = mlr.load_certificate(args.cert)
    S = model.num_states
    if args.samples:
        rng = np.random.default_rng(args.seed)
        beliefs = [sample_belief(S, rng) for _ in range(args.samples)]
    else:
        if S > 3:
            return _fail("grid mode needs S <= 3; use --samples for larger models",
                         EXIT_DOMAIN)
        if args.resolution < 2:
            return _fail("resolution must be >= 2", EXIT_DOMAIN)
        beliefs = list(_simplex_grid(S, args.resolution))
    header = [f"b{i+1}" for i in range(S)] + ["lower", "upper", "agree"]
    rows = []
    for b in beliefs:
        lo, hi = mlr.action_interval(model, cert, b)
        rows.append(list(b) + [lo, hi, lo == hi])
    write_csv(args.out, header, rows)
    agree = sum(1 for r in rows if r[-1])
    print(json.dumps({"rows": len(rows), "agree": agree, "out": args.out}))
    return EXIT_OK


def cmd_gen_domain(args) -> int:
    if args.family != "tracking":
        return _fail(f"unknown domain family '{args.family}'", EXIT_DOMAIN)
    try:
        if args.variant == "small":
            model = domains.tracking_model_small()
        else:
            model = domains.tracking_model_costed(args.states, args.actions, q=args.q)
    except ValueError as exc:
        return _fail(str(exc), EXIT_DOMAIN)
    save_model(model, args.out)
    print(json.dumps({"out": args.out, "S": model.num_states, "A": model.num_actions,
                      "Z": model.num_observations}))
    return EXIT_OK


def _parse_depths(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",")]


def _parse_sizes(text: str) -> list[tuple[int, int]]:
    sizes = []
    for tok in text.split(","):
        s, a = tok.lower().split("x")
        sizes.append((int(s), int(a)))
    return sizes


def _experiment_model_cert(args):
    if args.model:
        model = _load_model_or_exit(args.model)
    else:
        model = domains.tracking_model_costed(8, 3, q=0.8)
    if args.cert:
        cert = mlr.load_certificate(args.cert)
    else:
        cert = mlr.compute_certificate(model)
    return model, cert


def cmd_experiment(args) -> int:
    if args.kind == "pruning":
        model, cert = _experiment_model_cert(args)
        stats = planner.pruning_experiment(model, cert, _parse_depths(args.depths),
                                           args.samples, seed=args.seed)
        rows = [[r.depth, r.n_samples, r.mean_pruned_frac, r.min_pruned_frac,
                 r.max_pruned_frac, r.mean_ms] for r in stats.rows]
        write_csv(args.out, ["depth", "n_samples", "mean_pruned_frac", "min", "max", "mean_ms"],
                  rows)
    elif args.kind == "gap":
        model, cert = _experiment_model_cert(args)
        stats = planner.bound_gap_experiment(model, cert, args.samples, seed=args.seed,
                                             reference_depth=args.ref_depth)
        write_csv(args.out,
                  ["n_samples", "reference_depth", "mean_interval_width",
                   "mean_upper_minus_reference"],
                  [[stats.n_samples,
                    -1 if stats.reference_depth is None else stats.reference_depth,
                    stats.mean_interval_width,
                    float("nan") if stats.mean_upper_minus_reference is None
                    else stats.mean_upper_minus_reference]])
    elif args.kind == "sweep":
        rows = []
        for S, A in _parse_sizes(args.sizes):
            model = domains.tracking_model_costed(S, A, q=0.8)
            cert = mlr.compute_certificate(model)
            feasible = cert.g is not None and cert.h is not None
            rng = np.random.default_rng(args.seed)
            uniform = np.full(S, 1.0 / S)
            fracs = np.zeros(args.samples)
            for i in range(args.samples):
                depth = int(rng.integers(0, 5))
                b = sample_reachable(model, uniform, depth, rng)
                lo, hi = mlr.action_interval(model, cert, b)
                fracs[i] = 1.0 - (hi - lo + 1) / A
            rows.append([S, A, 100.0 * fracs.min(), 100.0 * fracs.mean(),
                         100.0 * fracs.max(), feasible])
        write_csv(args.out, ["S", "A", "min_pct", "mean_pct", "max_pct", "feasible"], rows)
    print(json.dumps({"kind": args.kind, "out": args.out}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beliefbound",
                                     description="Myopic policy bounds for POMDP planning")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="structural checks and filter-monotonicity validation")
    p.add_argument("model")
    p.add_argument("--samples", type=int, default=500, help="beliefs for monotonicity validation")
    p.add_argument("--a2-samples", type=int, default=100, help="probe vectors per quadratic form")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bounds", help="solve the feasibility systems, write a certificate")
    p.add_argument("model")
    p.add_argument("--mode", choices=[mlr.MODE_TIGHT, mlr.MODE_CONSERVATIVE],
                   default=mlr.MODE_TIGHT)
    p.add_argument("--epsilon", type=float, default=None,
                   help="override the Shannon inner-simplex epsilon")
    p.add_argument("--out", default=None, help="certificate output path")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("plan", help="plan at one belief")
    p.add_argument("model")
    p.add_argument("cert", nargs="?", default=None)
    p.add_argument("--no-prune", action="store_true", help="exhaustive search, no certificate")
    p.add_argument("--belief", required=True, help="comma-separated belief vector")
    p.add_argument("--depth", type=int, default=3)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("policy-map", help="tabulate the policy interval over the simplex")
    p.add_argument("model")
    p.add_argument("cert")
    p.add_argument("--resolution", type=int, default=50)
    p.add_argument("--samples", type=int, default=None,
                   help="sample beliefs instead of a grid (required for S > 3)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_policy_map)

    p = sub.add_parser("gen-domain", help="generate a model file")
    p.add_argument("family", choices=["tracking"])
    p.add_argument("--states", type=int, default=8)
    p.add_argument("--actions", type=int, default=3)
    p.add_argument("--q", type=float, default=0.8)
    p.add_argument("--variant", choices=["small", "costed"], default="costed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_domain)

    p = sub.add_parser("experiment", help="run an experiment and write a CSV")
    p.add_argument("kind", choices=["pruning", "gap", "sweep"])
    p.add_argument("--model", default=None, help="model file (default: costed 8-state tracking)")
    p.add_argument("--cert", default=None, help="certificate file (default: computed)")
    p.add_argument("--depths", default="2,3,4")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", default="4x4,4x8,8x4,8x8,16x4,16x8")
    p.add_argument("--ref-depth", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "experiment" and args.samples is None:
        args.samples = 100 if args.kind == "pruning" else 500
    try:
        return args.func(args)
    except _CliError as exc:
        return _fail(str(exc), exc.code)
    except FileNotFoundError as exc:
        return _fail(str(exc), EXIT_IO)
    except (ModelFormatError, ModelValidationError, json.JSONDecodeError) as exc:
        return _fail(str(exc), EXIT_IO)
    except ValueError as exc:
        return _fail(str(exc), EXIT_DOMAIN)


if __name__ == "__main__":
    sys.exit(main())
