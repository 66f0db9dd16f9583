"""Command-line interface for division and network compression runs.

Subcommands: divide-exact, divide-approx, divide-composite, compress,
prune-l1, evaluate, count-params.  Inputs and outputs use the package's
JSON formats (polynomials as {"dim", "terms": [{"a", "b"}]} under "p"
and "d", composites as {"dim", "units"}, networks as {"input_dim",
"layers"}) and headerless CSV for samples/labels.  Results go to --out
(stdout by default); error traces go to --trace as headerless
"iteration,value" CSV rows.

Every run writes a manifest JSON (command, echoed configuration, seed,
timings, output paths, post-run check results) so it can be reproduced:
same flags give bit-identical outputs in rational mode and outputs
within 1e-9 in float mode.  Runtime failures print one machine-readable
JSON line to stderr and exit 1; argparse rejects unknown flags with
exit 2.  The TROPDIV_TOL environment variable overrides the default
tolerance of the post-run checks; --tol overrides both.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from .approx import ApproxConfig, approx_divide
from .composite import (
    composite,
    composite_from_dict,
    composite_fw_run,
    composite_to_dict,
    evaluate_composite_many,
    FwConfig,
    quotient_feasible,
    unit_arrays,
)
from .compress import (
    CompressConfig,
    binary_reduce,
    compress_binary_maxout,
    compress_binary_relu,
    compress_multibinary,
    compress_multiclass,
    count_params,
    evaluate_error,
    l1_structured_prune,
    load_network,
    model_features,
    model_from_dict,
    model_scores,
    model_to_dict,
    multiclass_common_denominator,
    network_from_dict,
    network_to_dict,
    to_tropical_pair,
)
from .core import (
    DivisionProblem,
    evaluate_many,
    poly_from_dict,
    result_to_dict,
)
from .exact import exact_divide

DEFAULT_TOL = 1e-9


def _tolerance(value: float | None) -> float:
    if value is not None:
        return value
    return float(os.environ.get("TROPDIV_TOL", DEFAULT_TOL))


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def _read_csv(path: str, count: int | None = None) -> np.ndarray:
    rows = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    return rows if count is None else rows[:count]


def _read_labels(path: str, count: int | None = None) -> np.ndarray:
    labels = np.loadtxt(path, delimiter=",", ndmin=1, dtype=float)
    return labels if count is None else labels[:count]


def _write_result(args, payload: dict) -> list[str]:
    if args.out == "-":
        json.dump(payload, sys.stdout)
        sys.stdout.write("\n")
        return []
    with open(args.out, "w", encoding="utf-8") as handle:
        json.dump(payload, handle)
    return [args.out]


def _write_trace(path: str | None, values) -> list[str]:
    if path is None:
        return []
    with open(path, "w", encoding="utf-8") as handle:
        for i, value in enumerate(values):
            handle.write(f"{i},{value!r}\n")
    return [path]


def _config_echo(args) -> dict:
    skip = {"func", "command"}
    return {key: value for key, value in sorted(vars(args).items())
            if key not in skip}


def _emit_manifest(args, started: float, outputs: list[str],
                   checks: dict) -> None:
    manifest = {
        "command": args.command,
        "config": _config_echo(args),
        "seed": getattr(args, "seed", None),
        "started_at": datetime.fromtimestamp(started,
                                             timezone.utc).isoformat(),
        "elapsed_seconds": time.time() - started,
        "outputs": outputs,
        "checks": checks,
    }
    path = args.manifest
    if path is None:
        path = (args.out + ".manifest.json" if args.out != "-"
                else "run-manifest.json")
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle)


def _load_problem(path: str, exact: bool) -> DivisionProblem:
    data = _read_json(path)
    return DivisionProblem(poly_from_dict(data["p"], exact=exact),
                           poly_from_dict(data["d"], exact=exact))


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------

def _cmd_divide_exact(args) -> int:
    started = time.time()
    problem = _load_problem(args.problem, exact=True)
    result = exact_divide(problem)
    outputs = _write_result(args, result_to_dict(result))
    _emit_manifest(args, started, outputs, {})
    return 0


def _cmd_divide_approx(args) -> int:
    started = time.time()
    tol = _tolerance(args.tol)
    problem = _load_problem(args.problem, exact=False)
    config = ApproxConfig(terms=args.terms, samples=args.samples,
                          max_iterations=args.iterations,
                          restarts=args.restarts, seed=args.seed,
                          distribution=args.distribution)
    result = approx_divide(problem, config)
    outputs = _write_result(args, result_to_dict(result))
    outputs += _write_trace(args.trace, result.error_trace or ())
    checks = {}
    if result.nontrivial:
        # on the sample distribution, (d + q) v r must reproduce p
        rng = np.random.default_rng(config.seed)
        probes = rng.normal(size=(config.samples, problem.dim))
        cover = (evaluate_many(problem.d, probes)
                 + evaluate_many(result.quotient, probes))
        if result.remainder.terms:
            cover = np.maximum(cover, evaluate_many(result.remainder, probes))
        gap = float(np.abs(cover - evaluate_many(problem.p, probes)).max())
        checks["cover_gap"] = gap
        checks["cover_within_tol"] = bool(gap <= tol)
    _emit_manifest(args, started, outputs, checks)
    return 0


def _cmd_divide_composite(args) -> int:
    started = time.time()
    tol = _tolerance(args.tol)
    p = composite_from_dict(_read_json(args.composite))
    pts = _read_csv(args.samples, args.sample_count)
    run = composite_fw_run(p, FwConfig(points=pts, terms=args.terms,
                                       step=args.step,
                                       iterations=args.iterations,
                                       seed=args.seed))
    quotient = composite(zip(map(tuple, run.slopes), run.biases), p.dim)
    outputs = _write_result(args, {"quotient": composite_to_dict(quotient)})
    outputs += _write_trace(args.trace, run.objective)
    W, beta = unit_arrays(p)
    checks = {"certificate_feasible": quotient_feasible(
        W.T, beta, quotient, tol=max(tol, 1e-12))}
    _emit_manifest(args, started, outputs, checks)
    return 0


def _parse_classes(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("--classes expects two comma-separated indices")
    return int(parts[0]), int(parts[1])


def _parse_pairs(text: str, classes: int) -> list[tuple[int, int]]:
    if text == "all":
        return [(i, j) for i in range(classes) for j in range(i + 1, classes)]
    pairs = []
    for chunk in text.split(","):
        left, sep, right = chunk.partition("-")
        if not sep:
            raise ValueError("--pairs expects 'all' or chunks like 0-1,0-2")
        pairs.append((int(left), int(right)))
    return pairs


def _binary_check(pair, model, pts, tol) -> dict:
    sides = (pair.positive, pair.negative)
    worst = 0.0
    for side, (slopes, biases) in zip(sides, model.groups):
        if side is None:
            continue
        p_vals = evaluate_composite_many(side, pts)
        z = pts @ slopes.T + biases
        q_vals = (z.max(axis=1) if model.kind == "maxout-binary"
                  else np.maximum(z, 0.0).sum(axis=1))
        worst = max(worst, float((q_vals - p_vals).max()))
    return {"sample_overshoot": worst,
            "quotients_below_dividends": bool(worst <= tol)}


def _cmd_compress(args) -> int:
    started = time.time()
    tol = _tolerance(args.tol)
    net = load_network(args.network)
    pts = _read_csv(args.samples, args.sample_count)
    config = CompressConfig(points=pts, terms=args.terms,
                            iterations=args.iterations,
                            restarts=args.restarts, seed=args.seed,
                            step=args.step,
                            fw_iterations=args.fw_iterations)
    checks: dict = {}
    if args.kind in ("maxout-binary", "relu-binary"):
        if args.classes is not None:
            net = binary_reduce(net, _parse_classes(args.classes))
        pair = to_tropical_pair(net)
        if args.kind == "maxout-binary":
            model = compress_binary_maxout(pair, config)
        else:
            model = compress_binary_relu(pair, config)
        checks = _binary_check(pair, model, config.points, tol)
    elif args.kind == "multiclass-simplified":
        model = compress_multiclass(net, config, jobs=args.jobs)
        _, weights, class_biases = multiclass_common_denominator(net)
        hidden = net.layers[0]
        Z = config.points @ hidden.weights.T + hidden.biases
        shifted = np.maximum(Z, 0.0) @ weights.T
        fitted = model_scores(model, config.points) - class_biases
        worst = float((fitted - shifted).max())
        checks = {"sample_overshoot": worst,
                  "quotients_below_dividends": bool(worst <= tol)}
    else:
        pairs = _parse_pairs(args.pairs, net.output_dim)
        model = compress_multibinary(net, pairs, args.subset, config,
                                     features=args.features, jobs=args.jobs)
    outputs = _write_result(args, model_to_dict(model))
    if args.features_out is not None:
        if args.kind.endswith("-binary"):
            raise ValueError("binary models expose no feature interface")
        fpts = (config.points if args.feature_samples is None
                else _read_csv(args.feature_samples, None))
        np.savetxt(args.features_out, model_features(model, fpts),
                   delimiter=",")
        outputs.append(args.features_out)
    _emit_manifest(args, started, outputs, checks)
    return 0


def _cmd_prune_l1(args) -> int:
    started = time.time()
    net = load_network(args.network)
    pruned = l1_structured_prune(net, args.keep, norm=args.norm)
    outputs = _write_result(args, network_to_dict(pruned))
    _emit_manifest(args, started, outputs, {})
    return 0


def _load_scorer(path: str):
    data = _read_json(path)
    if "kind" in data:
        return model_from_dict(data)
    if "layers" in data:
        return network_from_dict(data)
    raise ValueError("expected a compressed-model or network JSON file")


def _cmd_evaluate(args) -> int:
    started = time.time()
    scorer = _load_scorer(args.model)
    pts = _read_csv(args.samples, args.sample_count)
    labels = _read_labels(args.labels, args.sample_count)
    rate = evaluate_error(scorer, pts, labels)
    outputs = _write_result(args, {"error_rate": rate,
                                   "samples": len(labels)})
    _emit_manifest(args, started, outputs, {})
    return 0


def _cmd_count_params(args) -> int:
    started = time.time()
    if args.model is not None:
        total = count_params(_load_scorer(args.model))
    elif args.kind is not None:
        if args.n is None:
            raise ValueError("--kind needs --n")
        dims = {"n": args.n, "hidden": args.hidden, "terms": args.terms,
                "classes": args.classes, "head_units": args.head_units,
                "polynomials": args.polynomials}
        total = count_params(args.kind, **dims)
    else:
        raise ValueError("need --model or --kind")
    outputs = _write_result(args, {"params": total})
    _emit_manifest(args, started, outputs, {})
    return 0


# ---------------------------------------------------------------------------
# Parser.
# ---------------------------------------------------------------------------

def _add_io_flags(sub, trace: bool = False) -> None:
    sub.add_argument("--out", default="-",
                     help="result JSON path, '-' for stdout")
    sub.add_argument("--manifest", default=None,
                     help="manifest path (default: <out>.manifest.json, "
                          "or run-manifest.json when printing)")
    if trace:
        sub.add_argument("--trace", default=None,
                         help="error-trace CSV path (iteration,value rows)")


def _add_tol_flag(sub) -> None:
    sub.add_argument("--tol", type=float, default=None,
                     help="post-run check tolerance "
                          "(default: $TROPDIV_TOL or 1e-9)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tropdiv",
        description="Divide max-plus polynomials and compress ReLU nets.")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("divide-exact",
                              help="exact division of p by d")
    sub.add_argument("--problem", required=True,
                     help="JSON file with 'p' and 'd' polynomials")
    _add_io_flags(sub)
    sub.set_defaults(func=_cmd_divide_exact)

    sub = commands.add_parser("divide-approx",
                              help="budgeted approximate division")
    sub.add_argument("--problem", required=True)
    sub.add_argument("--terms", type=int, required=True)
    sub.add_argument("--samples", type=int, default=200)
    sub.add_argument("--iterations", type=int, default=20)
    sub.add_argument("--restarts", type=int, default=1)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--distribution", choices=("normal", "uniform"),
                     default="normal")
    _add_tol_flag(sub)
    _add_io_flags(sub, trace=True)
    sub.set_defaults(func=_cmd_divide_approx)

    sub = commands.add_parser("divide-composite",
                              help="budgeted composite quotient by zero")
    sub.add_argument("--composite", required=True,
                     help="composite polynomial JSON file")
    sub.add_argument("--samples", required=True,
                     help="sample CSV, one input row per line")
    sub.add_argument("--sample-count", type=int, default=None)
    sub.add_argument("--terms", type=int, required=True)
    sub.add_argument("--step", type=float, default=0.2)
    sub.add_argument("--iterations", type=int, default=50)
    sub.add_argument("--seed", type=int, default=0)
    _add_tol_flag(sub)
    _add_io_flags(sub, trace=True)
    sub.set_defaults(func=_cmd_divide_composite)

    sub = commands.add_parser("compress",
                              help="compress a one-hidden-layer ReLU net")
    sub.add_argument("--network", required=True)
    sub.add_argument("--samples", required=True)
    sub.add_argument("--sample-count", type=int, default=None)
    sub.add_argument("--kind", required=True,
                     choices=("maxout-binary", "relu-binary",
                              "multiclass-simplified",
                              "multiclass-multibinary"))
    sub.add_argument("--terms", type=int, required=True)
    sub.add_argument("--classes", default=None,
                     help="two class indices 'i1,i2' for binary kinds")
    sub.add_argument("--pairs", default="all",
                     help="'all' or chunks like 0-1,0-2 (multibinary)")
    sub.add_argument("--subset", type=int, default=None,
                     help="kept polynomial count (multibinary)")
    sub.add_argument("--features", choices=("quotient", "random"),
                     default="quotient")
    sub.add_argument("--iterations", type=int, default=20)
    sub.add_argument("--restarts", type=int, default=1)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--step", type=float, default=0.2)
    sub.add_argument("--fw-iterations", type=int, default=50)
    sub.add_argument("--jobs", type=int, default=1)
    sub.add_argument("--features-out", default=None,
                     help="CSV of per-sample feature values (head training;"
                          " multiclass kinds only)")
    sub.add_argument("--feature-samples", default=None,
                     help="points for --features-out; default: --samples")
    _add_tol_flag(sub)
    _add_io_flags(sub)
    sub.set_defaults(func=_cmd_compress)

    sub = commands.add_parser("prune-l1",
                              help="L1 structured pruning baseline")
    sub.add_argument("--network", required=True)
    sub.add_argument("--keep", type=int, required=True)
    sub.add_argument("--norm", choices=("full", "incoming"), default="full")
    _add_io_flags(sub)
    sub.set_defaults(func=_cmd_prune_l1)

    sub = commands.add_parser("evaluate",
                              help="misclassification rate of a model")
    sub.add_argument("--model", required=True,
                     help="compressed-model or network JSON")
    sub.add_argument("--samples", required=True)
    sub.add_argument("--labels", required=True)
    sub.add_argument("--sample-count", type=int, default=None)
    _add_io_flags(sub)
    sub.set_defaults(func=_cmd_evaluate)

    sub = commands.add_parser("count-params",
                              help="parameter count of a model or formula")
    sub.add_argument("--model", default=None)
    sub.add_argument("--kind", default=None)
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--hidden", type=int, default=0)
    sub.add_argument("--terms", type=int, default=0)
    sub.add_argument("--classes", type=int, default=0)
    sub.add_argument("--head-units", type=int, default=0)
    sub.add_argument("--polynomials", type=int, default=0)
    _add_io_flags(sub)
    sub.set_defaults(func=_cmd_count_params)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, OSError, RuntimeError,
            json.JSONDecodeError, np.linalg.LinAlgError) as exc:
        json.dump({"error": {"type": type(exc).__name__,
                             "message": str(exc)}}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
