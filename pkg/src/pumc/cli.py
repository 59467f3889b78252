"""Command-line front end.

Deterministic batch commands over JSON/JSONL files. Results go to stdout or
--out as JSON (floats at 17 significant digits); a one-line human summary
goes to stderr. Exit codes: 0 success, 2 invalid input or arguments, 3 a
numerical cross-check failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import ermgm, models, netstat, oracle, serialize, simulate
from .core import Multigraph, Pmf, build_generic_space, builtin_family
from .errors import PowerIterationError, TheoremViolationError
from .puniform import DETECT_TOL, Trajectory, chain_to_iid, detect_puniform, detection_violation, iid_to_chain

BUILTIN_FAMILIES = ("identity", "symdiff", "stability", "modular")
PARTITION_REL_TOL = 1e-10


def _load_json(path: str):
    with open(path) as fp:
        return json.load(fp)


def _emit(args, payload, summary: str):
    text = serialize.dumps(payload, indent=2) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    print(summary, file=sys.stderr)


def _resolve_family(space, name_or_path: str):
    if name_or_path in BUILTIN_FAMILIES:
        return builtin_family(space, name_or_path)
    fam = serialize.family_from_dict(_load_json(name_or_path))
    if fam.size != space.size:
        raise ValueError("family file does not match the space")
    return fam


def _chain_model(args) -> models.ChainModel:
    if args.model == "density":
        return models.density_chain(args.n, args.p)
    if args.model == "stability":
        return models.stability_chain(args.n, args.p)
    if args.model == "modular":
        mu = None
        if args.mu:
            mu = Pmf(np.array([float(x) for x in args.mu.split(",")]))
        return models.modular_chain(args.n, mu)
    raise ValueError(f"unknown chain model {args.model!r}")


def _replicate_path(path: str, replicate: int, total: int) -> str:
    if total == 1:
        return path
    stem, ext = os.path.splitext(path)
    return f"{stem}.r{replicate}{ext}"


def _simulate_one(payload: dict) -> str:
    args = argparse.Namespace(**payload)
    if args.model == "custom":
        P = serialize.load_matrix(args.matrix)
        space = build_generic_space(tuple(str(i) for i in range(P.size)))
        traj = simulate.sample_chain(space, P, args.x0, args.steps, args.seed, args.replicate)
    else:
        cm = _chain_model(args)
        traj = simulate.sample_puniform_chain(
            cm.space, cm.mu, cm.family, args.x0, args.steps, args.seed, args.replicate
        )
    path = _replicate_path(args.out, args.replicate, args.replicates)
    serialize.write_trajectory(path, traj, expand=args.expand)
    return path


def cmd_simulate(args) -> int:
    if args.model in ("density", "stability") and not (args.n and args.p is not None):
        raise ValueError(f"--model {args.model} needs --n and --p")
    if args.model == "modular" and not args.n:
        raise ValueError("--model modular needs --n")
    if args.model == "custom" and not args.matrix:
        raise ValueError("--model custom needs --matrix")
    if args.replicates > 1 and not args.out:
        raise ValueError("--replicates > 1 needs --out")
    if not args.out:
        raise ValueError("simulate writes JSONL; pass --out")
    payloads = []
    for r in range(args.replicates):
        payload = {k: getattr(args, k) for k in (
            "model", "n", "p", "mu", "matrix", "steps", "x0", "seed", "out", "expand", "replicates"
        )}
        payload["replicate"] = r
        payloads.append(payload)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            paths = list(pool.map(_simulate_one, payloads))
    else:
        paths = [_simulate_one(p) for p in payloads]
    print(
        f"simulate: model={args.model} steps={args.steps} seed={args.seed} "
        f"replicates={args.replicates} -> {', '.join(paths)}",
        file=sys.stderr,
    )
    return 0


def cmd_detect(args) -> int:
    P = serialize.load_matrix(args.matrix)
    witness = detect_puniform(P, tol=args.tol)
    if witness is None:
        violation = detection_violation(P, tol=args.tol)
        _emit(args, {"puniform": False, "violation": list(violation)}, "detect: not p-uniform")
        return 0
    payload = {
        "puniform": True,
        "mu": witness.mu.p,
        "sigma": witness.family.sigma,
    }
    _emit(args, payload, f"detect: p-uniform, {P.size} states")
    return 0


def cmd_transform(args) -> int:
    kind, space, states = serialize.read_states_jsonl(args.traj)
    fam = _resolve_family(space, args.family)
    if args.direction == "chain2iid":
        if kind != "trajectory":
            raise ValueError("chain2iid expects a trajectory stream")
        z = chain_to_iid(Trajectory(space=space, states=states), fam)
        serialize.write_states_jsonl(args.out, space, z, kind="iid", expand=args.expand)
        print(f"transform: {states.size} states -> {z.size} iid values", file=sys.stderr)
        return 0
    if args.x0 is None:
        raise ValueError("iid2chain needs --x0")
    traj = iid_to_chain(args.x0, states, fam, space)
    serialize.write_trajectory(args.out, traj, expand=args.expand)
    print(f"transform: {states.size} iid values -> {traj.states.size} states", file=sys.stderr)
    return 0


def cmd_fit(args) -> int:
    traj = serialize.read_trajectory(args.traj)
    est = ermgm.mle_density_stability(traj, args.stat)
    payload = {
        "p_hat": est.p_hat,
        "boundary": est.boundary,
        "transitions": est.transitions,
        "stat_sum": est.stat_sum,
    }
    note = " (boundary estimate)" if est.boundary else ""
    _emit(args, payload, f"fit: {args.stat} p_hat={est.p_hat:.6f}{note}")
    return 0


def cmd_partition(args) -> int:
    model = serialize.ermgm_from_dict(_load_json(args.model))
    probes = [float(x) for x in args.theta.split(",")]
    values, terms = [], 0
    for th in probes:
        value, terms = ermgm.fast_log_partition_instrumented(model, th)
        values.append(value)
    payload = {"theta": probes, "log_partition": values, "terms": terms}
    summary = f"partition: {len(probes)} probe(s), {terms} terms each"
    if args.brute:
        brutes = [oracle.brute_partition(ermgm.to_expfam(model), th) for th in probes]
        rels = [abs(v - b) / max(1.0, abs(b)) for v, b in zip(values, brutes)]
        payload["brute"] = brutes
        payload["rel_error"] = rels
        worst = max(rels)
        if worst > PARTITION_REL_TOL:
            _emit(args, payload, f"partition: MISMATCH, worst relative error {worst:.3e}")
            return 3
        summary += f", brute agrees to {worst:.1e}"
    _emit(args, payload, summary)
    return 0


def cmd_sample(args) -> int:
    model = serialize.ermgm_from_dict(_load_json(args.model))
    if args.count == 1:
        g = ermgm.sample_multigraph(model, args.theta, args.seed)
        _emit(args, serialize.multigraph_to_dict(g), f"sample: one draw, seed {args.seed}")
        return 0
    draws = ermgm.sample_multigraphs(model, args.theta, args.count, args.seed)
    lines = [
        serialize.dumps(serialize.multigraph_to_dict(
            Multigraph(n=model.n, t=model.t, counts=row)
        ))
        for row in draws
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    print(f"sample: {args.count} draws, seed {args.seed}", file=sys.stderr)
    return 0


def _diagnose_table(args, space):
    """Statistic table plus the family (if any) certifying an iid view."""
    graph_space = space.kind == "multigraph" and space.t == 1
    if args.stat in ("density", "stability", "transitivity", "degseq") and not graph_space:
        raise ValueError(f"--stat {args.stat} needs a simple-graph trajectory")
    if args.stat == "density":
        return netstat.density_stat_table(space), "identity"
    if args.stat == "stability":
        return netstat.stability_stat_table(space), "stability"
    if args.stat == "degseq":
        rows = np.array([netstat.sorted_degree_sequence(space.decode(i)) for i in range(space.size)])
        return np.broadcast_to(rows[None, :, :], (space.size, space.size, space.n)), "identity"
    if args.stat == "transitivity":
        return models.transitivity_cef(space.n).tau[:, :, 0], None
    if args.n is None:
        raise ValueError("--stat reciprocity needs --n")
    rc = models.reciprocity_cef(args.n)
    if rc.space.size != space.size:
        raise ValueError("trajectory space does not match the directed space for --n")
    return rc.tau[:, :, 0], None


def cmd_diagnose(args) -> int:
    traj = serialize.read_trajectory(args.traj)
    space = traj.space
    table, fam_name = _diagnose_table(args, space)
    if args.target is not None:
        target = [float(x) for x in args.target.split(",")]
    elif args.p is not None and args.stat in ("density", "stability"):
        from .core import num_dyads

        target = args.p * num_dyads(space.n) / (space.n - 1)
    else:
        raise ValueError("pass --target (or --p for density/stability)")
    fam = None
    if args.family != "none":
        name = fam_name if args.family == "auto" else args.family
        if name is not None:
            fam = builtin_family(space, name)
    report = simulate.convergence_report(traj, table, target, fam)
    payload = {
        "stat": args.stat,
        "target": report.target,
        "final_mean": report.final_mean,
        "abs_error": report.abs_error,
        "stderr": report.stderr,
        "within_three_se": report.within_three_se,
        "transitions": report.transitions,
    }
    if args.csv:
        with open(args.csv, "w") as fp:
            fp.write("step,running_mean\n")
            for i, row in enumerate(report.running_mean):
                fp.write(f"{i + 1},{','.join(format(v, '.17g') for v in row)}\n")
    _emit(args, payload, f"diagnose: |mean - target| = {report.abs_error.max():.3e}")
    return 0


def cmd_exchangeability(args) -> int:
    if args.model == "custom":
        if not (args.n and args.mu):
            raise ValueError("--model custom needs --n and --mu")
        from .core import build_multigraph_space

        space = build_multigraph_space(args.n, 1)
        mu = Pmf(np.array(_load_json(args.mu)["p"], dtype=np.float64))
        fam = _resolve_family(space, args.family if args.family != "auto" else "identity")
        cm = models.ChainModel(space=space, family=fam, mu=mu)
    else:
        cm = _chain_model(args)
    classes = netstat.iso_classes(cm.space)
    report = netstat.exchangeability_transfer(cm.matrix(), cm.family, cm.mu, classes)
    payload = {
        "mu_exchangeable": report.mu_exchangeable,
        "row_exchangeable": list(report.row_exchangeable),
        "equivalence_holds": report.equivalence_holds,
        "class_sizes": [int(c.size) for c in classes.classes],
        "mu_witness": list(report.mu_witness) if report.mu_witness else None,
    }
    _emit(
        args,
        payload,
        f"exchangeability: mu {'is' if report.mu_exchangeable else 'is not'} exchangeable "
        f"over {len(classes.classes)} classes",
    )
    return 0


def _add_common(sub):
    sub.add_argument("--out", help="write the JSON result here instead of stdout")
    sub.add_argument("--config", help="JSON file of flag overrides for this command")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pumc",
        description="Permutation-uniform Markov chains and Markovian exponential families.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="sample a chain to a JSONL trajectory")
    p.add_argument("--model", required=True, choices=("density", "stability", "modular", "custom"))
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--mu", help="comma-separated masses for the modular model")
    p.add_argument("--matrix", help="transition matrix file for the custom model")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--x0", type=int, default=0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--expand", action="store_true", help="also write dyad lists per state")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("detect", help="find a p-uniform witness for a matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--tol", type=float, default=DETECT_TOL)
    _add_common(p)
    p.set_defaults(func=cmd_detect)

    p = subs.add_parser("transform", help="move between chain and iid coordinates")
    p.add_argument("--traj", required=True)
    p.add_argument("--direction", required=True, choices=("chain2iid", "iid2chain"))
    p.add_argument("--family", required=True, help="builtin family name or JSON file")
    p.add_argument("--x0", type=int)
    p.add_argument("--expand", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_transform)

    p = subs.add_parser("fit", help="closed-form MLE from a trajectory")
    p.add_argument("--traj", required=True)
    p.add_argument("--stat", required=True, choices=("density", "stability"))
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = subs.add_parser("partition", help="fast log partition, optionally brute-checked")
    p.add_argument("--model", required=True, help="dyadic model JSON file")
    p.add_argument("--theta", required=True, help="probe value(s), comma-separated")
    p.add_argument("--brute", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_partition)

    p = subs.add_parser("sample", help="draw multigraphs from a dyadic model")
    p.add_argument("--model", required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_sample)

    p = subs.add_parser("diagnose", help="time-average convergence report")
    p.add_argument("--traj", required=True)
    p.add_argument(
        "--stat",
        required=True,
        choices=("density", "stability", "reciprocity", "transitivity", "degseq"),
    )
    p.add_argument("--target", help="target value(s), comma-separated")
    p.add_argument("--p", type=float)
    p.add_argument("--n", type=int, help="vertex count, needed for --stat reciprocity")
    p.add_argument("--family", default="auto", help="'auto', 'none', or a builtin name")
    p.add_argument("--csv", help="write running means here")
    _add_common(p)
    p.set_defaults(func=cmd_diagnose)

    p = subs.add_parser("exchangeability", help="exchangeability transfer report")
    p.add_argument("--model", required=True, choices=("density", "stability", "modular", "custom"))
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--mu", help="pmf JSON file for the custom model")
    p.add_argument("--family", default="auto")
    _add_common(p)
    p.set_defaults(func=cmd_exchangeability)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        overrides = _load_json(args.config)
        if not isinstance(overrides, dict):
            print("error: config must be a JSON object", file=sys.stderr)
            return 2
        for key, value in overrides.items():
            if not hasattr(args, key):
                print(f"error: unknown config key {key!r}", file=sys.stderr)
                return 2
            setattr(args, key, value)
    try:
        return args.func(args)
    except (TheoremViolationError, PowerIterationError) as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
