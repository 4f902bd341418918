"""Command-line interface.

Subcommands: gen, eigs, partial, exact, estimate, eval, sweep, blogs.
Exit codes: 0 success, 2 parameter error, 3 pipeline failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io as gio
from .errors import ParameterError, PipelineError
from .evaluate import (RealDataResult, SweepConfig, agreement,
                       realdata_two_community, rows_to_csv, run_sweep)
from .graphs import Regime, SbmParams, sample_sbm
from .profiling import agnostic_degree_profiling, estimate_params
from .spectral import DepthOverrides, improved_eigenvalue_approx
from .sphere import agnostic_sphere_comparison


def _common_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=0, help="base RNG seed")
    parent.add_argument("--threads", type=int, default=1, help="worker threads")
    parent.add_argument("--output", type=str, default=None, help="output path")
    parent.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="tabular output format")
    return parent


def _depth_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--r", type=int, default=None, help="override deep-side depth")
    sub.add_argument("--r-prime", type=int, default=None,
                     help="override shallow-side depth")


def _overrides(args) -> DepthOverrides | None:
    if getattr(args, "r", None) is None and getattr(args, "r_prime", None) is None:
        return None
    return DepthOverrides(r=args.r, r_prime=args.r_prime)


def _parse_params(args, n: int) -> SbmParams:
    if args.q is not None:
        Q = np.array(json.loads(args.q), dtype=float)
        k = Q.shape[0]
    else:
        if args.q_in is None or args.q_out is None:
            raise ParameterError("provide --q or both --q-in and --q-out")
        k = args.k
        Q = np.full((k, k), float(args.q_out))
        np.fill_diagonal(Q, float(args.q_in))
    if args.p is not None:
        p = np.array([float(x) for x in args.p.split(",")])
    else:
        p = np.full(k, 1.0 / k)
    regime = Regime.LOGARITHMIC if args.regime == "log" else Regime.CONSTANT
    return SbmParams(p=p, Q=Q, regime=regime, scale=args.scale)


def _emit(payload: dict, args) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf8")
    else:
        print(text)


def cmd_gen(args) -> int:
    params = _parse_params(args, args.n)
    g, labels = sample_sbm(params, args.n, args.seed)
    gio.write_edgelist(args.edges_out, g)
    if args.labels_out:
        gio.write_labels(args.labels_out, labels)
    print(f"wrote {g.edge_count} edges over {g.n} vertices", file=sys.stderr)
    return 0


def cmd_eigs(args) -> int:
    g = gio.read_edgelist(args.edges)
    est = improved_eigenvalue_approx(g, args.c, args.seed,
                                     num_probes=args.probes,
                                     threads=args.threads,
                                     overrides=_overrides(args))
    _emit(est.to_json(), args)
    return 0


def cmd_partial(args) -> int:
    g = gio.read_edgelist(args.edges)
    result = agnostic_sphere_comparison(g, args.delta, m=args.m, T=args.T,
                                        seed=args.seed, threads=args.threads,
                                        overrides=_overrides(args))
    sidecar = result.sidecar()
    if args.output:
        if result.ok:
            gio.write_labels(args.output, result.labels)
        gio.write_json(str(args.output) + ".json", sidecar)
    else:
        print(json.dumps(sidecar, indent=2, sort_keys=True))
    if not result.ok:
        print(f"partial recovery failed: {result.diagnostics.get('reason')}",
              file=sys.stderr)
        return 3
    return 0


def cmd_exact(args) -> int:
    g = gio.read_edgelist(args.edges)
    result = agnostic_degree_profiling(g, gamma=args.gamma,
                                       delta_for_partial=args.delta,
                                       seed=args.seed, threads=args.threads)
    sidecar = {
        "groups": {str(i): list(group)
                   for i, group in enumerate(result.divergence.finest)},
        "divergence": result.divergence.to_json(),
        "params": result.params.to_json(),
        "diagnostics": {k: v for k, v in result.diagnostics.items()
                        if k != "partial"},
    }
    if args.output:
        gio.write_labels(args.output, result.group_labels)
        gio.write_json(str(args.output) + ".json", sidecar)
    else:
        print(json.dumps(sidecar, indent=2, sort_keys=True))
    return 0


def cmd_estimate(args) -> int:
    g = gio.read_edgelist(args.edges)
    labels = gio.read_labels(args.labels)
    if len(labels) != g.n:
        # the labels file fixes n when it is longer than the edge list implies
        if len(labels) > g.n:
            g = gio.read_edgelist(args.edges, n=len(labels))
        else:
            raise ParameterError("labels file shorter than the graph")
    regime = Regime.LOGARITHMIC if args.regime == "log" else Regime.CONSTANT
    est = estimate_params(g, labels, regime)
    _emit(est.to_json(), args)
    return 0


def cmd_eval(args) -> int:
    truth = gio.read_labels(args.truth)
    inferred = gio.read_labels(args.labels)
    report = agreement(truth, inferred)
    if args.format == "json":
        _emit(report.to_json(), args)
    else:
        lines = ["accuracy," + repr(report.accuracy)]
        lines.append("bijection," + " ".join(str(x) for x in report.best_bijection))
        text = "\n".join(lines) + "\n"
        if args.output:
            Path(args.output).write_text(text, encoding="utf8")
        else:
            print(text, end="")
    return 0


def cmd_sweep(args) -> int:
    payload = gio.read_json(args.config)
    cfg = SweepConfig.from_json(payload)
    rows = run_sweep(cfg, threads=args.threads)
    output = args.output or cfg.output
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        text = rows_to_csv(rows)
    if output:
        Path(output).write_text(text, encoding="utf8")
    else:
        print(text, end="")
    if args.plot:
        from .plotting import render_sweep_figure

        figure_path = args.plot if isinstance(args.plot, str) and args.plot != "-" \
            else (str(Path(output).with_suffix(".png")) if output else "sweep.png")
        render_sweep_figure(rows, figure_path)
        print(f"figure written to {figure_path}", file=sys.stderr)
    return 0


def _convert_gml(path: str, edges_out: str, labels_out: str | None) -> int:
    """Minimal GML reader for node/edge lists with integer ``value`` labels."""
    text = Path(path).read_text(encoding="utf8", errors="replace")
    tokens = text.replace("[", " [ ").replace("]", " ] ").split()
    ids: dict[int, int] = {}
    labels: list[int] = []
    edges: set[tuple[int, int]] = set()
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in ("node", "edge") and i + 1 < len(tokens) and tokens[i + 1] == "[":
            depth = 1
            j = i + 2
            fields: dict[str, str] = {}
            while j < len(tokens) and depth:
                if tokens[j] == "[":
                    depth += 1
                elif tokens[j] == "]":
                    depth -= 1
                elif depth == 1 and j + 1 < len(tokens) and tokens[j + 1] not in ("[", "]"):
                    fields.setdefault(tokens[j], tokens[j + 1])
                    j += 1
                j += 1
            if tok == "node" and "id" in fields:
                ids[int(fields["id"])] = len(ids)
                labels.append(int(float(fields.get("value", 0))))
            elif tok == "edge" and "source" in fields and "target" in fields:
                u = ids.get(int(fields["source"]))
                v = ids.get(int(fields["target"]))
                if u is None or v is None or u == v:
                    pass
                else:
                    edges.add((min(u, v), max(u, v)))
            i = j
        else:
            i += 1
    if not ids:
        raise ParameterError(f"{path}: no nodes found")
    from .graphs import Graph

    g = Graph(len(ids), np.array(sorted(edges), dtype=np.int64))
    gio.write_edgelist(edges_out, g)
    if labels_out:
        from .graphs import CommunityLabels

        gio.write_labels(labels_out, CommunityLabels(np.array(labels), max(labels) + 1))
    print(f"converted {len(ids)} nodes, {len(edges)} edges", file=sys.stderr)
    return 0


def cmd_blogs(args) -> int:
    if args.convert_gml:
        if not args.edges_out:
            raise ParameterError("--convert-gml needs --edges-out")
        return _convert_gml(args.convert_gml, args.edges_out, args.labels_out)
    if args.make_surrogate:
        n = args.make_surrogate
        params = SbmParams(p=np.array([0.5, 0.5]),
                           Q=np.array([[args.alpha, args.beta],
                                       [args.beta, args.alpha]]),
                           regime=Regime.CONSTANT)
        g, labels = sample_sbm(params, n, args.seed)
        if not args.edges_out:
            raise ParameterError("--make-surrogate needs --edges-out")
        gio.write_edgelist(args.edges_out, g)
        if args.labels_out:
            gio.write_labels(args.labels_out, labels)
        print(f"surrogate: {g.edge_count} edges over {n} vertices", file=sys.stderr)
        return 0
    if not args.edges:
        raise ParameterError("provide --edges (or --make-surrogate / --convert-gml)")
    g = gio.read_edgelist(args.edges)
    result = realdata_two_community(g, r=args.r, r_prime=args.r_prime,
                                    trials=args.trials, seed=args.seed,
                                    threads=args.threads)
    consensus = result.consensus
    report: dict = {
        "status": consensus.status.value,
        "trials_ok": consensus.diagnostics.get("trials_ok", 0),
        "trials": args.trials,
        "main_component_size": consensus.diagnostics.get("main_component_size"),
    }
    if consensus.ok and args.labels:
        truth = gio.read_labels(args.labels)
        comp = np.array(consensus.diagnostics["main_component"], dtype=np.int64)
        from .graphs import CommunityLabels

        comp_truth = CommunityLabels(truth.labels[comp], truth.k)
        per_trial = []
        for trial in result.trials:
            if trial.ok:
                acc = agreement(comp_truth, trial.labels).accuracy
                per_trial.append(round((1 - acc) * comp.size))
            else:
                per_trial.append(None)
        comp_consensus = CommunityLabels(consensus.labels.labels[comp], 2)
        report["consensus_errors"] = round(
            (1 - agreement(comp_truth, comp_consensus).accuracy) * comp.size)
        report["per_trial_errors"] = per_trial
    if consensus.ok and args.output:
        gio.write_labels(args.output, consensus.labels)
        gio.write_json(str(args.output) + ".json", report)
    else:
        print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if consensus.ok else 3


def build_parser() -> argparse.ArgumentParser:
    parent = _common_parser()
    parser = argparse.ArgumentParser(prog="agnosbm",
                                     description=__doc__.strip().splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("gen", parents=[parent], help="sample a block-model graph")
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--k", type=int, default=2)
    sub.add_argument("--p", type=str, default=None, help="comma-separated prior")
    sub.add_argument("--q", type=str, default=None, help="JSON kernel matrix")
    sub.add_argument("--q-in", type=float, default=None)
    sub.add_argument("--q-out", type=float, default=None)
    sub.add_argument("--regime", choices=("constant", "log"), default="constant")
    sub.add_argument("--scale", type=float, default=1.0)
    sub.add_argument("--edges-out", type=str, required=True)
    sub.add_argument("--labels-out", type=str, default=None)
    sub.set_defaults(func=cmd_gen)

    sub = subs.add_parser("eigs", parents=[parent], help="estimate kernel eigenvalues")
    sub.add_argument("--edges", type=str, required=True)
    sub.add_argument("--c", type=float, default=0.1)
    sub.add_argument("--probes", type=int, default=None)
    _depth_args(sub)
    sub.set_defaults(func=cmd_eigs)

    sub = subs.add_parser("partial", parents=[parent], help="partial recovery")
    sub.add_argument("--edges", type=str, required=True)
    sub.add_argument("--delta", type=float, required=True,
                     help="lower bound on the smallest community fraction")
    sub.add_argument("--m", type=int, default=None)
    sub.add_argument("--T", type=int, default=None)
    _depth_args(sub)
    sub.set_defaults(func=cmd_partial)

    sub = subs.add_parser("exact", parents=[parent], help="exact recovery")
    sub.add_argument("--edges", type=str, required=True)
    sub.add_argument("--gamma", type=float, default=None)
    sub.add_argument("--delta", type=float, default=0.25)
    sub.set_defaults(func=cmd_exact)

    sub = subs.add_parser("estimate", parents=[parent],
                          help="estimate parameters from labels")
    sub.add_argument("--edges", type=str, required=True)
    sub.add_argument("--labels", type=str, required=True)
    sub.add_argument("--regime", choices=("constant", "log"), default="log")
    sub.set_defaults(func=cmd_estimate)

    sub = subs.add_parser("eval", parents=[parent], help="score labels against truth")
    sub.add_argument("--truth", type=str, required=True)
    sub.add_argument("--labels", type=str, required=True)
    sub.set_defaults(func=cmd_eval)

    sub = subs.add_parser("sweep", parents=[parent], help="benchmark sweep")
    sub.add_argument("--config", type=str, required=True)
    sub.add_argument("--plot", nargs="?", const="-", default=None,
                     help="render a PNG next to the output (optional path)")
    sub.set_defaults(func=cmd_sweep)

    sub = subs.add_parser("blogs", parents=[parent],
                          help="two-community real-data mode")
    sub.add_argument("--edges", type=str, default=None)
    sub.add_argument("--labels", type=str, default=None, help="truth labels")
    sub.add_argument("--trials", type=int, default=40)
    sub.add_argument("--r", type=int, default=1)
    sub.add_argument("--r-prime", type=int, default=1)
    sub.add_argument("--make-surrogate", type=int, default=None,
                     help="write a synthetic two-community instance of this size")
    sub.add_argument("--alpha", type=float, default=50.0)
    sub.add_argument("--beta", type=float, default=10.0)
    sub.add_argument("--convert-gml", type=str, default=None)
    sub.add_argument("--edges-out", type=str, default=None)
    sub.add_argument("--labels-out", type=str, default=None)
    sub.set_defaults(func=cmd_blogs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        stage = f" [{exc.stage}]" if exc.stage else ""
        print(f"pipeline failure{stage}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
