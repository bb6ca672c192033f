"""Command-line pipeline: ingest/generate graphs, bench, train, run, report.

Workspace layout (``--workspace``, default "."):
  graphs/   binary graph dumps (*.graph) and per-graph stats (*.stats.json)
  out/      levels.csv, totals.csv, normalized.csv, training.csv,
            model.tree, model.json, report.csv
  out/traces/   one adaptive trace CSV per (graph, root)

A JSON config file (``--config``) may supply any long flag by name;
explicit flags override the file. Exit codes: 0 success, 1 partial or
data failure, 2 invalid invocation.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from typing import Mapping, Sequence

import numpy as np

from .adaptive import adaptive_bfs, bucket_for, read_trace, write_trace
from .bench import (
    BenchmarkConfig,
    benchmark_graph,
    compute_optimal,
    compute_oracle,
    export_samples,
    pair_level_sums,
    read_samples,
)
from .features import (
    DEFAULT_MODEL_FEATURES,
    FEATURE_NAMES,
    build_training_set,
    to_matrix,
    validate_selection,
    write_training_csv,
)
from .graph import (
    DegreeSummary,
    GraphStats,
    compute_stats,
    generate_graph,
    load_edge_list,
    read_graph,
    write_graph,
)
from .kernels import CountVariant, KernelId
from .tree import (
    TrainConfig,
    deserialize,
    evaluate,
    fit,
    importance,
    serialize,
    split_train_test,
)

REPORT_HEADER = (
    "strategy", "optimal_pct", "pct_1_2x", "pct_over_5x", "pct_over_20x",
    "average", "worst",
)


# ---------------------------------------------------------------------------
# Workspace plumbing
# ---------------------------------------------------------------------------

def _graphs_dir(ws: str) -> str:
    return os.path.join(ws, "graphs")


def _out_dir(ws: str) -> str:
    return os.path.join(ws, "out")


def _traces_dir(ws: str) -> str:
    return os.path.join(ws, "out", "traces")


def stats_to_json(stats: GraphStats) -> dict:
    return {
        "vertex_count": stats.vertex_count,
        "edge_count": stats.edge_count,
        "out_degree_summary": dataclasses.asdict(stats.out_degree_summary),
        "in_degree_summary": dataclasses.asdict(stats.in_degree_summary),
        "abs_degree_summary": dataclasses.asdict(stats.abs_degree_summary),
    }


def stats_from_json(payload: Mapping) -> GraphStats:
    return GraphStats(
        vertex_count=int(payload["vertex_count"]),
        edge_count=int(payload["edge_count"]),
        out_degree_summary=DegreeSummary(**payload["out_degree_summary"]),
        in_degree_summary=DegreeSummary(**payload["in_degree_summary"]),
        abs_degree_summary=DegreeSummary(**payload["abs_degree_summary"]),
    )


def _write_graph_artifacts(graph, graph_id: str, ws: str) -> None:
    os.makedirs(_graphs_dir(ws), exist_ok=True)
    write_graph(graph, os.path.join(_graphs_dir(ws), f"{graph_id}.graph"))
    stats = compute_stats(graph)
    with open(os.path.join(_graphs_dir(ws), f"{graph_id}.stats.json"), "w") as fh:
        json.dump(stats_to_json(stats), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_stats(ws: str, graph_id: str) -> GraphStats:
    path = os.path.join(_graphs_dir(ws), f"{graph_id}.stats.json")
    with open(path) as fh:
        return stats_from_json(json.load(fh))


def _list_graph_ids(ws: str) -> list[str]:
    gdir = _graphs_dir(ws)
    if not os.path.isdir(gdir):
        return []
    return sorted(
        name[:-len(".graph")] for name in os.listdir(gdir)
        if name.endswith(".graph")
    )


# ---------------------------------------------------------------------------
# Config-file / flag resolution
# ---------------------------------------------------------------------------

def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise ValueError("config file must hold a JSON object")
    return payload


def _setting(args: argparse.Namespace, config: Mapping, key: str, default):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _parse_params(text: str) -> dict:
    """"scale=8,edges=2000" -> {"scale": 8, "edges": 2000}."""
    params: dict = {}
    if not text:
        return params
    for item in text.split(","):
        if "=" not in item:
            raise ValueError(f"expected key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            params[key.strip()] = int(raw)
        except ValueError:
            params[key.strip()] = float(raw)
    return params


def _parse_selection(text: str) -> tuple[str, ...]:
    if text == "default":
        return DEFAULT_MODEL_FEATURES
    if text == "full":
        return FEATURE_NAMES
    return validate_selection([t.strip() for t in text.split(",")])


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_ingest(args: argparse.Namespace, config: Mapping) -> int:
    ws = _setting(args, config, "workspace", ".")
    failures = 0
    processed = 0
    for name in sorted(os.listdir(args.directory)):
        path = os.path.join(args.directory, name)
        if not os.path.isfile(path):
            continue
        graph_id = os.path.splitext(name)[0]
        try:
            with open(path) as fh:
                graph = load_edge_list(fh)
        except ValueError as exc:
            print(f"error: {name}: {exc}", file=sys.stderr)
            failures += 1
            continue
        _write_graph_artifacts(graph, graph_id, ws)
        processed += 1
        print(f"{graph_id}: |V|={graph.vertex_count} |E|={graph.edge_count}")
    if processed == 0 and failures == 0:
        print("error: no input files found", file=sys.stderr)
        return 1
    return 1 if failures else 0


def cmd_generate(args: argparse.Namespace, config: Mapping) -> int:
    ws = _setting(args, config, "workspace", ".")
    try:
        params = _parse_params(args.params)
    except ValueError as exc:
        print(f"error: bad parameter list: {exc}", file=sys.stderr)
        return 2
    try:
        graph = generate_graph(args.model, params, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parts = [args.model.replace("-", "")]
    parts += [f"{k}{params[k]}" for k in sorted(params)]
    graph_id = "_".join(parts) + f"-s{args.seed}"
    _write_graph_artifacts(graph, graph_id, ws)
    print(f"{graph_id}: |V|={graph.vertex_count} |E|={graph.edge_count}")
    return 0


def cmd_bench(args: argparse.Namespace, config: Mapping) -> int:
    ws = _setting(args, config, "workspace", ".")
    bench_config = BenchmarkConfig(
        roots_per_graph=int(_setting(args, config, "roots", 20)),
        repetitions=int(_setting(args, config, "reps", 30)),
        seed=int(_setting(args, config, "seed", 0)),
        warmup_runs=int(_setting(args, config, "warmup", 2)),
        worker_count=_setting(args, config, "workers", None),
    )
    graph_ids = _list_graph_ids(ws)
    if not graph_ids:
        print("error: no graphs ingested or generated yet", file=sys.stderr)
        return 1
    all_samples = []
    all_records = []
    for graph_id in graph_ids:
        graph = read_graph(os.path.join(_graphs_dir(ws), f"{graph_id}.graph"))
        samples, records = benchmark_graph(graph, bench_config, graph_id)
        all_samples.extend(samples)
        all_records.extend(records)
        print(f"{graph_id}: {len(samples)} level rows, {len(records)} totals")
    os.makedirs(_out_dir(ws), exist_ok=True)
    levels_path = os.path.join(_out_dir(ws), "levels.csv")
    totals_path = os.path.join(_out_dir(ws), "totals.csv")
    export_samples(all_samples, all_records, levels_path, totals_path)
    _write_normalized(all_records, os.path.join(_out_dir(ws), "normalized.csv"))
    print(f"wrote {levels_path}, {totals_path}")
    return 0


def _write_normalized(records, path: str) -> None:
    """Per (graph, root): each pair's total over the slowest pair's total."""
    slowest: dict[tuple[str, int], float] = {}
    for r in records:
        key = (r.graph_id, r.root)
        slowest[key] = max(slowest.get(key, 0.0), r.total_ns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("graph_id", "root", "kernel", "variant",
                         "total_ns", "normalized"))
        for r in records:
            norm = r.total_ns / slowest[(r.graph_id, r.root)]
            writer.writerow([
                r.graph_id, r.root, r.kernel.name, r.variant.name,
                repr(r.total_ns), repr(norm),
            ])


def cmd_train(args: argparse.Namespace, config: Mapping) -> int:
    ws = _setting(args, config, "workspace", ".")
    levels_path = os.path.join(_out_dir(ws), "levels.csv")
    if not os.path.exists(levels_path):
        print(f"error: {levels_path} not found; run bench first", file=sys.stderr)
        return 1
    try:
        selection = _parse_selection(_setting(args, config, "features", "default"))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    metric = _setting(args, config, "metric", "mean")
    samples = read_samples(levels_path)
    stats_map = {}
    for graph_id in sorted({s.graph_id for s in samples}):
        try:
            stats_map[graph_id] = _load_stats(ws, graph_id)
        except FileNotFoundError:
            print(f"error: no stats for graph {graph_id!r}", file=sys.stderr)
            return 1
    try:
        training = build_training_set(levels_path, stats_map, metric=metric)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_training_csv(training, os.path.join(_out_dir(ws), "training.csv"))
    if len(training) < 10:
        print(f"error: only {len(training)} training samples; need >= 10",
              file=sys.stderr)
        return 1
    seed = int(_setting(args, config, "seed", 0))
    split = float(_setting(args, config, "split", 0.7))
    train_config = TrainConfig(
        max_depth=int(_setting(args, config, "max_depth", 16)),
        min_samples_leaf=int(_setting(args, config, "min_samples_leaf", 5)),
        min_samples_split=int(_setting(args, config, "min_samples_split", 10)),
        seed=seed,
    )
    try:
        train_split, test_split = split_train_test(training, split, seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not train_split or not test_split:
        print("error: split left an empty partition", file=sys.stderr)
        return 1
    x_train, y_train = to_matrix(train_split, selection)
    x_test, y_test = to_matrix(test_split, selection)
    tree = fit(x_train, y_train, selection, train_config)
    report = evaluate(tree, x_test, y_test)
    model_path = os.path.join(_out_dir(ws), "model.tree")
    serialize(tree, model_path)
    weights = importance(tree)
    metadata = {
        "selection": list(selection),
        "train_config": dataclasses.asdict(train_config),
        "split_fraction": split,
        "metric": metric,
        "n_samples": len(training),
        "n_train": len(train_split),
        "n_test": len(test_split),
        "node_count": tree.node_count,
        "held_out_accuracy": report.top1_accuracy,
        "unknown_rate": report.unknown_rate,
        "importance": {name: float(w) for name, w in zip(selection, weights)},
    }
    with open(os.path.join(_out_dir(ws), "model.json"), "w") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"trained on {len(train_split)} samples, "
          f"held-out accuracy {report.top1_accuracy:.3f}, "
          f"unknown rate {report.unknown_rate:.3f}")
    print(f"wrote {model_path}")
    return 0


def _resolve_graph(ws: str, ref: str) -> tuple[str, str]:
    """Graph reference -> (graph_id, dump path); accepts ids or paths."""
    if os.path.exists(ref):
        graph_id = os.path.splitext(os.path.basename(ref))[0]
        return graph_id, ref
    path = os.path.join(_graphs_dir(ws), f"{ref}.graph")
    if os.path.exists(path):
        return ref, path
    raise FileNotFoundError(f"graph {ref!r} not found (no file, not ingested)")


def cmd_run(args: argparse.Namespace, config: Mapping) -> int:
    ws = _setting(args, config, "workspace", ".")
    try:
        graph_id, graph_path = _resolve_graph(ws, args.graph)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    graph = read_graph(graph_path)
    try:
        stats = _load_stats(ws, graph_id)
    except FileNotFoundError:
        stats = compute_stats(graph)
    try:
        flat = deserialize(args.model)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: cannot load model: {exc}", file=sys.stderr)
        return 1
    try:
        validate_selection(flat.selection)
    except ValueError as exc:
        print(f"error: model selection does not match features: {exc}",
              file=sys.stderr)
        return 1
    if not 0 <= args.root < graph.vertex_count:
        print(f"error: root {args.root} out of range for |V|="
              f"{graph.vertex_count}", file=sys.stderr)
        return 2
    depths, trace = adaptive_bfs(graph, args.root, flat, stats)
    os.makedirs(_traces_dir(ws), exist_ok=True)
    trace_path = os.path.join(_traces_dir(ws), f"{graph_id}__{args.root}.csv")
    write_trace(trace, trace_path)
    if args.depths_out:
        np.savetxt(args.depths_out, depths, fmt="%d")
    print(f"{graph_id} root={args.root}: {trace.level_count} levels, "
          f"kernel time {trace.total_kernel_ns} ns, "
          f"prediction time {trace.total_prediction_ns} ns")
    for r in trace.records:
        suffix = " (fallback)" if r.fallback_used else ""
        print(f"  level {r.level}: {r.kernel.name}/{r.variant.name}"
              f" frontier={r.frontier_size} {r.elapsed_ns} ns{suffix}")
    levels_path = os.path.join(_out_dir(ws), "levels.csv")
    if os.path.exists(levels_path):
        optimal = compute_optimal(read_samples(levels_path))
        key = (graph_id, args.root)
        if key in optimal and optimal[key] > 0:
            ratio = trace.total_kernel_ns / optimal[key]
            print(f"slowdown vs optimal: {ratio:.3f}x")
    print(f"wrote {trace_path}")
    return 0


def _aggregate_rows(ratios_by_strategy: Mapping[str, Sequence[float]],
                    tolerance: float) -> list[list]:
    rows = []
    for strategy, ratios in ratios_by_strategy.items():
        buckets = [bucket_for(r, tolerance) for r in ratios]
        n = len(ratios)

        def pct(name: str) -> float:
            return 100.0 * sum(1 for b in buckets if b == name) / n

        rows.append([
            strategy,
            f"{pct('optimal'):.1f}",
            f"{pct('1-2x'):.1f}",
            f"{pct('>5x'):.1f}",
            f"{pct('>20x'):.1f}",
            f"{float(np.mean(ratios)):.3f}",
            f"{float(np.max(ratios)):.3f}",
        ])
    return rows


def cmd_report(args: argparse.Namespace, config: Mapping) -> int:
    ws = _setting(args, config, "workspace", ".")
    tolerance = float(_setting(args, config, "tolerance", 0.05))
    levels_path = os.path.join(_out_dir(ws), "levels.csv")
    if not os.path.exists(levels_path):
        print("error: missing levels.csv; run bench first", file=sys.stderr)
        return 1
    samples = read_samples(levels_path)
    optimal = compute_optimal(samples)
    oracle = compute_oracle(samples)
    sums = pair_level_sums(samples)
    tdir = _traces_dir(ws)
    trace_files = sorted(os.listdir(tdir)) if os.path.isdir(tdir) else []
    predicted_ratios = []
    for name in trace_files:
        if not name.endswith(".csv") or "__" not in name:
            continue
        graph_id, _, root_part = name[:-4].rpartition("__")
        key = (graph_id, int(root_part))
        if key not in optimal:
            print(f"error: trace {name} has no benchmark data", file=sys.stderr)
            return 1
        trace = read_trace(os.path.join(tdir, name))
        predicted_ratios.append(trace.total_kernel_ns / optimal[key])
    if not predicted_ratios:
        print("error: missing strategy Predicted: no traces found; "
              "run the adaptive traversal first", file=sys.stderr)
        return 1
    ratios: dict[str, list[float]] = {"Predicted": predicted_ratios}
    ratios["Oracle"] = [
        oracle[key][2] / optimal[key] for key in sorted(optimal)
    ]
    for kernel in KernelId:
        ratios[kernel.name] = [
            sums[key][(kernel, CountVariant.DIRECT_ATOMIC)] / optimal[key]
            for key in sorted(optimal)
        ]
    os.makedirs(_out_dir(ws), exist_ok=True)
    report_path = os.path.join(_out_dir(ws), "report.csv")
    with open(report_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_HEADER)
        writer.writerows(_aggregate_rows(ratios, tolerance))
    print(f"wrote {report_path}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptive-bfs",
        description="Benchmark BFS kernels, train a selector, traverse adaptively.",
    )
    parser.add_argument("--config", help="JSON file supplying flag defaults")
    parser.add_argument("--workspace", help="workspace directory (default .)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse edge-list files into graph dumps")
    p.add_argument("directory")

    p = sub.add_parser("generate", help="generate a synthetic graph")
    p.add_argument("model")
    p.add_argument("params", help="key=value[,key=value...]")
    p.add_argument("seed", type=int)

    p = sub.add_parser("bench", help="run the 15-pair benchmark sweep")
    p.add_argument("--roots", type=int, help="roots per graph (default 20)")
    p.add_argument("--reps", type=int, help="timed repetitions (default 30)")
    p.add_argument("--seed", type=int)
    p.add_argument("--warmup", type=int, help="discarded warmup runs (default 2)")
    p.add_argument("--workers", type=int, help="kernel worker count")

    p = sub.add_parser("train", help="build training set, fit and evaluate")
    p.add_argument("--split", type=float, help="training fraction (default 0.7)")
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--min-samples-leaf", dest="min_samples_leaf", type=int)
    p.add_argument("--min-samples-split", dest="min_samples_split", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--features",
                   help='"default", "full", or comma-separated names')
    p.add_argument("--metric", choices=("mean", "min"),
                   help="label by mean or min level time")

    p = sub.add_parser("run", help="adaptive BFS with a trained model")
    p.add_argument("graph", help="graph id or dump path")
    p.add_argument("root", type=int)
    p.add_argument("model", help="model file path")
    p.add_argument("--depths-out", dest="depths_out",
                   help="write the resulting depth array to this file")

    p = sub.add_parser("report", help="bucketed slowdown table as CSV")
    p.add_argument("--tolerance", type=float,
                   help="optimal-bucket tolerance (default 0.05)")
    return parser


_HANDLERS = {
    "ingest": cmd_ingest,
    "generate": cmd_generate,
    "bench": cmd_bench,
    "train": cmd_train,
    "run": cmd_run,
    "report": cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        return _HANDLERS[args.command](args, config)
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())
