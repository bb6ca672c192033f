#!/usr/bin/env python3
"""Full desk-scale experiment: corpus -> bench -> train -> traces -> report.

Generates a mixed synthetic corpus, benchmarks all 15 (kernel, variant)
pairs per level, trains the selector tree, replays every benchmarked
(graph, root) run adaptively with the trained model, and prints the
bucketed slowdown table next to the written report.csv.

Quick mode (default) finishes in well under a minute; --full uses the
benchmark defaults (20 roots, 30 repetitions) and a larger corpus.
"""

import argparse
import csv
import os
import sys

from adaptive_bfs.cli import main as cli

QUICK_CORPUS = [
    ("uniform-random", "n=200,edges=1600", 1),
    ("uniform-random", "n=500,edges=2000", 2),
    ("rmat-like", "scale=8,edges=3000", 3),
    ("star", "leaves=300", 4),
    ("path", "n=24", 5),
    ("complete-bipartite", "a=12,b=40", 6),
]

FULL_CORPUS = QUICK_CORPUS + [
    ("uniform-random", "n=1000,edges=8000", 7),
    ("uniform-random", "n=2000,edges=6000", 8),
    ("rmat-like", "scale=10,edges=12000", 9),
    ("rmat-like", "scale=11,edges=20000", 10),
    ("star", "leaves=2000", 11),
    ("path", "n=64", 12),
]


def sh(ws: str, *argv: str) -> None:
    code = cli(["--workspace", ws, *argv])
    if code != 0:
        raise SystemExit(f"step {' '.join(argv[:1])} failed with exit {code}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workspace", default="workspace")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--full", action="store_true",
                        help="benchmark defaults and a larger corpus")
    args = parser.parse_args()
    ws = args.workspace

    corpus = FULL_CORPUS if args.full else QUICK_CORPUS
    for model, params, seed in corpus:
        sh(ws, "generate", model, params, str(seed))

    if args.full:
        sh(ws, "bench", "--seed", str(args.seed))
    else:
        sh(ws, "bench", "--roots", "4", "--reps", "5", "--warmup", "1",
           "--seed", str(args.seed))

    sh(ws, "train", "--seed", str(args.seed), "--split", "0.7")

    with open(os.path.join(ws, "out", "totals.csv")) as fh:
        runs = sorted({(r["graph_id"], r["root"]) for r in csv.DictReader(fh)})
    model_path = os.path.join(ws, "out", "model.tree")
    for graph_id, root in runs:
        code = cli(["--workspace", ws, "run", graph_id, root, model_path])
        if code != 0:
            raise SystemExit(f"run {graph_id} {root} failed with exit {code}")

    sh(ws, "report")

    print()
    print("slowdown vs per-level optimal, bucketed:")
    with open(os.path.join(ws, "out", "report.csv")) as fh:
        for row in csv.reader(fh):
            print("  " + "  ".join(f"{cell:>16}" for cell in row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
