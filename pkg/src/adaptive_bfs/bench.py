"""Benchmark harness: time every (kernel, variant) pair per level and in total.

For each graph and root the harness runs all 15 pairs, discards warmup
runs, then averages per-level elapsed times over the configured
repetitions. Level rows align across repetitions and kernels because the
traversal structure (frontier sizes per level) is deterministic. Totals
are measured independently with an outer stopwatch around each full
traversal, so a RunRecord total is not defined as the sum of its level
means.

Baselines:
  - optimal: per (graph, root), sum over levels of the fastest pair's
    mean time; the cost of a hypothetical per-level switching traversal
    with zero switch overhead.
  - oracle: per (graph, root), the best single non-switching pair,
    compared on sums of level means so that optimal <= oracle <= any
    pair's level-mean sum holds exactly on every dataset.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph
from .kernels import (
    ALL_PAIRS,
    GROUP_SIZE,
    CountVariant,
    KernelId,
    bfs_full,
    pair_index,
    set_worker_count,
)

LEVELS_HEADER = (
    "graph_id", "root", "kernel", "variant", "level",
    "mean_ns", "min_ns", "frontier_size", "discovered_before", "new_count",
)
TOTALS_HEADER = (
    "graph_id", "root", "kernel", "variant", "total_ns", "level_count",
)


@dataclass(frozen=True)
class BenchmarkConfig:
    roots_per_graph: int = 20
    repetitions: int = 30
    seed: int = 0
    warmup_runs: int = 2
    worker_count: int | None = None
    chunk_size: int = GROUP_SIZE

    def __post_init__(self) -> None:
        if self.roots_per_graph < 1:
            raise ValueError("roots_per_graph must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.warmup_runs < 0:
            raise ValueError("warmup_runs must be >= 0")


@dataclass(frozen=True)
class LevelSample:
    graph_id: str
    root: int
    kernel: KernelId
    variant: CountVariant
    level: int
    mean_ns: float
    min_ns: int
    frontier_size: int
    discovered_before: int
    new_count: int


@dataclass(frozen=True)
class RunRecord:
    graph_id: str
    root: int
    kernel: KernelId
    variant: CountVariant
    total_ns: float
    level_count: int


def select_roots(graph: Graph, k: int, seed: int) -> list[int]:
    """All vertices when |V| <= k, else k distinct uniform draws."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = graph.vertex_count
    if n <= k:
        return list(range(n))
    rng = np.random.default_rng(seed)
    return [int(v) for v in rng.choice(n, size=k, replace=False)]


def benchmark_graph(graph: Graph, config: BenchmarkConfig,
                    graph_id: str) -> tuple[list[LevelSample], list[RunRecord]]:
    """Run the full 15-pair sweep from `roots_per_graph` roots.

    Timing covers the traversal only: graph construction, root selection,
    and sample assembly are outside every stopwatch.
    """
    if config.worker_count is not None:
        set_worker_count(config.worker_count)
    roots = select_roots(graph, config.roots_per_graph, config.seed)
    samples: list[LevelSample] = []
    records: list[RunRecord] = []
    for root in roots:
        for kernel, variant in ALL_PAIRS:
            level_times: list[list[int]] = []
            totals: list[int] = []
            structure: list[int] | None = None
            runs = config.warmup_runs + config.repetitions
            for rep in range(runs):
                t0 = time.perf_counter_ns()
                _, outcomes = bfs_full(graph, root, kernel, variant,
                                       config.chunk_size)
                total = time.perf_counter_ns() - t0
                if rep < config.warmup_runs:
                    continue
                counts = [o.new_frontier_count for o in outcomes]
                if structure is None:
                    structure = counts
                    level_times = [[] for _ in outcomes]
                elif counts != structure:
                    raise RuntimeError(
                        f"nondeterministic level structure for {graph_id} "
                        f"root={root} {kernel.name}/{variant.name}"
                    )
                for level, out in enumerate(outcomes):
                    level_times[level].append(out.elapsed_ns)
                totals.append(total)
            assert structure is not None
            frontier = 1
            discovered = 1
            for level, times in enumerate(level_times):
                samples.append(LevelSample(
                    graph_id=graph_id,
                    root=root,
                    kernel=kernel,
                    variant=variant,
                    level=level,
                    mean_ns=float(np.mean(times)),
                    min_ns=int(min(times)),
                    frontier_size=frontier,
                    discovered_before=discovered,
                    new_count=structure[level],
                ))
                frontier = structure[level]
                discovered += structure[level]
            records.append(RunRecord(
                graph_id=graph_id,
                root=root,
                kernel=kernel,
                variant=variant,
                total_ns=float(np.mean(totals)),
                level_count=len(level_times),
            ))
    return samples, records


def _grouped_by_run(samples: Iterable[LevelSample]):
    by_run: dict[tuple[str, int], dict[int, dict[int, LevelSample]]] = {}
    for s in samples:
        by_run.setdefault((s.graph_id, s.root), {}) \
              .setdefault(s.level, {})[pair_index(s.kernel, s.variant)] = s
    return by_run


def _require_full_coverage(levels: dict[int, dict[int, LevelSample]],
                           run_key: tuple[str, int]) -> None:
    for level, by_pair in levels.items():
        if len(by_pair) != len(ALL_PAIRS):
            missing = sorted(set(range(len(ALL_PAIRS))) - set(by_pair))
            raise ValueError(
                f"graph={run_key[0]} root={run_key[1]} level={level}: "
                f"missing pair ordinals {missing}"
            )


def compute_optimal(samples: Iterable[LevelSample]) -> dict[tuple[str, int], float]:
    """Per (graph, root): sum over levels of the fastest pair's mean time."""
    result: dict[tuple[str, int], float] = {}
    for run_key, levels in _grouped_by_run(samples).items():
        _require_full_coverage(levels, run_key)
        result[run_key] = sum(
            min(s.mean_ns for s in by_pair.values())
            for by_pair in levels.values()
        )
    return result


def compute_oracle(
    samples: Iterable[LevelSample],
) -> dict[tuple[str, int], tuple[KernelId, CountVariant, float]]:
    """Per (graph, root): best single pair by sum of level means.

    Ties break toward the lowest (kernel, variant) ordinal.
    """
    result: dict[tuple[str, int], tuple[KernelId, CountVariant, float]] = {}
    for run_key, levels in _grouped_by_run(samples).items():
        _require_full_coverage(levels, run_key)
        sums = [0.0] * len(ALL_PAIRS)
        for by_pair in levels.values():
            for ordinal, s in by_pair.items():
                sums[ordinal] += s.mean_ns
        best = min(range(len(ALL_PAIRS)), key=lambda i: (sums[i], i))
        kernel, variant = ALL_PAIRS[best]
        result[run_key] = (kernel, variant, sums[best])
    return result


def per_level_argmin(
    samples: Iterable[LevelSample],
) -> dict[tuple[str, int], list[tuple[KernelId, CountVariant]]]:
    """Per (graph, root): the fastest pair at each level, in level order."""
    result: dict[tuple[str, int], list[tuple[KernelId, CountVariant]]] = {}
    for run_key, levels in _grouped_by_run(samples).items():
        _require_full_coverage(levels, run_key)
        picks = []
        for level in sorted(levels):
            by_pair = levels[level]
            best = min(by_pair, key=lambda i: (by_pair[i].mean_ns, i))
            picks.append(ALL_PAIRS[best])
        result[run_key] = picks
    return result


def pair_level_sums(
    samples: Iterable[LevelSample],
) -> dict[tuple[str, int], dict[tuple[KernelId, CountVariant], float]]:
    """Per (graph, root): each pair's sum of level means."""
    result: dict[tuple[str, int], dict[tuple[KernelId, CountVariant], float]] = {}
    for run_key, levels in _grouped_by_run(samples).items():
        _require_full_coverage(levels, run_key)
        sums: dict[tuple[KernelId, CountVariant], float] = {
            pair: 0.0 for pair in ALL_PAIRS
        }
        for by_pair in levels.values():
            for ordinal, s in by_pair.items():
                sums[ALL_PAIRS[ordinal]] += s.mean_ns
        result[run_key] = sums
    return result


def export_samples(samples: Sequence[LevelSample], records: Sequence[RunRecord],
                   levels_path: str, totals_path: str) -> None:
    """Write levels.csv / totals.csv; every field round-trips losslessly."""
    with open(levels_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LEVELS_HEADER)
        for s in samples:
            writer.writerow([
                s.graph_id, s.root, s.kernel.name, s.variant.name, s.level,
                repr(s.mean_ns), s.min_ns, s.frontier_size,
                s.discovered_before, s.new_count,
            ])
    with open(totals_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TOTALS_HEADER)
        for r in records:
            writer.writerow([
                r.graph_id, r.root, r.kernel.name, r.variant.name,
                repr(r.total_ns), r.level_count,
            ])


def read_samples(levels_path: str) -> list[LevelSample]:
    with open(levels_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != LEVELS_HEADER:
            raise ValueError(f"unexpected levels.csv header in {levels_path}")
        return [
            LevelSample(
                graph_id=row["graph_id"],
                root=int(row["root"]),
                kernel=KernelId[row["kernel"]],
                variant=CountVariant[row["variant"]],
                level=int(row["level"]),
                mean_ns=float(row["mean_ns"]),
                min_ns=int(row["min_ns"]),
                frontier_size=int(row["frontier_size"]),
                discovered_before=int(row["discovered_before"]),
                new_count=int(row["new_count"]),
            )
            for row in reader
        ]


def read_records(totals_path: str) -> list[RunRecord]:
    with open(totals_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != TOTALS_HEADER:
            raise ValueError(f"unexpected totals.csv header in {totals_path}")
        return [
            RunRecord(
                graph_id=row["graph_id"],
                root=int(row["root"]),
                kernel=KernelId[row["kernel"]],
                variant=CountVariant[row["variant"]],
                total_ns=float(row["total_ns"]),
                level_count=int(row["level_count"]),
            )
            for row in reader
        ]
