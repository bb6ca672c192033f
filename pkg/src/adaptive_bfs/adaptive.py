"""Adaptive BFS: pick a (kernel, variant) pair per level from a model.

Before each level the runner extracts the current feature vector, asks
the model for a pair, and runs that level with it. An UNKNOWN prediction
falls back to the previous level's resolved pair; at level 0 the fallback
is the edge-list kernel with the direct count. Decision overhead (feature
extraction plus model query) is timed separately from kernel execution,
so traces account for switching cost explicitly.

The model argument is either a FlatTree or any callable
``(level, features) -> (KernelId, CountVariant) | UNKNOWN``, which lets
tests and experiments inject perfect or adversarial policies.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .features import FeatureVector, extract_runtime_features
from .graph import Graph, GraphStats, compute_stats
from .kernels import (
    GROUP_SIZE,
    CountVariant,
    KernelId,
    init_depths,
    pair_from_index,
    run_level,
)
from .tree import LEAF_UNKNOWN, UNKNOWN, FlatTree, _UnknownType

DEFAULT_KERNEL: tuple[KernelId, CountVariant] = (
    KernelId.EDGE_LIST, CountVariant.DIRECT_ATOMIC,
)

TRACE_HEADER = (
    "level", "kernel", "variant", "fallback", "frontier",
    "elapsed_ns", "predict_ns",
)

Policy = Callable[
    [int, FeatureVector],
    "tuple[KernelId, CountVariant] | _UnknownType",
]


@dataclass(frozen=True)
class LevelTrace:
    level: int
    kernel: KernelId
    variant: CountVariant
    fallback_used: bool
    frontier_size: int
    elapsed_ns: int
    prediction_ns: int


@dataclass(frozen=True)
class AdaptiveTrace:
    records: tuple[LevelTrace, ...]

    @property
    def level_count(self) -> int:
        return len(self.records)

    @property
    def total_kernel_ns(self) -> int:
        return sum(r.elapsed_ns for r in self.records)

    @property
    def total_prediction_ns(self) -> int:
        return sum(r.prediction_ns for r in self.records)

    @property
    def pairs(self) -> list[tuple[KernelId, CountVariant]]:
        return [(r.kernel, r.variant) for r in self.records]


def adaptive_bfs(graph: Graph, root: int, model: FlatTree | Policy,
                 stats: GraphStats | None = None,
                 chunk_size: int = GROUP_SIZE) -> tuple[np.ndarray, AdaptiveTrace]:
    """Level-switching BFS; depth result is policy-independent.

    One trace record is produced per executed level, including the
    terminating zero-discovery level.
    """
    if stats is None:
        stats = compute_stats(graph)
    if isinstance(model, FlatTree):
        flat = model

        def policy(level: int, features: FeatureVector):
            ordinal = flat.predict_one(features)
            return UNKNOWN if ordinal == LEAF_UNKNOWN else pair_from_index(ordinal)
    else:
        policy = model
    depths = init_depths(graph, root)
    records: list[LevelTrace] = []
    frontier = 1
    discovered = 1
    level = 0
    previous = DEFAULT_KERNEL
    while True:
        t0 = time.perf_counter_ns()
        features = extract_runtime_features(stats, frontier, discovered)
        raw = policy(level, features)
        prediction_ns = time.perf_counter_ns() - t0
        fallback = raw is UNKNOWN
        pair = previous if fallback else raw
        outcome = run_level(graph, depths, level, pair[0], pair[1], chunk_size)
        records.append(LevelTrace(
            level=level,
            kernel=pair[0],
            variant=pair[1],
            fallback_used=fallback,
            frontier_size=frontier,
            elapsed_ns=outcome.elapsed_ns,
            prediction_ns=max(prediction_ns, 1),
        ))
        previous = pair
        if outcome.new_frontier_count == 0:
            return depths, AdaptiveTrace(tuple(records))
        frontier = outcome.new_frontier_count
        discovered += outcome.new_frontier_count
        level += 1


@dataclass(frozen=True)
class LatencyReport:
    mean_ns: float
    stddev_ns: float
    max_ns: float
    n_calls: int
    batch_size: int


def measure_prediction_latency(flat_tree: FlatTree, vectors: np.ndarray,
                               n: int = 1_000_000,
                               batch_size: int = 10_000) -> LatencyReport:
    """Per-call model latency over n lookups cycled through `vectors`.

    Lookups run through the vectorized batch descent; per-call figures
    are batch wall time divided by batch size, and the spread statistics
    are therefore computed over batch means rather than raw single-call
    samples.
    """
    if n < 1000:
        raise ValueError("need at least 1000 calls for a stable estimate")
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise ValueError("vectors must be a non-empty (k, d) matrix")
    batch_size = min(batch_size, n)
    k = vectors.shape[0]
    per_call: list[float] = []
    done = 0
    start = 0
    while done < n:
        size = min(batch_size, n - done)
        rows = np.arange(start, start + size) % k
        batch = vectors[rows]
        t0 = time.perf_counter_ns()
        flat_tree.predict_batch(batch)
        elapsed = time.perf_counter_ns() - t0
        per_call.append(elapsed / size)
        done += size
        start = (start + size) % k
    stats = np.array(per_call)
    return LatencyReport(
        mean_ns=float(stats.mean()),
        stddev_ns=float(stats.std()),
        max_ns=float(stats.max()),
        n_calls=n,
        batch_size=batch_size,
    )


#: Report buckets are disjoint bands over the slowdown ratio; ratios in
#: (2, 5] fall between bands and are only reflected in Average/Worst.
def bucket_for(ratio: float, tolerance: float = 0.05) -> str | None:
    if ratio <= 1.0 + tolerance:
        return "optimal"
    if ratio <= 2.0:
        return "1-2x"
    if 5.0 < ratio <= 20.0:
        return ">5x"
    if ratio > 20.0:
        return ">20x"
    return None


@dataclass(frozen=True)
class SlowdownRow:
    strategy: str
    ratio: float
    bucket: str | None


def slowdown_report(trace: AdaptiveTrace, optimal_ns: float, oracle_ns: float,
                    single_totals: Mapping[tuple[KernelId, CountVariant], float],
                    tolerance: float = 0.05) -> list[SlowdownRow]:
    """Ratios against the per-level optimal for one (graph, root) run.

    Rows: the adaptive run ("Predicted"), the best single implementation
    ("Oracle"), and each kernel under the direct count variant.
    """
    if optimal_ns <= 0:
        raise ValueError("optimal time must be positive")
    rows = [
        SlowdownRow("Predicted", trace.total_kernel_ns / optimal_ns,
                    bucket_for(trace.total_kernel_ns / optimal_ns, tolerance)),
        SlowdownRow("Oracle", oracle_ns / optimal_ns,
                    bucket_for(oracle_ns / optimal_ns, tolerance)),
    ]
    for kernel in KernelId:
        total = single_totals[(kernel, CountVariant.DIRECT_ATOMIC)]
        ratio = total / optimal_ns
        rows.append(SlowdownRow(kernel.name, ratio, bucket_for(ratio, tolerance)))
    return rows


def write_trace(trace: AdaptiveTrace, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for r in trace.records:
            writer.writerow([
                r.level, r.kernel.name, r.variant.name,
                int(r.fallback_used), r.frontier_size,
                r.elapsed_ns, r.prediction_ns,
            ])


def read_trace(path: str) -> AdaptiveTrace:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != TRACE_HEADER:
            raise ValueError(f"unexpected trace header in {path}")
        records = tuple(
            LevelTrace(
                level=int(row["level"]),
                kernel=KernelId[row["kernel"]],
                variant=CountVariant[row["variant"]],
                fallback_used=bool(int(row["fallback"])),
                frontier_size=int(row["frontier"]),
                elapsed_ns=int(row["elapsed_ns"]),
                prediction_ns=int(row["predict_ns"]),
            )
            for row in reader
        )
    return AdaptiveTrace(records)


def argmin_policy(
    picks: Sequence[tuple[KernelId, CountVariant]],
) -> Policy:
    """Policy replaying a measured per-level argmin sequence.

    Levels beyond the sequence reuse its last entry (a benchmarked run
    and an adaptive run of the same (graph, root) have identical level
    structure, so this only matters for defensive robustness).
    """
    if not picks:
        raise ValueError("need at least one per-level pick")

    def policy(level: int, features: FeatureVector):
        return picks[min(level, len(picks) - 1)]

    return policy
