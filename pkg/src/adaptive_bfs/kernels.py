"""Level-synchronous BFS kernels: 5 strategies x 3 frontier-count variants.

Each kernel is expressed as a set of parallel work items (one per edge,
vertex, or vertex chunk) distributed over a fixed worker pool in static
contiguous blocks. Shared state per level is the depth array and the
per-item discovery counts. The only depth mutation a level can make is
lowering a value to ``level + 1``, performed under a claim lock so that
exactly one work item is credited with each newly discovered vertex;
the final depth array is therefore schedule-independent and identical
across all 15 (kernel, variant) pairs.

A full barrier separates levels: a level call returns only after every
block has finished.
"""

from __future__ import annotations

import os
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .graph import Graph

INF_DEPTH = np.iinfo(np.int32).max
DEPTH_DTYPE = np.int32

#: Work-item group width used by the hierarchical count reductions and as
#: the default virtual-chunk size; mirrors a hardware warp.
GROUP_SIZE = 32

_MIN_BLOCK_ITEMS = 2048


class KernelId(IntEnum):
    """The five traversal strategies, in stable tie-break order."""

    EDGE_LIST = 0
    REV_EDGE_LIST = 1
    VERTEX_PUSH = 2
    VERTEX_PULL = 3
    VERTEX_PUSH_WARP = 4


class CountVariant(IntEnum):
    """How per-item discovery counts are folded into the frontier size."""

    DIRECT_ATOMIC = 0
    GROUP_REDUCE = 1
    TWO_LEVEL_REDUCE = 2


#: All 15 (kernel, variant) pairs in label-ordinal order.
ALL_PAIRS: tuple[tuple[KernelId, CountVariant], ...] = tuple(
    (k, v) for k in KernelId for v in CountVariant
)


def pair_index(kernel: KernelId, variant: CountVariant) -> int:
    return int(kernel) * len(CountVariant) + int(variant)


def pair_from_index(index: int) -> tuple[KernelId, CountVariant]:
    return ALL_PAIRS[index]


@dataclass(frozen=True)
class LevelOutcome:
    new_frontier_count: int
    elapsed_ns: int


# ---------------------------------------------------------------------------
# Worker pool
# ---------------------------------------------------------------------------

_pool_lock = threading.Lock()
_pool: ThreadPoolExecutor | None = None
_pool_size = 0
_worker_count = os.cpu_count() or 1


def set_worker_count(count: int) -> None:
    """Set the number of workers used to execute kernel blocks."""
    global _worker_count
    if count < 1:
        raise ValueError("worker count must be >= 1")
    _worker_count = int(count)


def worker_count() -> int:
    return _worker_count


def _get_pool(size: int) -> ThreadPoolExecutor:
    global _pool, _pool_size
    with _pool_lock:
        if _pool is None or _pool_size != size:
            if _pool is not None:
                _pool.shutdown(wait=True)
            _pool = ThreadPoolExecutor(max_workers=size, thread_name_prefix="bfs-kernel")
            _pool_size = size
        return _pool


def _run_blocks(block_fn, n_items: int) -> None:
    """Run block_fn(lo, hi) over a static partition of [0, n_items)."""
    if n_items <= 0:
        return
    workers = min(_worker_count, max(1, n_items // _MIN_BLOCK_ITEMS))
    if workers <= 1:
        block_fn(0, n_items)
        return
    bounds = np.linspace(0, n_items, workers + 1, dtype=np.int64)
    pool = _get_pool(_worker_count)
    futures = [
        pool.submit(block_fn, int(bounds[b]), int(bounds[b + 1]))
        for b in range(workers)
        if bounds[b] < bounds[b + 1]
    ]
    for fut in futures:
        fut.result()


# ---------------------------------------------------------------------------
# Depth initialization and count aggregation
# ---------------------------------------------------------------------------

def init_depths(graph: Graph, root: int) -> np.ndarray:
    """Per-vertex depth array: INF_DEPTH everywhere except depth 0 at root."""
    if not 0 <= root < graph.vertex_count:
        raise ValueError(f"root {root} out of range for |V|={graph.vertex_count}")
    depths = np.full(graph.vertex_count, INF_DEPTH, dtype=DEPTH_DTYPE)
    depths[root] = 0
    return depths


def aggregate_count(local_counts, variant: CountVariant) -> int:
    """Fold per-work-item discovery counts into one total.

    The three variants are reduction trees of increasing depth: the
    direct variant folds every item into a single accumulator in one
    pass, the group variant pre-sums groups of GROUP_SIZE items before
    the shared update, and the two-level variant additionally pre-sums
    groups of group sums. All variants return the exact integer total;
    they differ only in how the aggregation work is shaped.
    """
    counts = np.asarray(local_counts, dtype=np.int64).ravel()
    if variant == CountVariant.DIRECT_ATOMIC:
        return int(counts.sum())
    group_sums = _grouped_sums(counts, GROUP_SIZE)
    if variant == CountVariant.GROUP_REDUCE:
        return int(group_sums.sum())
    if variant == CountVariant.TWO_LEVEL_REDUCE:
        return int(_grouped_sums(group_sums, GROUP_SIZE).sum())
    raise ValueError(f"unknown count variant {variant!r}")


def _grouped_sums(values: np.ndarray, width: int) -> np.ndarray:
    if values.size == 0:
        return np.zeros(0, dtype=np.int64)
    pad = (-values.size) % width
    if pad:
        values = np.concatenate([values, np.zeros(pad, dtype=np.int64)])
    return values.reshape(-1, width).sum(axis=1)


# ---------------------------------------------------------------------------
# Level kernels
# ---------------------------------------------------------------------------

def _claim(depths: np.ndarray, candidates: np.ndarray, level: int,
           lock: threading.Lock) -> np.ndarray:
    """Atomically relax candidate vertices to level+1.

    Returns, among the unique candidates, the positions (indices of their
    first occurrence in ``candidates``) whose depth transitioned from
    INF_DEPTH, i.e. the claims this caller won. Relaxation writes
    min(previous, level+1); only INF transitions count as discoveries.
    """
    uniq, first = np.unique(candidates, return_index=True)
    with lock:
        current = depths[uniq]
        lower = current > level + 1
        fresh = current == INF_DEPTH
        if lower.any():
            depths[uniq[lower]] = level + 1
    return first[fresh]


def _relax_from_edges(graph: Graph, depths: np.ndarray, level: int,
                      counts: np.ndarray, lock: threading.Lock,
                      edge_heads: np.ndarray, edge_tails: np.ndarray,
                      lo: int, hi: int) -> None:
    """Edge-centric block: one work item per edge slot in [lo, hi)."""
    heads = edge_heads[lo:hi]
    active = depths[heads] == level
    if not active.any():
        return
    active_pos = np.flatnonzero(active)
    cand = edge_tails[lo:hi][active_pos]
    won = _claim(depths, cand, level, lock)
    if won.size:
        counts[lo + active_pos[won]] = 1


def run_level_edge_list(graph: Graph, depths: np.ndarray, level: int,
                        variant: CountVariant) -> LevelOutcome:
    """One work item per forward edge: relax origin->destination."""
    def block(lo: int, hi: int, counts, lock) -> None:
        _relax_from_edges(graph, depths, level, counts, lock,
                          graph.origins, graph.destinations, lo, hi)

    return _timed_level(block, graph.edge_count, variant)


def run_level_rev_edge_list(graph: Graph, depths: np.ndarray, level: int,
                            variant: CountVariant) -> LevelOutcome:
    """One work item per reverse-CSR slot: relax source->owning vertex."""
    rev_owner = graph.rev_owner()

    def block(lo: int, hi: int, counts, lock) -> None:
        _relax_from_edges(graph, depths, level, counts, lock,
                          graph.sources, rev_owner, lo, hi)

    return _timed_level(block, graph.edge_count, variant)


def _push_block(graph: Graph, depths: np.ndarray, level: int,
                counts: np.ndarray, lock: threading.Lock,
                v_lo: int, v_hi: int, item_of_vertex) -> None:
    """Relax all out-edges of frontier vertices in [v_lo, v_hi).

    ``item_of_vertex`` maps a claiming vertex id to the work item that
    gets credited (identity for vertex push, chunk id for push-warp).
    """
    frontier = v_lo + np.flatnonzero(depths[v_lo:v_hi] == level)
    if frontier.size == 0:
        return
    starts = graph.out_offsets[frontier].astype(np.int64)
    ends = graph.out_offsets[frontier + 1].astype(np.int64)
    lens = ends - starts
    total = int(lens.sum())
    if total == 0:
        return
    shift = np.cumsum(lens) - lens
    flat = np.repeat(starts - shift, lens) + np.arange(total, dtype=np.int64)
    cand = graph.destinations[flat]
    owner = np.repeat(frontier, lens)
    won = _claim(depths, cand, level, lock)
    if won.size:
        np.add.at(counts, item_of_vertex(owner[won]), 1)


def run_level_vertex_push(graph: Graph, depths: np.ndarray, level: int,
                          variant: CountVariant) -> LevelOutcome:
    """One work item per vertex; frontier vertices relax their out-neighbors."""
    def block(lo: int, hi: int, counts, lock) -> None:
        _push_block(graph, depths, level, counts, lock, lo, hi,
                    lambda vs: vs)

    return _timed_level(block, graph.vertex_count, variant)


def run_level_vertex_pull(graph: Graph, depths: np.ndarray, level: int,
                          variant: CountVariant) -> LevelOutcome:
    """One work item per vertex; undiscovered vertices scan in-neighbors.

    A vertex stops scanning at the first in-neighbor whose depth equals
    the current level. Each vertex's depth is written only by its own
    work item, so no claim lock is needed.
    """
    def block(lo: int, hi: int, counts, lock) -> None:
        undisc = lo + np.flatnonzero(depths[lo:hi] == INF_DEPTH)
        if undisc.size == 0:
            return
        cursor = graph.in_offsets[undisc].astype(np.int64)
        stop = graph.in_offsets[undisc + 1].astype(np.int64)
        alive = cursor < stop
        while True:
            scanning = np.flatnonzero(alive)
            if scanning.size == 0:
                break
            neighbor = graph.sources[cursor[scanning]]
            hit = depths[neighbor] == level
            found = undisc[scanning[hit]]
            if found.size:
                depths[found] = level + 1
                counts[found] = 1
                alive[scanning[hit]] = False
            rest = scanning[~hit]
            cursor[rest] += 1
            alive[rest] = cursor[rest] < stop[rest]

    return _timed_level(block, graph.vertex_count, variant)


def run_level_push_warp(graph: Graph, depths: np.ndarray, level: int,
                        variant: CountVariant,
                        chunk_size: int = GROUP_SIZE) -> LevelOutcome:
    """Vertex push with chunked work items.

    Vertices are grouped into chunks of ``chunk_size``; one work item
    walks the combined out-edge workload of its whole chunk, which
    redistributes degree-induced imbalance at chunk granularity.
    """
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    n_chunks = -(-graph.vertex_count // chunk_size) if graph.vertex_count else 0

    def block(c_lo: int, c_hi: int, counts, lock) -> None:
        v_lo = c_lo * chunk_size
        v_hi = min(c_hi * chunk_size, graph.vertex_count)
        _push_block(graph, depths, level, counts, lock, v_lo, v_hi,
                    lambda vs: vs // chunk_size)

    return _timed_level(block, n_chunks, variant)


def _timed_level(block_fn, n_items: int, variant: CountVariant) -> LevelOutcome:
    """Run one level barrier-to-barrier and time it, aggregation included."""
    started = time.perf_counter_ns()
    counts = np.zeros(n_items, dtype=np.int64)
    lock = threading.Lock()
    _run_blocks(lambda lo, hi: block_fn(lo, hi, counts, lock), n_items)
    total = aggregate_count(counts, variant)
    elapsed = time.perf_counter_ns() - started
    return LevelOutcome(new_frontier_count=total, elapsed_ns=max(elapsed, 1))


# ---------------------------------------------------------------------------
# Full traversals
# ---------------------------------------------------------------------------

def run_level(graph: Graph, depths: np.ndarray, level: int, kernel: KernelId,
              variant: CountVariant, chunk_size: int = GROUP_SIZE) -> LevelOutcome:
    """Dispatch one level to the chosen kernel."""
    if kernel == KernelId.EDGE_LIST:
        return run_level_edge_list(graph, depths, level, variant)
    if kernel == KernelId.REV_EDGE_LIST:
        return run_level_rev_edge_list(graph, depths, level, variant)
    if kernel == KernelId.VERTEX_PUSH:
        return run_level_vertex_push(graph, depths, level, variant)
    if kernel == KernelId.VERTEX_PULL:
        return run_level_vertex_pull(graph, depths, level, variant)
    if kernel == KernelId.VERTEX_PUSH_WARP:
        return run_level_push_warp(graph, depths, level, variant, chunk_size)
    raise ValueError(f"unknown kernel {kernel!r}")


def bfs_full(graph: Graph, root: int, kernel: KernelId, variant: CountVariant,
             chunk_size: int = GROUP_SIZE) -> tuple[np.ndarray, list[LevelOutcome]]:
    """Run the chosen kernel level by level until no vertex is discovered.

    The terminating zero-discovery level is executed and recorded, so the
    outcome list always ends with a count of 0.
    """
    depths = init_depths(graph, root)
    outcomes: list[LevelOutcome] = []
    level = 0
    while True:
        outcome = run_level(graph, depths, level, kernel, variant, chunk_size)
        outcomes.append(outcome)
        if outcome.new_frontier_count == 0:
            return depths, outcomes
        level += 1


def reference_bfs(graph: Graph, root: int) -> np.ndarray:
    """Sequential FIFO BFS over out-edges; the correctness oracle."""
    if not 0 <= root < graph.vertex_count:
        raise ValueError(f"root {root} out of range for |V|={graph.vertex_count}")
    depths = np.full(graph.vertex_count, INF_DEPTH, dtype=DEPTH_DTYPE)
    depths[root] = 0
    offsets = graph.out_offsets.tolist()
    dest = graph.destinations.tolist()
    queue = deque([root])
    while queue:
        u = queue.popleft()
        d = depths[u] + 1
        for e in range(offsets[u], offsets[u + 1]):
            v = dest[e]
            if depths[v] == INF_DEPTH:
                depths[v] = d
                queue.append(v)
    return depths
