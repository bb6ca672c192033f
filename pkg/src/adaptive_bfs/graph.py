"""Graph loading, generation, and the combined edge/vertex representation.

The combined representation stores a forward CSR (``out_offsets`` +
``destinations``), a per-edge ``origins`` array parallel to
``destinations``, and a reverse CSR (``in_offsets`` + ``sources``).
Keeping all of them in memory lets edge-centric and vertex-centric
traversal kernels share one immutable graph with zero conversion cost;
the price over plain CSR is one extra id per edge.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

ID_DTYPE = np.uint32
GRAPH_MAGIC = b"ADGR"
GRAPH_FORMAT_VERSION = 1

_GENERATOR_MODELS = ("uniform-random", "rmat-like", "star", "path", "complete-bipartite")


@dataclass
class Graph:
    """Immutable directed graph in the combined representation.

    ``out_offsets``/``destinations`` form a CSR sorted by (origin,
    destination); ``origins[e]`` is the origin vertex of edge slot ``e``.
    ``in_offsets``/``sources`` form the symmetric reverse CSR sorted by
    (destination, origin). Duplicate edges and self-loops are preserved.
    """

    vertex_count: int
    edge_count: int
    out_offsets: np.ndarray
    destinations: np.ndarray
    origins: np.ndarray
    in_offsets: np.ndarray
    sources: np.ndarray
    _rev_owner: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        for arr in (self.out_offsets, self.destinations, self.origins,
                    self.in_offsets, self.sources):
            arr.setflags(write=False)

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_offsets.astype(np.int64))

    def in_degrees(self) -> np.ndarray:
        return np.diff(self.in_offsets.astype(np.int64))

    def rev_owner(self) -> np.ndarray:
        """Owning (destination) vertex of each reverse-CSR slot, cached."""
        if self._rev_owner is None:
            owner = np.repeat(
                np.arange(self.vertex_count, dtype=ID_DTYPE), self.in_degrees()
            )
            owner.setflags(write=False)
            self._rev_owner = owner
        return self._rev_owner

    def edge_pairs(self) -> np.ndarray:
        """(|E|, 2) array of (origin, destination) pairs in CSR order."""
        return np.stack([self.origins, self.destinations], axis=1)


@dataclass(frozen=True)
class DegreeSummary:
    """Five-number summary plus population standard deviation."""

    min: float
    q1: float
    median: float
    q3: float
    max: float
    stddev: float


@dataclass(frozen=True)
class GraphStats:
    vertex_count: int
    edge_count: int
    out_degree_summary: DegreeSummary
    in_degree_summary: DegreeSummary
    abs_degree_summary: DegreeSummary


def build_combined(edge_pairs: Iterable[Sequence[int]] | np.ndarray,
                   vertex_count: int) -> Graph:
    """Build the combined representation from (origin, destination) pairs.

    Edges are sorted by (origin, destination) for the forward CSR and by
    (destination, origin) for the reverse CSR. Raises ``ValueError`` if
    any endpoint is outside ``[0, vertex_count)``.
    """
    pairs = np.asarray(edge_pairs, dtype=np.int64)
    if pairs.size == 0:
        pairs = pairs.reshape(0, 2)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("edge pairs must be an (n, 2) sequence")
    if pairs.size and (pairs.min() < 0 or pairs.max() >= vertex_count):
        raise ValueError(
            f"edge endpoint out of range for vertex_count={vertex_count}"
        )
    src = pairs[:, 0]
    dst = pairs[:, 1]
    n = int(vertex_count)
    m = int(pairs.shape[0])

    fwd = np.lexsort((dst, src))
    out_offsets = np.zeros(n + 1, dtype=ID_DTYPE)
    out_offsets[1:] = np.cumsum(np.bincount(src, minlength=n))
    destinations = dst[fwd].astype(ID_DTYPE)
    origins = src[fwd].astype(ID_DTYPE)

    rev = np.lexsort((src, dst))
    in_offsets = np.zeros(n + 1, dtype=ID_DTYPE)
    in_offsets[1:] = np.cumsum(np.bincount(dst, minlength=n))
    sources = src[rev].astype(ID_DTYPE)

    return Graph(
        vertex_count=n,
        edge_count=m,
        out_offsets=out_offsets,
        destinations=destinations,
        origins=origins,
        in_offsets=in_offsets,
        sources=sources,
    )


def load_edge_list(stream: IO[str] | str) -> Graph:
    """Parse a KONECT-style plain-text edge list.

    Lines starting with ``%`` or ``#`` are comments. Data lines hold
    whitespace-separated source and destination ids; extra columns
    (weights, timestamps) are ignored. External ids are remapped densely
    to ``[0, |V|)`` in first-appearance order. Duplicates and self-loops
    are kept.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    remap: dict[int, int] = {}
    src_ids: list[int] = []
    dst_ids: list[int] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("%") or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) < 2:
            raise ValueError(f"line {lineno}: expected at least 2 columns")
        try:
            u_ext = int(fields[0])
            v_ext = int(fields[1])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: malformed vertex id: {exc}") from None
        u = remap.setdefault(u_ext, len(remap))
        v = remap.setdefault(v_ext, len(remap))
        src_ids.append(u)
        dst_ids.append(v)
    if not src_ids:
        raise ValueError("no edges")
    pairs = np.stack([np.asarray(src_ids), np.asarray(dst_ids)], axis=1)
    return build_combined(pairs, len(remap))


def extra_memory_cost(graph: Graph, id_width_bytes: int) -> int:
    """Bytes the per-edge origins array adds on top of plain CSR."""
    if id_width_bytes not in (4, 8):
        raise ValueError("id width must be 4 or 8 bytes")
    return graph.edge_count * id_width_bytes


def summarize_degrees(values: np.ndarray) -> DegreeSummary:
    """Five-number summary (linear-interpolated quantiles) and population stddev."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        raise ValueError("cannot summarize an empty degree sequence")
    q = np.quantile(vals, [0.0, 0.25, 0.5, 0.75, 1.0])
    return DegreeSummary(
        min=float(q[0]),
        q1=float(q[1]),
        median=float(q[2]),
        q3=float(q[3]),
        max=float(q[4]),
        stddev=float(np.std(vals)),
    )


def compute_stats(graph: Graph) -> GraphStats:
    """Static structural statistics: degree summaries over all |V| vertices."""
    if graph.vertex_count < 1:
        raise ValueError("graph must have at least one vertex")
    out_deg = graph.out_degrees()
    in_deg = graph.in_degrees()
    return GraphStats(
        vertex_count=graph.vertex_count,
        edge_count=graph.edge_count,
        out_degree_summary=summarize_degrees(out_deg),
        in_degree_summary=summarize_degrees(in_deg),
        abs_degree_summary=summarize_degrees(out_deg + in_deg),
    )


def generate_graph(model: str, params: dict, seed: int) -> Graph:
    """Deterministic synthetic graph generator.

    Models:
      - ``uniform-random``: params ``n``, ``edges``; endpoints drawn iid.
      - ``rmat-like``: params ``scale`` (|V| = 2**scale), ``edges``, and
        optional quadrant probabilities ``a``/``b``/``c`` (d is the rest).
      - ``star``: params ``leaves``; bidirectional center<->leaf edges.
      - ``path``: params ``n``; directed edges i -> i+1.
      - ``complete-bipartite``: params ``a``, ``b``; all cross edges in
        both directions.
    """
    if model not in _GENERATOR_MODELS:
        raise ValueError(f"unknown graph model {model!r}; choose from {_GENERATOR_MODELS}")
    rng = np.random.default_rng(seed)
    if model == "uniform-random":
        n = _positive_int(params, "n")
        m = _positive_int(params, "edges", allow_zero=True)
        src = rng.integers(0, n, size=m)
        dst = rng.integers(0, n, size=m)
        return build_combined(np.stack([src, dst], axis=1), n)
    if model == "rmat-like":
        scale = _positive_int(params, "scale")
        m = _positive_int(params, "edges", allow_zero=True)
        a = float(params.get("a", 0.57))
        b = float(params.get("b", 0.19))
        c = float(params.get("c", 0.19))
        if min(a, b, c) < 0 or a + b + c > 1.0 + 1e-9:
            raise ValueError("rmat probabilities must be non-negative and sum to <= 1")
        n = 1 << scale
        src = np.zeros(m, dtype=np.int64)
        dst = np.zeros(m, dtype=np.int64)
        # One quadrant decision per bit level, vectorized over all edges:
        # quadrants are (a, b, c, d) row-major, src bit set in the bottom
        # half (c|d), dst bit set in the right half (b|d).
        for _ in range(scale):
            r = rng.random(m)
            src_bit = r >= a + b
            dst_bit = ((r >= a) & (r < a + b)) | (r >= a + b + c)
            src = (src << 1) | src_bit.astype(np.int64)
            dst = (dst << 1) | dst_bit.astype(np.int64)
        return build_combined(np.stack([src, dst], axis=1), n)
    if model == "star":
        leaves = _positive_int(params, "leaves")
        leaf_ids = np.arange(1, leaves + 1, dtype=np.int64)
        center = np.zeros(leaves, dtype=np.int64)
        pairs = np.concatenate(
            [
                np.stack([center, leaf_ids], axis=1),
                np.stack([leaf_ids, center], axis=1),
            ]
        )
        return build_combined(pairs, leaves + 1)
    if model == "path":
        n = _positive_int(params, "n")
        idx = np.arange(n - 1, dtype=np.int64)
        return build_combined(np.stack([idx, idx + 1], axis=1), n)
    # complete-bipartite
    a_n = _positive_int(params, "a")
    b_n = _positive_int(params, "b")
    left = np.arange(a_n, dtype=np.int64)
    right = np.arange(a_n, a_n + b_n, dtype=np.int64)
    fwd = np.stack(
        [np.repeat(left, b_n), np.tile(right, a_n)], axis=1
    )
    pairs = np.concatenate([fwd, fwd[:, ::-1]])
    return build_combined(pairs, a_n + b_n)


def _positive_int(params: dict, key: str, allow_zero: bool = False) -> int:
    try:
        value = int(params[key])
    except KeyError:
        raise ValueError(f"missing generator parameter {key!r}") from None
    except (TypeError, ValueError):
        raise ValueError(f"generator parameter {key!r} must be an integer") from None
    if value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"generator parameter {key!r} must be positive")
    return value


def write_graph(graph: Graph, path: str) -> None:
    """Binary dump: "ADGR" magic, u32 version, u64 |V|, u64 |E|, then the
    five arrays in declaration order as little-endian u32."""
    with open(path, "wb") as fh:
        fh.write(GRAPH_MAGIC)
        fh.write(struct.pack("<IQQ", GRAPH_FORMAT_VERSION,
                             graph.vertex_count, graph.edge_count))
        for arr in (graph.out_offsets, graph.destinations, graph.origins,
                    graph.in_offsets, graph.sources):
            fh.write(arr.astype("<u4", copy=False).tobytes())


def read_graph(path: str) -> Graph:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != GRAPH_MAGIC:
            raise ValueError(f"bad magic {magic!r} in graph file {path}")
        header = fh.read(20)
        if len(header) != 20:
            raise ValueError(f"truncated graph header in {path}")
        version, n, m = struct.unpack("<IQQ", header)
        if version != GRAPH_FORMAT_VERSION:
            raise ValueError(f"unsupported graph format version {version}")
        sizes = (n + 1, m, m, n + 1, m)
        arrays = []
        for count in sizes:
            raw = fh.read(4 * count)
            if len(raw) != 4 * count:
                raise ValueError(f"truncated graph file {path}")
            arrays.append(np.frombuffer(raw, dtype="<u4").astype(ID_DTYPE))
        if fh.read(1):
            raise ValueError(f"trailing bytes in graph file {path}")
    return Graph(int(n), int(m), *arrays)
