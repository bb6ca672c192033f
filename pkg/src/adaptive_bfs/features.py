"""Feature extraction: benchmark rows -> labeled samples, runtime state -> vectors.

A feature vector flattens to 24 scalars: graph size (2), frontier and
discovery state as absolute counts and fractions of |V| (4), and three
6-value degree summaries. Degree summaries are static per graph; only the
frontier/discovery scalars change per level, which keeps runtime
extraction O(1) against precomputed stats.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bench import LevelSample, read_samples
from .graph import DegreeSummary, GraphStats
from .kernels import ALL_PAIRS, CountVariant, KernelId, pair_index

_SUMMARY_FIELDS = ("min", "q1", "median", "q3", "max", "stddev")

#: All 24 scalar feature names, in canonical order.
FEATURE_NAMES: tuple[str, ...] = (
    "vertex_count",
    "edge_count",
    "frontier_abs",
    "frontier_pct",
    "discovered_abs",
    "discovered_pct",
    *(f"out_deg.{f}" for f in _SUMMARY_FIELDS),
    *(f"in_deg.{f}" for f in _SUMMARY_FIELDS),
    *(f"abs_deg.{f}" for f in _SUMMARY_FIELDS),
)

#: Default model inputs: graph size, discovery fraction, out-degree
#: distribution, and absolute frontier size.
DEFAULT_MODEL_FEATURES: tuple[str, ...] = (
    "vertex_count",
    "edge_count",
    "discovered_pct",
    "out_deg.min",
    "out_deg.q1",
    "out_deg.median",
    "out_deg.q3",
    "out_deg.max",
    "out_deg.stddev",
    "frontier_abs",
)


def validate_selection(selection: Sequence[str]) -> tuple[str, ...]:
    """Check a feature selection: non-empty, no duplicates, known names."""
    names = tuple(selection)
    if not names:
        raise ValueError("feature selection must be non-empty")
    if len(set(names)) != len(names):
        raise ValueError("feature selection has duplicate names")
    unknown = [n for n in names if n not in FEATURE_NAMES]
    if unknown:
        raise ValueError(f"unknown feature names: {unknown}")
    return names


@dataclass(frozen=True)
class FeatureVector:
    vertex_count: int
    edge_count: int
    frontier_abs: int
    frontier_pct: float
    discovered_abs: int
    discovered_pct: float
    out_deg: DegreeSummary
    in_deg: DegreeSummary
    abs_deg: DegreeSummary

    def scalar(self, name: str) -> float:
        if "." in name:
            summary_name, field = name.split(".", 1)
            return float(getattr(getattr(self, summary_name), field))
        return float(getattr(self, name))

    def as_array(self, selection: Sequence[str] | None = None) -> np.ndarray:
        names = FEATURE_NAMES if selection is None else selection
        return np.array([self.scalar(n) for n in names], dtype=np.float64)


@dataclass(frozen=True)
class TrainingSample:
    graph_id: str
    root: int
    level: int
    features: FeatureVector
    label: tuple[KernelId, CountVariant]


def extract_runtime_features(stats: GraphStats, frontier_abs: int,
                             discovered_abs: int) -> FeatureVector:
    """Combine static graph stats with the current traversal state."""
    n = stats.vertex_count
    if n < 1:
        raise ValueError("stats must describe a non-empty graph")
    if frontier_abs < 0 or discovered_abs < frontier_abs:
        raise ValueError(
            f"need 0 <= frontier_abs <= discovered_abs, got "
            f"{frontier_abs} and {discovered_abs}"
        )
    if discovered_abs > n:
        raise ValueError(f"discovered_abs {discovered_abs} exceeds |V|={n}")
    return FeatureVector(
        vertex_count=n,
        edge_count=stats.edge_count,
        frontier_abs=frontier_abs,
        frontier_pct=frontier_abs / n,
        discovered_abs=discovered_abs,
        discovered_pct=discovered_abs / n,
        out_deg=stats.out_degree_summary,
        in_deg=stats.in_degree_summary,
        abs_deg=stats.abs_degree_summary,
    )


def label_level(samples_for_level: Sequence[LevelSample],
                metric: str = "mean") -> tuple[KernelId, CountVariant]:
    """Fastest pair for one (graph, root, level); ties -> lowest ordinal.

    ``metric`` is "mean" (default, matches the averaged benchmark) or
    "min" (noise-robust alternative).
    """
    if metric not in ("mean", "min"):
        raise ValueError(f"metric must be 'mean' or 'min', not {metric!r}")
    keys = {(s.graph_id, s.root, s.level) for s in samples_for_level}
    if len(keys) != 1:
        raise ValueError(f"samples span multiple levels: {sorted(keys)}")
    by_pair = {pair_index(s.kernel, s.variant): s for s in samples_for_level}
    if len(by_pair) != len(ALL_PAIRS) or len(samples_for_level) != len(ALL_PAIRS):
        missing = sorted(set(range(len(ALL_PAIRS))) - set(by_pair))
        raise ValueError(f"level not covered by all pairs; missing {missing}")
    value = (lambda s: s.mean_ns) if metric == "mean" else (lambda s: s.min_ns)
    best = min(by_pair, key=lambda i: (value(by_pair[i]), i))
    return ALL_PAIRS[best]


def training_samples_from(samples: Iterable[LevelSample],
                          stats_map: Mapping[str, GraphStats],
                          metric: str = "mean") -> list[TrainingSample]:
    """Label every (graph, root, level) group and attach feature vectors."""
    grouped: dict[tuple[str, int, int], list[LevelSample]] = {}
    for s in samples:
        grouped.setdefault((s.graph_id, s.root, s.level), []).append(s)
    out: list[TrainingSample] = []
    for (graph_id, root, level) in sorted(grouped):
        rows = grouped[(graph_id, root, level)]
        if graph_id not in stats_map:
            raise ValueError(f"no graph stats for graph_id {graph_id!r}")
        label = label_level(rows, metric=metric)
        features = extract_runtime_features(
            stats_map[graph_id], rows[0].frontier_size, rows[0].discovered_before
        )
        out.append(TrainingSample(graph_id, root, level, features, label))
    return out


def build_training_set(levels_path: str, stats_map: Mapping[str, GraphStats],
                       metric: str = "mean") -> list[TrainingSample]:
    """Read levels.csv and produce one labeled sample per (graph, root, level)."""
    return training_samples_from(read_samples(levels_path), stats_map, metric)


def to_matrix(training: Sequence[TrainingSample],
              selection: Sequence[str] | None = None
              ) -> tuple[np.ndarray, np.ndarray]:
    """Project samples through a selection: (n, d) features, (n,) ordinals."""
    names = validate_selection(selection or DEFAULT_MODEL_FEATURES)
    x = np.array([t.features.as_array(names) for t in training], dtype=np.float64)
    y = np.array([pair_index(*t.label) for t in training], dtype=np.int64)
    return x.reshape(len(training), len(names)), y


TRAINING_HEADER: tuple[str, ...] = (
    "graph_id", "root", "level", *FEATURE_NAMES, "label_kernel", "label_variant",
)


def write_training_csv(training: Sequence[TrainingSample], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAINING_HEADER)
        for t in training:
            vec = t.features.as_array()
            writer.writerow([
                t.graph_id, t.root, t.level,
                *[repr(float(v)) for v in vec],
                t.label[0].name, t.label[1].name,
            ])


def read_training_csv(path: str) -> list[TrainingSample]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != TRAINING_HEADER:
            raise ValueError(f"unexpected training.csv header in {path}")
        out = []
        for row in reader:
            def summary(prefix: str) -> DegreeSummary:
                return DegreeSummary(*(
                    float(row[f"{prefix}.{f}"]) for f in _SUMMARY_FIELDS
                ))

            features = FeatureVector(
                vertex_count=int(float(row["vertex_count"])),
                edge_count=int(float(row["edge_count"])),
                frontier_abs=int(float(row["frontier_abs"])),
                frontier_pct=float(row["frontier_pct"]),
                discovered_abs=int(float(row["discovered_abs"])),
                discovered_pct=float(row["discovered_pct"]),
                out_deg=summary("out_deg"),
                in_deg=summary("in_deg"),
                abs_deg=summary("abs_deg"),
            )
            out.append(TrainingSample(
                graph_id=row["graph_id"],
                root=int(row["root"]),
                level=int(row["level"]),
                features=features,
                label=(KernelId[row["label_kernel"]],
                       CountVariant[row["label_variant"]]),
            ))
        return out
