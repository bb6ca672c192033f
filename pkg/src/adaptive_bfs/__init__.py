"""Adaptive level-synchronous BFS: benchmark, model, switch kernels per level."""

from .adaptive import (
    DEFAULT_KERNEL,
    AdaptiveTrace,
    LatencyReport,
    LevelTrace,
    SlowdownRow,
    adaptive_bfs,
    argmin_policy,
    bucket_for,
    measure_prediction_latency,
    read_trace,
    slowdown_report,
    write_trace,
)
from .bench import (
    BenchmarkConfig,
    LevelSample,
    RunRecord,
    benchmark_graph,
    compute_optimal,
    compute_oracle,
    export_samples,
    pair_level_sums,
    per_level_argmin,
    read_records,
    read_samples,
    select_roots,
)
from .features import (
    DEFAULT_MODEL_FEATURES,
    FEATURE_NAMES,
    FeatureVector,
    TrainingSample,
    build_training_set,
    extract_runtime_features,
    label_level,
    read_training_csv,
    to_matrix,
    training_samples_from,
    validate_selection,
    write_training_csv,
)
from .graph import (
    DegreeSummary,
    Graph,
    GraphStats,
    build_combined,
    compute_stats,
    extra_memory_cost,
    generate_graph,
    load_edge_list,
    read_graph,
    summarize_degrees,
    write_graph,
)
from .kernels import (
    ALL_PAIRS,
    INF_DEPTH,
    CountVariant,
    KernelId,
    LevelOutcome,
    aggregate_count,
    bfs_full,
    init_depths,
    pair_from_index,
    pair_index,
    reference_bfs,
    run_level,
    set_worker_count,
    worker_count,
)
from .tree import (
    UNKNOWN,
    EvalReport,
    FlatTree,
    TrainConfig,
    Tree,
    deserialize,
    evaluate,
    fit,
    flatten,
    gini,
    importance,
    predict,
    serialize,
    split_train_test,
)

__all__ = [
    "ALL_PAIRS",
    "DEFAULT_KERNEL",
    "DEFAULT_MODEL_FEATURES",
    "FEATURE_NAMES",
    "INF_DEPTH",
    "UNKNOWN",
    "AdaptiveTrace",
    "BenchmarkConfig",
    "CountVariant",
    "DegreeSummary",
    "EvalReport",
    "FeatureVector",
    "FlatTree",
    "Graph",
    "GraphStats",
    "KernelId",
    "LatencyReport",
    "LevelOutcome",
    "LevelSample",
    "LevelTrace",
    "RunRecord",
    "SlowdownRow",
    "TrainConfig",
    "TrainingSample",
    "Tree",
    "adaptive_bfs",
    "aggregate_count",
    "argmin_policy",
    "benchmark_graph",
    "bfs_full",
    "bucket_for",
    "build_combined",
    "build_training_set",
    "compute_optimal",
    "compute_oracle",
    "compute_stats",
    "deserialize",
    "evaluate",
    "export_samples",
    "extra_memory_cost",
    "extract_runtime_features",
    "fit",
    "flatten",
    "generate_graph",
    "gini",
    "importance",
    "init_depths",
    "label_level",
    "load_edge_list",
    "measure_prediction_latency",
    "pair_from_index",
    "pair_index",
    "pair_level_sums",
    "per_level_argmin",
    "predict",
    "read_graph",
    "read_records",
    "read_samples",
    "read_trace",
    "read_training_csv",
    "reference_bfs",
    "run_level",
    "select_roots",
    "serialize",
    "set_worker_count",
    "slowdown_report",
    "split_train_test",
    "summarize_degrees",
    "to_matrix",
    "training_samples_from",
    "validate_selection",
    "worker_count",
    "write_graph",
    "write_trace",
    "write_training_csv",
]
