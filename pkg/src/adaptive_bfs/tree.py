"""From-scratch CART-style decision tree over the 15 (kernel, variant) labels.

Training is plain recursive Gini splitting with deterministic
tie-breaking: among equal-gain splits the lowest feature index wins, then
the lowest threshold. Leaves whose top histogram count is shared by more
than one label predict UNKNOWN, an explicit value the adaptive traversal
resolves with its own fallback chain.

For prediction the pointer tree is flattened into a contiguous array of
fixed-width records (preorder), which the runtime descends either one
vector at a time or as a vectorized batch.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .kernels import ALL_PAIRS, CountVariant, KernelId, pair_from_index

N_CLASSES = len(ALL_PAIRS)
LEAF_UNKNOWN = 254
NOT_A_LEAF = 255

TREE_MAGIC = b"ADBT"
TREE_FORMAT_VERSION = 1
_NODE_DTYPE = np.dtype([
    ("feature", "<u2"),
    ("threshold", "<f8"),
    ("left", "<u4"),
    ("right", "<u4"),
    ("leaf_class", "u1"),
])

_MIN_GAIN = 1e-12


class _UnknownType:
    """Singleton returned when a leaf has no unique majority label."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNKNOWN"


UNKNOWN = _UnknownType()


@dataclass(frozen=True)
class TrainConfig:
    max_depth: int = 16
    min_samples_leaf: int = 5
    min_samples_split: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.max_depth, self.min_samples_leaf, self.min_samples_split) < 1:
            raise ValueError("tree size limits must all be >= 1")


@dataclass(eq=False)
class Leaf:
    histogram: np.ndarray
    majority: int  # class ordinal, or LEAF_UNKNOWN on a tied histogram


@dataclass(eq=False)
class Internal:
    feature_index: int
    threshold: float
    delta: float
    samples: int
    histogram: np.ndarray
    left: Union["Internal", Leaf]
    right: Union["Internal", Leaf]


@dataclass(eq=False)
class Tree:
    root: Internal | Leaf
    selection: tuple[str, ...]
    config: TrainConfig
    node_count: int
    n_training_samples: int


def gini(histogram: np.ndarray) -> float:
    """Gini impurity 1 - sum((n_c / n)^2) of a label histogram."""
    counts = np.asarray(histogram, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("gini of an empty histogram is undefined")
    p = counts / total
    return float(1.0 - (p * p).sum())


def best_split(x: np.ndarray, y: np.ndarray,
               min_samples_leaf: int) -> tuple[int, float, float] | None:
    """Best (feature, threshold, gain) by weighted Gini decrease.

    Thresholds are midpoints between consecutive distinct sorted values
    of a feature; rows with value < threshold go left. Candidates leaving
    either side smaller than ``min_samples_leaf`` are skipped. Returns
    None when no candidate has positive gain. Equal-gain ties resolve to
    the lowest feature index, then the lowest threshold, which makes the
    result invariant to sample order.
    """
    n, n_features = x.shape
    if n < 2 * min_samples_leaf:
        return None
    parent_hist = np.bincount(y, minlength=N_CLASSES)
    parent_gini = gini(parent_hist)
    if parent_gini == 0.0:
        return None
    best: tuple[float, int, float] | None = None  # (-gain, feature, threshold)
    one_hot = np.zeros((n, N_CLASSES), dtype=np.float64)
    for feat in range(n_features):
        values = x[:, feat]
        order = np.argsort(values, kind="stable")
        v = values[order]
        one_hot[:] = 0.0
        one_hot[np.arange(n), y[order]] = 1.0
        left_counts = np.cumsum(one_hot, axis=0)  # row i: first i+1 samples
        sizes = np.arange(1, n, dtype=np.float64)
        cut = np.flatnonzero(v[1:] != v[:-1]) + 1  # left side sizes
        cut = cut[(cut >= min_samples_leaf) & (n - cut >= min_samples_leaf)]
        if cut.size == 0:
            continue
        lc = left_counts[cut - 1]
        rc = parent_hist[None, :] - lc
        ln = sizes[cut - 1]
        rn = n - ln
        gini_l = 1.0 - ((lc / ln[:, None]) ** 2).sum(axis=1)
        gini_r = 1.0 - ((rc / rn[:, None]) ** 2).sum(axis=1)
        gain = parent_gini - (ln / n) * gini_l - (rn / n) * gini_r
        pos = int(np.argmax(gain))  # first max: lowest threshold on ties
        if gain[pos] <= _MIN_GAIN:
            continue
        threshold = float((v[cut[pos] - 1] + v[cut[pos]]) / 2.0)
        key = (-float(gain[pos]), feat, threshold)
        if best is None or key < best:
            best = key
    if best is None:
        return None
    neg_gain, feat, threshold = best
    return feat, threshold, -neg_gain


def _make_leaf(hist: np.ndarray) -> Leaf:
    top = hist.max()
    winners = np.flatnonzero(hist == top)
    majority = int(winners[0]) if winners.size == 1 else LEAF_UNKNOWN
    return Leaf(histogram=hist, majority=majority)


def fit(x: np.ndarray, y: np.ndarray, selection: Sequence[str],
        config: TrainConfig | None = None) -> Tree:
    """Grow a tree by recursive Gini splitting; deterministic for fixed data."""
    config = config or TrainConfig()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("x must be (n, d) with one label per row")
    if x.shape[0] == 0:
        raise ValueError("cannot fit a tree on an empty training set")
    if x.shape[1] != len(selection):
        raise ValueError(
            f"selection names {len(selection)} features, x has {x.shape[1]}"
        )
    if y.size and (y.min() < 0 or y.max() >= N_CLASSES):
        raise ValueError(f"labels must be ordinals in [0, {N_CLASSES})")
    node_count = 0

    def build(rows: np.ndarray, depth: int) -> Internal | Leaf:
        nonlocal node_count
        node_count += 1
        hist = np.bincount(y[rows], minlength=N_CLASSES)
        if (depth >= config.max_depth
                or rows.size < config.min_samples_split
                or gini(hist) == 0.0):
            return _make_leaf(hist)
        found = best_split(x[rows], y[rows], config.min_samples_leaf)
        if found is None:
            return _make_leaf(hist)
        feat, threshold, gain = found
        go_left = x[rows, feat] < threshold
        return Internal(
            feature_index=feat,
            threshold=threshold,
            delta=gain,
            samples=int(rows.size),
            histogram=hist,
            left=build(rows[go_left], depth + 1),
            right=build(rows[~go_left], depth + 1),
        )

    root = build(np.arange(x.shape[0]), 0)
    return Tree(
        root=root,
        selection=tuple(selection),
        config=config,
        node_count=node_count,
        n_training_samples=int(x.shape[0]),
    )


def _class_to_result(ordinal: int):
    if ordinal == LEAF_UNKNOWN:
        return UNKNOWN
    return pair_from_index(ordinal)


def predict(model: "Tree | FlatTree", vector) -> tuple[KernelId, CountVariant] | _UnknownType:
    """Descend to a leaf; value < threshold goes left."""
    if isinstance(model, FlatTree):
        return _class_to_result(model.predict_one(vector))
    vec = _project(vector, model.selection)
    node = model.root
    while isinstance(node, Internal):
        node = node.left if vec[node.feature_index] < node.threshold else node.right
    return _class_to_result(node.majority)


def _project(vector, selection: tuple[str, ...]) -> np.ndarray:
    if hasattr(vector, "as_array"):
        return vector.as_array(selection)
    vec = np.asarray(vector, dtype=np.float64)
    if vec.shape != (len(selection),):
        raise ValueError(
            f"expected a vector of {len(selection)} features, got {vec.shape}"
        )
    return vec


def importance(tree: Tree) -> np.ndarray:
    """Per-feature normalized total Gini decrease; zeros for a leaf-only tree."""
    weights = np.zeros(len(tree.selection), dtype=np.float64)
    total = tree.n_training_samples

    def walk(node: Internal | Leaf) -> None:
        if isinstance(node, Internal):
            weights[node.feature_index] += (node.samples / total) * node.delta
            walk(node.left)
            walk(node.right)

    walk(tree.root)
    norm = weights.sum()
    return weights / norm if norm > 0 else weights


def split_train_test(samples: Sequence, fraction: float = 0.7,
                     seed: int = 0) -> tuple[list, list]:
    """Deterministic uniform partition; train gets round(fraction * n)."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    n = len(samples)
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(round(fraction * n))
    train = [samples[i] for i in order[:n_train]]
    test = [samples[i] for i in order[n_train:]]
    return train, test


@dataclass(frozen=True)
class EvalReport:
    top1_accuracy: float
    confusion: np.ndarray  # (15 true, 16 predicted); column 15 is UNKNOWN
    unknown_rate: float


def evaluate(model: "Tree | FlatTree", x: np.ndarray, y: np.ndarray) -> EvalReport:
    """Top-1 accuracy with UNKNOWN counted wrong and tallied separately."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape[0] == 0:
        raise ValueError("cannot evaluate on an empty test set")
    flat = model if isinstance(model, FlatTree) else flatten(model)
    pred = flat.predict_batch(x)
    confusion = np.zeros((N_CLASSES, N_CLASSES + 1), dtype=np.int64)
    pred_col = np.where(pred == LEAF_UNKNOWN, N_CLASSES, pred)
    np.add.at(confusion, (y, pred_col), 1)
    correct = int((pred == y).sum())
    unknown = int((pred == LEAF_UNKNOWN).sum())
    return EvalReport(
        top1_accuracy=correct / x.shape[0],
        confusion=confusion,
        unknown_rate=unknown / x.shape[0],
    )


@dataclass(eq=False)
class FlatTree:
    """Preorder array form of a Tree; the only structure used at runtime."""

    selection: tuple[str, ...]
    features: np.ndarray    # u2; 0 for leaves
    thresholds: np.ndarray  # f8; 0.0 for leaves
    lefts: np.ndarray       # u4; 0 for leaves
    rights: np.ndarray      # u4; 0 for leaves
    leaf_classes: np.ndarray  # u1; NOT_A_LEAF for internal nodes
    _fast: tuple | None = field(default=None, repr=False)

    @property
    def node_count(self) -> int:
        return len(self.leaf_classes)

    def _lists(self) -> tuple:
        # Plain-list mirror: per-node attribute loads during descent stay
        # cheap instead of paying numpy scalar-boxing on every hop.
        if self._fast is None:
            object.__setattr__(self, "_fast", (
                self.features.tolist(),
                self.thresholds.tolist(),
                self.lefts.tolist(),
                self.rights.tolist(),
                self.leaf_classes.tolist(),
            ))
        return self._fast

    def predict_one(self, vector) -> int:
        """Class ordinal (or LEAF_UNKNOWN) for one projected vector."""
        feats, thrs, lefts, rights, classes = self._lists()
        vec = _project(vector, self.selection).tolist()
        node = 0
        while classes[node] == NOT_A_LEAF:
            node = lefts[node] if vec[feats[node]] < thrs[node] else rights[node]
        return classes[node]

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        """Class ordinals for an (n, d) matrix via synchronous descent."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != len(self.selection):
            raise ValueError(
                f"expected (n, {len(self.selection)}) feature matrix, got {x.shape}"
            )
        cur = np.zeros(x.shape[0], dtype=np.int64)
        rows = np.arange(x.shape[0])
        while True:
            at_leaf = self.leaf_classes[cur] != NOT_A_LEAF
            if at_leaf.all():
                return self.leaf_classes[cur].astype(np.int64)
            go_left = x[rows, self.features[cur]] < self.thresholds[cur]
            nxt = np.where(go_left, self.lefts[cur], self.rights[cur])
            cur = np.where(at_leaf, cur, nxt)

    def predict_pairs(self, x: np.ndarray) -> list:
        return [_class_to_result(int(c)) for c in self.predict_batch(x)]


def flatten(tree: Tree) -> FlatTree:
    """Canonical preorder flattening (node, left subtree, right subtree)."""
    records: list[tuple[int, float, int, int, int]] = []

    def emit(node: Internal | Leaf) -> int:
        index = len(records)
        if isinstance(node, Leaf):
            records.append((0, 0.0, 0, 0, node.majority))
            return index
        records.append(None)  # reserve slot; children indices not yet known
        left = emit(node.left)
        right = emit(node.right)
        records[index] = (node.feature_index, node.threshold, left, right,
                          NOT_A_LEAF)
        return index

    emit(tree.root)
    return FlatTree(
        selection=tree.selection,
        features=np.array([r[0] for r in records], dtype=np.uint16),
        thresholds=np.array([r[1] for r in records], dtype=np.float64),
        lefts=np.array([r[2] for r in records], dtype=np.uint32),
        rights=np.array([r[3] for r in records], dtype=np.uint32),
        leaf_classes=np.array([r[4] for r in records], dtype=np.uint8),
    )


def serialize(model: Tree | FlatTree, path: str) -> None:
    """Write the flat model: header, selection names, fixed-width records."""
    flat = model if isinstance(model, FlatTree) else flatten(model)
    with open(path, "wb") as fh:
        fh.write(TREE_MAGIC)
        fh.write(struct.pack("<II", TREE_FORMAT_VERSION, flat.node_count))
        fh.write(struct.pack("<H", len(flat.selection)))
        for name in flat.selection:
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
        records = np.empty(flat.node_count, dtype=_NODE_DTYPE)
        records["feature"] = flat.features
        records["threshold"] = flat.thresholds
        records["left"] = flat.lefts
        records["right"] = flat.rights
        records["leaf_class"] = flat.leaf_classes
        fh.write(records.tobytes())


def deserialize(path: str) -> FlatTree:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != TREE_MAGIC:
            raise ValueError(f"bad magic {magic!r} in model file {path}")
        header = fh.read(8)
        if len(header) != 8:
            raise ValueError(f"truncated model header in {path}")
        version, node_count = struct.unpack("<II", header)
        if version != TREE_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version}")
        raw = fh.read(2)
        if len(raw) != 2:
            raise ValueError(f"truncated selection header in {path}")
        (n_names,) = struct.unpack("<H", raw)
        names = []
        for _ in range(n_names):
            raw = fh.read(2)
            if len(raw) != 2:
                raise ValueError(f"truncated selection name in {path}")
            (length,) = struct.unpack("<H", raw)
            name = fh.read(length)
            if len(name) != length:
                raise ValueError(f"truncated selection name in {path}")
            names.append(name.decode("utf-8"))
        body = fh.read(node_count * _NODE_DTYPE.itemsize)
        if len(body) != node_count * _NODE_DTYPE.itemsize:
            raise ValueError(f"truncated node records in {path}")
        if fh.read(1):
            raise ValueError(f"trailing bytes in model file {path}")
    records = np.frombuffer(body, dtype=_NODE_DTYPE)
    return FlatTree(
        selection=tuple(names),
        features=records["feature"].copy(),
        thresholds=records["threshold"].copy(),
        lefts=records["left"].copy(),
        rights=records["right"].copy(),
        leaf_classes=records["leaf_class"].copy(),
    )
