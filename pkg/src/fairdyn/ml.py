"""From-scratch tree classifiers, stratified splitting and CV, grid
search, and the iterative feature-subset selection loop.

Everything is deterministic under a seed: candidate thresholds sit at
midpoints of sorted unique values, ties break toward the lowest feature
index and lowest threshold, leaf ties predict class 0.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

MODEL_FAMILIES = ("decision_tree", "random_forest", "stratified_rf")

_EPS = 1e-12


class MLError(ValueError):
    pass


@dataclass(frozen=True)
class TreeParams:
    criterion: str = "gini"
    splitter: str = "best"
    max_depth: int | None = None
    max_features: str = "all"  # sqrt | log2 | all
    min_samples_leaf: int = 1
    min_samples_split: int = 2

    def __post_init__(self):
        if self.criterion not in ("gini", "entropy", "log_loss"):
            raise MLError(f"unknown criterion {self.criterion!r}")
        if self.splitter not in ("best", "random"):
            raise MLError(f"unknown splitter {self.splitter!r}")
        if self.max_features not in ("sqrt", "log2", "all"):
            raise MLError(f"unknown max_features {self.max_features!r}")
        if self.min_samples_split < 2:
            raise MLError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise MLError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 100
    tree: TreeParams = field(default_factory=TreeParams)
    bootstrap: bool = True
    stratified_bootstrap: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise MLError("n_estimators must be >= 1")
        if self.stratified_bootstrap and not self.bootstrap:
            raise MLError("stratified_bootstrap requires bootstrap")


@dataclass(frozen=True)
class CVConfig:
    folds: int = 10
    metric: str = "F1"
    test_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise MLError("folds must be >= 2")
        if not (0 < self.test_fraction < 1):
            raise MLError("test_fraction must be in (0, 1)")


def impurity(class_counts, criterion: str = "gini") -> float:
    counts = np.asarray(class_counts, dtype=float)
    if np.any(counts < 0):
        raise MLError("negative class count")
    total = counts.sum()
    if total == 0:
        raise MLError("all-zero class counts")
    p = counts[counts > 0] / total
    if criterion == "gini":
        return float(1.0 - np.sum(p ** 2))
    if criterion == "entropy":
        return float(-np.sum(p * np.log2(p)))
    if criterion == "log_loss":
        return float(-np.sum(p * np.log(p)))
    raise MLError(f"unknown criterion {criterion!r}")


@dataclass
class _Node:
    prediction: int
    feature: int | None = None
    threshold: float | None = None
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"predict": int(self.prediction)}
        return {
            "predict": int(self.prediction),
            "feature": int(self.feature),
            "threshold": float(self.threshold),
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "_Node":
        node = cls(prediction=d["predict"])
        if "feature" in d:
            node.feature = d["feature"]
            node.threshold = d["threshold"]
            node.left = cls.from_dict(d["left"])
            node.right = cls.from_dict(d["right"])
        return node


def _majority(y) -> int:
    ones = int(np.sum(y))
    zeros = len(y) - ones
    return 1 if ones > zeros else 0  # ties -> class 0


def _n_candidate_features(n_features: int, max_features: str) -> int:
    if max_features == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    if max_features == "log2":
        return max(1, int(math.log2(n_features))) if n_features > 1 else 1
    return n_features


def _candidate_features(n_features, params, rng):
    k = _n_candidate_features(n_features, params.max_features)
    if k >= n_features:
        return np.arange(n_features)
    return np.sort(rng.choice(n_features, size=k, replace=False))


def _best_split_on_feature(x_col, y, parent_imp, params):
    """(decrease, threshold) of the best midpoint split, or None."""
    order = np.argsort(x_col, kind="stable")
    xs = x_col[order]
    ys = y[order]
    uniq_mask = np.diff(xs) > _EPS
    if not uniq_mask.any():
        return None
    cut_positions = np.nonzero(uniq_mask)[0]  # split after index i
    n = len(ys)
    ones_cum = np.cumsum(ys)
    best = None
    for i in cut_positions:
        n_left = i + 1
        n_right = n - n_left
        if n_left < params.min_samples_leaf or n_right < params.min_samples_leaf:
            continue
        ones_left = ones_cum[i]
        ones_right = ones_cum[-1] - ones_left
        imp_left = impurity([n_left - ones_left, ones_left], params.criterion)
        imp_right = impurity([n_right - ones_right, ones_right], params.criterion)
        decrease = parent_imp - (n_left * imp_left + n_right * imp_right) / n
        threshold = (xs[i] + xs[i + 1]) / 2.0
        if best is None or decrease > best[0] + _EPS:
            best = (decrease, threshold)
    return best


def _random_split_on_feature(x_col, y, parent_imp, params, rng):
    lo, hi = x_col.min(), x_col.max()
    if hi - lo <= _EPS:
        return None
    threshold = rng.uniform(lo, hi)
    mask = x_col <= threshold
    n_left = int(mask.sum())
    n_right = len(y) - n_left
    if n_left < params.min_samples_leaf or n_right < params.min_samples_leaf:
        return None
    ones_left = int(np.sum(y[mask]))
    ones_right = int(np.sum(y)) - ones_left
    imp_left = impurity([n_left - ones_left, ones_left], params.criterion)
    imp_right = impurity([n_right - ones_right, ones_right], params.criterion)
    decrease = parent_imp - (n_left * imp_left + n_right * imp_right) / len(y)
    return (decrease, threshold)


def _grow(x, y, params, rng, depth, n_total, importances):
    node = _Node(prediction=_majority(y))
    n = len(y)
    if (
        n < params.min_samples_split
        or (params.max_depth is not None and depth >= params.max_depth)
        or len(np.unique(y)) < 2
    ):
        return node
    parent_imp = impurity(np.bincount(y, minlength=2), params.criterion)
    candidates = _candidate_features(x.shape[1], params, rng)
    best = None  # (decrease, feature, threshold)
    for f in candidates:
        if params.splitter == "best":
            found = _best_split_on_feature(x[:, f], y, parent_imp, params)
        else:
            found = _random_split_on_feature(x[:, f], y, parent_imp, params, rng)
        if found is None:
            continue
        decrease, threshold = found
        if best is None or decrease > best[0] + _EPS:
            best = (decrease, f, threshold)
    # zero-gain splits are accepted (mirrors standard CART behavior and
    # lets depth-2 trees separate XOR-like targets)
    if best is None:
        return node
    decrease, feature, threshold = best
    mask = x[:, feature] <= threshold
    importances[feature] += (n / n_total) * decrease
    node.feature = int(feature)
    node.threshold = float(threshold)
    node.left = _grow(x[mask], y[mask], params, rng, depth + 1, n_total, importances)
    node.right = _grow(x[~mask], y[~mask], params, rng, depth + 1, n_total, importances)
    return node


def _predict_tree(node, x):
    out = np.empty(len(x), dtype=int)
    for i, row in enumerate(x):
        cur = node
        while not cur.is_leaf:
            cur = cur.left if row[cur.feature] <= cur.threshold else cur.right
        out[i] = cur.prediction
    return out


@dataclass
class TrainedModel:
    kind: str  # DecisionTree | RandomForest | StratifiedRF
    trees: list  # _Node roots
    feature_manifest: list
    importances: dict  # name -> float, sums to 1 (or all zero)
    params: dict
    seed: int
    constant: bool = False  # degenerate single-class fit

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[1] != len(self.feature_manifest):
            raise MLError(
                f"expected {len(self.feature_manifest)} features, got {x.shape[1]}"
            )
        votes = np.zeros(len(x))
        for root in self.trees:
            votes += _predict_tree(root, x)
        return (votes > len(self.trees) / 2).astype(int)  # ties -> 0

    def to_json(self) -> str:
        payload = {
            "kind": self.kind,
            "feature_manifest": self.feature_manifest,
            "importances": self.importances,
            "params": self.params,
            "seed": self.seed,
            "constant": self.constant,
            "trees": [t.to_dict() for t in self.trees],
        }
        return json.dumps(payload, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        d = json.loads(text)
        return cls(
            kind=d["kind"],
            trees=[_Node.from_dict(t) for t in d["trees"]],
            feature_manifest=d["feature_manifest"],
            importances=d["importances"],
            params=d["params"],
            seed=d["seed"],
            constant=d["constant"],
        )


def _feature_names(x, feature_names):
    if feature_names is None:
        return [f"f{i}" for i in range(x.shape[1])]
    return list(feature_names)


def _normalized_importances(raw, names):
    total = raw.sum()
    if total <= 0:
        return {n: 0.0 for n in names}
    return {n: float(v / total) for n, v in zip(names, raw)}


def fit_tree(x, y, params: TreeParams, seed: int = 0, feature_names=None) -> TrainedModel:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if len(x) == 0:
        raise MLError("empty training set")
    if np.isnan(x).any():
        raise MLError("NaN in feature matrix; resolve missing values first")
    names = _feature_names(x, feature_names)
    rng = np.random.default_rng(seed)
    importances = np.zeros(x.shape[1])
    root = _grow(x, y, params, rng, 0, len(y), importances)
    constant = len(np.unique(y)) < 2
    return TrainedModel(
        kind="DecisionTree",
        trees=[root],
        feature_manifest=names,
        importances=_normalized_importances(importances, names),
        params=asdict(params),
        seed=seed,
        constant=constant,
    )


def stratified_bootstrap_indices(y, rng) -> np.ndarray:
    """Per-class resample preserving the parent class counts exactly."""
    idx_parts = []
    for cls in np.unique(y):
        members = np.nonzero(y == cls)[0]
        idx_parts.append(rng.choice(members, size=len(members), replace=True))
    return np.concatenate(idx_parts)


def fit_forest(x, y, params: ForestParams, feature_names=None) -> TrainedModel:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if len(x) == 0:
        raise MLError("empty training set")
    if np.isnan(x).any():
        raise MLError("NaN in feature matrix; resolve missing values first")
    names = _feature_names(x, feature_names)
    streams = np.random.SeedSequence(params.seed).spawn(params.n_estimators)
    roots = []
    importance_acc = np.zeros(x.shape[1])
    for stream in streams:
        rng = np.random.default_rng(stream)
        if params.bootstrap:
            if params.stratified_bootstrap:
                idx = stratified_bootstrap_indices(y, rng)
            else:
                idx = rng.integers(0, len(y), size=len(y))
            xb, yb = x[idx], y[idx]
        else:
            xb, yb = x, y
        tree_imp = np.zeros(x.shape[1])
        roots.append(_grow(xb, yb, params.tree, rng, 0, len(yb), tree_imp))
        total = tree_imp.sum()
        if total > 0:
            importance_acc += tree_imp / total
    kind = "StratifiedRF" if params.stratified_bootstrap else "RandomForest"
    return TrainedModel(
        kind=kind,
        trees=roots,
        feature_manifest=names,
        importances=_normalized_importances(importance_acc, names),
        params=asdict(params),
        seed=params.seed,
        constant=len(np.unique(y)) < 2,
    )


def f1(y_true, y_pred, positive_class: int = 1) -> float:
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if len(y_true) != len(y_pred):
        raise MLError(f"length mismatch: {len(y_true)} vs {len(y_pred)}")
    tp = int(np.sum((y_true == positive_class) & (y_pred == positive_class)))
    fp = int(np.sum((y_true != positive_class) & (y_pred == positive_class)))
    fn = int(np.sum((y_true == positive_class) & (y_pred != positive_class)))
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2 * tp / denom


def stratified_split(y, config: CVConfig):
    """(train_indices, test_indices) with per-class proportions kept."""
    y = np.asarray(y, dtype=int)
    rng = np.random.default_rng(config.seed)
    train, test = [], []
    for cls in np.unique(y):
        members = np.nonzero(y == cls)[0]
        if len(members) < 2:
            raise MLError(
                f"class {cls} has {len(members)} member(s); cannot stratify"
            )
        members = members[rng.permutation(len(members))]
        n_test = int(round(len(members) * config.test_fraction))
        n_test = min(max(n_test, 1), len(members) - 1)
        test.extend(members[:n_test])
        train.extend(members[n_test:])
    return np.sort(np.array(train)), np.sort(np.array(test))


def stratified_folds(y, folds: int, seed: int):
    """Deal each class round-robin into folds; returns index arrays."""
    y = np.asarray(y, dtype=int)
    counts = np.bincount(y)
    minority = counts[counts > 0].min()
    if folds > minority:
        raise MLError(
            f"{folds} folds infeasible: smallest class has {minority} members"
        )
    rng = np.random.default_rng(seed)
    assignments = [[] for _ in range(folds)]
    for cls in np.unique(y):
        members = np.nonzero(y == cls)[0]
        members = members[rng.permutation(len(members))]
        for i, m in enumerate(members):
            assignments[i % folds].append(m)
    return [np.sort(np.array(a)) for a in assignments]


def _fit_family(x, y, model_family, params, seed, feature_names=None):
    if model_family == "decision_tree":
        return fit_tree(x, y, params, seed=seed, feature_names=feature_names)
    if model_family in ("random_forest", "stratified_rf"):
        fp = params if isinstance(params, ForestParams) else ForestParams(**params)
        if fp.seed != seed:
            fp = ForestParams(
                n_estimators=fp.n_estimators,
                tree=fp.tree,
                bootstrap=fp.bootstrap,
                stratified_bootstrap=fp.stratified_bootstrap,
                seed=seed,
            )
        return fit_forest(x, y, fp, feature_names=feature_names)
    raise MLError(f"unknown model family {model_family!r}")


def cross_validate(x, y, model_family, params, config: CVConfig):
    """Mean and per-fold F1 under stratified k-fold CV."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    folds = stratified_folds(y, config.folds, config.seed)
    scores = []
    for i, test_idx in enumerate(folds):
        mask = np.ones(len(y), dtype=bool)
        mask[test_idx] = False
        model = _fit_family(x[mask], y[mask], model_family, params, seed=config.seed + i)
        scores.append(f1(y[test_idx], model.predict(x[test_idx])))
    return float(np.mean(scores)), scores


# Hyperparameter grids (defaults for the two tuned families).
DEFAULT_RF_GRID = {
    "n_estimators": [50, 100, 150, 200, 250, 300, 350, 400],
    "max_features": ["sqrt", "log2"],
    "max_depth": [2, 3, 4, 5, 6, 7, 8],
    "min_samples_split": [4, 5, 6, 7, 8],
    "min_samples_leaf": [2, 3, 4],
    "bootstrap": [True, False],
    "criterion": ["gini", "entropy"],
}

DEFAULT_DT_GRID = {
    "criterion": ["gini", "entropy", "log_loss"],
    "splitter": ["best", "random"],
    "max_depth": [1, 25, 50],
    "max_features": ["sqrt", "log2", "all"],
    "min_samples_leaf": [1, 5, 10],
}


def default_grid(model_family: str) -> dict:
    if model_family == "decision_tree":
        return {k: list(v) for k, v in DEFAULT_DT_GRID.items()}
    if model_family in ("random_forest", "stratified_rf"):
        return {k: list(v) for k, v in DEFAULT_RF_GRID.items()}
    raise MLError(f"unknown model family {model_family!r}")


def _params_from_grid_entry(model_family, entry, seed):
    tree_keys = (
        "criterion",
        "splitter",
        "max_depth",
        "max_features",
        "min_samples_leaf",
        "min_samples_split",
    )
    tree_kwargs = {k: entry[k] for k in tree_keys if k in entry}
    tree = TreeParams(**tree_kwargs)
    if model_family == "decision_tree":
        return tree
    bootstrap = entry.get("bootstrap", True)
    return ForestParams(
        n_estimators=entry.get("n_estimators", 100),
        tree=tree,
        bootstrap=bootstrap,
        stratified_bootstrap=(model_family == "stratified_rf") and bootstrap,
        seed=seed,
    )


def grid_entries(grid: dict):
    """Cartesian product in the grid's key order."""
    keys = list(grid)
    for combo in itertools.product(*(grid[k] for k in keys)):
        yield dict(zip(keys, combo))


def grid_search(x, y, model_family, grid, config: CVConfig):
    """Exhaustive search; returns (best_params, best_entry, table)."""
    entries = list(grid_entries(grid))
    if not entries:
        raise MLError("empty hyperparameter grid")
    best = None
    table = []
    for entry in entries:
        params = _params_from_grid_entry(model_family, entry, config.seed)
        mean, per_fold = cross_validate(x, y, model_family, params, config)
        table.append({**entry, "mean_f1": mean})
        if best is None or mean > best[0] + 1e-12:
            best = (mean, entry, params)
    mean, entry, params = best
    return params, entry, table


def rank_features(model: TrainedModel) -> list:
    """Feature names by importance descending, ties by name."""
    return [
        name
        for name, _ in sorted(
            model.importances.items(), key=lambda kv: (-kv[1], kv[0])
        )
    ]


def subset_sizes(width: int) -> list:
    """The evaluated subset sizes: top {15, 20, 30} that fit, plus all."""
    sizes = [k for k in (15, 20, 30) if k < width]
    sizes.append(width)
    return sizes


def iterative_subset_selection(x, y, model_family, tuned_params, config: CVConfig,
                               feature_names=None):
    """Importance-ranked subset loop; returns (names, mean_f1, table)."""
    x = np.asarray(x, dtype=float)
    names = _feature_names(x, feature_names)
    full_model = _fit_family(
        x, y, model_family, tuned_params, seed=config.seed, feature_names=names
    )
    ranked = rank_features(full_model)
    best = None
    table = []
    for k in subset_sizes(x.shape[1]):
        chosen = ranked[:k]
        idx = [names.index(n) for n in chosen]
        mean, _ = cross_validate(x[:, idx], y, model_family, tuned_params, config)
        table.append({"k": k, "mean_f1": mean})
        if best is None or mean > best[1] + 1e-12:
            best = (chosen, mean)
    return best[0], best[1], table
