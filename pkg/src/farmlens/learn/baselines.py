"""Comparison classifiers: kNN, Gaussian naive Bayes, CART, AdaBoost, forest.

All operate on +1/-1 labels, are deterministic for a fixed seed, and expose
fit/predict plus to_params/from_params for JSON persistence. Prediction ties
resolve to +1 (farm) everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

VARIANCE_FLOOR = 1e-9


class KNearestNeighbors:
    """Majority vote over the k nearest training points (Euclidean); k odd."""

    def __init__(self, k: int = 5):
        if k < 1 or k % 2 == 0:
            raise ValueError("k must be a positive odd number")
        self.k = k
        self.x: np.ndarray | None = None
        self.y: np.ndarray | None = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> "KNearestNeighbors":
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=int)
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = min(self.k, len(self.y))
        sq = (x * x).sum(1)[:, None] + (self.x * self.x).sum(1)[None, :] - 2.0 * (x @ self.x.T)
        nearest = np.argpartition(sq, k - 1, axis=1)[:, :k]
        votes = self.y[nearest].sum(axis=1)
        return np.where(votes >= 0, 1, -1)

    def to_params(self) -> dict:
        return {"k": self.k, "x": self.x.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_params(cls, params: dict) -> "KNearestNeighbors":
        model = cls(k=params["k"])
        model.x = np.array(params["x"], dtype=float)
        model.y = np.array(params["y"], dtype=int)
        return model


class GaussianNaiveBayes:
    """Per-class, per-feature Gaussians with a variance floor."""

    def __init__(self):
        self.classes = (1, -1)
        self.means: dict[int, np.ndarray] = {}
        self.variances: dict[int, np.ndarray] = {}
        self.log_priors: dict[int, float] = {}

    def fit(self, x: np.ndarray, y: np.ndarray) -> "GaussianNaiveBayes":
        x = np.asarray(x, dtype=float)
        for cls in self.classes:
            rows = x[y == cls]
            if len(rows) == 0:
                raise ValueError("training data must contain both classes")
            self.means[cls] = rows.mean(axis=0)
            self.variances[cls] = np.maximum(rows.var(axis=0), VARIANCE_FLOOR)
            self.log_priors[cls] = float(np.log(len(rows) / len(x)))
        return self

    def _log_likelihood(self, x: np.ndarray, cls: int) -> np.ndarray:
        mean, var = self.means[cls], self.variances[cls]
        return self.log_priors[cls] - 0.5 * (
            np.log(2.0 * np.pi * var) + (x - mean) ** 2 / var
        ).sum(axis=1)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        pos = self._log_likelihood(x, 1)
        neg = self._log_likelihood(x, -1)
        return np.where(pos >= neg, 1, -1)

    def to_params(self) -> dict:
        return {
            "means": {str(c): self.means[c].tolist() for c in self.classes},
            "variances": {str(c): self.variances[c].tolist() for c in self.classes},
            "log_priors": {str(c): self.log_priors[c] for c in self.classes},
        }

    @classmethod
    def from_params(cls, params: dict) -> "GaussianNaiveBayes":
        model = cls()
        for c in model.classes:
            model.means[c] = np.array(params["means"][str(c)], dtype=float)
            model.variances[c] = np.array(params["variances"][str(c)], dtype=float)
            model.log_priors[c] = params["log_priors"][str(c)]
        return model


def _majority(y: np.ndarray) -> int:
    return 1 if y.sum() >= 0 else -1


def _best_split(x: np.ndarray, y: np.ndarray, feature_ids: np.ndarray
                ) -> tuple[int, float] | None:
    """Best (feature, threshold) by Gini impurity decrease; None if no split
    separates anything. Ties go to the first candidate in feature order."""
    n = len(y)
    pos_total = int((y == 1).sum())
    best_gain = 1e-12
    best: tuple[int, float] | None = None
    parent = _gini(pos_total, n)
    for f in feature_ids:
        col = x[:, f]
        order = np.argsort(col, kind="stable")
        sorted_col = col[order]
        sorted_pos = (y[order] == 1).astype(np.int64)
        pos_prefix = np.cumsum(sorted_pos)
        # Valid cut after position i when the value changes.
        cuts = np.nonzero(sorted_col[1:] > sorted_col[:-1])[0]
        if len(cuts) == 0:
            continue
        n_left = cuts + 1
        n_right = n - n_left
        pos_left = pos_prefix[cuts]
        pos_right = pos_total - pos_left
        gini_left = _gini_vec(pos_left, n_left)
        gini_right = _gini_vec(pos_right, n_right)
        weighted = (n_left * gini_left + n_right * gini_right) / n
        gains = parent - weighted
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain = float(gains[k])
            threshold = (sorted_col[cuts[k]] + sorted_col[cuts[k] + 1]) / 2.0
            best = (int(f), float(threshold))
    return best


def _gini(pos: int, n: int) -> float:
    if n == 0:
        return 0.0
    p = pos / n
    return 2.0 * p * (1.0 - p)


def _gini_vec(pos: np.ndarray, n: np.ndarray) -> np.ndarray:
    p = pos / n
    return 2.0 * p * (1.0 - p)


class DecisionTree:
    """CART with Gini impurity, a depth cap, and optional per-node feature
    subsampling (used by the forest)."""

    def __init__(self, max_depth: int = 10, min_samples_split: int = 2,
                 n_features: int | None = None, rng: np.random.Generator | None = None):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.n_features = n_features
        self.rng = rng
        self.root: dict | None = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> "DecisionTree":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int)
        self.root = self._build(x, y, depth=0)
        return self

    def _candidate_features(self, d: int) -> np.ndarray:
        if self.n_features is None or self.n_features >= d:
            return np.arange(d)
        chosen = self.rng.choice(d, size=self.n_features, replace=False)
        return np.sort(chosen)

    def _build(self, x: np.ndarray, y: np.ndarray, depth: int) -> dict:
        if (depth >= self.max_depth or len(y) < self.min_samples_split
                or abs(int(y.sum())) == len(y)):
            return {"leaf": _majority(y)}
        split = _best_split(x, y, self._candidate_features(x.shape[1]))
        if split is None:
            return {"leaf": _majority(y)}
        f, thr = split
        left = x[:, f] <= thr
        return {
            "feature": f,
            "threshold": thr,
            "left": self._build(x[left], y[left], depth + 1),
            "right": self._build(x[~left], y[~left], depth + 1),
        }

    def _predict_one(self, row: np.ndarray) -> int:
        node = self.root
        while "leaf" not in node:
            node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
        return node["leaf"]

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([self._predict_one(row) for row in x], dtype=int)

    def to_params(self) -> dict:
        return {"max_depth": self.max_depth, "root": self.root}

    @classmethod
    def from_params(cls, params: dict) -> "DecisionTree":
        model = cls(max_depth=params["max_depth"])
        model.root = params["root"]
        return model


class AdaBoostStumps:
    """AdaBoost over depth-1 decision stumps."""

    def __init__(self, rounds: int = 50):
        self.rounds = rounds
        self.stumps: list[dict] = []

    def fit(self, x: np.ndarray, y: np.ndarray) -> "AdaBoostStumps":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        n, d = x.shape
        w = np.full(n, 1.0 / n)
        self.stumps = []
        orders = [np.argsort(x[:, f], kind="stable") for f in range(d)]
        for _ in range(self.rounds):
            best = None  # (error, feature, threshold, polarity)
            for f in range(d):
                order = orders[f]
                col = x[order, f]
                wy = (w * y)[order]
                w_pos = np.where(wy > 0, wy, 0.0).cumsum()
                w_neg = np.where(wy < 0, -wy, 0.0).cumsum()
                total_pos = w_pos[-1]
                total_neg = w_neg[-1]
                cuts = np.nonzero(col[1:] > col[:-1])[0]
                if len(cuts) == 0:
                    continue
                # polarity +1: left -> -1, right -> +1 (x > thr predicts +1)
                err_plus = w_pos[cuts] + (total_neg - w_neg[cuts])
                err_minus = w_neg[cuts] + (total_pos - w_pos[cuts])
                for errs, polarity in ((err_plus, 1), (err_minus, -1)):
                    k = int(np.argmin(errs))
                    if best is None or errs[k] < best[0] - 1e-15:
                        thr = (col[cuts[k]] + col[cuts[k] + 1]) / 2.0
                        best = (float(errs[k]), f, float(thr), polarity)
            if best is None:
                break
            error, f, thr, polarity = best
            error = min(max(error, 1e-12), 1.0 - 1e-12)
            alpha = 0.5 * np.log((1.0 - error) / error)
            pred = np.where(x[:, f] > thr, polarity, -polarity)
            self.stumps.append({"feature": f, "threshold": thr,
                                "polarity": polarity, "alpha": float(alpha)})
            w *= np.exp(-alpha * y * pred)
            w /= w.sum()
            if error < 1e-10:
                break
        return self

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        score = np.zeros(len(x))
        for s in self.stumps:
            pred = np.where(x[:, s["feature"]] > s["threshold"], s["polarity"], -s["polarity"])
            score += s["alpha"] * pred
        return score

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.where(self.decision_function(x) >= 0, 1, -1)

    def to_params(self) -> dict:
        return {"rounds": self.rounds, "stumps": self.stumps}

    @classmethod
    def from_params(cls, params: dict) -> "AdaBoostStumps":
        model = cls(rounds=params["rounds"])
        model.stumps = params["stumps"]
        return model


class RandomForest:
    """Bagged CART trees with sqrt(d) feature sampling per node."""

    def __init__(self, n_trees: int = 51, max_depth: int = 16, seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.seed = seed
        self.trees: list[DecisionTree] = []

    def fit(self, x: np.ndarray, y: np.ndarray) -> "RandomForest":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=int)
        n, d = x.shape
        n_features = max(1, int(round(np.sqrt(d))))
        root_seq = np.random.SeedSequence(self.seed)
        self.trees = []
        for child in root_seq.spawn(self.n_trees):
            rng = np.random.default_rng(child)
            idx = rng.integers(0, n, size=n)
            tree = DecisionTree(max_depth=self.max_depth, n_features=n_features, rng=rng)
            tree.fit(x[idx], y[idx])
            self.trees.append(tree)
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        votes = np.zeros(len(x))
        for tree in self.trees:
            votes += tree.predict(x)
        return np.where(votes >= 0, 1, -1)

    def to_params(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "seed": self.seed,
            "trees": [t.to_params() for t in self.trees],
        }

    @classmethod
    def from_params(cls, params: dict) -> "RandomForest":
        model = cls(n_trees=params["n_trees"], max_depth=params["max_depth"],
                    seed=params["seed"])
        model.trees = [DecisionTree.from_params(p) for p in params["trees"]]
        return model
