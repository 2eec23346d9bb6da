"""Hyperparameter grid search with stratified cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .._util import parallel_map
from .matrix import FeatureMatrix, standardize
from .svm import ConvergenceError, NuSVM

GAMMA_MIN, GAMMA_MAX = 2.0**-10, 2.0**0
NU_MIN, NU_MAX = 2.0**-10, 2.0**0


@dataclass(frozen=True)
class HyperParams:
    """Knobs for the whole classifier suite; gamma/nu are the SVM pair."""

    gamma: float = 2.0**-3
    nu: float = 2.0**-2
    k: int = 5            # kNN neighbors
    depth: int = 10       # tree depth cap
    rounds: int = 50      # AdaBoost rounds
    trees: int = 51       # forest size
    seed: int = 0

    def __post_init__(self):
        if not GAMMA_MIN <= self.gamma <= GAMMA_MAX:
            raise ValueError(f"gamma {self.gamma} outside [2^-10, 2^0]")
        if not NU_MIN <= self.nu <= NU_MAX:
            raise ValueError(f"nu {self.nu} outside [2^-10, 2^0]")
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu {self.nu} must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class GridSpec:
    """Powers-of-two search ranges for gamma and nu."""

    gammas: tuple[float, ...]
    nus: tuple[float, ...]

    @classmethod
    def powers_of_two(cls, lo_exp: int = -10, hi_exp: int = 0, step: int = 1) -> "GridSpec":
        exps = list(range(lo_exp, hi_exp + 1, step))
        gammas = tuple(2.0**e for e in exps)
        # nu additionally intersected with (0, 1): 2^0 is excluded.
        nus = tuple(2.0**e for e in exps if 0.0 < 2.0**e < 1.0)
        return cls(gammas, nus)

    def __post_init__(self):
        if not self.gammas or not self.nus:
            raise ValueError("grid must contain at least one gamma and one nu")


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Index arrays of test folds; each class is spread evenly over folds."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    rng = np.random.default_rng(seed)
    assignments = np.empty(len(y), dtype=int)
    for cls in np.unique(y):
        idx = np.where(y == cls)[0]
        idx = idx[rng.permutation(len(idx))]
        assignments[idx] = np.arange(len(idx)) % folds
    return [np.where(assignments == f)[0] for f in range(folds)]


def f1_score(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    tp = int(((y_true == 1) & (y_pred == 1)).sum())
    fp = int(((y_true == -1) & (y_pred == 1)).sum())
    fn = int(((y_true == 1) & (y_pred == -1)).sum())
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def _cv_f1(m: FeatureMatrix, gamma: float, nu: float, fold_idx: list[np.ndarray],
           svm_tol: float) -> float:
    scores = []
    all_idx = np.arange(m.n_rows)
    for test_idx in fold_idx:
        train_mask = np.ones(m.n_rows, dtype=bool)
        train_mask[test_idx] = False
        train = m.subset(np.where(train_mask)[0])
        test = m.subset(test_idx)
        if len(np.unique(train.y)) < 2:
            return 0.0
        train_std, stats = standardize(train)
        test_std, _ = standardize(test, stats)
        try:
            model = NuSVM(gamma=gamma, nu=nu, tol=svm_tol).fit(train_std.x, train_std.y)
        except ConvergenceError:
            return 0.0
        scores.append(f1_score(test_std.y, model.predict(test_std.x)))
    return float(np.mean(scores))


def grid_search(m: FeatureMatrix, grid: GridSpec, folds: int = 3, seed: int = 0,
                svm_tol: float = 1e-7) -> HyperParams:
    """Pick the (gamma, nu) pair maximizing mean cross-validated F1.

    Evaluation order is gamma ascending then nu ascending with strictly-
    better updates, so ties resolve to the smaller gamma and then smaller nu.
    Runs on training data only; pass the training matrix.
    """
    fold_idx = stratified_folds(m.y, folds, seed)
    gammas = tuple(sorted(grid.gammas))
    nus = tuple(sorted(grid.nus))
    points = [(g, n) for g in gammas for n in nus]
    scores = parallel_map(lambda p: _cv_f1(m, p[0], p[1], fold_idx, svm_tol), points)
    best_score = -1.0
    best: tuple[float, float] | None = None
    for (g, n), score in zip(points, scores):
        if score > best_score:
            best_score = score
            best = (g, n)
    return HyperParams(gamma=best[0], nu=best[1], seed=seed)
