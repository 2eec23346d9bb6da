"""Feature matrices and column standardization for the classifier suite.

Labels are +1 (farm) / -1 (baseline). Standardization parameters are always
derived from training rows and then applied unchanged to test rows.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..features import FEATURE_NAMES, FEATURE_NAMES_WITH_RATIO, NON_LEXICAL_FIELDS, FeatureVector
from ..model import Account, Dataset
from .. import features as _features

FEATURE_SETS = ("nl", "lex", "all")

FARM_CLASS = 1
BASELINE_CLASS = -1


@dataclass(frozen=True)
class Standardization:
    """Per-column z-score parameters fit on training data."""

    mean: tuple[float, ...]
    std: tuple[float, ...]

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardization":
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        return cls(tuple(float(v) for v in mean), tuple(float(v) for v in std))

    def transform(self, x: np.ndarray) -> np.ndarray:
        mean = np.asarray(self.mean)
        std = np.asarray(self.std)
        out = np.zeros_like(x, dtype=float)
        nonzero = std > 0
        out[:, nonzero] = (x[:, nonzero] - mean[nonzero]) / std[nonzero]
        # Zero-variance columns map to all-zeros.
        return out


@dataclass(frozen=True)
class FeatureMatrix:
    x: np.ndarray
    y: np.ndarray
    names: tuple[str, ...]
    ids: tuple[str, ...]

    def __post_init__(self):
        if self.x.ndim != 2 or len(self.x) != len(self.y) or len(self.x) != len(self.ids):
            raise ValueError("inconsistent matrix shapes")

    @property
    def n_rows(self) -> int:
        return len(self.y)

    def subset(self, idx: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(self.x[idx], self.y[idx], self.names,
                             tuple(self.ids[i] for i in np.atleast_1d(idx)))

    def replace_x(self, x: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(x, self.y, self.names, self.ids)


def standardize(m: FeatureMatrix, stats: Standardization | None = None
                ) -> tuple[FeatureMatrix, Standardization]:
    """Z-score the matrix. Without ``stats`` the matrix is treated as training
    data and the parameters are fit from it; with ``stats`` (test rows) the
    training parameters are applied as-is."""
    if stats is None:
        stats = Standardization.fit(m.x)
    return m.replace_x(stats.transform(m.x)), stats


def _column_selector(feature_set: str, include_english_ratio: bool) -> tuple[str, ...]:
    if feature_set == "nl":
        return NON_LEXICAL_FIELDS
    if feature_set == "lex":
        return FEATURE_NAMES[len(NON_LEXICAL_FIELDS):]
    if feature_set == "all":
        return FEATURE_NAMES_WITH_RATIO if include_english_ratio else FEATURE_NAMES
    raise ValueError(f"unknown feature set {feature_set!r}; expected one of {FEATURE_SETS}")


def from_accounts(
    accounts: Sequence[Account],
    feature_set: str = "all",
    include_english_ratio: bool = False,
) -> FeatureMatrix:
    """Assemble per-account vectors into a labeled matrix.

    The "lex" set drops accounts with no English posts (their lexical rows
    would be all-zero padding); "nl" and "all" keep every account.
    """
    wanted = _column_selector(feature_set, include_english_ratio)
    vectors = [(_features.assemble(a), a) for a in accounts]
    if feature_set == "lex":
        vectors = [(v, a) for v, a in vectors if v.has_english]
    if not vectors:
        raise ValueError("no accounts left after feature-set filtering")
    full_names = FEATURE_NAMES_WITH_RATIO
    cols = [full_names.index(name) for name in wanted]
    x = np.array([[v.values(include_english_ratio=True)[c] for c in cols] for v, _ in vectors])
    y = np.array([FARM_CLASS if a.is_farm else BASELINE_CLASS for _, a in vectors])
    ids = tuple(a.id for _, a in vectors)
    return FeatureMatrix(x, y, wanted, ids)


def from_dataset(dataset: Dataset, feature_set: str = "all",
                 include_english_ratio: bool = False) -> FeatureMatrix:
    return from_accounts(dataset.accounts, feature_set, include_english_ratio)
