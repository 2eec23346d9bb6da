"""User-page bipartite co-clustering and its ROC evaluation.

The clustering is bipartite spectral co-clustering: normalize the incidence
matrix by row/column degrees, take the second singular pair (power iteration
with deflation), embed users and pages by the singular vectors, and run a
deterministic 2-means on the joint embedding. With k=2 the cluster holding
the larger share of known farm accounts is scored as the positive class.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .model import Account, Dataset


class EmptyBipartiteError(ValueError):
    """Degree filtering removed every user or every page."""


class DegenerateSpectrumError(RuntimeError):
    """The normalized incidence has no usable second singular pair."""


@dataclass(frozen=True)
class CoclusterConfig:
    k: int = 2
    min_likes: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("cluster count k must be >= 2")


@dataclass(frozen=True)
class EvaluationReport:
    """Confusion counts with derived ratios (positives = farm accounts)."""

    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    accuracy: float
    f1: float
    tie_break_warning: bool = False

    @classmethod
    def from_counts(cls, tp: int, fp: int, tn: int, fn: int,
                    tie_break_warning: bool = False) -> "EvaluationReport":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        total = tp + fp + tn + fn
        accuracy = (tp + tn) / total if total else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(tp, fp, tn, fn, precision, recall, accuracy, f1, tie_break_warning)

    def false_positive_rate(self) -> float:
        return self.fp / (self.fp + self.tn) if self.fp + self.tn else 0.0

    def as_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "precision": self.precision, "recall": self.recall,
            "accuracy": self.accuracy, "f1": self.f1,
            "tie_break_warning": self.tie_break_warning,
        }


@dataclass(frozen=True)
class BipartiteLikeGraph:
    """Boolean user x page incidence with dense, stable (sorted) indices."""

    users: tuple[str, ...]
    pages: tuple[str, ...]
    incidence: np.ndarray
    dropped_users: tuple[str, ...] = ()
    dropped_pages: tuple[str, ...] = ()


def build_bipartite(dataset: Dataset, cfg: CoclusterConfig) -> BipartiteLikeGraph:
    """Build the like graph, iteratively dropping low-degree users and pages.

    Users/pages below ``cfg.min_likes`` likes are removed until a fixpoint is
    reached (removals can cascade). Rows and columns are never empty in the
    result, so an effective threshold of at least 1 always applies.
    """
    if not dataset.accounts:
        raise EmptyBipartiteError("dataset has no accounts")
    threshold = max(cfg.min_likes, 1)
    user_pages: dict[str, set[str]] = {
        a.id: set(a.liked_page_ids) for a in dataset.accounts
    }
    page_users: dict[str, set[str]] = {}
    for uid, pids in user_pages.items():
        for pid in pids:
            page_users.setdefault(pid, set()).add(uid)

    dropped_users: set[str] = set()
    dropped_pages: set[str] = set()
    changed = True
    while changed:
        changed = False
        for uid in [u for u, pids in user_pages.items() if len(pids) < threshold]:
            for pid in user_pages.pop(uid):
                page_users[pid].discard(uid)
            dropped_users.add(uid)
            changed = True
        for pid in [p for p, uids in page_users.items() if len(uids) < threshold]:
            for uid in page_users.pop(pid):
                user_pages[uid].discard(pid)
            dropped_pages.add(pid)
            changed = True
    if not user_pages or not page_users:
        raise EmptyBipartiteError(
            f"degree filtering at min_likes={cfg.min_likes} emptied the graph")

    users = tuple(sorted(user_pages))
    pages = tuple(sorted(page_users))
    page_index = {p: i for i, p in enumerate(pages)}
    incidence = np.zeros((len(users), len(pages)), dtype=bool)
    for ui, uid in enumerate(users):
        for pid in user_pages[uid]:
            incidence[ui, page_index[pid]] = True
    return BipartiteLikeGraph(users, pages, incidence,
                              tuple(sorted(dropped_users)), tuple(sorted(dropped_pages)))


def _top_right_singular_vectors(
    a_norm: np.ndarray, count: int, rng: np.random.Generator,
    tol: float = 1e-8, max_iter: int = 5000,
) -> tuple[np.ndarray, np.ndarray]:
    """Leading right singular vectors of a_norm by power iteration on the
    Gram operator v -> A^T (A v), with deflation against found vectors."""
    n = a_norm.shape[1]
    vectors = np.zeros((n, count))
    sigmas = np.zeros(count)
    for idx in range(count):
        v = rng.standard_normal(n)
        for prev in range(idx):
            v -= (vectors[:, prev] @ v) * vectors[:, prev]
        v /= max(np.linalg.norm(v), 1e-300)
        for _ in range(max_iter):
            w = a_norm.T @ (a_norm @ v)
            for prev in range(idx):
                w -= (vectors[:, prev] @ w) * vectors[:, prev]
            norm = np.linalg.norm(w)
            if norm < 1e-14:
                v = w * 0.0
                break
            w /= norm
            if 1.0 - abs(w @ v) < tol:
                v = w
                break
            v = w
        lam = float(v @ (a_norm.T @ (a_norm @ v)))
        vectors[:, idx] = v
        sigmas[idx] = math.sqrt(max(lam, 0.0))
    return sigmas, vectors


@dataclass(frozen=True)
class CoclusterResult:
    user_clusters: Mapping[str, int]
    page_clusters: Mapping[str, int]
    singular_values: tuple[float, ...]


def _deterministic_kmeans(points: np.ndarray, k: int, max_iter: int = 300) -> np.ndarray:
    """Lloyd's algorithm with quantile initialization over canonically sorted
    points; invariant to input row order up to nothing (labels are canonical
    by ascending center)."""
    n = len(points)
    order = np.lexsort(points.T[::-1])
    sorted_pts = points[order]
    init_idx = [min(n - 1, int(round((i + 0.5) / k * (n - 1)))) for i in range(k)]
    centers = sorted_pts[init_idx].astype(float)
    assign = np.full(n, -1)
    for _ in range(max_iter):
        dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(dists, axis=1)
        for c in range(k):
            if not np.any(new_assign == c):
                # Revive an empty cluster at the point farthest from its center.
                far = int(np.argmax(dists[np.arange(n), new_assign]))
                new_assign[far] = c
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            centers[c] = points[assign == c].mean(axis=0)
    # Canonical labels: clusters ordered by center, lexicographically.
    center_order = np.lexsort(centers.T[::-1])
    relabel = np.empty(k, dtype=int)
    relabel[center_order] = np.arange(k)
    return relabel[assign]


def spectral_cocluster(graph: BipartiteLikeGraph, cfg: CoclusterConfig) -> CoclusterResult:
    """Partition users and pages into cfg.k clusters.

    Rows/columns of the degree-normalized incidence are embedded by singular
    vectors 2..k and clustered jointly with deterministic k-means. Raises
    DegenerateSpectrumError when the second singular value vanishes (e.g.
    all users like the exact same pages).
    """
    a = graph.incidence.astype(float)
    d_r = a.sum(axis=1)
    d_c = a.sum(axis=0)
    a_norm = a / np.sqrt(d_r)[:, None] / np.sqrt(d_c)[None, :]
    rng = np.random.default_rng(cfg.seed)
    n_vec = cfg.k
    sigmas, v = _top_right_singular_vectors(a_norm, n_vec, rng)
    if sigmas[1] < 1e-8 * max(sigmas[0], 1e-300):
        raise DegenerateSpectrumError(
            f"second singular value {sigmas[1]:.3e} is numerically zero; "
            "the like graph has no second cluster direction")
    # Left vectors for the retained pairs; skip the trivial leading pair.
    u = a_norm @ v[:, 1:n_vec] / sigmas[1:n_vec]
    z_users = u / np.sqrt(d_r)[:, None]
    z_pages = v[:, 1:n_vec] / np.sqrt(d_c)[:, None]
    stacked = np.vstack([z_users, z_pages])
    labels = _deterministic_kmeans(stacked, cfg.k)
    m = len(graph.users)
    return CoclusterResult(
        user_clusters={uid: int(labels[i]) for i, uid in enumerate(graph.users)},
        page_clusters={pid: int(labels[m + j]) for j, pid in enumerate(graph.pages)},
        singular_values=tuple(float(s) for s in sigmas),
    )


def label_clusters(
    user_clusters: Mapping[str, int],
    ground_truth: Mapping[str, bool],
) -> tuple[EvaluationReport, int]:
    """Score a 2-way user partition against farm/baseline ground truth.

    The cluster with the higher fraction of farm accounts is the positive
    one; an exact tie deterministically picks the lower cluster id and sets
    the report's warning flag. Returns (report, positive_cluster_id).
    """
    missing = [u for u in user_clusters if u not in ground_truth]
    if missing:
        raise ValueError(f"no ground-truth label for user {missing[0]!r}")
    clusters = sorted(set(user_clusters.values()))
    farm_frac = {}
    for c in clusters:
        members = [u for u, uc in user_clusters.items() if uc == c]
        farm_frac[c] = sum(1 for u in members if ground_truth[u]) / len(members)
    best = max(farm_frac.values())
    candidates = [c for c in clusters if farm_frac[c] == best]
    tie = len(candidates) > 1
    positive = min(candidates)
    tp = fp = tn = fn = 0
    for uid, c in user_clusters.items():
        predicted_farm = c == positive
        if predicted_farm and ground_truth[uid]:
            tp += 1
        elif predicted_farm:
            fp += 1
        elif ground_truth[uid]:
            fn += 1
        else:
            tn += 1
    return EvaluationReport.from_counts(tp, fp, tn, fn, tie_break_warning=tie), positive


def ground_truth_from_dataset(dataset: Dataset) -> dict[str, bool]:
    return {a.id: a.is_farm for a in dataset.accounts}


def write_scatter_csv(
    graph: BipartiteLikeGraph,
    user_clusters: Mapping[str, int],
    positive_cluster: int,
    ground_truth: Mapping[str, bool],
    path: str | Path,
) -> None:
    """One row per like edge: user index, page index, and the user's outcome."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_index", "page_index", "outcome"])
        rows, cols = np.nonzero(graph.incidence)
        for ui, pj in zip(rows.tolist(), cols.tolist()):
            uid = graph.users[ui]
            predicted = user_clusters[uid] == positive_cluster
            actual = ground_truth[uid]
            outcome = ("TP" if actual else "FP") if predicted else ("FN" if actual else "TN")
            writer.writerow([ui, pj, outcome])


def write_report_json(report: EvaluationReport, path: str | Path, **extra) -> None:
    payload = {**report.as_dict(), **extra}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
