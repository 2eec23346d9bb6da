"""Social-graph structure metrics, like-set overlap, demographic divergence,
and temporal burst profiles.

All operations are read-only over immutable inputs. Maximal cliques use
pivoted Bron-Kerbosch with an output cap so pathological graphs fail loudly
instead of running forever.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .model import AGE_BINS, Account, Dataset, PageLike

KL_SMOOTHING_EPS = 1e-6
DEFAULT_CLIQUE_CAP = 10**6


class GraphError(ValueError):
    """Invalid graph construction (self-loop, unknown node)."""


class CliqueLimitError(RuntimeError):
    """Maximal-clique enumeration exceeded the output cap."""


class BinMismatchError(ValueError):
    """KL divergence between distributions with different bins."""


# ---------------------------------------------------------------------------
# Social graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SocialGraph:
    """Simple undirected graph over account ids (no self-loops/multi-edges)."""

    nodes: tuple[str, ...]
    adjacency: Mapping[str, frozenset[str]]

    @classmethod
    def from_edges(cls, nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> "SocialGraph":
        node_tuple = tuple(sorted(set(nodes)))
        node_set = set(node_tuple)
        adj: dict[str, set[str]] = {n: set() for n in node_tuple}
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop on node {u!r}")
            if u not in node_set or v not in node_set:
                raise GraphError(f"edge ({u!r}, {v!r}) references unknown node")
            adj[u].add(v)
            adj[v].add(u)
        return cls(node_tuple, {n: frozenset(neigh) for n, neigh in adj.items()})

    @classmethod
    def from_accounts(cls, accounts: Sequence[Account]) -> "SocialGraph":
        """Friendship graph restricted to the given accounts."""
        ids = {a.id for a in accounts}
        edges = [
            (a.id, friend)
            for a in accounts
            for friend in a.friends
            if friend in ids and a.id < friend
        ]
        return cls.from_edges(ids, edges)

    @property
    def n_edges(self) -> int:
        return sum(len(neigh) for neigh in self.adjacency.values()) // 2

    def degree(self, node: str) -> int:
        return len(self.adjacency[node])

    def mean_degree(self) -> float:
        if not self.nodes:
            return 0.0
        return 2.0 * self.n_edges / len(self.nodes)


def two_hop_graph(graph: SocialGraph, mutual_friends: Mapping[str, Iterable[str]]) -> SocialGraph:
    """Close the graph over shared friends: edge (u, v) iff direct or >=1 mutual.

    ``mutual_friends`` maps each node to its full friend list, which may
    include ids outside the graph; only node pairs inside the graph gain
    edges. Direct edges are preserved.
    """
    edges: set[tuple[str, str]] = set()
    for u in graph.nodes:
        for v in graph.adjacency[u]:
            if u < v:
                edges.add((u, v))
    # Invert friend lists: every pair of graph nodes sharing a friend connects.
    friend_index: dict[str, list[str]] = {}
    for node in graph.nodes:
        for f in mutual_friends.get(node, ()):  # friends may be outside the graph
            friend_index.setdefault(f, []).append(node)
    for members in friend_index.values():
        if len(members) < 2:
            continue
        members = sorted(members)
        for i, u in enumerate(members):
            for v in members[i + 1:]:
                if u != v:
                    edges.add((u, v))
    return SocialGraph.from_edges(graph.nodes, edges)


@dataclass(frozen=True)
class StructureReport:
    nodes: tuple[str, ...]
    degree: Mapping[str, int]
    triangle_count: Mapping[str, int]
    clustering_coeff: Mapping[str, float]
    maximal_cliques: tuple[tuple[str, ...], ...]

    def mean_degree(self) -> float:
        return float(np.mean([self.degree[n] for n in self.nodes])) if self.nodes else 0.0

    def fraction_in_clique_larger_than(self, size: int) -> float:
        """Share of nodes that belong to some maximal clique of size > ``size``."""
        if not self.nodes:
            return 0.0
        covered: set[str] = set()
        for clique in self.maximal_cliques:
            if len(clique) > size:
                covered.update(clique)
        return len(covered) / len(self.nodes)


def _bron_kerbosch(
    adj: Mapping[str, frozenset[str]],
    out: list[tuple[str, ...]],
    cap: int,
) -> None:
    # Pivoted Bron-Kerbosch; pivot maximizes |P & N(u)| over P | X.
    def expand(clique: list[str], candidates: set[str], excluded: set[str]) -> None:
        if not candidates and not excluded:
            if len(out) >= cap:
                raise CliqueLimitError(f"more than {cap} maximal cliques")
            out.append(tuple(sorted(clique)))
            return
        pivot = max(candidates | excluded, key=lambda u: len(candidates & adj[u]))
        for v in sorted(candidates - adj[pivot]):
            neigh = adj[v]
            clique.append(v)
            expand(clique, candidates & neigh, excluded & neigh)
            clique.pop()
            candidates.remove(v)
            excluded.add(v)

    expand([], set(adj), set())


def structure_report(graph: SocialGraph, clique_cap: int = DEFAULT_CLIQUE_CAP) -> StructureReport:
    """Per-node degree/triangles/clustering plus all maximal cliques.

    Local clustering coefficient is triangles / (deg choose 2), zero for
    degree < 2. Raises CliqueLimitError past ``clique_cap`` cliques.
    """
    adj = graph.adjacency
    degree = {n: len(adj[n]) for n in graph.nodes}
    triangles: dict[str, int] = {}
    clustering: dict[str, float] = {}
    for n in graph.nodes:
        neigh = adj[n]
        t = sum(len(neigh & adj[m]) for m in neigh) // 2
        triangles[n] = t
        d = degree[n]
        clustering[n] = 2.0 * t / (d * (d - 1)) if d >= 2 else 0.0
    cliques: list[tuple[str, ...]] = []
    _bron_kerbosch(adj, cliques, clique_cap)
    cliques.sort()
    return StructureReport(
        nodes=graph.nodes,
        degree=degree,
        triangle_count=triangles,
        clustering_coeff=clustering,
        maximal_cliques=tuple(cliques),
    )


# ---------------------------------------------------------------------------
# Like-set overlap
# ---------------------------------------------------------------------------

def jaccard(a: set, b: set) -> float:
    """|A & B| / |A | B|, with two empty sets defined as 0."""
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def jaccard_matrix(named_sets: Sequence[tuple[str, set]]) -> tuple[tuple[str, ...], np.ndarray]:
    """Pairwise Jaccard similarity of named sets, as (names, symmetric matrix)."""
    names = tuple(name for name, _ in named_sets)
    sets = [s for _, s in named_sets]
    n = len(sets)
    mat = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            val = jaccard(sets[i], sets[j])
            mat[i, j] = mat[j, i] = val
    return names, mat


def campaign_page_sets(dataset: Dataset) -> list[tuple[str, set]]:
    """Per campaign (plus baseline): union of page ids liked by its accounts."""
    groups: dict[str, set] = {}
    for a in dataset.accounts:
        groups.setdefault(a.label, set()).update(a.liked_page_ids)
    return sorted(groups.items())


def campaign_liker_sets(dataset: Dataset) -> list[tuple[str, set]]:
    """Per campaign (plus baseline): the set of account ids."""
    groups: dict[str, set] = {}
    for a in dataset.accounts:
        groups.setdefault(a.label, set()).add(a.id)
    return sorted(groups.items())


def write_jaccard_csv(names: Sequence[str], matrix: np.ndarray, path: str | Path) -> None:
    """Matrix CSV with name header row/column; values x100, one decimal."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + list(names))
        for i, name in enumerate(names):
            writer.writerow([name] + [f"{100.0 * v:.1f}" for v in matrix[i]])


# ---------------------------------------------------------------------------
# Demographic divergence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CategoricalDist:
    """Ordered categorical distribution; probabilities sum to 1 within 1e-9."""

    bins: tuple[str, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.bins) != len(self.probs):
            raise ValueError("bins and probs must have equal length")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be non-negative")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, expected 1")

    @classmethod
    def from_counts(cls, bins: Sequence[str], counts: Sequence[float]) -> "CategoricalDist":
        total = float(sum(counts))
        if total <= 0:
            raise ValueError("counts must sum to a positive value")
        return cls(tuple(bins), tuple(c / total for c in counts))

    @classmethod
    def from_percentages(cls, bins: Sequence[str], pcts: Sequence[float]) -> "CategoricalDist":
        return cls.from_counts(bins, pcts)


def age_distribution(accounts: Sequence[Account]) -> CategoricalDist:
    counts = {b: 0 for b in AGE_BINS}
    for a in accounts:
        counts[a.demographics.age_bin] += 1
    return CategoricalDist.from_counts(AGE_BINS, [counts[b] for b in AGE_BINS])


def kl_divergence(p: CategoricalDist, q: CategoricalDist, base: float = 2.0) -> float:
    """Kullback-Leibler divergence after symmetric epsilon-smoothing.

    Both distributions get the same eps added per bin and are renormalized,
    so q zero-bins are safe and KL(p, p) is exactly 0. Base 2 (bits) or e.
    """
    if p.bins != q.bins:
        raise BinMismatchError(f"bin mismatch: {p.bins} vs {q.bins}")
    if base not in (2.0, 2, math.e):
        raise ValueError("base must be 2 or e")
    eps = KL_SMOOTHING_EPS
    k = len(p.bins)
    ps = [(x + eps) / (1.0 + k * eps) for x in p.probs]
    qs = [(x + eps) / (1.0 + k * eps) for x in q.probs]
    log = math.log2 if base in (2.0, 2) else math.log
    total = 0.0
    for pi, qi in zip(ps, qs):
        if pi > 0.0:
            total += pi * log(pi / qi)
    return max(total, 0.0)


# ---------------------------------------------------------------------------
# Temporal burst profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LikeTimeline:
    """Sorted like timestamps for one page (or one campaign)."""

    timestamps: tuple[float, ...]

    def __post_init__(self):
        if any(b < a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise ValueError("timestamps must be non-decreasing")

    @classmethod
    def for_page(cls, dataset: Dataset, page_id: str) -> "LikeTimeline":
        ts = sorted(
            like.timestamp
            for a in dataset.accounts
            for like in a.liked_pages
            if like.page == page_id
        )
        return cls(tuple(ts))


@dataclass(frozen=True)
class BurstProfile:
    cumulative: tuple[tuple[float, int], ...]
    max_window_count: int
    burstiness: float


def burst_profile(timeline: LikeTimeline, window: float) -> BurstProfile:
    """Sliding-window maximum like count and its share of all likes.

    The window is inclusive on both ends; the cumulative series samples the
    running count at successive window boundaries from the first like. An
    empty timeline profiles to zeros.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    ts = timeline.timestamps
    if not ts:
        return BurstProfile(cumulative=(), max_window_count=0, burstiness=0.0)
    n = len(ts)
    best = 1
    j = 0
    for i in range(n):
        while j < n and ts[j] <= ts[i] + window:
            j += 1
        best = max(best, j - i)
    span = ts[-1] - ts[0]
    n_steps = max(1, math.ceil(span / window)) if span > 0 else 1
    cumulative = []
    count = 0
    idx = 0
    for k in range(n_steps + 1):
        boundary = ts[0] + k * window
        while idx < n and ts[idx] <= boundary:
            idx += 1
        cumulative.append((boundary, idx))
    return BurstProfile(
        cumulative=tuple(cumulative),
        max_window_count=best,
        burstiness=best / n,
    )


# ---------------------------------------------------------------------------
# Page-like volume
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LikeCountSummary:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


def cohort_predicate(cohort: str) -> Callable[[Account], bool]:
    """Filter by 'baseline', 'farm' (any campaign), or a full label."""
    if cohort == "farm":
        return lambda a: a.is_farm
    return lambda a: a.label == cohort


def page_like_count_summary(dataset: Dataset, cohort: str) -> LikeCountSummary:
    """Order statistics of per-account liked-page counts for one cohort."""
    counts = [len(a.liked_pages) for a in dataset.accounts if cohort_predicate(cohort)(a)]
    if not counts:
        raise ValueError(f"cohort {cohort!r} matches no accounts")
    q = np.percentile(counts, [0, 25, 50, 75, 100])
    return LikeCountSummary(*(float(x) for x in q))
