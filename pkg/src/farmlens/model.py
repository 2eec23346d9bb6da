"""Domain types, JSONL dataset I/O, validation, and train/test splitting.

A dataset is a header line plus one account per line:

    {"schema": "farmlens/1", "provenance": {...}, "pages": [{...}, ...]}
    {"id": ..., "label": ..., "demographics": {...}, "posts": [...],
     "liked_pages": [...], "friends": [...], "active": true}

Datasets are immutable after load and safe to share read-only across
workers. ``label`` is either "baseline" or "farm:<campaign-id>".
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

SCHEMA_VERSION = "farmlens/1"
BASELINE_LABEL = "baseline"
FARM_PREFIX = "farm:"

GENDERS = ("F", "M", "unknown")
AGE_BINS = ("13-17", "18-24", "25-34", "35-44", "45-54", "55+")


class SchemaError(ValueError):
    """A record violates the dataset schema; the message names the record and field."""


class SplitError(ValueError):
    """Train/test split preconditions are not met."""


@dataclass(frozen=True)
class Demographics:
    gender: str = "unknown"
    age_bin: str = "18-24"
    country: str = "unknown"


@dataclass(frozen=True)
class TimelinePost:
    text: str
    timestamp: float
    n_likes: int
    n_comments: int
    is_shared: bool


@dataclass(frozen=True)
class PageLike:
    page: str
    timestamp: float


@dataclass(frozen=True)
class Page:
    id: str
    total_likes: int
    category: str = ""
    is_popular: bool = False


@dataclass(frozen=True)
class Account:
    id: str
    label: str
    posts: tuple[TimelinePost, ...] = ()
    liked_pages: tuple[PageLike, ...] = ()
    friends: frozenset[str] = frozenset()
    demographics: Demographics = Demographics()
    active: bool = True

    @property
    def is_farm(self) -> bool:
        return self.label.startswith(FARM_PREFIX)

    @property
    def campaign(self) -> str | None:
        """Campaign id for farm accounts, None for baseline."""
        return self.label[len(FARM_PREFIX):] if self.is_farm else None

    @property
    def liked_page_ids(self) -> frozenset[str]:
        return frozenset(like.page for like in self.liked_pages)


@dataclass(frozen=True)
class Dataset:
    accounts: tuple[Account, ...]
    pages: Mapping[str, Page]
    provenance: Mapping[str, object] = field(default_factory=dict)

    def account(self, account_id: str) -> Account:
        for a in self.accounts:
            if a.id == account_id:
                return a
        raise KeyError(account_id)

    def labels(self) -> set[str]:
        return {a.label for a in self.accounts}

    def filter(self, predicate) -> tuple[Account, ...]:
        return tuple(a for a in self.accounts if predicate(a))


def _check_label(label: str, record: str) -> None:
    if label != BASELINE_LABEL and not (label.startswith(FARM_PREFIX) and len(label) > len(FARM_PREFIX)):
        raise SchemaError(f"account {record!r}: field 'label' must be 'baseline' or 'farm:<campaign>', got {label!r}")


def validate_dataset(dataset: Dataset) -> None:
    """Enforce all dataset invariants; raises SchemaError naming the offender."""
    seen_ids: set[str] = set()
    for a in dataset.accounts:
        if a.id in seen_ids:
            raise SchemaError(f"duplicate account id {a.id!r}")
        seen_ids.add(a.id)
        _check_label(a.label, a.id)
        if a.demographics.gender not in GENDERS:
            raise SchemaError(f"account {a.id!r}: field 'gender' not one of {GENDERS}")
        if a.demographics.age_bin not in AGE_BINS:
            raise SchemaError(f"account {a.id!r}: field 'age_bin' not one of {AGE_BINS}")
        last_ts = -math.inf
        for i, p in enumerate(a.posts):
            if p.n_likes < 0:
                raise SchemaError(f"account {a.id!r} post {i}: field 'likes' is negative")
            if p.n_comments < 0:
                raise SchemaError(f"account {a.id!r} post {i}: field 'comments' is negative")
            if p.timestamp < last_ts:
                raise SchemaError(f"account {a.id!r} post {i}: field 'ts' breaks ascending order")
            last_ts = p.timestamp
        if a.id in a.friends:
            raise SchemaError(f"account {a.id!r}: field 'friends' contains a self-edge")
        page_ids = [like.page for like in a.liked_pages]
        if len(set(page_ids)) != len(page_ids):
            raise SchemaError(f"account {a.id!r}: field 'liked_pages' repeats a page id")
        for pid in page_ids:
            if pid not in dataset.pages:
                raise SchemaError(f"account {a.id!r}: dangling page reference {pid!r}")
    # Page-side sanity: a page cannot report fewer total likes than the
    # dataset accounts that like it.
    liker_counts: dict[str, int] = {}
    for a in dataset.accounts:
        for like in a.liked_pages:
            liker_counts[like.page] = liker_counts.get(like.page, 0) + 1
    for pid, page in dataset.pages.items():
        if page.total_likes < liker_counts.get(pid, 0):
            raise SchemaError(f"page {pid!r}: field 'total_likes' below dataset liker count")


def _account_to_json(a: Account) -> dict:
    return {
        "id": a.id,
        "label": a.label,
        "demographics": {
            "gender": a.demographics.gender,
            "age_bin": a.demographics.age_bin,
            "country": a.demographics.country,
        },
        "posts": [
            {"text": p.text, "ts": p.timestamp, "likes": p.n_likes,
             "comments": p.n_comments, "shared": p.is_shared}
            for p in a.posts
        ],
        "liked_pages": [{"page": l.page, "ts": l.timestamp} for l in a.liked_pages],
        "friends": sorted(a.friends),
        "active": a.active,
    }


def _require(record: Mapping, key: str, where: str):
    if key not in record:
        raise SchemaError(f"{where}: missing field {key!r}")
    return record[key]


def _account_from_json(obj: Mapping, line_no: int) -> Account:
    where = f"line {line_no}"
    acc_id = _require(obj, "id", where)
    where = f"account {acc_id!r}"
    demo = _require(obj, "demographics", where)
    posts = tuple(
        TimelinePost(
            text=_require(p, "text", f"{where} post {i}"),
            timestamp=_require(p, "ts", f"{where} post {i}"),
            n_likes=_require(p, "likes", f"{where} post {i}"),
            n_comments=_require(p, "comments", f"{where} post {i}"),
            is_shared=bool(_require(p, "shared", f"{where} post {i}")),
        )
        for i, p in enumerate(_require(obj, "posts", where))
    )
    liked = tuple(
        PageLike(page=_require(l, "page", f"{where} liked_pages {i}"),
                 timestamp=_require(l, "ts", f"{where} liked_pages {i}"))
        for i, l in enumerate(_require(obj, "liked_pages", where))
    )
    return Account(
        id=acc_id,
        label=_require(obj, "label", where),
        posts=posts,
        liked_pages=liked,
        friends=frozenset(_require(obj, "friends", where)),
        demographics=Demographics(
            gender=_require(demo, "gender", where),
            age_bin=_require(demo, "age_bin", where),
            country=_require(demo, "country", where),
        ),
        active=bool(obj.get("active", True)),
    )


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write the canonical JSONL form (header line, then one account per line)."""
    path = Path(path)
    header = {
        "schema": SCHEMA_VERSION,
        "provenance": dict(dataset.provenance),
        "pages": [
            {"id": p.id, "total_likes": p.total_likes, "category": p.category,
             "popular": p.is_popular}
            for p in sorted(dataset.pages.values(), key=lambda p: p.id)
        ],
    }
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for a in dataset.accounts:
            fh.write(json.dumps(_account_to_json(a), ensure_ascii=False) + "\n")


def load_dataset(path: str | Path, format: str = "jsonl") -> Dataset:
    """Load and validate a dataset file; raises SchemaError on any violation."""
    if format != "jsonl":
        raise SchemaError(f"unsupported format {format!r}")
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file, expected a schema header line")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: header line is not valid JSON: {exc}") from exc
    if header.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"{path}: missing or unsupported schema version field "
                          f"(expected {SCHEMA_VERSION!r}, got {header.get('schema')!r})")
    pages = {}
    for i, p in enumerate(header.get("pages", [])):
        pid = _require(p, "id", f"pages[{i}]")
        total = _require(p, "total_likes", f"page {pid!r}")
        if total < 0:
            raise SchemaError(f"page {pid!r}: field 'total_likes' is negative")
        pages[pid] = Page(id=pid, total_likes=total, category=p.get("category", ""),
                          is_popular=bool(p.get("popular", False)))
    accounts = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path} line {line_no}: invalid JSON: {exc}") from exc
        accounts.append(_account_from_json(obj, line_no))
    dataset = Dataset(accounts=tuple(accounts), pages=pages,
                      provenance=header.get("provenance", {}))
    validate_dataset(dataset)
    return dataset


def _train_count(train_fraction: float, n: int) -> int:
    # Half-up rounding, fixed so splits are reproducible across platforms.
    return int(math.floor(train_fraction * n + 0.5))


def split_train_test(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic stratified split; strata are baseline and each farm campaign.

    Per stratum, round(train_fraction * n) accounts go to train and the rest
    to test. Both output datasets share the full page table so page
    references stay valid.
    """
    if not 0.0 < train_fraction < 1.0:
        raise SplitError(f"train_fraction must be in (0, 1), got {train_fraction}")
    labels = dataset.labels()
    if BASELINE_LABEL not in labels or not any(l.startswith(FARM_PREFIX) for l in labels):
        raise SplitError("split requires both baseline and farm accounts")
    strata: dict[str, list[Account]] = {}
    for a in dataset.accounts:
        strata.setdefault(a.label, []).append(a)
    rng = random.Random(seed)
    train: list[Account] = []
    test: list[Account] = []
    for label in sorted(strata):
        members = strata[label]
        if len(members) < 2:
            raise SplitError(f"label {label!r} has fewer than 2 accounts")
        order = list(range(len(members)))
        rng.shuffle(order)
        k = _train_count(train_fraction, len(members))
        train.extend(members[i] for i in order[:k])
        test.extend(members[i] for i in order[k:])
    prov = dict(dataset.provenance)
    return (
        Dataset(tuple(train), dataset.pages, {**prov, "split": "train", "split_seed": seed}),
        Dataset(tuple(test), dataset.pages, {**prov, "split": "test", "split_seed": seed}),
    )
