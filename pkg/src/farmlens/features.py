"""Per-account feature extraction: 4 non-lexical + 12 lexical + English ratio.

The canonical vector order is part of the external contract (CSV export and
model persistence depend on it):

    positions 1-4   non-lexical (words/comments/likes per post, share ratio)
    positions 5-16  lexical TextStats fields, computed over English posts only
    position 17     english_ratio (optional; default classifier config uses
                    only the first 16)

Accounts with no English posts get exactly zero for all lexical fields.
Extraction is pure: the same account always yields the same vector.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .model import Account
from .textmetrics import LEXICAL_FIELDS, TextStats, is_english, lexical_profile, tokenize_words

NON_LEXICAL_FIELDS = (
    "avg_words_per_post",
    "avg_comments_per_post",
    "avg_likes_per_post",
    "share_ratio",
)
FEATURE_NAMES = NON_LEXICAL_FIELDS + LEXICAL_FIELDS          # the 16 classifier features
FEATURE_NAMES_WITH_RATIO = FEATURE_NAMES + ("english_ratio",)


@dataclass(frozen=True)
class NonLexical:
    avg_words_per_post: float = 0.0
    avg_comments_per_post: float = 0.0
    avg_likes_per_post: float = 0.0
    share_ratio: float = 0.0

    def values(self) -> tuple[float, ...]:
        return (self.avg_words_per_post, self.avg_comments_per_post,
                self.avg_likes_per_post, self.share_ratio)


@dataclass(frozen=True)
class FeatureVector:
    account_id: str
    non_lexical: NonLexical
    lexical: TextStats
    english_ratio: float
    has_english: bool

    def values(self, include_english_ratio: bool = True) -> tuple[float, ...]:
        vals = self.non_lexical.values() + self.lexical.values()
        if include_english_ratio:
            vals = vals + (self.english_ratio,)
        return vals


def extract_non_lexical(account: Account) -> NonLexical:
    """Averages over all timeline posts; an account with no posts is all zeros."""
    n = len(account.posts)
    if n == 0:
        return NonLexical()
    words = sum(len(tokenize_words(p.text)) for p in account.posts)
    comments = sum(p.n_comments for p in account.posts)
    likes = sum(p.n_likes for p in account.posts)
    shared = sum(1 for p in account.posts if p.is_shared)
    return NonLexical(
        avg_words_per_post=words / n,
        avg_comments_per_post=comments / n,
        avg_likes_per_post=likes / n,
        share_ratio=shared / n,
    )


def extract_lexical(account: Account) -> tuple[TextStats, float, bool]:
    """Lexical profile over the account's English posts.

    Returns (stats, english_ratio, has_english). The ratio is English posts
    over all posts (0 for an account with no posts); with no English posts
    the stats are the all-zero profile.
    """
    if not account.posts:
        return TextStats(), 0.0, False
    english_texts = [p.text for p in account.posts if is_english(p.text)]
    ratio = len(english_texts) / len(account.posts)
    if not english_texts:
        return TextStats(), 0.0, False
    return lexical_profile(english_texts), ratio, True


def assemble(account: Account) -> FeatureVector:
    """Build the full per-account feature vector in the canonical order."""
    lexical, ratio, has_english = extract_lexical(account)
    return FeatureVector(
        account_id=account.id,
        non_lexical=extract_non_lexical(account),
        lexical=lexical,
        english_ratio=ratio,
        has_english=has_english,
    )


def export_csv(
    vectors: Sequence[FeatureVector],
    labels: Sequence[str],
    path: str | Path,
    include_english_ratio: bool = True,
) -> None:
    """Write one row per account: canonical feature columns, label last."""
    names = FEATURE_NAMES_WITH_RATIO if include_english_ratio else FEATURE_NAMES
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("account_id",) + names + ("label",))
        for vec, label in zip(vectors, labels):
            row = [vec.account_id]
            row.extend(f"{v:.6g}" for v in vec.values(include_english_ratio))
            row.append(label)
            writer.writerow(row)
