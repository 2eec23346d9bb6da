"""Tokenization, sentence segmentation, English detection, and readability stats.

Everything here is pure and deterministic: the same text always yields the
same numbers, so the functions are safe to call from parallel workers. The
twelve fields of :class:`TextStats` are the lexical features consumed by the
classifier layer.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

# Maximal runs of Unicode letters ([^\W\d_] == \w minus digits/underscore).
_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)
# Split points: whitespace preceded by a sentence terminator.
_SENT_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")
_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")

# Automated Readability Index coefficients (word length in letters/word,
# sentence length in words/sentence).
ARI_WORD_COEF = 4.71
ARI_SENT_COEF = 0.5
ARI_OFFSET = -21.43

# Flesch Reading Ease coefficients; syllables come from the vowel-group
# heuristic below (minimum one per word).
FLESCH_BASE = 206.835
FLESCH_SENT_COEF = 1.015
FLESCH_SYLL_COEF = 84.6

# English-detection thresholds: distinct stopword hits and ASCII-letter share.
MIN_STOPWORD_HITS = 2
MIN_ASCII_LETTER_RATIO = 0.70
SHORT_POST_WORDS = 3

LEXICAL_FIELDS = (
    "n_chars",
    "n_words",
    "n_sentences",
    "avg_word_length",
    "avg_sentence_length",
    "n_upper",
    "pct_punct",
    "pct_digits",
    "pct_nonletter",
    "richness",
    "ari",
    "flesch",
)


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    """The built-in top-100 English stopword list (shipped as a data file)."""
    text = resources.files("farmlens.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w for w in text.split() if w)


@dataclass(frozen=True)
class TextStats:
    """Lexical profile of a text corpus.

    Counts are over letter characters / word tokens / sentences; the pct_*
    fields are percentages of non-whitespace characters. ``richness`` is
    unique lowercased words over total words. All fields are 0 for an empty
    corpus.
    """

    n_chars: float = 0.0
    n_words: float = 0.0
    n_sentences: float = 0.0
    avg_word_length: float = 0.0
    avg_sentence_length: float = 0.0
    n_upper: float = 0.0
    pct_punct: float = 0.0
    pct_digits: float = 0.0
    pct_nonletter: float = 0.0
    richness: float = 0.0
    ari: float = 0.0
    flesch: float = 0.0

    def values(self) -> tuple[float, ...]:
        """Field values in the canonical LEXICAL_FIELDS order."""
        return tuple(getattr(self, name) for name in LEXICAL_FIELDS)


def tokenize_words(text: str) -> list[str]:
    """Split text into word tokens: maximal runs of Unicode letters.

    Digits, underscores, and punctuation are separators, so "abc123def"
    yields ["abc", "def"]. Case is preserved; lowercase at the call site
    when needed.
    """
    return _WORD_RE.findall(text)


def split_sentences(text: str) -> list[str]:
    """Split text into sentences on '.', '!', '?' followed by whitespace/end.

    A trailing fragment with at least one word counts as a sentence, so text
    without any terminator is one sentence. Segments with no letters at all
    (e.g. a bare "...") are dropped. Abbreviation artifacts are accepted:
    "e.g. test" splits after "e.g.".
    """
    if not text:
        return []
    parts = _SENT_SPLIT_RE.split(text)
    return [p for p in parts if _WORD_RE.search(p)]


def count_syllables(word: str) -> int:
    """Heuristic syllable count: number of [aeiouy] groups, at least 1."""
    return max(1, len(_VOWEL_GROUP_RE.findall(word.lower())))


def is_english(text: str) -> bool:
    """Heuristic English detector used to filter posts.

    A post passes when at least MIN_STOPWORD_HITS distinct tokens are on the
    built-in stopword list and at least 70% of its letters are ASCII. Very
    short posts (under three words) pass with a single stopword hit.
    """
    tokens = tokenize_words(text)
    if not tokens:
        return False
    hits = len({t.lower() for t in tokens} & stopwords())
    if len(tokens) < SHORT_POST_WORDS:
        return hits >= 1
    if hits < MIN_STOPWORD_HITS:
        return False
    letters = [c for c in text if c.isalpha()]
    ascii_letters = sum(1 for c in letters if c.isascii())
    return ascii_letters >= MIN_ASCII_LETTER_RATIO * len(letters)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def lexical_profile(texts: list[str] | tuple[str, ...]) -> TextStats:
    """Compute the twelve lexical fields over a corpus of texts.

    Counts are accumulated per text and summed, so they are additive under
    corpus concatenation; richness uses the union of lowercased words. A
    corpus with no words yields the all-zero TextStats.
    """
    n_letters = 0
    n_words = 0
    n_sentences = 0
    n_upper = 0
    n_punct = 0
    n_digits = 0
    n_nonletter = 0
    n_nonspace = 0
    n_syllables = 0
    seen: set[str] = set()

    for text in texts:
        tokens = tokenize_words(text)
        n_words += len(tokens)
        n_sentences += len(split_sentences(text))
        for tok in tokens:
            n_letters += len(tok)
            n_syllables += count_syllables(tok)
            seen.add(tok.lower())
        for ch in text:
            if ch.isspace():
                continue
            n_nonspace += 1
            if ch.isalpha():
                if ch.isupper():
                    n_upper += 1
            else:
                n_nonletter += 1
                if _is_punct(ch):
                    n_punct += 1
                elif ch.isdigit():
                    n_digits += 1

    if n_words == 0:
        # Zero-word corpora (empty, or all symbols) profile to zeros by
        # convention, including richness/ari/flesch.
        if n_nonspace == 0:
            return TextStats()
        return TextStats(
            pct_punct=100.0 * n_punct / n_nonspace,
            pct_digits=100.0 * n_digits / n_nonspace,
            pct_nonletter=100.0 * n_nonletter / n_nonspace,
        )

    avg_word_length = n_letters / n_words
    avg_sentence_length = n_words / n_sentences  # n_sentences >= 1 when words exist
    ari = ARI_WORD_COEF * avg_word_length + ARI_SENT_COEF * avg_sentence_length + ARI_OFFSET
    flesch = (
        FLESCH_BASE
        - FLESCH_SENT_COEF * avg_sentence_length
        - FLESCH_SYLL_COEF * (n_syllables / n_words)
    )
    return TextStats(
        n_chars=float(n_letters),
        n_words=float(n_words),
        n_sentences=float(n_sentences),
        avg_word_length=avg_word_length,
        avg_sentence_length=avg_sentence_length,
        n_upper=float(n_upper),
        pct_punct=100.0 * n_punct / n_nonspace,
        pct_digits=100.0 * n_digits / n_nonspace,
        pct_nonletter=100.0 * n_nonletter / n_nonspace,
        richness=len(seen) / n_words,
        ari=ari,
        flesch=flesch,
    )
