"""Category lexicons and pluggable comment scorers.

Proprietary dictionaries and hosted toxicity models are replaced by two
open interfaces: a Lexicon (named categories of words/stems) drives the
language-style proportions, and a CommentScorer maps comment text to a
score in [0, 1]. Drop in your own category files or scorer to reproduce a
richer setup; the shipped defaults are small but fully functional.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .text import tokenize


@dataclass
class Lexicon:
    name: str
    categories: dict[str, frozenset[str]]

    def __post_init__(self):
        if not self.categories:
            raise ValueError("lexicon needs at least one category")

    def category_names(self) -> list[str]:
        return sorted(self.categories)


def load_lexicon(path: str | Path, name: str | None = None) -> Lexicon:
    """Parse a lexicon file: '[category]' headers, one token per line.

    Tokens are matched against the tokenizer's stemmed output, so entries
    should be stems (or words whose stem is itself).
    """
    path = Path(path)
    categories: dict[str, set[str]] = {}
    current: set[str] | None = None
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = categories.setdefault(line[1:-1].strip().lower(), set())
            continue
        if current is None:
            raise ValueError(f"{path}:{lineno}: token before any [category] header")
        current.add(line.lower())
    return Lexicon(
        name=name or path.stem,
        categories={k: frozenset(v) for k, v in categories.items()},
    )


def demo_lexicon() -> Lexicon:
    """Small built-in demonstration lexicon (six categories)."""
    cats = {
        "positive": {"love", "great", "good", "happi", "nice", "thank", "awesom", "best"},
        "negative": {"bad", "terribl", "wors", "worst", "sad", "awful", "horribl"},
        "anger": {"angri", "rage", "furiou", "mad", "outrag"},
        "toxic": {"hate", "idiot", "stupid", "scum", "trash", "moron", "disgust", "vermin"},
        "social": {"friend", "famili", "peopl", "commun", "group", "togeth"},
        "cognitive": {"think", "know", "believ", "reason", "understand", "idea"},
    }
    return Lexicon(name="demo", categories={k: frozenset(v) for k, v in cats.items()})


class CommentScorer(Protocol):
    """Deterministic, total map from comment text to a score in [0, 1]."""

    def score(self, text: str) -> float: ...


@dataclass
class LexiconIndicatorScorer:
    """1.0 when any token from the category is present, else 0.0.

    The shipped default: comments containing toxic-lexicon terms count as
    toxic at any threshold <= 1.
    """

    lexicon: Lexicon
    category: str = "toxic"

    def score(self, text: str) -> float:
        words = self.lexicon.categories[self.category]
        return 1.0 if any(t in words for t in tokenize(text)) else 0.0


@dataclass
class LexiconRateScorer:
    """Fraction of a comment's tokens that fall in the category."""

    lexicon: Lexicon
    category: str = "toxic"

    def score(self, text: str) -> float:
        tokens = tokenize(text)
        if not tokens:
            return 0.0
        words = self.lexicon.categories[self.category]
        return sum(1 for t in tokens if t in words) / len(tokens)


@dataclass
class ConstantScorer:
    value: float = 0.0

    def score(self, text: str) -> float:
        return self.value


def lexicon_scores(tokens: list[str], lexicon: Lexicon) -> dict[str, float]:
    """Per-category proportion of tokens; empty input scores all zeros."""
    total = len(tokens)
    if total == 0:
        return {cat: 0.0 for cat in lexicon.categories}
    return {
        cat: sum(1 for t in tokens if t in words) / total
        for cat, words in lexicon.categories.items()
    }
