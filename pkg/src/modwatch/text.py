"""Deterministic text normalization: lowercase, strip punctuation, drop stop
words, stem. The stop list ships with the package and can be overridden per
run via config."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .stem import stem

_WORD_RE = re.compile(r"[a-z]+")


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stop list (one token per line, '#' comments). None = shipped list."""
    if path is None:
        text = resources.files("modwatch.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


DEFAULT_STOPWORDS = load_stopwords()

# stems repeat heavily across a corpus; memoize per unique surface form
_cached_stem = lru_cache(maxsize=1 << 18)(stem)


def tokenize(text: str, stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> list[str]:
    """Lowercased, punctuation-stripped, stop-filtered, stemmed tokens.

    Total function: any input (including empty) yields a list.
    """
    if not text:
        return []
    return [
        _cached_stem(w)
        for w in _WORD_RE.findall(text.lower())
        if w not in stopwords
    ]
