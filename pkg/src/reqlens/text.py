"""Shared text normalization: tokenizer, sentence spans, stopword list."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

# Lowercased word characters; hyphens survive only between word characters,
# so "off-the-shelf" is one token but leading/trailing hyphens are stripped.
_TOKEN_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)*", re.UNICODE)

# A sentence ends at . ! or ? followed by whitespace (or at end of text).
_SENTENCE_END_RE = re.compile(r"[.!?](?=\s)")


def tokenize(text: str) -> list[str]:
    """Lowercase and strip punctuation, keeping intra-word hyphens."""
    return _TOKEN_RE.findall(text.lower())


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Character (start, end) spans of sentences, boundaries at [.!?] + space.

    Spans cover the sentence text including its terminator; surrounding
    whitespace is excluded.  A trailing fragment without a terminator is
    returned as a final sentence.
    """
    spans: list[tuple[int, int]] = []
    cursor = 0
    for match in _SENTENCE_END_RE.finditer(text):
        end = match.end()
        span = _strip_span(text, cursor, end)
        if span is not None:
            spans.append(span)
        cursor = end
    tail = _strip_span(text, cursor, len(text))
    if tail is not None:
        spans.append(tail)
    return spans


def _strip_span(text: str, start: int, end: int) -> tuple[int, int] | None:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return (start, end) if start < end else None


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    """English function words filtered from unigram term output."""
    raw = resources.files("reqlens").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in raw.splitlines() if line.strip())
