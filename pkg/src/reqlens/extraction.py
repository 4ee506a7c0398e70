"""Relevant-term extraction: intersect the conversation window's n-gram
acceptor with the domain repository's n-gram acceptor.

The window acceptor accepts each window n-gram (orders 1..3) as its own
string, so the weighted intersection literally computes the set of n-grams
shared between the recent conversation and the indexed repository.  Survivors
are scored ``order * window_count * ln(1 + N/df)``: longer matches and
domain-discriminative terms rank higher.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from reqlens.config import ExtractionConfig, WindowConfig
from reqlens.index import SnippetIndex
from reqlens.ngram import Gram, sliding_counts
from reqlens.text import stopwords, tokenize
from reqlens.wfsa import Arc, SymbolTable, Wfsa, intersect, iter_language


@dataclass(frozen=True)
class WindowState:
    """The most recent utterances, tokenized, newest last.

    Stopwords are retained (they provide n-gram context) but flagged so the
    extractor can drop stopword unigrams from its output.
    """

    utterance_ids: tuple[int, ...]
    tokens: tuple[str, ...]
    stopword_mask: tuple[bool, ...]
    token_budget: int
    utterance_budget: int


@dataclass(frozen=True)
class RelevantTerm:
    """An n-gram shared by the window and the repository, with its score."""

    ngram: Gram
    order: int
    window_count: int
    snippet_df: int
    score: float

    @property
    def text(self) -> str:
        return " ".join(self.ngram)

    def to_dict(self) -> dict:
        return {
            "ngram": list(self.ngram),
            "order": self.order,
            "window_count": self.window_count,
            "snippet_df": self.snippet_df,
            "score": self.score,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RelevantTerm":
        return cls(
            ngram=tuple(data["ngram"]),
            order=data["order"],
            window_count=data["window_count"],
            snippet_df=data["snippet_df"],
            score=data["score"],
        )


def term_score(order: int, window_count: int, snippet_df: int, n_snippets: int) -> float:
    return order * window_count * math.log(1.0 + n_snippets / snippet_df)


def build_window(
    utterances: Sequence[tuple[int, str]],
    config: WindowConfig = WindowConfig(),
) -> WindowState:
    """Window over the newest utterances, truncated oldest-first to budget.

    `utterances` are (utterance_id, text) pairs ordered by arrival.  The
    newest `utterance_budget` utterances are tokenized and concatenated;
    if the result exceeds `token_budget` the oldest tokens are dropped.
    """
    recent = list(utterances)[-config.utterance_budget:]
    tokens: list[str] = []
    for _, text in recent:
        tokens.extend(tokenize(text))
    tokens = tokens[-config.token_budget:]
    stop = stopwords()
    return WindowState(
        utterance_ids=tuple(uid for uid, _ in recent),
        tokens=tuple(tokens),
        stopword_mask=tuple(tok in stop for tok in tokens),
        token_budget=config.token_budget,
        utterance_budget=config.utterance_budget,
    )


def _window_acceptor(
    counts: dict[Gram, int], symbols: SymbolTable
) -> Wfsa:
    """Trie accepting each window n-gram, weight -ln(window_count) on final.

    N-grams containing tokens outside `symbols` (the domain vocabulary) are
    skipped: they cannot survive the intersection, and skipping them keeps
    both machines on the index's immutable shared symbol table.
    """
    arcs: list[Arc] = []
    finals: dict[int, float] = {}
    trie: dict[tuple[int, int], int] = {}
    n_states = 1
    for gram in sorted(counts):
        ids = [symbols.id_of(token) for token in gram]
        if any(sym is None for sym in ids):
            continue
        state = 0
        for sym in ids:
            key = (state, sym)
            dst = trie.get(key)
            if dst is None:
                dst = n_states
                n_states += 1
                trie[key] = dst
                arcs.append(Arc(state, sym, 0.0, dst))
            state = dst
        finals[state] = -math.log(counts[gram])
    return Wfsa(n_states, 0, finals, arcs, symbols)


def extract_relevant_terms(
    window: WindowState,
    index: SnippetIndex,
    config: ExtractionConfig = ExtractionConfig(),
) -> list[RelevantTerm]:
    """Scored n-grams shared between the window and the snippet index.

    Builds the window and domain n-gram acceptors over one symbol table,
    intersects them, and turns each surviving n-gram into a RelevantTerm.
    Stopword unigrams are filtered.  Output is sorted by score descending,
    ties broken by n-gram text, and truncated to `config.top_k`.
    """
    if not window.tokens or not index.n_snippets:
        return []
    window_counts = sliding_counts(window.tokens, config.max_order)
    domain = index.ngram_acceptor(config.min_df)
    product = intersect(_window_acceptor(window_counts, domain.symbols), domain)

    stop = stopwords()
    terms: list[RelevantTerm] = []
    for gram, _ in iter_language(product):
        if len(gram) == 1 and gram[0] in stop:
            continue
        df = index.df[gram]
        terms.append(
            RelevantTerm(
                ngram=gram,
                order=len(gram),
                window_count=window_counts[gram],
                snippet_df=df,
                score=term_score(len(gram), window_counts[gram], df, index.n_snippets),
            )
        )
    terms.sort(key=lambda term: (-term.score, term.text))
    return terms[: config.top_k]
