"""N-gram language models: sliding-window counts over orders 1..N with
stupid-backoff scoring, compilable to a weighted acceptor.

Scores are unnormalized conditional estimates: an observed n-gram scores its
exact count ratio, an unseen one backs off to the shortened context with a
fixed alpha penalty, and an out-of-vocabulary word floors at
``1 / (total_tokens + 1)`` so negative log likelihoods stay finite.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from reqlens.wfsa import EPSILON, Arc, SymbolTable, Wfsa

DEFAULT_MAX_ORDER = 3
DEFAULT_BACKOFF_ALPHA = 0.4

Gram = tuple[str, ...]


class NgramModel:
    """Hierarchical n-gram counts (orders 1..max_order) with backoff scoring."""

    __slots__ = ("max_order", "backoff_alpha", "counts", "total_tokens", "vocab")

    def __init__(
        self,
        max_order: int,
        backoff_alpha: float,
        counts: dict[int, dict[Gram, int]],
        total_tokens: int,
        vocab: set[str],
    ) -> None:
        if max_order < 1:
            raise ValueError(f"max_order must be >= 1, got {max_order}")
        if not 0.0 < backoff_alpha <= 1.0:
            raise ValueError(f"backoff_alpha must be in (0, 1], got {backoff_alpha}")
        self.max_order = max_order
        self.backoff_alpha = backoff_alpha
        self.counts = counts
        self.total_tokens = total_tokens
        self.vocab = vocab

    # -- scoring ---------------------------------------------------------

    def score(self, token: str, context: Sequence[str] = ()) -> float:
        """Stupid-backoff score of `token` after `context`, in (0, 1].

        The context is capped at the last max_order-1 tokens.  Each backoff
        step drops the oldest context token and multiplies by alpha.
        """
        history: Gram = tuple(context)
        if self.max_order > 1:
            history = history[-(self.max_order - 1):]
        else:
            history = ()
        score = 1.0
        while history:
            gram = history + (token,)
            count = self.counts.get(len(gram), {}).get(gram, 0)
            if count:
                return score * count / self.counts[len(history)][history]
            score *= self.backoff_alpha
            history = history[1:]
        count = self.counts.get(1, {}).get((token,), 0)
        if count:
            return score * count / self.total_tokens
        return score / (self.total_tokens + 1)

    def sequence_nll(self, tokens: Sequence[str]) -> float:
        """Negative log likelihood of a token sequence; empty input scores 0."""
        nll = 0.0
        for i, token in enumerate(tokens):
            start = max(0, i - (self.max_order - 1))
            nll -= math.log(self.score(token, tokens[start:i]))
        return nll

    # -- compilation -----------------------------------------------------

    def to_wfsa(self) -> Wfsa:
        """Compile to the standard n-gram acceptor topology.

        One state per observed context of orders 0..max_order-1, token arcs
        weighted by -ln(count ratio), epsilon backoff arcs to the shortened
        context weighted by -ln(alpha).  Every state is final with weight 0,
        so any fragment of the modelled text is scoreable.
        """
        if self.total_tokens == 0:
            raise ValueError("cannot compile an empty model")
        symbols = SymbolTable(sorted(self.vocab))

        contexts: list[Gram] = [()]
        for order in range(1, self.max_order):
            contexts.extend(sorted(self.counts.get(order, {})))
        state_of = {ctx: i for i, ctx in enumerate(contexts)}

        arcs: list[Arc] = []
        keep = self.max_order - 1
        for order in range(1, self.max_order + 1):
            for gram, count in sorted(self.counts.get(order, {}).items()):
                history, token = gram[:-1], gram[-1]
                denominator = self.total_tokens if order == 1 else self.counts[order - 1][history]
                next_context = gram[max(0, len(gram) - keep):]
                arcs.append(
                    Arc(
                        state_of[history],
                        symbols.add(token),
                        -math.log(count / denominator),
                        state_of[next_context],
                    )
                )
        backoff_weight = -math.log(self.backoff_alpha)
        for ctx in contexts:
            if ctx:
                arcs.append(Arc(state_of[ctx], EPSILON, backoff_weight, state_of[ctx[1:]]))

        finals = {i: 0.0 for i in range(len(contexts))}
        return Wfsa(len(contexts), state_of[()], finals, arcs, symbols)

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "max_order": self.max_order,
            "backoff_alpha": self.backoff_alpha,
            "total_tokens": self.total_tokens,
            "counts": {
                str(order): {" ".join(gram): count for gram, count in sorted(grams.items())}
                for order, grams in sorted(self.counts.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NgramModel":
        counts: dict[int, dict[Gram, int]] = {}
        for order, grams in data["counts"].items():
            counts[int(order)] = {tuple(key.split(" ")): count for key, count in grams.items()}
        vocab = {gram[0] for gram in counts.get(1, {})}
        return cls(
            max_order=data["max_order"],
            backoff_alpha=data["backoff_alpha"],
            counts=counts,
            total_tokens=data["total_tokens"],
            vocab=vocab,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NgramModel):
            return NotImplemented
        return (
            self.max_order == other.max_order
            and self.backoff_alpha == other.backoff_alpha
            and self.total_tokens == other.total_tokens
            and self.counts == other.counts
        )


def count_ngrams(
    tokens: Sequence[str],
    max_order: int = DEFAULT_MAX_ORDER,
    backoff_alpha: float = DEFAULT_BACKOFF_ALPHA,
) -> NgramModel:
    """Sliding-window counts for every order 1..max_order.

    No sentence-boundary padding is added: the inputs are conversation
    fragments, not sentences.
    """
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    counts: dict[int, dict[Gram, int]] = {}
    tokens = tuple(tokens)
    for order in range(1, max_order + 1):
        if len(tokens) < order:
            break
        grams: dict[Gram, int] = {}
        for i in range(len(tokens) - order + 1):
            gram = tokens[i:i + order]
            grams[gram] = grams.get(gram, 0) + 1
        counts[order] = grams
    return NgramModel(
        max_order=max_order,
        backoff_alpha=backoff_alpha,
        counts=counts,
        total_tokens=len(tokens),
        vocab=set(tokens),
    )


def sliding_counts(tokens: Sequence[str], max_order: int) -> dict[Gram, int]:
    """Flat n-gram -> count map over orders 1..max_order (window bookkeeping)."""
    model = count_ngrams(tokens, max_order)
    flat: dict[Gram, int] = {}
    for grams in model.counts.values():
        flat.update(grams)
    return flat
