"""Domain repository snippets: segmentation, inverted n-gram index, retrieval.

Documents are split into paragraph-sized snippets, each tokenized and indexed
under its n-grams (orders 1..3).  Retrieval runs BM25 over snippet postings
with each query term's contribution scaled by the term's relevance score, so
the relevance weight plays the role BM25's idf component normally does.

The index is immutable once built; re-ingestion produces a new value.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

from reqlens.ngram import Gram, sliding_counts
from reqlens.text import sentence_spans, tokenize
from reqlens.wfsa import Arc, SymbolTable, Wfsa

if TYPE_CHECKING:  # pragma: no cover
    from reqlens.extraction import RelevantTerm

MAGIC = "ELIDX1"
MAX_SNIPPET_CHARS = 600
MAX_SNIPPET_SENTENCES = 3
NGRAM_ORDERS = 3


@dataclass(frozen=True)
class Snippet:
    """A retrievable fragment of one repository document.

    `char_span` holds byte offsets into the UTF-8 encoding of the source
    document; slicing the encoded document with it yields exactly `text`.
    """

    doc_id: str
    snippet_id: str
    char_span: tuple[int, int]
    text: str
    tokens: tuple[str, ...]

    @property
    def length(self) -> int:
        return len(self.tokens)

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "snippet_id": self.snippet_id,
            "char_span": list(self.char_span),
            "text": self.text,
            "tokens": list(self.tokens),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Snippet":
        return cls(
            doc_id=data["doc_id"],
            snippet_id=data["snippet_id"],
            char_span=tuple(data["char_span"]),
            text=data["text"],
            tokens=tuple(data["tokens"]),
        )


def _paragraph_spans(text: str) -> list[tuple[int, int]]:
    """Char spans of blank-line-separated blocks, trimmed of outer whitespace."""
    spans: list[tuple[int, int]] = []
    offset = 0
    block_start: int | None = None
    block_end = 0
    for line in text.splitlines(keepends=True):
        if line.strip():
            if block_start is None:
                block_start = offset
            block_end = offset + len(line)
        else:
            if block_start is not None:
                spans.append((block_start, block_end))
                block_start = None
        offset += len(line)
    if block_start is not None:
        spans.append((block_start, block_end))
    trimmed = []
    for start, end in spans:
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if start < end:
            trimmed.append((start, end))
    return trimmed


def _sentence_chunks(paragraph: str) -> list[tuple[int, int]]:
    """Group sentences into chunks of <= 3 sentences and <= 600 chars.

    A single over-long sentence stands alone; the char cap only applies
    between sentences.
    """
    chunks: list[tuple[int, int]] = []
    current: list[tuple[int, int]] = []
    for span in sentence_spans(paragraph):
        if current:
            merged_len = span[1] - current[0][0]
            if len(current) >= MAX_SNIPPET_SENTENCES or merged_len > MAX_SNIPPET_CHARS:
                chunks.append((current[0][0], current[-1][1]))
                current = []
        current.append(span)
    if current:
        chunks.append((current[0][0], current[-1][1]))
    return chunks


def segment(doc_text: str, doc_id: str) -> list[Snippet]:
    """Split a document into snippets: paragraphs, sub-split when over-long.

    Paragraphs are blank-line-separated; any paragraph over 600 characters is
    split at sentence boundaries into chunks of at most 3 sentences and 600
    characters.  Whitespace-only and token-free segments are dropped.
    """
    doc_bytes_upto = lambda pos: len(doc_text[:pos].encode("utf-8"))
    snippets: list[Snippet] = []
    for par_start, par_end in _paragraph_spans(doc_text):
        paragraph = doc_text[par_start:par_end]
        if len(paragraph) <= MAX_SNIPPET_CHARS:
            char_spans = [(par_start, par_end)]
        else:
            char_spans = [
                (par_start + cs, par_start + ce) for cs, ce in _sentence_chunks(paragraph)
            ]
        for start, end in char_spans:
            piece = doc_text[start:end]
            tokens = tuple(tokenize(piece))
            if not tokens:
                continue
            snippets.append(
                Snippet(
                    doc_id=doc_id,
                    snippet_id=f"{doc_id}#{len(snippets):04d}",
                    char_span=(doc_bytes_upto(start), doc_bytes_upto(end)),
                    text=piece,
                    tokens=tokens,
                )
            )
    return snippets


class SnippetIndex:
    """Inverted n-gram index (orders 1..3) over segmented snippets."""

    def __init__(self, snippets: Sequence[Snippet]) -> None:
        self.snippets: dict[str, Snippet] = {}
        self.order: list[str] = []
        self.postings: dict[Gram, list[tuple[str, int]]] = {}
        for snippet in snippets:
            self.snippets[snippet.snippet_id] = snippet
            self.order.append(snippet.snippet_id)
            for gram, tf in sorted(sliding_counts(snippet.tokens, NGRAM_ORDERS).items()):
                self.postings.setdefault(gram, []).append((snippet.snippet_id, tf))
        self.df: dict[Gram, int] = {gram: len(post) for gram, post in self.postings.items()}
        self.n_snippets = len(self.order)
        self.avg_len = (
            sum(self.snippets[sid].length for sid in self.order) / self.n_snippets
            if self.n_snippets
            else 0.0
        )
        self._acceptor_lock = threading.Lock()
        self._acceptors: dict[int, tuple[SymbolTable, Wfsa]] = {}

    # -- construction ------------------------------------------------------

    @classmethod
    def ingest_corpus(cls, docs: Iterable[tuple[str, str]]) -> "SnippetIndex":
        """Segment and index (doc_id, text) pairs; doc_ids must be unique."""
        seen: set[str] = set()
        snippets: list[Snippet] = []
        for doc_id, doc_text in docs:
            if doc_id in seen:
                raise ValueError(f"duplicate doc_id: {doc_id!r}")
            seen.add(doc_id)
            snippets.extend(segment(doc_text, doc_id))
        return cls(snippets)

    @classmethod
    def from_dir(cls, corpus_dir: str | Path) -> "SnippetIndex":
        """Index every .txt/.md file under a directory; doc_id = relative path."""
        root = Path(corpus_dir)
        if not root.is_dir():
            raise FileNotFoundError(f"corpus directory not found: {root}")
        docs = []
        for path in sorted(root.rglob("*")):
            if path.suffix.lower() in {".txt", ".md"} and path.is_file():
                docs.append((path.relative_to(root).as_posix(), path.read_text("utf-8")))
        return cls.ingest_corpus(docs)

    # -- retrieval ----------------------------------------------------------

    def retrieve(
        self,
        terms: Sequence["RelevantTerm"],
        m: int,
        k1: float = 1.2,
        b: float = 0.75,
    ) -> list[tuple[Snippet, float]]:
        """Top-m snippets by relevance-weighted BM25.

        Each matching term contributes ``term.score * tf*(k1+1) /
        (tf + k1*(1-b+b*len/avg_len))``; snippets matching no term are
        excluded.  Ties break by snippet_id ascending.
        """
        if m < 1:
            raise ValueError(f"m must be >= 1, got {m}")
        if not terms or not self.n_snippets:
            return []
        scores: dict[str, float] = {}
        for term in terms:
            for snippet_id, tf in self.postings.get(term.ngram, ()):
                length = self.snippets[snippet_id].length
                norm = tf + k1 * (1.0 - b + b * length / self.avg_len)
                scores[snippet_id] = scores.get(snippet_id, 0.0) + term.score * tf * (k1 + 1.0) / norm
        ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
        return [(self.snippets[sid], score) for sid, score in ranked[:m]]

    # -- n-gram acceptor (domain side of the window intersection) -----------

    def ngram_acceptor(self, min_df: int = 1) -> Wfsa:
        """Trie acceptor over all indexed n-grams with snippet df >= min_df.

        The string weight, carried on the final state, is -ln(df/N).  Built
        lazily and cached: the index is immutable so the machine never goes
        stale.  The acceptor's symbol table is shared with window acceptors.
        """
        with self._acceptor_lock:
            cached = self._acceptors.get(min_df)
            if cached is not None:
                return cached[1]
            symbols = SymbolTable()
            for gram in sorted(self.df):
                for token in gram:
                    symbols.add(token)
            arcs: list[Arc] = []
            finals: dict[int, float] = {}
            next_state = [1]
            trie: dict[tuple[int, int], int] = {}

            def child(state: int, sym: int) -> int:
                key = (state, sym)
                dst = trie.get(key)
                if dst is None:
                    dst = next_state[0]
                    next_state[0] += 1
                    trie[key] = dst
                    arcs.append(Arc(state, sym, 0.0, dst))
                return dst

            for gram in sorted(self.df):
                df = self.df[gram]
                if df < min_df:
                    continue
                state = 0
                for token in gram:
                    state = child(state, symbols.id_of(token))
                finals[state] = -math.log(df / self.n_snippets)
            acceptor = Wfsa(next_state[0], 0, finals, arcs, symbols)
            self._acceptors[min_df] = (symbols, acceptor)
            return acceptor

    # -- persistence ---------------------------------------------------------

    def to_payload(self) -> dict:
        return {
            "n_snippets": self.n_snippets,
            "snippets": [self.snippets[sid].to_dict() for sid in self.order],
        }

    def save(self, path: str | Path) -> str:
        """Write `ELIDX1 <sha256>` header plus a JSON body; returns the digest."""
        body = json.dumps(self.to_payload(), sort_keys=True, ensure_ascii=False)
        digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
        Path(path).write_text(f"{MAGIC} {digest}\n{body}\n", encoding="utf-8")
        return digest

    @classmethod
    def load(cls, path: str | Path) -> "SnippetIndex":
        """Load and checksum-verify an index file."""
        raw = Path(path).read_text("utf-8")
        header, _, body = raw.partition("\n")
        fields = header.split()
        if len(fields) != 2 or fields[0] != MAGIC:
            raise ValueError(f"{path}: not an index file (missing {MAGIC} header)")
        body = body.rstrip("\n")
        digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
        if digest != fields[1]:
            raise ValueError(f"{path}: checksum mismatch; file is corrupt")
        payload = json.loads(body)
        return cls([Snippet.from_dict(item) for item in payload["snippets"]])


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
