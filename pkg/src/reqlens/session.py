"""Live elicitation sessions: utterance ingest, per-utterance extraction,
ratings, recall summaries, and append-only log persistence with replay.

State is the fold of an append-only log of three record kinds (`utterance`,
`event`, `rating`).  Replay reads events back verbatim rather than
recomputing extraction, so a reconstructed session matches the live one
field for field.  One writer per session; readers get immutable values.
"""

from __future__ import annotations

import json
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable

from reqlens import classifier
from reqlens.config import EngineConfig
from reqlens.extraction import RelevantTerm, build_window, extract_relevant_terms
from reqlens.index import SnippetIndex

LOG_VERSION = 1


class NotFoundError(KeyError):
    """A referenced session, event, snippet or rating does not exist."""


class ConflictError(ValueError):
    """A create collided with an existing resource."""


class StateError(ValueError):
    """Operation not valid in the session's current state."""


@dataclass(frozen=True)
class Utterance:
    session_id: str
    utterance_id: int
    speaker: str
    t_start_ms: int
    t_end_ms: int
    text: str
    confidence: float | None = None
    tone: Any = None  # upstream analyzers may attach these; passed through
    emotion: Any = None

    def to_dict(self) -> dict:
        data = {
            "session_id": self.session_id,
            "utterance_id": self.utterance_id,
            "speaker": self.speaker,
            "t_start_ms": self.t_start_ms,
            "t_end_ms": self.t_end_ms,
            "text": self.text,
        }
        if self.confidence is not None:
            data["confidence"] = self.confidence
        if self.tone is not None:
            data["tone"] = self.tone
        if self.emotion is not None:
            data["emotion"] = self.emotion
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Utterance":
        return cls(
            session_id=data["session_id"],
            utterance_id=data["utterance_id"],
            speaker=data["speaker"],
            t_start_ms=data["t_start_ms"],
            t_end_ms=data["t_end_ms"],
            text=data["text"],
            confidence=data.get("confidence"),
            tone=data.get("tone"),
            emotion=data.get("emotion"),
        )


@dataclass(frozen=True)
class SnippetResult:
    """One ranked, classified snippet inside an extraction event."""

    snippet_id: str
    score: float
    label: str
    decisions: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "snippet_id": self.snippet_id,
            "score": self.score,
            "label": self.label,
            "decisions": dict(self.decisions),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SnippetResult":
        return cls(
            snippet_id=data["snippet_id"],
            score=data["score"],
            label=data["label"],
            decisions=dict(data["decisions"]),
        )


@dataclass(frozen=True)
class ExtractionEvent:
    event_id: int
    trigger_utterance_id: int
    window_utterance_ids: tuple[int, ...]
    terms: tuple[RelevantTerm, ...]
    results: tuple[SnippetResult, ...]
    created_at_ms: int

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "trigger_utterance_id": self.trigger_utterance_id,
            "window_utterance_ids": list(self.window_utterance_ids),
            "terms": [term.to_dict() for term in self.terms],
            "results": [result.to_dict() for result in self.results],
            "created_at_ms": self.created_at_ms,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExtractionEvent":
        return cls(
            event_id=data["event_id"],
            trigger_utterance_id=data["trigger_utterance_id"],
            window_utterance_ids=tuple(data["window_utterance_ids"]),
            terms=tuple(RelevantTerm.from_dict(t) for t in data["terms"]),
            results=tuple(SnippetResult.from_dict(r) for r in data["results"]),
            created_at_ms=data["created_at_ms"],
        )


@dataclass(frozen=True)
class Rating:
    event_id: int
    snippet_id: str
    stars: int
    rated_at_ms: int

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "snippet_id": self.snippet_id,
            "stars": self.stars,
            "rated_at_ms": self.rated_at_ms,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Rating":
        return cls(
            event_id=data["event_id"],
            snippet_id=data["snippet_id"],
            stars=data["stars"],
            rated_at_ms=data["rated_at_ms"],
        )


@dataclass(frozen=True)
class TermRecall:
    ngram: tuple[str, ...]
    score: float

    def to_dict(self) -> dict:
        return {"ngram": list(self.ngram), "score": self.score}


@dataclass(frozen=True)
class SnippetRecall:
    snippet_id: str
    score: float
    mean_stars: float | None

    def to_dict(self) -> dict:
        return {"snippet_id": self.snippet_id, "score": self.score, "mean_stars": self.mean_stars}


@dataclass(frozen=True)
class RecallSummary:
    """Whole-session aggregation for resuming after an interruption."""

    terms: tuple[TermRecall, ...]
    snippets: tuple[SnippetRecall, ...]

    def to_dict(self) -> dict:
        return {
            "terms": [t.to_dict() for t in self.terms],
            "snippets": [s.to_dict() for s in self.snippets],
        }


@dataclass
class SessionState:
    session_id: str
    config: EngineConfig
    utterances: list[Utterance] = field(default_factory=list)
    events: list[ExtractionEvent] = field(default_factory=list)
    ratings: dict[tuple[int, str], Rating] = field(default_factory=dict)
    open: bool = True

    def structurally_equal(self, other: "SessionState") -> bool:
        return (
            self.session_id == other.session_id
            and self.utterances == other.utterances
            and self.events == other.events
            and self.ratings == other.ratings
        )


# -- log records ---------------------------------------------------------


def _record(kind: str, payload: dict) -> dict:
    return {"v": LOG_VERSION, "kind": kind, **payload}


def parse_log_line(line: str, lineno: int) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"line {lineno}: malformed log record ({exc.msg})") from exc
    if not isinstance(record, dict) or "kind" not in record:
        raise ValueError(f"line {lineno}: malformed log record (no kind)")
    if record.get("v") != LOG_VERSION:
        raise ValueError(f"line {lineno}: log version mismatch (got {record.get('v')!r}, want {LOG_VERSION})")
    return record


def replay(lines: Iterable[str], config: EngineConfig | None = None) -> SessionState:
    """Rebuild a session from its log; extraction is read back, not recomputed."""
    state = SessionState(session_id="", config=config or EngineConfig())
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        record = parse_log_line(line, lineno)
        kind = record["kind"]
        if kind == "utterance":
            utterance = Utterance.from_dict(record)
            state.session_id = utterance.session_id
            state.utterances.append(utterance)
        elif kind == "event":
            state.events.append(ExtractionEvent.from_dict(record))
        elif kind == "rating":
            rating = Rating.from_dict(record)
            state.ratings[(rating.event_id, rating.snippet_id)] = rating
        else:
            raise ValueError(f"line {lineno}: unknown record kind {kind!r}")
    return state


def replay_file(path: str | Path, config: EngineConfig | None = None) -> SessionState:
    with open(path, encoding="utf-8") as handle:
        state = replay(handle, config)
    state.session_id = state.session_id or Path(path).stem
    return state


# -- engine ----------------------------------------------------------------


class SessionEngine:
    """Owns the live sessions and runs the per-utterance pipeline.

    Operations on one session are serialized by a per-session lock; the
    snippet index and classifier model are shared read-only.  When
    `store_dir` is set, every record is appended to the session's log file
    before the call returns.
    """

    def __init__(
        self,
        index: SnippetIndex,
        model: classifier.ModelArtifact,
        config: EngineConfig | None = None,
        store_dir: str | Path | None = None,
        clock: Callable[[], int] | None = None,
        index_ref: dict | None = None,
        model_ref: dict | None = None,
    ) -> None:
        self.index = index
        self.model = model
        self.config = config or EngineConfig()
        self.store_dir = Path(store_dir) if store_dir is not None else None
        if self.store_dir is not None:
            self.store_dir.mkdir(parents=True, exist_ok=True)
        self.clock = clock or (lambda: int(time.time() * 1000))
        self.index_ref = index_ref
        self.model_ref = model_ref
        self._sessions: dict[str, SessionState] = {}
        self._records: dict[str, list[dict]] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._subscribers: dict[str, list[queue.Queue]] = {}
        self._registry_lock = threading.Lock()
        # Pay the one-time domain-acceptor build now, not on the first request.
        if index.n_snippets:
            index.ngram_acceptor(self.config.extraction.min_df)

    # -- session lifecycle -------------------------------------------------

    def create_session(self, session_id: str | None = None) -> SessionState:
        session_id = session_id or uuid.uuid4().hex[:12]
        with self._registry_lock:
            if session_id in self._sessions:
                raise ConflictError(f"session already exists: {session_id}")
            state = SessionState(session_id=session_id, config=self.config)
            self._sessions[session_id] = state
            self._records[session_id] = []
            self._locks[session_id] = threading.Lock()
            self._subscribers[session_id] = []
        if self.store_dir is not None:
            meta = {
                "v": LOG_VERSION,
                "session_id": session_id,
                "created_at_ms": self.clock(),
                "config": self.config.to_dict(),
                "index_ref": self.index_ref,
                "model_ref": self.model_ref,
            }
            self._meta_path(session_id).write_text(
                json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8"
            )
        return state

    def get_session(self, session_id: str) -> SessionState:
        state = self._sessions.get(session_id)
        if state is None and self.store_dir is not None:
            state = self._load_from_store(session_id)
        if state is None:
            raise NotFoundError(f"unknown session: {session_id}")
        return state

    def has_session(self, session_id: str) -> bool:
        try:
            self.get_session(session_id)
            return True
        except NotFoundError:
            return False

    def close_session(self, session_id: str) -> None:
        state = self.get_session(session_id)
        with self._locks[session_id]:
            state.open = False

    def _load_from_store(self, session_id: str) -> SessionState | None:
        log_path = self._log_path(session_id)
        if not log_path.exists():
            return None
        state = replay_file(log_path, self.config)
        state.session_id = session_id
        with self._registry_lock:
            if session_id in self._sessions:  # lost the race; keep the winner
                return self._sessions[session_id]
            self._sessions[session_id] = state
            self._records[session_id] = self._rebuild_records(state)
            self._locks[session_id] = threading.Lock()
            self._subscribers[session_id] = []
        return state

    @staticmethod
    def _rebuild_records(state: SessionState) -> list[dict]:
        merged: list[tuple[int, dict]] = []
        for utterance in state.utterances:
            merged.append((utterance.utterance_id, _record("utterance", utterance.to_dict())))
        # Events interleave after their trigger utterance; ratings go last in
        # rated order.  Replay of live logs preserves the original order, so
        # this path only runs for logs written elsewhere.
        ordered = [rec for _, rec in sorted(merged, key=lambda pair: pair[0])]
        by_trigger: dict[int, list[dict]] = {}
        for event in state.events:
            by_trigger.setdefault(event.trigger_utterance_id, []).append(
                _record("event", event.to_dict())
            )
        records: list[dict] = []
        for record in ordered:
            records.append(record)
            for event_record in by_trigger.pop(record["utterance_id"], []):
                records.append(event_record)
        for rating in sorted(state.ratings.values(), key=lambda r: r.rated_at_ms):
            records.append(_record("rating", rating.to_dict()))
        return records

    # -- record plumbing -----------------------------------------------------

    def _log_path(self, session_id: str) -> Path:
        assert self.store_dir is not None
        return self.store_dir / f"{session_id}.log"

    def _meta_path(self, session_id: str) -> Path:
        assert self.store_dir is not None
        return self.store_dir / f"{session_id}.meta.json"

    def _append_record(self, session_id: str, record: dict) -> int:
        """Persist then publish; returns the record's sequence number."""
        records = self._records[session_id]
        records.append(record)
        seq = len(records)
        if self.store_dir is not None:
            with open(self._log_path(session_id), "a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
                handle.flush()
        for subscriber in list(self._subscribers[session_id]):
            subscriber.put((seq, record))
        return seq

    def records_since(self, session_id: str, since: int = 0) -> list[tuple[int, dict]]:
        self.get_session(session_id)
        records = self._records[session_id]
        return [(seq, records[seq - 1]) for seq in range(since + 1, len(records) + 1)]

    def subscribe(self, session_id: str, since: int = 0) -> tuple[queue.Queue, list[tuple[int, dict]]]:
        """Register a live-stream subscriber; returns (queue, backlog)."""
        self.get_session(session_id)
        with self._locks[session_id]:
            backlog = self.records_since(session_id, since)
            subscriber: queue.Queue = queue.Queue()
            self._subscribers[session_id].append(subscriber)
        return subscriber, backlog

    def unsubscribe(self, session_id: str, subscriber: queue.Queue) -> None:
        subscribers = self._subscribers.get(session_id, [])
        if subscriber in subscribers:
            subscribers.remove(subscriber)

    # -- operations ----------------------------------------------------------

    def append_utterance(
        self,
        session_id: str,
        speaker: str,
        t_start_ms: int,
        t_end_ms: int,
        text: str,
        confidence: float | None = None,
        tone: Any = None,
        emotion: Any = None,
    ) -> ExtractionEvent | None:
        """Ingest one diarized utterance; run extraction when the window is
        big enough.  Returns the new event, or None below the token floor."""
        if t_start_ms > t_end_ms:
            raise ValueError(f"t_start_ms {t_start_ms} > t_end_ms {t_end_ms}")
        if confidence is not None and not 0.0 <= confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {confidence}")
        state = self.get_session(session_id)
        with self._locks[session_id]:
            if not state.open:
                raise StateError(f"session is closed: {session_id}")
            utterance = Utterance(
                session_id=session_id,
                utterance_id=len(state.utterances) + 1,
                speaker=speaker,
                t_start_ms=t_start_ms,
                t_end_ms=t_end_ms,
                text=text,
                confidence=confidence,
                tone=tone,
                emotion=emotion,
            )
            state.utterances.append(utterance)
            self._append_record(session_id, _record("utterance", utterance.to_dict()))

            window = build_window(
                [(u.utterance_id, u.text) for u in state.utterances], self.config.window
            )
            if len(window.tokens) < self.config.window.min_tokens:
                return None
            terms = extract_relevant_terms(window, self.index, self.config.extraction)
            retrieval = self.config.retrieval
            hits = (
                self.index.retrieve(terms, retrieval.m, retrieval.k1, retrieval.b)
                if terms
                else []
            )
            results = []
            for snippet, score in hits:
                label, decisions = classifier.predict(self.model, snippet.text)
                results.append(
                    SnippetResult(
                        snippet_id=snippet.snippet_id,
                        score=score,
                        label=label,
                        decisions=decisions,
                    )
                )
            event = ExtractionEvent(
                event_id=len(state.events) + 1,
                trigger_utterance_id=utterance.utterance_id,
                window_utterance_ids=window.utterance_ids,
                terms=tuple(terms),
                results=tuple(results),
                created_at_ms=self.clock(),
            )
            state.events.append(event)
            self._append_record(session_id, _record("event", event.to_dict()))
            return event

    def record_rating(self, session_id: str, event_id: int, snippet_id: str, stars: int) -> Rating:
        """Store an analyst rating; duplicates are last-write-wins."""
        if stars not in (1, 2, 3, 4, 5):
            raise ValueError(f"stars must be 1..5, got {stars}")
        state = self.get_session(session_id)
        with self._locks[session_id]:
            if not 1 <= event_id <= len(state.events):
                raise NotFoundError(f"unknown event: {event_id}")
            event = state.events[event_id - 1]
            if all(result.snippet_id != snippet_id for result in event.results):
                raise NotFoundError(f"unknown snippet for event {event_id}: {snippet_id}")
            rating = Rating(
                event_id=event_id,
                snippet_id=snippet_id,
                stars=stars,
                rated_at_ms=self.clock(),
            )
            state.ratings[(event_id, snippet_id)] = rating
            self._append_record(session_id, _record("rating", rating.to_dict()))
            return rating

    def resume_summary(self, session_id: str, top_n: int = 10) -> RecallSummary:
        """Recency-weighted whole-session aggregation of terms and snippets.

        Term and snippet scores decay by `recall.recency` per event of age;
        rated snippets get `recall.rating_bonus * mean stars` added.
        """
        state = self.get_session(session_id)
        with self._locks[session_id]:
            events = list(state.events)
            ratings = dict(state.ratings)
        recency = self.config.recall.recency
        newest = len(events) - 1
        term_scores: dict[tuple[str, ...], float] = {}
        snippet_scores: dict[str, float] = {}
        for i, event in enumerate(events):
            weight = recency ** (newest - i)
            for term in event.terms:
                term_scores[term.ngram] = term_scores.get(term.ngram, 0.0) + weight * term.score
            for result in event.results:
                snippet_scores[result.snippet_id] = (
                    snippet_scores.get(result.snippet_id, 0.0) + weight * result.score
                )
        stars: dict[str, list[int]] = {}
        for rating in ratings.values():
            stars.setdefault(rating.snippet_id, []).append(rating.stars)
        ranked_snippets = []
        for snippet_id, score in snippet_scores.items():
            snippet_stars = stars.get(snippet_id)
            mean_stars = sum(snippet_stars) / len(snippet_stars) if snippet_stars else None
            if mean_stars is not None:
                score += self.config.recall.rating_bonus * mean_stars
            ranked_snippets.append(SnippetRecall(snippet_id, score, mean_stars))
        ranked_snippets.sort(key=lambda s: (-s.score, s.snippet_id))
        ranked_terms = sorted(
            (TermRecall(ngram, score) for ngram, score in term_scores.items()),
            key=lambda t: (-t.score, t.ngram),
        )
        return RecallSummary(
            terms=tuple(ranked_terms[:top_n]),
            snippets=tuple(ranked_snippets[:top_n]),
        )
