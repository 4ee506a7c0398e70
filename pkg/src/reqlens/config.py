"""Pipeline configuration, grouped per stage and JSON round-trippable."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace


@dataclass(frozen=True)
class WindowConfig:
    """Sliding conversation window limits."""

    token_budget: int = 200
    utterance_budget: int = 10
    min_tokens: int = 5  # below this, no extraction fires


@dataclass(frozen=True)
class ExtractionConfig:
    """Relevant-term extraction knobs."""

    max_order: int = 3
    top_k: int = 25
    min_df: int = 1


@dataclass(frozen=True)
class RetrievalConfig:
    """BM25 snippet retrieval parameters."""

    m: int = 10
    k1: float = 1.2
    b: float = 0.75


@dataclass(frozen=True)
class RecallConfig:
    """Session-recall aggregation: recency decay per event and rating bonus."""

    recency: float = 0.9
    rating_bonus: float = 0.5


@dataclass(frozen=True)
class EngineConfig:
    window: WindowConfig = field(default_factory=WindowConfig)
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    recall: RecallConfig = field(default_factory=RecallConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        sections = {}
        for section, section_cls in (
            ("window", WindowConfig),
            ("extraction", ExtractionConfig),
            ("retrieval", RetrievalConfig),
            ("recall", RecallConfig),
        ):
            known = {f.name for f in fields(section_cls)}
            raw = data.get(section, {})
            unknown = set(raw) - known
            if unknown:
                raise ValueError(f"unknown {section} config keys: {sorted(unknown)}")
            sections[section] = section_cls(**raw)
        return cls(**sections)

    def override(self, section: str, **changes) -> "EngineConfig":
        """Copy with some fields of one section replaced (flags over file)."""
        current = getattr(self, section)
        return replace(self, **{section: replace(current, **changes)})
