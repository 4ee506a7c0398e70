"""reqlens: live lexical-association assistant for requirements elicitation.

Ingests diarized conversation transcripts, matches the most recent window of
talk against an indexed domain repository, and surfaces scored relevant terms
plus ranked, classified document snippets for the analyst.
"""

__version__ = "0.1.0"

from reqlens.config import EngineConfig, ExtractionConfig, RetrievalConfig, WindowConfig
from reqlens.extraction import RelevantTerm, WindowState, build_window, extract_relevant_terms
from reqlens.index import Snippet, SnippetIndex, segment
from reqlens.ngram import NgramModel, count_ngrams
from reqlens.session import ExtractionEvent, Rating, SessionEngine, SessionState, Utterance
from reqlens.wfsa import Arc, SymbolTable, Wfsa

__all__ = [
    "Arc",
    "EngineConfig",
    "ExtractionConfig",
    "ExtractionEvent",
    "NgramModel",
    "Rating",
    "RelevantTerm",
    "RetrievalConfig",
    "SessionEngine",
    "SessionState",
    "Snippet",
    "SnippetIndex",
    "SymbolTable",
    "Utterance",
    "Wfsa",
    "WindowConfig",
    "WindowState",
    "build_window",
    "count_ngrams",
    "extract_relevant_terms",
    "segment",
]
