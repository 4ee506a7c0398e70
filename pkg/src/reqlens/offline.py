"""Offline extraction: slide the conversation window across an existing
document and report relevant terms plus ranked, classified snippets per
window.  Lets an analyst mine a written spec with the same pipeline that
serves live meetings.  Output is deterministic: same inputs, same bytes.
"""

from __future__ import annotations

import json
from typing import Sequence

from reqlens import classifier
from reqlens.config import EngineConfig
from reqlens.extraction import build_window, extract_relevant_terms
from reqlens.index import SnippetIndex
from reqlens.text import sentence_spans


def run_offline_extraction(
    index: SnippetIndex,
    model: classifier.ModelArtifact,
    doc_text: str,
    config: EngineConfig | None = None,
) -> dict:
    """Per-window extraction report over a document.

    Sentences play the role of utterances: the window advances one sentence
    at a time under the same window config the live pipeline uses, and each
    window at or above the token floor contributes one report entry.
    """
    config = config or EngineConfig()
    sentences = [doc_text[start:end] for start, end in sentence_spans(doc_text)]
    numbered = list(enumerate(sentences, start=1))
    windows = []
    for i in range(len(numbered)):
        window = build_window(numbered[: i + 1], config.window)
        if len(window.tokens) < config.window.min_tokens:
            continue
        terms = extract_relevant_terms(window, index, config.extraction)
        retrieval = config.retrieval
        hits = index.retrieve(terms, retrieval.m, retrieval.k1, retrieval.b) if terms else []
        results = []
        for snippet, score in hits:
            label, decisions = classifier.predict(model, snippet.text)
            results.append(
                {
                    "snippet_id": snippet.snippet_id,
                    "score": score,
                    "label": label,
                    "decisions": decisions,
                }
            )
        windows.append(
            {
                "trigger_sentence": i + 1,
                "window_sentences": list(window.utterance_ids),
                "terms": [term.to_dict() for term in terms],
                "results": results,
            }
        )
    return {
        "n_sentences": len(sentences),
        "n_windows": len(windows),
        "windows": windows,
    }


def report_to_json(report: dict) -> str:
    """Canonical JSON bytes for the report (stable across runs)."""
    return json.dumps(report, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def render_summary(report: dict, max_windows: int = 10) -> str:
    """Short human-readable digest of an extraction report."""
    lines = [
        f"document: {report['n_sentences']} sentences, "
        f"{report['n_windows']} windows extracted"
    ]
    shown = 0
    for window in report["windows"]:
        if not window["terms"]:
            continue
        if shown >= max_windows:
            lines.append("  ...")
            break
        shown += 1
        top_terms = ", ".join(" ".join(t["ngram"]) for t in window["terms"][:5])
        lines.append(f"  window @ sentence {window['trigger_sentence']}: {top_terms}")
        for result in window["results"][:2]:
            lines.append(
                f"    [{result['label']}] {result['snippet_id']} "
                f"(score {result['score']:.3f})"
            )
    if shown == 0:
        lines.append("  no repository overlap found")
    return "\n".join(lines) + "\n"
