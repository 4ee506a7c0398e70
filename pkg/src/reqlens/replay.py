"""Transcript replay: feed a recorded diarized transcript through the HTTP
API as if it were spoken live, honoring inter-utterance gaps.

Transcript files are line-delimited JSON records:
``{"speaker": "S1", "t_start_ms": 0, "t_end_ms": 1200, "text": "...",
"confidence": 0.93}`` (confidence optional).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import httpx

REQUIRED_FIELDS = ("speaker", "t_start_ms", "t_end_ms", "text")


@dataclass
class ReplayResult:
    session_id: str
    n_utterances: int = 0
    n_events: int = 0
    latencies_ms: list[float] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)

    def percentile(self, q: float) -> float:
        """Nearest-rank percentile of the per-utterance latencies."""
        if not self.latencies_ms:
            return 0.0
        ordered = sorted(self.latencies_ms)
        rank = max(1, int(round(q / 100.0 * len(ordered))))
        return ordered[min(rank, len(ordered)) - 1]


def parse_transcript(path: str | Path) -> list[dict]:
    """Read and validate a transcript file; errors name the offending line."""
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: malformed record ({exc.msg})") from exc
            missing = [key for key in REQUIRED_FIELDS if key not in record]
            if missing:
                raise ValueError(f"{path}: line {lineno}: missing fields {missing}")
            records.append(record)
    return records


def replay_transcript(
    transcript_path: str | Path,
    client: httpx.Client,
    speed_factor: float = 0.0,
    session_id: str | None = None,
    sleep=time.sleep,
) -> ReplayResult:
    """POST every transcript utterance to a gateway, timing each call.

    `client` is any httpx-compatible client bound to the gateway (a network
    client or an in-process ASGI test client).  Gaps between utterance start
    times are divided by `speed_factor`; 0 replays as fast as possible.
    """
    records = parse_transcript(transcript_path)
    body: dict = {"session_id": session_id} if session_id else {}
    response = client.post("/sessions", json=body)
    response.raise_for_status()
    result = ReplayResult(session_id=response.json()["session_id"])

    previous_start: int | None = None
    for record in records:
        if speed_factor > 0.0 and previous_start is not None:
            gap_s = max(0, record["t_start_ms"] - previous_start) / 1000.0 / speed_factor
            if gap_s > 0:
                sleep(gap_s)
        previous_start = record["t_start_ms"]
        started = time.perf_counter()
        response = client.post(f"/sessions/{result.session_id}/utterances", json=record)
        response.raise_for_status()
        result.latencies_ms.append((time.perf_counter() - started) * 1000.0)
        result.n_utterances += 1
        event = response.json()["event"]
        if event is not None:
            result.n_events += 1
            result.events.append(event)
    return result
