"""Record real gateway responses as JSON fixtures for the UI contract tests.

Spins up the gateway on an ephemeral port with the demo corpus and model,
drives a short session over HTTP (utterances from the demo transcript, one
rating), and captures the responses byte-for-byte as the dashboard would see
them.  Run from the repository root:

    python frontend/tools/record_fixtures.py
"""

from __future__ import annotations

import json
import socket
import sys
import tempfile
import threading
import time
from pathlib import Path

import httpx
import uvicorn

REPO_ROOT = Path(__file__).resolve().parents[2]
FIXTURE_DIR = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
SESSION_ID = "fixture-session"


def build_app(store_dir: str):
    from reqlens import classifier
    from reqlens.config import EngineConfig
    from reqlens.index import SnippetIndex
    from reqlens.server import create_app
    from reqlens.session import SessionEngine

    index = SnippetIndex.from_dir(REPO_ROOT / "demo" / "corpus")
    examples = classifier.read_training_csv(REPO_ROOT / "demo" / "training.csv")
    model = classifier.train(examples, classifier.Hyperparams(epochs=120, seed=7))
    ticker = iter(range(1_700_000_000_000, 1_700_000_100_000)).__next__
    engine = SessionEngine(index, model, EngineConfig(), store_dir=store_dir, clock=ticker)
    return create_app(engine)


def read_stream_frames(client: httpx.Client, url: str, count: int) -> list[dict]:
    frames: list[dict] = []
    current: dict = {}
    with client.stream("GET", url) as stream:
        for line in stream.iter_lines():
            if line.startswith("id:"):
                current["seq"] = int(line[3:].strip())
            elif line.startswith("event:"):
                current["event"] = line[6:].strip()
            elif line.startswith("data:"):
                current["record"] = json.loads(line[5:].strip())
            elif not line and current:
                frames.append(current)
                current = {}
                if len(frames) >= count:
                    return frames
    return frames


def main() -> int:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    port_probe = socket.socket()
    port_probe.bind(("127.0.0.1", 0))
    port = port_probe.getsockname()[1]
    port_probe.close()

    with tempfile.TemporaryDirectory() as store_dir:
        app = build_app(store_dir)
        server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error"))
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        while not server.started:
            time.sleep(0.02)

        base = f"http://127.0.0.1:{port}"
        with httpx.Client(base_url=base, timeout=30.0) as client:
            created = client.post("/sessions", json={"session_id": SESSION_ID}).json()
            assert created["session_id"] == SESSION_ID

            transcript = REPO_ROOT / "demo" / "transcript.jsonl"
            utterance_responses = []
            for line in transcript.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                response = client.post(
                    f"/sessions/{SESSION_ID}/utterances", json=json.loads(line)
                )
                response.raise_for_status()
                utterance_responses.append(response.json())

            events = client.get(f"/sessions/{SESSION_ID}/events").json()
            first_event = events["events"][0]
            rating = client.put(
                f"/sessions/{SESSION_ID}/ratings",
                json={
                    "event_id": first_event["event_id"],
                    "snippet_id": first_event["results"][0]["snippet_id"],
                    "stars": 5,
                },
            ).json()
            rating_conflicting = client.put(
                f"/sessions/{SESSION_ID}/ratings",
                json={
                    "event_id": first_event["event_id"],
                    "snippet_id": first_event["results"][0]["snippet_id"],
                    "stars": 2,
                },
            ).json()
            missing_rating = client.put(
                f"/sessions/{SESSION_ID}/ratings",
                json={"event_id": 9999, "snippet_id": "ghost#0000", "stars": 3},
            )
            recall = client.get(f"/sessions/{SESSION_ID}/recall", params={"top_n": 5}).json()

            snippet_ids = sorted(
                {
                    result["snippet_id"]
                    for event in events["events"]
                    for result in event["results"]
                }
            )
            snippets = {}
            for snippet_id in snippet_ids:
                from urllib.parse import quote

                response = client.get(f"/snippets/{quote(snippet_id, safe='')}")
                response.raise_for_status()
                snippets[snippet_id] = response.json()

            n_records = len(utterance_responses) + len(events["events"]) + 2  # + 2 ratings
            frames = read_stream_frames(client, f"/sessions/{SESSION_ID}/stream?since=0", n_records)

        server.should_exit = True
        thread.join(timeout=10)

    fixtures = {
        "session.json": created,
        "utterances.json": utterance_responses,
        "events.json": events,
        "rating.json": rating,
        "rating_overwrite.json": rating_conflicting,
        "rating_not_found.json": {
            "status": missing_rating.status_code,
            "body": missing_rating.json(),
        },
        "recall.json": recall,
        "snippets.json": snippets,
        "stream.json": frames,
    }
    for name, payload in fixtures.items():
        path = FIXTURE_DIR / name
        path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", "utf-8")
        print(f"wrote {path.relative_to(REPO_ROOT)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
