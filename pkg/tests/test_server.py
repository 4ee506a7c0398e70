"""Gateway tests: endpoint contracts, error mapping, SSE stream, replay harness."""

import json
import threading
import time

import httpx
import pytest
from fastapi.testclient import TestClient

from reqlens.server import create_app

UTTERANCE = {
    "speaker": "S1",
    "t_start_ms": 0,
    "t_end_ms": 2000,
    "text": "the payment gateway timeout should raise an alert",
    "confidence": 0.93,
}


@pytest.fixture()
def client(engine):
    with TestClient(create_app(engine), raise_server_exceptions=False) as test_client:
        yield test_client


def test_create_session_returns_201_and_id(client):
    response = client.post("/sessions")
    assert response.status_code == 201
    assert response.json()["session_id"]


def test_create_session_with_explicit_id_conflicts_on_duplicate(client):
    assert client.post("/sessions", json={"session_id": "s1"}).status_code == 201
    duplicate = client.post("/sessions", json={"session_id": "s1"})
    assert duplicate.status_code == 409
    body = duplicate.json()
    assert body["code"] == "conflict"
    assert "s1" in body["message"]


def test_post_utterance_returns_event_or_null(client):
    client.post("/sessions", json={"session_id": "s1"})
    quiet = client.post("/sessions/s1/utterances", json={**UTTERANCE, "text": "hi"})
    assert quiet.status_code == 200
    assert quiet.json() == {"utterance_id": 1, "event": None}

    loud = client.post("/sessions/s1/utterances", json=UTTERANCE)
    assert loud.status_code == 200
    event = loud.json()["event"]
    assert event is not None
    assert event["event_id"] == 1
    assert any(term["ngram"] == ["payment", "gateway"] for term in event["terms"])


def test_events_endpoint_filters_by_since(client):
    client.post("/sessions", json={"session_id": "s1"})
    client.post("/sessions/s1/utterances", json=UTTERANCE)
    client.post(
        "/sessions/s1/utterances",
        json={**UTTERANCE, "text": "refund requests go through the payment gateway"},
    )
    everything = client.get("/sessions/s1/events").json()["events"]
    assert [event["event_id"] for event in everything] == [1, 2]
    later = client.get("/sessions/s1/events", params={"since": 1}).json()["events"]
    assert [event["event_id"] for event in later] == [2]


def test_unknown_session_is_404_api_error(client):
    response = client.get("/sessions/ghost/events")
    assert response.status_code == 404
    assert response.json()["code"] == "not_found"


def test_validation_error_maps_to_400(client):
    client.post("/sessions", json={"session_id": "s1"})
    response = client.post("/sessions/s1/utterances", json={"speaker": "S1"})
    assert response.status_code == 400
    assert response.json()["code"] == "bad_request"


def test_rating_round_trip_and_errors(client):
    client.post("/sessions", json={"session_id": "s1"})
    event = client.post("/sessions/s1/utterances", json=UTTERANCE).json()["event"]
    snippet_id = event["results"][0]["snippet_id"]

    ok = client.put(
        "/sessions/s1/ratings",
        json={"event_id": 1, "snippet_id": snippet_id, "stars": 4},
    )
    assert ok.status_code == 200
    assert ok.json()["rating"]["stars"] == 4

    repeat = client.put(
        "/sessions/s1/ratings",
        json={"event_id": 1, "snippet_id": snippet_id, "stars": 2},
    )
    assert repeat.status_code == 200  # idempotent PUT, last write wins
    assert repeat.json()["rating"]["stars"] == 2

    missing = client.put(
        "/sessions/s1/ratings",
        json={"event_id": 42, "snippet_id": snippet_id, "stars": 4},
    )
    assert missing.status_code == 404
    bad_stars = client.put(
        "/sessions/s1/ratings",
        json={"event_id": 1, "snippet_id": snippet_id, "stars": 9},
    )
    assert bad_stars.status_code == 400


def test_recall_endpoint(client):
    client.post("/sessions", json={"session_id": "s1"})
    client.post("/sessions/s1/utterances", json=UTTERANCE)
    summary = client.get("/sessions/s1/recall", params={"top_n": 3}).json()
    assert len(summary["terms"]) <= 3
    assert summary["terms"][0]["score"] > 0


def test_snippet_endpoint_serves_provenance(client, payment_index):
    from urllib.parse import quote

    snippet_id = next(iter(payment_index.snippets))
    response = client.get(f"/snippets/{quote(snippet_id, safe='')}")
    assert response.status_code == 200
    body = response.json()
    assert body["snippet_id"] == snippet_id
    assert body["doc_id"]
    assert len(body["char_span"]) == 2
    assert client.get("/snippets/ghost.txt%230000").status_code == 404


def test_extraction_response_byte_identical_to_persisted_event(client, engine):
    client.post("/sessions", json={"session_id": "s1"})
    api_event = client.post("/sessions/s1/utterances", json=UTTERANCE).json()["event"]
    log_line = (engine.store_dir / "s1.log").read_text("utf-8").splitlines()[1]
    record = json.loads(log_line)
    assert record["kind"] == "event"
    persisted = {key: value for key, value in record.items() if key not in ("v", "kind")}
    canonical = lambda obj: json.dumps(obj, sort_keys=True, ensure_ascii=False)
    assert canonical(api_event) == canonical(persisted)


def test_stream_delivers_frames_and_resumes(engine, live_server_factory):
    server = live_server_factory(create_app(engine))
    with httpx.Client(base_url=server.base_url, timeout=10.0) as client:
        client.post("/sessions", json={"session_id": "s1"})
        client.post("/sessions/s1/utterances", json=UTTERANCE)

        # Backlog: utterance + extraction frames with sequence ids.
        frames = read_sse_frames(client, "/sessions/s1/stream", count=2)
        assert [f["event"] for f in frames] == ["utterance", "extraction"]
        assert [f["id"] for f in frames] == ["1", "2"]
        assert json.loads(frames[1]["data"])["kind"] == "event"

        # Live delivery: publish while a stream is open.
        results: list[dict] = []
        ready = threading.Event()

        def consume():
            with client.stream("GET", "/sessions/s1/stream", params={"since": 2}) as stream:
                ready.set()
                results.extend(parse_sse(stream, count=1))

        thread = threading.Thread(target=consume)
        thread.start()
        assert ready.wait(5)
        time.sleep(0.2)
        client.post(
            "/sessions/s1/utterances",
            json={**UTTERANCE, "text": "refund requests go through the payment gateway"},
        )
        thread.join(timeout=10)
        assert not thread.is_alive()
        assert results[0]["event"] == "utterance"
        assert results[0]["id"] == "3"

        # Resume with ?since replays exactly the missed frames, no duplicates.
        replayed = read_sse_frames(client, "/sessions/s1/stream?since=2", count=2)
        assert [f["id"] for f in replayed] == ["3", "4"]


def read_sse_frames(client: httpx.Client, url: str, count: int) -> list[dict]:
    with client.stream("GET", url) as stream:
        return parse_sse(stream, count)


def parse_sse(stream, count: int) -> list[dict]:
    frames = []
    current: dict = {}
    for line in stream.iter_lines():
        if line.startswith("id:"):
            current["id"] = line[3:].strip()
        elif line.startswith("event:"):
            current["event"] = line[6:].strip()
        elif line.startswith("data:"):
            current["data"] = line[5:].strip()
        elif not line and current:
            frames.append(current)
            current = {}
            if len(frames) >= count:
                return frames
    return frames


def test_replay_harness_in_process(engine, tmp_path):
    from reqlens.replay import replay_transcript

    transcript = tmp_path / "meeting.jsonl"
    rows = [
        {"speaker": "S1", "t_start_ms": 0, "t_end_ms": 900,
         "text": "the payment gateway timeout should raise an alert", "confidence": 0.9},
        {"speaker": "S2", "t_start_ms": 1000, "t_end_ms": 1800,
         "text": "refund requests go through the payment gateway"},
    ]
    transcript.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")

    with TestClient(create_app(engine)) as client:
        result = replay_transcript(transcript, client, session_id="replayed")
    assert result.session_id == "replayed"
    assert result.n_utterances == 2
    assert result.n_events == 2
    assert len(result.latencies_ms) == 2
    live = engine.get_session("replayed")
    assert [u.text for u in live.utterances] == [r["text"] for r in rows]


def test_replay_harness_reports_malformed_line(engine, tmp_path):
    from reqlens.replay import replay_transcript

    transcript = tmp_path / "broken.jsonl"
    transcript.write_text(
        json.dumps({"speaker": "S1", "t_start_ms": 0, "t_end_ms": 1, "text": "ok"})
        + "\n{broken json\n",
        encoding="utf-8",
    )
    with TestClient(create_app(engine)) as client:
        with pytest.raises(ValueError, match="line 2"):
            replay_transcript(transcript, client)


def test_replay_harness_scales_gaps(engine, tmp_path):
    from reqlens.replay import replay_transcript

    transcript = tmp_path / "gaps.jsonl"
    rows = [
        {"speaker": "S1", "t_start_ms": 0, "t_end_ms": 100, "text": "one two three"},
        {"speaker": "S1", "t_start_ms": 400, "t_end_ms": 500, "text": "four five six"},
        {"speaker": "S1", "t_start_ms": 800, "t_end_ms": 900, "text": "seven eight nine"},
    ]
    transcript.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")

    sleeps: list[float] = []
    with TestClient(create_app(engine)) as client:
        replay_transcript(transcript, client, speed_factor=2.0, sleep=sleeps.append)
    # 400 ms gaps halved by speed factor 2.0
    assert sleeps == pytest.approx([0.2, 0.2], abs=0.05)
