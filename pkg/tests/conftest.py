"""Shared fixtures: a small domain corpus, a trained model, live servers."""

from __future__ import annotations

import socket
import threading
import time
from pathlib import Path

import pytest

from reqlens import classifier
from reqlens.config import EngineConfig
from reqlens.index import SnippetIndex
from reqlens.session import SessionEngine

PAYMENT_CORPUS = [
    (
        "payments.txt",
        "The payment gateway shall retry failed transactions up to three times.\n"
        "\n"
        "A payment gateway timeout must raise an alert within five seconds.\n"
        "\n"
        "Refund requests are processed through the same payment gateway.\n",
    ),
    (
        "accounts.txt",
        "Users shall authenticate with a password and a second factor.\n"
        "\n"
        "Account lockout occurs after five failed login attempts.\n",
    ),
    (
        "reports.txt",
        "Monthly settlement reports can be exported as CSV files.\n"
        "\n"
        "Report generation must finish within two minutes.\n",
    ),
]

TRAINING_ROWS = [
    ("F", "the system shall process card payments and refunds"),
    ("F", "users can export monthly reports to csv"),
    ("F", "the gateway shall retry failed transactions"),
    ("F", "operators can search the transaction history"),
    ("availability", "the service must be available twenty four seven"),
    ("availability", "planned downtime must not exceed one hour per month"),
    ("performance", "checkout must complete within two seconds"),
    ("performance", "the system must handle one thousand concurrent users"),
    ("security", "all passwords must be stored encrypted"),
    ("security", "sessions must expire after fifteen minutes of inactivity"),
    ("usability", "the interface must be usable without training"),
    ("usability", "error messages must suggest a corrective action"),
]


@pytest.fixture(scope="session")
def payment_index() -> SnippetIndex:
    return SnippetIndex.ingest_corpus(PAYMENT_CORPUS)


@pytest.fixture(scope="session")
def trained_model() -> classifier.ModelArtifact:
    examples = [(text, label) for label, text in TRAINING_ROWS]
    return classifier.train(examples, classifier.Hyperparams(epochs=80, seed=7))


@pytest.fixture()
def engine(payment_index, trained_model, tmp_path) -> SessionEngine:
    ticker = iter(range(1_000_000, 9_000_000)).__next__
    return SessionEngine(
        payment_index,
        trained_model,
        EngineConfig(),
        store_dir=tmp_path / "sessions",
        clock=lambda: ticker(),
    )


def free_port() -> int:
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    return port


class LiveServer:
    """A uvicorn server on an ephemeral port, stopped on context exit."""

    def __init__(self, app):
        import uvicorn

        self.port = free_port()
        self.base_url = f"http://127.0.0.1:{self.port}"
        config = uvicorn.Config(app, host="127.0.0.1", port=self.port, log_level="error")
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    def __enter__(self) -> "LiveServer":
        self._thread.start()
        deadline = time.time() + 10
        while not self._server.started:
            if time.time() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.02)
        return self

    def __exit__(self, *exc) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)


@pytest.fixture()
def live_server_factory():
    servers: list[LiveServer] = []

    def start(app) -> LiveServer:
        server = LiveServer(app).__enter__()
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.__exit__()


@pytest.fixture()
def corpus_dir(tmp_path) -> Path:
    root = tmp_path / "corpus"
    root.mkdir()
    for doc_id, text in PAYMENT_CORPUS:
        (root / doc_id).write_text(text, encoding="utf-8")
    return root


@pytest.fixture()
def training_csv(tmp_path) -> Path:
    path = tmp_path / "training.csv"
    lines = ["label,text"]
    for label, text in TRAINING_ROWS:
        lines.append(f'{label},"{text}"')
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
