"""CLI tests: index, train, extract (offline), eval, replay subcommands."""

import json

import pytest

from reqlens.cli import main


@pytest.fixture()
def artifacts(tmp_path, corpus_dir, training_csv, capsys):
    """Index + model files built through the real CLI."""
    index_path = tmp_path / "corpus.elidx"
    model_path = tmp_path / "model.elimdl"
    assert main(["index", "--corpus-dir", str(corpus_dir), "--out", str(index_path)]) == 0
    assert main([
        "train", "--data", str(training_csv), "--out", str(model_path),
        "--epochs", "80", "--seed", "7",
    ]) == 0
    capsys.readouterr()
    return index_path, model_path


def test_index_reports_snippet_count(tmp_path, corpus_dir, capsys):
    out = tmp_path / "corpus.elidx"
    assert main(["index", "--corpus-dir", str(corpus_dir), "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "indexed" in stdout
    assert out.exists()


def test_index_missing_directory_fails(tmp_path, capsys):
    code = main(["index", "--corpus-dir", str(tmp_path / "ghost"), "--out", str(tmp_path / "x")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_train_and_eval(artifacts, training_csv, capsys):
    _, model_path = artifacts
    assert main(["eval", "--model", str(model_path), "--data", str(training_csv)]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["accuracy"] >= 0.9


def test_extract_writes_deterministic_report(artifacts, tmp_path, capsys):
    index_path, model_path = artifacts
    doc = tmp_path / "existing-spec.txt"
    doc.write_text(
        "The payment gateway shall retry failed transactions. "
        "Each timeout must raise an alert for the operations team. "
        "Reports are exported monthly as CSV files.",
        encoding="utf-8",
    )
    outputs = []
    for run in range(2):
        out = tmp_path / f"report{run}.json"
        code = main([
            "extract", "--index", str(index_path), "--model", str(model_path),
            "--input", str(doc), "--out", str(out),
        ])
        assert code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]  # byte-identical across runs
    report = json.loads(outputs[0])
    assert report["n_windows"] >= 1
    all_terms = [
        " ".join(term["ngram"]) for window in report["windows"] for term in window["terms"]
    ]
    assert "payment gateway" in all_terms
    top_window = next(w for w in report["windows"] if w["terms"])
    assert top_window["results"], "expected at least one retrieved snippet"


def test_extract_no_overlap_exits_zero(artifacts, tmp_path, capsys):
    index_path, model_path = artifacts
    doc = tmp_path / "offtopic.txt"
    doc.write_text("Quantum entanglement excites laboratory physicists.", encoding="utf-8")
    code = main([
        "extract", "--index", str(index_path), "--model", str(model_path),
        "--input", str(doc),
    ])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert all(not window["terms"] for window in report["windows"])


def test_extract_empty_document_exits_zero(artifacts, tmp_path, capsys):
    index_path, model_path = artifacts
    doc = tmp_path / "empty.txt"
    doc.write_text("", encoding="utf-8")
    assert main([
        "extract", "--index", str(index_path), "--model", str(model_path),
        "--input", str(doc),
    ]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report == {"n_sentences": 0, "n_windows": 0, "windows": []}


def test_extract_missing_index_exits_nonzero(artifacts, tmp_path, capsys):
    _, model_path = artifacts
    doc = tmp_path / "doc.txt"
    doc.write_text("anything", encoding="utf-8")
    code = main([
        "extract", "--index", str(tmp_path / "missing.elidx"), "--model", str(model_path),
        "--input", str(doc),
    ])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_replay_in_process(artifacts, tmp_path, capsys):
    index_path, model_path = artifacts
    transcript = tmp_path / "meeting.jsonl"
    rows = [
        {"speaker": "S1", "t_start_ms": 0, "t_end_ms": 900,
         "text": "the payment gateway timeout should raise an alert"},
        {"speaker": "S2", "t_start_ms": 1000, "t_end_ms": 1900,
         "text": "refund requests go through the payment gateway"},
    ]
    transcript.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    code = main([
        "replay", "--transcript", str(transcript),
        "--index", str(index_path), "--model", str(model_path),
        "--data-dir", str(tmp_path / "sessions"), "--speed-factor", "0",
    ])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "2 utterances" in stdout
    assert "append latency" in stdout


def test_replay_requires_target(capsys, tmp_path):
    transcript = tmp_path / "t.jsonl"
    transcript.write_text("", encoding="utf-8")
    with pytest.raises(SystemExit):
        main(["replay", "--transcript", str(transcript)])


def test_config_file_with_flag_override(artifacts, tmp_path, capsys):
    index_path, model_path = artifacts
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"extraction": {"top_k": 2}}), encoding="utf-8")
    doc = tmp_path / "doc.txt"
    doc.write_text(
        "The payment gateway shall retry failed transactions after a timeout alert.",
        encoding="utf-8",
    )
    assert main([
        "extract", "--index", str(index_path), "--model", str(model_path),
        "--input", str(doc), "--config", str(config_path),
    ]) == 0
    report = json.loads(capsys.readouterr().out)
    assert all(len(w["terms"]) <= 2 for w in report["windows"])

    assert main([
        "extract", "--index", str(index_path), "--model", str(model_path),
        "--input", str(doc), "--config", str(config_path), "--top-k", "5",
    ]) == 0
    report = json.loads(capsys.readouterr().out)
    assert any(len(w["terms"]) > 2 for w in report["windows"])
