import io
import json
import sys

import pytest

from convograph.cli import main
from convograph.engine import DEFAULT_FIXTURES_DIR


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(f"data_dir: {tmp_path / 'data'}\nseed: 99\n", encoding="utf-8")
    return str(path)


def run_cli(argv, stdin_text=None, capsys=None, monkeypatch=None):
    if stdin_text is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin_text))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_chat_scripted_session(config_file, capsys, monkeypatch):
    script = "let's chat about movies\n:seed 5\ni love frozen\n:quit\n"
    code, out, err = run_cli(["--config", config_file, "chat"], script, capsys, monkeypatch)
    assert code == 0
    assert "module=structured_topic" in out
    assert "topic=movies" in out
    assert "Frozen" in out


def test_chat_eof_exits_cleanly(config_file, capsys, monkeypatch):
    code, out, _ = run_cli(["--config", config_file, "chat"], "", capsys, monkeypatch)
    assert code == 0


def test_chat_invalid_fixture_path_names_it(tmp_path, capsys, monkeypatch):
    config = tmp_path / "config.yaml"
    config.write_text(f"fixtures_dir: {tmp_path / 'missing'}\n", encoding="utf-8")
    code, out, err = run_cli(["--config", str(config), "chat"], "", capsys, monkeypatch)
    assert code == 1
    assert "missing" in err


def test_eval_intents_tsv(config_file, capsys, monkeypatch, tmp_path):
    corpus = tmp_path / "toy.tsv"
    corpus.write_text(
        "".join(f"ga\talpha beta {i}\n" for i in range(6))
        + "".join(f"gb\tgamma delta {i}\n" for i in range(6)),
        encoding="utf-8",
    )
    code, out, _ = run_cli(
        ["--config", config_file, "eval-intents", "--method", "tfidf",
         "--corpus", str(corpus), "--folds", "3", "--format", "tsv"],
        None, capsys, monkeypatch,
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split("\t") == ["method", "accuracy", "correct", "total", "folds", "corpus_size"]
    method, accuracy, correct, total, folds, size = lines[1].split("\t")
    assert method == "tfidf"
    assert float(accuracy) == pytest.approx(int(correct) / int(total), abs=1e-6)
    assert (int(folds), int(size)) == (3, 12)


def test_eval_intents_duplicated_items_accuracy_one(config_file, capsys, monkeypatch, tmp_path):
    corpus = tmp_path / "dup.tsv"
    corpus.write_text(
        "".join("ga\tsame alpha text\n" for _ in range(6))
        + "".join("gb\tother beta text\n" for _ in range(6)),
        encoding="utf-8",
    )
    code, out, _ = run_cli(
        ["--config", config_file, "eval-intents", "--method", "tfidf",
         "--corpus", str(corpus), "--folds", "3", "--format", "tsv"],
        None, capsys, monkeypatch,
    )
    assert code == 0
    assert float(out.strip().splitlines()[1].split("\t")[1]) == 1.0


def test_eval_intents_single_label_errors(config_file, capsys, monkeypatch, tmp_path):
    corpus = tmp_path / "one.tsv"
    corpus.write_text("only\talpha\nonly\tbeta\n", encoding="utf-8")
    code, _, err = run_cli(
        ["--config", config_file, "eval-intents", "--method", "tfidf", "--corpus", str(corpus)],
        None, capsys, monkeypatch,
    )
    assert code == 1
    assert "two labels" in err


def test_eval_intents_table_shape(config_file, capsys, monkeypatch):
    code, out, _ = run_cli(
        ["--config", config_file, "eval-intents", "--method", "logreg"],
        None, capsys, monkeypatch,
    )
    assert code == 0
    assert "Method" in out and "Accuracy" in out
    assert "logreg" in out


def test_lint_clean_bundled_graphs(config_file, capsys, monkeypatch):
    code, out, _ = run_cli(["--config", config_file, "lint"], None, capsys, monkeypatch)
    assert code == 0
    assert "clean" in out


def test_lint_findings_exit_one(config_file, tmp_path, capsys, monkeypatch):
    bad_dir = tmp_path / "graphs"
    bad_dir.mkdir()
    (bad_dir / "bad.yaml").write_text(
        "topic: bad\ninitial: a\nstates:\n"
        "  - id: a\n    action: respond(t)\n"
        "  - id: orphan\n    action: respond(t)\n"
        "templates:\n  t: [['x']]\n",
        encoding="utf-8",
    )
    code, out, _ = run_cli(
        ["--config", config_file, "lint", "--dir", str(bad_dir)], None, capsys, monkeypatch
    )
    assert code == 1
    assert "unreachable" in out


def test_lint_unparsable_file_reported_and_continues(config_file, tmp_path, capsys, monkeypatch):
    bad_dir = tmp_path / "graphs"
    bad_dir.mkdir()
    (bad_dir / "broken.yaml").write_text("topic: [unclosed\n", encoding="utf-8")
    (bad_dir / "ok.yaml").write_text(
        "topic: ok\ninitial: a\nstates:\n  - id: a\n    action: respond(t)\n"
        "templates:\n  t: [['x']]\n",
        encoding="utf-8",
    )
    code, out, _ = run_cli(
        ["--config", config_file, "lint", "--dir", str(bad_dir)], None, capsys, monkeypatch
    )
    assert code == 1
    assert "broken.yaml" in out


def test_ingest_ok(config_file, capsys, monkeypatch):
    path = DEFAULT_FIXTURES_DIR / "knowledge" / "concepts.tsv"
    code, out, _ = run_cli(
        ["--config", config_file, "ingest", "concepts", str(path)], None, capsys, monkeypatch
    )
    assert code == 0
    assert "surfaces indexed" in out


def test_ingest_error_exit_one(config_file, tmp_path, capsys, monkeypatch):
    bad = tmp_path / "bad.tsv"
    bad.write_text("x\tfilm\t-5\n", encoding="utf-8")
    code, _, err = run_cli(
        ["--config", config_file, "ingest", "concepts", str(bad)], None, capsys, monkeypatch
    )
    assert code == 1
    assert "bad.tsv:1" in err


def test_ingest_normalized_output(config_file, tmp_path, capsys, monkeypatch):
    src = tmp_path / "src.tsv"
    src.write_text("frozen\tfilm\t500\nfrozen\tfilm\t400\n", encoding="utf-8")
    out_path = tmp_path / "normalized.tsv"
    code, _, _ = run_cli(
        ["--config", config_file, "ingest", "concepts", str(src), "--out", str(out_path)],
        None, capsys, monkeypatch,
    )
    assert code == 0
    assert out_path.read_text() == "frozen\tfilm\t900\n"


def test_stats_empty_store_header_only(config_file, capsys, monkeypatch):
    code, out, _ = run_cli(
        ["--config", config_file, "stats"], None, capsys, monkeypatch
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 1
    assert all(col in lines[0] for col in ("Rating", "Time", "Turns"))


def test_stats_synthetic_log(config_file, tmp_path, capsys, monkeypatch):
    data_dir = tmp_path / "data"
    logs = data_dir / "logs"
    logs.mkdir(parents=True)
    events = [
        {"kind": "turn", "ts": 100.0, "turn_counter": 1, "module": "structured_topic", "topic": "movies"},
        {"kind": "turn", "ts": 130.0, "turn_counter": 2, "module": "structured_topic", "topic": "movies"},
        {"kind": "turn", "ts": 150.0, "turn_counter": 3, "module": "chitchat", "topic": None},
        {"kind": "rating", "ts": 151.0, "stars": 4, "topics_visited": ["movies"]},
    ]
    (logs / "s1.jsonl").write_text("\n".join(json.dumps(e) for e in events) + "\n", encoding="utf-8")
    code, out, _ = run_cli(
        ["--config", config_file, "stats", "--format", "tsv"], None, capsys, monkeypatch
    )
    assert code == 0
    rows = dict(line.split("\t", 1) for line in out.strip().splitlines()[1:])
    rating, seconds, turns = rows["movies"].split("\t")
    assert float(rating) == 4.0
    assert float(seconds) == 30.0
    assert float(turns) == 2.0


def test_usage_error_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_eval_intents_chance_level_on_permuted_labels(config_file, capsys, monkeypatch, tmp_path):
    # chance-level oracle: random labels on a separable corpus give ~1/N accuracy
    import random

    rng = random.Random(7)
    words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"]
    lines = []
    for i in range(60):
        text = " ".join(rng.sample(words, 3)) + f" x{i}"
        label = rng.choice(["ga", "gb"])
        lines.append(f"{label}\t{text}")
    # keep both labels populated
    corpus = tmp_path / "chance.tsv"
    corpus.write_text("\n".join(lines) + "\n", encoding="utf-8")
    code, out, _ = run_cli(
        ["--config", config_file, "eval-intents", "--method", "tfidf",
         "--corpus", str(corpus), "--folds", "5", "--format", "tsv"],
        None, capsys, monkeypatch,
    )
    assert code == 0
    accuracy = float(out.strip().splitlines()[1].split("\t")[1])
    assert 0.25 <= accuracy <= 0.75  # two classes: chance is 0.5 +- noise


def test_repl_output_matches_service_responses(tmp_path, capsys, monkeypatch):
    # engine/service parity at the REPL surface: the bot> lines equal the
    # service's response fields for the same inputs and seed
    from convograph.engine import Engine, EngineConfig
    from convograph.service import ChatService

    script = ["let's chat about movies", "i love frozen", "yes please"]
    config = tmp_path / "config.yaml"
    config.write_text(f"data_dir: {tmp_path / 'repl'}\nseed: 404\n", encoding="utf-8")
    code, out, _ = run_cli(
        ["--config", str(config), "chat"], "\n".join(script) + "\n:quit\n", capsys, monkeypatch
    )
    assert code == 0
    # input()'s "you> " prompt has no trailing newline, so captured lines
    # look like "you> bot> <response>"
    repl_lines = [line.split("bot> ", 1)[1] for line in out.splitlines() if "bot> " in line]

    engine = Engine(EngineConfig(data_dir=tmp_path / "svc", seed=404))
    service = ChatService(engine)
    sid = service.create_session()["session_id"]
    service_lines = [service.post_turn(sid, {"text": t})["response"] for t in script]
    assert repl_lines == service_lines
