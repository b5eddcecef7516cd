import io
import json
import re

import pandas as pd
import pytest

from tanglish.common.clean import CleanRules
from tanglish.common.corpus import load_tsv
from tanglish.oli.checkpoint import load_checkpoint
from tanglish.oli.cli import main
from tanglish.oli.config import (
    CHECKPOINT_FILENAME,
    COMPARISON_FILENAME,
    HISTORY_FILENAME,
    SCORES_FILENAME,
    STATS_FILENAME,
    TRAIN_CORPUS_FILENAME,
    VOCAB_FILENAME,
)

from . import helper

LEARNING_FLAGS = ["--epochs", "30", "--lr", "0.002", "--dropout", "0", "--encoder-dropout", "0", "--no-balance"]


def _read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    root = tmp_path_factory.mktemp("trained")
    train_path = helper.write_raw_tsv(root / "raw-train.tsv", helper.separable_rows(64))
    out = root / "out"
    assert main(["prepare", "--train-paths", str(train_path), "--output-dir", str(out)]) == 0
    assert main(["train", "--output-dir", str(out)] + LEARNING_FLAGS) == 0
    return train_path, out


def test_prepare_drops_nan_rows(tmp_path):
    rows = [("1", "padam super", "NOT"), ("2", "nan", "HOF"), ("3", "vera level", "HOF")]
    train_path = helper.write_raw_tsv(tmp_path / "raw.tsv", rows)
    out = tmp_path / "out"
    assert main(["prepare", "--train-paths", str(train_path), "--output-dir", str(out), "--vocab-min-freq", "1"]) == 0
    stats = _read_json(out / STATS_FILENAME)
    assert stats["train"]["rows_in"] == 3
    assert stats["train"]["rows_out"] == 2
    assert stats["train"]["class_counts"] == {"NOT": 1, "HOF": 1}
    assert stats["config"]["seed"] == 111
    assert stats["vocab_size"] > 4
    assert (out / "log.txt").is_file()


def test_prepare_counts_match_training_rows(tmp_path):
    rows = [("1", "Nan!", "HOF"), ("2", "NAN", "NOT"), ("3", "padam super", "NOT"), ("4", "vera level", "HOF")]
    train_path = helper.write_raw_tsv(tmp_path / "raw.tsv", rows)
    out = tmp_path / "out"
    assert main(["prepare", "--train-paths", str(train_path), "--output-dir", str(out), "--vocab-min-freq", "1"]) == 0
    stats = _read_json(out / STATS_FILENAME)
    assert stats["train"]["rows_out"] == 2
    prepared = pd.read_csv(out / TRAIN_CORPUS_FILENAME, sep="\t", dtype=str, keep_default_na=False)
    assert len(prepared) == 2
    reloaded = load_tsv(out / TRAIN_CORPUS_FILENAME, "text", "category", "id", ("NOT", "HOF"), CleanRules())
    assert len(reloaded) == 2


def test_prepare_reports_balanced_counts(tmp_path):
    rows = [(str(i), f"text {i}", "A") for i in range(10)] + [(str(10 + i), f"other {i}", "B") for i in range(4)]
    train_path = helper.write_raw_tsv(tmp_path / "raw.tsv", rows)
    out = tmp_path / "out"
    argv = ["prepare", "--train-paths", str(train_path), "--output-dir", str(out), "--label-names", "A", "B"]
    assert main(argv) == 0
    stats = _read_json(out / STATS_FILENAME)
    assert stats["train"]["class_counts"] == {"A": 10, "B": 4}
    assert stats["train"]["balanced_class_counts"] == {"A": 10, "B": 10}


def test_prepare_missing_file(tmp_path, capsys):
    assert main(["prepare", "--train-paths", str(tmp_path / "missing.tsv"), "--output-dir", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_prepare_without_train_paths(tmp_path):
    assert main(["prepare", "--output-dir", str(tmp_path)]) == 2


def test_train_without_vocab(tmp_path, capsys):
    assert main(["train", "--output-dir", str(tmp_path)]) == 2
    assert "vocab not found" in capsys.readouterr().err


def test_train_zero_epochs(tmp_path):
    train_path = helper.write_raw_tsv(tmp_path / "raw.tsv", helper.separable_rows(16))
    out = tmp_path / "out"
    assert main(["prepare", "--train-paths", str(train_path), "--output-dir", str(out)]) == 0
    assert main(["train", "--output-dir", str(out), "--epochs", "0"]) == 0
    ckpt = load_checkpoint(out / CHECKPOINT_FILENAME)
    assert ckpt.history == []
    assert ckpt.epochs_completed == 0
    assert _read_json(out / HISTORY_FILENAME)["history"] == []


def test_train_learns(trained):
    _, out = trained
    history = _read_json(out / HISTORY_FILENAME)
    assert len(history["history"]) == 30
    assert history["config"]["lr"] == 0.002
    assert history["history"][-1]["train"]["f1"] >= 0.95
    assert load_checkpoint(out / CHECKPOINT_FILENAME).epochs_completed == 30


def test_eval_on_training_file(trained, capsys):
    train_path, out = trained
    assert main(["eval", "--output-dir", str(out), "--test-path", str(train_path)]) == 0
    scores = _read_json(out / SCORES_FILENAME)
    assert scores["weighted"]["f1"] >= 0.95
    assert scores["total"] == 64
    assert scores["confusion"]["labels"] == ["NOT", "HOF"]
    assert "W-F1 Score" in capsys.readouterr().out


def test_eval_empty_test_file(trained, tmp_path, capsys):
    _, out = trained
    empty = tmp_path / "empty.tsv"
    empty.write_text("", encoding="utf-8")
    assert main(["eval", "--output-dir", str(out), "--test-path", str(empty)]) == 3
    assert "DataError" in capsys.readouterr().err


def test_eval_label_mismatch(trained, capsys):
    train_path, out = trained
    argv = ["eval", "--output-dir", str(out), "--test-path", str(train_path), "--label-names", "A", "B"]
    assert main(argv) == 2
    assert "SchemaError" in capsys.readouterr().err


def test_predict_file(trained, tmp_path):
    _, out = trained
    rows = [("a", "vera level bad1 mass", "HOF"), ("b", "padam super", "NOT"), ("c", "padam super", "NOT")]
    input_path = helper.write_raw_tsv(tmp_path / "input.tsv", rows)
    output_path = tmp_path / "pred.tsv"
    argv = ["predict", "--output-dir", str(out), "--input", str(input_path), "--output", str(output_path)]
    assert main(argv) == 0

    lines = output_path.read_text(encoding="utf-8").splitlines()
    assert lines[0].split("\t") == ["id", "label", "prob_NOT", "prob_HOF"]
    for line in lines[1:]:
        for value in line.split("\t")[2:]:
            assert re.fullmatch(r"\d\.\d{6}", value)
    assert lines[2].split("\t")[1:] == lines[3].split("\t")[1:]

    df = pd.read_csv(output_path, sep="\t", dtype={"id": str})
    assert df["id"].tolist() == ["a", "b", "c"]
    assert df["label"].tolist() == ["HOF", "NOT", "NOT"]
    for _, row in df.iterrows():
        assert row["label"] == ("NOT" if row["prob_NOT"] >= row["prob_HOF"] else "HOF")


def test_predict_stdin(trained, monkeypatch, capsys):
    _, out = trained
    monkeypatch.setattr("sys.stdin", io.StringIO("semma bad1 song\nthalaiva waiting\n"))
    assert main(["predict", "--output-dir", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.split("\t")[:2] for line in lines[1:]] == [["1", "HOF"], ["2", "NOT"]]


def test_experiment(tmp_path, capsys):
    train_path = helper.write_raw_tsv(tmp_path / "raw.tsv", helper.separable_rows(16))
    out = tmp_path / "out"
    argv = ["experiment", "--train-paths", str(train_path), "--test-path", str(train_path), "--output-dir", str(out)]
    assert main(argv + ["--epochs", "1"]) == 0
    for name in (STATS_FILENAME, CHECKPOINT_FILENAME, HISTORY_FILENAME, SCORES_FILENAME):
        assert (out / name).is_file()
    assert "=== Testing ===" in capsys.readouterr().out


def test_experiment_compare(tmp_path, capsys):
    train_path = helper.write_raw_tsv(tmp_path / "raw.tsv", helper.separable_rows(16))
    out = tmp_path / "out"
    argv = ["experiment", "--compare", "--train-paths", str(train_path), "--test-path", str(train_path)]
    assert main(argv + ["--output-dir", str(out), "--epochs", "1"]) == 0

    variants = ["attention-balanced", "attention-unbalanced", "mean-balanced", "mean-unbalanced"]
    for name in variants:
        assert (out / name / CHECKPOINT_FILENAME).is_file()
        assert (out / name / SCORES_FILENAME).is_file()
    assert _read_json(out / "mean-unbalanced" / HISTORY_FILENAME)["config"]["pooler_kind"] == "mean"
    assert not _read_json(out / "mean-unbalanced" / HISTORY_FILENAME)["config"]["balance"]

    comparison = _read_json(out / COMPARISON_FILENAME)
    assert sorted(comparison["runs"]) == sorted(f"{name} {split}" for name in variants for split in ("train", "test"))
    for run in comparison["runs"].values():
        assert run["total"] == 16
        assert 0.0 <= run["weighted"]["f1"] <= 1.0

    table = capsys.readouterr().out.split("=== Comparison ===")[-1]
    assert "Model" in table
    assert "W-F1 Score" in table
    assert "mean-unbalanced test" in table


def test_global_seed_and_config(tmp_path):
    train_path = helper.write_raw_tsv(tmp_path / "raw.tsv", helper.separable_rows(16))
    config_path = tmp_path / "config.yml"
    config_path.write_text(f"train_paths: [{train_path}]\nseed: 9\nepochs: 2\n", encoding="utf-8")

    out = tmp_path / "out"
    assert main(["--seed", "5", "prepare", "--train-paths", str(train_path), "--output-dir", str(out)]) == 0
    assert _read_json(out / STATS_FILENAME)["config"]["seed"] == 5

    argv = ["--config", str(config_path), "prepare", "--output-dir", str(out)]
    assert main(argv) == 0
    stats = _read_json(out / STATS_FILENAME)
    assert stats["config"]["seed"] == 9
    assert stats["config"]["epochs"] == 2

    assert main(["--config", str(config_path), "--seed", "5", "prepare", "--output-dir", str(out), "--seed", "7"]) == 0
    assert _read_json(out / STATS_FILENAME)["config"]["seed"] == 7


def _run_pipeline(train_path, out):
    argv = ["prepare", "--train-paths", str(train_path), "--test-path", str(train_path), "--output-dir", str(out)]
    assert main(argv) == 0
    assert main(["train", "--output-dir", str(out), "--epochs", "2", "--seed", "3"]) == 0
    assert main(["eval", "--output-dir", str(out), "--test-path", str(train_path)]) == 0
    argv = ["predict", "--output-dir", str(out), "--input", str(train_path), "--output", str(out / "pred.tsv")]
    assert main(argv) == 0


def _without_output_dir(path):
    data = _read_json(path)
    del data["config"]["output_dir"]
    return data


def test_pipeline_deterministic(tmp_path):
    train_path = helper.write_raw_tsv(tmp_path / "raw.tsv", helper.separable_rows(24))
    first, second = tmp_path / "first", tmp_path / "second"
    _run_pipeline(train_path, first)
    _run_pipeline(train_path, second)

    for name in (CHECKPOINT_FILENAME, "pred.tsv", TRAIN_CORPUS_FILENAME, VOCAB_FILENAME):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name
    for name in (STATS_FILENAME, HISTORY_FILENAME, SCORES_FILENAME):
        assert _without_output_dir(first / name) == _without_output_dir(second / name), name
