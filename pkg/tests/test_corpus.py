from collections import Counter

import pytest

from tanglish.common.clean import CleanRules
from tanglish.common.corpus import (
    LabeledCorpus,
    LabeledExample,
    balance,
    batch_indices,
    batches,
    concat,
    load_tsv,
    load_tsv_with_stats,
    read_tsv,
    uniform_sample,
    undersample,
    write_tsv,
)
from tanglish.common.errors import DataError, SchemaError

from . import helper

RULES = CleanRules()


def _corpus(counts, label_names=("A", "B")) -> LabeledCorpus:
    examples = []
    for label, count in enumerate(counts):
        for i in range(count):
            examples.append(LabeledExample(f"{label_names[label]}{i}", f"text {label} {i}", label))
    return LabeledCorpus(tuple(examples), tuple(label_names))


def _load(path, label_names=("NOT", "HOF")) -> LabeledCorpus:
    return load_tsv(path, "text", "category", "id", label_names, RULES)


def test_load_tsv(tmp_path):
    rows = [("7", "Vera LEVEL!!", "NOT"), ("8", "Semma @user mass", "HOF")]
    path = helper.write_raw_tsv(tmp_path / "train.tsv", rows)
    corpus = _load(path)
    assert len(corpus) == 2
    assert corpus.texts == ["vera level", "semma mass"]
    assert corpus.labels == [0, 1]
    assert [e.id for e in corpus] == ["7", "8"]
    assert corpus.class_counts == [1, 1]


def test_load_tsv_drops_rows(tmp_path):
    rows = [
        ("1", "padam super", "NOT"),
        ("2", "nan", "HOF"),
        ("3", "NaN", "NOT"),
        ("4", "", "NOT"),
        ("5", "😀 !!! the", "HOF"),
        ("6", "mass", ""),
        ("7", "vera level", "HOF"),
    ]
    path = helper.write_raw_tsv(tmp_path / "train.tsv", rows)
    corpus, stats = load_tsv_with_stats(path, "text", "category", "id", ("NOT", "HOF"), RULES)
    assert [e.id for e in corpus] == ["1", "7"]
    assert stats.rows_in == 7
    assert stats.rows_out == 2
    assert stats.dropped_nan_text == 3
    assert stats.dropped_empty_after_cleaning == 1
    assert stats.dropped_missing_label == 1


def test_load_tsv_drops_nan_in_any_case(tmp_path):
    rows = [("1", "Nan!", "HOF"), ("2", "NAN", "NOT"), ("3", "padam super", "NOT"), ("4", "vera level", "HOF")]
    path = helper.write_raw_tsv(tmp_path / "train.tsv", rows)
    corpus, stats = load_tsv_with_stats(path, "text", "category", "id", ("NOT", "HOF"), RULES)
    assert [e.id for e in corpus] == ["3", "4"]
    assert stats.rows_out == 2
    assert stats.dropped_nan_text == 2
    write_tsv(tmp_path / "prepared.tsv", corpus)
    assert len(_load(tmp_path / "prepared.tsv")) == stats.rows_out


def test_load_tsv_without_id_column(tmp_path):
    path = helper.write_raw_tsv(tmp_path / "t.tsv", [("padam", "NOT"), ("mass", "HOF")], header=("text", "category"))
    corpus = _load(path)
    assert [e.id for e in corpus] == ["1", "2"]


def test_load_tsv_crlf(tmp_path):
    path = tmp_path / "crlf.tsv"
    path.write_bytes("id\ttext\tcategory\r\n1\tpadam super\tNOT\r\n2\tvera level\tHOF\r\n".encode("utf-8"))
    corpus = _load(path)
    assert corpus.texts == ["padam super", "vera level"]
    assert corpus.labels == [0, 1]


def test_load_tsv_unknown_label(tmp_path):
    path = helper.write_raw_tsv(tmp_path / "t.tsv", [("1", "padam", "NOT"), ("2", "mass", "OFF")])
    with pytest.raises(DataError, match="Row 3"):
        _load(path)


def test_load_tsv_missing_column(tmp_path):
    path = helper.write_raw_tsv(tmp_path / "t.tsv", [("1", "padam")], header=("id", "text"))
    with pytest.raises(SchemaError):
        _load(path)


def test_load_tsv_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        _load(tmp_path / "missing.tsv")


def test_read_tsv_empty_file(tmp_path):
    path = tmp_path / "empty.tsv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(DataError):
        read_tsv(path)


def test_write_tsv(tmp_path):
    corpus = helper.separable_corpus(10)
    path = tmp_path / "out.tsv"
    write_tsv(path, corpus)
    reloaded = _load(path)
    assert reloaded.texts == corpus.texts
    assert reloaded.labels == corpus.labels
    assert [e.id for e in reloaded] == [e.id for e in corpus]


def test_corpus_rejects_bad_label():
    with pytest.raises(DataError):
        LabeledCorpus((LabeledExample("1", "x", 2),), ("A", "B"))


def test_concat():
    joined = concat(_corpus([3, 1]), _corpus([2, 2]))
    assert joined.counts_by_name() == {"A": 5, "B": 3}
    empty = LabeledCorpus((), ("A", "B"))
    x = _corpus([3, 1])
    assert concat(x, empty) == x
    with pytest.raises(SchemaError):
        concat(x, _corpus([1, 1], ("X", "Y")))


def test_uniform_sample():
    c = _corpus([10, 4])
    balanced = uniform_sample(c, seed=111)
    assert balanced.counts_by_name() == {"A": 10, "B": 10}
    assert len(balanced) == 20
    assert not Counter(c.examples) - Counter(balanced.examples)


def test_uniform_sample_balanced_input():
    c = _corpus([5, 5])
    balanced = uniform_sample(c, seed=1)
    assert Counter(balanced.examples) == Counter(c.examples)


def test_uniform_sample_deterministic():
    c = _corpus([17, 5])
    a = uniform_sample(c, seed=42)
    b = uniform_sample(c, seed=42)
    other = uniform_sample(c, seed=43)
    assert a.examples == b.examples
    assert other.class_counts == a.class_counts
    assert other.examples != a.examples


def test_uniform_sample_three_classes():
    balanced = uniform_sample(_corpus([7, 2, 1], ("A", "B", "C")), seed=9)
    assert max(balanced.class_counts) - min(balanced.class_counts) == 0


def test_uniform_sample_empty_class():
    with pytest.raises(DataError):
        uniform_sample(_corpus([3, 0]), seed=1)


def test_undersample():
    c = _corpus([10, 4])
    reduced = undersample(c, seed=5)
    assert reduced.counts_by_name() == {"A": 4, "B": 4}
    assert not Counter(reduced.examples) - Counter(c.examples)
    assert len(set(reduced.examples)) == 8
    assert undersample(c, seed=5).examples == reduced.examples


def test_balance_strategy():
    c = _corpus([6, 2])
    assert balance(c, "oversample", 1).class_counts == [6, 6]
    assert balance(c, "undersample", 1).class_counts == [2, 2]
    with pytest.raises(SchemaError):
        balance(c, "smote", 1)


@pytest.mark.parametrize("n,batch_size,sizes", [(20, 8, [8, 8, 4]), (5, 8, [5]), (8, 8, [8]), (0, 4, [])])
def test_batch_sizes(n, batch_size, sizes):
    assert [len(b) for b in batch_indices(n, batch_size, shuffle_seed=3)] == sizes


def test_batches_cover_epoch():
    for seed in range(10):
        c = _corpus([seed + 3, 2 * seed + 1])
        emitted = [i for b in batch_indices(len(c), 3, seed) for i in b]
        assert sorted(emitted) == list(range(len(c)))
        texts = [t for batch_texts, _ in batches(c, 3, seed) for t in batch_texts]
        assert sorted(texts) == sorted(c.texts)


def test_batches_invalid_size():
    with pytest.raises(DataError):
        batch_indices(4, 0, 1)
