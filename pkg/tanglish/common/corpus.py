import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .clean import CleanRules, clean_text
from .errors import DataError, SchemaError
from .utils import SplitMix64

LOGGER = logging.getLogger(__name__)

DEFAULT_LABEL_NAMES: Tuple[str, ...] = ("NOT", "HOF")

# compared case-insensitively, before and after cleaning
_NAN_TEXTS = {"", "nan"}


@dataclass(frozen=True)
class LabeledExample:
    id: str
    text: str
    label: int
    split: str = ""


@dataclass(frozen=True)
class LabeledCorpus:
    examples: Tuple[LabeledExample, ...]
    label_names: Tuple[str, ...] = DEFAULT_LABEL_NAMES

    def __post_init__(self) -> None:
        n_classes = len(self.label_names)
        for example in self.examples:
            if not 0 <= example.label < n_classes:
                raise DataError(f"Example {example.id} has label index {example.label} outside [0, {n_classes}).")

    @property
    def class_counts(self) -> List[int]:
        counts = np.bincount([e.label for e in self.examples], minlength=len(self.label_names))
        return [int(c) for c in counts]

    @property
    def texts(self) -> List[str]:
        return [e.text for e in self.examples]

    @property
    def labels(self) -> List[int]:
        return [e.label for e in self.examples]

    def counts_by_name(self) -> Dict[str, int]:
        return dict(zip(self.label_names, self.class_counts))

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[LabeledExample]:
        return iter(self.examples)


@dataclass
class LoadStats:
    path: str
    rows_in: int = 0
    rows_out: int = 0
    dropped_missing_label: int = 0
    dropped_nan_text: int = 0
    dropped_empty_after_cleaning: int = 0

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "rows_in": self.rows_in,
            "rows_out": self.rows_out,
            "dropped_missing_label": self.dropped_missing_label,
            "dropped_nan_text": self.dropped_nan_text,
            "dropped_empty_after_cleaning": self.dropped_empty_after_cleaning,
        }


def write_corpus(corpus_path: Path, sentences: Iterable[str], append: bool = False) -> None:
    with corpus_path.open("a" if append else "w", encoding="utf-8", newline="\n") as file:
        for sentence in sentences:
            file.write(sentence + "\n")


def load_corpus(corpus_path: Path) -> Iterator[str]:
    with corpus_path.open("r", encoding="utf-8-sig") as in_file:
        for line in in_file:
            line = line.strip()
            yield line


def read_tsv(path: Path) -> pd.DataFrame:
    if not path.is_file():
        raise FileNotFoundError(f"The corpus file {path} does not exist.")
    try:
        df = pd.read_csv(
            path,
            sep="\t",
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            encoding="utf-8-sig",
        )
    except pd.errors.EmptyDataError:
        raise DataError(f"The corpus file {path} is empty.")
    # short rows leave NaN cells even with keep_default_na off
    return df.fillna("")


def load_tsv_with_stats(
    path: Path,
    text_col: str,
    label_col: str,
    id_col: Optional[str],
    label_names: Sequence[str],
    rules: CleanRules,
    split: str = "",
) -> Tuple[LabeledCorpus, LoadStats]:
    df = read_tsv(path)
    df.columns = [str(c).strip() for c in df.columns]
    for col in (text_col, label_col):
        if col not in df.columns:
            raise SchemaError(f"The corpus file {path} does not have a '{col}' column.")
    has_id = id_col is not None and id_col in df.columns

    label_index = {name: i for i, name in enumerate(label_names)}
    stats = LoadStats(str(path), rows_in=len(df))
    examples: List[LabeledExample] = []
    for row_num, record in enumerate(df.to_dict("records"), start=2):
        label_str = record[label_col].strip()
        raw_text = record[text_col].strip()
        if label_str == "":
            stats.dropped_missing_label += 1
            continue
        if raw_text.lower() in _NAN_TEXTS:
            stats.dropped_nan_text += 1
            continue
        label = label_index.get(label_str)
        if label is None:
            raise DataError(f"Row {row_num} of {path} has the unknown label '{label_str}'.")
        text = clean_text(raw_text, rules)
        if text == "":
            stats.dropped_empty_after_cleaning += 1
            continue
        if text.lower() in _NAN_TEXTS:
            stats.dropped_nan_text += 1
            continue
        example_id = record[id_col].strip() if has_id else str(row_num - 1)
        examples.append(LabeledExample(example_id, text, label, split))
    stats.rows_out = len(examples)
    LOGGER.info(f"Loaded {stats.rows_out} of {stats.rows_in} rows from {path}")
    return LabeledCorpus(tuple(examples), tuple(label_names)), stats


def load_tsv(
    path: Path,
    text_col: str,
    label_col: str,
    id_col: Optional[str],
    label_names: Sequence[str],
    rules: CleanRules,
    split: str = "",
) -> LabeledCorpus:
    corpus, _ = load_tsv_with_stats(path, text_col, label_col, id_col, label_names, rules, split)
    return corpus


def write_tsv(
    path: Path, corpus: LabeledCorpus, text_col: str = "text", label_col: str = "category", id_col: str = "id"
) -> None:
    # cleaned text never holds tabs or newlines, so rows are written unquoted
    lines = ["\t".join((id_col, text_col, label_col))]
    lines.extend("\t".join((e.id, e.text, corpus.label_names[e.label])) for e in corpus)
    write_corpus(path, lines)


def concat(a: LabeledCorpus, b: LabeledCorpus) -> LabeledCorpus:
    if a.label_names != b.label_names:
        raise SchemaError(f"Cannot concatenate corpora with label names {a.label_names} and {b.label_names}.")
    return LabeledCorpus(a.examples + b.examples, a.label_names)


def _check_classes(c: LabeledCorpus) -> List[List[LabeledExample]]:
    by_class: List[List[LabeledExample]] = [[] for _ in c.label_names]
    for example in c:
        by_class[example.label].append(example)
    for name, members in zip(c.label_names, by_class):
        if len(members) == 0:
            raise DataError(f"The class '{name}' has no examples, so the corpus cannot be balanced.")
    return by_class


def uniform_sample(c: LabeledCorpus, seed: int) -> LabeledCorpus:
    """Balances the classes by oversampling each minority class with replacement up to the majority count.

    All original examples are kept; the result is shuffled with the same SplitMix64 stream.
    """
    by_class = _check_classes(c)
    target = max(len(members) for members in by_class)
    prng = SplitMix64(seed)
    examples = list(c.examples)
    for members in by_class:
        for _ in range(target - len(members)):
            examples.append(members[prng.below(len(members))])
    prng.shuffle(examples)
    return LabeledCorpus(tuple(examples), c.label_names)


def undersample(c: LabeledCorpus, seed: int) -> LabeledCorpus:
    by_class = _check_classes(c)
    target = min(len(members) for members in by_class)
    prng = SplitMix64(seed)
    examples: List[LabeledExample] = []
    for members in by_class:
        members = list(members)
        # partial Fisher-Yates: the last `target` slots hold a uniform draw without replacement
        for i in range(len(members) - 1, len(members) - target - 1, -1):
            j = prng.below(i + 1)
            members[i], members[j] = members[j], members[i]
        examples.extend(members[len(members) - target :])
    prng.shuffle(examples)
    return LabeledCorpus(tuple(examples), c.label_names)


BALANCE_STRATEGIES = {"oversample": uniform_sample, "undersample": undersample}


def balance(c: LabeledCorpus, strategy: str, seed: int) -> LabeledCorpus:
    sampler = BALANCE_STRATEGIES.get(strategy)
    if sampler is None:
        raise SchemaError(f"An invalid balance strategy was specified: {strategy}.")
    return sampler(c, seed)


def batch_indices(n: int, batch_size: int, shuffle_seed: int) -> List[List[int]]:
    if batch_size < 1:
        raise DataError("The batch size must be at least 1.")
    order = SplitMix64(shuffle_seed).permutation(n)
    return [order[i : i + batch_size] for i in range(0, n, batch_size)]


def batches(c: LabeledCorpus, batch_size: int, shuffle_seed: int) -> List[Tuple[List[str], List[int]]]:
    result: List[Tuple[List[str], List[int]]] = []
    for indices in batch_indices(len(c), batch_size, shuffle_seed):
        result.append(([c.examples[i].text for i in indices], [c.examples[i].label for i in indices]))
    return result
