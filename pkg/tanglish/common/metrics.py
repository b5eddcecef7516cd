"""
Confusion matrices and support-weighted precision, recall and F1, the ranking metric of the shared task.

Undefined ratios score 0: precision when a class is never predicted, recall when a class has no support,
and F1 when both precision and recall are 0. This matches the common scoring tools and lowers the score of
degenerate single-class predictors.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import DataError


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray
    label_names: Optional[Sequence[str]] = None

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def names(self) -> List[str]:
        if self.label_names is None:
            return [str(k) for k in range(self.n_classes)]
        return list(self.label_names)

    def to_dict(self) -> dict:
        return {"labels": self.names, "counts": self.counts.tolist()}


@dataclass(frozen=True)
class ClassScore:
    label: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class WeightedReport:
    per_class: List[ClassScore]
    precision: float
    recall: float
    f1: float
    total: int

    def to_dict(self) -> dict:
        return {
            "per_class": [
                {"label": c.label, "precision": c.precision, "recall": c.recall, "f1": c.f1, "support": c.support}
                for c in self.per_class
            ],
            "weighted": {"precision": self.precision, "recall": self.recall, "f1": self.f1},
            "total": self.total,
        }


def confusion(
    preds: Sequence[int], labels: Sequence[int], n_classes: int, label_names: Optional[Sequence[str]] = None
) -> ConfusionMatrix:
    if len(preds) != len(labels):
        raise DataError(f"There are {len(preds)} predictions but {len(labels)} labels.")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    if len(preds) == 0:
        return ConfusionMatrix(counts, label_names)
    pred_arr = np.asarray(preds, dtype=np.int64)
    label_arr = np.asarray(labels, dtype=np.int64)
    for name, arr in (("prediction", pred_arr), ("label", label_arr)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise DataError(f"A {name} lies outside the {n_classes} classes.")
    np.add.at(counts, (label_arr, pred_arr), 1)
    return ConfusionMatrix(counts, label_names)


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros(num.shape, dtype=np.float64)
    np.divide(num, den, out=out, where=den != 0)
    return out


def weighted_prf(m: ConfusionMatrix) -> WeightedReport:
    total = m.total
    if total == 0:
        raise DataError("Cannot score an empty confusion matrix.")
    counts = m.counts.astype(np.float64)
    tp = np.diag(counts)
    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)
    precision = _safe_ratio(tp, predicted)
    recall = _safe_ratio(tp, support)
    f1 = _safe_ratio(2 * precision * recall, precision + recall)
    weights = support / total
    per_class = [
        ClassScore(name, float(p), float(r), float(f), int(s))
        for name, p, r, f, s in zip(m.names, precision, recall, f1, support)
    ]
    return WeightedReport(
        per_class,
        float(np.dot(weights, precision)),
        float(np.dot(weights, recall)),
        float(np.dot(weights, f1)),
        total,
    )


def format_table(reports: Sequence[WeightedReport], row_names: Sequence[str], title: str = "Dataset") -> str:
    df = pd.DataFrame(
        {
            "W-Precision": [r.precision for r in reports],
            "W-Recall": [r.recall for r in reports],
            "W-F1 Score": [r.f1 for r in reports],
        },
        index=pd.Index(list(row_names), name=title),
    )
    return df.to_string(float_format=lambda v: f"{v:.2f}")
