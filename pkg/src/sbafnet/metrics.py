"""Classification quality of a trained network on a dataset."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import Dataset
from .network import Network, one_hot, predict_outputs

__all__ = ["EvalReport", "predict", "confusion_matrix", "evaluate"]


def predict(outputs) -> np.ndarray:
    """Argmax per row; ties go to the lowest class id."""
    return np.argmax(np.asarray(outputs), axis=1)


def confusion_matrix(true, pred, n_classes: int) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(true, dtype=np.intp), np.asarray(pred, dtype=np.intp)), 1)
    return cm


@dataclass
class EvalReport:
    accuracy: float
    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    mean_loss: float
    class_names: list[str]

    @property
    def n_samples(self) -> int:
        return int(self.confusion.sum())

    def __eq__(self, other):
        if not isinstance(other, EvalReport):
            return NotImplemented
        return (
            self.accuracy == other.accuracy
            and self.mean_loss == other.mean_loss
            and self.class_names == other.class_names
            and np.array_equal(self.confusion, other.confusion)
            and np.array_equal(self.precision, other.precision)
            and np.array_equal(self.recall, other.recall)
        )

    def to_text(self) -> str:
        names = self.class_names
        width = max(8, *(len(n) for n in names)) + 2
        lines = [
            f"samples   {self.n_samples}",
            f"accuracy  {self.accuracy:.4f}",
            f"mean loss {self.mean_loss:.6g}",
            "",
            "confusion (rows true, columns predicted)",
            "".ljust(width) + "".join(n.rjust(width) for n in names),
        ]
        for name, row in zip(names, self.confusion):
            lines.append(name.ljust(width) + "".join(str(v).rjust(width) for v in row))
        lines += ["", "class".ljust(width) + "precision".rjust(width) + "recall".rjust(width)]
        for name, p, r in zip(names, self.precision, self.recall):
            lines.append(name.ljust(width) + f"{p:.4f}".rjust(width) + f"{r:.4f}".rjust(width))
        return "\n".join(lines) + "\n"

    def to_tsv(self) -> str:
        lines = [
            "metric\tvalue",
            f"samples\t{self.n_samples}",
            f"accuracy\t{self.accuracy:.17g}",
            f"mean_loss\t{self.mean_loss:.17g}",
        ]
        for name, p, r in zip(self.class_names, self.precision, self.recall):
            lines.append(f"precision[{name}]\t{p:.17g}")
            lines.append(f"recall[{name}]\t{r:.17g}")
        for i, row in enumerate(self.confusion):
            for j, v in enumerate(row):
                lines.append(f"confusion[{self.class_names[i]},{self.class_names[j]}]\t{v}")
        return "\n".join(lines) + "\n"


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # a class never predicted (or never present) scores 0 rather than nan
    return np.where(den > 0, num / np.where(den > 0, den, 1), 0.0)


def evaluate(net: Network, ds: Dataset) -> EvalReport:
    if net.n_outputs != ds.n_classes:
        raise ValueError(f"network has {net.n_outputs} outputs, dataset has {ds.n_classes} classes")
    if net.n_inputs != ds.n_features:
        raise ValueError(f"network takes {net.n_inputs} inputs, dataset has {ds.n_features} features")
    if ds.n_samples == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    outputs = predict_outputs(net, ds.features)
    cm = confusion_matrix(ds.labels, predict(outputs), ds.n_classes)
    tp = np.diag(cm).astype(np.float64)
    targets = one_hot(ds.labels, ds.n_classes)
    mean_loss = float(np.mean(0.5 * np.sum((targets - outputs) ** 2, axis=1)))
    return EvalReport(
        accuracy=float(tp.sum() / ds.n_samples),
        confusion=cm,
        precision=_safe_ratio(tp, cm.sum(axis=0)),
        recall=_safe_ratio(tp, cm.sum(axis=1)),
        mean_loss=mean_loss,
        class_names=list(ds.class_names),
    )
