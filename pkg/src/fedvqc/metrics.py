"""Classification reports and per-round trajectory bookkeeping."""

import csv
import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ClassificationReport:
    confusion: np.ndarray  # rows: true class, columns: predicted class
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray

    @property
    def num_classes(self):
        return self.confusion.shape[0]

    @property
    def total(self):
        return int(self.confusion.sum())

    @property
    def accuracy(self):
        return float(np.trace(self.confusion) / self.total)

    @property
    def macro_precision(self):
        return float(self.precision.mean())

    @property
    def macro_recall(self):
        return float(self.recall.mean())

    @property
    def macro_f1(self):
        return float(self.f1.mean())

    def to_dict(self, class_names=None):
        names = list(class_names) if class_names else [str(c) for c in range(self.num_classes)]
        return {
            "accuracy": self.accuracy,
            "precision": self.macro_precision,
            "recall": self.macro_recall,
            "f1": self.macro_f1,
            "per_class": {
                n: {"precision": float(p), "recall": float(r), "f1": float(f), "support": int(s)}
                for n, p, r, f, s in zip(names, self.precision, self.recall, self.f1, self.support)
            },
            "confusion": self.confusion.tolist(),
        }


def _safe_div(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


def report_from_confusion(confusion):
    cm = np.asarray(confusion, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.sum() == 0 or (cm < 0).any():
        raise ValueError("confusion matrix must be square, non-negative, and non-empty")
    tp = np.diag(cm)
    precision = _safe_div(tp, cm.sum(axis=0))
    recall = _safe_div(tp, cm.sum(axis=1))
    f1 = _safe_div(2 * precision * recall, precision + recall)
    return ClassificationReport(cm, precision, recall, f1, cm.sum(axis=1))


def confusion_matrix(predictions, labels, num_classes=None):
    pred = np.asarray(predictions, dtype=int)
    true = np.asarray(labels, dtype=int)
    if pred.shape != true.shape or pred.ndim != 1 or pred.size == 0:
        raise ValueError("predictions and labels must be equal-length, non-empty 1-D sequences")
    C = num_classes if num_classes is not None else int(max(pred.max(), true.max())) + 1
    if min(pred.min(), true.min()) < 0 or max(pred.max(), true.max()) >= C:
        raise ValueError(f"class index outside [0, {C})")
    cm = np.zeros((C, C), dtype=np.int64)
    np.add.at(cm, (true, pred), 1)
    return cm


def classification_report(predictions, labels, num_classes=None):
    """Macro-averaged precision/recall/F1 plus accuracy and confusion matrix."""
    return report_from_confusion(confusion_matrix(predictions, labels, num_classes))


@dataclass
class TrajectoryLog:
    trial: int
    rounds: list = field(default_factory=list)
    accuracy: list = field(default_factory=list)
    loss: list = field(default_factory=list)

    def append(self, round_index, accuracy, loss):
        if self.rounds and round_index <= self.rounds[-1]:
            raise ValueError(f"round {round_index} after round {self.rounds[-1]}")
        self.rounds.append(int(round_index))
        self.accuracy.append(float(accuracy))
        self.loss.append(float(loss))

    def __len__(self):
        return len(self.rounds)


@dataclass(frozen=True)
class MeanCurve:
    rounds: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    num_trials: int


def aggregate_trials(logs):
    """Per-round mean and sample standard deviation (ddof=1) of accuracy.

    With a single trial the standard deviation is reported as zero.
    """
    if not logs:
        raise ValueError("need at least one trajectory")
    grid = logs[0].rounds
    for log in logs[1:]:
        if log.rounds != grid:
            raise ValueError(f"trial {log.trial} covers different rounds than trial {logs[0].trial}")
    acc = np.array([log.accuracy for log in logs], dtype=float)
    std = acc.std(axis=0, ddof=1) if len(logs) > 1 else np.zeros(acc.shape[1])
    return MeanCurve(np.array(grid), acc.mean(axis=0), std, len(logs))


def roughness(curve):
    """Sample standard deviation of first differences (a zigzag measure)."""
    return float(np.std(np.diff(np.asarray(curve, dtype=float)), ddof=1))


def write_trajectory_csv(path, logs):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round", "trial", "accuracy", "loss"])
        for log in logs:
            for r, a, l in zip(log.rounds, log.accuracy, log.loss):
                w.writerow([r, log.trial, repr(a), repr(l)])


def read_trajectory_csv(path):
    logs = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            t = int(row["trial"])
            logs.setdefault(t, TrajectoryLog(t)).append(int(row["round"]), float(row["accuracy"]), float(row["loss"]))
    return [logs[t] for t in sorted(logs)]


def write_mean_curve_csv(path, curve):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round", "mean_accuracy", "std_accuracy", "trials"])
        for r, m, s in zip(curve.rounds, curve.mean, curve.std):
            w.writerow([int(r), repr(float(m)), repr(float(s)), curve.num_trials])


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
