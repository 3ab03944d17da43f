"""One-vs-all evaluation over repeated random training subsamples."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from .boost import ALGORITHMS, make_estimator
from .data import MultiviewDataset
from .metrics import accuracy, confusion_counts, f1

__all__ = ["RunRecord", "RunReport", "one_vs_all_protocol", "subsample_indices"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunRecord:
    cls: int
    run: int
    accuracy: float
    f1: float
    f1_degenerate: bool


@dataclass
class RunReport:
    algorithm: str
    classes: list[int]
    runs: int
    records: list[RunRecord] = field(default_factory=list)

    def values(self, metric: str, cls=None) -> np.ndarray:
        """Per-run values of ``metric``; macro-averaged over classes when ``cls`` is None."""
        table = np.full((self.runs, len(self.classes)), np.nan)
        col = {c: j for j, c in enumerate(self.classes)}
        for rec in self.records:
            table[rec.run, col[rec.cls]] = getattr(rec, metric)
        if cls is not None:
            return table[:, col[cls]]
        return table.mean(axis=1)

    def summary(self) -> dict:
        out = {"macro": {}, "per_class": {}}
        for metric in ("accuracy", "f1"):
            macro = self.values(metric)
            out["macro"][metric] = {"mean": float(macro.mean()), "std": float(macro.std())}
            for c in self.classes:
                vals = self.values(metric, c)
                out["per_class"].setdefault(str(c), {})[metric] = {
                    "mean": float(vals.mean()),
                    "std": float(vals.std()),
                }
        return out

    def to_json(self) -> str:
        return json.dumps(
            {
                "algorithm": self.algorithm,
                "classes": self.classes,
                "runs": self.runs,
                "records": [asdict(r) for r in self.records],
                "summary": self.summary(),
            },
            indent=2,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "run", "accuracy", "f1", "f1_degenerate"])
        for r in self.records:
            w.writerow([r.cls, r.run, repr(r.accuracy), repr(r.f1), int(r.f1_degenerate)])
        return buf.getvalue()


def subsample_indices(n_total: int, n_per_run: int, seed: int, run: int) -> np.ndarray:
    rng = np.random.default_rng([seed, run])
    return np.sort(rng.choice(n_total, size=n_per_run, replace=False))


def _one_job(train_views, train_classes, test_views, test_classes, cls, run, idx, algorithm, T, depth):
    y_train = np.where(train_classes[idx] == cls, 1, -1)
    y_test = np.where(test_classes == cls, 1, -1)
    est = make_estimator(algorithm, T, depth)
    est.fit([X[idx] for X in train_views], y_train)
    pred = est.predict(test_views)
    tp, fp, fn, _ = confusion_counts(pred, y_test)
    degenerate = tp + fp + fn == 0
    if degenerate:
        log.warning("class %s run %d: no predicted or actual positives, F1 set to 0", cls, run)
    return RunRecord(int(cls), run, accuracy(pred, y_test), f1(pred, y_test), degenerate)


def one_vs_all_protocol(
    full_train: tuple[Sequence[np.ndarray], np.ndarray],
    full_test: tuple[Sequence[np.ndarray], np.ndarray],
    classes: Sequence[int],
    n_per_run: int,
    runs: int,
    algorithm: str = "pb-mvboost",
    T: int = 100,
    depth: int = 2,
    seed: int = 0,
    n_jobs: int = 1,
) -> RunReport:
    """Train one binary model per (class, run) and score it on the full test set.

    ``full_train`` and ``full_test`` are ``(views, class_ids)`` pairs. Every run
    draws ``n_per_run`` training examples without replacement; all classes in
    a run share that subsample.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    train_views, train_classes = _unpack(full_train)
    test_views, test_classes = _unpack(full_test)
    n_total = train_classes.shape[0]
    if not 1 <= n_per_run <= n_total:
        raise ValueError(f"n_per_run must lie in [1, {n_total}]")
    classes = [int(c) for c in classes]
    jobs = []
    for run in range(runs):
        idx = subsample_indices(n_total, n_per_run, seed, run)
        for c in classes:
            if not np.any(train_classes[idx] == c):
                log.warning("class %s absent from run %d subsample", c, run)
            jobs.append((c, run, idx))
    records = Parallel(n_jobs=n_jobs)(
        delayed(_one_job)(train_views, train_classes, test_views, test_classes, c, run, idx,
                          algorithm, T, depth)
        for c, run, idx in jobs
    )
    return RunReport(algorithm, classes, runs, list(records))


def _unpack(data):
    if isinstance(data, MultiviewDataset):
        return [np.asarray(X) for X in data.views], np.asarray(data.labels)
    views, class_ids = data
    views = [np.asarray(X, dtype=np.float64) for X in views]
    class_ids = np.asarray(class_ids).ravel()
    if any(X.shape[0] != class_ids.shape[0] for X in views):
        raise ValueError("views and class ids differ in length")
    return views, class_ids
