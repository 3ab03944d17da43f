"""Accuracy and positive-class F1 for +/-1 predictions."""

import numpy as np

__all__ = ["accuracy", "f1", "confusion_counts"]


def _pair(preds, labels):
    p = np.asarray(preds).ravel()
    t = np.asarray(labels).ravel()
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape[0]} predictions, {t.shape[0]} labels")
    if p.size == 0:
        raise ValueError("no predictions")
    return p, t


def confusion_counts(preds, labels):
    """(tp, fp, fn, tn) with +1 as the positive class."""
    p, t = _pair(preds, labels)
    pos_p, pos_t = p > 0, t > 0
    return (
        int(np.sum(pos_p & pos_t)),
        int(np.sum(pos_p & ~pos_t)),
        int(np.sum(~pos_p & pos_t)),
        int(np.sum(~pos_p & ~pos_t)),
    )


def accuracy(preds, labels) -> float:
    p, t = _pair(preds, labels)
    return float(np.mean(p == t))


def f1(preds, labels) -> float:
    """F1 of the +1 class; 0 when there are no predicted and no actual positives."""
    tp, fp, fn, _ = confusion_counts(preds, labels)
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2 * tp / denom
