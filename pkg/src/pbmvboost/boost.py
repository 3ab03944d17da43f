"""PB-MVBoost, its baselines, the learned multiview vote and its serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .cbound_opt import optimize_view_weights
from .data import MultiviewDataset
from .measures import (
    InfeasibleError,
    ViewPosterior,
    disagreement_from_votes,
    gibbs_risk_from_votes,
    mv_cbound,
    normalize_q,
)
from .metrics import accuracy, f1
from .weak import WeakVoter, train_tree, uniform_distribution

__all__ = [
    "MVMajorityVote",
    "BoostTrace",
    "IterationRecord",
    "PBMVBoostClassifier",
    "MVBoostClassifier",
    "MVAdaBoostClassifier",
    "MVUniformVoteClassifier",
    "pb_mvboost",
    "mvboost_uniform_rho",
    "mv_adaboost",
    "mv_uniform_vote",
    "predict",
    "predict_margin",
    "check_views",
    "ALGORITHMS",
]

MODEL_FORMAT = 1
EPS_CLAMP = 1e-10


def check_views(X, y=None, n_features=None, labeled=False):
    """Validate a multiview input: a sequence of 2-D arrays with equal row counts.

    A ``MultiviewDataset`` is accepted too. Returns ``views``, or
    ``(views, y)`` when labels are given or ``labeled`` is set; a dataset
    supplies its own labels in that case.
    """
    if isinstance(X, MultiviewDataset):
        if y is None and labeled:
            y = X.labels
        X = X.views
    if isinstance(X, np.ndarray) and X.ndim == 2:
        raise ValueError("multiview input must be a sequence of per-view matrices")
    views = []
    for v, Xv in enumerate(X):
        Xv = np.asarray(Xv, dtype=np.float64)
        if Xv.ndim == 1:
            Xv = Xv[None, :]
        if Xv.ndim != 2:
            raise ValueError(f"view {v} is not 2-D")
        if not np.all(np.isfinite(Xv)):
            raise ValueError(f"view {v} contains non-finite values")
        views.append(Xv)
    if not views:
        raise ValueError("at least one view is required")
    n = views[0].shape[0]
    if n == 0:
        raise ValueError("no examples")
    if any(Xv.shape[0] != n for Xv in views):
        raise ValueError("views have different numbers of rows")
    if n_features is not None:
        if len(n_features) != len(views):
            raise ValueError(f"expected {len(n_features)} views, got {len(views)}")
        for v, (Xv, d) in enumerate(zip(views, n_features)):
            if Xv.shape[1] != d:
                raise ValueError(f"view {v} has {Xv.shape[1]} features, expected {d}")
    if y is None:
        if labeled:
            raise ValueError("labels are required")
        return views
    y = np.asarray(y).ravel()
    if y.shape[0] != n:
        raise ValueError("labels and views differ in length")
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("labels must be -1 or +1")
    return views, y.astype(np.int64)


@dataclass
class MVMajorityVote:
    """Per-view voters with raw weights Q, combined with view weights rho."""

    per_view: list[ViewPosterior]
    rho: np.ndarray
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=np.float64)
        if self.rho.shape != (len(self.per_view),):
            raise ValueError("one view weight per view is required")
        if np.any(self.rho < 0) or abs(self.rho.sum() - 1.0) > 1e-9:
            raise ValueError("rho must lie on the simplex")
        lengths = {len(p.voters) for p in self.per_view}
        if len(lengths) != 1:
            raise ValueError("every view must hold the same number of voters")

    @property
    def T(self) -> int:
        return len(self.per_view[0].voters)

    @property
    def n_features(self) -> list[int]:
        return [p.voters[0].n_features for p in self.per_view]

    def view_scores(self, views) -> list[np.ndarray]:
        """Per view, ``sum_t Q_v^t h_v^t(x^v)`` for every example."""
        return [
            np.asarray(p.q_weights, dtype=np.float64) @ p.vote_matrix(Xv)
            for p, Xv in zip(self.per_view, views)
        ]

    def decision_function(self, X) -> np.ndarray:
        views = check_views(X, n_features=self.n_features)
        return sum(r * s for r, s in zip(self.rho, self.view_scores(views)))

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0, 1, -1)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "config": self.config,
            "T": self.T,
            "rho": [float(r) for r in self.rho],
            "views": [
                {
                    "q_weights": [float(q) for q in p.q_weights],
                    "voters": [h.to_dict() for h in p.voters],
                }
                for p in self.per_view
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MVMajorityVote":
        if d.get("format") != MODEL_FORMAT:
            raise ValueError(f"unsupported model format {d.get('format')!r}")
        per_view = [
            ViewPosterior([WeakVoter.from_dict(h) for h in vd["voters"]], list(vd["q_weights"]))
            for vd in d["views"]
        ]
        model = cls(per_view, np.array(d["rho"], dtype=np.float64), dict(d.get("config", {})))
        if model.T != d.get("T", model.T):
            raise ValueError("model file T disagrees with its voter lists")
        return model

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "MVMajorityVote":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "MVMajorityVote":
        return cls.loads(Path(path).read_text())


def predict_margin(model: MVMajorityVote, x) -> float:
    """Margin of one example given as a sequence of per-view feature vectors."""
    return float(model.decision_function([np.atleast_2d(xv) for xv in x])[0])


def predict(model: MVMajorityVote, x) -> int:
    return 1 if predict_margin(model, x) >= 0 else -1


@dataclass
class IterationRecord:
    t: int
    eps: list[float]
    Q: list[float]
    r: list[float]
    d: list[float]
    rho: list[float]
    cbound: Optional[float]
    train_error: float
    train_f1: float
    test_error: Optional[float] = None
    test_f1: Optional[float] = None
    distribution: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class BoostTrace:
    """One record per boosting iteration; ``cbound`` is None when infeasible."""

    records: list[IterationRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name: str) -> list:
        return [getattr(rec, name) for rec in self.records]

    def header(self) -> list[str]:
        V = len(self.records[0].eps) if self.records else 0
        cols = ["t"]
        for key in ("eps", "Q", "r", "d", "rho"):
            cols += [f"{key}_{v}" for v in range(V)]
        cols += ["cbound", "train_err", "train_f1"]
        if self.records and self.records[0].test_error is not None:
            cols += ["test_err", "test_f1"]
        return cols

    def rows(self) -> list[list]:
        has_test = bool(self.records) and self.records[0].test_error is not None
        out = []
        for rec in self.records:
            row = [rec.t, *rec.eps, *rec.Q, *rec.r, *rec.d, *rec.rho]
            row += ["" if rec.cbound is None else rec.cbound, rec.train_error, rec.train_f1]
            if has_test:
                row += [rec.test_error, rec.test_f1]
            out.append([repr(c) if isinstance(c, float) else c for c in row])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        writer.writerows(self.rows())
        return buf.getvalue()


def voter_weight(eps: float) -> float:
    eps = min(max(eps, EPS_CLAMP), 1.0 - EPS_CLAMP)
    return 0.5 * math.log((1.0 - eps) / eps)


class _RunState:
    """Vote matrices of every voter trained so far, cached on train and eval sets."""

    def __init__(self, V, eval_views):
        self.voters = [[] for _ in range(V)]
        self.q = [[] for _ in range(V)]
        self.train_votes = [[] for _ in range(V)]
        self.eval_votes = [[] for _ in range(V)] if eval_views is not None else None

    def add(self, v, voter, q, train_pred, eval_pred):
        self.voters[v].append(voter)
        self.q[v].append(q)
        self.train_votes[v].append(train_pred)
        if self.eval_votes is not None:
            self.eval_votes[v].append(eval_pred)

    def posterior_weights(self, v, expectation):
        if expectation == "uniform":
            return np.full(len(self.q[v]), 1.0 / len(self.q[v]))
        return normalize_q(self.q[v])

    def view_stats(self, v, y, dist, expectation):
        H = np.vstack(self.train_votes[v])
        w = self.posterior_weights(v, expectation)
        return gibbs_risk_from_votes(H, w, y, dist), disagreement_from_votes(H, w, dist)

    def margin(self, rho, which):
        votes = self.train_votes if which == "train" else self.eval_votes
        return sum(
            r * (np.asarray(q) @ np.vstack(hs)) for r, q, hs in zip(rho, self.q, votes)
        )

    def model(self, rho, config):
        per_view = [ViewPosterior(list(h), list(q)) for h, q in zip(self.voters, self.q)]
        return MVMajorityVote(per_view, np.array(rho, dtype=np.float64), dict(config))


def _record(state, t, eps, Q, r, d, rho, y, eval_y, expectation, dist=None):
    n = y.shape[0]
    uniform = uniform_distribution(n)
    stats = [state.view_stats(v, y, uniform, expectation) for v in range(len(rho))]
    try:
        cb = mv_cbound(rho, [s[0] for s in stats], [s[1] for s in stats])
    except InfeasibleError:
        cb = None
    pred = np.where(state.margin(rho, "train") >= 0, 1, -1)
    rec = IterationRecord(
        t, list(eps), list(Q), list(r), list(d), [float(x) for x in rho], cb,
        1.0 - accuracy(pred, y), f1(pred, y), distribution=dist,
    )
    if eval_y is not None:
        pe = np.where(state.margin(rho, "eval") >= 0, 1, -1)
        rec.test_error = 1.0 - accuracy(pe, eval_y)
        rec.test_f1 = f1(pe, eval_y)
    return rec


def _fit_pb_mvboost(views, y, T, max_depth, view_weighting, expectation, eval_views, eval_y,
                    keep_distributions=False):
    V, n = len(views), y.shape[0]
    dist = uniform_distribution(n)
    rho = np.full(V, 1.0 / V)
    state = _RunState(V, eval_views)
    trace = BoostTrace()
    for t in range(1, T + 1):
        eps, Q, preds = [], [], []
        for v, Xv in enumerate(views):
            h = train_tree(Xv, y, dist, max_depth, view_index=v)
            hp = h.predict(Xv)
            e = float(dist[hp != y].sum())
            q = voter_weight(e)
            state.add(v, h, q, hp, None if eval_views is None else h.predict(eval_views[v]))
            eps.append(e)
            Q.append(q)
            preds.append(hp)
        stats = [state.view_stats(v, y, dist, expectation) for v in range(V)]
        r = [s[0] for s in stats]
        d = [s[1] for s in stats]
        if view_weighting == "cbound":
            res = optimize_view_weights(r, d, rho)
            if res.feasible:
                rho = res.rho
        record_dist = dist.copy() if keep_distributions else None
        combined = sum(rv * qv * hp for rv, qv, hp in zip(rho, Q, preds))
        dist = dist * np.exp(-y * combined)
        dist = dist / dist.sum()
        trace.records.append(
            _record(state, t, eps, Q, r, d, rho, y, eval_y, expectation, record_dist)
        )
    return state, rho, trace


def _fit_mv_adaboost(views, y, T, max_depth, expectation, eval_views, eval_y,
                     keep_distributions=False):
    V, n = len(views), y.shape[0]
    dists = [uniform_distribution(n) for _ in range(V)]
    rho = np.full(V, 1.0 / V)
    state = _RunState(V, eval_views)
    trace = BoostTrace()
    for t in range(1, T + 1):
        eps, Q, r, d = [], [], [], []
        snapshot = [w.copy() for w in dists] if keep_distributions else None
        for v, Xv in enumerate(views):
            w = dists[v]
            h = train_tree(Xv, y, w, max_depth, view_index=v)
            hp = h.predict(Xv)
            e = float(w[hp != y].sum())
            q = voter_weight(e)
            state.add(v, h, q, hp, None if eval_views is None else h.predict(eval_views[v]))
            rv, dv = state.view_stats(v, y, w, expectation)
            eps.append(e)
            Q.append(q)
            r.append(rv)
            d.append(dv)
            w = w * np.exp(-y * q * hp)
            dists[v] = w / w.sum()
        trace.records.append(
            _record(state, t, eps, Q, r, d, rho, y, eval_y, expectation, snapshot)
        )
    return state, rho, trace


class PBMVBoostClassifier(ClassifierMixin, BaseEstimator):
    """Multiview boosting with view weights chosen by maximizing the C-Bound ratio.

    ``fit`` takes ``X`` as a sequence of per-view matrices (or a
    ``MultiviewDataset``) and labels in {-1, +1}.

    Parameters
    ----------
    n_iterations : int
        Boosting rounds T; one tree per view is added each round.
    max_depth : int
        Depth of the per-view trees.
    view_weighting : {"cbound", "uniform"}
        "uniform" skips the optimization and keeps rho uniform (MVBoost).
    voter_expectation : {"posterior", "uniform"}
        How trained voters are averaged when computing per-view Gibbs risk
        and disagreement.
    """

    def __init__(self, n_iterations=100, max_depth=2, view_weighting="cbound",
                 voter_expectation="posterior"):
        self.n_iterations = n_iterations
        self.max_depth = max_depth
        self.view_weighting = view_weighting
        self.voter_expectation = voter_expectation

    def _check_params(self):
        if int(self.n_iterations) < 1:
            raise ValueError("n_iterations must be >= 1")
        if int(self.max_depth) < 1:
            raise ValueError("max_depth must be >= 1")
        if self.view_weighting not in ("cbound", "uniform"):
            raise ValueError(f"unknown view_weighting {self.view_weighting!r}")
        if self.voter_expectation not in ("posterior", "uniform"):
            raise ValueError(f"unknown voter_expectation {self.voter_expectation!r}")

    def _config(self):
        return {"algorithm": self._algorithm_name(), **self.get_params()}

    def _algorithm_name(self):
        return "pb-mvboost" if self.view_weighting == "cbound" else "mvboost"

    def _run(self, views, y, eval_views, eval_y, keep_distributions):
        return _fit_pb_mvboost(
            views, y, int(self.n_iterations), int(self.max_depth), self.view_weighting,
            self.voter_expectation, eval_views, eval_y, keep_distributions,
        )

    def fit(self, X, y=None, eval_set=None, keep_distributions=False):
        self._check_params()
        views, y = check_views(X, y, labeled=True)
        eval_views = eval_y = None
        if eval_set is not None:
            if isinstance(eval_set, MultiviewDataset):
                eval_set = (eval_set.views, eval_set.labels)
            eval_views, eval_y = check_views(*eval_set, labeled=True)
            if len(eval_views) != len(views):
                raise ValueError("eval_set has a different number of views")
        state, rho, trace = self._run(views, y, eval_views, eval_y, keep_distributions)
        self.model_ = state.model(rho, self._config())
        self.trace_ = trace
        self.classes_ = np.array([-1, 1])
        self.n_views_ = len(views)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        return self.model_.decision_function(X)

    def predict(self, X):
        check_is_fitted(self, "model_")
        return self.model_.predict(X)

    def score(self, X, y=None, sample_weight=None):
        views, y = check_views(X, y, labeled=True)
        return accuracy(self.predict(views), y)


class MVBoostClassifier(PBMVBoostClassifier):
    """PB-MVBoost with rho held uniform at every round."""

    def __init__(self, n_iterations=100, max_depth=2, voter_expectation="posterior"):
        super().__init__(n_iterations, max_depth, "uniform", voter_expectation)

    def _algorithm_name(self):
        return "mvboost"


class MVAdaBoostClassifier(PBMVBoostClassifier):
    """One independent AdaBoost per view; the boosted views are averaged uniformly."""

    def __init__(self, n_iterations=100, max_depth=2, voter_expectation="posterior"):
        super().__init__(n_iterations, max_depth, "uniform", voter_expectation)

    def _algorithm_name(self):
        return "mv-adaboost"

    def _run(self, views, y, eval_views, eval_y, keep_distributions):
        return _fit_mv_adaboost(
            views, y, int(self.n_iterations), int(self.max_depth), self.voter_expectation,
            eval_views, eval_y, keep_distributions,
        )


class MVUniformVoteClassifier(PBMVBoostClassifier):
    """One tree per view on uniform weights, every voter and view weighted equally."""

    def __init__(self, max_depth=2):
        super().__init__(1, max_depth, "uniform", "posterior")

    def _algorithm_name(self):
        return "mv-mv"

    def _run(self, views, y, eval_views, eval_y, keep_distributions):
        V, n = len(views), y.shape[0]
        state = _RunState(V, eval_views)
        dist = uniform_distribution(n)
        eps, r, d = [], [], []
        for v, Xv in enumerate(views):
            h = train_tree(Xv, y, dist, int(self.max_depth), view_index=v)
            hp = h.predict(Xv)
            state.add(v, h, 1.0, hp, None if eval_views is None else h.predict(eval_views[v]))
            eps.append(float(dist[hp != y].sum()))
            rv, dv = state.view_stats(v, y, dist, "posterior")
            r.append(rv)
            d.append(dv)
        rho = np.full(V, 1.0 / V)
        trace = BoostTrace([
            _record(state, 1, eps, [1.0] * V, r, d, rho, y, eval_y, "posterior",
                    dist.copy() if keep_distributions else None)
        ])
        return state, rho, trace


def _train(est, train: MultiviewDataset, eval_set: Optional[MultiviewDataset]):
    if train.n_samples == 0:
        raise ValueError("empty training set")
    est.fit(train, eval_set=eval_set, keep_distributions=True)
    return est.model_, est.trace_


def pb_mvboost(train, T, max_depth, eval_set=None):
    if T < 1:
        raise ValueError("T must be >= 1")
    return _train(PBMVBoostClassifier(T, max_depth), train, eval_set)


def mvboost_uniform_rho(train, T, max_depth, eval_set=None):
    if T < 1:
        raise ValueError("T must be >= 1")
    return _train(MVBoostClassifier(T, max_depth), train, eval_set)


def mv_adaboost(train, T, max_depth, eval_set=None):
    if T < 1:
        raise ValueError("T must be >= 1")
    return _train(MVAdaBoostClassifier(T, max_depth), train, eval_set)


def mv_uniform_vote(train, max_depth, eval_set=None):
    return _train(MVUniformVoteClassifier(max_depth), train, eval_set)[0]


ALGORITHMS = {
    "pb-mvboost": lambda T, depth: PBMVBoostClassifier(T, depth),
    "mvboost": lambda T, depth: MVBoostClassifier(T, depth),
    "mv-adaboost": lambda T, depth: MVAdaBoostClassifier(T, depth),
    "mv-mv": lambda T, depth: MVUniformVoteClassifier(depth),
}


def make_estimator(name: str, T: int, depth: int) -> PBMVBoostClassifier:
    try:
        return ALGORITHMS[name](T, depth)
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None
