"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import random_triple
from oracles import adaboost_reference, grid_max_objective
from pbmvboost import (
    MVMajorityVote,
    load_idx,
    mv_uniform_vote,
    pb_mvboost,
    split_image_views,
    synth_multiview,
)
from pbmvboost.boost import make_estimator
from pbmvboost.cbound_opt import optimize_view_weights
from pbmvboost.data import MultiviewDataset
from pbmvboost.evaluation import one_vs_all_protocol
from pbmvboost.measures import (
    InfeasibleError,
    binary_kl,
    catoni_bound,
    gibbs_risk,
    global_cbound,
    global_disagreement,
    kl_sup_inverse,
    majority_vote_error,
    margin_moments,
    mv_cbound,
    model_bounds,
    view_disagreement,
    view_gibbs_risk,
)
from pbmvboost.metrics import accuracy


def triples(seed, count, V=None):
    rng = np.random.default_rng(seed)
    return [random_triple(rng, V=V) for _ in range(count)]


def view_stats(posteriors, views, y, dist):
    r = [view_gibbs_risk(p, X, y, dist) for p, X in zip(posteriors, views)]
    d = [view_disagreement(p, X, dist) for p, X in zip(posteriors, views)]
    return r, d


def test_1_adaboost_reduction(acceptance):
    rng = np.random.default_rng(101)
    X = rng.normal(size=(200, 2))
    y = np.where(X[:, 0] - 0.7 * X[:, 1] + 0.5 * rng.normal(size=200) > 0, 1, -1)
    start = time.perf_counter()
    model, trace = pb_mvboost(MultiviewDataset((X,), y), 20, 1)
    elapsed = time.perf_counter() - start
    voters, alphas, dists = adaboost_reference(X, y, 20, 1)
    post = model.per_view[0]
    same_trees = all(post.voters[t].tree == voters[t].tree for t in range(20))
    q_gap = max(abs(post.q_weights[t] - alphas[t]) for t in range(20))
    d_gap = max(np.max(np.abs(trace[t].distribution - dists[t])) for t in range(20))
    ok = same_trees and q_gap <= 1e-12 and d_gap <= 1e-12 and elapsed < 1.0
    acceptance(1, "AdaBoost reduction", ok,
               f"trees_equal={same_trees} max|dQ|={q_gap:.1e} max|dD|={d_gap:.1e} t={elapsed:.2f}s")
    assert ok


def test_2_margin_identities(acceptance):
    worst = 0.0
    for posteriors, rho, views, y, dist in triples(202, 50):
        mu1, mu2 = margin_moments(posteriors, rho, views, y, dist)
        g = gibbs_risk(posteriors, rho, views, y, dist)
        d = global_disagreement(posteriors, rho, views, dist)
        worst = max(worst, abs(g - (1 - mu1) / 2), abs(d - (1 - mu2) / 2))
    ok = worst <= 1e-12
    acceptance(2, "Margin identities", ok, f"max residual={worst:.1e}")
    assert ok


def test_3_empirical_cbound(acceptance):
    checked, violations, jensen_bad = 0, 0, 0
    for posteriors, rho, views, y, dist in triples(303, 400):
        g = gibbs_risk(posteriors, rho, views, y, dist)
        if g >= 0.5:
            continue
        mu1, mu2 = margin_moments(posteriors, rho, views, y, dist)
        mv = majority_vote_error(posteriors, rho, views, y, dist)
        bound = 1 - (1 - 2 * g) ** 2 / (1 - 2 * global_disagreement(posteriors, rho, views, dist))
        if mv > bound + 1e-9:
            violations += 1
        r, d = view_stats(posteriors, views, y, dist)
        try:
            if mv_cbound(rho, r, d) < global_cbound(mu1, mu2) - 1e-12:
                jensen_bad += 1
        except InfeasibleError:
            pass  # a vacuous view-averaged bound trivially dominates
        checked += 1
        if checked == 50:
            break
    ok = checked == 50 and violations == 0 and jensen_bad == 0
    acceptance(3, "Empirical C-Bound validity", ok,
               f"triples={checked} violations={violations} jensen_violations={jensen_bad}")
    assert ok


def test_4_factor_two(acceptance):
    bad = 0
    for posteriors, rho, views, y, dist in triples(404, 200):
        mv = majority_vote_error(posteriors, rho, views, y, dist)
        if mv > 2 * gibbs_risk(posteriors, rho, views, y, dist) + 1e-12:
            bad += 1
    acceptance(4, "Factor-2 bound", bad == 0, f"violations={bad}/200")
    assert bad == 0


def test_5_optimizer_vs_grid(acceptance):
    rng = np.random.default_rng(505)
    pairs = []
    while len(pairs) < 100:
        r = rng.uniform(0.05, 0.55, size=3)
        d = rng.uniform(0.0, 0.5, size=3)
        # the grid must contain a feasible point for the comparison to mean anything
        if np.isfinite(grid_max_objective(r, d, step=0.05)):
            pairs.append((r, d))
    start = time.perf_counter()
    results = [optimize_view_weights(r, d) for r, d in pairs]
    elapsed = time.perf_counter() - start
    worst = max(grid_max_objective(r, d) - res.objective for (r, d), res in zip(pairs, results))
    ok = worst <= 1e-6 and elapsed < 10
    acceptance(5, "Optimizer vs simplex grid", ok, f"max shortfall={worst:.1e} t={elapsed:.2f}s")
    assert ok


def test_6_kl_inversion(acceptance):
    rng = np.random.default_rng(606)
    worst, non_monotone, done = 0.0, 0, 0
    while done < 1000:
        q = rng.uniform(0.0, 0.45)
        budget = rng.uniform(1e-6, 0.5)
        if binary_kl(q, 0.5) <= budget:
            continue  # cap binds
        r = kl_sup_inverse(q, budget, 0.5)
        worst = max(worst, abs(binary_kl(q, r) - budget))
        if kl_sup_inverse(q, budget * 0.9, 0.5) > r:
            non_monotone += 1
        done += 1
    ok = worst <= 1e-8 and non_monotone == 0
    acceptance(6, "kl inversion", ok, f"max residual={worst:.1e} non_monotone={non_monotone}")
    assert ok


def test_7_synthetic_end_to_end(acceptance):
    noise = [0.30, 0.35, 0.40]
    train = synth_multiview(1000, 3, noise, seed=0)
    test = synth_multiview(1000, 3, noise, seed=1)
    start = time.perf_counter()
    model, trace = pb_mvboost(train, 100, 1)
    baseline = mv_uniform_vote(train, 1)
    elapsed = time.perf_counter() - start
    acc_pb = accuracy(model.predict(test), test.labels)
    acc_mv = accuracy(baseline.predict(test), test.labels)
    c2, c100 = trace[1].cbound, trace[99].cbound
    trend = c2 is not None and c100 is not None and c100 <= c2
    ok = acc_pb >= acc_mv + 0.02 and trend and elapsed < 30
    acceptance(7, "Synthetic end-to-end", ok,
               f"acc pb={acc_pb:.3f} mv-mv={acc_mv:.3f} cbound t2={c2} t100={c100} t={elapsed:.1f}s")
    assert ok


def _mnist_dir():
    root = os.environ.get("PBMVBOOST_MNIST_DIR")
    names = ["train-images-idx3-ubyte", "train-labels-idx1-ubyte",
             "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"]
    if root and all((Path(root) / n).is_file() for n in names):
        return Path(root), names
    return None, names


def test_8_mnist_digit_zero(acceptance):
    root, names = _mnist_dir()
    if root is None:
        acceptance(8, "MNIST digit 0 vs all", None, "set PBMVBOOST_MNIST_DIR to the IDX files")
        pytest.skip("MNIST IDX files not available")
    start = time.perf_counter()
    tr_img, tr_lab = load_idx(root / names[0], root / names[1])
    te_img, te_lab = load_idx(root / names[2], root / names[3])
    train = split_image_views(tr_img, tr_lab, 0)
    test = split_image_views(te_img, te_lab, 0)
    report = one_vs_all_protocol((train.views, tr_lab), (test.views, te_lab), [0], 500, 5,
                                 "pb-mvboost", 100, 2, seed=0, n_jobs=-1)
    elapsed = time.perf_counter() - start
    mean = report.summary()["macro"]["accuracy"]["mean"]
    ok = mean >= 0.93 and elapsed < 600
    acceptance(8, "MNIST digit 0 vs all", ok, f"mean acc={mean:.4f} t={elapsed:.0f}s")
    assert ok


def test_9_serialization(acceptance):
    rng = np.random.default_rng(909)
    algorithms = ["pb-mvboost", "mvboost", "mv-adaboost", "mv-mv"]
    mismatches = 0
    for i in range(20):
        V = int(rng.integers(1, 4))
        n = int(rng.integers(20, 80))
        ds = synth_multiview(n, V, list(rng.uniform(0, 0.45, size=V)), seed=int(rng.integers(1 << 30)))
        est = make_estimator(algorithms[i % 4], int(rng.integers(1, 8)), int(rng.integers(1, 4)))
        est.fit(ds)
        clone = MVMajorityVote.loads(est.model_.dumps())
        a, b = est.model_.decision_function(ds), clone.decision_function(ds)
        if a.tobytes() != b.tobytes() or not np.array_equal(est.model_.predict(ds), clone.predict(ds)):
            mismatches += 1
    acceptance(9, "Serialization round-trip", mismatches == 0, f"mismatches={mismatches}/20")
    assert mismatches == 0


def test_10_bound_ordering(acceptance):
    rng = np.random.default_rng(1010)
    bad = 0
    for i in range(12):
        V = int(rng.integers(1, 4))
        ds = synth_multiview(int(rng.integers(50, 300)), V, list(rng.uniform(0, 0.4, size=V)),
                             seed=int(rng.integers(1 << 30)))
        est = make_estimator(["pb-mvboost", "mvboost", "mv-adaboost"][i % 3],
                             int(rng.integers(1, 20)), int(rng.integers(1, 3)))
        est.fit(ds)
        out = model_bounds(est.model_.per_view, est.model_.rho, ds.views, ds.labels)
        empirical = 1.0 if out["cbound_empirical"] is None else out["cbound_empirical"]
        if empirical > out["theorem_cbound_bound"]:
            bad += 1
    sweep = [catoni_bound(g, 0.7, 0.3, 500) for g in np.linspace(0, 0.5, 10)]
    monotone = all(a <= b for a, b in zip(sweep, sweep[1:]))
    ok = bad == 0 and monotone
    acceptance(10, "Bound ordering", ok, f"ordering violations={bad}/12 catoni_monotone={monotone}")
    assert ok
