"""Slow, independent reference computations used only by the tests."""

import itertools
import math

import numpy as np

from pbmvboost.weak import train_tree


def brute_force_stump_error(X, y, w):
    """Minimum weighted 0-1 error over every (feature, midpoint, polarity) and both constants."""
    best = min(sum(wi for wi, yi in zip(w, y) if yi != s) for s in (1, -1))
    n, d = X.shape
    for j in range(d):
        vals = sorted(set(X[:, j].tolist()))
        for a, b in zip(vals, vals[1:]):
            thr = (a + b) / 2
            for pol in (1, -1):
                err = 0.0
                for i in range(n):
                    pred = -pol if X[i, j] <= thr else pol
                    if pred != y[i]:
                        err += w[i]
                best = min(best, err)
    return best


def gibbs_double_sum(H, q, y, dist):
    """sum_i D_i sum_k q_k 1[h_k(x_i) != y_i] with explicit loops."""
    total = 0.0
    for i in range(len(y)):
        for k in range(len(q)):
            if H[k][i] != y[i]:
                total += dist[i] * q[k]
    return total


def disagreement_double_sum(H, q, dist):
    total = 0.0
    for i in range(len(dist)):
        for k in range(len(q)):
            for l in range(len(q)):
                if H[k][i] != H[l][i]:
                    total += dist[i] * q[k] * q[l]
    return total


def global_disagreement_double_sum(Hs, qs, rho, dist):
    """Disagreement over voter pairs drawn across all views."""
    flat = [
        (rho[v] * qs[v][k], Hs[v][k]) for v in range(len(Hs)) for k in range(len(qs[v]))
    ]
    total = 0.0
    for i in range(len(dist)):
        for (wa, ha), (wb, hb) in itertools.product(flat, flat):
            if ha[i] != hb[i]:
                total += dist[i] * wa * wb
    return total


def adaboost_reference(X, y, T, depth=1, clamp=1e-10):
    """Plain AdaBoost loop: returns voters, alphas and the distribution before each round."""
    n = len(y)
    D = [1.0 / n] * n
    voters, alphas, dists = [], [], []
    for _ in range(T):
        dists.append(list(D))
        h = train_tree(X, y, np.array(D), depth)
        pred = h.predict(X)
        eps = 0.0
        for i in range(n):
            if pred[i] != y[i]:
                eps += D[i]
        eps = min(max(eps, clamp), 1 - clamp)
        alpha = 0.5 * math.log((1 - eps) / eps)
        unnorm = [D[i] * math.exp(-alpha * y[i] * pred[i]) for i in range(n)]
        z = sum(unnorm)
        D = [u / z for u in unnorm]
        voters.append(h)
        alphas.append(alpha)
    return voters, alphas, dists


def simplex_grid(V, step):
    """Every point of the simplex whose coordinates are multiples of ``step``."""
    m = round(1 / step)
    for combo in itertools.product(range(m + 1), repeat=V - 1):
        s = sum(combo)
        if s <= m:
            yield np.array(list(combo) + [m - s], dtype=float) / m


def grid_max_objective(r, d, step=0.01):
    r, d = np.asarray(r), np.asarray(d)
    best = -np.inf
    for p in simplex_grid(len(r), step):
        a, b = p @ r, p @ d
        if a < 0.5 - 1e-9 and b < 0.5 - 1e-9:
            best = max(best, (1 - 2 * a) ** 2 / (1 - 2 * b))
    return best
