"""View weights maximizing ``(1 - 2<rho,r>)^2 / (1 - 2<rho,d>)`` on the simplex."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

__all__ = ["ViewWeights", "project_simplex", "cbound_objective", "optimize_view_weights"]

FEAS_MARGIN = 1e-9
MAX_ITER = 500


@dataclass(frozen=True)
class ViewWeights:
    rho: np.ndarray
    objective: float
    feasible: bool


def project_simplex(x) -> np.ndarray:
    """Euclidean projection onto ``{p >= 0, sum p = 1}`` (sort-and-threshold)."""
    x = np.asarray(x, dtype=np.float64)
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, x.size + 1)
    support = np.nonzero(u - css / k > 0)[0][-1] + 1
    theta = css[support - 1] / support
    p = np.maximum(x - theta, 0.0)
    return p / p.sum()


def _feasible(rho, r, d) -> bool:
    return rho @ r < 0.5 - FEAS_MARGIN and rho @ d < 0.5 - FEAS_MARGIN


def cbound_objective(rho, r, d) -> float:
    """Objective value; ``-inf`` outside the feasible region."""
    rho, r, d = (np.asarray(a, dtype=np.float64) for a in (rho, r, d))
    if not _feasible(rho, r, d):
        return -np.inf
    a = 1.0 - 2.0 * (rho @ r)
    return float(a * a / (1.0 - 2.0 * (rho @ d)))


def _gradient(rho, r, d):
    a = 1.0 - 2.0 * (rho @ r)
    b = 1.0 - 2.0 * (rho @ d)
    return -4.0 * a / b * r + 2.0 * a * a / (b * b) * d


def _ascend(rho, r, d):
    f = cbound_objective(rho, r, d)
    step = 1.0
    for _ in range(MAX_ITER):
        g = _gradient(rho, r, d)
        moved = False
        while step > 1e-14:
            cand = project_simplex(rho + step * g)
            fc = cbound_objective(cand, r, d)
            delta = cand - rho
            if fc >= f + 1e-4 / step * (delta @ delta) and fc > f:
                moved = True
                break
            step /= 2.0
        if not moved:
            break
        shift = np.abs(delta).max()
        rho, f = cand, fc
        step *= 2.0
        if shift < 1e-13:
            break
    return rho, f


def _lp_feasible_point(r, d):
    # min s  s.t.  <rho,r> <= s, <rho,d> <= s, rho in the simplex
    V = r.size
    c = np.r_[np.zeros(V), 1.0]
    A = np.vstack([np.r_[r, -1.0], np.r_[d, -1.0]])
    res = linprog(
        c,
        A_ub=A,
        b_ub=np.zeros(2),
        A_eq=np.r_[np.ones(V), 0.0][None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * V + [(None, None)],
        method="highs",
    )
    if not res.success:
        return None
    return project_simplex(res.x[:V])


def optimize_view_weights(r, d, rho_init=None) -> ViewWeights:
    """Maximize the view-averaged C-Bound ratio by multi-start projected gradient ascent.

    Starts from the uniform point, ``rho_init`` and every vertex; ties keep
    the earliest start, so a flat objective returns the uniform point. When no
    weighting keeps both averages below 1/2 the result carries
    ``feasible=False`` and ``rho_init`` unchanged.
    """
    r = np.asarray(r, dtype=np.float64).ravel()
    d = np.asarray(d, dtype=np.float64).ravel()
    V = r.size
    if V == 0 or d.shape != r.shape:
        raise ValueError("r and d must be nonempty and of equal length")
    uniform = np.full(V, 1.0 / V)
    if rho_init is None:
        rho_init = uniform
    rho_init = np.asarray(rho_init, dtype=np.float64).ravel()
    if rho_init.shape != (V,) or np.any(rho_init < 0) or abs(rho_init.sum() - 1) > 1e-9:
        raise ValueError("rho_init must lie on the simplex")
    if V == 1:
        one = np.ones(1)
        ok = _feasible(one, r, d)
        return ViewWeights(one, cbound_objective(one, r, d), ok)

    starts = [uniform, rho_init] + list(np.eye(V))
    if not any(_feasible(s, r, d) for s in starts):
        lp = _lp_feasible_point(r, d)
        if lp is None or not _feasible(lp, r, d):
            return ViewWeights(rho_init.copy(), -np.inf, False)
        starts.append(lp)

    best_rho, best_f = None, -np.inf
    for s in starts:
        if not _feasible(s, r, d):
            continue
        rho, f = _ascend(s, r, d)
        if f > best_f + 1e-12:
            best_rho, best_f = rho, f
    return ViewWeights(best_rho, best_f, True)
