"""PAC-Bayesian quantities for multiview weighted majority votes.

Everything here is a pure function. Voter outputs are +/-1, so per example
the posterior-weighted disagreement equals ``(1 - m**2) / 2`` where ``m`` is
the weighted mean vote; the code relies on that identity instead of looping
over voter pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .weak import WeakVoter, as_distribution

__all__ = [
    "InfeasibleError",
    "ViewPosterior",
    "normalize_q",
    "gibbs_risk_from_votes",
    "disagreement_from_votes",
    "view_gibbs_risk",
    "view_disagreement",
    "gibbs_risk",
    "global_disagreement",
    "margin_moments",
    "majority_vote_error",
    "mv_cbound",
    "global_cbound",
    "binary_kl",
    "kl_sup_inverse",
    "kl_inf_inverse",
    "kl_to_uniform",
    "catoni_bound",
    "theorem_cbound_bound",
    "model_bounds",
]


class InfeasibleError(ValueError):
    """A bound or set is undefined for the given inputs (e.g. Gibbs risk >= 1/2)."""


def normalize_q(q_weights) -> np.ndarray:
    """``|q| / sum |q|``; uniform when every weight is zero."""
    a = np.abs(np.asarray(q_weights, dtype=np.float64))
    total = a.sum()
    if total == 0:
        return np.full(a.shape, 1.0 / a.size)
    return a / total


@dataclass
class ViewPosterior:
    """Voters trained for one view together with their raw boosting weights."""

    voters: list[WeakVoter]
    q_weights: list[float]

    def __post_init__(self):
        if len(self.voters) == 0:
            raise ValueError("a posterior needs at least one voter")
        if len(self.voters) != len(self.q_weights):
            raise ValueError("voters and q_weights differ in length")

    @property
    def normalized_weights(self) -> np.ndarray:
        return normalize_q(self.q_weights)

    def vote_matrix(self, X) -> np.ndarray:
        """(n_voters, n_examples) matrix of +/-1 outputs."""
        return np.vstack([h.predict(X) for h in self.voters])


def _outputs(post, X, n):
    H = post.vote_matrix(X)
    if H.shape[1] != n:
        raise ValueError("feature matrix and distribution differ in length")
    return H


def gibbs_risk_from_votes(H, weights, y, dist) -> float:
    """Gibbs risk from a (n_voters, n) vote matrix and normalized voter weights."""
    return float(np.clip(dist @ (weights @ (H != y)), 0.0, 1.0))


def disagreement_from_votes(H, weights, dist) -> float:
    m = weights @ H
    return float(np.clip(dist @ ((1.0 - m * m) / 2.0), 0.0, 0.5))


def view_gibbs_risk(post: ViewPosterior, X, y, dist) -> float:
    y = np.asarray(y).ravel()
    w = as_distribution(dist, y.shape[0])
    return gibbs_risk_from_votes(_outputs(post, X, y.shape[0]), post.normalized_weights, y, w)


def view_disagreement(post: ViewPosterior, X, dist) -> float:
    w = as_distribution(dist)
    return disagreement_from_votes(_outputs(post, X, w.shape[0]), post.normalized_weights, w)


def _weighted_votes(posteriors, views):
    return [p.normalized_weights @ p.vote_matrix(X) for p, X in zip(posteriors, views)]


def _check_rho(rho, V):
    rho = np.asarray(rho, dtype=np.float64)
    if rho.shape != (V,):
        raise ValueError(f"rho has shape {rho.shape}, expected ({V},)")
    return rho


def gibbs_risk(posteriors: Sequence[ViewPosterior], rho, views, y, dist) -> float:
    """rho-average of the per-view Gibbs risks."""
    rho = _check_rho(rho, len(posteriors))
    return float(
        sum(r * view_gibbs_risk(p, X, y, dist) for r, p, X in zip(rho, posteriors, views))
    )


def global_disagreement(posteriors: Sequence[ViewPosterior], rho, views, dist) -> float:
    """Disagreement of two voters drawn independently across all views."""
    rho = _check_rho(rho, len(posteriors))
    w = as_distribution(dist)
    m = sum(r * mv for r, mv in zip(rho, _weighted_votes(posteriors, views)))
    return float(w @ ((1.0 - m * m) / 2.0))


def margin_moments(posteriors: Sequence[ViewPosterior], rho, views, y, dist) -> tuple[float, float]:
    """First and second moments of ``y * sum_v rho_v sum_k w_vk h_vk(x^v)``."""
    rho = _check_rho(rho, len(posteriors))
    y = np.asarray(y).ravel()
    w = as_distribution(dist, y.shape[0])
    margin = y * sum(r * mv for r, mv in zip(rho, _weighted_votes(posteriors, views)))
    return float(w @ margin), float(w @ (margin * margin))


def majority_vote_error(posteriors: Sequence[ViewPosterior], rho, views, y, dist) -> float:
    """Weighted 0-1 error of ``sign(sum_v rho_v sum_k w_vk h_vk)``, sign(0) = +1.

    Uses the normalized voter weights, i.e. the vote whose Gibbs risk and
    disagreement the functions above measure.
    """
    rho = _check_rho(rho, len(posteriors))
    y = np.asarray(y).ravel()
    w = as_distribution(dist, y.shape[0])
    m = sum(r * mv for r, mv in zip(rho, _weighted_votes(posteriors, views)))
    return float(w @ (np.where(m >= 0, 1, -1) != y))


def _cbound_form(risk: float, dis: float) -> float:
    if risk >= 0.5:
        raise InfeasibleError(f"Gibbs risk {risk!r} is not below 1/2")
    if dis >= 0.5:
        raise InfeasibleError(f"disagreement {dis!r} is not below 1/2")
    return float(np.clip(1.0 - (1.0 - 2.0 * risk) ** 2 / (1.0 - 2.0 * dis), 0.0, 1.0))


def mv_cbound(rho, r, d) -> float:
    """View-averaged C-Bound ``1 - (1 - 2<rho,r>)^2 / (1 - 2<rho,d>)``.

    Raises InfeasibleError when either average reaches 1/2.
    """
    rho = np.asarray(rho, dtype=np.float64)
    return _cbound_form(float(rho @ np.asarray(r, float)), float(rho @ np.asarray(d, float)))


def global_cbound(mu1: float, mu2: float) -> float:
    """C-Bound from the margin moments: risk ``(1-mu1)/2``, disagreement ``(1-mu2)/2``."""
    return _cbound_form((1.0 - mu1) / 2.0, (1.0 - mu2) / 2.0)


def binary_kl(q: float, p: float) -> float:
    """KL divergence between Bernoulli(q) and Bernoulli(p), with 0 ln 0 = 0."""
    if not (0.0 <= q <= 1.0 and 0.0 <= p <= 1.0):
        raise ValueError("binary_kl arguments must lie in [0, 1]")
    total = 0.0
    for a, b in ((q, p), (1.0 - q, 1.0 - p)):
        if a == 0.0:
            continue
        if b == 0.0:
            return math.inf
        total += a * math.log(a / b)
    return max(total, 0.0)


def _bisect(f, lo: float, hi: float) -> tuple[float, float]:
    """Shrink [lo, hi] where f(lo) is True and f(hi) False down to float resolution."""
    # enough halvings to reach subnormal widths; the loop exits earlier once lo/hi are adjacent
    for _ in range(1100):
        mid = lo + (hi - lo) / 2.0
        if mid <= lo or mid >= hi:
            break
        if f(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi


def kl_sup_inverse(q: float, budget: float, cap: float = 1.0) -> float:
    """Largest ``r <= cap`` with ``kl(q || r) <= budget``."""
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    if not 0.0 < cap <= 1.0:
        raise ValueError("cap must lie in (0, 1]")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    if binary_kl(q, cap) <= budget:
        return cap
    if q > cap:
        raise InfeasibleError(f"no r <= {cap} within kl budget {budget} of {q}")
    if budget == 0:
        return q
    lo, _ = _bisect(lambda r: binary_kl(q, r) <= budget, q, cap)
    return lo


def kl_inf_inverse(q: float, budget: float) -> float:
    """Smallest ``d >= 0`` with ``kl(q || d) <= budget``."""
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    if binary_kl(q, 0.0) <= budget:
        return 0.0
    if budget == 0:
        return q
    _, hi = _bisect(lambda d: binary_kl(q, d) > budget, 0.0, q)
    return hi


def kl_to_uniform(weights) -> float:
    """KL(Q || uniform over len(Q) items) = ln m - H(Q)."""
    w = np.asarray(weights, dtype=np.float64)
    nz = w[w > 0]
    return float(max(math.log(w.size) + np.sum(nz * np.log(nz)), 0.0))


def catoni_bound(
    gibbs_empirical: float,
    kl_views_expected: float,
    kl_hyper: float,
    n: int,
    C: float = 1.0,
    delta: float = 0.05,
) -> float:
    """Catoni-style upper bound on the true Gibbs risk of the multiview vote."""
    if C <= 0:
        raise ValueError("C must be positive")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if n < 1:
        raise ValueError("n must be positive")
    if kl_views_expected < 0 or kl_hyper < 0:
        raise ValueError("KL terms must be nonnegative")
    exponent = C * gibbs_empirical + (kl_views_expected + kl_hyper + math.log(1.0 / delta)) / n
    value = -math.expm1(-exponent) / -math.expm1(-C)
    return float(min(max(value, 0.0), 1.0))


def _interval_slack(n: int, delta: float) -> float:
    return math.log(4.0 * math.sqrt(n) / delta)


def theorem_cbound_bound(per_view, rho, n: int, delta: float = 0.05) -> float:
    """C-Bound with each view's risk and disagreement replaced by kl-interval ends.

    ``per_view`` holds ``(gibbs_emp, disagreement_emp, kl_v)`` triples. Returns
    1 (vacuous) whenever the averaged sup-risk or inf-disagreement reaches 1/2.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    rho = _check_rho(rho, len(per_view))
    slack = _interval_slack(n, delta)
    r_sup, d_inf = [], []
    for risk, dis, kl in per_view:
        risk = min(max(risk, 0.0), 1.0)
        dis = min(max(dis, 0.0), 1.0)
        try:
            r_sup.append(kl_sup_inverse(risk, (kl + slack) / n, 0.5))
        except InfeasibleError:
            return 1.0
        d_inf.append(kl_inf_inverse(dis, (2.0 * kl + slack) / n))
    R = float(rho @ np.array(r_sup))
    D = float(rho @ np.array(d_inf))
    if R >= 0.5 or D >= 0.5:
        return 1.0
    return _cbound_form(R, D)


def model_bounds(posteriors: Sequence[ViewPosterior], rho, views, y, delta=0.05, C=1.0) -> dict:
    """Empirical and generalization bounds of a multiview vote on a labelled sample.

    Priors are uniform: over each view's voters, and over the views.
    """
    y = np.asarray(y).ravel()
    n = y.shape[0]
    rho = _check_rho(rho, len(posteriors))
    w = np.full(n, 1.0 / n)
    r = [view_gibbs_risk(p, X, y, w) for p, X in zip(posteriors, views)]
    d = [view_disagreement(p, X, w) for p, X in zip(posteriors, views)]
    kl = [kl_to_uniform(p.normalized_weights) for p in posteriors]
    gibbs = float(rho @ np.array(r))
    try:
        empirical = mv_cbound(rho, r, d)
    except InfeasibleError:
        empirical = None
    out = {
        "n": n,
        "gibbs_risk": gibbs,
        "view_gibbs_risk": r,
        "view_disagreement": d,
        "view_kl": kl,
        "cbound_empirical": empirical,
        "factor2_empirical": min(2.0 * gibbs, 1.0),
        "catoni_gibbs_bound": catoni_bound(
            gibbs, float(rho @ np.array(kl)), kl_to_uniform(rho), n, C, delta
        ),
        "theorem_cbound_bound": theorem_cbound_bound(list(zip(r, d, kl)), rho, n, delta),
    }
    out["factor2_catoni"] = min(2.0 * out["catoni_gibbs_bound"], 1.0)
    return out
