"""Extreme-event risk measures for Gaussian inter-vehicle distances.

Extreme events are the nested sets W_delta = (-inf, alpha(delta)) with
alpha(delta) = d / (delta + c); delta quantifies proximity to collision.
For a Gaussian distance N(d, sigma^2) all three measures have closed forms:

  VaR   smallest delta with P(dist <= alpha(delta)) <= eps,
  CVaR  smallest delta with alpha(delta) below the mean distance conditional
        on the left tail beyond the VaR threshold,
  EVaR  smallest delta whose Chernoff bound on the left tail is below eps;
        the tightest of the three (VaR <= CVaR <= EVaR).

The EVaR branch is decided by kappa = d_eps / (sqrt(2) sigma) with
d_eps = d / sqrt(-ln eps): infinite when kappa <= 1, zero when
kappa >= c/(c-1), else 1/(1 - 1/kappa) - c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from .errors import DomainError

_INF = math.inf
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class RiskValue:
    """A nonnegative risk level delta with an explicit branch tag.

    branch is one of "zero", "finite", "infinite"; ``value`` is 0, a positive
    float, or math.inf accordingly.  ``kappa`` carries the dimensionless slope
    kappa_eps for EVaR results (None otherwise).
    """

    value: float
    branch: str
    kappa: float | None = None

    def __post_init__(self):
        if self.branch not in ("zero", "finite", "infinite"):
            raise ValueError(f"bad branch {self.branch!r}")
        if self.branch == "zero" and self.value != 0.0:
            raise ValueError("zero branch must carry value 0")
        if self.branch == "infinite" and not math.isinf(self.value):
            raise ValueError("infinite branch must carry value inf")
        if self.branch == "finite" and not (0.0 < self.value < _INF):
            raise ValueError("finite branch must carry a positive finite value")

    @property
    def is_finite(self) -> bool:
        return self.branch != "infinite"

    def __str__(self) -> str:
        return "inf" if self.branch == "infinite" else format(self.value, ".12g")


def _classify(delta: float, kappa: float | None = None) -> RiskValue:
    if math.isinf(delta):
        return RiskValue(_INF, "infinite", kappa)
    if delta <= 0.0:
        return RiskValue(0.0, "zero", kappa)
    return RiskValue(delta, "finite", kappa)


def _check_params(d: float, sigma: float, eps: float, c: float) -> None:
    if d <= 0:
        raise DomainError(f"d must be positive, got {d}")
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not (0.0 < eps < 1.0):
        raise DomainError(f"epsilon must lie in (0,1), got {eps}")
    if c < 1.0:
        raise DomainError(f"c must be >= 1, got {c}")


def alpha(delta: float, d: float, c: float) -> float:
    """Extreme-event threshold alpha(delta) = d / (delta + c)."""
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    if d <= 0 or c < 1.0:
        raise DomainError("need d > 0 and c >= 1")
    return d / (delta + c)


def gaussian_mgf_log(s: float, d: float, sigma: float) -> float:
    """log MGF of N(d, sigma^2) at s: s*d + sigma^2 s^2 / 2."""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    return s * d + 0.5 * sigma * sigma * s * s


def chernoff_exponent(delta: float, d: float, sigma: float, c: float) -> float:
    """Optimised left-tail Chernoff exponent inf_{s>0} [s*alpha(delta) + log M(-s)].

    Equals -(d - alpha)^2 / (2 sigma^2) when alpha(delta) < d, else 0 (the
    infimum is approached as s -> 0+).
    """
    a = alpha(delta, d, c)
    return exponent_at_threshold(a, d, sigma)


def exponent_at_threshold(a: float, d: float, sigma: float) -> float:
    """Chernoff exponent for the left tail P(X <= a), X ~ N(d, sigma^2)."""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if a >= d:
        return 0.0
    return -((d - a) ** 2) / (2.0 * sigma * sigma)


def d_epsilon(d: float, eps: float) -> float:
    """Confidence-scaled distance d_eps = d / sqrt(-ln eps)."""
    return d / math.sqrt(-math.log(eps))


def kappa_epsilon(d: float, sigma: float, eps: float) -> float:
    """Dimensionless risk slope kappa_eps = d_eps / (sqrt(2) sigma)."""
    return d_epsilon(d, eps) / (math.sqrt(2.0) * sigma)


def evar(d: float, sigma: float, eps: float, c: float) -> RiskValue:
    """Entropic value-at-risk of collision, closed three-branch form.

    kappa <= 1 gives the infinite branch (at kappa = 1 the finite expression
    already diverges, so both boundary readings coincide); kappa >= c/(c-1)
    gives zero (unreachable for c = 1).
    """
    _check_params(d, sigma, eps, c)
    kappa = kappa_epsilon(d, sigma, eps)
    if kappa <= 1.0:
        return RiskValue(_INF, "infinite", kappa)
    if c > 1.0 and kappa >= c / (c - 1.0):
        return RiskValue(0.0, "zero", kappa)
    return _classify(1.0 / (1.0 - 1.0 / kappa) - c, kappa)


def var(d: float, sigma: float, eps: float, c: float) -> RiskValue:
    """Value-at-risk: smallest delta with P(dist <= alpha(delta)) <= eps.

    With q = d + sigma * Phi^{-1}(eps) (the eps-quantile of the distance):
    infinite when q <= 0, else max(0, d/q - c).
    """
    _check_params(d, sigma, eps, c)
    q = d + sigma * float(ndtri(eps))
    if q <= 0.0:
        return RiskValue(_INF, "infinite")
    return _classify(d / q - c)


def cvar(d: float, sigma: float, eps: float, c: float) -> RiskValue:
    """Conditional value-at-risk via the left-tail conditional mean.

    The conditioning threshold is the eps-quantile q of the distance (the
    VaR threshold before the nonnegativity clamp on delta), giving
    m = E[dist | dist <= q] = d - sigma * phi(z)/Phi(z) with z = Phi^{-1}(eps).
    CVaR is infinite when q <= 0 or m <= 0, else max(0, d/m - c).
    """
    _check_params(d, sigma, eps, c)
    q = d + sigma * float(ndtri(eps))
    if q <= 0.0:
        return RiskValue(_INF, "infinite")
    z = (q - d) / sigma
    # hazard-type ratio phi(z)/Phi(z), computed in log space for deep tails
    ratio = math.exp(-0.5 * z * z - _LOG_SQRT_2PI - float(log_ndtr(z)))
    m = d - sigma * ratio
    if m <= 0.0:
        return RiskValue(_INF, "infinite")
    return _classify(d / m - c)


def psi_epsilon(d: float, sigma: float, eps: float) -> float:
    """Donsker-Varadhan dual objective: worst-case E_Q[-dist] over the KL ball.

    For Gaussian nominal P the supremum over {Q : KL(Q||P) <= -ln eps} is
    attained by a mean shift of sigma * sqrt(-2 ln eps), giving
    Psi_eps = -d + sigma * sqrt(-2 ln eps).
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not (0.0 < eps < 1.0):
        raise DomainError(f"epsilon must lie in (0,1), got {eps}")
    return -d + sigma * math.sqrt(-2.0 * math.log(eps))


def psi_epsilon_search(d: float, sigma: float, eps: float, n_grid: int = 100001) -> float:
    """Restricted-search verifier for psi_epsilon.

    Maximises E_Q[-X] over mean-shifted Gaussians Q = N(d - mu, sigma^2)
    subject to KL(Q||P) = mu^2 / (2 sigma^2) <= -ln eps, by grid search on mu.
    """
    mu_max = sigma * math.sqrt(-2.0 * math.log(eps))
    mu = np.linspace(0.0, mu_max, n_grid)
    return float(np.max(-(d - mu)))


def tail_probability(a: float, d: float, sigma: float) -> float:
    """Exact Gaussian left-tail probability P(X <= a)."""
    return float(ndtr((a - d) / sigma))


@dataclass(frozen=True)
class PairRisk:
    """Risk profile of one vehicle pair."""

    pair_index: int  # 1-based
    sigma: float
    var: RiskValue
    cvar: RiskValue
    evar: RiskValue


def pair_risks(sigmas, d: float, eps: float, c: float) -> tuple[PairRisk, ...]:
    """VaR/CVaR/EVaR for each pair given per-pair standard deviations."""
    out = []
    for j, s in enumerate(sigmas, start=1):
        s = float(s)
        out.append(PairRisk(j, s,
                            var(d, s, eps, c),
                            cvar(d, s, eps, c),
                            evar(d, s, eps, c)))
    return tuple(out)
