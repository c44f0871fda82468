"""Steady-state variance of inter-vehicle distances.

The stationary distance vector is Gaussian with per-pair variances

    sigma_j^2 = (g^2 tau^3 / 2 pi) * sum_{k>=2} (e~_j^T q_k)^2 f(lambda_k tau, beta tau)

where f is an improper integral over the whole real line.  The zero mode
(lambda_1 = 0, where f diverges) never contributes: e~_j is orthogonal to the
constant eigenvector, so all sums here run over modes 2..n only.

Two independent evaluation routes are provided: ``f_integral`` (adaptive
QUADPACK panels with analytic tail control) and ``f_reference`` (brute-force
uniform trapezoid, backed by the compiled kernel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from . import _kernels
from .errors import DomainError, NearInstabilityError, QuadratureError, StabilityError
from .graphs import LaplacianSpectrum
from .stability import in_region_S, platoon_stable


@dataclass(frozen=True)
class PlatoonParams:
    """Physical and design parameters of the platoon risk analysis.

    n: vehicle count; d: desired spacing; c: extreme-event offset (>= 1);
    tau: communication delay; beta: position-feedback weight; g: diffusion
    coefficient; epsilon: confidence level in (0, 1).
    """

    n: int = 11
    d: float = 1.01
    c: float = 1.21
    tau: float = 0.01
    beta: float = 1.0 / 3.0
    g: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        for name in ("d", "tau", "beta"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")
        if self.g < 0:
            raise DomainError("g must be nonnegative")
        if self.c < 1.0:
            raise DomainError(f"c must be >= 1, got {self.c}")
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError(f"epsilon must lie in (0,1), got {self.epsilon}")

    @property
    def c1(self) -> float:
        """Variance prefactor g^2 tau^3 / (2 pi)."""
        return self.g * self.g * self.tau**3 / (2.0 * math.pi)


@dataclass(frozen=True)
class PairVariances:
    """Marginal variances and full covariance of the n-1 inter-vehicle distances."""

    sigma_sq: np.ndarray  # shape (n-1,)
    covariance: np.ndarray  # shape (n-1, n-1)

    def __post_init__(self):
        sig = np.asarray(self.sigma_sq, float)
        cov = np.asarray(self.covariance, float)
        object.__setattr__(self, "sigma_sq", sig)
        object.__setattr__(self, "covariance", cov)
        if not np.allclose(sig, np.diag(cov), rtol=1e-10, atol=0):
            raise ValueError("sigma_sq inconsistent with covariance diagonal")
        w = np.linalg.eigvalsh(cov)
        if w[0] < -1e-9 * np.trace(cov):
            raise ValueError(f"covariance not positive semidefinite (min eig {w[0]:.3e})")

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.sigma_sq)


def _den(r: np.ndarray | float, s1: float, s2: float):
    return (s1 * s2 - r * r * np.cos(r)) ** 2 + r * r * (s1 - r * np.sin(r)) ** 2


def _scan_denominator(s1: float, s2: float, rmax: float):
    """Dense scan of the integrand denominator on [0, rmax].

    Returns (global minimum, locations of sharp local minima) used for the
    near-instability guard and as quadrature breakpoints.  Near the stability
    boundary the denominator develops a near-root at the a-root location in
    (0, pi/2), so the scan is densest there.
    """
    h = min(s1, s2, 0.05) / 50.0
    r_fine = np.arange(0.0, min(rmax, 2 * math.pi), h)
    r_coarse = np.arange(2 * math.pi, rmax, 0.02)
    dmin = math.inf
    minima: list[float] = []
    for r in (r_fine, r_coarse):
        if r.size < 3:
            continue
        d = _den(r, s1, s2)
        dmin = min(dmin, float(d.min()))
        interior = (d[1:-1] < d[:-2]) & (d[1:-1] < d[2:])
        idx = np.nonzero(interior)[0] + 1
        if idx.size:
            # keep only pronounced dips; they are what QUADPACK needs help with
            keep = d[idx] < 0.05 * np.median(d)
            minima.extend(r[idx[keep]].tolist())
    return dmin, sorted(minima)[:50]


def f_reference(s1: float, s2: float, step: float = 1e-4, rmax: float = 1e4) -> float:
    """Brute-force trapezoid evaluation of f (independent oracle route).

    Uniform step on [0, rmax]; exponentially accurate for the analytic, even
    integrand as long as the step resolves the sharpest feature.
    """
    return float(_kernels.integrand_trapezoid(s1, s2, step, rmax))


def f_integral(s1: float, s2: float, tol: float = 1e-8, full_output: bool = False):
    """Evaluate f(s1, s2) = integral over R of the variance integrand.

    Requires (s1, s2) inside the stability region S, where the denominator is
    bounded away from zero.  Computed as 2 * integral on [0, R] (evenness) by
    adaptive panels, with R doubled until the analytic 1/r^4 tail bound
    (remainder <= 4/R^3) drops below tol/10 of the accumulated value.

    Returns the value, or (value, error_estimate) when ``full_output``; the
    estimate combines the panel error reports and the tail bound.
    """
    if s1 <= 0 or s2 <= 0:
        raise DomainError(f"(s1, s2) must be positive, got ({s1}, {s2})")
    if not in_region_S(s1, s2):
        raise StabilityError(
            f"(s1, s2) = ({s1}, {s2}) is outside the stability region S; "
            "f diverges at the boundary"
        )
    r0 = max(50.0, 10.0 * max(1.0, s1, math.sqrt(s1 * s2)))
    dmin, minima = _scan_denominator(s1, s2, r0)
    if dmin < 1e-12 * (1.0 + (s1 * s2) ** 2):
        raise NearInstabilityError(
            f"integrand denominator nearly vanishes (min {dmin:.3e}); "
            "configuration is too close to the stability boundary"
        )

    def integrand(r: float) -> float:
        c = math.cos(r)
        s = math.sin(r)
        return 1.0 / ((s1 * s2 - r * r * c) ** 2 + r * r * (s1 - r * s) ** 2)

    total = 0.0
    err = 0.0
    # Integrate [0, r0] piecewise, splitting at each denominator minimum and a
    # decade on either side.  A single adaptive pass over the whole interval
    # can miss a spike whose width is orders of magnitude below the interval
    # length (QUADPACK then underreports its own error).
    cuts = {0.0, r0}
    if 2.0 * math.pi < r0:
        cuts.add(2.0 * math.pi)
    for m in minima:
        if 0.0 < m < r0:
            cuts.update((0.1 * m, m, min(10.0 * m, r0)))
    bounds = sorted(cuts)
    # convergence warnings are redundant: the estimate is checked explicitly below
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in zip(bounds, bounds[1:]):
            val, e = quad(integrand, a, b, limit=800, epsabs=0.0, epsrel=tol / 4.0)
            total += val
            err += e
        rhi = r0
        for _ in range(40):
            if 4.0 / rhi**3 <= 0.1 * tol * total:
                break
            val, e = quad(integrand, rhi, 2.0 * rhi, limit=2000,
                          epsabs=0.05 * tol * total, epsrel=tol / 4.0)
            total += val
            err += e
            rhi *= 2.0
        else:
            raise QuadratureError("tail truncation did not reach the tolerance budget")
    tail = 4.0 / rhi**3
    value = 2.0 * total
    estimate = 2.0 * err + tail
    if estimate > 10.0 * tol * value:
        raise QuadratureError(
            f"quadrature error estimate {estimate:.3e} exceeds tolerance for f={value:.6e}"
        )
    if full_output:
        return value, estimate
    return value


def sigma_z_sq(lam: float, params: PlatoonParams, tol: float = 1e-8) -> float:
    """Steady-state variance of one transformed mode: c1 * f(lambda tau, beta tau)."""
    if lam <= 0:
        raise DomainError(f"mode eigenvalue must be positive, got {lam}")
    return params.c1 * f_integral(lam * params.tau, params.beta * params.tau, tol=tol)


def mode_f_values(spec: LaplacianSpectrum, params: PlatoonParams,
                  tol: float = 1e-8) -> np.ndarray:
    """f(lambda_k tau, beta tau) for modes k = 2..n, one quadrature per distinct
    eigenvalue (keyed within 1e-12)."""
    s2 = params.beta * params.tau
    cache: dict[int, float] = {}
    out = np.empty(spec.n - 1)
    for k, lam in enumerate(spec.eigenvalues[1:]):
        key = int(round(float(lam) / 1e-12))
        if key not in cache:
            cache[key] = f_integral(float(lam) * params.tau, s2, tol=tol)
        out[k] = cache[key]
    return out


def pair_variances(spec: LaplacianSpectrum, params: PlatoonParams,
                   tol: float = 1e-8) -> PairVariances:
    """Per-pair variances and full covariance of the steady-state distances.

    covariance = D^T Q_z Sigma_z Q_z^T D over modes 2..n, where the columns of
    D are the successive-difference vectors e_{j+1} - e_j.
    """
    if spec.n != params.n:
        raise DomainError(f"spectrum is for n={spec.n} but params.n={params.n}")
    verdict = platoon_stable(spec, params.tau, params.beta)
    if not verdict.stable:
        raise StabilityError("platoon is not stable; steady-state variances do not exist")
    fvals = mode_f_values(spec, params, tol=tol)
    sz = params.c1 * fvals  # diag of Sigma_z over modes 2..n
    Qnz = spec.eigenvectors[:, 1:]
    # rows of B are D^T Q_z: B[j, k] = e~_j . q_{k+1}
    B = Qnz[1:, :] - Qnz[:-1, :]
    cov = (B * sz[None, :]) @ B.T
    cov = 0.5 * (cov + cov.T)
    sig_sq = np.einsum("jk,k,jk->j", B, sz, B)
    return PairVariances(sigma_sq=sig_sq, covariance=cov)
