"""Network-induced EVaR bounds from the extreme Laplacian eigenvalues.

Since sum_k (e~_j^T q_k)^2 = 2 and f decreases in its first argument on the
stable range, every per-pair deviation is sandwiched:

    sqrt(2 c1 f(lambda_n tau, beta tau)) <= sigma_j <= sqrt(2 c1 f(lambda_2 tau, beta tau))

and EVaR is increasing in sigma, so the largest eigenvalue yields the minimum
inherent risk and the algebraic connectivity the worst-case risk.  The bounds
are evaluated by feeding sigma_star into the same three-branch EVaR (including
the -c offset), so they live on the per-pair scale and the sandwich is
directly testable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StabilityError
from .graphs import LaplacianSpectrum
from .risk import RiskValue, d_epsilon, evar
from .stability import platoon_stable
from .variance import PlatoonParams, f_integral


@dataclass(frozen=True)
class SpectralBounds:
    """Minimum (from lambda_n) and maximum (from lambda_2) EVaR bounds.

    ``precondition_ok`` records whether both bound slopes sit on the finite
    middle branch (1 <= kappa <= c/(c-1)); when it holds, every per-pair EVaR
    is finite and sandwiched between e_min and e_max.
    """

    e_min: RiskValue
    e_max: RiskValue
    precondition_ok: bool
    kappa2: float
    kappan: float
    lambda2: float
    lambdan: float
    sigma2: float
    sigman: float


def evar_bounds(spec: LaplacianSpectrum, params: PlatoonParams,
                tol: float = 1e-8) -> SpectralBounds:
    """Spectral EVaR bounds; no branch logic of its own beyond ``evar``."""
    verdict = platoon_stable(spec, params.tau, params.beta)
    if not verdict.stable:
        raise StabilityError("platoon is not stable; spectral bounds undefined")
    lam2 = spec.lambda2
    lamn = spec.lambda_max
    s2 = params.beta * params.tau
    f2 = f_integral(lam2 * params.tau, s2, tol=tol)
    fn = f2 if abs(lamn - lam2) <= 1e-12 else f_integral(lamn * params.tau, s2, tol=tol)
    sigma2 = float(np.sqrt(2.0 * params.c1 * f2))
    sigman = float(np.sqrt(2.0 * params.c1 * fn))
    e_max = evar(params.d, sigma2, params.epsilon, params.c)
    e_min = evar(params.d, sigman, params.epsilon, params.c)
    kappa2 = e_max.kappa
    kappan = e_min.kappa
    # middle-branch precondition, stated on the kappa scale:
    # d_eps^2 >= 4 c1 f(lambda_2 tau, .)  and  (1 - 1/c)^2 d_eps^2 <= 4 c1 f(lambda_n tau, .)
    d_eps = d_epsilon(params.d, params.epsilon)
    pre_ok = (d_eps**2 >= 4.0 * params.c1 * f2
              and (params.c - 1.0) / params.c * d_eps <= 2.0 * np.sqrt(params.c1 * fn))
    return SpectralBounds(e_min=e_min, e_max=e_max, precondition_ok=bool(pre_ok),
                          kappa2=kappa2, kappan=kappan,
                          lambda2=lam2, lambdan=lamn,
                          sigma2=sigma2, sigman=sigman)
