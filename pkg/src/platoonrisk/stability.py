"""Delay-dependent stability of the deterministic platoon.

The platoon converges iff every nonzero Laplacian mode satisfies
(lambda_i * tau, beta * tau) in S, where

    S = {(s1, s2) : s1 in (0, pi/2), s2 in (0, a / tan a), a sin a = s1}.

``a sin a`` is strictly increasing from 0 to pi/2 on (0, pi/2), so the root
``a`` exists and is unique; ``a / tan a`` decreases from 1 to 0 there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .graphs import LaplacianSpectrum

_HALF_PI = math.pi / 2.0
#: inputs within this distance of the open boundary of S are treated as unstable
BOUNDARY_GUARD = 1e-12


def solve_a(s1: float) -> float:
    """Unique root a in (0, pi/2) of a*sin(a) = s1, residual below 1e-12.

    Bisection (100 iterations) bracketed on (0, pi/2), polished with two
    Newton steps.
    """
    if not (0.0 < s1 < _HALF_PI):
        raise DomainError(f"s1 must lie in (0, pi/2), got {s1}")
    lo, hi = 0.0, _HALF_PI
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid * math.sin(mid) < s1:
            lo = mid
        else:
            hi = mid
    a = 0.5 * (lo + hi)
    for _ in range(2):
        fa = a * math.sin(a) - s1
        da = math.sin(a) + a * math.cos(a)
        a -= fa / da
    if not (0.0 < a < _HALF_PI):  # Newton overshoot near the ends
        a = min(max(a, 1e-300), _HALF_PI - 1e-16)
    return a


def s2_cap(s1: float) -> float:
    """Upper limit a/tan(a) of the admissible s2 interval for a given s1."""
    a = solve_a(s1)
    return a / math.tan(a)


def in_region_S(s1: float, s2: float) -> bool:
    """Membership test for the open stability region S.

    Out-of-range inputs return False rather than raising; points within
    BOUNDARY_GUARD of the boundary are conservatively classified unstable.
    """
    if not (BOUNDARY_GUARD < s1 < _HALF_PI - BOUNDARY_GUARD):
        return False
    if s2 <= BOUNDARY_GUARD:
        return False
    return s2 < s2_cap(s1) - BOUNDARY_GUARD


@dataclass(frozen=True)
class ModeCheck:
    """Stability verdict for one Laplacian mode."""

    lam: float
    s1: float
    s2: float
    a_root: float  # nan when s1 is outside (0, pi/2)
    s2_cap: float  # nan when s1 is outside (0, pi/2)
    passed: bool
    boundary_flagged: bool = False  # within the floating-point guard of the boundary


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    per_mode: tuple[ModeCheck, ...]


def _check_mode(lam: float, tau: float, beta: float) -> ModeCheck:
    s1 = lam * tau
    s2 = beta * tau
    if not (0.0 < s1 < _HALF_PI):
        return ModeCheck(lam, s1, s2, math.nan, math.nan, False,
                         boundary_flagged=abs(s1) <= BOUNDARY_GUARD
                         or abs(s1 - _HALF_PI) <= BOUNDARY_GUARD)
    a = solve_a(s1)
    cap = a / math.tan(a)
    near_boundary = (s1 <= BOUNDARY_GUARD or s1 >= _HALF_PI - BOUNDARY_GUARD
                     or s2 <= BOUNDARY_GUARD or s2 >= cap - BOUNDARY_GUARD)
    passed = (0.0 < s2 < cap) and not near_boundary
    return ModeCheck(lam, s1, s2, a, cap, passed,
                     boundary_flagged=near_boundary and 0.0 < s2 < cap)


def platoon_stable(spec: LaplacianSpectrum, tau: float, beta: float) -> StabilityVerdict:
    """Aggregate stability verdict over modes 2..n (the zero mode is excluded)."""
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    checks = tuple(_check_mode(float(lam), tau, beta) for lam in spec.eigenvalues[1:])
    return StabilityVerdict(stable=all(c.passed for c in checks), per_mode=checks)


def stability_margin(verdict: StabilityVerdict) -> float:
    """Signed distance-like margin: positive when unstable with slack.

    For failing modes, how far (s1, s2) sits outside S: max of s1 - pi/2,
    -s1, s2 - cap.  Returns 0.0 for stable verdicts.
    """
    worst = 0.0
    for c in verdict.per_mode:
        if c.passed:
            continue
        if not (0.0 < c.s1 < _HALF_PI):
            worst = max(worst, c.s1 - _HALF_PI, -c.s1)
        else:
            worst = max(worst, c.s2 - c.s2_cap)
    return worst
