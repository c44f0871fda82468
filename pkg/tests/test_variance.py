import math

import numpy as np
import pytest

from platoonrisk import (DomainError, PlatoonParams, StabilityError,
                         build_topology, f_integral, f_reference, laplacian,
                         pair_variances, sigma_z_sq, spectrum)
from platoonrisk.stability import s2_cap
from platoonrisk.variance import mode_f_values

from conftest import random_connected_graph


def test_params_validation():
    with pytest.raises(DomainError):
        PlatoonParams(d=-1.0)
    with pytest.raises(DomainError):
        PlatoonParams(c=0.5)
    with pytest.raises(DomainError):
        PlatoonParams(epsilon=1.0)
    with pytest.raises(DomainError):
        PlatoonParams(n=1)
    p = PlatoonParams(g=0.0)  # noiseless runs are legitimate
    assert p.c1 == 0.0


def test_c1_prefactor():
    p = PlatoonParams(g=2.0, tau=0.5)
    assert math.isclose(p.c1, 4.0 * 0.125 / (2.0 * math.pi), rel_tol=1e-15)


def test_f_integral_matches_trapezoid_oracle():
    for s1, s2 in [(0.11, 1.0 / 300.0), (0.5, 0.2), (1.2, 0.05), (0.01, 0.9)]:
        ref = f_reference(s1, s2)
        val = f_integral(s1, s2)
        assert abs(val - ref) / ref < 1e-7


def test_f_integral_error_estimate_bounds_true_error():
    for s1, s2 in [(0.11, 1.0 / 300.0), (0.8, 0.1), (0.05, 0.5)]:
        ref = f_reference(s1, s2)
        val, est = f_integral(s1, s2, full_output=True)
        assert abs(val - ref) <= est


def test_f_integral_rejects_unstable_inputs():
    with pytest.raises(DomainError):
        f_integral(-0.1, 0.1)
    with pytest.raises(StabilityError):
        f_integral(2.0, 0.1)  # s1 > pi/2
    cap = s2_cap(0.5)
    with pytest.raises(StabilityError):
        f_integral(0.5, cap + 0.01)


def test_f_diverges_towards_the_boundary():
    # f grows without bound as s2 approaches the cap from below
    cap = s2_cap(0.5)
    vals = [f_integral(0.5, cap * frac) for frac in (0.5, 0.9, 0.99, 0.999)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[3] > 100 * vals[0]


def test_f_decreasing_in_s1_on_sampled_range():
    s2 = 1.0 / 300.0
    vals = [f_integral(s1, s2) for s1 in (0.02, 0.05, 0.11, 0.3, 0.6, 1.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_sigma_z_scaling_in_g():
    lam = 11.0
    p1 = PlatoonParams(g=1.0)
    p2 = PlatoonParams(g=2.0)
    assert math.isclose(sigma_z_sq(lam, p2), 4.0 * sigma_z_sq(lam, p1), rel_tol=1e-12)


def test_mode_f_values_cache_consistency(k11_spectrum, base_params):
    fv = mode_f_values(k11_spectrum, base_params)
    assert fv.shape == (10,)
    # all nonzero modes of K11 coincide, so all f values must be identical
    assert np.all(fv == fv[0])
    direct = f_integral(11.0 * base_params.tau, base_params.beta * base_params.tau)
    assert abs(fv[0] - direct) / direct < 1e-9


def test_pair_variances_complete_graph_symmetry(k11_spectrum, base_params):
    pv = pair_variances(k11_spectrum, base_params)
    assert pv.sigma_sq.shape == (10,)
    assert np.allclose(pv.sigma_sq, pv.sigma_sq[0], rtol=1e-10)
    # closed form: every pair sees sigma^2 = 2 c1 f(lambda tau, beta tau)
    f = f_integral(0.11, 1.0 / 300.0)
    assert np.allclose(pv.sigma_sq, 2.0 * base_params.c1 * f, rtol=1e-8)


def test_pair_variances_difference_weights_sum_to_two(k11_spectrum):
    # sum_k (e~_j^T q_k)^2 = |e~_j|^2 = 2 for every pair j
    Q = k11_spectrum.eigenvectors[:, 1:]
    B = Q[1:, :] - Q[:-1, :]
    assert np.allclose((B**2).sum(axis=1), 2.0, atol=1e-10)


def test_pair_variances_covariance_psd_and_consistent(base_params):
    g = build_topology("pcycle", 11, p=4, weights=(0.8, 1.2), seed=11)
    pv = pair_variances(spectrum(laplacian(g)), base_params)
    assert np.allclose(np.diag(pv.covariance), pv.sigma_sq, rtol=1e-10)
    eig = np.linalg.eigvalsh(pv.covariance)
    assert eig.min() > -1e-12 * eig.max()


def test_pair_variances_requires_stability(k11_spectrum):
    with pytest.raises(StabilityError):
        pair_variances(k11_spectrum, PlatoonParams(tau=0.2))


def test_pair_variances_sandwiched_by_extreme_modes(base_params):
    # 2 c1 f(lam_n tau) <= sigma_j^2 <= 2 c1 f(lam_2 tau) on random graphs
    rng = np.random.default_rng(17)
    for _ in range(5):
        g = random_connected_graph(rng, 9)
        spec = spectrum(laplacian(g))
        p = PlatoonParams(n=9)
        pv = pair_variances(spec, p)
        s2 = p.beta * p.tau
        lo = 2.0 * p.c1 * f_integral(spec.lambda_max * p.tau, s2)
        hi = 2.0 * p.c1 * f_integral(spec.lambda2 * p.tau, s2)
        assert np.all(pv.sigma_sq >= lo * (1 - 1e-9))
        assert np.all(pv.sigma_sq <= hi * (1 + 1e-9))
