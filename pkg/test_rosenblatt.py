"""
Tests for the s-vine recursion: Rosenblatt functions, their inverse, the
joint and conditional densities, the streaming workspace and the Monte
Carlo marginal copula.
"""

import sys
import os

# Add the parent directory to the path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from scipy import integrate, linalg, special, stats

from svine.core.errors import DomainError
from svine.core.linear_oracle import dl_coefficients, gaussian_forward, gaussian_forward_inverse, pacf_to_acf
from svine.core.paircopula import Family, PairCopula, copula_from_tau
from svine.core.rosenblatt import (
    CopulaSequence,
    RosenblattWorkspace,
    backward,
    forward,
    forward_inverse,
    innovations_from_sweep,
    log_conditional_density,
    log_joint_density,
    log_likelihood_terms,
    marginal_copula_estimate,
)

TAUS = (0.5, 0.3, -0.2, 0.1, 0.05)


def gauss_sequence(alpha):
    return CopulaSequence(tuple(PairCopula(Family.GAUSS, a) for a in alpha))


def family_sequence(family, taus=TAUS):
    return CopulaSequence(tuple(copula_from_tau(family, t) for t in taus))


def exchangeable_sequence():
    # only 0 and 180 degree rotations keep the pair copulas exchangeable
    return CopulaSequence(
        (
            PairCopula(Family.CLAYTON, 2.0, 180),
            PairCopula(Family.GUMBEL, 1.5),
            PairCopula(Family.FRANK, -3.0),
            PairCopula(Family.JOE, 1.7, 180),
            PairCopula(Family.GAUSS, 0.3),
        )
        + tuple(PairCopula(Family.FRANK, 1.0 + k) for k in range(5))
    )


def test_sequence_pads_and_truncates():
    seq = CopulaSequence((PairCopula(Family.CLAYTON, 2.0),), truncation_lag=3)
    assert seq.p == 3
    assert seq.lag(2).is_independence and seq.lag(7).is_independence
    assert seq.truncated(1).p == 1
    with pytest.raises(DomainError):
        seq.lag(0)
    assert CopulaSequence.from_dict(seq.to_dict()) == seq


def test_forward_matches_gaussian_closed_form():
    rng = np.random.default_rng(11)
    # decaying pacf keeps every conditional law wide enough to stay clear of the clamp
    alpha = rng.uniform(-0.6, 0.6, 20) / np.arange(1, 21)
    seq = gauss_sequence(alpha)
    coef = dl_coefficients(alpha)
    for _ in range(500):
        k = int(rng.integers(0, 21))
        u = rng.uniform(0.05, 0.95, k)
        x, z = rng.uniform(0.05, 0.95, 2)
        assert abs(forward(seq, u, x) - gaussian_forward(coef, u, x)) < 1e-8
        assert abs(forward_inverse(seq, u, z) - gaussian_forward_inverse(coef, u, z)) < 1e-8


def test_log_joint_density_matches_gaussian_copula():
    rng = np.random.default_rng(12)
    alpha = rng.uniform(-0.5, 0.5, 8)
    seq = gauss_sequence(alpha)
    for n in (1, 2, 5, 9, 15):
        u = rng.uniform(0.05, 0.95, n)
        x = special.ndtri(u)
        # beyond lag 8 the pacf is zero, so the acf continues by the AR(8) recursion
        rho = pacf_to_acf(np.concatenate([alpha, np.zeros(max(0, n - 1 - alpha.size))]))
        corr = linalg.toeplitz(np.concatenate([[1.0], rho])[:n])
        expected = stats.multivariate_normal(np.zeros(n), corr).logpdf(x) - np.sum(stats.norm.logpdf(x))
        assert abs(log_joint_density(seq, u) - expected) < 1e-8


@pytest.mark.parametrize("family", [Family.GAUSS, Family.FRANK, Family.CLAYTON, Family.GUMBEL, Family.JOE])
def test_forward_inverse_roundtrip(family):
    rng = np.random.default_rng(13)
    seq = family_sequence(family)
    for k in range(0, 8):
        u = rng.uniform(0.02, 0.98, k)
        z = rng.uniform(0.02, 0.98)
        x = forward_inverse(seq, u, z)
        assert abs(forward(seq, u, x) - z) < 1e-9


def test_batched_forward_inverse():
    rng = np.random.default_rng(14)
    seq = family_sequence(Family.CLAYTON)
    u = rng.uniform(0.05, 0.95, (50, 6))
    z = rng.uniform(0.05, 0.95, 50)
    x = forward_inverse(seq, u, z)
    assert x.shape == (50,)
    np.testing.assert_allclose(forward(seq, u, x), z, atol=1e-9)


def test_reversibility_for_exchangeable_copulas():
    rng = np.random.default_rng(15)
    seq = exchangeable_sequence()
    for k in range(0, 11):
        u = rng.uniform(0.05, 0.95, k)
        x = rng.uniform(0.05, 0.95)
        assert abs(backward(seq, u[::-1], x) - forward(seq, u, x)) < 1e-12


def test_only_last_p_values_matter():
    seq = family_sequence(Family.FRANK, (0.4, -0.2))
    u = np.array([0.1, 0.9, 0.3, 0.7])
    assert forward(seq, u, 0.4) == forward(seq, u[-2:], 0.4)
    assert backward(seq, u, 0.4) == backward(seq, u[:2], 0.4)


def test_independence_sequence():
    seq = CopulaSequence.independence(4)
    u = np.array([0.2, 0.9, 0.4])
    assert forward(seq, u, 0.3) == pytest.approx(0.3)
    assert forward_inverse(seq, u, 0.3) == pytest.approx(0.3)
    assert log_joint_density(seq, u) == 0.0


def test_log_likelihood_terms_sum_to_joint_density():
    rng = np.random.default_rng(16)
    seq = family_sequence(Family.GUMBEL)
    u = rng.uniform(0.05, 0.95, 40)
    terms = log_likelihood_terms(seq, u)
    assert terms[0] == 0.0
    assert abs(np.sum(terms) - log_joint_density(seq, u)) < 1e-9


def test_conditional_density_is_ratio_of_joint_densities():
    rng = np.random.default_rng(17)
    seq = family_sequence(Family.JOE)
    for k in (1, 3, 5, 8):
        u = rng.uniform(0.05, 0.95, k)
        x = rng.uniform(0.05, 0.95)
        ratio = log_joint_density(seq, np.append(u, x)) - log_joint_density(seq, u)
        assert abs(log_conditional_density(seq, u, x) - ratio) < 1e-9


@pytest.mark.parametrize("family", [Family.FRANK, Family.CLAYTON, Family.GAUSS])
def test_conditional_density_integrates_to_one(family):
    rng = np.random.default_rng(18)
    seq = family_sequence(family, (0.4, 0.2, -0.15, 0.1, 0.05))
    for k in range(1, 6):
        u = rng.uniform(0.1, 0.9, k)
        total, _ = integrate.quad(
            lambda x: np.exp(log_conditional_density(seq, u, x)), 0.0, 1.0, limit=200, epsabs=1e-10
        )
        assert abs(total - 1.0) < 1e-6


def test_joint_density_integrates_to_one():
    seq = family_sequence(Family.FRANK, (0.3, -0.2))
    # midpoint rule on a 40^3 grid
    g = (np.arange(40) + 0.5) / 40
    u1, u2, u3 = np.meshgrid(g, g, g, indexing="ij")
    w = np.stack([u1.ravel(), u2.ravel(), u3.ravel()], axis=-1)
    dens = np.exp(np.sum(log_likelihood_terms(seq, w), axis=-1))
    assert abs(np.mean(dens) - 1.0) < 1e-3


def test_workspace_matches_sweep():
    rng = np.random.default_rng(19)
    seq = family_sequence(Family.CLAYTON)
    u = rng.uniform(0.05, 0.95, 30)
    ws = RosenblattWorkspace(seq)
    z = np.empty_like(u)
    logd = np.empty_like(u)
    for t, x in enumerate(u):
        zt, lt = ws.step_forward(np.array([x]))
        z[t], logd[t] = zt[0], lt[0]
    np.testing.assert_allclose(z, innovations_from_sweep(seq, u), atol=1e-12)
    np.testing.assert_allclose(logd, log_likelihood_terms(seq, u), atol=1e-10)
    assert list(ws.window_length) == [seq.p]


def test_workspace_inverse_then_forward():
    rng = np.random.default_rng(20)
    seq = family_sequence(Family.FRANK)
    z = rng.uniform(0.05, 0.95, (25, 3))
    sim = RosenblattWorkspace(seq, batch=3)
    u = np.stack([sim.step_inverse(z[t]) for t in range(25)])
    check = RosenblattWorkspace(seq, batch=3)
    back = np.stack([check.step_forward(u[t])[0] for t in range(25)])
    np.testing.assert_allclose(back, z, atol=1e-9)


def test_marginal_copula_estimate_independence():
    seq = CopulaSequence.independence(3)
    est = marginal_copula_estimate(seq, 3, 0.3, 0.6, n_samples=5000, seed=1)
    assert abs(est - 0.18) < 1e-12


def test_marginal_copula_estimate_gauss_lag_two():
    alpha = np.array([0.6, 0.3])
    seq = gauss_sequence(alpha)
    rho2 = pacf_to_acf(alpha)[1]
    est = marginal_copula_estimate(seq, 2, 0.4, 0.7, n_samples=2000, seed=3)
    expected = float(PairCopula(Family.GAUSS, rho2).cdf(0.4, 0.7))
    assert abs(est - expected) < 0.02
    assert est == marginal_copula_estimate(seq, 2, 0.4, 0.7, n_samples=2000, seed=3)


def test_marginal_copula_estimate_rejects_bad_lag():
    with pytest.raises(DomainError):
        marginal_copula_estimate(CopulaSequence.independence(1), 0, 0.5, 0.5)
