"""
Tests for the Gaussian machinery: Durbin-Levinson transforms, ARMA / ARFIMA /
FGN autocorrelations, predictor coefficients, the sum-product identity and
the kpacf parameterizations.
"""

import sys
import os

# Add the parent directory to the path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from scipy import special

from svine.core.errors import DomainError
from svine.core.linear_oracle import (
    KpacfKind,
    KpacfSpec,
    acf_to_pacf,
    ar_from_partials,
    arfima_acf,
    arfima_pacf,
    arma_acf,
    debowski_check,
    dl_coefficients,
    fgn_acf,
    fgn_pacf,
    gaussian_inverse,
    ma_weights,
    pacf_to_acf,
    partials_from_ar,
    tau_from_alpha,
)


def constant_acf_pacf(K):
    return 1.0 / (np.arange(1, K + 1) + 1.0)


def test_constant_acf_identity():
    rho = pacf_to_acf(constant_acf_pacf(50))
    np.testing.assert_allclose(rho, 0.5, atol=1e-12)


def test_constant_acf_predictor_coefficients():
    K = 30
    coef = dl_coefficients(constant_acf_pacf(K))
    for k in range(1, K + 1):
        np.testing.assert_allclose(coef.phi[k, 1:k + 1], 1.0 / (k + 1), atol=1e-12)
        j = np.arange(1, k + 1)
        np.testing.assert_allclose(coef.psi[k, 1:k + 1], coef.sigma[k - j] / (k + 2 - j), atol=1e-12)
        assert coef.psi[k, 0] == coef.sigma[k]


def test_constant_acf_prediction_variance_limit():
    coef = dl_coefficients(constant_acf_pacf(1000))
    assert abs(coef.sigma[1000] ** 2 - 0.5) < 1e-3


def test_durbin_levinson_roundtrip():
    rng = np.random.default_rng(21)
    K = 50
    decay = 1.0 / np.arange(1, K + 1)
    for _ in range(100):
        alpha = rng.uniform(-0.9, 0.9, K) * decay
        rho = pacf_to_acf(alpha)
        np.testing.assert_allclose(acf_to_pacf(rho), alpha, atol=1e-12)
        np.testing.assert_allclose(pacf_to_acf(acf_to_pacf(rho)), rho, atol=1e-12)


def test_pacf_outside_unit_interval_names_the_lag():
    with pytest.raises(DomainError, match="lag 3"):
        pacf_to_acf([0.2, 0.1, 1.0])
    with pytest.raises(DomainError, match="lag 2"):
        acf_to_pacf([0.9, -0.9])


def test_ar1_acf_is_geometric():
    rho = arma_acf([0.95], [], 40)
    np.testing.assert_allclose(rho, 0.95 ** np.arange(1, 41), atol=1e-10)


def test_ma1_acf():
    rho = arma_acf([], [0.4], 5)
    assert abs(rho[0] - 0.4 / 1.16) < 1e-14
    np.testing.assert_allclose(rho[1:], 0.0, atol=1e-15)


def test_ma_weights_of_arma11():
    w = ma_weights([0.5], [0.3])
    assert w[0] == 1.0
    np.testing.assert_allclose(w[1:6], 0.8 * 0.5 ** np.arange(5), atol=1e-15)
    assert abs(w[-1]) >= 1e-14


def test_non_causal_ar_is_rejected():
    with pytest.raises(DomainError):
        arma_acf([1.1], [], 5)
    with pytest.raises(DomainError):
        KpacfSpec(KpacfKind.ARMA, ar=(0.5, 0.6))


@pytest.mark.parametrize("d", [-0.3, 0.02, 0.45])
def test_fractional_noise_pacf(d):
    k = np.arange(1, 101)
    np.testing.assert_allclose(arfima_pacf([], d, [], 100), d / (k - d), atol=1e-10)
    via_acf = acf_to_pacf(arfima_acf([], d, [], 30))
    np.testing.assert_allclose(via_acf, d / (k[:30] - d), atol=1e-4)


def test_arfima_pacf_decays_like_d_over_k():
    alpha = arfima_pacf([0.5], 0.3, [-0.3], 500)
    assert abs(500 * alpha[-1] - 0.3) < 0.03


def test_arfima_with_zero_d_is_arma():
    np.testing.assert_allclose(arfima_pacf([0.6], 0.0, [0.2], 20), acf_to_pacf(arma_acf([0.6], [0.2], 20)))


def test_fgn():
    np.testing.assert_allclose(fgn_acf(0.5, 10), 0.0, atol=1e-15)
    np.testing.assert_allclose(fgn_pacf(0.5, 10), 0.0, atol=1e-15)
    rho = fgn_acf(0.8, 3)
    assert abs(rho[0] - (2 ** 1.6 - 2) / 2) < 1e-14
    with pytest.raises(DomainError):
        fgn_acf(1.0, 3)


def test_ma_reconstruction_of_predictor_recursion():
    rng = np.random.default_rng(22)
    K = 30
    coef = dl_coefficients(rng.uniform(-0.7, 0.7, K))
    eps = rng.standard_normal(K + 1)
    x = np.zeros(K + 1)
    for k in range(K + 1):
        x[k] = coef.phi[k, 1:k + 1] @ x[k - 1::-1][:k] + coef.sigma[k] * eps[k]
    for k in range(K + 1):
        assert abs(x[k] - coef.psi[k, : k + 1] @ eps[k::-1]) < 1e-10


def test_gaussian_inverse_follows_the_predictor_recursion():
    rng = np.random.default_rng(23)
    K = 10
    alpha = rng.uniform(-0.6, 0.6, K)
    coef = dl_coefficients(alpha)
    z = rng.uniform(0.05, 0.95, K + 1)
    x = np.zeros(K + 1)
    for k in range(K + 1):
        x[k] = coef.phi[k, 1:k + 1] @ x[k - 1::-1][:k] + coef.sigma[k] * special.ndtri(z[k])
    assert abs(gaussian_inverse(coef, z[:-1], z[-1]) - special.ndtr(x[-1])) < 1e-12


def test_debowski_identity_finite_support():
    rng = np.random.default_rng(24)
    for _ in range(50):
        support = int(rng.integers(1, 11))
        alpha = rng.uniform(-0.8, 0.8, support)
        lhs, rhs = debowski_check(alpha, horizon=2_000_000)
        assert abs(lhs - rhs) < 1e-6 * max(1.0, abs(rhs))


def test_debowski_identity_for_truncated_arfima():
    d, K = 0.1, 2000
    lhs, rhs = debowski_check(arfima_pacf([], d, [], K))
    # prod k / (k - 2d) over k <= K
    closed = np.exp(special.gammaln(K + 1) + special.gammaln(1 - 2 * d) - special.gammaln(K + 1 - 2 * d))
    assert abs(rhs / closed - 1.0) < 1e-10
    assert abs(lhs - rhs) / rhs < 0.05


@pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
def test_ar_lower_bound(p):
    a = 0.3
    lhs, _ = debowski_check(np.full(p, a))
    acf_sum = (lhs - 1.0) / 2.0
    assert acf_sum >= 0.5 * (((1 + a) / (1 - a)) ** p - 1) - 1e-9


def test_partials_roundtrip():
    phi = np.array([0.5, -0.2, 0.1])
    np.testing.assert_allclose(ar_from_partials(partials_from_ar(phi)), phi, atol=1e-14)


def test_kpacf_spec_arma11():
    spec = KpacfSpec(KpacfKind.ARMA, ar=(0.95,), ma=(-0.85,), horizon=30)
    tau = spec.kpacf()
    assert tau.shape == (30,)
    np.testing.assert_allclose(tau, tau_from_alpha(arfima_pacf([0.95], 0.0, [-0.85], 30)))
    assert spec.param_names() == ["phi1", "psi1"]


def test_kpacf_spec_unconstrained_roundtrip():
    spec = KpacfSpec(KpacfKind.ARFIMA, ar=(0.6,), d=0.2, ma=(-0.4,), horizon=10)
    back = spec.from_unconstrained(spec.to_unconstrained())
    np.testing.assert_allclose(back.free_params(), spec.free_params(), atol=1e-12)
    fixed = spec.replace(fixed=("d",))
    assert fixed.param_names() == ["phi1", "psi1"]
    moved = fixed.from_unconstrained(np.zeros(2))
    assert moved.d == 0.2 and moved.ar == (0.0,) and moved.ma == (0.0,)


def test_kpacf_spec_json():
    for spec in (
        KpacfSpec(KpacfKind.FGN, hurst=0.7, horizon=5),
        KpacfSpec(KpacfKind.EXPLICIT, tau=(0.3, -0.1)),
        KpacfSpec(KpacfKind.ARMA, ar=(0.5,), horizon=4, fixed=("ma",)),
    ):
        assert KpacfSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(DomainError):
        KpacfSpec.from_dict({"kind": "arma", "theta": {"ar": [0.5], "sigma": 1.0}})
    with pytest.raises(DomainError):
        KpacfSpec.from_dict({"kind": "garch"})
    with pytest.raises(DomainError):
        KpacfSpec(KpacfKind.ARFIMA, d=0.5)
