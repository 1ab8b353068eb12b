"""
Tests for the fitting pipeline: pseudo-observations, copula fits, margins,
residuals, the semi-empirical kpacf, standard errors and AIC comparison.
"""

import sys
import os

# Add the parent directory to the path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from scipy import integrate, optimize, stats

from svine.core.errors import ConvergenceError, DomainError, InputError
from svine.core.inference import (
    FitReport,
    aic_table,
    fit_copula,
    fit_full,
    fit_margin,
    log_likelihood,
    margin_standard_errors,
    observed_information_stderr,
    pseudo_observations,
    residuals,
    semi_empirical_kpacf,
    standard_errors,
)
from svine.core.linear_oracle import KpacfKind, KpacfSpec
from svine.core.margins import MarginalModel, MarginKind, skewed_t_cdf, skewed_t_logpdf, skewed_t_ppf
from svine.core.paircopula import Family, copula_from_tau
from svine.core.process import SVineModel, simulate
from svine.core.rosenblatt import CopulaSequence, log_joint_density

AR1 = KpacfSpec(KpacfKind.ARMA, ar=(0.5,), horizon=3)
ARMA11 = KpacfSpec(KpacfKind.ARMA, ar=(0.95,), ma=(-0.85,), horizon=30)


def test_pseudo_observations_average_ties():
    u = pseudo_observations([3.0, 1.0, 2.0, 2.0])
    np.testing.assert_allclose(u, [4 / 5, 1 / 5, 2.5 / 5, 2.5 / 5])
    with pytest.raises(InputError):
        pseudo_observations([1.0])
    with pytest.raises(InputError):
        pseudo_observations([1.0, np.nan, 2.0])


def test_fit_copula_recovers_ar1_and_is_consistent():
    model = SVineModel.from_kpacf(AR1, Family.FRANK)
    u = simulate(model, 1500, seed=41).u
    report = fit_copula(u, AR1.replace(ar=(0.2,)), Family.FRANK, semi_empirical_lags=3)
    assert report.converged
    assert abs(report.theta_hat["phi1"] - 0.5) < 0.1
    assert report.n_params == 1 and report.n_obs == 1500
    assert abs(report.loglik - log_joint_density(report.model().seq, u)) < 1e-9
    assert abs(report.loglik - log_likelihood(u, report.model())) < 1e-9
    assert abs(report.aic - (2.0 - 2.0 * report.loglik)) < 1e-12
    assert len(report.residuals_z) == 1500
    assert len(report.semi_empirical_kpacf) == 3
    assert report.stderr is not None and report.stderr[0] > 0.0
    assert report.loglik >= log_joint_density(model.seq, u) - 1e-6


def test_residuals_of_true_model_are_the_innovations():
    seq = CopulaSequence(tuple(copula_from_tau(Family.GUMBEL, t) for t in (0.4, 0.2, -0.1)))
    path = simulate(seq, 400, seed=42)
    z, z_normal = residuals(path.u, SVineModel(seq))
    np.testing.assert_allclose(z, path.z, atol=1e-9)
    np.testing.assert_allclose(stats.norm.cdf(z_normal), z, atol=1e-9)


def test_residual_diagnostics_of_true_model():
    seq = CopulaSequence(tuple(copula_from_tau(Family.CLAYTON, t) for t in (0.5, 0.2, -0.1)))
    n = 5000
    u = simulate(seq, n, seed=43).u
    z, z_normal = residuals(u, SVineModel(seq))
    assert stats.kstest(z, "uniform").pvalue > 0.01
    centred = z_normal - z_normal.mean()
    for lag in range(1, 6):
        acf = np.sum(centred[lag:] * centred[:-lag]) / np.sum(centred ** 2)
        assert abs(acf) < 3.0 / np.sqrt(n)


def test_semi_empirical_kpacf_of_model_data():
    taus = (0.4, 0.2, -0.1, 0.05, 0.0)
    seq = CopulaSequence(tuple(copula_from_tau(Family.FRANK, t) for t in taus))
    u = simulate(seq, 5000, seed=44).u
    est = semi_empirical_kpacf(u, SVineModel(seq), 5)
    np.testing.assert_allclose(est, taus, atol=0.05)


def test_semi_empirical_kpacf_of_iid_data():
    n = 2000
    u = np.random.default_rng(45).uniform(size=n)
    est = semi_empirical_kpacf(u, SVineModel(CopulaSequence.independence(10)), 10)
    se = np.sqrt(2.0 * (2 * n + 5) / (9.0 * n * (n - 1)))
    assert np.all(np.abs(est) < 4.0 * se)


def test_gaussian_ar1_standard_error():
    phi, n = 0.8, 2000
    spec = KpacfSpec(KpacfKind.ARMA, ar=(phi,), horizon=1)
    u = simulate(SVineModel.from_kpacf(spec, Family.GAUSS), n, seed=46).u
    report = fit_copula(u, spec, Family.GAUSS)
    assert abs(report.theta_hat["phi1"] - phi) < 0.05
    # uniform margins are known, so the innovation variance 1 - phi^2 is not a free parameter
    expected = np.sqrt((1 - phi ** 2) ** 2 / ((1 + phi ** 2) * n))
    assert abs(report.stderr[0] / expected - 1.0) < 0.3
    se, flag = standard_errors(report, u)
    assert flag is None
    np.testing.assert_allclose(se, report.stderr, rtol=1e-6)


def test_non_convergence_carries_report():
    u = simulate(SVineModel.from_kpacf(AR1, Family.FRANK), 300, seed=47).u
    with pytest.raises(ConvergenceError) as info:
        fit_copula(u, ARMA11.replace(horizon=3), Family.FRANK, max_iter=1)
    report = info.value.report
    assert isinstance(report, FitReport)
    assert not report.converged
    assert report.stderr is None


def test_fit_rejects_data_outside_unit_interval():
    with pytest.raises(InputError):
        fit_copula([0.2, 1.0, 0.4], AR1, Family.FRANK)


def test_fit_report_json_roundtrip():
    u = simulate(SVineModel.from_kpacf(AR1, Family.CLAYTON), 300, seed=48).u
    report = fit_copula(u, AR1, Family.CLAYTON, compute_stderr=False)
    back = FitReport.from_json(report.to_json())
    assert back.spec == report.spec
    assert back.family is Family.CLAYTON
    assert back.loglik == report.loglik
    np.testing.assert_allclose(back.residuals_z, report.residuals_z)
    with pytest.raises(InputError):
        FitReport.from_json("{not json")


def test_aic_table_orders_models():
    u = simulate(SVineModel.from_kpacf(AR1, Family.CLAYTON), 800, seed=49).u
    good = fit_copula(u, AR1, Family.CLAYTON, compute_stderr=False)
    fixed = fit_copula(u, AR1.replace(ar=(0.0,), fixed=("ar",)), Family.CLAYTON, compute_stderr=False)
    table = aic_table({"ar1": good, "independent": fixed})
    assert list(table["model"]) == ["ar1", "independent"]
    assert list(table["n_params"]) == [1, 0]


def test_skewed_student_density_and_quantiles():
    nu, gamma = 5.0, 1.5
    density = lambda z: float(np.exp(skewed_t_logpdf(z, nu, gamma)))
    left, _ = integrate.quad(density, -np.inf, 0.0)
    right, _ = integrate.quad(density, 0.0, np.inf)
    assert abs(left + right - 1.0) < 1e-6
    assert abs(left - 1.0 / (1.0 + gamma ** 2)) < 1e-6
    p = np.linspace(0.001, 0.999, 51)
    np.testing.assert_allclose(skewed_t_cdf(skewed_t_ppf(p, nu, gamma), nu, gamma), p, atol=1e-8)
    assert abs(skewed_t_cdf(0.0, nu, gamma) - 1.0 / (1.0 + gamma ** 2)) < 1e-14


def test_margin_models():
    normal = MarginalModel(MarginKind.NORMAL, (1.0, 2.0))
    assert abs(normal.cdf(1.0) - 0.5) < 1e-15
    empirical = MarginalModel(MarginKind.EMPIRICAL, sample=(3.0, 1.0, 2.0, 2.0))
    np.testing.assert_allclose(empirical.cdf([3.0, 1.0, 2.0]), pseudo_observations([3.0, 1.0, 2.0, 2.0])[:3])
    assert MarginalModel.from_dict(normal.to_dict()) == normal
    with pytest.raises(DomainError):
        MarginalModel(MarginKind.SKEWED_STUDENT, (0.0, 1.0, 2.0, 1.0))


def test_fit_normal_margin_is_sample_moments():
    x = np.random.default_rng(50).normal(3.0, 2.0, 500)
    margin = fit_margin(x, MarginKind.NORMAL)
    assert margin.params == (pytest.approx(np.mean(x)), pytest.approx(np.std(x)))
    se, flag = margin_standard_errors(margin, x)
    assert flag is None and se.shape == (2,)


def test_skewed_student_recovery():
    truth = MarginalModel(MarginKind.SKEWED_STUDENT, (0.5, 2.0, 5.0, 1.5))
    x = truth.rvs(5000, seed=51)
    margin = fit_margin(x, MarginKind.SKEWED_STUDENT)
    se, flag = margin_standard_errors(margin, x)
    assert flag is None
    for estimate, true_value, s in zip(margin.params, truth.params, se):
        assert abs(estimate - true_value) < 3.0 * s + 1e-12


def test_fit_full_normal_margin():
    margin = MarginalModel(MarginKind.NORMAL, (10.0, 0.5))
    model = SVineModel.from_kpacf(AR1, Family.GUMBEL, margin=margin)
    x = simulate(model, 1000, seed=52).x
    report = fit_full(x, MarginKind.NORMAL, AR1, Family.GUMBEL, compute_stderr=False)
    assert report.margin_fit.kind is MarginKind.NORMAL
    assert report.total_n_params == 3
    assert abs(report.total_loglik - (report.loglik + report.margin_fit.loglik)) < 1e-12
    assert abs(report.theta_hat["phi1"] - 0.5) < 0.1


def test_fit_full_empirical_margin():
    x = np.random.default_rng(53).standard_t(4, 300)
    report = fit_full(x, MarginKind.EMPIRICAL, AR1.replace(ar=(0.1,)), Family.FRANK, compute_stderr=False)
    assert report.margin_fit.kind is MarginKind.EMPIRICAL
    assert report.total_n_params == report.n_params


@pytest.mark.slow
def test_gumbel_process_beats_gauss_process():
    model = SVineModel.from_kpacf(ARMA11, Family.GUMBEL)
    u = simulate(model, 2000, seed=54).u
    gumbel = fit_copula(u, ARMA11, Family.GUMBEL, compute_stderr=False)
    gauss = fit_copula(u, ARMA11, Family.GAUSS, compute_stderr=False)
    assert abs(gumbel.theta_hat["phi1"] - 0.95) < 0.1
    assert abs(gumbel.theta_hat["psi1"] + 0.85) < 0.1
    assert gumbel.aic < gauss.aic


def _gaussian_ar1_loglik(x, mu, sigma, phi):
    innovation_sd = sigma * np.sqrt(1.0 - phi ** 2)
    first = stats.norm.logpdf(x[0], mu, sigma)
    rest = stats.norm.logpdf(x[1:], mu + phi * (x[:-1] - mu), innovation_sd)
    return float(first + np.sum(rest))


def test_gauss_copula_with_normal_margin_is_gaussian_ar1():
    margin = MarginalModel(MarginKind.NORMAL, (1.0, 2.0))
    spec = KpacfSpec(KpacfKind.ARMA, ar=(0.6,), horizon=1)
    x = simulate(SVineModel.from_kpacf(spec, Family.GAUSS, margin=margin), 800, seed=55).x
    report = fit_full(x, MarginKind.NORMAL, spec.replace(ar=(0.3,)), Family.GAUSS, compute_stderr=False)
    mu, sigma = report.margin_fit.params
    phi = report.theta_hat["phi1"]
    assert abs(report.total_loglik - _gaussian_ar1_loglik(x, mu, sigma, phi)) < 1e-6

    direct = optimize.minimize(
        lambda p: -_gaussian_ar1_loglik(x, p[0], np.exp(p[1]), np.tanh(p[2])),
        np.array([mu, np.log(sigma), np.arctanh(phi)]),
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-10, "maxiter": 5000},
    )
    # two-stage estimates sit close to, never above, the joint optimum
    assert -direct.fun >= report.total_loglik - 1e-6
    assert -direct.fun - report.total_loglik < 1.0
    assert abs(np.tanh(direct.x[2]) - phi) < 0.02
    assert abs(direct.x[0] - mu) < 0.1


def test_fit_full_empirical_matches_copula_fit_of_ranks():
    x = simulate(SVineModel.from_kpacf(AR1, Family.CLAYTON, margin=MarginalModel(MarginKind.NORMAL, (0.0, 3.0))), 400, seed=56).x
    template = AR1.replace(ar=(0.1,))
    full = fit_full(x, MarginKind.EMPIRICAL, template, Family.CLAYTON, compute_stderr=False)
    direct = fit_copula(pseudo_observations(x), template, Family.CLAYTON, compute_stderr=False)
    assert full.theta_hat == pytest.approx(direct.theta_hat, abs=1e-12)
    assert full.loglik == pytest.approx(direct.loglik, abs=1e-12)
    assert full.total_loglik is None or full.total_loglik == pytest.approx(full.loglik)


def test_observed_information_of_quadratic():
    se, flag = observed_information_stderr(lambda x: (x[0] - 1.0) ** 2 / (2.0 * 0.04), [1.0])
    assert flag is None
    np.testing.assert_allclose(se, [0.2], rtol=1e-4)


def test_observed_information_flags_flat_direction():
    se, flag = observed_information_stderr(lambda x: (x[0] - 1.0) ** 2 / (2.0 * 0.04), [1.0, 0.0])
    assert se is None
    assert flag


def test_skewed_student_with_unit_gamma_is_student_t():
    x = np.random.default_rng(57).standard_t(5, 3000) * 1.5 + 0.3
    margin = fit_margin(x, MarginKind.SKEWED_STUDENT, fixed_gamma=1.0)
    mu, sigma, nu, gamma = margin.params
    assert gamma == 1.0
    t_loglik = np.sum(stats.t.logpdf(x, nu, loc=mu, scale=sigma))
    assert abs(margin.loglik - t_loglik) < 1e-8
    df, loc, scale = stats.t.fit(x)
    assert margin.loglik >= np.sum(stats.t.logpdf(x, df, loc=loc, scale=scale)) - 1e-3
    assert abs(nu - df) < 1.0
