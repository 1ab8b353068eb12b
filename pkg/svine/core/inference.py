"""
Fitting pipeline for s-vine copula processes.

Pseudo-observations, pseudo-maximum-likelihood estimation of a
kpacf-parameterized copula sequence, marginal fits, two-stage IFM, residuals,
the semi-empirical kpacf, observed-information standard errors and AIC
comparison.
"""

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import optimize, special, stats

from .config import CLAMP_EPS, DEFAULT_NEGATIVE_ROTATION, HESSIAN_STEP
from .errors import ConvergenceError, DomainError, InputError, NumericError
from .linear_oracle import KpacfSpec
from .logging_utils import get_logger
from .margins import MarginalModel, MarginKind
from .paircopula import Family, NegativeTauRule
from .process import SVineModel, invert_to_innovations, sequence_from_kpacf
from .rosenblatt import lag_sweep, log_joint_density

logger = get_logger("inference", "inference.log")

_PENALTY = 1e10


def pseudo_observations(x: Sequence[float]) -> np.ndarray:
    """Average ranks divided by n + 1."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InputError(f"pseudo-observations need at least 2 values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InputError("data contain non-finite values")
    return stats.rankdata(x, method="average") / (x.size + 1)


def _check_unit(u: Sequence[float]) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 2:
        raise InputError(f"need a vector of at least 2 copula-scale values, got shape {u.shape}")
    if not np.all((u > 0.0) & (u < 1.0)):
        raise InputError("copula-scale data must lie strictly inside (0, 1)")
    return u


@dataclass
class FitReport:
    """Result of a copula-process fit; serializes to JSON."""

    spec: KpacfSpec
    family: Family
    negative_rule: NegativeTauRule
    truncation_lag: int
    loglik: float
    n_obs: int
    converged: bool = True
    negative_rotation: int = DEFAULT_NEGATIVE_ROTATION
    positive_rotation: int = 0
    stderr: Optional[List[float]] = None
    stderr_flag: Optional[str] = None
    stderr_method: str = "observed-information"
    residuals_z: List[float] = field(default_factory=list)
    residuals_normal: List[float] = field(default_factory=list)
    semi_empirical_kpacf: List[float] = field(default_factory=list)
    margin_fit: Optional[MarginalModel] = None
    optimizer_message: str = ""

    @property
    def param_names(self) -> List[str]:
        return self.spec.param_names()

    @property
    def theta_hat(self) -> Dict[str, float]:
        return dict(zip(self.param_names, self.spec.free_params().tolist()))

    @property
    def n_params(self) -> int:
        return self.spec.n_free

    @property
    def aic(self) -> float:
        return 2.0 * self.n_params - 2.0 * self.loglik

    @property
    def total_n_params(self) -> int:
        extra = self.margin_fit.n_params if self.margin_fit is not None else 0
        return self.n_params + extra

    @property
    def total_loglik(self) -> Optional[float]:
        if self.margin_fit is None:
            return self.loglik
        if self.margin_fit.loglik is None:
            return None
        return self.loglik + self.margin_fit.loglik

    @property
    def total_aic(self) -> Optional[float]:
        ll = self.total_loglik
        return None if ll is None else 2.0 * self.total_n_params - 2.0 * ll

    def model(self) -> SVineModel:
        return SVineModel.from_kpacf(
            self.spec,
            self.family,
            self.negative_rule,
            self.truncation_lag,
            self.margin_fit,
            self.negative_rotation,
            self.positive_rotation,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kpacf": self.spec.to_dict(),
            "copula": {
                "family": self.family.value,
                "negative_rule": self.negative_rule.value,
                "negative_rotation": self.negative_rotation,
                "positive_rotation": self.positive_rotation,
            },
            "truncation_lag": self.truncation_lag,
            "theta_hat": self.theta_hat,
            "n_obs": self.n_obs,
            "n_params": self.n_params,
            "loglik": self.loglik,
            "aic": self.aic,
            "total_n_params": self.total_n_params,
            "total_loglik": self.total_loglik,
            "total_aic": self.total_aic,
            "converged": self.converged,
            "optimizer_message": self.optimizer_message,
            "stderr": self.stderr,
            "stderr_flag": self.stderr_flag,
            "stderr_method": self.stderr_method,
            "margin": self.margin_fit.to_dict() if self.margin_fit is not None else None,
            "residuals_z": list(self.residuals_z),
            "residuals_normal": list(self.residuals_normal),
            "semi_empirical_kpacf": list(self.semi_empirical_kpacf),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FitReport":
        try:
            copula = data["copula"]
            margin = data.get("margin")
            return cls(
                spec=KpacfSpec.from_dict(data["kpacf"]),
                family=Family(copula["family"]),
                negative_rule=NegativeTauRule(copula.get("negative_rule", "rotate")),
                negative_rotation=int(copula.get("negative_rotation", DEFAULT_NEGATIVE_ROTATION)),
                positive_rotation=int(copula.get("positive_rotation", 0)),
                truncation_lag=int(data["truncation_lag"]),
                loglik=float(data["loglik"]),
                n_obs=int(data["n_obs"]),
                converged=bool(data.get("converged", True)),
                stderr=data.get("stderr"),
                stderr_flag=data.get("stderr_flag"),
                stderr_method=data.get("stderr_method", "observed-information"),
                residuals_z=list(data.get("residuals_z", [])),
                residuals_normal=list(data.get("residuals_normal", [])),
                semi_empirical_kpacf=list(data.get("semi_empirical_kpacf", [])),
                margin_fit=MarginalModel.from_dict(margin) if margin else None,
                optimizer_message=data.get("optimizer_message", ""),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"Malformed fit report: {e}") from e

    @classmethod
    def from_json(cls, text: str) -> "FitReport":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise InputError(f"Fit report is not valid JSON: {e}") from e


def log_likelihood(u: Sequence[float], model: SVineModel) -> float:
    return log_joint_density(model.seq, np.asarray(u, dtype=float))


def _copula_objective(
    u: np.ndarray,
    template: KpacfSpec,
    family: Family,
    negative_rule: NegativeTauRule,
    truncation: Optional[int],
    negative_rotation: int,
    positive_rotation: int,
) -> Callable[[np.ndarray], float]:
    def negloglik(x: np.ndarray) -> float:
        try:
            spec = template.from_unconstrained(x)
            seq = sequence_from_kpacf(spec, family, negative_rule, truncation, negative_rotation, positive_rotation)
            ll = log_joint_density(seq, u)
        except (DomainError, NumericError, FloatingPointError):
            return _PENALTY
        return -ll if np.isfinite(ll) else _PENALTY

    return negloglik


def _nelder_mead(fun: Callable[[np.ndarray], float], x0: np.ndarray, max_iter: Optional[int]) -> optimize.OptimizeResult:
    options = {"xatol": 1e-6, "fatol": 1e-8, "maxiter": max_iter or 400 * max(x0.size, 1), "adaptive": x0.size > 2}
    return optimize.minimize(fun, x0, method="Nelder-Mead", options=options)


def minimize_with_restart(
    fun: Callable[[np.ndarray], float], x0: np.ndarray, max_iter: Optional[int] = None
) -> optimize.OptimizeResult:
    """Nelder-Mead from x0, then once more from a perturbed optimum; returns the better run."""
    first = _nelder_mead(fun, x0, max_iter)
    x1 = first.x + 0.1 * np.where(np.abs(first.x) > 1e-3, np.abs(first.x), 1.0)
    second = _nelder_mead(fun, x1, max_iter)
    best = second if second.fun <= first.fun else first
    best.success = bool(first.success or second.success) and best.fun < _PENALTY
    return best


def observed_information_stderr(
    negloglik: Callable[[np.ndarray], float],
    x_hat: Sequence[float],
    to_natural: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    step: float = HESSIAN_STEP,
) -> Tuple[Optional[np.ndarray], Optional[str]]:
    """
    Standard errors from the inverse numerical Hessian of a negative log-likelihood.

    The Hessian is taken by central differences on the (unconstrained) scale of
    x_hat; to_natural maps that scale to the reported parameters and its
    Jacobian carries the covariance across (delta method).

    Returns:
        (stderr, None) on success, (None, flag) when the Hessian is not
        positive definite.
    """
    x_hat = np.asarray(x_hat, dtype=float)
    k = x_hat.size
    if k == 0:
        return np.zeros(0), None
    f0 = negloglik(x_hat)
    hess = np.zeros((k, k))
    eye = np.eye(k) * step
    for i in range(k):
        hess[i, i] = (negloglik(x_hat + eye[i]) - 2.0 * f0 + negloglik(x_hat - eye[i])) / step ** 2
        for j in range(i + 1, k):
            val = (
                negloglik(x_hat + eye[i] + eye[j])
                - negloglik(x_hat + eye[i] - eye[j])
                - negloglik(x_hat - eye[i] + eye[j])
                + negloglik(x_hat - eye[i] - eye[j])
            ) / (4.0 * step ** 2)
            hess[i, j] = hess[j, i] = val
    if not np.all(np.isfinite(hess)):
        return None, "hessian not finite"
    try:
        chol = np.linalg.cholesky(hess)
    except np.linalg.LinAlgError:
        return None, "hessian not positive definite"
    if np.min(np.abs(np.diag(chol))) < 1e-8 * max(1.0, np.max(np.abs(np.diag(chol)))):
        return None, "hessian not positive definite"
    cov = np.linalg.inv(hess)
    if to_natural is not None:
        jac = np.zeros((k, k))
        h = 1e-6
        for i in range(k):
            e = np.zeros(k)
            e[i] = h
            jac[:, i] = (to_natural(x_hat + e) - to_natural(x_hat - e)) / (2.0 * h)
        cov = jac @ cov @ jac.T
    var = np.diag(cov)
    if np.any(var <= 0.0) or not np.all(np.isfinite(var)):
        return None, "hessian not positive definite"
    return np.sqrt(var), None


def residuals(u: Sequence[float], model: SVineModel) -> Tuple[np.ndarray, np.ndarray]:
    """Reconstructed innovations and their standard-normal transforms."""
    z = invert_to_innovations(model.seq, _check_unit(u))
    return z, special.ndtri(np.clip(z, CLAMP_EPS, 1.0 - CLAMP_EPS))


def semi_empirical_kpacf(u: Sequence[float], model: SVineModel, K: int) -> np.ndarray:
    """
    Empirical Kendall's tau at each lag k <= K of the pairs made partial by
    the model's copulas at lags below k.
    """
    u = _check_unit(u)
    if not 1 <= K < u.size:
        raise DomainError(f"K must satisfy 1 <= K < n, got K={K}, n={u.size}")
    taus = np.empty(K)
    for lvl in lag_sweep(model.seq, u, K):
        taus[lvl.k - 1] = stats.kendalltau(lvl.a, lvl.b)[0]
    return taus


def standard_errors(report: FitReport, u: Sequence[float]) -> Tuple[Optional[np.ndarray], Optional[str]]:
    """Observed-information standard errors of the free kpacf parameters of a fit."""
    u = _check_unit(u)
    negloglik = _copula_objective(
        u,
        report.spec,
        report.family,
        report.negative_rule,
        report.truncation_lag,
        report.negative_rotation,
        report.positive_rotation,
    )
    x_hat = report.spec.to_unconstrained()
    return observed_information_stderr(
        negloglik, x_hat, lambda x: report.spec.from_unconstrained(x).free_params()
    )


def fit_copula(
    u: Sequence[float],
    spec_template: KpacfSpec,
    family: Union[Family, str],
    negative_rule: Union[NegativeTauRule, str] = NegativeTauRule.ROTATE,
    truncation: Optional[int] = None,
    negative_rotation: int = DEFAULT_NEGATIVE_ROTATION,
    positive_rotation: int = 0,
    compute_stderr: bool = True,
    semi_empirical_lags: Optional[int] = None,
    max_iter: Optional[int] = None,
) -> FitReport:
    """
    Pseudo-maximum-likelihood fit of a kpacf-parameterized copula process.

    Args:
        u: Copula-scale data in (0, 1).
        spec_template: Kpacf spec providing the starting values and fixed blocks.
        family: Pair-copula family at every lag.
        negative_rule: Handling of negative taus; re-applied at every evaluation.
        truncation: Truncation lag (defaults to the spec horizon).
        compute_stderr: Also compute observed-information standard errors.
        semi_empirical_lags: Number of semi-empirical kpacf lags to include.

    Raises:
        ConvergenceError: the optimizer did not converge; carries the
            best-so-far report flagged converged=False.
    """
    u = _check_unit(u)
    family = Family(family)
    negative_rule = NegativeTauRule(negative_rule)
    p = spec_template.horizon if truncation is None else int(truncation)
    SVineModel.from_kpacf(spec_template, family, negative_rule, p, None, negative_rotation, positive_rotation)
    negloglik = _copula_objective(u, spec_template, family, negative_rule, p, negative_rotation, positive_rotation)
    x0 = spec_template.to_unconstrained()
    logger.info(
        "fit_copula start n=%d family=%s rule=%s p=%d theta0=%s",
        u.size, family.value, negative_rule.value, p, spec_template.free_params().tolist(),
    )
    if x0.size:
        res = minimize_with_restart(negloglik, x0, max_iter)
        x_hat, converged, message = res.x, bool(res.success), str(res.message)
    else:
        x_hat, converged, message = x0, True, "no free parameters"
    spec_hat = spec_template.from_unconstrained(x_hat)
    model = SVineModel.from_kpacf(spec_hat, family, negative_rule, p, None, negative_rotation, positive_rotation)
    ll = log_joint_density(model.seq, u)
    z, z_normal = residuals(u, model)
    report = FitReport(
        spec=spec_hat,
        family=family,
        negative_rule=negative_rule,
        truncation_lag=p,
        loglik=float(ll),
        n_obs=u.size,
        converged=converged,
        negative_rotation=negative_rotation,
        positive_rotation=positive_rotation,
        residuals_z=z.tolist(),
        residuals_normal=z_normal.tolist(),
        optimizer_message=message,
    )
    if semi_empirical_lags:
        report.semi_empirical_kpacf = semi_empirical_kpacf(u, model, min(semi_empirical_lags, u.size - 1)).tolist()
    if compute_stderr and converged and x0.size:
        se, flag = observed_information_stderr(
            negloglik, x_hat, lambda x: spec_template.from_unconstrained(x).free_params()
        )
        report.stderr = se.tolist() if se is not None else None
        report.stderr_flag = flag
        if flag:
            logger.warning("standard errors unavailable for %s fit: %s", family.value, flag)
    logger.info(
        "fit_copula end family=%s theta=%s loglik=%.6f aic=%.6f converged=%s",
        family.value, report.theta_hat, report.loglik, report.aic, converged,
    )
    if not converged:
        logger.warning("fit_copula did not converge: %s", message)
        raise ConvergenceError(f"optimizer did not converge: {message}", report=report)
    return report


# --- margins ---
def _skewed_student_natural(x: np.ndarray) -> np.ndarray:
    return np.array([x[0], np.exp(x[1]), 2.0 + np.exp(x[2]), np.exp(x[3])])


def _skewed_student_objective(data: np.ndarray, fixed_gamma: Optional[float]) -> Callable[[np.ndarray], float]:
    def negloglik(x: np.ndarray) -> float:
        if fixed_gamma is not None:
            x = np.append(x, np.log(fixed_gamma))
        params = _skewed_student_natural(x)
        if not np.all(np.isfinite(params)) or params[2] > 1e6:
            return _PENALTY
        ll = np.sum(MarginalModel(MarginKind.SKEWED_STUDENT, tuple(params)).logpdf(data))
        return -ll if np.isfinite(ll) else _PENALTY

    return negloglik


def fit_margin(
    x: Sequence[float],
    kind: Union[MarginKind, str],
    fixed_gamma: Optional[float] = None,
) -> MarginalModel:
    """
    Maximum-likelihood fit of a marginal model (first IFM stage).

    Args:
        x: Observations (n >= 10).
        kind: normal, skewed_student or empirical.
        fixed_gamma: Hold the skewness at this value (1 gives a symmetric t).

    Raises:
        ConvergenceError: the skewed-Student optimizer failed.
    """
    x = np.asarray(x, dtype=float)
    kind = MarginKind(kind)
    if x.ndim != 1 or x.size < 10:
        raise InputError(f"fitting a margin needs at least 10 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InputError("data contain non-finite values")
    if kind is MarginKind.EMPIRICAL:
        return MarginalModel(kind, (), tuple(x))
    if kind is MarginKind.NORMAL:
        mu, sigma = float(np.mean(x)), float(np.std(x))
        ll = float(np.sum(stats.norm.logpdf(x, mu, sigma)))
        return MarginalModel(kind, (mu, sigma), loglik=ll)

    negloglik = _skewed_student_objective(x, fixed_gamma)
    x0 = np.array([np.median(x), np.log(np.std(x) * np.sqrt(6.0 / 8.0)), np.log(6.0), 0.0])
    if fixed_gamma is not None:
        x0 = x0[:3]
    res = minimize_with_restart(negloglik, x0)
    full = res.x if fixed_gamma is None else np.append(res.x, np.log(fixed_gamma))
    params = tuple(_skewed_student_natural(full))
    model = MarginalModel(kind, params, loglik=-float(res.fun))
    logger.info("fit_margin %s params=%s loglik=%.6f", kind.value, params, model.loglik)
    if not res.success:
        logger.warning("fit_margin did not converge: %s", res.message)
        raise ConvergenceError(f"margin optimizer did not converge: {res.message}", report=model)
    return model


def margin_standard_errors(model: MarginalModel, x: Sequence[float]) -> Tuple[Optional[np.ndarray], Optional[str]]:
    """Observed-information standard errors of a parametric margin."""
    x = np.asarray(x, dtype=float)
    if model.kind is MarginKind.NORMAL:
        mu, sigma = model.params
        return np.array([sigma / np.sqrt(x.size), sigma / np.sqrt(2.0 * x.size)]), None
    if model.kind is MarginKind.EMPIRICAL:
        return np.zeros(0), None
    mu, sigma, nu, gamma = model.params
    x_hat = np.array([mu, np.log(sigma), np.log(nu - 2.0), np.log(gamma)])
    return observed_information_stderr(_skewed_student_objective(x, None), x_hat, _skewed_student_natural)


def fit_full(
    x: Sequence[float],
    margin_kind: Union[MarginKind, str],
    spec_template: KpacfSpec,
    family: Union[Family, str],
    negative_rule: Union[NegativeTauRule, str] = NegativeTauRule.ROTATE,
    truncation: Optional[int] = None,
    **kwargs,
) -> FitReport:
    """
    Two-stage IFM fit: margin first, then the copula process on the
    probability-integral-transformed data.
    """
    x = np.asarray(x, dtype=float)
    margin = fit_margin(x, margin_kind)
    if margin.kind is MarginKind.EMPIRICAL:
        u = pseudo_observations(x)
    else:
        u = np.clip(margin.cdf(x), CLAMP_EPS, 1.0 - CLAMP_EPS)
    try:
        report = fit_copula(u, spec_template, family, negative_rule, truncation, **kwargs)
    except ConvergenceError as e:
        e.report.margin_fit = margin
        raise
    report.margin_fit = margin
    logger.info(
        "fit_full margin=%s family=%s total_params=%d total_aic=%s",
        margin.kind.value, report.family.value, report.total_n_params, report.total_aic,
    )
    return report


def aic_table(reports: Mapping[str, FitReport]) -> pd.DataFrame:
    """Comparison table of several fits, best (lowest) AIC first."""
    rows = []
    for label, rep in reports.items():
        total = rep.total_aic if rep.margin_fit is not None and rep.total_aic is not None else rep.aic
        rows.append(
            {
                "model": label,
                "family": rep.family.value,
                "kpacf": rep.spec.kind.value,
                "n_params": rep.total_n_params if rep.margin_fit is not None else rep.n_params,
                "loglik": rep.total_loglik if rep.margin_fit is not None and rep.total_loglik is not None else rep.loglik,
                "aic": total,
                "converged": rep.converged,
            }
        )
    df = pd.DataFrame(rows, columns=["model", "family", "kpacf", "n_params", "loglik", "aic", "converged"])
    return df.sort_values("aic", kind="mergesort").reset_index(drop=True)
