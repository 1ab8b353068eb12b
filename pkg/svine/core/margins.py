"""Marginal distributions for s-vine processes."""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from .errors import DomainError

ArrayLike = Union[float, Sequence[float], np.ndarray]


class MarginKind(str, Enum):
    NORMAL = "normal"
    SKEWED_STUDENT = "skewed_student"
    EMPIRICAL = "empirical"


_N_PARAMS = {MarginKind.NORMAL: 2, MarginKind.SKEWED_STUDENT: 4, MarginKind.EMPIRICAL: 0}
_PARAM_NAMES = {
    MarginKind.NORMAL: ("mu", "sigma"),
    MarginKind.SKEWED_STUDENT: ("mu", "sigma", "nu", "gamma"),
    MarginKind.EMPIRICAL: (),
}


# Fernandez-Steel skewing of a standard Student t: t(gamma * z) left of zero, t(z / gamma) right of it.
def skewed_t_cdf(z: ArrayLike, nu: float, gamma: float) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    g2 = gamma * gamma
    left = 2.0 * stats.t.cdf(gamma * z, nu) / (1.0 + g2)
    right = 1.0 - 2.0 * g2 / (1.0 + g2) * stats.t.sf(z / gamma, nu)
    return np.where(z < 0.0, left, right)


def skewed_t_ppf(p: ArrayLike, nu: float, gamma: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    g2 = gamma * gamma
    split = 1.0 / (1.0 + g2)
    with np.errstate(invalid="ignore"):
        left = stats.t.ppf(p * (1.0 + g2) / 2.0, nu) / gamma
        right = gamma * stats.t.isf((1.0 - p) * (1.0 + g2) / (2.0 * g2), nu)
    return np.where(p < split, left, right)


def skewed_t_logpdf(z: ArrayLike, nu: float, gamma: float) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    arg = np.where(z < 0.0, gamma * z, z / gamma)
    return np.log(2.0 / (gamma + 1.0 / gamma)) + stats.t.logpdf(arg, nu)


@dataclass(frozen=True)
class MarginalModel:
    """
    Marginal distribution of the observed series.

    Normal(mu, sigma), SkewedStudent(mu, sigma, nu, gamma) with location mu and
    scale sigma, or Empirical (the sorted sample; cdf is the average-rank
    transform divided by n + 1).
    """

    kind: MarginKind
    params: Tuple[float, ...] = ()
    sample: Optional[Tuple[float, ...]] = None
    loglik: Optional[float] = None

    def __post_init__(self):
        kind = MarginKind(self.kind)
        object.__setattr__(self, "kind", kind)
        params = tuple(float(x) for x in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != _N_PARAMS[kind]:
            raise DomainError(f"{kind.value} margin takes {_N_PARAMS[kind]} parameters, got {len(params)}")
        if kind is MarginKind.NORMAL and not params[1] > 0.0:
            raise DomainError(f"normal scale must be positive, got {params[1]}")
        if kind is MarginKind.SKEWED_STUDENT:
            _, sigma, nu, gamma = params
            if not sigma > 0.0:
                raise DomainError(f"skewed Student scale must be positive, got {sigma}")
            if not nu > 2.0:
                raise DomainError(f"skewed Student degrees of freedom must exceed 2, got {nu}")
            if not gamma > 0.0:
                raise DomainError(f"skewed Student skewness must be positive, got {gamma}")
        if kind is MarginKind.EMPIRICAL:
            if self.sample is None or len(self.sample) < 2:
                raise DomainError("empirical margin needs a sample of at least 2 values")
            object.__setattr__(self, "sample", tuple(sorted(float(x) for x in self.sample)))

    @property
    def n_params(self) -> int:
        return _N_PARAMS[self.kind]

    @property
    def param_names(self) -> Tuple[str, ...]:
        return _PARAM_NAMES[self.kind]

    def cdf(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind is MarginKind.NORMAL:
            mu, sigma = self.params
            return stats.norm.cdf(x, mu, sigma)
        if self.kind is MarginKind.SKEWED_STUDENT:
            mu, sigma, nu, gamma = self.params
            return skewed_t_cdf((x - mu) / sigma, nu, gamma)
        data = np.asarray(self.sample)
        lo = np.searchsorted(data, x, side="left")
        hi = np.searchsorted(data, x, side="right")
        return (lo + hi + 1) / 2.0 / (data.size + 1)

    def ppf(self, p: ArrayLike) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.kind is MarginKind.NORMAL:
            mu, sigma = self.params
            return stats.norm.ppf(p, mu, sigma)
        if self.kind is MarginKind.SKEWED_STUDENT:
            mu, sigma, nu, gamma = self.params
            return mu + sigma * skewed_t_ppf(p, nu, gamma)
        return np.quantile(np.asarray(self.sample), p)

    def logpdf(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind is MarginKind.NORMAL:
            mu, sigma = self.params
            return stats.norm.logpdf(x, mu, sigma)
        if self.kind is MarginKind.SKEWED_STUDENT:
            mu, sigma, nu, gamma = self.params
            return skewed_t_logpdf((x - mu) / sigma, nu, gamma) - np.log(sigma)
        raise DomainError("the empirical margin has no density")

    def pdf(self, x: ArrayLike) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def rvs(self, n: int, seed: int = 0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return self.ppf(rng.uniform(size=n))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value, "params": dict(zip(self.param_names, self.params))}
        if self.kind is MarginKind.EMPIRICAL:
            data["sample"] = list(self.sample)
        if self.loglik is not None:
            data["loglik"] = self.loglik
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MarginalModel":
        unknown = set(data) - {"kind", "params", "sample", "loglik"}
        if unknown:
            raise DomainError(f"Unknown margin keys: {sorted(unknown)}")
        try:
            kind = MarginKind(data["kind"])
        except (KeyError, ValueError) as e:
            raise DomainError(f"Invalid margin kind: {data.get('kind')!r}") from e
        raw = data.get("params", {}) or {}
        if isinstance(raw, dict):
            missing = [n for n in _PARAM_NAMES[kind] if n not in raw]
            extra = set(raw) - set(_PARAM_NAMES[kind])
            if missing or extra:
                raise DomainError(f"{kind.value} margin params must be {list(_PARAM_NAMES[kind])}")
            params = tuple(raw[n] for n in _PARAM_NAMES[kind])
        else:
            params = tuple(raw)
        sample = data.get("sample")
        return cls(kind, params, tuple(sample) if sample is not None else None, data.get("loglik"))
