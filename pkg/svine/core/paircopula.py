"""
Bivariate pair copulas: distribution functions, densities, h-functions and
their inverses, rotations, and the Kendall's tau <-> parameter maps.

Conventions:
    h1(u, v) = dC/du (u, v) = P(V <= v | U = u)
    h2(u, v) = dC/dv (u, v) = P(U <= u | V = v)

Rotations act on the copula distribution function as
    90:  C(u, v) -> v - C(1 - u, v)
    180: C(u, v) -> u + v - 1 + C(1 - u, 1 - v)
    270: C(u, v) -> u - C(u, 1 - v)
"""

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy import integrate, optimize, special

from .config import (
    CLAMP_EPS,
    DEFAULT_NEGATIVE_ROTATION,
    FRANK_THETA_BOUND,
    H_INVERSE_MAX_ITER,
    H_INVERSE_TARGET,
    H_INVERSE_TOL,
    JOE_THETA_MAX,
    TAU_ZERO,
)
from .errors import DomainError, NumericError

ArrayLike = Union[float, np.ndarray]


class Family(str, Enum):
    INDEPENDENCE = "independence"
    GAUSS = "gauss"
    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    FRANK = "frank"
    JOE = "joe"
    STUDENT_T = "student_t"


class NegativeTauRule(str, Enum):
    """How a non-comprehensive family handles a negative Kendall's tau."""

    ROTATE = "rotate"
    SUBSTITUTE_FRANK = "substitute_frank"
    SUBSTITUTE_GAUSS = "substitute_gauss"


ROTATIONS = (0, 90, 180, 270)
COMPREHENSIVE = (Family.GAUSS, Family.FRANK)
EXCHANGEABLE = tuple(Family)


def clamp(x: ArrayLike) -> np.ndarray:
    """Clamp evaluation points into [eps, 1 - eps]."""
    return np.clip(np.asarray(x, dtype=float), CLAMP_EPS, 1.0 - CLAMP_EPS)


# --- Independence ---
def _indep_cdf(par, u, v):
    return u * v


def _indep_h1(par, u, v):
    return v + 0.0 * u


def _indep_log_pdf(par, u, v):
    return 0.0 * (u + v)


def _indep_h1_inv(par, u, z):
    return z + 0.0 * u


# --- Gauss ---
def _gauss_h1(par, u, v):
    rho = par[0]
    x, y = special.ndtri(u), special.ndtri(v)
    return special.ndtr((y - rho * x) / math.sqrt(1.0 - rho * rho))


def _gauss_h1_inv(par, u, z):
    rho = par[0]
    return special.ndtr(math.sqrt(1.0 - rho * rho) * special.ndtri(z) + rho * special.ndtri(u))


def _gauss_log_pdf(par, u, v):
    rho = par[0]
    r2 = rho * rho
    x, y = special.ndtri(u), special.ndtri(v)
    return -0.5 * math.log1p(-r2) - (r2 * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * (1.0 - r2))


# --- Student t ---
def _t_scale(rho, nu, x):
    return np.sqrt((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0))


def _student_h1(par, u, v):
    rho, nu = par
    x, y = special.stdtrit(nu, u), special.stdtrit(nu, v)
    return special.stdtr(nu + 1.0, (y - rho * x) / _t_scale(rho, nu, x))


def _student_h1_inv(par, u, z):
    rho, nu = par
    x = special.stdtrit(nu, u)
    y = special.stdtrit(nu + 1.0, z) * _t_scale(rho, nu, x) + rho * x
    return special.stdtr(nu, y)


def _student_log_pdf(par, u, v):
    rho, nu = par
    r2 = rho * rho
    x, y = special.stdtrit(nu, u), special.stdtrit(nu, v)
    log_joint = (
        special.gammaln((nu + 2.0) / 2.0)
        - special.gammaln(nu / 2.0)
        - math.log(math.pi * nu)
        - 0.5 * math.log1p(-r2)
        - (nu + 2.0) / 2.0 * np.log1p((x * x - 2.0 * rho * x * y + y * y) / (nu * (1.0 - r2)))
    )
    log_margin_const = special.gammaln((nu + 1.0) / 2.0) - special.gammaln(nu / 2.0) - 0.5 * math.log(nu * math.pi)
    log_margins = (
        2.0 * log_margin_const
        - (nu + 1.0) / 2.0 * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
    )
    return log_joint - log_margins


# --- Clayton ---
def _clayton_log_s(theta, u, v):
    # log(u^-theta + v^-theta - 1), evaluated without overflow
    a = -theta * np.log(u)
    b = -theta * np.log(v)
    m = np.maximum(a, b)
    return m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))


def _clayton_cdf(par, u, v):
    theta = par[0]
    return np.exp(-_clayton_log_s(theta, u, v) / theta)


def _clayton_h1(par, u, v):
    theta = par[0]
    log_h = (-theta - 1.0) * np.log(u) + (-1.0 / theta - 1.0) * _clayton_log_s(theta, u, v)
    return np.exp(log_h)


def _clayton_log_pdf(par, u, v):
    theta = par[0]
    return (
        math.log1p(theta)
        + (-theta - 1.0) * (np.log(u) + np.log(v))
        + (-2.0 - 1.0 / theta) * _clayton_log_s(theta, u, v)
    )


def _clayton_h1_inv(par, u, z):
    theta = par[0]
    a = -theta * np.log(u)
    c = -theta / (1.0 + theta) * np.log(z)
    log_term = a + np.log(np.expm1(c) + np.exp(-a))
    return np.exp(-log_term / theta)


# --- Gumbel ---
def _gumbel_parts(theta, u, v):
    lu, lv = -np.log(u), -np.log(v)
    log_a = np.logaddexp(theta * np.log(lu), theta * np.log(lv))
    return lu, lv, log_a, np.exp(log_a / theta)


def _gumbel_cdf(par, u, v):
    _, _, _, a_root = _gumbel_parts(par[0], u, v)
    return np.exp(-a_root)


def _gumbel_h1(par, u, v):
    theta = par[0]
    lu, _, log_a, a_root = _gumbel_parts(theta, u, v)
    return np.exp(-a_root + (1.0 / theta - 1.0) * log_a + (theta - 1.0) * np.log(lu) + lu)


def _gumbel_log_pdf(par, u, v):
    theta = par[0]
    lu, lv, log_a, a_root = _gumbel_parts(theta, u, v)
    return (
        -a_root
        + lu
        + lv
        + (theta - 1.0) * (np.log(lu) + np.log(lv))
        + (2.0 / theta - 2.0) * log_a
        + np.log1p((theta - 1.0) / a_root)
    )


# --- Frank ---
def _frank_cdf(par, u, v):
    theta = par[0]
    return -np.log1p(np.expm1(-theta * u) * np.expm1(-theta * v) / math.expm1(-theta)) / theta


def _frank_h1(par, u, v):
    theta = par[0]
    eu = np.expm1(-theta * u)
    ev = np.expm1(-theta * v)
    return np.exp(-theta * u) * ev / (math.expm1(-theta) + eu * ev)


def _frank_log_pdf(par, u, v):
    theta = par[0]
    d = math.expm1(-theta)
    denom = d + np.expm1(-theta * u) * np.expm1(-theta * v)
    return math.log(theta * -d) - theta * (u + v) - 2.0 * np.log(np.abs(denom))


def _frank_h1_inv(par, u, z):
    theta = par[0]
    b = z * math.expm1(-theta) / (z + (1.0 - z) * np.exp(-theta * u))
    return -np.log1p(b) / theta


# --- Joe ---
def _joe_parts(theta, u, v):
    log_ub, log_vb = np.log1p(-u), np.log1p(-v)
    x, y = np.exp(theta * log_ub), np.exp(theta * log_vb)
    return log_ub, log_vb, x, y, x + y - x * y


def _joe_cdf(par, u, v):
    theta = par[0]
    _, _, _, _, s = _joe_parts(theta, u, v)
    return 1.0 - np.power(s, 1.0 / theta)


def _joe_h1(par, u, v):
    theta = par[0]
    log_ub, _, _, y, s = _joe_parts(theta, u, v)
    return np.exp((theta - 1.0) * log_ub + np.log1p(-y) + (1.0 / theta - 1.0) * np.log(s))


def _joe_log_pdf(par, u, v):
    theta = par[0]
    log_ub, log_vb, _, _, s = _joe_parts(theta, u, v)
    return (1.0 / theta - 2.0) * np.log(s) + (theta - 1.0) * (log_ub + log_vb) + np.log(theta - 1.0 + s)


_COP_FUNS: Dict[Family, Dict[str, Optional[Callable]]] = {
    Family.INDEPENDENCE: {"cdf": _indep_cdf, "h1": _indep_h1, "log_pdf": _indep_log_pdf, "h1_inv": _indep_h1_inv},
    Family.GAUSS: {"cdf": None, "h1": _gauss_h1, "log_pdf": _gauss_log_pdf, "h1_inv": _gauss_h1_inv},
    Family.STUDENT_T: {"cdf": None, "h1": _student_h1, "log_pdf": _student_log_pdf, "h1_inv": _student_h1_inv},
    Family.CLAYTON: {"cdf": _clayton_cdf, "h1": _clayton_h1, "log_pdf": _clayton_log_pdf, "h1_inv": _clayton_h1_inv},
    Family.GUMBEL: {"cdf": _gumbel_cdf, "h1": _gumbel_h1, "log_pdf": _gumbel_log_pdf, "h1_inv": None},
    Family.FRANK: {"cdf": _frank_cdf, "h1": _frank_h1, "log_pdf": _frank_log_pdf, "h1_inv": _frank_h1_inv},
    Family.JOE: {"cdf": _joe_cdf, "h1": _joe_h1, "log_pdf": _joe_log_pdf, "h1_inv": None},
}


def _cdf_by_quadrature(h1: Callable, par, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """C(u, v) = int_0^u h1(s, v) ds, for families without a closed-form cdf."""

    def _one(ui, vi):
        val, _ = integrate.quad(lambda s: float(h1(par, clamp(s), vi)), 0.0, ui, epsabs=1e-14, epsrel=1e-12, limit=200)
        return val

    return np.vectorize(_one, otypes=[float])(u, v)


def solve_h1(h1: Callable, log_pdf: Callable, par, u: np.ndarray, z: np.ndarray) -> np.ndarray:
    """
    Solve h1(u, x) = z for x by bracketed bisection with safeguarded Newton steps.

    The derivative of h1 in its second argument is the copula density. Each
    point is refined to H_INVERSE_TARGET, or until Newton stalls at machine
    precision, so nested inversions stay well inside H_INVERSE_TOL.

    Raises:
        NumericError: residual above H_INVERSE_TOL after the iteration cap;
            carries the last bracket.
    """
    u, z = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(z, dtype=float))
    lo = np.full(u.shape, CLAMP_EPS)
    hi = np.full(u.shape, 1.0 - CLAMP_EPS)
    x = clamp(z).copy()
    x_prev = np.full(u.shape, np.nan)
    ulp = 4.0 * np.finfo(float).eps
    for _ in range(H_INVERSE_MAX_ITER):
        f = h1(par, u, x) - z
        stalled = np.abs(x - x_prev) <= ulp * np.maximum(np.abs(x), CLAMP_EPS)
        done = (np.abs(f) < H_INVERSE_TARGET) | (hi - lo < 1e-15) | stalled
        if np.all(done):
            return x
        hi = np.where(f > 0, x, hi)
        lo = np.where(f > 0, lo, x)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            step = x - f / np.exp(log_pdf(par, u, x))
        inside = np.isfinite(step) & (step > lo) & (step < hi)
        x_prev = x
        x = np.where(done, x, np.where(inside, step, 0.5 * (lo + hi)))
    if np.all(np.abs(h1(par, u, x) - z) < H_INVERSE_TOL):
        return x
    raise NumericError(
        f"h-function inversion did not converge in {H_INVERSE_MAX_ITER} iterations",
        bracket=(lo, hi),
    )


@dataclass(frozen=True)
class PairCopula:
    """
    A bivariate copula from a one-parameter family (or Student t with fixed nu),
    optionally rotated by 90, 180 or 270 degrees. Immutable; all methods are pure
    and accept scalars or numpy arrays.
    """

    family: Family
    param: float = 0.0
    rotation: int = 0
    nu: Optional[float] = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "param", float(self.param))
        if self.rotation not in ROTATIONS:
            raise DomainError(f"rotation must be one of {ROTATIONS}, got {self.rotation}")
        theta = self.param
        if family is Family.INDEPENDENCE:
            object.__setattr__(self, "param", 0.0)
        elif family is Family.GAUSS and not -1.0 < theta < 1.0:
            raise DomainError(f"Gauss correlation must lie in (-1, 1), got {theta}")
        elif family is Family.STUDENT_T:
            if not -1.0 < theta < 1.0:
                raise DomainError(f"Student t correlation must lie in (-1, 1), got {theta}")
            if self.nu is None or not self.nu > 2.0:
                raise DomainError(f"Student t degrees of freedom must exceed 2, got {self.nu}")
        elif family is Family.CLAYTON and not theta > 0.0:
            raise DomainError(f"Clayton parameter must be positive, got {theta}")
        elif family in (Family.GUMBEL, Family.JOE) and not theta >= 1.0:
            raise DomainError(f"{family.value.capitalize()} parameter must be >= 1, got {theta}")
        elif family is Family.FRANK and (theta == 0.0 or not math.isfinite(theta)):
            raise DomainError(f"Frank parameter must be finite and non-zero, got {theta}")

    # --- internals ---
    @property
    def _par(self) -> Tuple[float, ...]:
        if self.family is Family.STUDENT_T:
            return (self.param, float(self.nu))
        return (self.param,)

    @property
    def _funs(self) -> Dict[str, Optional[Callable]]:
        return _COP_FUNS[self.family]

    def _prep(self, u: ArrayLike, v: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        if self.family is Family.INDEPENDENCE:
            return np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        return clamp(u), clamp(v)

    def _base_cdf(self, u, v):
        cdf = self._funs["cdf"]
        if cdf is None:
            return _cdf_by_quadrature(self._funs["h1"], self._par, u, v)
        return cdf(self._par, u, v)

    def _base_h1(self, u, v):
        return self._funs["h1"](self._par, u, v)

    def _base_h1_inv(self, u, z):
        h1_inv = self._funs["h1_inv"]
        if h1_inv is None:
            return solve_h1(self._funs["h1"], self._funs["log_pdf"], self._par, u, z)
        return h1_inv(self._par, u, z)

    # --- public API ---
    @property
    def is_independence(self) -> bool:
        return self.family is Family.INDEPENDENCE

    def cdf(self, u: ArrayLike, v: ArrayLike) -> np.ndarray:
        """Copula distribution function C(u, v)."""
        u, v = self._prep(u, v)
        r = self.rotation
        if r == 0:
            res = self._base_cdf(u, v)
        elif r == 90:
            res = v - self._base_cdf(1.0 - u, v)
        elif r == 180:
            res = u + v - 1.0 + self._base_cdf(1.0 - u, 1.0 - v)
        else:
            res = u - self._base_cdf(u, 1.0 - v)
        return np.clip(res, 0.0, 1.0)

    def h1(self, u: ArrayLike, v: ArrayLike) -> np.ndarray:
        """dC/du: conditional df of the second variable given the first equals u."""
        u, v = self._prep(u, v)
        r = self.rotation
        if r == 0:
            return self._base_h1(u, v)
        if r == 90:
            return self._base_h1(1.0 - u, v)
        if r == 180:
            return 1.0 - self._base_h1(1.0 - u, 1.0 - v)
        return 1.0 - self._base_h1(u, 1.0 - v)

    def h2(self, u: ArrayLike, v: ArrayLike) -> np.ndarray:
        """dC/dv: conditional df of the first variable given the second equals v."""
        u, v = self._prep(u, v)
        r = self.rotation
        # every supported base family is exchangeable: h2(u, v) = h1(v, u)
        if r == 0:
            return self._base_h1(v, u)
        if r == 90:
            return 1.0 - self._base_h1(v, 1.0 - u)
        if r == 180:
            return 1.0 - self._base_h1(1.0 - v, 1.0 - u)
        return self._base_h1(1.0 - v, u)

    def h_inverse(self, which: int, u_fixed: ArrayLike, z: ArrayLike) -> np.ndarray:
        """
        Invert an h-function in its non-differentiated argument.

        Args:
            which: 1 solves h1(u_fixed, x) = z; 2 solves h2(x, u_fixed) = z.
            u_fixed: The conditioning value(s).
            z: Target probability level(s).

        Returns:
            x with h(x) = z to 1e-10 in z-space.
        """
        if which not in (1, 2):
            raise DomainError(f"which must be 1 or 2, got {which}")
        a, z = self._prep(u_fixed, z)
        r = self.rotation
        if which == 1:
            if r == 0:
                return self._base_h1_inv(a, z)
            if r == 90:
                return self._base_h1_inv(1.0 - a, z)
            if r == 180:
                return 1.0 - self._base_h1_inv(1.0 - a, 1.0 - z)
            return 1.0 - self._base_h1_inv(a, 1.0 - z)
        if r == 0:
            return self._base_h1_inv(a, z)
        if r == 90:
            return 1.0 - self._base_h1_inv(a, 1.0 - z)
        if r == 180:
            return 1.0 - self._base_h1_inv(1.0 - a, 1.0 - z)
        return self._base_h1_inv(1.0 - a, z)

    def log_pdf(self, u: ArrayLike, v: ArrayLike) -> np.ndarray:
        """Log copula density."""
        u, v = self._prep(u, v)
        lp = self._funs["log_pdf"]
        r = self.rotation
        if r == 0:
            return lp(self._par, u, v)
        if r == 90:
            return lp(self._par, 1.0 - u, v)
        if r == 180:
            return lp(self._par, 1.0 - u, 1.0 - v)
        return lp(self._par, u, 1.0 - v)

    def pdf(self, u: ArrayLike, v: ArrayLike) -> np.ndarray:
        return np.exp(self.log_pdf(u, v))

    def kendall_tau(self) -> float:
        return kendall_tau(self)

    def to_dict(self) -> Dict[str, Any]:
        if self.family is Family.STUDENT_T:
            param: Any = [self.param, self.nu]
        else:
            param = self.param
        return {"family": self.family.value, "param": param, "rotation": self.rotation}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PairCopula":
        unknown = set(data) - {"family", "param", "rotation"}
        if unknown:
            raise DomainError(f"Unknown pair-copula keys: {sorted(unknown)}")
        try:
            family = Family(data["family"])
        except (KeyError, ValueError) as e:
            raise DomainError(f"Invalid pair-copula family: {data.get('family')!r}") from e
        param = data.get("param", 0.0)
        rotation = int(data.get("rotation", 0))
        if family is Family.STUDENT_T:
            if not isinstance(param, (list, tuple)) or len(param) != 2:
                raise DomainError("Student t param must be [correlation, nu]")
            return cls(family, float(param[0]), rotation, nu=float(param[1]))
        return cls(family, float(param), rotation)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


INDEPENDENCE = PairCopula(Family.INDEPENDENCE)


# --- Kendall's tau ---
def _frank_tau(theta: float) -> float:
    a = abs(theta)
    if a < 1e-6:
        return theta / 9.0
    integral, _ = integrate.quad(lambda t: t / math.expm1(t) if t > 0 else 1.0, 0.0, a, epsabs=1e-14, epsrel=1e-13)
    debye1 = integral / a
    return math.copysign(1.0 - 4.0 / a * (1.0 - debye1), theta)


def _joe_tau(theta: float) -> float:
    if theta == 1.0:
        return 0.0

    # 1 + 4 int_0^1 phi(t) / phi'(t) dt, generator phi(t) = -log(1 - (1 - t)^theta), in s = 1 - t
    def _integrand(s):
        if not 0.0 < s < 1.0:
            return 0.0
        st = s ** theta
        if st < 1e-15:
            return -s / theta
        return math.log1p(-st) * (1.0 - st) / (theta * s ** (theta - 1.0))

    integral, _ = integrate.quad(_integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 1.0 + 4.0 * integral


def _base_tau(family: Family, theta: float) -> float:
    if family is Family.INDEPENDENCE:
        return 0.0
    if family in (Family.GAUSS, Family.STUDENT_T):
        return 2.0 / math.pi * math.asin(theta)
    if family is Family.CLAYTON:
        return theta / (theta + 2.0)
    if family is Family.GUMBEL:
        return 1.0 - 1.0 / theta
    if family is Family.FRANK:
        return _frank_tau(theta)
    return _joe_tau(theta)


def kendall_tau(cop: PairCopula) -> float:
    """Kendall's tau of a pair copula; 90 and 270 degree rotations negate it."""
    tau = _base_tau(cop.family, cop.param)
    return -tau if cop.rotation in (90, 270) else tau


def _param_from_tau(family: Family, tau: float) -> float:
    """Invert the tau map of a family on its natural (non-rotated) tau range."""
    if family is Family.GAUSS:
        return math.sin(math.pi * tau / 2.0)
    if family is Family.CLAYTON:
        return 2.0 * tau / (1.0 - tau)
    if family is Family.GUMBEL:
        return 1.0 / (1.0 - tau)
    if family is Family.FRANK:
        a = abs(tau)
        hi = FRANK_THETA_BOUND
        if a >= _frank_tau(hi):
            raise DomainError(f"tau={tau} is unreachable by the Frank family with |theta| <= {hi}")
        theta = optimize.brentq(lambda t: _frank_tau(t) - a, 1e-12, hi, xtol=1e-14, rtol=1e-14)
        return math.copysign(theta, tau)
    if family is Family.JOE:
        if tau >= _joe_tau(JOE_THETA_MAX):
            raise DomainError(f"tau={tau} is unreachable by the Joe family with theta <= {JOE_THETA_MAX}")
        return optimize.brentq(lambda t: _joe_tau(t) - tau, 1.0, JOE_THETA_MAX, xtol=1e-14, rtol=1e-14)
    raise DomainError(f"No single-parameter tau inversion for family {family.value}")


def copula_from_tau(
    family: Union[Family, str],
    tau: float,
    negative_rule: Union[NegativeTauRule, str] = NegativeTauRule.ROTATE,
    negative_rotation: int = DEFAULT_NEGATIVE_ROTATION,
    positive_rotation: int = 0,
) -> PairCopula:
    """
    Build the pair copula of a family with a given Kendall's tau.

    Args:
        family: Target family.
        tau: Kendall's tau in (-1, 1); |tau| below 1e-10 gives the independence copula.
        negative_rule: Handling of tau < 0 for Clayton, Gumbel and Joe.
        negative_rotation: 90 or 270, used by the rotate rule.
        positive_rotation: 0 or 180 (survival version) for tau > 0.

    Raises:
        DomainError: tau out of range or unreachable by the family and rule.
    """
    family = Family(family)
    negative_rule = NegativeTauRule(negative_rule)
    if not -1.0 < tau < 1.0:
        raise DomainError(f"Kendall's tau must lie in (-1, 1), got {tau}")
    if negative_rotation not in (90, 270):
        raise DomainError(f"negative rotation must be 90 or 270, got {negative_rotation}")
    if positive_rotation not in (0, 180):
        raise DomainError(f"positive rotation must be 0 or 180, got {positive_rotation}")
    if abs(tau) < TAU_ZERO:
        return INDEPENDENCE
    if family is Family.INDEPENDENCE:
        raise DomainError(f"The independence copula only admits tau=0, got {tau}")
    if family is Family.STUDENT_T:
        raise DomainError("Student t copulas are not built from tau (nu is not fixed by tau)")

    if tau > 0.0 or family in COMPREHENSIVE:
        rotation = positive_rotation if tau > 0.0 else 0
        return PairCopula(family, _param_from_tau(family, tau), rotation)

    if negative_rule is NegativeTauRule.SUBSTITUTE_FRANK:
        return PairCopula(Family.FRANK, _param_from_tau(Family.FRANK, tau))
    if negative_rule is NegativeTauRule.SUBSTITUTE_GAUSS:
        return PairCopula(Family.GAUSS, _param_from_tau(Family.GAUSS, tau))
    return PairCopula(family, _param_from_tau(family, -tau), negative_rotation)
