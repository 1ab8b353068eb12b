"""
Linear-process machinery for Gaussian s-vines.

acf <-> pacf transforms (Durbin-Levinson), ARMA / ARFIMA / FGN
autocorrelations, best-linear-predictor coefficients, the closed-form
Gaussian Rosenblatt functions, and the product identity linking the sum of
autocorrelations to the pacf.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal, special

from .config import DEFAULT_HORIZON, MA_WEIGHT_CAP, MA_WEIGHT_CUTOFF
from .errors import DomainError

ArrayLike = Union[Sequence[float], np.ndarray]


def _check_pacf(alpha: ArrayLike) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    bad = np.flatnonzero(~(np.abs(alpha) < 1.0))
    if bad.size:
        raise DomainError(f"partial autocorrelation at lag {bad[0] + 1} is outside (-1, 1): {alpha[bad[0]]}")
    return alpha


def acf_to_pacf(rho: ArrayLike) -> np.ndarray:
    """
    Partial autocorrelations from autocorrelations rho_1..rho_K by Durbin-Levinson.

    Raises:
        DomainError: the implied correlation matrices stop being positive
            definite; the message names the failing lag.
    """
    rho = np.asarray(rho, dtype=float)
    full = np.concatenate([[1.0], rho])
    alpha = np.zeros(rho.size)
    phi = np.zeros(0)
    v = 1.0
    for k in range(1, rho.size + 1):
        a = (full[k] - phi @ full[k - 1:0:-1]) / v
        if not abs(a) < 1.0:
            raise DomainError(f"autocorrelations are not positive definite at lag {k}")
        alpha[k - 1] = a
        phi = np.append(phi - a * phi[::-1], a)
        v *= 1.0 - a * a
    return alpha


def pacf_to_acf(alpha: ArrayLike) -> np.ndarray:
    """Autocorrelations rho_1..rho_K from partial autocorrelations by Durbin-Levinson."""
    alpha = _check_pacf(alpha)
    full = np.ones(alpha.size + 1)
    phi = np.zeros(0)
    v = 1.0
    for k in range(1, alpha.size + 1):
        a = alpha[k - 1]
        full[k] = a * v + phi @ full[k - 1:0:-1]
        phi = np.append(phi - a * phi[::-1], a)
        v *= 1.0 - a * a
    return full[1:]


def check_causal(phi: ArrayLike) -> None:
    """Raise DomainError unless all roots of 1 - phi_1 z - ... - phi_p z^p lie outside the unit circle."""
    phi = np.asarray(phi, dtype=float)
    if phi.size == 0 or not np.any(phi):
        return
    roots = np.roots(np.concatenate([-phi[::-1], [1.0]]))
    if np.any(np.abs(roots) <= 1.0 + 1e-10):
        raise DomainError(f"AR polynomial {phi.tolist()} is not causal (root modulus {np.abs(roots).min():.6g})")


def ma_weights(phi: ArrayLike, psi: ArrayLike) -> np.ndarray:
    """
    MA(infinity) weights of a causal ARMA filter.

    Truncated once the trailing weights drop below 1e-14, capped at 1e5 terms.
    """
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    check_causal(phi)
    b = np.concatenate([[1.0], psi])
    a = np.concatenate([[1.0], -phi])
    tail = max(phi.size, 1)
    n = max(256, 4 * (b.size + tail))
    while True:
        impulse = np.zeros(n)
        impulse[0] = 1.0
        w = signal.lfilter(b, a, impulse)
        if phi.size == 0 or np.max(np.abs(w[-tail:])) < MA_WEIGHT_CUTOFF or n >= MA_WEIGHT_CAP:
            break
        n = min(2 * n, MA_WEIGHT_CAP)
    keep = np.flatnonzero(np.abs(w) >= MA_WEIGHT_CUTOFF)
    return w[: keep[-1] + 1] if keep.size else w[:1]


def arma_acf(phi: ArrayLike, psi: ArrayLike, K: int) -> np.ndarray:
    """Autocorrelations rho_1..rho_K of a causal ARMA(p, q) process."""
    w = ma_weights(phi, psi)
    gamma = np.array([w[: max(w.size - h, 0)] @ w[h:] for h in range(K + 1)])
    return gamma[1:] / gamma[0]


def fractional_acf(d: float, n: int) -> np.ndarray:
    """Autocorrelations rho_0..rho_{n-1} of fractionally integrated noise."""
    h = np.arange(1, n)
    ratios = (h - 1.0 + d) / (h - d)
    return np.concatenate([[1.0], np.cumprod(ratios)])


def arfima_acf(phi: ArrayLike, d: float, psi: ArrayLike, K: int) -> np.ndarray:
    """
    Autocorrelations rho_1..rho_K of ARFIMA(p, d, q).

    The exact fractional-noise acf convolved with the autocovariance of the
    ARMA weights.
    """
    if not -0.5 < d < 0.5:
        raise DomainError(f"fractional difference d must lie in (-1/2, 1/2), got {d}")
    w = ma_weights(phi, psi)
    g = np.correlate(w, w, mode="full")
    lags = np.arange(-(w.size - 1), w.size)
    frac = fractional_acf(d, K + w.size + 1)
    gamma = np.array([g @ frac[np.abs(h - lags)] for h in range(K + 1)])
    return gamma[1:] / gamma[0]


def arfima_pacf(phi: ArrayLike, d: float, psi: ArrayLike, K: int) -> np.ndarray:
    """
    Partial autocorrelations alpha_1..alpha_K of ARFIMA(p, d, q).

    Pure fractional noise uses alpha_k = d / (k - d) directly.
    """
    if not -0.5 < d < 0.5:
        raise DomainError(f"fractional difference d must lie in (-1/2, 1/2), got {d}")
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if phi.size == 0 and psi.size == 0:
        k = np.arange(1, K + 1)
        return d / (k - d)
    if d == 0.0:
        return acf_to_pacf(arma_acf(phi, psi, K))
    return acf_to_pacf(arfima_acf(phi, d, psi, K))


def fgn_acf(H: float, K: int) -> np.ndarray:
    """Autocorrelations rho_1..rho_K of fractional Gaussian noise."""
    if not 0.0 < H < 1.0:
        raise DomainError(f"Hurst exponent must lie in (0, 1), got {H}")
    k = np.arange(1, K + 1, dtype=float)
    two_h = 2.0 * H
    return 0.5 * ((k + 1.0) ** two_h + np.abs(k - 1.0) ** two_h - 2.0 * k ** two_h)


def fgn_pacf(H: float, K: int) -> np.ndarray:
    return acf_to_pacf(fgn_acf(H, K))


def tau_from_alpha(alpha):
    """Kendall's tau of a Gaussian copula with correlation alpha."""
    return 2.0 / np.pi * np.arcsin(alpha)


def alpha_from_tau(tau):
    return np.sin(np.pi * np.asarray(tau) / 2.0)


@dataclass(frozen=True)
class DlCoefficients:
    """
    Durbin-Levinson predictor coefficients up to order K.

    phi[k, j] is the weight of the value j steps back in the best linear
    predictor from k past values (1 <= j <= k); sigma[k] is the prediction
    standard deviation; psi[k, j] are the moving-average weights of the causal
    filter, with psi[k, 0] = sigma[k].
    """

    alpha: np.ndarray
    phi: np.ndarray
    sigma: np.ndarray
    psi: np.ndarray

    @property
    def K(self) -> int:
        return self.alpha.size


def dl_coefficients(alpha: ArrayLike) -> DlCoefficients:
    alpha = _check_pacf(alpha)
    K = alpha.size
    phi = np.zeros((K + 1, K + 1))
    sigma = np.ones(K + 1)
    sigma[1:] = np.sqrt(np.cumprod(1.0 - alpha ** 2))
    for k in range(1, K + 1):
        a = alpha[k - 1]
        prev = phi[k - 1, 1:k]
        phi[k, 1:k] = prev - a * prev[::-1]
        phi[k, k] = a
    psi = np.zeros((K + 1, K + 1))
    psi[:, 0] = sigma
    for k in range(1, K + 1):
        for i in range(1, k + 1):
            psi[k, i:k + 1] += phi[k, i] * psi[k - i, : k - i + 1]
    return DlCoefficients(alpha=alpha, phi=phi, sigma=sigma, psi=psi)


def _order(coef: DlCoefficients, k: int) -> int:
    if k > coef.K:
        raise DomainError(f"window length {k} exceeds the coefficient order {coef.K}")
    return k


def gaussian_forward(coef: DlCoefficients, u: ArrayLike, x: float) -> float:
    """Closed-form forward Rosenblatt function of a Gaussian s-vine."""
    u = np.asarray(u, dtype=float)
    k = _order(coef, u.size)
    mean = coef.phi[k, 1:k + 1] @ special.ndtri(u[::-1]) if k else 0.0
    return float(special.ndtr((special.ndtri(x) - mean) / coef.sigma[k]))


def gaussian_forward_inverse(coef: DlCoefficients, u: ArrayLike, z: float) -> float:
    u = np.asarray(u, dtype=float)
    k = _order(coef, u.size)
    mean = coef.phi[k, 1:k + 1] @ special.ndtri(u[::-1]) if k else 0.0
    return float(special.ndtr(coef.sigma[k] * special.ndtri(z) + mean))


def gaussian_inverse(coef: DlCoefficients, z: ArrayLike, x: float) -> float:
    """Closed-form causal filter: the value produced by innovations z followed by x."""
    z = np.asarray(z, dtype=float)
    k = _order(coef, z.size)
    past = coef.psi[k, 1:k + 1] @ special.ndtri(z[::-1]) if k else 0.0
    return float(special.ndtr(coef.sigma[k] * special.ndtri(x) + past))


def debowski_check(alpha: ArrayLike, horizon: Optional[int] = None, chunk: int = 4096) -> Tuple[float, float]:
    """
    Both sides of 1 + 2 sum(rho_k) = prod((1 + alpha_k) / (1 - alpha_k)).

    The pacf is taken as zero beyond its last entry; the acf beyond that lag
    follows the AR(K) recursion and is summed until it is negligible or the
    horizon is reached.

    Returns:
        (lhs, rhs)
    """
    alpha = _check_pacf(alpha)
    rhs = float(np.exp(np.sum(np.log1p(alpha) - np.log1p(-alpha))))
    if alpha.size == 0:
        return 1.0, rhs
    rho = pacf_to_acf(alpha)
    total = float(np.sum(rho))
    K = alpha.size
    horizon = max(50 * K, 100_000) if horizon is None else horizon
    phi = _last_predictor(alpha)
    a = np.concatenate([[1.0], -phi])
    zi = signal.lfiltic([1.0], a, y=rho[::-1])
    done = K
    while done < horizon:
        n = min(chunk, horizon - done)
        ext, zi = signal.lfilter([1.0], a, np.zeros(n), zi=zi)
        total += float(np.sum(ext))
        done += n
        if np.max(np.abs(ext[-min(K, n):])) < 1e-16:
            break
    return 1.0 + 2.0 * total, rhs


def _last_predictor(alpha: np.ndarray) -> np.ndarray:
    phi = np.zeros(0)
    for a in alpha:
        phi = np.append(phi - a * phi[::-1], a)
    return phi


# --- Kendall partial autocorrelation generators ---
class KpacfKind(str, Enum):
    ARMA = "arma"
    ARFIMA = "arfima"
    FGN = "fgn"
    EXPLICIT = "explicit"


_BLOCKS = {
    KpacfKind.ARMA: ("ar", "ma"),
    KpacfKind.ARFIMA: ("ar", "d", "ma"),
    KpacfKind.FGN: ("H",),
    KpacfKind.EXPLICIT: ("tau",),
}


def ar_from_partials(r: ArrayLike) -> np.ndarray:
    """Causal AR coefficients from partial autocorrelations in (-1, 1)."""
    return _last_predictor(np.asarray(r, dtype=float))


def partials_from_ar(phi: ArrayLike) -> np.ndarray:
    """Inverse of ar_from_partials (step-down recursion)."""
    phi = np.asarray(phi, dtype=float).copy()
    r = np.zeros(phi.size)
    for k in range(phi.size, 0, -1):
        a = phi[k - 1]
        if not abs(a) < 1.0:
            raise DomainError(f"AR polynomial {phi.tolist()} is not causal")
        r[k - 1] = a
        head = phi[: k - 1]
        phi = (head + a * head[::-1]) / (1.0 - a * a)
    return r


@dataclass(frozen=True)
class KpacfSpec:
    """
    Parametric Kendall partial autocorrelation function tau_k(theta), k = 1..horizon.

    ARMA and ARFIMA kinds map through the pacf of the Gaussian process with
    the same parameters; FGN through its closed-form acf; EXPLICIT lists the
    taus directly. Blocks named in ``fixed`` are held constant during fitting.
    """

    kind: KpacfKind
    ar: Tuple[float, ...] = ()
    ma: Tuple[float, ...] = ()
    d: float = 0.0
    hurst: float = 0.5
    tau: Tuple[float, ...] = ()
    horizon: int = DEFAULT_HORIZON
    fixed: Tuple[str, ...] = ()

    def __post_init__(self):
        kind = KpacfKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "ar", tuple(float(x) for x in self.ar))
        object.__setattr__(self, "ma", tuple(float(x) for x in self.ma))
        object.__setattr__(self, "tau", tuple(float(x) for x in self.tau))
        object.__setattr__(self, "fixed", tuple(self.fixed))
        if kind is KpacfKind.EXPLICIT:
            object.__setattr__(self, "horizon", len(self.tau))
            if any(not -1.0 < t < 1.0 for t in self.tau):
                raise DomainError(f"explicit taus must lie in (-1, 1): {list(self.tau)}")
        if self.horizon < 1:
            raise DomainError(f"kpacf horizon must be >= 1, got {self.horizon}")
        if kind in (KpacfKind.ARMA, KpacfKind.ARFIMA):
            check_causal(self.ar)
        if kind is KpacfKind.ARFIMA and not -0.5 < self.d < 0.5:
            raise DomainError(f"fractional difference d must lie in (-1/2, 1/2), got {self.d}")
        if kind is KpacfKind.FGN and not 0.0 < self.hurst < 1.0:
            raise DomainError(f"Hurst exponent must lie in (0, 1), got {self.hurst}")
        unknown = set(self.fixed) - set(_BLOCKS[kind])
        if unknown:
            raise DomainError(f"cannot fix {sorted(unknown)} for a {kind.value} kpacf")

    # --- evaluation ---
    def pacf(self) -> np.ndarray:
        """Gaussian partial autocorrelations alpha_1..alpha_K."""
        K = self.horizon
        if self.kind is KpacfKind.ARMA:
            return arfima_pacf(self.ar, 0.0, self.ma, K)
        if self.kind is KpacfKind.ARFIMA:
            return arfima_pacf(self.ar, self.d, self.ma, K)
        if self.kind is KpacfKind.FGN:
            return fgn_pacf(self.hurst, K)
        return alpha_from_tau(np.array(self.tau))

    def kpacf(self) -> np.ndarray:
        """Kendall partial autocorrelations tau_1..tau_K."""
        if self.kind is KpacfKind.EXPLICIT:
            return np.array(self.tau)
        return tau_from_alpha(self.pacf())

    # --- parameter packing ---
    def _block_values(self, block: str) -> List[float]:
        return {
            "ar": list(self.ar),
            "ma": list(self.ma),
            "d": [self.d],
            "H": [self.hurst],
            "tau": list(self.tau),
        }[block]

    def free_blocks(self) -> List[str]:
        return [b for b in _BLOCKS[self.kind] if b not in self.fixed]

    def param_names(self, free_only: bool = True) -> List[str]:
        names: List[str] = []
        blocks = self.free_blocks() if free_only else list(_BLOCKS[self.kind])
        for block in blocks:
            values = self._block_values(block)
            if block in ("ar", "ma", "tau"):
                label = {"ar": "phi", "ma": "psi", "tau": "tau"}[block]
                names.extend(f"{label}{i}" for i in range(1, len(values) + 1))
            else:
                names.append(block)
        return names

    @property
    def n_free(self) -> int:
        return len(self.param_names())

    def free_params(self) -> np.ndarray:
        """Natural-scale values of the free parameters, in param_names order."""
        values: List[float] = []
        for block in self.free_blocks():
            values.extend(self._block_values(block))
        return np.array(values)

    def to_unconstrained(self) -> np.ndarray:
        out: List[np.ndarray] = []
        for block in self.free_blocks():
            if block == "ar":
                out.append(np.arctanh(partials_from_ar(self.ar)))
            elif block == "ma":
                out.append(np.arctanh(partials_from_ar(-np.array(self.ma))))
            elif block == "d":
                out.append(np.array([np.arctanh(2.0 * self.d)]))
            elif block == "H":
                out.append(np.array([special.logit(self.hurst)]))
            else:
                out.append(np.arctanh(np.array(self.tau)))
        return np.concatenate(out) if out else np.zeros(0)

    def from_unconstrained(self, x: ArrayLike) -> "KpacfSpec":
        """New spec with the free blocks set from an unconstrained vector."""
        x = np.asarray(x, dtype=float)
        if x.size != self.n_free:
            raise DomainError(f"expected {self.n_free} unconstrained values, got {x.size}")
        changes: Dict[str, Any] = {}
        pos = 0
        for block in self.free_blocks():
            n = len(self._block_values(block))
            chunk = x[pos:pos + n]
            pos += n
            if block == "ar":
                changes["ar"] = tuple(ar_from_partials(np.tanh(chunk)))
            elif block == "ma":
                changes["ma"] = tuple(-ar_from_partials(np.tanh(chunk)))
            elif block == "d":
                changes["d"] = 0.5 * math.tanh(chunk[0])
            elif block == "H":
                changes["hurst"] = float(special.expit(chunk[0]))
            else:
                changes["tau"] = tuple(np.tanh(chunk))
        return self.replace(**changes)

    def replace(self, **changes) -> "KpacfSpec":
        data = {
            "kind": self.kind,
            "ar": self.ar,
            "ma": self.ma,
            "d": self.d,
            "hurst": self.hurst,
            "tau": self.tau,
            "horizon": self.horizon,
            "fixed": self.fixed,
        }
        data.update(changes)
        return KpacfSpec(**data)

    # --- JSON ---
    def to_dict(self) -> Dict[str, Any]:
        theta: Dict[str, Any] = {}
        for block in _BLOCKS[self.kind]:
            values = self._block_values(block)
            theta[block] = values if block in ("ar", "ma", "tau") else values[0]
        data: Dict[str, Any] = {"kind": self.kind.value, "theta": theta, "horizon": self.horizon}
        if self.fixed:
            data["fixed"] = list(self.fixed)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "KpacfSpec":
        unknown = set(data) - {"kind", "theta", "horizon", "fixed"}
        if unknown:
            raise DomainError(f"Unknown kpacf keys: {sorted(unknown)}")
        try:
            kind = KpacfKind(data["kind"])
        except (KeyError, ValueError) as e:
            raise DomainError(f"Invalid kpacf kind: {data.get('kind')!r}") from e
        theta = data.get("theta", {}) or {}
        if not isinstance(theta, dict):
            raise DomainError("kpacf theta must be an object keyed by parameter block")
        unknown = set(theta) - set(_BLOCKS[kind])
        if unknown:
            raise DomainError(f"Unknown {kind.value} parameter blocks: {sorted(unknown)}")
        kwargs: Dict[str, Any] = {
            "kind": kind,
            "ar": tuple(theta.get("ar", ())),
            "ma": tuple(theta.get("ma", ())),
            "d": float(theta.get("d", 0.0)),
            "hurst": float(theta.get("H", 0.5)),
            "tau": tuple(theta.get("tau", ())),
            "fixed": tuple(data.get("fixed", ())),
        }
        if "horizon" in data:
            kwargs["horizon"] = int(data["horizon"])
        return cls(**kwargs)
