"""
s-vine recursion engine.

Forward/backward Rosenblatt functions, their inverses, the joint copula
density of n consecutive values and the one-step conditional density.

Ordering convention used throughout: a conditioning vector ``u`` lists values
in time order. For ``forward(seq, u, x)`` the value ``x`` comes right after
``u[-1]``; for ``backward(seq, u, x)`` the value ``x`` comes right before
``u[0]``.  With exchangeable pair copulas, ``backward(seq, u[::-1], x)``
equals ``forward(seq, u, x)``.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError
from .logging_utils import get_logger
from .paircopula import INDEPENDENCE, PairCopula

logger = get_logger("rosenblatt", "rosenblatt.log")

ArrayLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class CopulaSequence:
    """
    Lag-indexed pair copulas C_1..C_p of a stationary d-vine.

    Lags beyond the truncation lag p are the independence copula.
    """

    copulas: Tuple[PairCopula, ...] = ()
    truncation_lag: Optional[int] = None

    def __post_init__(self):
        cops = tuple(self.copulas)
        p = len(cops) if self.truncation_lag is None else int(self.truncation_lag)
        if p < 0:
            raise DomainError(f"truncation lag must be non-negative, got {p}")
        for k, cop in enumerate(cops, start=1):
            if not isinstance(cop, PairCopula):
                raise DomainError(f"lag {k} is not a pair copula: {cop!r}")
        cops = cops[:p] + (INDEPENDENCE,) * max(0, p - len(cops))
        object.__setattr__(self, "copulas", cops)
        object.__setattr__(self, "truncation_lag", p)

    @property
    def p(self) -> int:
        return self.truncation_lag

    def lag(self, k: int) -> PairCopula:
        """Pair copula at lag k (1-based); Independence beyond p."""
        if k < 1:
            raise DomainError(f"lag must be >= 1, got {k}")
        if k > self.p:
            return INDEPENDENCE
        return self.copulas[k - 1]

    def truncated(self, p: int) -> "CopulaSequence":
        return CopulaSequence(self.copulas[:p], p)

    def families(self) -> List[str]:
        return sorted({cop.family.value for cop in self.copulas})

    def kendall_taus(self) -> np.ndarray:
        return np.array([cop.kendall_tau() for cop in self.copulas])

    @classmethod
    def independence(cls, p: int = 0) -> "CopulaSequence":
        return cls((), p)

    def to_dict(self) -> Dict[str, Any]:
        return {"truncation_lag": self.p, "copulas": [cop.to_dict() for cop in self.copulas]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CopulaSequence":
        unknown = set(data) - {"truncation_lag", "copulas"}
        if unknown:
            raise DomainError(f"Unknown copula-sequence keys: {sorted(unknown)}")
        cops = tuple(PairCopula.from_dict(c) for c in data.get("copulas", []))
        return cls(cops, data.get("truncation_lag"))


@dataclass
class LagLevel:
    """One level k of the lag sweep: the pair arguments and the updated pipelines."""

    k: int
    a: np.ndarray  # backward values R2_{k-1} of the older member of each lag-k pair
    b: np.ndarray  # forward values R1_{k-1} of the newer member
    fwd: np.ndarray
    bwd: np.ndarray


def lag_sweep(seq: CopulaSequence, w: np.ndarray, top: Optional[int] = None) -> List[LagLevel]:
    """
    Run the interlacing recursion over a series level by level.

    Level k pairs every value with the one k steps later, each conditioned
    on the k - 1 values in between. Works on the last axis, so a batch of
    series can be passed as a 2-D array.

    Args:
        seq: Copula sequence.
        w: Series on the copula scale, oldest first.
        top: Highest level to evaluate (defaults to the series length - 1).

    Returns:
        One LagLevel per evaluated level.
    """
    w = np.asarray(w, dtype=float)
    m = w.shape[-1]
    top = m - 1 if top is None else min(top, m - 1)
    levels: List[LagLevel] = []
    fwd, bwd = w, w
    for k in range(1, top + 1):
        a, b = bwd[..., :-1], fwd[..., 1:]
        cop = seq.lag(k)
        if cop.is_independence:
            fwd, bwd = b, a
        else:
            fwd, bwd = cop.h1(a, b), cop.h2(a, b)
        levels.append(LagLevel(k, a, b, fwd, bwd))
    return levels


def _window(u: ArrayLike, size: int, newest: bool) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        raise DomainError("conditioning values must be a vector")
    k = min(u.shape[-1], size)
    if newest:
        return u[..., u.shape[-1] - k:]
    return u[..., :k]


def _scalar(x: np.ndarray) -> Union[float, np.ndarray]:
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def forward(seq: CopulaSequence, u: ArrayLike, x: ArrayLike) -> Union[float, np.ndarray]:
    """
    Forward Rosenblatt function: P(U_j <= x | preceding values = u).

    Only the last p entries of u matter; older values are dropped exactly.
    """
    u = _window(u, seq.p, newest=True)
    x = np.asarray(x, dtype=float)
    w = np.concatenate([u, np.broadcast_to(x, u.shape[:-1])[..., None]], axis=-1)
    levels = lag_sweep(seq, w)
    if not levels:
        return _scalar(x)
    return _scalar(levels[-1].fwd[..., 0])


def backward(seq: CopulaSequence, u: ArrayLike, x: ArrayLike) -> Union[float, np.ndarray]:
    """Backward Rosenblatt function: P(U_j <= x | following values = u)."""
    u = _window(u, seq.p, newest=False)
    x = np.asarray(x, dtype=float)
    w = np.concatenate([np.broadcast_to(x, u.shape[:-1])[..., None], u], axis=-1)
    levels = lag_sweep(seq, w)
    if not levels:
        return _scalar(x)
    return _scalar(levels[-1].bwd[..., 0])


def forward_inverse(seq: CopulaSequence, u: ArrayLike, z: ArrayLike) -> Union[float, np.ndarray]:
    """
    Inverse of the forward function in x: the x with forward(seq, u, x) = z.

    Inverts layer by layer, one h-inverse call per lag.

    Raises:
        NumericError: an h-inverse did not converge.
    """
    u = _window(u, seq.p, newest=True)
    z = np.asarray(z, dtype=float)
    k = u.shape[-1]
    if k == 0:
        return _scalar(z)
    levels = lag_sweep(seq, u)
    anchors = [u[..., -1]] + [lvl.bwd[..., -1] for lvl in levels]
    y = z
    for m in range(k, 0, -1):
        cop = seq.lag(m)
        if not cop.is_independence:
            y = cop.h_inverse(1, anchors[m - 1], y)
    return _scalar(y)


def log_likelihood_terms(seq: CopulaSequence, u: ArrayLike) -> np.ndarray:
    """
    Per-observation log conditional densities: entry t is log f(u_t | min(t, p) predecessors).

    The first entry is 0 (uniform margin); the terms sum to log_joint_density.
    """
    u = np.asarray(u, dtype=float)
    terms = np.zeros(u.shape)
    for lvl in lag_sweep(seq, u, seq.p):
        cop = seq.lag(lvl.k)
        if not cop.is_independence:
            terms[..., lvl.k:] += cop.log_pdf(lvl.a, lvl.b)
    return terms


def log_joint_density(seq: CopulaSequence, u: ArrayLike) -> float:
    """Log joint copula density of n consecutive values; 0 for n = 1."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 1:
        raise DomainError("log_joint_density needs a non-empty vector")
    return float(np.sum(log_likelihood_terms(seq, u)))


def log_conditional_density(seq: CopulaSequence, u: ArrayLike, x: float) -> float:
    """
    Log of the conditional density of x given the k preceding values u.

    Evaluated as the sum of the pair-copula terms involving x only.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 1:
        raise DomainError("log_conditional_density needs at least one conditioning value")
    w = np.append(_window(u, seq.p, newest=True), float(x))
    return float(log_likelihood_terms(seq, w)[-1])


def innovations_from_sweep(seq: CopulaSequence, u: np.ndarray) -> np.ndarray:
    """z_t = forward(u_{t-min(t,p)..t-1}, u_t) for every t, via one lag sweep."""
    u = np.asarray(u, dtype=float)
    z = np.array(u, copy=True)
    levels = lag_sweep(seq, u, seq.p)
    for lvl in levels:
        z[..., lvl.k] = lvl.fwd[..., 0]
    if levels and levels[-1].k == seq.p:
        z[..., seq.p + 1:] = levels[-1].fwd[..., 1:]
    return z


class RosenblattWorkspace:
    """
    Streaming state for running the s-vine recursion one time step at a time
    over a batch of independent paths.

    After t values have been appended to a path, the workspace holds, for
    m < min(t, p), the backward value of the value m steps back conditioned
    on everything after it. Appending a value costs O(p) h-function calls.
    """

    def __init__(self, seq: CopulaSequence, batch: int = 1):
        self.seq = seq
        self.p = seq.p
        self.batch = int(batch)
        self._back = np.full((max(self.p, 1), self.batch), 0.5)
        self._length = np.zeros(self.batch, dtype=int)
        self._cops = [seq.lag(m) for m in range(1, self.p + 1)]

    @property
    def window_length(self) -> np.ndarray:
        return self._length.copy()

    def _select(self, active) -> np.ndarray:
        if active is None:
            return np.arange(self.batch)
        idx = np.arange(self.batch)[active]
        return idx

    def _update(self, idx: np.ndarray, back: np.ndarray, length: np.ndarray, x: np.ndarray, fwd: List[np.ndarray]):
        top = int(length.max()) if length.size else 0
        new = np.full_like(back, 0.5)
        new[0] = x
        for m in range(1, min(top, self.p - 1) + 1):
            cop = self._cops[m - 1]
            if cop.is_independence:
                val = back[m - 1]
            else:
                val = cop.h2(back[m - 1], fwd[m - 1])
            new[m] = np.where(m <= length, val, 0.5)
        self._back[:, idx] = new
        self._length[idx] = np.minimum(length + 1, self.p)

    def step_inverse(self, z: ArrayLike, active=None) -> np.ndarray:
        """
        Append the values whose forward transforms equal z (simulation step).

        Args:
            z: Innovations, one per selected path.
            active: Optional boolean mask or index array selecting paths.

        Returns:
            The new values on the copula scale.
        """
        idx = self._select(active)
        z = np.broadcast_to(np.asarray(z, dtype=float), idx.shape)
        back, length = self._back[:, idx], self._length[idx]
        top = int(length.max()) if length.size else 0
        fwd: List[np.ndarray] = [z] * (top + 1)
        y = z
        for m in range(top, 0, -1):
            cop = self._cops[m - 1]
            if not cop.is_independence:
                y = np.where(m <= length, cop.h_inverse(1, back[m - 1], y), y)
            fwd[m - 1] = y
        if self.p > 0:
            self._update(idx, back, length, y, fwd)
        return np.array(y, copy=True)

    def step_forward(self, x: ArrayLike, active=None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Append observed values x.

        Returns:
            (z, log_density): forward transforms of x given each path's window
            and the log conditional densities of x.
        """
        idx = self._select(active)
        x = np.broadcast_to(np.asarray(x, dtype=float), idx.shape)
        back, length = self._back[:, idx], self._length[idx]
        top = int(length.max()) if length.size else 0
        fwd: List[np.ndarray] = [x]
        log_density = np.zeros(idx.shape)
        y = x
        for m in range(1, top + 1):
            cop = self._cops[m - 1]
            if not cop.is_independence:
                on = m <= length
                log_density = log_density + np.where(on, cop.log_pdf(back[m - 1], y), 0.0)
                y = np.where(on, cop.h1(back[m - 1], y), y)
            fwd.append(y)
        if self.p > 0:
            self._update(idx, back, length, x, fwd)
        return np.array(y, copy=True), log_density


def marginal_copula_estimate(
    seq: CopulaSequence,
    k: int,
    v1: float,
    v2: float,
    n_samples: int = 10_000,
    seed: int = 0,
) -> float:
    """
    Monte Carlo estimate of the unconditional copula of values k apart.

    Averages C_k(backward(U, v1), forward(U, v2)) over exact draws U of the
    k - 1 intervening values.
    """
    # imported here: process builds on this module
    from .process import innovations

    if k < 1:
        raise DomainError(f"lag must be >= 1, got {k}")
    if n_samples < 1:
        raise DomainError(f"n_samples must be >= 1, got {n_samples}")
    cop = seq.lag(k)
    if k == 1:
        return float(cop.cdf(v1, v2))
    z = innovations(seed, n_samples * (k - 1)).reshape(k - 1, n_samples)
    ws = RosenblattWorkspace(seq, batch=n_samples)
    mid = np.stack([ws.step_inverse(z[t]) for t in range(k - 1)], axis=-1)
    a = backward(seq, mid, np.full(n_samples, v1))
    b = forward(seq, mid, np.full(n_samples, v2))
    est = float(np.mean(cop.cdf(a, b)))
    logger.debug("marginal copula estimate lag=%d (%.4f, %.4f) -> %.6f", k, v1, v2, est)
    return est
