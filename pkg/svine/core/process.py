"""
s-vine processes: model construction from a kpacf, simulation, the causal
filter and the filter-convergence experiment.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .config import DEFAULT_NEGATIVE_ROTATION
from .errors import DomainError
from .linear_oracle import KpacfKind, KpacfSpec
from .logging_utils import get_logger
from .margins import MarginalModel
from .paircopula import Family, NegativeTauRule, PairCopula, copula_from_tau
from .rosenblatt import CopulaSequence, RosenblattWorkspace, innovations_from_sweep

logger = get_logger("process", "process.log")

_UNIFORM_BITS = 53


def innovations(seed: int, n: int, stream: int = 0) -> np.ndarray:
    """
    Uniform innovations on the open interval from a counter-based generator.

    Value i depends only on (seed, stream, i), so prefixes agree across lengths
    and distinct streams can be drawn independently.
    """
    if not 0 <= seed < 2 ** 64:
        raise DomainError(f"seed must lie in [0, 2^64), got {seed}")
    if not 0 <= stream < 2 ** 64:
        raise DomainError(f"stream must lie in [0, 2^64), got {stream}")
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    gen = np.random.Generator(np.random.Philox(key=(stream << 64) | seed))
    k = gen.integers(0, 2 ** _UNIFORM_BITS, size=n, dtype=np.uint64)
    return (k.astype(float) + 0.5) / 2.0 ** _UNIFORM_BITS


def sequence_from_kpacf(
    spec: KpacfSpec,
    family: Union[Family, str],
    negative_rule: Union[NegativeTauRule, str] = NegativeTauRule.ROTATE,
    truncation: Optional[int] = None,
    negative_rotation: int = DEFAULT_NEGATIVE_ROTATION,
    positive_rotation: int = 0,
) -> CopulaSequence:
    """
    Pair copulas of one family sharing the kpacf of a spec.

    Args:
        spec: Kpacf generator.
        family: Pair-copula family used at every lag.
        negative_rule: Handling of negative taus for non-comprehensive families.
        truncation: Truncation lag p; defaults to the spec horizon.

    Returns:
        CopulaSequence with kendall_tau(lag k) = tau_k for k <= p.
    """
    p = spec.horizon if truncation is None else int(truncation)
    if p < 0:
        raise DomainError(f"truncation lag must be >= 0, got {p}")
    if p > spec.horizon and spec.kind is not KpacfKind.EXPLICIT:
        spec = spec.replace(horizon=p)
    taus = spec.kpacf()[:p]
    cops = [copula_from_tau(family, float(t), negative_rule, negative_rotation, positive_rotation) for t in taus]
    return CopulaSequence(tuple(cops), p)


@dataclass(frozen=True)
class SVineModel:
    """
    A stationary d-vine copula process with an optional margin.

    When built from a kpacf spec, the sequence is derived from it and the
    construction settings are kept so fits can rebuild it for new parameters.
    """

    seq: CopulaSequence
    margin: Optional[MarginalModel] = None
    kpacf_spec: Optional[KpacfSpec] = None
    family: Optional[Family] = None
    negative_rule: NegativeTauRule = NegativeTauRule.ROTATE
    negative_rotation: int = DEFAULT_NEGATIVE_ROTATION
    positive_rotation: int = 0

    @classmethod
    def from_kpacf(
        cls,
        spec: KpacfSpec,
        family: Union[Family, str],
        negative_rule: Union[NegativeTauRule, str] = NegativeTauRule.ROTATE,
        truncation: Optional[int] = None,
        margin: Optional[MarginalModel] = None,
        negative_rotation: int = DEFAULT_NEGATIVE_ROTATION,
        positive_rotation: int = 0,
    ) -> "SVineModel":
        family = Family(family)
        negative_rule = NegativeTauRule(negative_rule)
        seq = sequence_from_kpacf(spec, family, negative_rule, truncation, negative_rotation, positive_rotation)
        return cls(seq, margin, spec, family, negative_rule, negative_rotation, positive_rotation)

    def with_kpacf(self, spec: KpacfSpec) -> "SVineModel":
        """Same construction settings, new kpacf parameters."""
        if self.family is None:
            raise DomainError("model was not built from a kpacf spec")
        return SVineModel.from_kpacf(
            spec,
            self.family,
            self.negative_rule,
            self.seq.p,
            self.margin,
            self.negative_rotation,
            self.positive_rotation,
        )

    def with_margin(self, margin: Optional[MarginalModel]) -> "SVineModel":
        return SVineModel(
            self.seq,
            margin,
            self.kpacf_spec,
            self.family,
            self.negative_rule,
            self.negative_rotation,
            self.positive_rotation,
        )

    @property
    def p(self) -> int:
        return self.seq.p


@dataclass
class SimulationPath:
    u: np.ndarray
    z: np.ndarray
    seed: int
    truncation_lag: int
    x: Optional[np.ndarray] = None

    def to_frame(self) -> pd.DataFrame:
        data = {"u": self.u}
        if self.x is not None:
            data["x"] = self.x
        return pd.DataFrame(data)


def _as_model(model: Union[SVineModel, CopulaSequence]) -> SVineModel:
    return model if isinstance(model, SVineModel) else SVineModel(model)


def _run_filter(seq: CopulaSequence, z: np.ndarray) -> np.ndarray:
    """Causal filter over a (steps, batch) innovation array."""
    ws = RosenblattWorkspace(seq, batch=z.shape[1])
    u = np.empty_like(z)
    for t in range(z.shape[0]):
        u[t] = ws.step_inverse(z[t])
    return u


def simulate(
    model: Union[SVineModel, CopulaSequence],
    n: int,
    seed: int,
    truncation: Optional[int] = None,
    stream: int = 0,
    apply_margin: bool = True,
) -> SimulationPath:
    """
    Simulate n consecutive values.

    U_1 = Z_1 and each later value inverts the forward function on a window of
    min(t - 1, p) predecessors, which is an exact draw for an order-p model.

    Args:
        model: Model or bare copula sequence.
        n: Path length (>= 1).
        seed: Innovation seed.
        truncation: Optional truncation lag overriding the model's.
        stream: Innovation stream.
        apply_margin: Also return the margin-scale path when the model has a margin.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    model = _as_model(model)
    seq = model.seq if truncation is None else model.seq.truncated(truncation)
    logger.info("simulate n=%d seed=%d p=%d families=%s", n, seed, seq.p, seq.families())
    z = innovations(seed, n, stream)
    u = _run_filter(seq, z[:, None])[:, 0]
    x = model.margin.ppf(u) if apply_margin and model.margin is not None else None
    return SimulationPath(u=u, z=z, seed=seed, truncation_lag=seq.p, x=x)


def simulate_many(
    model: Union[SVineModel, CopulaSequence],
    n: int,
    seeds: Sequence[int],
    stream: int = 0,
) -> List[SimulationPath]:
    """Simulate one path per seed, all paths advanced together."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    model = _as_model(model)
    seeds = list(seeds)
    logger.info("simulate_many n=%d paths=%d p=%d", n, len(seeds), model.p)
    z = np.stack([innovations(s, n, stream) for s in seeds], axis=1)
    u = _run_filter(model.seq, z)
    paths = []
    for i, s in enumerate(seeds):
        x = model.margin.ppf(u[:, i]) if model.margin is not None else None
        paths.append(SimulationPath(u=u[:, i].copy(), z=z[:, i].copy(), seed=s, truncation_lag=model.p, x=x))
    return paths


def causal_filter(seq: CopulaSequence, z: Sequence[float]) -> float:
    """The value produced by innovations z_1..z_k followed by z_{k+1}."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size < 1:
        raise DomainError("causal_filter needs a non-empty innovation vector")
    return float(_run_filter(seq, z[:, None])[-1, 0])


def invert_to_innovations(seq: CopulaSequence, u: Sequence[float]) -> np.ndarray:
    """Innovations z_t = forward(window, u_t) with z_1 = u_1; the inverse of simulation."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise DomainError("invert_to_innovations needs a vector")
    return innovations_from_sweep(seq, u)


def convergence_experiment(
    seq: CopulaSequence,
    n: int,
    seed: int,
    z: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """
    Evaluate the causal filter on every trailing window of one innovation draw.

    Row k holds S_k(z_{n-k..n-1}, z_n) for k = 1..n-1; the ultimate value is
    the k = n-1 entry.

    Returns:
        DataFrame with columns k, value, ultimate.
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    z = innovations(seed, n) if z is None else np.asarray(z, dtype=float)
    if z.size != n:
        raise DomainError(f"expected {n} innovations, got {z.size}")
    ws = RosenblattWorkspace(seq, batch=n - 1)
    # run k (index k - 1) starts at time n - 1 - k
    for s in range(n):
        values = ws.step_inverse(z[s], active=slice(max(n - 2 - s, 0), n - 1))
    ultimate = float(values[-1])
    logger.info("convergence experiment n=%d seed=%d p=%d ultimate=%.6f", n, seed, seq.p, ultimate)
    return pd.DataFrame({"k": np.arange(1, n), "value": values, "ultimate": ultimate})


def excursion_sequence(lag3_rotation: int = 180) -> CopulaSequence:
    """
    Order-3 Clayton sequence whose paths show long excursions away from 1/2.

    Lag 1: survival Clayton(2); lag 2: Clayton(2); lag 3: rotated Clayton(4).
    The angle of the lag-3 rotation is configurable (180 by default, 90 as
    the alternative reading).
    """
    return CopulaSequence(
        (
            PairCopula(Family.CLAYTON, 2.0, 180),
            PairCopula(Family.CLAYTON, 2.0, 0),
            PairCopula(Family.CLAYTON, 4.0, lag3_rotation),
        )
    )


def longest_excursion(u: Sequence[float], threshold: float = 0.6, above: bool = True) -> int:
    """Length of the longest run of consecutive values above (or below) a threshold."""
    u = np.asarray(u, dtype=float)
    hit = u > threshold if above else u < threshold
    if not hit.any():
        return 0
    edges = np.diff(np.concatenate([[0], hit.astype(int), [0]]))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return int(np.max(ends - starts))
