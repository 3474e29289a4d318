"""Bandit instances: potential outcomes, noise, drift and reward generation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exposure import (
    DEFAULT_BUDGET,
    EnumerationBudgetError,
    ExposureArmSpace,
    ExposureMapSpec,
    Profile,
    all_super_arms,
    exposure_profile,
    parse_label,
)
from .network import AdjacencyMatrix, Clustering


# --------------------------------------------------------------------------
# outcome models
# --------------------------------------------------------------------------


class OutcomeModel:
    """Mean outcome Y_i(A) for every unit, plus its mixture under a profile.

    ``mixture(space, S)`` returns ``(rows, probs)``: the distinct mean vectors
    Y(A) over super arms A compatible with S, and the probability of each under
    uniform sampling of A. Grouping equal rows is exact in law.
    """

    def means(self, A: Sequence[int], network: AdjacencyMatrix, clustering: Clustering) -> np.ndarray:
        raise NotImplementedError

    def mixture(self, space: ExposureArmSpace, S: Profile) -> tuple[np.ndarray, np.ndarray]:
        arms = space.compatible(S)
        rows = np.array([self.means(A, space.network, space.clustering) for A in arms])
        return rows, np.full(len(arms), 1.0 / len(arms))

    def bounds(self) -> tuple[float, float]:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class DenseTable(OutcomeModel):
    """Explicit table ``super arm -> length-N vector of means``."""

    table: dict
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if len(self.table) > self.budget:
            raise EnumerationBudgetError(f"dense table with {len(self.table)} rows exceeds budget {self.budget}")
        table = {tuple(int(a) for a in A): np.asarray(v, dtype=float) for A, v in self.table.items()}
        object.__setattr__(self, "table", table)

    def means(self, A, network=None, clustering=None):
        key = tuple(int(a) for a in A)
        try:
            return self.table[key]
        except KeyError:
            raise KeyError(f"super arm {key} missing from dense outcome table") from None

    def bounds(self):
        values = np.concatenate([v for v in self.table.values()])
        return float(values.min()), float(values.max())

    @classmethod
    def random(cls, n: int, k: int, rng: np.random.Generator, low: float = 0.0, high: float = 1.0, budget: int = DEFAULT_BUDGET) -> "DenseTable":
        arms = list(all_super_arms(n, k, budget))
        values = rng.uniform(low, high, size=(len(arms), n))
        return cls(dict(zip(arms, values)), budget)


@dataclass(frozen=True, eq=False)
class ExposureFaithful(OutcomeModel):
    """Y_i(A) depends on A only through the unit's exposure label.

    ``table`` maps ``(unit, label) -> mean``.
    """

    mapping: ExposureMapSpec
    table: dict

    def __post_init__(self):
        table = {(int(i), parse_label(label)): float(v) for (i, label), v in self.table.items()}
        object.__setattr__(self, "table", table)

    def lookup(self, i: int, label) -> float:
        try:
            return self.table[(i, label)]
        except KeyError:
            raise KeyError(f"no mean for unit {i} at exposure label {label}") from None

    def means(self, A, network, clustering):
        S = exposure_profile(self.mapping, A, network, clustering)
        return np.array([self.lookup(i, s) for i, s in enumerate(S)])

    def mixture(self, space, S):
        row = np.array([self.lookup(i, s) for i, s in enumerate(S)])
        return row[None, :], np.ones(1)

    def bounds(self):
        values = list(self.table.values())
        return min(values), max(values)

    @classmethod
    def from_records(cls, mapping: ExposureMapSpec, records: Sequence[dict]) -> "ExposureFaithful":
        return cls(mapping, {(r["unit"], r["label"]): r["mean"] for r in records})


@dataclass(frozen=True, eq=False)
class NeedleInstance(OutcomeModel):
    """Every unit has mean ``delta`` on the target super arm and 0 elsewhere."""

    delta: float
    target: tuple

    def __post_init__(self):
        if not 0 <= self.delta <= 0.5:
            raise ValueError(f"needle gap must lie in [0, 1/2], got {self.delta}")
        object.__setattr__(self, "target", tuple(int(a) for a in self.target))

    def means(self, A, network=None, clustering=None):
        n = len(self.target)
        hit = tuple(int(a) for a in A) == self.target
        return np.full(n, self.delta if hit else 0.0)

    def mixture(self, space, S):
        n = len(self.target)
        if space.profile(self.target) != tuple(S):
            return np.zeros((1, n)), np.ones(1)
        size = space.count_compatible(S)
        if size == 1:
            return np.full((1, n), self.delta), np.ones(1)
        rows = np.vstack([np.full(n, self.delta), np.zeros(n)])
        return rows, np.array([1.0 / size, 1.0 - 1.0 / size])

    def bounds(self):
        return 0.0, self.delta


@dataclass(frozen=True, eq=False)
class ShiftedOnProfile(OutcomeModel):
    """``base`` with means lowered by ``shift`` on super arms compatible with ``profile``."""

    base: OutcomeModel
    mapping: ExposureMapSpec
    profile: tuple
    shift: float

    def means(self, A, network, clustering):
        m = self.base.means(A, network, clustering)
        if exposure_profile(self.mapping, A, network, clustering) == self.profile:
            return m - self.shift
        return m

    def mixture(self, space, S):
        rows, probs = self.base.mixture(space, S)
        if tuple(S) == self.profile:
            rows = rows - self.shift
        return rows, probs

    def bounds(self):
        lo, hi = self.base.bounds()
        return lo - max(self.shift, 0.0), hi - min(self.shift, 0.0)


def needle_gap(k: int, n: int, horizon: int) -> float:
    """Gap sqrt((K^N - 1) / (4 T N)) capped at 1/2, the hard-instance choice."""
    return min(math.sqrt((k**n - 1) / (4.0 * horizon * n)), 0.5)


# --------------------------------------------------------------------------
# noise and drift
# --------------------------------------------------------------------------

GAUSSIAN = "gaussian"
BERNOULLI = "bernoulli"
RADEMACHER = "rademacher"


@dataclass(frozen=True)
class NoiseModel:
    kind: str = GAUSSIAN
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in (GAUSSIAN, BERNOULLI, RADEMACHER):
            raise ValueError(f"unknown noise model {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("noise sigma must be nonnegative")

    @property
    def variance_proxy(self) -> float:
        if self.kind == GAUSSIAN:
            return self.sigma**2
        if self.kind == BERNOULLI:
            return 0.25
        return 1.0

    @property
    def bounded(self) -> bool:
        """Rewards stay in [0, 1] whenever means do."""
        return self.kind == BERNOULLI or (self.kind == GAUSSIAN and self.sigma == 0)

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Raw randomness consumed by :func:`realize`: normals or uniforms."""
        if self.kind == GAUSSIAN:
            return rng.standard_normal(shape)
        return rng.random(shape)

    @classmethod
    def from_json(cls, data: dict | None) -> "NoiseModel":
        if not data:
            return cls()
        _reject_unknown(data, {"type", "sigma"}, "noise")
        return cls(kind=data.get("type", GAUSSIAN), sigma=float(data.get("sigma", 1.0)))

    def to_json(self) -> dict:
        out = {"type": self.kind}
        if self.kind == GAUSSIAN:
            out["sigma"] = self.sigma
        return out


def _reject_unknown(data: dict, allowed: set, what: str) -> None:
    extra = set(data) - allowed
    if extra:
        raise ValueError(f"unknown {what} keys {sorted(extra)}; allowed {sorted(allowed)}")


def realize(noise: NoiseModel, mean: np.ndarray, raw: np.ndarray) -> np.ndarray:
    """Turn per-unit means (drift included) and raw draws into rewards."""
    if noise.kind == GAUSSIAN:
        return mean + noise.sigma * raw
    if noise.kind == BERNOULLI:
        return np.where(raw < mean, 1.0, 0.0)
    return np.where(raw < (1.0 + mean) / 2.0, 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class DriftSchedule:
    """Pre-specified additive drift f_t, shared by every unit, rounds t >= 1."""

    kind: str = "none"
    c: float = 0.0
    amplitude: float = 0.0
    period: float = 1.0
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("none", "constant", "sinusoidal", "table"):
            raise ValueError(f"unknown drift schedule {self.kind!r}")
        if self.kind == "sinusoidal" and self.period <= 0:
            raise ValueError("sinusoidal drift needs a positive period")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def active(self) -> bool:
        return self.kind != "none"

    def at(self, t: int) -> float:
        if t < 1:
            raise ValueError(f"rounds start at 1, got t={t}")
        if self.kind == "none":
            return 0.0
        if self.kind == "constant":
            return self.c
        if self.kind == "sinusoidal":
            return float(self.amplitude * np.sin(2 * np.pi * t / self.period))
        if t > len(self.values):
            raise ValueError(f"drift table has {len(self.values)} rounds, need {t}")
        return self.values[t - 1]

    def series(self, horizon: int) -> np.ndarray:
        """f_1..f_T as an array."""
        if self.kind == "none":
            return np.zeros(horizon)
        if self.kind == "constant":
            return np.full(horizon, self.c)
        if self.kind == "sinusoidal":
            t = np.arange(1, horizon + 1)
            return self.amplitude * np.sin(2 * np.pi * t / self.period)
        if horizon > len(self.values):
            raise ValueError(f"drift table has {len(self.values)} rounds, need {horizon}")
        return np.asarray(self.values[:horizon])

    def extremes(self) -> tuple[float, float]:
        if self.kind == "none":
            return 0.0, 0.0
        if self.kind == "constant":
            return self.c, self.c
        if self.kind == "sinusoidal":
            a = abs(self.amplitude)
            return -a, a
        return (min(self.values), max(self.values)) if self.values else (0.0, 0.0)

    @classmethod
    def from_json(cls, data: dict | None) -> "DriftSchedule":
        if not data:
            return cls()
        _reject_unknown(data, {"type", "c", "amplitude", "period", "values"}, "drift")
        kind = data.get("type", "none")
        return cls(
            kind=kind,
            c=float(data.get("c", 0.0)),
            amplitude=float(data.get("amplitude", 0.0)),
            period=float(data.get("period", 1.0)),
            values=tuple(data.get("values", ())),
        )


# --------------------------------------------------------------------------
# instances
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Instance:
    outcome: OutcomeModel
    noise: NoiseModel
    network: AdjacencyMatrix
    clustering: Clustering
    k: int
    drift: DriftSchedule = field(default_factory=DriftSchedule)

    def __post_init__(self):
        if self.network.n != self.clustering.n:
            raise ValueError(f"network has {self.network.n} units but clustering has {self.clustering.n}")
        if isinstance(self.outcome, NeedleInstance) and len(self.outcome.target) != self.n:
            raise ValueError("needle target length differs from unit count")
        lo, hi = self.outcome.bounds()
        if self.noise.kind == RADEMACHER:
            if lo < -1 or hi > 1:
                raise ValueError(f"Rademacher means must lie in [-1, 1], got range [{lo}, {hi}]")
            if self.drift.active:
                raise ValueError("drift is not supported with Rademacher rewards")
        elif lo < 0 or hi > 1:
            raise ValueError(f"mean outcomes must lie in [0, 1], got range [{lo}, {hi}]")
        if self.drift.active:
            if not self.noise.bounded:
                raise ValueError("adversarial drift requires bounded rewards (bernoulli noise or sigma=0)")
            f_lo, f_hi = self.drift.extremes()
            if lo + f_lo < 0 or hi + f_hi > 1:
                raise ValueError(
                    f"drift range [{f_lo}, {f_hi}] pushes means [{lo}, {hi}] outside [0, 1]"
                )

    @property
    def n(self) -> int:
        return self.clustering.n


def mean_outcome(instance: Instance, i: int, A: Sequence[int]) -> float:
    if not 0 <= i < instance.n:
        raise IndexError(f"unit {i} out of range for n={instance.n}")
    _check_arm(instance, A)
    return float(instance.outcome.means(A, instance.network, instance.clustering)[i])


def pull(instance: Instance, A: Sequence[int], t: int, rng: np.random.Generator) -> np.ndarray:
    """Rewards r_i = Y_i(A) + f_t + noise for every unit, fresh noise per call."""
    if t < 1:
        raise ValueError(f"rounds start at 1, got t={t}")
    _check_arm(instance, A)
    mean = instance.outcome.means(A, instance.network, instance.clustering) + instance.drift.at(t)
    return realize(instance.noise, mean, instance.noise.draw(rng, instance.n))


def _check_arm(instance: Instance, A) -> None:
    if len(A) != instance.n:
        raise ValueError(f"super arm has length {len(A)}, expected {instance.n}")
    if any(not 0 <= int(a) < instance.k for a in A):
        raise ValueError(f"super arm {tuple(A)} has entries outside [0, {instance.k})")


def make_needle_instance(
    n: int,
    k: int,
    delta: float,
    target: Sequence[int],
    noise: NoiseModel | None = None,
    network: AdjacencyMatrix | None = None,
    clustering: Clustering | None = None,
    drift: DriftSchedule | None = None,
) -> Instance:
    from .network import build_adjacency

    return Instance(
        outcome=NeedleInstance(delta, tuple(target)),
        noise=noise or NoiseModel(),
        network=network or build_adjacency(n, []),
        clustering=clustering or Clustering.singletons(n),
        k=k,
        drift=drift or DriftSchedule(),
    )


def make_rademacher_pair(
    base: ExposureFaithful,
    target: Profile,
    alpha: float,
    network: AdjacencyMatrix,
    clustering: Clustering,
    k: int,
) -> tuple[Instance, Instance]:
    """Two Rademacher-reward instances differing by ``-alpha`` on arms compatible with ``target``."""
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    lo, _ = base.bounds()
    if lo - alpha < -1:
        raise ValueError(f"alpha={alpha} makes Rademacher probabilities invalid (min mean {lo})")
    noise = NoiseModel(RADEMACHER)
    first = Instance(base, noise, network, clustering, k)
    shifted = ShiftedOnProfile(base, base.mapping, tuple(target), alpha)
    return first, Instance(shifted, noise, network, clustering, k)


def aggregate_variance_proxy(instance: Instance, one_to_one: bool) -> float:
    """Variance proxy of the unit-averaged reward noise."""
    proxy = instance.noise.variance_proxy / instance.n
    return proxy if one_to_one else proxy + 0.25


def outcome_from_json(data: dict, mapping: ExposureMapSpec, n: int, k: int, horizon: int | None = None) -> OutcomeModel:
    kind = data.get("type")
    if kind == "needle":
        delta = data.get("delta", "minimax")
        if delta == "minimax":
            if horizon is None:
                raise ValueError("needle delta 'minimax' needs a horizon")
            delta = needle_gap(k, n, horizon)
        return NeedleInstance(float(delta), tuple(data["target"]))
    if kind == "exposure_faithful":
        return ExposureFaithful.from_records(mapping, data["table"])
    if kind == "dense":
        return DenseTable({tuple(r["arm"]): r["means"] for r in data["table"]})
    if kind == "dense_random":
        rng = np.random.default_rng(int(data.get("seed", 0)))
        return DenseTable.random(n, k, rng, float(data.get("low", 0.0)), float(data.get("high", 1.0)))
    raise ValueError(f"unknown outcome model {kind!r}")
