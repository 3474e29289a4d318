"""Two-phase exposure-arm policies and their baselines.

These classes are the step-by-step reference implementation. The batch
engine in :mod:`netbandit.engine` runs the same arithmetic in compiled code
and is checked against them round by round.

Round numbering is 1-based: ``state.t`` counts completed rounds, so
``choose()`` picks the arm for round ``t + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import AteEstimate, ipw_ate, mean_diff_ate

UCB_TSN = "ucb_tsn"
EXP3_TSN = "exp3_tsn"
UNIFORM = "uniform"
UCB = "ucb"
EXP3 = "exp3"
POLICIES = (UCB_TSN, EXP3_TSN, UNIFORM, UCB, EXP3)


def default_t1(n_arms: int, horizon: int) -> int:
    return math.ceil(math.sqrt(n_arms * horizon))


def default_epsilon(n_arms: int, horizon: int) -> float:
    return math.sqrt(math.log(n_arms) / (n_arms * horizon))


def snapshot_round(T: int, T1: int) -> int:
    """Round at which the ATE estimate is frozen: end of phase 1, or T without one."""
    return T1 if T1 >= 1 else T


@dataclass
class UcbTsn:
    """Round-robin for ``T1`` rounds, then UCB on the exposure arms.

    ``T1=0`` gives plain UCB, which plays each unpulled arm once first.
    """

    n_arms: int
    T: int
    T1: int
    delta: float | None = None
    bonus_c: float = 9.0
    t: int = 0
    counts: np.ndarray = field(default=None)
    means: np.ndarray = field(default=None)
    cursor: int = 0
    ate_snapshot: AteEstimate | None = None

    def __post_init__(self):
        if self.delta is None:
            self.delta = 1.0 / self.T**2
        if not 0 < self.delta <= 1:
            raise ValueError(f"confidence level delta must be in (0, 1], got {self.delta}")
        if self.counts is None:
            self.counts = np.zeros(self.n_arms, dtype=np.int64)
        if self.means is None:
            self.means = np.zeros(self.n_arms)

    @property
    def in_phase_one(self) -> bool:
        return self.t + 1 <= self.T1

    def ucb_value(self, arm: int) -> float:
        n = int(self.counts[arm])
        if n == 0:
            raise ValueError(f"arm {arm} has never been pulled; its UCB is undefined")
        return float(self.means[arm]) + math.sqrt(self.bonus_c * math.log(1.0 / self.delta) / n)

    def choose(self) -> int:
        if self.t >= self.T:
            raise RuntimeError(f"horizon T={self.T} already reached")
        if self.in_phase_one:
            arm = self.cursor
            self.cursor = (self.cursor + 1) % self.n_arms
            return arm
        best, best_val = 0, -math.inf
        for s in range(self.n_arms):
            val = math.inf if self.counts[s] == 0 else self.ucb_value(s)
            if val > best_val:
                best, best_val = s, val
        return best

    def update(self, arm: int, reward: float) -> None:
        if not math.isfinite(reward):
            raise ValueError(f"non-finite reward {reward}")
        n = int(self.counts[arm]) + 1
        self.means[arm] = (self.means[arm] * (n - 1) + reward) / n
        self.counts[arm] = n
        self.t += 1
        if self.t == snapshot_round(self.T, self.T1):
            self.ate_snapshot = mean_diff_ate(self.means, self.counts, self.t, allow_uncovered=self.T1 == 0)


@dataclass
class Exp3Tsn:
    """Uniform sampling with IPW scores for ``T1`` rounds, then exponential weights.

    Scores are reset to zero after the phase-1 snapshot. ``T1=0`` gives plain
    EXP3 with the snapshot taken at ``T``.
    """

    n_arms: int
    T: int
    T1: int
    epsilon: float | None = None
    t: int = 0
    scores: np.ndarray = field(default=None)
    probs: np.ndarray = field(default=None)
    counts: np.ndarray = field(default=None)
    ate_snapshot: AteEstimate | None = None

    def __post_init__(self):
        if self.epsilon is None:
            self.epsilon = default_epsilon(self.n_arms, self.T)
        if self.scores is None:
            self.scores = np.zeros(self.n_arms)
        if self.counts is None:
            self.counts = np.zeros(self.n_arms, dtype=np.int64)
        self.probs = np.full(self.n_arms, 1.0 / self.n_arms)

    def distribution(self) -> np.ndarray:
        """Sampling distribution for the next round."""
        n = self.n_arms
        if self.t + 1 <= self.T1:
            return np.full(n, 1.0 / n)
        top = max(self.scores)
        w = [math.exp(self.epsilon * (s - top)) for s in self.scores]
        total = 0.0
        for x in w:
            total += x
        return np.array([x / total for x in w])

    def choose(self, rng: np.random.Generator) -> int:
        return self.choose_from_uniform(float(rng.random()))

    def choose_from_uniform(self, u: float) -> int:
        if self.t >= self.T:
            raise RuntimeError(f"horizon T={self.T} already reached")
        self.probs = self.distribution()
        acc = 0.0
        for s, p in enumerate(self.probs):
            acc += p
            if u < acc:
                return s
        return self.n_arms - 1

    def update(self, arm: int, reward: float) -> None:
        if not 0.0 <= reward <= 1.0:
            raise ValueError(f"EXP3 updates need rewards in [0, 1], got {reward}")
        p = self.probs[arm]
        self.scores += 1.0
        self.scores[arm] -= (1.0 - reward) / p
        self.counts[arm] += 1
        self.t += 1
        if self.t == snapshot_round(self.T, self.T1):
            self.ate_snapshot = ipw_ate(self.scores, self.t)
            if self.T1 >= 1:
                self.scores[:] = 0.0


@dataclass
class UniformPolicy:
    """Uniformly random arm every round; mean-difference ATE over all T rounds."""

    n_arms: int
    T: int
    t: int = 0
    counts: np.ndarray = field(default=None)
    means: np.ndarray = field(default=None)
    ate_snapshot: AteEstimate | None = None

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros(self.n_arms, dtype=np.int64)
        if self.means is None:
            self.means = np.zeros(self.n_arms)

    @property
    def T1(self) -> int:
        return self.T

    def choose(self, rng: np.random.Generator) -> int:
        return self.choose_from_uniform(float(rng.random()))

    def choose_from_uniform(self, u: float) -> int:
        if self.t >= self.T:
            raise RuntimeError(f"horizon T={self.T} already reached")
        return min(int(u * self.n_arms), self.n_arms - 1)

    def update(self, arm: int, reward: float) -> None:
        n = int(self.counts[arm]) + 1
        self.means[arm] = (self.means[arm] * (n - 1) + reward) / n
        self.counts[arm] = n
        self.t += 1
        if self.t == self.T:
            self.ate_snapshot = mean_diff_ate(self.means, self.counts, self.t, allow_uncovered=True)


@dataclass(frozen=True)
class PolicySpec:
    name: str
    T: int
    T1: int | None = None
    delta: float | None = None
    bonus_c: float = 9.0
    epsilon: float | None = None

    def __post_init__(self):
        if self.name not in POLICIES:
            raise ValueError(f"unknown policy {self.name!r}; expected one of {POLICIES}")
        if self.T < 1:
            raise ValueError(f"horizon must be positive, got T={self.T}")

    @classmethod
    def from_json(cls, data: dict) -> "PolicySpec":
        return cls(
            name=data["name"],
            T=int(data["T"]),
            T1=None if data.get("T1") is None else int(data["T1"]),
            delta=data.get("delta"),
            bonus_c=float(data.get("bonus_c", 9.0)),
            epsilon=data.get("epsilon"),
        )

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    def resolved_t1(self, n_arms: int) -> int:
        if self.name in (UCB, EXP3):
            return 0
        if self.name == UNIFORM:
            return self.T
        return default_t1(n_arms, self.T) if self.T1 is None else self.T1

    def build(self, n_arms: int):
        T1 = self.resolved_t1(n_arms)
        if self.name in (UCB_TSN, UCB):
            return UcbTsn(n_arms, self.T, T1, delta=self.delta, bonus_c=self.bonus_c)
        if self.name in (EXP3_TSN, EXP3):
            return Exp3Tsn(n_arms, self.T, T1, epsilon=self.epsilon)
        return UniformPolicy(n_arms, self.T)
