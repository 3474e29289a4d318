"""Regret, estimation error, trade-off product, scaling fits and Pareto fronts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .estimators import AteEstimate


@dataclass(frozen=True, eq=False)
class RunTrace:
    arms: np.ndarray
    rewards: np.ndarray
    regret: np.ndarray
    estimate: AteEstimate
    seed: int

    def __post_init__(self):
        if not (len(self.arms) == len(self.rewards) == len(self.regret)):
            raise ValueError("trace arrays must have one entry per round")
        if np.any(np.asarray(self.regret) < 0):
            raise ValueError("regret increments must be nonnegative")

    @property
    def horizon(self) -> int:
        return len(self.arms)

    def records(self):
        for t, (a, r, g) in enumerate(zip(self.arms, self.rewards, self.regret), start=1):
            yield {"t": t, "arm": int(a), "reward": float(r), "regret": float(g)}


def cumulative_regret(trace: RunTrace) -> float:
    return math.fsum(trace.regret)


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    xs = [float(x) for x in values]
    n = len(xs)
    mean = math.fsum(xs) / n
    if n < 2:
        return mean, float("nan")
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, math.sqrt(var / n)


@dataclass(frozen=True)
class AggregateResult:
    mean_regret: float
    se_regret: float
    mean_error: float
    se_error: float
    replications: int

    @property
    def product(self) -> float:
        return tradeoff_product(self)

    def to_json(self) -> dict:
        return {
            "replications": self.replications,
            "mean_regret": self.mean_regret,
            "se_regret": self.se_regret,
            "mean_error": self.mean_error,
            "se_error": self.se_error,
            "product": self.product,
        }


def aggregate(regrets: Sequence[float], errors: Sequence[float]) -> AggregateResult:
    """Replication means with standard errors (compensated sums, order-insensitive)."""
    if len(regrets) != len(errors) or len(regrets) == 0:
        raise ValueError("need matching, non-empty regret and error lists")
    r_mean, r_se = _mean_se(regrets)
    e_mean, e_se = _mean_se(errors)
    return AggregateResult(r_mean, r_se, e_mean, e_se, len(regrets))


def tradeoff_product(agg: AggregateResult) -> float:
    return math.sqrt(agg.mean_regret) * agg.mean_error


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares fit of log y on log x: ``(slope, intercept, r^2)``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 3:
        raise ValueError("need at least three (x, y) points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs strictly positive values")
    fit = stats.linregress(np.log(x), np.log(y))
    return float(fit.slope), float(fit.intercept), float(fit.rvalue**2)


def pareto_front(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Non-dominated (regret, error) points, both minimized, in input order.

    A point is dominated when another is no worse in both coordinates and
    strictly better in one; identical points do not dominate each other.
    """
    pts = [(float(a), float(b)) for a, b in points]
    if any(math.isnan(a) or math.isnan(b) for a, b in pts):
        raise ValueError("pareto_front does not accept NaN coordinates")
    order = sorted(range(len(pts)), key=lambda i: pts[i])
    keep = [False] * len(pts)
    best_prev = math.inf  # min y over strictly smaller x
    pos = 0
    while pos < len(order):
        x = pts[order[pos]][0]
        group = []
        while pos < len(order) and pts[order[pos]][0] == x:
            group.append(order[pos])
            pos += 1
        y_min = pts[group[0]][1]
        if y_min < best_prev:
            for i in group:
                if pts[i][1] == y_min:
                    keep[i] = True
        best_prev = min(best_prev, y_min)
    return [p for p, k in zip(pts, keep) if k]
