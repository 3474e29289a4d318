"""Exact (or seeded Monte Carlo) ground truth for an instance over U_E."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .environment import Instance
from .exposure import EnumerationBudgetError, ExposureArmSpace, Profile, format_label


@dataclass(frozen=True, eq=False)
class OracleReport:
    """Exposure-level means, the best arm and the true ATE matrix.

    ``exposure_means[s, i]`` is unit i's mean reward under profile s with the
    super arm drawn uniformly from the compatible set.
    """

    exposure_means: np.ndarray
    best_arm_index: int
    ate_matrix: np.ndarray
    method: dict = field(default_factory=lambda: {"kind": "exact"})

    @property
    def arm_means(self) -> np.ndarray:
        return self.exposure_means.mean(axis=1)

    @property
    def gaps(self) -> np.ndarray:
        """Per-arm regret increments, zero at the optimum."""
        m = self.arm_means
        return m[self.best_arm_index] - m

    def to_json(self, space: ExposureArmSpace | None = None) -> dict:
        out = {
            "method": dict(self.method),
            "best_arm_index": int(self.best_arm_index),
            "arm_means": self.arm_means.tolist(),
            "exposure_means": self.exposure_means.tolist(),
            "ate_matrix": self.ate_matrix.tolist(),
        }
        if space is not None:
            out["arms"] = [[format_label(x) for x in a] for a in space.arms]
        return out


def exposure_mean(
    instance: Instance,
    space: ExposureArmSpace,
    i: int,
    S: Profile,
    method: str = "exact",
    samples: int = 100_000,
    seed: int = 0,
) -> float:
    return float(exposure_mean_vector(instance, space, S, method, samples, seed)[i])


def exposure_mean_vector(
    instance: Instance,
    space: ExposureArmSpace,
    S: Profile,
    method: str = "exact",
    samples: int = 100_000,
    seed: int = 0,
) -> np.ndarray:
    """Unit-wise exposure means for one profile."""
    if method == "exact":
        rows, probs = instance.outcome.mixture(space, tuple(S))
        return probs @ rows
    if method == "monte_carlo":
        rng = np.random.default_rng(seed)
        draws = space.sample(tuple(S), rng, size=samples)
        acc = np.zeros(space.n)
        for A in draws:
            acc += instance.outcome.means(A, instance.network, instance.clustering)
        return acc / samples
    raise ValueError(f"unknown oracle method {method!r}")


def compute_report(
    instance: Instance,
    space: ExposureArmSpace,
    method: str = "exact",
    samples: int = 100_000,
    seed: int = 0,
) -> OracleReport:
    """Oracle report over every arm of ``space``.

    ``method="auto"`` tries exact enumeration and falls back to Monte Carlo
    when a compatible set exceeds the enumeration budget.
    """
    if method == "auto":
        try:
            return compute_report(instance, space, "exact")
        except EnumerationBudgetError:
            return compute_report(instance, space, "monte_carlo", samples, seed)
    means = np.vstack(
        [exposure_mean_vector(instance, space, S, method, samples, seed + s) for s, S in enumerate(space.arms)]
    )
    arm_means = means.mean(axis=1)
    best = int(np.argmax(arm_means))
    ate = arm_means[:, None] - arm_means[None, :]
    info = {"kind": method} if method == "exact" else {"kind": method, "samples": samples, "seed": seed}
    return OracleReport(means, best, ate, info)


def best_exposure_arm(report: OracleReport) -> int:
    return report.best_arm_index


def true_ate(report: OracleReport, i: int, j: int) -> float:
    return float(report.ate_matrix[i, j])


def regret_increment(report: OracleReport, chosen: int) -> float:
    return float(report.gaps[chosen])
