"""ATE estimates frozen at the end of the uniform phase, and their error."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MEAN_DIFF = "mean_diff"
IPW = "ipw"


@dataclass(frozen=True, eq=False)
class AteEstimate:
    """``values[i, j]`` estimates the ATE between arms i and j.

    Rows/columns of arms with no data are NaN.
    """

    values: np.ndarray
    source: str
    frozen_at: int

    def to_triples(self) -> list[list]:
        n = self.values.shape[0]
        return [[i, j, _jsonable(self.values[i, j])] for i in range(n) for j in range(n) if i != j]


def _jsonable(x: float):
    return None if np.isnan(x) else float(x)


def _pairwise(v: np.ndarray) -> np.ndarray:
    # exact antisymmetry: a - b == -(b - a) in IEEE arithmetic
    return v[:, None] - v[None, :]


def mean_diff_ate(means, counts=None, frozen_at: int = 0, allow_uncovered: bool = False) -> AteEstimate:
    """Differences of per-arm sample means."""
    v = np.array(means, dtype=float)
    if counts is not None:
        uncovered = np.asarray(counts) == 0
        if uncovered.any():
            if not allow_uncovered:
                missing = np.flatnonzero(uncovered).tolist()
                raise ValueError(f"arms {missing} have no observations")
            v[uncovered] = np.nan
    return AteEstimate(_pairwise(v), MEAN_DIFF, frozen_at)


def ipw_ate(scores, rounds: int) -> AteEstimate:
    """Differences of cumulative IPW scores divided by the number of rounds."""
    if rounds < 1:
        raise ValueError("IPW estimate needs at least one round")
    v = np.asarray(scores, dtype=float) / rounds
    return AteEstimate(_pairwise(v), IPW, rounds)


def estimation_error(estimate: AteEstimate, ate_matrix: np.ndarray) -> float:
    """Largest absolute error over all arm pairs (NaN if any pair is unestimated)."""
    truth = np.asarray(ate_matrix)
    if estimate.values.shape != truth.shape:
        raise ValueError(f"estimate shape {estimate.values.shape} differs from truth {truth.shape}")
    err = np.abs(estimate.values - truth)
    return float("nan") if np.isnan(err).any() else float(err.max())
