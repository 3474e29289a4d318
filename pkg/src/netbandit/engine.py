"""Run one replication of a policy against an instance.

A run consumes a fixed layout of random draws from its generator, all drawn
up front in this order:

1. ``T`` uniforms for the policy's own randomization (EXP3, uniform),
2. ``T`` uniforms for picking a compatible super arm of the chosen profile,
3. a ``(T, N)`` block of raw noise (normals for Gaussian noise, uniforms otherwise).

:func:`run_compiled` executes the round loop in numba; :func:`run_reference`
replays the same draws through the Python policy classes. Both must produce
identical traces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine_kernel import POLICY_CODES, run_kernel
from .environment import BERNOULLI, GAUSSIAN, RADEMACHER, Instance, NoiseModel, realize
from .estimators import AteEstimate, ipw_ate, mean_diff_ate
from .exposure import ExposureArmSpace
from .metrics import RunTrace
from .oracle import OracleReport
from .policies import EXP3, EXP3_TSN, UCB, UCB_TSN, UNIFORM, PolicySpec, snapshot_round

NOISE_CODES = {GAUSSIAN: 0, BERNOULLI: 1, RADEMACHER: 2}


@dataclass(frozen=True, eq=False)
class CompiledWorld:
    """Flat arrays describing reward generation for every exposure arm.

    Rows ``offsets[s]:offsets[s+1]`` of ``rows`` are the distinct mean vectors
    for arm s, picked with cumulative probabilities ``cum``.
    """

    offsets: np.ndarray
    cum: np.ndarray
    rows: np.ndarray
    gaps: np.ndarray
    noise_kind: str
    sigma: float
    drift: object
    n_units: int

    @property
    def n_arms(self) -> int:
        return len(self.offsets) - 1

    def drift_series(self, T: int) -> np.ndarray:
        return self.drift.series(T)


def compile_world(instance: Instance, space: ExposureArmSpace, report: OracleReport) -> CompiledWorld:
    offsets = [0]
    cums, rows = [], []
    for S in space.arms:
        r, p = instance.outcome.mixture(space, S)
        c = np.cumsum(p)
        c[-1] = 1.0
        rows.append(np.asarray(r, dtype=float))
        cums.append(c)
        offsets.append(offsets[-1] + len(p))
    return CompiledWorld(
        offsets=np.asarray(offsets, dtype=np.int64),
        cum=np.concatenate(cums),
        rows=np.ascontiguousarray(np.vstack(rows)),
        gaps=np.asarray(report.gaps, dtype=float),
        noise_kind=instance.noise.kind,
        sigma=float(instance.noise.sigma),
        drift=instance.drift,
        n_units=instance.n,
    )


def draw_blocks(rng: np.random.Generator, T: int, n_units: int, noise_kind: str):
    u_policy = rng.random(T)
    u_mix = rng.random(T)
    if noise_kind == GAUSSIAN:
        noise = rng.standard_normal((T, n_units))
    else:
        noise = rng.random((T, n_units))
    return u_policy, u_mix, noise


def _estimate(name: str, snap: np.ndarray, counts: np.ndarray, at: int, T1: int) -> AteEstimate:
    if name in (EXP3_TSN, EXP3):
        return ipw_ate(snap, at)
    return mean_diff_ate(snap, counts, at, allow_uncovered=name in (UCB, UNIFORM) or T1 == 0)


def run_compiled(world: CompiledWorld, policy: PolicySpec, rng: np.random.Generator, seed: int = 0) -> RunTrace:
    n_arms = world.n_arms
    T = policy.T
    T1 = policy.resolved_t1(n_arms)
    built = policy.build(n_arms)  # resolves defaults (delta, epsilon) exactly like the reference path
    delta = getattr(built, "delta", 0.5)
    eps = getattr(built, "epsilon", 0.0)
    u_policy, u_mix, noise = draw_blocks(rng, T, world.n_units, world.noise_kind)
    drift = world.drift_series(T)
    arms = np.empty(T, dtype=np.int64)
    rewards = np.empty(T)
    regret = np.empty(T)
    snap = np.zeros(n_arms)
    snap_counts = np.zeros(n_arms, dtype=np.int64)
    status = run_kernel(
        POLICY_CODES[policy.name], T, T1, n_arms,
        world.offsets, world.cum, world.rows, world.gaps,
        NOISE_CODES[world.noise_kind], world.sigma, drift,
        u_policy, u_mix, noise,
        float(delta), float(policy.bonus_c), float(eps),
        arms, rewards, regret, snap, snap_counts,
    )
    if status != 0:
        raise ValueError(f"EXP3 update received a reward outside [0, 1] at round {status}")
    at = snapshot_round(T, T1)
    est = _estimate(policy.name, snap, snap_counts, at, T1)
    return RunTrace(arms, rewards, regret, est, seed)


def run_reference(world: CompiledWorld, policy: PolicySpec, rng: np.random.Generator, seed: int = 0) -> RunTrace:
    """Pure-Python run over the same draws as :func:`run_compiled`."""
    n_arms = world.n_arms
    T = policy.T
    state = policy.build(n_arms)
    u_policy, u_mix, noise = draw_blocks(rng, T, world.n_units, world.noise_kind)
    drift = world.drift_series(T)
    arms = np.empty(T, dtype=np.int64)
    rewards = np.empty(T)
    regret = np.empty(T)
    noise_model = NoiseModel(world.noise_kind, world.sigma)
    for t in range(T):
        if policy.name in (UCB_TSN, UCB):
            s = state.choose()
        else:
            s = state.choose_from_uniform(float(u_policy[t]))
        lo, hi = world.offsets[s], world.offsets[s + 1]
        j = hi - 1
        for c in range(lo, hi):
            if u_mix[t] < world.cum[c]:
                j = c
                break
        r = realize(noise_model, world.rows[j] + drift[t], noise[t])
        total = 0.0
        for x in r:
            total += float(x)
        rbar = total / world.n_units
        state.update(s, rbar)
        arms[t], rewards[t], regret[t] = s, rbar, world.gaps[s]
    return RunTrace(arms, rewards, regret, state.ate_snapshot, seed)
