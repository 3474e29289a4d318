"""Compiled round loop shared by every policy."""

import math

import numpy as np
from numba import njit

POLICY_CODES = {"ucb_tsn": 0, "ucb": 0, "exp3_tsn": 1, "exp3": 1, "uniform": 2}


@njit(cache=True)
def _unit_average(rows, j, drift_t, noise_kind, sigma, noise_t):
    n = rows.shape[1]
    total = 0.0
    for i in range(n):
        m = rows[j, i] + drift_t
        if noise_kind == 0:
            r = m + sigma * noise_t[i]
        elif noise_kind == 1:
            r = 1.0 if noise_t[i] < m else 0.0
        else:
            r = 1.0 if noise_t[i] < (1.0 + m) / 2.0 else -1.0
        total += r
    return total / n


@njit(cache=True)
def run_kernel(
    policy, T, T1, n_arms,
    offsets, cum, rows, gaps,
    noise_kind, sigma, drift,
    u_policy, u_mix, noise,
    delta, bonus_c, eps,
    arms_out, reward_out, regret_out, snap_out, snap_counts,
):
    """Returns 0 on success, or the 1-based round of an invalid EXP3 reward."""
    counts = np.zeros(n_arms, dtype=np.int64)
    means = np.zeros(n_arms)
    scores = np.zeros(n_arms)
    probs = np.empty(n_arms)
    cursor = 0
    snap_at = T1 if T1 >= 1 else T
    log_inv_delta = math.log(1.0 / delta)
    for t in range(T):
        phase_one = t + 1 <= T1
        # choose
        if policy == 0:
            if phase_one:
                s = cursor
                cursor = (cursor + 1) % n_arms
            else:
                s = 0
                best = -np.inf
                for a in range(n_arms):
                    if counts[a] == 0:
                        val = np.inf
                    else:
                        val = means[a] + math.sqrt(bonus_c * log_inv_delta / counts[a])
                    if val > best:
                        best = val
                        s = a
        elif policy == 1:
            if phase_one:
                for a in range(n_arms):
                    probs[a] = 1.0 / n_arms
            else:
                top = scores[0]
                for a in range(1, n_arms):
                    if scores[a] > top:
                        top = scores[a]
                total = 0.0
                for a in range(n_arms):
                    probs[a] = math.exp(eps * (scores[a] - top))
                    total += probs[a]
                for a in range(n_arms):
                    probs[a] = probs[a] / total
            s = n_arms - 1
            acc = 0.0
            for a in range(n_arms):
                acc += probs[a]
                if u_policy[t] < acc:
                    s = a
                    break
        else:
            s = min(int(u_policy[t] * n_arms), n_arms - 1)
        # sample a compatible super arm's mean vector and realize rewards
        j = offsets[s + 1] - 1
        for c in range(offsets[s], offsets[s + 1]):
            if u_mix[t] < cum[c]:
                j = c
                break
        rbar = _unit_average(rows, j, drift[t], noise_kind, sigma, noise[t])
        # update
        n = counts[s] + 1
        counts[s] = n
        if policy == 1:
            if rbar < 0.0 or rbar > 1.0:
                return t + 1
            p = probs[s]
            for a in range(n_arms):
                scores[a] += 1.0
            scores[s] -= (1.0 - rbar) / p
        else:
            means[s] = (means[s] * (n - 1) + rbar) / n
        arms_out[t] = s
        reward_out[t] = rbar
        regret_out[t] = gaps[s]
        if t + 1 == snap_at:
            for a in range(n_arms):
                snap_out[a] = scores[a] if policy == 1 else means[a]
                snap_counts[a] = counts[a]
            if policy == 1 and T1 >= 1:
                for a in range(n_arms):
                    scores[a] = 0.0
    return 0
