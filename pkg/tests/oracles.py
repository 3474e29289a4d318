"""Independent brute-force reference implementations used as test oracles.

These re-derive labels, spaces and exposure means straight from the
definitions with plain Python loops, sharing no code with the package.
"""

import itertools
from fractions import Fraction

import numpy as np


def label(variant, i, A, W, assignment, threshold=None):
    n = len(A)
    if variant == "per_unit":
        return A[i]
    if variant == "global_proportion":
        return Fraction(sum(A), n)
    if variant == "cluster_proportion":
        members = [j for j in range(n) if assignment[j] == assignment[i]]
        return Fraction(sum(A[j] for j in members), len(members))
    if variant == "neighborhood_threshold":
        den = sum(W[i][j] for j in range(n))
        num = sum(W[i][j] * A[j] for j in range(n))
        return 1 if num / den < threshold else 0
    raise AssertionError(variant)


def profile(variant, A, W, assignment, threshold=None):
    return tuple(label(variant, i, A, W, assignment, threshold) for i in range(len(A)))


def groups(variant, n, k, W, assignment, threshold=None):
    out = {}
    for A in itertools.product(range(k), repeat=n):
        out.setdefault(profile(variant, A, W, assignment, threshold), []).append(A)
    return out


def exposure_space(variant, n, k, W, assignment, threshold=None, restrict=None):
    """Sorted cluster-constant realizable profiles, optionally restricted."""
    arms = []
    for S in groups(variant, n, k, W, assignment, threshold):
        constant = all(S[i] == S[j] for i in range(n) for j in range(n) if assignment[i] == assignment[j])
        allowed = restrict is None or all(x in restrict for x in S)
        if constant and allowed:
            arms.append(S)
    return sorted(arms)


def exposure_means(mean_fn, variant, n, k, W, assignment, arms, threshold=None):
    """|arms| x N matrix of averages of mean_fn(A) over each compatible set."""
    g = groups(variant, n, k, W, assignment, threshold)
    rows = []
    for S in arms:
        total = np.zeros(n)
        for A in g[S]:
            total = total + np.asarray(mean_fn(A), dtype=float)
        rows.append(total / len(g[S]))
    return np.array(rows)


def dominated(p, q):
    """True when q dominates p (both coordinates <=, one strictly <)."""
    return q[0] <= p[0] and q[1] <= p[1] and (q[0] < p[0] or q[1] < p[1])


def pareto_brute(points):
    return [p for a, p in enumerate(points) if not any(dominated(p, q) for b, q in enumerate(points) if a != b)]


def tv_distance(counts, m):
    total = sum(counts.values())
    seen = sum(abs(c / total - 1 / m) for c in counts.values())
    return 0.5 * (seen + (m - len(counts)) / m)


def _ring(n, w=1.0):
    return [(i, (i + 1) % n, w) for i in range(n)] + [((i + 1) % n, i, w) for i in range(n)]


def _random_graph(n, seed, p=0.5):
    rng = np.random.default_rng(seed)
    edges = _ring(n)
    for i in range(n):
        for j in range(n):
            if i != j and abs(i - j) not in (1, n - 1) and rng.random() < p:
                edges.append((i, j, float(rng.uniform(0.1, 2.0))))
    return edges


# (name, variant, n, k, edges, assignment, threshold, restrict) with K^N <= 4096
CASES = [
    ("unit-2x2", "per_unit", 2, 2, [], [0, 1], None, None),
    ("unit-4-two-clusters", "per_unit", 4, 2, _ring(4), [0, 0, 1, 1], None, None),
    ("unit-3-k3", "per_unit", 3, 3, [], [0, 1, 2], None, None),
    ("unit-5-k3", "per_unit", 5, 3, _ring(5), [0, 1, 1, 2, 2], None, None),
    ("unit-6-k4", "per_unit", 6, 4, [], [0, 0, 1, 1, 2, 2], None, None),
    ("unit-12", "per_unit", 12, 2, [], [0] * 6 + [1] * 6, None, None),
    ("global-3", "global_proportion", 3, 2, [], [0, 0, 0], None, None),
    ("global-3-restricted", "global_proportion", 3, 2, [], [0, 0, 0], None, (0, 1)),
    ("global-4-two-clusters", "global_proportion", 4, 2, _ring(4), [0, 0, 1, 1], None, None),
    ("global-12", "global_proportion", 12, 2, [], [0] * 12, None, None),
    ("cluster-4", "cluster_proportion", 4, 2, [], [0, 0, 1, 1], None, None),
    ("cluster-6-uneven", "cluster_proportion", 6, 2, [], [0, 0, 0, 1, 1, 2], None, None),
    ("cluster-12", "cluster_proportion", 12, 2, [], [0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 2], None, None),
    ("cluster-5-singletons", "cluster_proportion", 5, 2, [], [0, 1, 2, 3, 4], None, None),
    ("threshold-chain", "neighborhood_threshold", 3, 2, [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)], [0, 1, 2], 0.5, None),
    ("threshold-pairs", "neighborhood_threshold", 4, 2, _ring(4), [0, 0, 1, 1], 0.5, None),
    ("threshold-ring-8", "neighborhood_threshold", 8, 2, _ring(8), [0, 1, 2, 3, 4, 5, 6, 7], 0.6, None),
    ("threshold-weighted-8", "neighborhood_threshold", 8, 2, _random_graph(8, 3), [0, 0, 1, 1, 2, 2, 3, 3], 0.3, None),
    ("threshold-weighted-10", "neighborhood_threshold", 10, 2, _random_graph(10, 7, 0.3), list(range(10)), 0.45, None),
    ("threshold-complete-5", "neighborhood_threshold", 5, 2, [(i, j, 1.0) for i in range(5) for j in range(5) if i != j], [0] * 5, 1.0, None),
]


def weight_matrix(n, edges):
    W = [[0.0] * n for _ in range(n)]
    for i, j, w in edges:
        W[i][j] = w
    return W
