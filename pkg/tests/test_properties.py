import json
import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

import oracles
from netbandit.engine import compile_world, run_compiled, run_reference
from netbandit.environment import DenseTable, Instance, NoiseModel
from netbandit.estimators import ipw_ate, mean_diff_ate
from netbandit.exposure import ExposureMapSpec, enumerate_exposure_space, exposure_profile, is_cluster_constant
from netbandit.harness import replication_rng
from netbandit.metrics import RunTrace, cumulative_regret, loglog_slope, pareto_front
from netbandit.network import AdjacencyMatrix, Clustering, build_adjacency
from netbandit.oracle import compute_report
from netbandit.policies import Exp3Tsn, PolicySpec, UcbTsn


@st.composite
def networks(draw, min_n=1, max_n=6):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    weights = draw(st.lists(st.floats(0.01, 5.0), min_size=len(chosen), max_size=len(chosen)))
    return build_adjacency(n, [(i, j, w) for (i, j), w in zip(chosen, weights)])


@st.composite
def clusterings(draw, n):
    raw = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    relabel = {c: q for q, c in enumerate(dict.fromkeys(raw))}
    return Clustering([relabel[c] for c in raw])


@st.composite
def settings_(draw):
    variant = draw(st.sampled_from(["per_unit", "global_proportion", "cluster_proportion", "neighborhood_threshold"]))
    n = draw(st.integers(2, 6))
    if variant == "neighborhood_threshold":
        H = build_adjacency(n, [(i, (i + 1) % n, 1.0) for i in range(n)] + [((i + 1) % n, i, draw(st.floats(0.1, 3.0))) for i in range(n)])
        threshold = draw(st.sampled_from([0.25, 0.5, 0.75, 1.0]))
    else:
        H = draw(networks(n, n))
        threshold = None
    k = draw(st.integers(2, 3)) if variant == "per_unit" else 2
    clustering = draw(clusterings(n))
    return ExposureMapSpec(variant, threshold=threshold), H, clustering, k


class TestNetworkProperties:
    @given(networks())
    def test_json_round_trip(self, H):
        assert AdjacencyMatrix.from_json(json.loads(json.dumps(H.to_json()))) == H

    @given(st.integers(1, 12).flatmap(clusterings))
    def test_partition(self, c):
        members = [u for q in range(c.num_clusters) for u in c.members(q)]
        assert sorted(members) == list(range(c.n))
        assert sum(c.sizes()) == c.n and min(c.sizes()) >= 1


class TestSpaceProperties:
    @settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(settings_(), st.integers(0, 2**32 - 1))
    def test_space_invariants(self, setting, seed):
        spec, H, clustering, k = setting
        try:
            space = enumerate_exposure_space(spec, H, clustering, k)
        except ValueError:
            W = oracles.weight_matrix(H.n, H.edges())
            assert len(oracles.exposure_space(spec.variant, H.n, k, W, clustering.assignment, spec.threshold)) < 2
            return
        rng = np.random.default_rng(seed)
        assert list(space.arms) == sorted(space.arms)
        for S in space.arms:
            assert is_cluster_constant(S, clustering)
            assert space.count_compatible(S) >= 1
            for A in space.sample(S, rng, size=5):
                assert exposure_profile(spec, tuple(int(a) for a in A), H, clustering) == S


class TestEstimateProperties:
    @given(st.lists(st.floats(-1, 1), min_size=2, max_size=8))
    def test_mean_diff_antisymmetric(self, means):
        v = mean_diff_ate(means).values
        assert np.array_equal(v, -v.T) and np.all(np.diag(v) == 0)
        assert np.all(np.abs(v) <= 2)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=8), st.integers(1, 10**6))
    def test_ipw_antisymmetric(self, scores, rounds):
        v = ipw_ate(scores, rounds).values
        assert np.array_equal(v, -v.T) and np.all(np.diag(v) == 0)


class TestPolicyProperties:
    @given(st.lists(st.floats(-1e8, 1e8), min_size=1, max_size=10), st.floats(0, 10))
    def test_exp3_distribution(self, scores, eps):
        pol = Exp3Tsn(n_arms=len(scores), T=10, T1=0, epsilon=eps)
        pol.scores[:] = scores
        p = pol.distribution()
        assert np.all(p > 0) or eps * (max(scores) - min(scores)) > 700
        assert math.isclose(p.sum(), 1.0, abs_tol=1e-12)

    @given(
        st.lists(st.tuples(st.floats(0, 1), st.integers(1, 500)), min_size=2, max_size=8),
        st.floats(-5, 5),
    )
    def test_ucb_shift_invariance(self, arms, shift):
        means = np.array([m for m, _ in arms])
        counts = np.array([c for _, c in arms])
        picks, values = [], None
        for c in (0.0, shift):
            pol = UcbTsn(n_arms=len(arms), T=10_000, T1=1)
            pol.t, pol.means[:], pol.counts[:] = 1, means + c, counts
            picks.append(pol.choose())
            values = np.sort([pol.ucb_value(s) for s in range(len(arms))])
        if values[-1] - values[-2] > 1e-9:
            assert picks[0] == picks[1]

    @given(st.integers(1, 64), st.integers(0, 200))
    def test_round_robin_coverage(self, n_arms, extra):
        T1 = n_arms + extra
        pol = UcbTsn(n_arms=n_arms, T=T1 + 1, T1=T1)
        for _ in range(T1):
            pol.update(pol.choose(), 0.5)
        assert np.all(pol.counts >= T1 // n_arms)


class TestMetricProperties:
    @given(st.lists(st.floats(0, 10), min_size=1, max_size=50))
    def test_regret_prefixes(self, inc):
        totals = [cumulative_regret(RunTrace(np.zeros(m, dtype=np.int64), np.zeros(m), np.array(inc[:m]), mean_diff_ate([0, 0]), 0)) for m in range(1, len(inc) + 1)]
        assert totals[0] >= 0 and all(b >= a for a, b in zip(totals, totals[1:]))

    @given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20)), max_size=60))
    def test_pareto_matches_brute(self, pts):
        front = pareto_front(pts)
        assert front == oracles.pareto_brute(pts)
        for p in pts:
            if p not in front:
                assert any(oracles.dominated(p, q) for q in front)

    @given(st.floats(-3, 3), st.floats(0.1, 10))
    def test_loglog_exact_power(self, exponent, scale):
        xs = [2.0, 8.0, 32.0, 128.0]
        slope, _, _ = loglog_slope(xs, [scale * x**exponent for x in xs])
        assert abs(slope - exponent) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["ucb_tsn", "exp3_tsn", "uniform", "ucb", "exp3"]),
    st.sampled_from(["gaussian", "bernoulli", "rademacher"]),
    st.integers(0, 2**63),
    st.integers(5, 120),
)
def test_kernel_reference_agree(name, noise_kind, seed, T):
    if name.startswith("exp3") and noise_kind != "bernoulli":
        return
    H = build_adjacency(3, [])
    c = Clustering([0, 1, 1])
    spec = ExposureMapSpec("per_unit")
    space = enumerate_exposure_space(spec, H, c, 2)
    inst = Instance(DenseTable.random(3, 2, np.random.default_rng(seed % 1000)), NoiseModel(noise_kind, 0.7), H, c, 2)
    world = compile_world(inst, space, compute_report(inst, space))
    policy = PolicySpec(name, T, T1=None if name != "ucb_tsn" else min(T, 4 + seed % 7))
    a = run_compiled(world, policy, replication_rng(seed), seed)
    b = run_reference(world, policy, replication_rng(seed), seed)
    assert np.array_equal(a.arms, b.arms) and np.array_equal(a.rewards, b.rewards)
    assert np.array_equal(a.estimate.values, b.estimate.values, equal_nan=True)
