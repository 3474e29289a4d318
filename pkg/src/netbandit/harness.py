"""Config-driven experiments: validation, seeded replications, grids, outputs."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import CompiledWorld, compile_world, run_compiled
from .environment import DriftSchedule, Instance, NoiseModel, outcome_from_json
from .estimators import AteEstimate, estimation_error
from .exposure import DEFAULT_BUDGET, ExposureArmSpace, ExposureMapSpec, enumerate_exposure_space
from .metrics import AggregateResult, RunTrace, aggregate, cumulative_regret, loglog_slope
from .network import AdjacencyMatrix, Clustering, build_adjacency
from .oracle import OracleReport, compute_report
from .policies import EXP3, EXP3_TSN, UCB_TSN, PolicySpec

log = logging.getLogger(__name__)

CSV_COLUMNS = ["config_id", "seed", "policy", "T", "T1", "U_E", "cumulative_regret", "estimation_error"]


class ConfigError(ValueError):
    """The config cannot be parsed or fails a hard precondition."""


@dataclass(frozen=True)
class Issue:
    level: str  # "error" or "warning"
    message: str

    def __str__(self):
        return f"{self.level}: {self.message}"


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    config_id: str
    network: AdjacencyMatrix
    clustering: Clustering
    k: int
    mapping: ExposureMapSpec
    instance: dict
    policy: PolicySpec
    replications: int = 1
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    oracle: dict = field(default_factory=lambda: {"method": "auto"})
    grid: dict | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_json(cls, data: dict, base_dir: str | Path = ".") -> "ExperimentConfig":
        base = Path(base_dir)
        try:
            if "network_file" in data:
                net_data = json.loads((base / data["network_file"]).read_text())
            else:
                net_data = data["network"]
            network = build_adjacency(int(net_data["n"]), [tuple(e) for e in net_data.get("edges", [])])
            if "clustering_file" in data:
                clustering = Clustering.from_json(json.loads((base / data["clustering_file"]).read_text()))
            elif "clustering" in data:
                clustering = Clustering.from_json(data["clustering"])
            else:
                clustering = Clustering.singletons(network.n)
            return cls(
                config_id=str(data.get("id", "experiment")),
                network=network,
                clustering=clustering,
                k=int(data.get("k", 2)),
                mapping=ExposureMapSpec.from_json(data["mapping"]),
                instance=dict(data.get("instance", {})),
                policy=PolicySpec.from_json(data["policy"]),
                replications=int(data.get("replications", 1)),
                seed=int(data.get("seed", 0)),
                budget=int(data.get("budget", DEFAULT_BUDGET)),
                oracle=dict(data.get("oracle", {"method": "auto"})),
                grid=data.get("grid"),
                raw=data,
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc!r}") from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_json(data, path.parent)

    def with_overrides(self, seed: int | None = None, replications: int | None = None) -> "ExperimentConfig":
        raw = dict(self.raw)
        if seed is not None:
            raw["seed"] = seed
        if replications is not None:
            raw["replications"] = replications
        return ExperimentConfig(
            self.config_id, self.network, self.clustering, self.k, self.mapping, self.instance,
            self.policy, raw.get("replications", self.replications), raw.get("seed", self.seed),
            self.budget, self.oracle, self.grid, raw,
        )

    def fingerprint(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def space(self) -> ExposureArmSpace:
        return enumerate_exposure_space(self.mapping, self.network, self.clustering, self.k, self.budget)

    def grid_points(self) -> list[tuple[int, int | None]]:
        """``(T, T1)`` pairs; ``T1=None`` means the policy default."""
        if not self.grid:
            return [(self.policy.T, self.policy.T1)]
        t_axis = self.grid.get("T")
        t1_axis = self.grid.get("T1")
        if t1_axis is None:
            return [(int(t), self.policy.T1) for t in t_axis]
        if t_axis is None:
            return [(self.policy.T, int(t1)) for t1 in t1_axis]
        if t_axis == "T1":
            return [(int(t1), int(t1)) for t1 in t1_axis]
        return [(int(t), int(t1)) for t in t_axis for t1 in t1_axis]

    def policy_at(self, T: int, T1: int | None) -> PolicySpec:
        return PolicySpec(self.policy.name, T, T1, self.policy.delta, self.policy.bonus_c, self.policy.epsilon)

    def build_instance(self, T: int) -> Instance:
        outcome = outcome_from_json(self.instance.get("outcome", {}), self.mapping, self.network.n, self.k, T)
        return Instance(
            outcome=outcome,
            noise=NoiseModel.from_json(self.instance.get("noise")),
            network=self.network,
            clustering=self.clustering,
            k=self.k,
            drift=DriftSchedule.from_json(self.instance.get("drift")),
        )

    def build_report(self, instance: Instance, space: ExposureArmSpace) -> OracleReport:
        return compute_report(
            instance,
            space,
            method=self.oracle.get("method", "auto"),
            samples=int(self.oracle.get("samples", 100_000)),
            seed=int(self.oracle.get("seed", 0)),
        )


def exp3_horizon_threshold(t: float, n_arms: int) -> float:
    """(2|U_E| + 1)^2 log(t |U_E|^2) / (2 (e - 2) |U_E|)."""
    return (2 * n_arms + 1) ** 2 * math.log(t * n_arms**2) / (2 * (math.e - 2) * n_arms)


def check_point(policy: PolicySpec, n_arms: int, instance: Instance | None = None) -> list[Issue]:
    issues = []
    T = policy.T
    T1 = policy.resolved_t1(n_arms)
    if not 2 <= n_arms <= T:
        issues.append(Issue("error", f"arm count out of range: need 2 <= |U_E| <= T, got |U_E|={n_arms}, T={T}"))
    if T1 > T:
        issues.append(Issue("error", f"T1={T1} exceeds T={T}"))
    if T1 < 0:
        issues.append(Issue("error", f"T1={T1} is negative"))
    if policy.name == UCB_TSN and T1 < n_arms:
        issues.append(Issue("error", f"ucb_tsn needs T1 >= |U_E| for full phase-1 coverage, got T1={T1}, |U_E|={n_arms}"))
    if policy.name in (EXP3_TSN, EXP3):
        if instance is not None and not instance.noise.bounded:
            issues.append(Issue("error", f"{policy.name} needs rewards in [0, 1]; use bernoulli noise or sigma=0"))
        need = exp3_horizon_threshold(T, n_arms)
        if T < need:
            issues.append(Issue("warning", f"T={T} is below the adversarial horizon threshold {need:.1f}"))
        if T1 >= 1:
            need1 = exp3_horizon_threshold(T1, n_arms)
            if T1 < need1:
                issues.append(Issue("warning", f"T1={T1} is below the adversarial horizon threshold {need1:.1f}"))
    return issues


def validate(config: ExperimentConfig) -> list[Issue]:
    """Hard errors and warnings for every grid point of the config."""
    try:
        space = config.space()
    except ValueError as exc:
        return [Issue("error", f"exposure space: {exc}")]
    issues: list[Issue] = []
    if config.replications < 1:
        issues.append(Issue("error", "replications must be at least 1"))
    for T, T1 in config.grid_points():
        try:
            instance = config.build_instance(T)
        except (ValueError, KeyError) as exc:
            issues.append(Issue("error", f"instance at T={T}: {exc}"))
            instance = None
        for issue in check_point(config.policy_at(T, T1), len(space), instance):
            if issue not in issues:
                issues.append(issue)
    return issues


# --------------------------------------------------------------------------
# replications
# --------------------------------------------------------------------------


def child_seed(base_seed: int, replication: int) -> int:
    """Deterministic 64-bit seed keyed on (base seed, replication index)."""
    state = np.random.SeedSequence(base_seed, spawn_key=(replication,)).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def replication_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True, eq=False)
class RunResult:
    config_id: str
    replication: int
    seed: int
    policy: str
    T: int
    T1: int
    n_arms: int
    cumulative_regret: float
    estimation_error: float
    estimate: AteEstimate
    fingerprint: str
    wall_time: float
    trace: RunTrace | None = None

    def csv_row(self) -> list:
        return [
            self.config_id, self.seed, self.policy, self.T, self.T1, self.n_arms,
            repr(self.cumulative_regret), repr(self.estimation_error),
        ]

    def to_json(self) -> dict:
        return {
            "config_id": self.config_id,
            "replication": self.replication,
            "seed": self.seed,
            "policy": self.policy,
            "T": self.T,
            "T1": self.T1,
            "U_E": self.n_arms,
            "cumulative_regret": self.cumulative_regret,
            "estimation_error": self.estimation_error,
            "ate": self.estimate.to_triples(),
            "fingerprint": self.fingerprint,
            "wall_time": self.wall_time,
        }


@dataclass(frozen=True, eq=False)
class _Task:
    world: CompiledWorld
    ate_matrix: np.ndarray
    policy: PolicySpec
    base_seed: int
    replications: tuple
    config_id: str
    fingerprint: str
    keep_traces: bool


def _run_task(task: _Task) -> list[RunResult]:
    out = []
    n_arms = task.world.n_arms
    T1 = task.policy.resolved_t1(n_arms)
    for rep in task.replications:
        seed = child_seed(task.base_seed, rep)
        start = time.perf_counter()
        trace = run_compiled(task.world, task.policy, replication_rng(seed), seed)
        out.append(
            RunResult(
                config_id=task.config_id,
                replication=rep,
                seed=seed,
                policy=task.policy.name,
                T=task.policy.T,
                T1=T1,
                n_arms=n_arms,
                cumulative_regret=cumulative_regret(trace),
                estimation_error=estimation_error(trace.estimate, task.ate_matrix),
                estimate=trace.estimate,
                fingerprint=task.fingerprint,
                wall_time=time.perf_counter() - start,
                trace=trace if task.keep_traces else None,
            )
        )
    return out


@dataclass(frozen=True, eq=False)
class PointContext:
    T: int
    T1: int | None
    instance: Instance
    space: ExposureArmSpace
    report: OracleReport
    world: CompiledWorld
    policy: PolicySpec


def prepare_point(config: ExperimentConfig, T: int, T1: int | None, space: ExposureArmSpace | None = None) -> PointContext:
    space = space or config.space()
    policy = config.policy_at(T, T1)
    instance = config.build_instance(T)
    errors = [i for i in check_point(policy, len(space), instance) if i.level == "error"]
    if errors:
        raise ConfigError("; ".join(str(e) for e in errors))
    report = config.build_report(instance, space)
    return PointContext(T, T1, instance, space, report, compile_world(instance, space, report), policy)


def run_point(ctx: PointContext, config: ExperimentConfig, workers: int = 1, keep_traces: bool = False) -> tuple[list[RunResult], AggregateResult]:
    reps = list(range(config.replications))
    workers = max(1, min(workers, len(reps)))
    chunks = [tuple(reps[w::workers]) for w in range(workers)]
    tasks = [
        _Task(ctx.world, ctx.report.ate_matrix, ctx.policy, config.seed, chunk, config.config_id, config.fingerprint(), keep_traces)
        for chunk in chunks
    ]
    if workers == 1:
        results = _run_task(tasks[0])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for batch in pool.map(_run_task, tasks) for r in batch]
    results.sort(key=lambda r: r.replication)
    agg = aggregate([r.cumulative_regret for r in results], [r.estimation_error for r in results])
    return results, agg


def run_replicated(config: ExperimentConfig, workers: int = 1, keep_traces: bool = False) -> tuple[list[RunResult], AggregateResult]:
    """Run every replication of the config's single point."""
    T, T1 = config.grid_points()[0]
    ctx = prepare_point(config, T, T1)
    return run_point(ctx, config, workers, keep_traces)


@dataclass
class GridResult:
    points: list  # [(T, T1_resolved, AggregateResult)]
    results: list  # list of RunResult across all points
    slopes: dict

    def to_json(self) -> dict:
        return {
            "points": [{"T": T, "T1": T1, **agg.to_json()} for T, T1, agg in self.points],
            "slopes": self.slopes,
        }


def grid_slopes(points: list) -> dict:
    """Log-log slopes of regret and product against T, and of error against T1."""
    slopes = {}
    Ts = [p[0] for p in points]
    T1s = [p[1] for p in points]
    aggs = [p[2] for p in points]

    def fit(name, xs, ys):
        if len(set(xs)) >= 3 and all(y > 0 for y in ys) and all(math.isfinite(y) for y in ys):
            slope, intercept, r2 = loglog_slope(xs, ys)
            slopes[name] = {"slope": slope, "intercept": intercept, "r2": r2}

    fit("regret_vs_T", Ts, [a.mean_regret for a in aggs])
    fit("product_vs_T", Ts, [a.product for a in aggs])
    fit("error_vs_T1", T1s, [a.mean_error for a in aggs])
    return slopes


def run_grid(config: ExperimentConfig, workers: int = 1, keep_traces: bool = False) -> GridResult:
    space = config.space()
    points, all_results = [], []
    for T, T1 in config.grid_points():
        ctx = prepare_point(config, T, T1, space)
        results, agg = run_point(ctx, config, workers, keep_traces)
        log.info("T=%d T1=%d: regret %.4g error %.4g", T, results[0].T1, agg.mean_regret, agg.mean_error)
        points.append((T, results[0].T1, agg))
        all_results.extend(results)
    return GridResult(points, all_results, grid_slopes(points))


# --------------------------------------------------------------------------
# outputs
# --------------------------------------------------------------------------


def write_outputs(out_dir: str | Path, config: ExperimentConfig, grid: GridResult) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in grid.results:
            writer.writerow(r.csv_row())
    summary = {"config_id": config.config_id, "fingerprint": config.fingerprint(), "policy": config.policy.name, **grid.to_json()}
    (out / "aggregate.json").write_text(json.dumps(summary, indent=2) + "\n")
    with open(out / "replications.jsonl", "w") as fh:
        for r in grid.results:
            fh.write(json.dumps(r.to_json()) + "\n")
    multi = len(grid.points) > 1
    for r in grid.results:
        if r.trace is None:
            continue
        name = f"trace_T{r.T}_T1{r.T1}_{r.replication}.jsonl" if multi else f"trace_{r.replication}.jsonl"
        with open(out / name, "w") as fh:
            for rec in r.trace.records():
                fh.write(json.dumps(rec) + "\n")
