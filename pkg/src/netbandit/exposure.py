"""Exposure mappings and the cluster-switchback exposure arm space.

An exposure mapping compresses a super arm ``A`` (one of ``K`` arms per unit)
into one low-cardinality label per unit. A vector of labels is an *exposure
super arm* (a "profile" here, stored as a tuple). The policies act on the
space of profiles that are constant within every cluster and realizable by
at least one super arm.

Proportion labels are exact ``Fraction`` values so that deduplication never
depends on float rounding. Per-unit and threshold labels are plain ints.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .network import AdjacencyMatrix, Clustering, neighbor_weight_sum

PER_UNIT = "per_unit"
GLOBAL_PROPORTION = "global_proportion"
NEIGHBORHOOD_THRESHOLD = "neighborhood_threshold"
CLUSTER_PROPORTION = "cluster_proportion"
VARIANTS = (PER_UNIT, GLOBAL_PROPORTION, NEIGHBORHOOD_THRESHOLD, CLUSTER_PROPORTION)

DEFAULT_BUDGET = 2**20

Label = int | Fraction
Profile = tuple  # tuple[Label, ...], one label per unit
SuperArm = tuple  # tuple[int, ...], one arm per unit


class EnumerationBudgetError(ValueError):
    """Raised when a brute-force enumeration would exceed the budget."""


def parse_label(value) -> Label:
    """Parse a label from config JSON: ints stay ints, "p/q" strings and floats become fractions."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("boolean is not a valid exposure label")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        f = Fraction(value)
        return int(f) if f.denominator == 1 else f
    if isinstance(value, float):
        f = Fraction(value).limit_denominator(10**6)
        return int(f) if f.denominator == 1 else f
    raise ValueError(f"cannot parse exposure label {value!r}")


def format_label(label: Label):
    """JSON form of a label: ints as ints, non-integral fractions as "p/q"."""
    if isinstance(label, Fraction) and label.denominator != 1:
        return f"{label.numerator}/{label.denominator}"
    return int(label)


@dataclass(frozen=True)
class ExposureMapSpec:
    variant: str
    threshold: float | None = None
    restrict_labels: tuple | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown exposure mapping {self.variant!r}; expected one of {VARIANTS}")
        if self.variant == NEIGHBORHOOD_THRESHOLD:
            if self.threshold is None or not (0 < self.threshold <= 1):
                raise ValueError("neighborhood_threshold needs a threshold in (0, 1]")
        if self.restrict_labels is not None:
            labels = tuple(parse_label(v) for v in self.restrict_labels)
            object.__setattr__(self, "restrict_labels", labels)

    @classmethod
    def from_json(cls, data: dict) -> "ExposureMapSpec":
        restrict = data.get("restrict_labels")
        return cls(
            variant=data["variant"],
            threshold=data.get("threshold"),
            restrict_labels=tuple(restrict) if restrict is not None else None,
        )

    def to_json(self) -> dict:
        out: dict = {"variant": self.variant}
        if self.threshold is not None:
            out["threshold"] = self.threshold
        if self.restrict_labels is not None:
            out["restrict_labels"] = [format_label(v) for v in self.restrict_labels]
        return out

    def codomain(self, k: int, clustering: Clustering) -> tuple:
        """Ordered label set U_s."""
        if self.variant == PER_UNIT:
            return tuple(range(k))
        if self.variant == NEIGHBORHOOD_THRESHOLD:
            return (0, 1)
        if self.variant == GLOBAL_PROPORTION:
            n = clustering.n
            return tuple(_frac(c, n) for c in range(n + 1))
        sizes = set(clustering.sizes())
        return tuple(sorted({_frac(c, m) for m in sizes for c in range(m + 1)}))

    def is_one_to_one(self, clustering: Clustering) -> bool:
        """True when every realizable profile has exactly one compatible super arm."""
        if self.variant == PER_UNIT:
            return True
        if self.variant == GLOBAL_PROPORTION:
            return clustering.n == 1
        if self.variant == CLUSTER_PROPORTION:
            return all(m == 1 for m in clustering.sizes())
        return False


def _frac(num: int, den: int) -> Label:
    f = Fraction(num, den)
    return int(f) if f.denominator == 1 else f


def _check_binary(spec: ExposureMapSpec, k: int) -> None:
    if spec.variant != PER_UNIT and k != 2:
        raise ValueError(f"{spec.variant} mapping is defined for binary treatments (K=2), got K={k}")


def apply(spec: ExposureMapSpec, i: int, A: Sequence[int], H: AdjacencyMatrix, clustering: Clustering) -> Label:
    """Exposure label of unit ``i`` under super arm ``A``."""
    n = len(A)
    if n != H.n or n != clustering.n:
        raise ValueError(f"dimension mismatch: |A|={n}, network n={H.n}, clustering n={clustering.n}")
    if not 0 <= i < n:
        raise IndexError(f"unit {i} out of range for n={n}")
    if spec.variant == PER_UNIT:
        return int(A[i])
    if spec.variant == GLOBAL_PROPORTION:
        return _frac(int(sum(A)), n)
    if spec.variant == CLUSTER_PROPORTION:
        q = clustering.assignment[i]
        members = [j for j in range(n) if clustering.assignment[j] == q]
        return _frac(sum(int(A[j]) for j in members), len(members))
    total = neighbor_weight_sum(H, i)
    if total <= 0:
        raise ValueError(f"unit {i} has no neighbors; neighborhood_threshold requires positive neighbor weight")
    share = float(np.dot(H.weights[i], np.asarray(A, dtype=float))) / total
    return int(share < spec.threshold)


def exposure_profile(spec: ExposureMapSpec, A: Sequence[int], H: AdjacencyMatrix, clustering: Clustering) -> Profile:
    """Exposure super arm induced by ``A`` (labels for every unit)."""
    A = tuple(int(a) for a in A)
    n = len(A)
    if n != H.n or n != clustering.n:
        raise ValueError(f"dimension mismatch: |A|={n}, network n={H.n}, clustering n={clustering.n}")
    if spec.variant == PER_UNIT:
        return A
    if spec.variant == GLOBAL_PROPORTION:
        label = _frac(sum(A), n)
        return (label,) * n
    if spec.variant == CLUSTER_PROPORTION:
        sizes = clustering.sizes()
        counts = [0] * clustering.num_clusters
        for a, q in zip(A, clustering.assignment):
            counts[q] += a
        return tuple(_frac(counts[q], sizes[q]) for q in clustering.assignment)
    totals = H.weights.sum(axis=1)
    if np.any(totals <= 0):
        bad = int(np.flatnonzero(totals <= 0)[0])
        raise ValueError(f"unit {bad} has no neighbors; neighborhood_threshold requires positive neighbor weight")
    shares = H.weights @ np.asarray(A, dtype=float) / totals
    return tuple(int(s < spec.threshold) for s in shares)


def is_cluster_constant(profile: Profile, clustering: Clustering) -> bool:
    first: dict[int, Label] = {}
    for label, q in zip(profile, clustering.assignment):
        if first.setdefault(q, label) != label:
            return False
    return True


def all_super_arms(n: int, k: int, budget: int = DEFAULT_BUDGET) -> Iterable[SuperArm]:
    if k**n > budget:
        raise EnumerationBudgetError(f"K^N = {k}^{n} exceeds enumeration budget {budget}")
    return itertools.product(range(k), repeat=n)


@dataclass(frozen=True, eq=False)
class ExposureArmSpace:
    """The ordered decision space U_E with its compatibility context.

    ``arms[s]`` is the profile with index ``s``; the order is lexicographic in
    the labels, so indices are reproducible.
    """

    spec: ExposureMapSpec
    network: AdjacencyMatrix
    clustering: Clustering
    k: int
    arms: tuple
    budget: int = DEFAULT_BUDGET
    index: dict = field(default_factory=dict, repr=False)
    _groups: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.index:
            object.__setattr__(self, "index", {a: s for s, a in enumerate(self.arms)})

    def __len__(self) -> int:
        return len(self.arms)

    @property
    def n(self) -> int:
        return self.clustering.n

    def position(self, profile: Sequence) -> int:
        key = tuple(profile)
        if key not in self.index:
            raise ValueError(f"profile {key} is not in the exposure arm space")
        return self.index[key]

    def profile(self, A: Sequence[int]) -> Profile:
        return exposure_profile(self.spec, A, self.network, self.clustering)

    def count_compatible(self, S: Profile) -> int:
        S = tuple(S)
        self._check_member(S)
        v = self.spec.variant
        if v == PER_UNIT:
            return 1
        if v == GLOBAL_PROPORTION:
            return math.comb(self.n, int(S[0] * self.n))
        if v == CLUSTER_PROPORTION:
            out = 1
            for members in self.clustering.clusters():
                m = len(members)
                out *= math.comb(m, int(S[members[0]] * m))
            return out
        return len(self._brute_groups()[S])

    def compatible(self, S: Profile) -> list[SuperArm]:
        """All super arms whose exposure profile equals ``S``, sorted."""
        S = tuple(S)
        self._check_member(S)
        v = self.spec.variant
        if v == PER_UNIT:
            return [tuple(int(x) for x in S)]
        if v == NEIGHBORHOOD_THRESHOLD:
            return list(self._brute_groups()[S])
        size = self.count_compatible(S)
        if size > self.budget:
            raise EnumerationBudgetError(f"compatible set of size {size} exceeds budget {self.budget}")
        if v == GLOBAL_PROPORTION:
            n = self.n
            c = int(S[0] * n)
            out = []
            for treated in itertools.combinations(range(n), c):
                A = [0] * n
                for j in treated:
                    A[j] = 1
                out.append(tuple(A))
            return sorted(out)
        per_cluster = []
        for members in self.clustering.clusters():
            m = len(members)
            per_cluster.append((members, list(itertools.combinations(members, int(S[members[0]] * m)))))
        out = []
        for choice in itertools.product(*(c for _, c in per_cluster)):
            A = [0] * self.n
            for treated in choice:
                for j in treated:
                    A[j] = 1
            out.append(tuple(A))
        return sorted(out)

    def sample(self, S: Profile, rng: np.random.Generator, size: int | None = None):
        """Uniform draw(s) from the compatible set of ``S``.

        Returns a tuple for ``size=None``, else an int array of shape ``(size, N)``.
        """
        S = tuple(S)
        self._check_member(S)
        m = 1 if size is None else size
        n = self.n
        v = self.spec.variant
        if v == PER_UNIT:
            out = np.tile(np.asarray(S, dtype=np.int64), (m, 1))
        elif v == NEIGHBORHOOD_THRESHOLD:
            group = self._brute_groups()[S]
            out = np.asarray(group, dtype=np.int64)[rng.integers(len(group), size=m)]
        else:
            out = np.zeros((m, n), dtype=np.int64)
            blocks = [tuple(range(n))] if v == GLOBAL_PROPORTION else self.clustering.clusters()
            for members in blocks:
                members = np.asarray(members)
                c = int(S[members[0]] * len(members))
                if c == 0:
                    continue
                # a uniformly random permutation per row; its first c entries are a uniform c-subset
                order = np.argsort(rng.random((m, len(members))), axis=1)[:, :c]
                rows = np.repeat(np.arange(m), c)
                out[rows, members[order].ravel()] = 1
        if size is None:
            return tuple(int(x) for x in out[0])
        return out

    def _check_member(self, S: Profile) -> None:
        if S not in self.index:
            raise ValueError(f"profile {S} is not in the exposure arm space")

    def _brute_groups(self) -> dict:
        if self._groups is None:
            object.__setattr__(self, "_groups", _group_by_profile(self.spec, self.network, self.clustering, self.k, self.budget))
        return self._groups


def _group_by_profile(spec, H, clustering, k, budget) -> dict:
    groups: dict = {}
    for A in all_super_arms(clustering.n, k, budget):
        groups.setdefault(exposure_profile(spec, A, H, clustering), []).append(A)
    return groups


def _analytic_realizable(spec: ExposureMapSpec, clustering: Clustering, k: int) -> list[Profile]:
    """Realizable profiles (U_O) for the variants with closed-form structure."""
    n = clustering.n
    if spec.variant == PER_UNIT:
        return [tuple(p) for p in itertools.product(range(k), repeat=n)]
    if spec.variant == GLOBAL_PROPORTION:
        return [(_frac(c, n),) * n for c in range(n + 1)]
    clusters = clustering.clusters()
    out = []
    for counts in itertools.product(*(range(len(m) + 1) for m in clusters)):
        labels = [_frac(c, len(m)) for c, m in zip(counts, clusters)]
        out.append(tuple(labels[q] for q in clustering.assignment))
    return out


def _analytic_switchback(spec: ExposureMapSpec, clustering: Clustering, k: int) -> list[Profile]:
    """U_C intersected with U_O without touching K^N."""
    if spec.variant == PER_UNIT:
        return [
            tuple(choice[q] for q in clustering.assignment)
            for choice in itertools.product(range(k), repeat=clustering.num_clusters)
        ]
    if spec.variant == GLOBAL_PROPORTION:
        # every realizable profile is globally constant, hence cluster-constant
        return _analytic_realizable(spec, clustering, k)
    # cluster proportions are constant within clusters by construction
    return _analytic_realizable(spec, clustering, k)


def space_sizes(spec: ExposureMapSpec, H: AdjacencyMatrix, clustering: Clustering, k: int, budget: int = DEFAULT_BUDGET) -> dict:
    """|U_C|, |U_O| before any manual restriction."""
    _check_binary(spec, k)
    d_s = len(spec.codomain(k, clustering))
    u_c = d_s**clustering.num_clusters
    if spec.variant == PER_UNIT:
        u_o = k**clustering.n
    elif spec.variant == GLOBAL_PROPORTION:
        u_o = clustering.n + 1
    elif spec.variant == CLUSTER_PROPORTION:
        u_o = math.prod(m + 1 for m in clustering.sizes())
    else:
        u_o = len(_group_by_profile(spec, H, clustering, k, budget))
    return {"U_C": u_c, "U_O": u_o}


def enumerate_exposure_space(
    spec: ExposureMapSpec,
    H: AdjacencyMatrix,
    clustering: Clustering,
    k: int,
    budget: int = DEFAULT_BUDGET,
    restriction: Iterable | None = None,
) -> ExposureArmSpace:
    """Enumerate U_E = U_C intersected with U_O, lexicographically ordered.

    ``restriction`` (or ``spec.restrict_labels`` when omitted) keeps only the
    profiles whose labels all lie in the given set.
    """
    if H.n != clustering.n:
        raise ValueError(f"network has {H.n} units but clustering has {clustering.n}")
    if k < 2:
        raise ValueError(f"need at least two arms, got K={k}")
    _check_binary(spec, k)
    groups = None
    if spec.variant == NEIGHBORHOOD_THRESHOLD:
        groups = _group_by_profile(spec, H, clustering, k, budget)
        arms = [p for p in groups if is_cluster_constant(p, clustering)]
    else:
        arms = _analytic_switchback(spec, clustering, k)
    labels = spec.restrict_labels if restriction is None else tuple(parse_label(v) for v in restriction)
    if labels is not None:
        allowed = set(labels)
        arms = [p for p in arms if all(x in allowed for x in p)]
    arms = sorted(set(arms))
    if len(arms) < 2:
        raise ValueError(f"exposure arm space has {len(arms)} element(s); at least 2 are required")
    return ExposureArmSpace(spec=spec, network=H, clustering=clustering, k=k, arms=tuple(arms), budget=budget, _groups=groups)


def compatible_super_arms(space: ExposureArmSpace, S: Profile) -> list[SuperArm]:
    return space.compatible(S)


def sample_compatible(space: ExposureArmSpace, S: Profile, rng: np.random.Generator, size: int | None = None):
    return space.sample(S, rng, size)
