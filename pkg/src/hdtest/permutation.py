"""Permutation calibration: randomization distribution, quantiles, decision.

Two modes are supported. Exact enumeration walks every permutation of the
pooled rows (feasible because the statistic only depends on which positions
receive an X label, so there are only C(n+m, n) distinct values, each shared
by n!*m! permutations). Monte Carlo draws S-1 uniform permutations and
prepends the identity, which keeps the reported p-value valid and >= 1/S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .kernels import KernelSpec
from .statistic import (
    KernelMatrix,
    LabeledSample,
    build_kernel_matrix,
    masked_statistics,
)

#: refuse exact enumeration beyond 10! total permutations by default
DEFAULT_EXACT_CAP = math.factorial(10)


@dataclass(frozen=True)
class PermutationPlan:
    mode: str = "monte-carlo"  # "exact" or "monte-carlo"
    count: int = 300
    seed: int = 0
    exact_cap: int = DEFAULT_EXACT_CAP

    def __post_init__(self):
        if self.mode not in ("exact", "monte-carlo"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "monte-carlo" and self.count < 1:
            raise ValueError("count must be positive")


@dataclass(frozen=True)
class RandomizationDistribution:
    """Sorted permuted-statistic values with their multiplicities."""

    values: np.ndarray  # sorted ascending, distinct-by-evaluation
    counts: np.ndarray  # multiplicity of each value (all 1 in MC mode)
    total: int
    provenance: str

    def cdf(self, t: float) -> float:
        idx = np.searchsorted(self.values, t, side="right")
        return float(np.cumsum(self.counts)[idx - 1] / self.total) if idx else 0.0

    def tail_count(self, t: float) -> int:
        """Number of permutations with value >= t."""
        idx = np.searchsorted(self.values, t, side="left")
        return int(self.counts[idx:].sum())

    def mean(self) -> float:
        return float(np.dot(self.values, self.counts) / self.total)


@dataclass(frozen=True)
class TestResult:
    statistic: float
    critical_value: float
    p_value: float
    reject: bool
    alpha: float
    plan: PermutationPlan
    w_histogram: dict = field(default_factory=dict)


def n_of_gamma(perm, n: int, m: int) -> int:
    """Number of first-block positions that a permutation sends into the
    second block."""
    perm = np.asarray(perm, dtype=np.intp)
    if perm.shape != (n + m,) or not np.array_equal(np.sort(perm), np.arange(n + m)):
        raise ValueError(f"perm must be a permutation of 0..{n + m - 1}")
    return int(np.count_nonzero(perm[:n] >= n))


def s_w_cardinality(n: int, m: int, w: int) -> int:
    """|S_w| = C(m, w) * C(n, n-w) * n! * m!, exact."""
    if not 0 <= w <= min(n, m):
        raise ValueError(f"w={w} outside 0..min(n, m)")
    return math.comb(m, w) * math.comb(n, n - w) * math.factorial(n) * math.factorial(m)


def exact_masks(n: int, m: int):
    """All distinct group-X masks with the multiplicity each represents.

    Returns (masks, multiplicity): masks is a (C(n+m, n), n+m) boolean array,
    every mask standing for n!*m! concrete permutations.
    """
    total = n + m
    sets = list(combinations(range(total), n))
    masks = np.zeros((len(sets), total), dtype=bool)
    for i, s in enumerate(sets):
        masks[i, list(s)] = True
    return masks, math.factorial(n) * math.factorial(m)


def sample_masks(n: int, m: int, count: int, seed: int) -> np.ndarray:
    """Identity mask plus count-1 masks from uniform random permutations."""
    rng = np.random.default_rng(seed)
    masks = np.zeros((count, n + m), dtype=bool)
    masks[0, :n] = True
    for s in range(1, count):
        masks[s] = rng.permutation(n + m) < n
    return masks


def randomization_distribution(
    km: KernelMatrix, plan: PermutationPlan
) -> RandomizationDistribution:
    n, m = km.n, km.m
    if plan.mode == "exact":
        if math.factorial(n + m) > plan.exact_cap:
            raise ValueError(
                f"exact enumeration needs (n+m)! <= {plan.exact_cap}; "
                "use monte-carlo mode instead"
            )
        masks, mult = exact_masks(n, m)
        stats = masked_statistics(km.values, n, m, masks)
        order = np.argsort(stats, kind="stable")
        return RandomizationDistribution(
            values=stats[order],
            counts=np.full(stats.size, mult, dtype=np.int64),
            total=math.factorial(n + m),
            provenance="exact",
        )
    masks = sample_masks(n, m, plan.count, plan.seed)
    stats = masked_statistics(km.values, n, m, masks)
    stats.sort(kind="stable")
    return RandomizationDistribution(
        values=stats,
        counts=np.ones(stats.size, dtype=np.int64),
        total=plan.count,
        provenance=f"monte-carlo(seed={plan.seed})",
    )


def critical_value(dist: RandomizationDistribution, alpha: float) -> float:
    """Smallest stored value t with cdf(t) >= 1 - alpha."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    if dist.values.size == 0:
        raise ValueError("empty randomization distribution")
    need = dist.total - math.floor(alpha * dist.total)  # ceil((1-alpha)*total)
    cum = np.cumsum(dist.counts)
    idx = int(np.searchsorted(cum, need, side="left"))
    return float(dist.values[idx])


def _w_histogram_exact(n: int, m: int) -> dict:
    return {w: s_w_cardinality(n, m, w) for w in range(min(n, m) + 1)}


def _w_histogram_masks(masks: np.ndarray, n: int) -> dict:
    # w = number of first-block positions not keeping an X label
    w_vals = n - masks[:, :n].sum(axis=1)
    uniq, cnt = np.unique(w_vals, return_counts=True)
    return {int(w): int(c) for w, c in zip(uniq, cnt)}


def permutation_test(
    sample: LabeledSample,
    spec: KernelSpec,
    alpha: float = 0.05,
    plan: PermutationPlan | None = None,
) -> TestResult:
    """Level-alpha permutation test: reject iff the observed statistic
    strictly exceeds the (1-alpha) randomization quantile."""
    if plan is None:
        plan = PermutationPlan()
    km = build_kernel_matrix(sample, spec)
    # evaluate the observed (identity) statistic through the same weighted
    # summation used for the permuted values; a last-ulp mismatch between
    # two summation orders would otherwise break ties at the critical value
    identity = np.zeros(km.n + km.m, dtype=bool)
    identity[: km.n] = True
    stat = float(masked_statistics(km.values, km.n, km.m, identity[None, :])[0])
    dist = randomization_distribution(km, plan)
    crit = critical_value(dist, alpha)
    if plan.mode == "exact":
        hist = _w_histogram_exact(km.n, km.m)
    else:
        hist = _w_histogram_masks(sample_masks(km.n, km.m, plan.count, plan.seed), km.n)
    # the identity permutation is part of the distribution, so the p-value
    # can never fall below 1/total
    p_value = max(dist.tail_count(stat), 1) / dist.total
    return TestResult(
        statistic=stat,
        critical_value=crit,
        p_value=p_value,
        reject=stat > crit,
        alpha=alpha,
        plan=plan,
        w_histogram=hist,
    )
