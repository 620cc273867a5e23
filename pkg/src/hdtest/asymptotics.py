"""Closed-form limit theory for the permuted statistic.

Provides the polynomial scaling f(w) of the permuted-statistic mean, the
per-class limiting mean and variance (mu_{n,w}, sigma^2_{n,w}), the exact
hypergeometric law of the class index W, the medium-sample-size variance,
the Gaussian-mixture cdf of the randomized statistic, and a Monte Carlo
estimate of the limiting power of the permutation test in the fixed-sample
regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import norm

from .kernels import KernelSpec, phi, phi_prime
from .permutation import PermutationPlan, exact_masks, sample_masks, s_w_cardinality
from .statistic import masked_statistics


@dataclass(frozen=True)
class MomentConstants:
    """Limiting means of the averaged coordinate distance within/across
    groups and limiting variances of its double-centered version."""

    e_x: float
    e_y: float
    e_xy: float
    v_x: float
    v_y: float
    v_xy: float

    def __post_init__(self):
        if min(self.v_x, self.v_y, self.v_xy) < 0:
            raise ValueError("variances must be nonnegative")


def _check_w(n: int, m: int, w) -> None:
    if n < 2 or m < 2:
        raise ValueError("need n, m >= 2")
    if not 0 <= w <= min(n, m):
        raise ValueError(f"w={w} outside 0..min(n, m)")


def f_w_frac(n: int, m: int, w: int) -> Fraction:
    """Exact rational value of the mean-scaling polynomial f(w)."""
    _check_w(n, m, w)
    lin = Fraction(2 * m - 1, m * (m - 1)) + Fraction(2 * n - 1, n * (n - 1))
    quad = Fraction(2, m * n) + Fraction(1, n * (n - 1)) + Fraction(1, m * (m - 1))
    return 1 - lin * w + quad * w * w


def f_w(n: int, m: int, w: int) -> float:
    """Second-order polynomial in w scaling the permuted-statistic mean;
    f(0) = 1 and f is maximal at w = 0."""
    return float(f_w_frac(n, m, w))


def mean_gap(c: MomentConstants, spec: KernelSpec) -> float:
    """2 phi(e_xy) - phi(e_x) - phi(e_y), the unpermuted limiting mean."""
    return 2.0 * phi(spec, c.e_xy) - phi(spec, c.e_x) - phi(spec, c.e_y)


def mu_nw(n: int, m: int, w: int, c: MomentConstants, spec: KernelSpec) -> float:
    """Limiting mean of the statistic under a permutation of class w."""
    return mean_gap(c, spec) * f_w(n, m, w)


def sigma2_nw(n: int, m: int, w: int, c: MomentConstants, spec: KernelSpec) -> float:
    """Limiting variance of the (sqrt(p)-scaled) statistic for class w."""
    _check_w(n, m, w)
    n2 = n * n * (n - 1) * (n - 1)
    m2 = m * m * (m - 1) * (m - 1)
    nm2 = n * n * m * m

    gxy = phi_prime(spec, c.e_xy)
    gx = phi_prime(spec, c.e_x)
    gy = phi_prime(spec, c.e_y)

    coef_xy = (
        4.0 / (n * m)
        - 4.0 * ((n + m) / nm2 - n / n2 - m / m2) * w
        + 4.0 * (2.0 / nm2 - 1.0 / n2 - 1.0 / m2) * w * w
    )
    coef_x = (
        2.0 / (n * (n - 1))
        + 2.0 * (2.0 * n / nm2 - (2 * n - 1) / n2 - 1.0 / m2) * w
        - 2.0 * (2.0 / nm2 - 1.0 / n2 - 1.0 / m2) * w * w
    )
    coef_y = (
        2.0 / (m * (m - 1))
        + 2.0 * (2.0 * m / nm2 - 1.0 / n2 - (2 * m - 1) / m2) * w
        - 2.0 * (2.0 / nm2 - 1.0 / m2 - 1.0 / n2) * w * w
    )
    out = coef_xy * c.v_xy * gxy**2 + coef_x * c.v_x * gx**2 + coef_y * c.v_y * gy**2
    if out < -1e-12:
        raise ArithmeticError(f"variance formula produced {out} < 0")
    return max(out, 0.0)


@dataclass(frozen=True)
class HypergeometricLaw:
    """Law of W = N(Gamma) for a uniformly random permutation."""

    n: int
    m: int

    @property
    def support(self) -> range:
        return range(min(self.n, self.m) + 1)


def hypergeom_pmf(law: HypergeometricLaw, w: int) -> Fraction:
    """P(W = w) = C(m, w) C(n, n-w) / C(n+m, n), exact; 0 off support."""
    n, m = law.n, law.m
    if not 0 <= w <= min(n, m):
        return Fraction(0)
    return Fraction(math.comb(m, w) * math.comb(n, n - w), math.comb(n + m, n))


def sigma2_hdmss(rho: float, c: MomentConstants, spec: KernelSpec) -> float:
    """Limiting variance of sqrt(nmp) times the randomized statistic when
    both sample sizes grow with n/m -> rho."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    gxy = phi_prime(spec, c.e_xy)
    gx = phi_prime(spec, c.e_x)
    gy = phi_prime(spec, c.e_y)
    return (
        4.0 * c.v_xy * gxy**2
        + 2.0 * rho * c.v_x * gx**2
        + 2.0 / rho * c.v_y * gy**2
    )


def mixture_normal_cdf(a: float, n: int, m: int, c: MomentConstants, spec: KernelSpec) -> float:
    """cdf of the Gaussian mixture over the hypergeometric class index.

    Zero-variance components contribute a point mass at 0, i.e. an
    indicator of a >= 0.
    """
    law = HypergeometricLaw(n, m)
    out = 0.0
    for w in law.support:
        pw = float(hypergeom_pmf(law, w))
        s2 = sigma2_nw(n, m, w, c, spec)
        if s2 == 0.0:
            out += pw * (1.0 if a >= 0 else 0.0)
        else:
            out += pw * norm.cdf(a / math.sqrt(s2))
    return out


@dataclass(frozen=True)
class GaussianProcessSpec:
    """Variances of the independent mean-zero Gaussian families that the
    double-centered pair contributions converge to."""

    n: int
    m: int
    v_xy: float
    v_x: float
    v_y: float

    def __post_init__(self):
        if min(self.v_x, self.v_y, self.v_xy) < 0:
            raise ValueError("variances must be nonnegative")


def _gaussian_pair_matrix(gp: GaussianProcessSpec, rng: np.random.Generator) -> np.ndarray:
    """Symmetric matrix of limiting pair contributions: cross block i.i.d.
    N(0, v_xy), within-X block N(0, v_x), within-Y block N(0, v_y)."""
    n, m = gp.n, gp.m
    total = n + m
    g = np.zeros((total, total))
    b = rng.normal(scale=math.sqrt(gp.v_xy), size=(n, m)) if gp.v_xy > 0 else np.zeros((n, m))
    g[:n, n:] = b
    g[n:, :n] = b.T
    for (lo, hi, v) in ((0, n, gp.v_x), (n, total, gp.v_y)):
        k = hi - lo
        iu = np.triu_indices(k, 1)
        block = np.zeros((k, k))
        if v > 0:
            vals = rng.normal(scale=math.sqrt(v), size=iu[0].size)
            block[iu] = vals
            block += block.T
        g[lo:hi, lo:hi] = block
    return g


def power_limit_mc(
    gp: GaussianProcessSpec,
    alpha: float,
    plan: PermutationPlan,
    draws: int,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo estimate of the limiting rejection probability.

    Each draw samples the Gaussian pair matrix, evaluates the limit process
    over the identity and the plan's permutations, and rejects when the
    identity value strictly exceeds the (1-alpha) randomization quantile.
    Returns (estimate, standard error).
    """
    if draws < 1000:
        raise ValueError("need at least 1000 draws")
    n, m = gp.n, gp.m
    if plan.mode == "exact":
        masks, mult = exact_masks(n, m)
        total = math.factorial(n + m)
    else:
        masks, mult = sample_masks(n, m, plan.count, plan.seed), 1
        total = plan.count
    need = total - math.floor(alpha * total)

    rng = np.random.default_rng(seed)
    identity = np.zeros(n + m, dtype=bool)
    identity[:n] = True
    id_row = int(np.flatnonzero((masks == identity).all(axis=1))[0])

    rejections = 0
    for _ in range(draws):
        g = _gaussian_pair_matrix(gp, rng)
        stats = masked_statistics(g, n, m, masks)
        order = np.argsort(stats, kind="stable")
        cum = np.arange(1, stats.size + 1) * mult
        idx = int(np.searchsorted(cum, need, side="left"))
        crit = stats[order][idx]
        if stats[id_row] > crit:
            rejections += 1
    rate = rejections / draws
    se = math.sqrt(rate * (1.0 - rate) / draws)
    return rate, se
