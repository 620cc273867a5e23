"""Dissimilarity metrics of the form k(x, y) = phi((1/p) * sum_u psi(x_u, y_u)).

Four families are supported:

========== ================ =========================
family     psi(a, b)        phi(t)
========== ================ =========================
l2         (a - b)^2        sqrt(t)
gaussian   (a - b)^2        -exp(-t / (2 gamma^2))
laplacian  (a - b)^2        -exp(-sqrt(t) / gamma)
l1         |a - b|          t
========== ================ =========================

The Gaussian and Laplacian kernels are stored pre-negated so that phi is
strictly increasing for every family and a larger statistic always means a
larger discrepancy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("l2", "l1", "gaussian", "laplacian")

#: families whose per-coordinate distance is the squared difference
_SQUARED_PSI = ("l2", "gaussian", "laplacian")


@dataclass(frozen=True)
class KernelSpec:
    """Immutable choice of kernel family plus bandwidth.

    The bandwidth ``gamma`` is only used by the Gaussian and Laplacian
    families and defaults to 1.
    """

    family: str
    gamma: float = field(default=1.0)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown kernel family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.family in ("gaussian", "laplacian") and not self.gamma > 0:
            raise ValueError(f"bandwidth must be positive, got {self.gamma}")

    @property
    def uses_squared_differences(self) -> bool:
        return self.family in _SQUARED_PSI


def psi_bar(x, y, spec: KernelSpec) -> float:
    """Average per-coordinate distance (1/p) * sum_u psi(x_u, y_u)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"inputs must be 1-d vectors of equal length, got {x.shape} and {y.shape}")
    if x.size == 0:
        raise ValueError("dimension must be at least 1")
    d = x - y
    if spec.uses_squared_differences:
        return float(np.mean(d * d))
    return float(np.mean(np.abs(d)))


def phi(spec: KernelSpec, t):
    """Outer transform applied to the averaged distance; works elementwise."""
    t = np.asarray(t, dtype=float)
    if spec.family == "l2":
        out = np.sqrt(t)
    elif spec.family == "l1":
        out = t.copy()
    elif spec.family == "gaussian":
        out = -np.exp(-t / (2.0 * spec.gamma**2))
    else:  # laplacian
        out = -np.exp(-np.sqrt(t) / spec.gamma)
    if out.ndim == 0:
        return float(out)
    return out


def kernel_eval(x, y, spec: KernelSpec) -> float:
    """Evaluate k(x, y) = phi(psi_bar(x, y))."""
    return phi(spec, psi_bar(x, y, spec))


def phi_prime(spec: KernelSpec, t: float) -> float:
    """First derivative of phi at t.

    For the l2 and laplacian families the derivative is singular at 0, so
    t must be strictly positive there.
    """
    if spec.family == "l2":
        if t <= 0:
            raise ValueError("phi' for l2 requires t > 0")
        return 1.0 / (2.0 * math.sqrt(t))
    if spec.family == "l1":
        return 1.0
    if spec.family == "gaussian":
        g2 = spec.gamma**2
        return math.exp(-t / (2.0 * g2)) / (2.0 * g2)
    # laplacian
    if t <= 0:
        raise ValueError("phi' for laplacian requires t > 0")
    rt = math.sqrt(t)
    return math.exp(-rt / spec.gamma) / (2.0 * spec.gamma * rt)
