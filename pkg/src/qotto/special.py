"""Special-function kernels used by the population and entropy formulas.

Everything here is plain double precision and deterministic: Laguerre
polynomials by the stable three-term recurrence, the modified Bessel
function I0 by its (all-positive) power series, the hypergeometric family
2F1(1/2, m; 1; z) restricted to z <= 0, and equispaced trapezoidal
quadrature on [0, 2pi], which converges spectrally for smooth periodic
integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureSpec",
    "laguerre",
    "bessel_i0",
    "hyp2f1_half",
    "periodic_quadrature",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Equispaced quadrature rule on [0, 2pi) with `node_count` nodes."""

    node_count: int

    def __post_init__(self):
        if self.node_count < 8:
            raise ValueError(f"node_count must be >= 8, got {self.node_count}")
        if self.node_count % 2 != 0:
            raise ValueError(f"node_count must be even, got {self.node_count}")

    @property
    def nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.node_count) / self.node_count

    @property
    def weight(self) -> float:
        return 2.0 * np.pi / self.node_count


def laguerre(n: int, x):
    """Laguerre polynomial L_n(x).

    Uses the forward recurrence (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1},
    which is stable in the argument range this package needs (the series
    form cancels badly for large x).  `x` may be a float or an ndarray.
    """
    if n < 0:
        raise ValueError(f"order must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    ones = np.ones_like(x)
    if n == 0:
        return ones if ones.ndim else 1.0
    prev = ones
    cur = 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def bessel_i0(z: float) -> float:
    """Modified Bessel function I0(z), even in z and >= 1.

    Power series sum_k (z^2/4)^k / (k!)^2; all terms are positive, so the
    summation is forward stable for any argument that does not overflow.
    """
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"argument must be finite, got {z}")
    q = 0.25 * z * z
    term = 1.0
    total = 1.0
    for k in range(1, 1000):
        term *= q / (k * k)
        total += term
        if term < 1e-17 * total:
            return total
    raise OverflowError(f"I0 series did not converge for z={z}")


def hyp2f1_half(m: int, z: float) -> float:
    """Gauss hypergeometric 2F1(1/2, m; 1; z) for integer m >= 1 and z <= 0.

    Evaluated through the Pfaff transformation

        2F1(1/2, m; 1; z) = (1-z)^(-1/2) 2F1(1/2, 1-m; 1; z/(z-1)),

    whose series terminates after m terms because 1-m is a nonpositive
    integer.  Only the z <= 0 branch is supported; the population formulas
    never leave it.
    """
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    if z > 0:
        raise ValueError(f"only z <= 0 is supported, got {z}")
    if z == 0.0:
        return 1.0
    w = z / (z - 1.0)
    term = 1.0
    total = 1.0
    for k in range(m - 1):
        term *= (0.5 + k) * (1 - m + k) * w / ((1.0 + k) * (1.0 + k))
        total += term
    return total / math.sqrt(1.0 - z)


def periodic_quadrature(f, spec: QuadratureSpec) -> float:
    """Integrate a smooth 2pi-periodic function over one period.

    Returns (2pi/M) * sum_k f(theta_k) on M equispaced nodes.  For a
    trigonometric polynomial of degree < M/2 this is exact to rounding;
    for analytic periodic integrands it converges spectrally.  `f` should
    accept an ndarray of angles (a scalar-only callable also works).
    """
    nodes = spec.nodes
    vals = np.asarray(f(nodes), dtype=float)
    if vals.shape != nodes.shape:
        vals = np.fromiter((float(f(t)) for t in nodes), dtype=float, count=len(nodes))
    return float(spec.weight * vals.sum())
