"""Doubling constants for p-valent functions on disks and balls.

Builds the classical Eulerian triangle exactly (arbitrary-precision
integers), the negative-order polylog closed form, and the constant

    c_p(alpha, beta) = ((p+1) alpha^p + A'_p / (1-alpha)^(2p+1)) / beta^p

bounding max|f| on alpha*D against max|f| on beta*D for p-valent f, plus
its non-concentric composition c_p(1/4,1/8) * c_p(1/2, rho/4) = c_p / rho^p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def eulerian_row(n: int) -> tuple[int, ...]:
    """Row n of the Eulerian triangle: counts of n-permutations by descents.

    Row 0 is (1,) (the empty permutation); row n has entries k = 0..n-1
    for n >= 1 and sums to n!.
    """
    if n < 0:
        raise ValueError("row index must be non-negative")
    if n == 0:
        return (1,)
    if n == 1:
        return (1,)
    prev = eulerian_row(n - 1)

    def get(k: int) -> int:
        return prev[k] if 0 <= k < len(prev) else 0

    return tuple((n - k) * get(k - 1) + (k + 1) * get(k) for k in range(n))


def eulerian(n: int, k: int) -> int:
    """Eulerian number: permutations of {1..n} with exactly k descents."""
    if n < 1:
        raise ValueError("need n >= 1")
    if not 0 <= k <= n - 1:
        raise ValueError(f"k={k} out of range for row n={n}")
    return eulerian_row(n)[k]


def polylog_neg(n: int, z: complex) -> complex:
    """Li_{-n}(z) = sum_k k^n z^k for |z| < 1, via the Eulerian closed form."""
    if n < 1:
        raise ValueError("need n >= 1")
    z = complex(z)
    if abs(z) >= 1:
        raise ValueError("|z| must be < 1")
    row = eulerian_row(n)
    acc = 0j
    zk = 1.0 + 0j
    for k in range(1, n + 1):
        zk *= z
        acc += row[k - 1] * zk
    return acc / (1 - z) ** (n + 1)


def tail_sum(p: int, alpha: float) -> float:
    """sum_{k>p} k^(2p-1) alpha^k = Li_{1-2p}(alpha) - sum_{k<=p} k^(2p-1) alpha^k."""
    if p < 1:
        raise ValueError("need p >= 1")
    if not 0 < alpha < 1:
        raise ValueError("need 0 < alpha < 1")
    head = sum(k ** (2 * p - 1) * alpha**k for k in range(1, p + 1))
    return float(polylog_neg(2 * p - 1, alpha).real - head)


@dataclass(frozen=True)
class DoublingParams:
    """Valency p with the coefficient-growth constants feeding c_p.

    A_p = 1 matches the classical univalent bound |a_k| <= k |a_1| at p = 1
    and is a documented placeholder for p >= 2 (override if sharper values
    are available; everything downstream is monotone in it).  A'_p defaults
    to A_p times the largest entry of Eulerian row 2p-2.
    """

    p: int
    A_p: float = 1.0
    A_prime: float = field(default=0.0)
    tol: float = 1e-12

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("valency p must be >= 1")
        if self.A_p < 1.0:
            raise ValueError("A_p must be >= 1")
        if self.A_prime <= 0.0:
            derived = self.A_p * max(eulerian_row(2 * self.p - 2))
            object.__setattr__(self, "A_prime", float(derived))


def cp_constant(params: DoublingParams, alpha: float, beta: float) -> float:
    """The concentric-disk doubling constant c_p(alpha, beta)."""
    if not 0 < beta < alpha < 1:
        raise ValueError("need 0 < beta < alpha < 1")
    p = params.p
    return ((p + 1) * alpha**p + params.A_prime / (1 - alpha) ** (2 * p + 1)) / beta**p


def nonconcentric_constant(params: DoublingParams, rho: float) -> float:
    """Bound on max|f| over the unit ball against a radius-rho subball,
    for f p-valent on the 4x ball: c_p(1/4,1/8) * c_p(1/2, rho/4).

    Homogeneous of degree -p in rho, so this equals
    nonconcentric_constant(params, 1) / rho^p.
    """
    if not 0 < rho <= 1:
        raise ValueError("need 0 < rho <= 1")
    return cp_constant(params, 0.25, 0.125) * cp_constant(params, 0.5, rho / 4.0)


def log_nonconcentric_base(params: DoublingParams) -> float:
    """log of the rho-independent constant in nonconcentric_constant = c_p/rho^p."""
    return math.log(nonconcentric_constant(params, 1.0))


def bezout_valency(d: int, d1: int) -> int:
    """Root count d*d1 for a degree-d1 polynomial on line sections of a
    degree-d hypersurface; constants are trivially 1-valent."""
    if d < 1:
        raise ValueError("need d >= 1")
    if d1 < 0:
        raise ValueError("need d1 >= 0")
    return max(1, d * d1)


def concentric_dc_check(f, p: int, alpha: float, beta: float,
                        params: DoublingParams | None = None,
                        samples: int = 720) -> float:
    """Measured doubling constant max_{alpha D}|f| / max_{beta D}|f|.

    f is evaluated on dense boundary circles (maximum principle).  The
    result must not exceed cp_constant for genuinely p-valent f.
    """
    if not 0 < beta < alpha < 1:
        raise ValueError("need 0 < beta < alpha < 1")
    theta = np.linspace(0.0, 2 * math.pi, samples, endpoint=False)
    ring = np.exp(1j * theta)
    outer = np.abs(f(alpha * ring)).max()
    inner = np.abs(f(beta * ring)).max()
    if inner == 0:
        raise ValueError("f vanishes identically on the inner circle")
    return float(outer / inner)
