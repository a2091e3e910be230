"""Closed-form evaluators for the reflected walk and its running maximum.

Generating functions in ``lam`` are written through the root

    theta = (1 - sqrt(1 - lam**2)) / lam,   theta + 1/theta = 2 / lam,

and the recurring building block ``2 / (theta**a + theta**-a)`` is called
``sech_a`` below (with ``theta = exp(-t)`` it is ``1 / cosh(a t)``).

Coefficients of ``lam**n`` are extracted by partial fractions over the
``2a``-th roots of ``-1``, which leads to finite trigonometric sums. Those
sums drive :func:`max_pmf`, the exact law of the maximum at any ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import NamedTuple

import numpy as np

from .core_model import MaxDist
from .dyadic import DyadicProb

__all__ = [
    "GfPoint",
    "TrigCoef",
    "ExactMoments",
    "Truncated",
    "position_pmf",
    "position_moments",
    "position_moments_even",
    "gf_theta",
    "gf_hit_own_max",
    "gf_max_marginal",
    "gf_double_Q",
    "factorial_moment_gf",
    "sech_coef",
    "sech_coef_reduced",
    "max_pmf",
    "max_pmf_delta",
    "max_distribution",
    "max_moments",
    "first_passage_pmf",
    "default_a_max",
]


# -- position law ------------------------------------------------------------

def position_pmf(n: int, x: int) -> DyadicProb:
    """``P(S_n = x)`` from the three-case binomial formula."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if x < 0 or x > n or (x - n) % 2:
        return DyadicProb(0)
    if n % 2 == 0:
        m, y = n // 2, x // 2
        if y == 0:
            return DyadicProb(comb(2 * m, m), 2 * m)
        return DyadicProb(2 * comb(2 * m, m - y), 2 * m)
    m, y = (n - 1) // 2, (x - 1) // 2
    return DyadicProb(comb(2 * m + 1, m - y), 2 * m)


@dataclass(frozen=True)
class ExactMoments:
    n: int
    mean: Fraction
    variance: Fraction
    route: str = "exact"

    @property
    def mean_float(self) -> float:
        return float(self.mean)

    @property
    def variance_float(self) -> float:
        return float(self.variance)


def position_moments(n: int) -> ExactMoments:
    """Exact mean and variance of ``S_n`` by direct summation of the PMF."""
    if n < 1:
        raise ValueError("n must be >= 1")
    # all masses share the denominator 2^(2m), m = n // 2; walk the binomial
    # row C(n, k) downward from the centre k = m
    m = n // 2
    s0 = s1 = s2 = 0
    c = comb(n, m)
    for k in range(m, -1, -1):
        x = n - 2 * k
        w = c if x == 0 else (2 * c if n % 2 == 0 else c)
        s0 += w
        s1 += x * w
        s2 += x * x * w
        c = c * k // (n - k + 1)
    den = 1 << (2 * m)
    if s0 != den:
        raise AssertionError("position law does not normalise")
    mean = Fraction(s1, den)
    return ExactMoments(n, mean, Fraction(s2, den) - mean * mean)


def position_moments_even(m: int) -> ExactMoments:
    """Moments of ``S_{2m}`` from the closed binomial expressions."""
    if m < 1:
        raise ValueError("m must be >= 1")
    c = Fraction(comb(2 * m, m), 1 << (2 * m))
    return ExactMoments(2 * m, 2 * m * c, 2 * m * (1 - 2 * m * c * c), route="closed")


# -- generating functions ----------------------------------------------------

@dataclass(frozen=True)
class GfPoint:
    lam: float
    theta: float
    theta_inv: float


class Truncated(NamedTuple):
    """A truncated series value with a bound on the neglected tail."""

    value: float
    tail_bound: float
    terms: int


def _check_lam(lam: float) -> None:
    if not (0.0 < lam < 1.0):
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")


def _check_level(a: int) -> None:
    if a < 1:
        raise ValueError(f"level must be >= 1, got {a}")


def gf_theta(lam: float) -> GfPoint:
    _check_lam(lam)
    r = math.sqrt((1.0 - lam) * (1.0 + lam))
    theta = lam / (1.0 + r)
    return GfPoint(lam, theta, (1.0 + r) / lam)


def _sech(theta: float, a) -> np.ndarray | float:
    """``2 / (theta**a + theta**-a)`` without overflowing for large ``a``."""
    ta = np.power(theta, a)
    return 2.0 * ta / (1.0 + ta * ta)


def gf_hit_own_max(lam: float, a: int) -> float:
    """``sum_n lam**n P{S_n = a, A_n = a}``."""
    _check_level(a)
    th = gf_theta(lam).theta
    return float(2.0 / lam * _sech(th, a + 1))


def gf_max_marginal(lam: float, a: int) -> float:
    """``sum_n lam**n P{A_n = a}``."""
    _check_level(a)
    th = gf_theta(lam).theta
    return float((_sech(th, a) - _sech(th, a + 1)) / (1.0 - lam))


def default_a_max(theta: float, eps: float = 1e-14) -> int:
    return max(1, math.ceil(math.log(eps) / math.log(theta)))


def gf_double_Q(lam: float, z: float, a_max: int | None = None) -> Truncated:
    """``Q(lam, z) = sum_{n, a} lam**n z**a P{A_n = a}``, truncated at ``a_max``.

    Uses ``Q = (lam - (1 - z) sum_a z**(a-1) sech_a) / (1 - lam)``, which is
    the telescoped form of ``sum_a z**a (sech_a - sech_{a+1}) / (1 - lam)``.
    """
    _check_lam(lam)
    if not (0.0 <= z <= 1.0):
        raise ValueError(f"z must lie in [0, 1], got {z}")
    th = gf_theta(lam).theta
    if a_max is None:
        a_max = default_a_max(th)
    a = np.arange(1, a_max + 1)
    s = _sech(th, a)
    zpow = np.power(z, a - 1)
    total = math.fsum(zpow * s)
    value = (lam - (1.0 - z) * total) / (1.0 - lam)
    # sech_a <= 2 theta**a
    zt = z * th
    tail = (1.0 - z) * 2.0 * th * zt ** a_max / (1.0 - zt) / (1.0 - lam)
    return Truncated(value, tail, a_max)


def factorial_moment_gf(lam: float, k: int, a_max: int | None = None) -> Truncated:
    """``sum_n lam**n E[C(A_n, k)] = sum_a C(a-1, k-1) sech_a / (1 - lam)``.

    ``sech_a / (1 - lam)`` generates ``P{A_n >= a}``, and
    ``C(A, k) = sum_{a <= A} C(a-1, k-1)``. Weighting by ``C(a, k-1)``
    instead would generate ``E[C(A_n + 1, k)]``; the two agree at ``k = 1``
    and share the same leading growth.
    """
    _check_lam(lam)
    if k < 1:
        raise ValueError("k must be >= 1")
    th = gf_theta(lam).theta
    if a_max is None:
        # geometric decay sets in once (a + 1) / (a + 2 - k) * theta < 1
        a_max = default_a_max(th) + int(4 * (k - 1) / max(1e-300, -math.log(th))) + k
    a = np.arange(1, a_max + 1, dtype=np.float64)
    binom = _binom_float(a - 1.0, k - 1)
    total = math.fsum(binom * _sech(th, a))
    nxt = a_max + 1
    rho = th * (nxt + 1) / (nxt + 2 - k) if nxt + 2 - k > 0 else 1.0
    t_next = _binom_float(np.array([float(nxt - 1)]), k - 1)[0] * 2.0 * th ** nxt
    tail = t_next / (1.0 - rho) if rho < 1.0 else math.inf
    return Truncated(total / (1.0 - lam), tail / (1.0 - lam), a_max)


def _binom_float(a: np.ndarray, r: int) -> np.ndarray:
    out = np.ones_like(a, dtype=np.float64)
    for i in range(r):
        out *= (a - i) / (i + 1)
    return np.where(a >= r, out, 0.0)


# -- coefficient extraction --------------------------------------------------

@dataclass(frozen=True)
class TrigCoef:
    n: int
    a: int
    value: float


def _angles(b: int) -> np.ndarray:
    j = np.arange(b)
    return np.pi * (2 * j + 1) / (2 * b)


def _signed_cos_power(phi: np.ndarray, m: int) -> np.ndarray:
    """``cos(phi)**m`` via logs, exact zero at ``cos = 0`` when ``m > 0``."""
    if m == 0:
        return np.ones_like(phi)
    c = np.cos(phi)
    # log cos phi = log1p(-2 sin^2(phi/2)) for cos > 0; fold phi > pi/2 back.
    folded = np.where(phi > np.pi / 2, np.pi - phi, phi)
    s2 = np.sin(folded / 2) ** 2
    with np.errstate(divide="ignore"):
        mag = np.exp(m * np.log1p(-2.0 * s2))
    sign = np.where((c < 0) & (m % 2 == 1), -1.0, 1.0)
    midpoint = np.isclose(folded, np.pi / 2, rtol=0, atol=1e-15)
    return np.where(midpoint, 0.0, sign * mag)


def sech_coef(n: int, a: int) -> TrigCoef:
    """Coefficient of ``lam**n`` in ``1 / (theta**a + theta**-a)``.

    ``(1/2a) sum_{j<a} (-1)**j sin(phi_j) cos(phi_j)**(n-1)``, with
    ``phi_j = pi (2j+1) / 2a``. Zero unless ``n = a (mod 2)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_level(a)
    if (n - a) % 2:
        return TrigCoef(n, a, 0.0)
    phi = _angles(a)
    signs = np.where(np.arange(a) % 2 == 0, 1.0, -1.0)
    terms = signs * np.sin(phi) * _signed_cos_power(phi, n - 1)
    return TrigCoef(n, a, math.fsum(terms) / (2 * a))


def sech_coef_reduced(n: int, a: int) -> float:
    """Same coefficient over the lower half range only (``phi <= pi/2``)."""
    if (n - a) % 2:
        return 0.0
    half = a // 2
    if half == 0:
        # a = 1: the single angle pi/2
        return 0.5 if n == 1 else 0.0
    phi = _angles(a)[:half]
    signs = np.where(np.arange(half) % 2 == 0, 1.0, -1.0)
    return math.fsum(signs * np.sin(phi) * _signed_cos_power(phi, n - 1)) / a


def max_pmf_delta(n: int, a: int) -> float:
    """``Q_n(a) - Q_{n-1}(a)`` with ``Q_0 = 0``.

    Only one of the two coefficients in ``sech_a - sech_{a+1}`` survives the
    parity rule, so this is ``2 (-1)**(n+a) coef[lam**n] 1/(theta**b + theta**-b)``
    with ``b = a`` or ``a + 1`` matching the parity of ``n``.
    """
    _check_level(a)
    b = a if (n - a) % 2 == 0 else a + 1
    sign = 1.0 if (n + a) % 2 == 0 else -1.0
    return 2.0 * sign * sech_coef(n, b).value


def _tail_sum(b: int, m: int) -> float:
    """``sum_j (-1)**j cos(phi_j)**m / sin(phi_j)`` over all ``j < b``.

    Terms ``j`` and ``b-1-j`` coincide when ``m = b - 1 (mod 2)``, which is
    the only case used, so the lower half is summed and doubled.
    """
    half = (b + 1) // 2
    phi = _angles(b)[:half]
    signs = np.where(np.arange(half) % 2 == 0, 1.0, -1.0)
    terms = signs * _signed_cos_power(phi, m) / np.sin(phi)
    terms = terms[terms != 0.0]
    return 2.0 * math.fsum(terms)


def max_pmf(N: int, a: int) -> float:
    """``Q_N(a) = P{A_N = a}`` from the finite trigonometric formula.

    Summing ``-(Q_n - Q_{n-1})`` over ``n > N`` turns each ``cos**(n-1)``
    into a geometric series, leaving

        Q_N(a) = (1/(a+1)) T(a+1, m1) - (1/a) T(a, m2)

    where ``T(b, m) = sum_j (-1)**j cos(phi_j)**m / sin(phi_j)`` and
    ``(m1, m2) = (N, N+1)`` if ``N = a (mod 2)``, else ``(N+1, N)``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    _check_level(a)
    if (N - a) % 2 == 0:
        m1, m2 = N, N + 1
    else:
        m1, m2 = N + 1, N
    return _tail_sum(a + 1, m1) / (a + 1) - _tail_sum(a, m2) / a


def max_distribution(N: int, a_max: int | None = None, tail_cut: float = 0.0) -> MaxDist:
    """``Q_N(a)`` for ``a = 1 .. min(N, a_max)`` on the trigonometric route.

    With ``tail_cut > 0`` the scan also stops at the first level beyond
    ``4 sqrt(N)`` whose mass is below ``tail_cut``.
    """
    top = N if a_max is None else min(N, a_max)
    pmf = {}
    for a in range(1, top + 1):
        q = max_pmf(N, a)
        pmf[a] = q
        if tail_cut > 0 and a > 4 * math.sqrt(N) and abs(q) < tail_cut:
            break
    return MaxDist(N, pmf, route="trig")


def max_moments(N: int, rel_cut: float = 1e-18) -> tuple[float, float]:
    """Mean and variance of ``A_N`` from :func:`max_pmf`.

    Levels are scanned upward from the bulk until ``a * Q_N(a)`` drops below
    ``rel_cut``; beyond ``a ~ sqrt(N)`` the law decays like a Gaussian.
    """
    qs = []
    a = 1
    while a <= N:
        q = max_pmf(N, a)
        qs.append(q)
        if a > 4 * math.sqrt(N) and a * a * abs(q) < rel_cut:
            break
        a += 1
    q = np.array(qs)
    levels = np.arange(1, len(q) + 1, dtype=np.float64)
    mean = math.fsum(levels * q)
    second = math.fsum(levels * levels * q)
    return mean, second - mean * mean


def first_passage_pmf(n: int, a: int) -> float:
    """Probability that level ``a`` is reached for the first time at step ``n``.

    ``P(A_{n-1} < a <= A_n)`` has generating function
    ``sum_{b >= a} (sech_b - sech_{b+1}) = sech_a``, so this is twice the
    coefficient of ``lam**n`` in ``1/(theta**a + theta**-a)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_level(a)
    return 2.0 * sech_coef(n, a).value
