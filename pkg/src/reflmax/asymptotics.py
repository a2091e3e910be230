"""Large-``n`` behaviour of the running maximum.

Two families of results live here:

* moment constants ``lim* n**(-k/2) E[A_n**k]`` expressed through
  ``I_k = int_0^inf b**(k-1) / cosh(b) db``, together with a direct
  numerical Abel limit of the factorial-moment generating function;
* the limiting density ``lim a Q_N(a)`` at fixed ``gamma = 2 a**2 / (pi N)``,
  which is a theta-function derivative. Its defining series converges fast
  for small ``gamma``; the Jacobi-transformed series converges fast for
  large ``gamma``. The crossover is at ``gamma = 1`` where the two coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np
from scipy import integrate

from .closed_form import factorial_moment_gf, gf_theta, max_pmf

__all__ = [
    "MomentReport",
    "ThetaPoint",
    "ExtrapolationError",
    "moment_integral",
    "limit_factorial_moment",
    "limit_moment",
    "limit_variance",
    "position_limit_constants",
    "comparison_table",
    "abel_limit_estimate",
    "abel_sequence",
    "density_direct",
    "density_resummed",
    "limiting_density",
    "first_term_bounds",
    "theta_identity_check",
    "theta_identity_sides",
    "finite_size_convergence",
]


class ExtrapolationError(RuntimeError):
    """Richardson extrapolation did not settle on the supplied grid."""


@dataclass(frozen=True)
class MomentReport:
    k: int
    value: float
    route: str
    error_estimate: float


# -- moment constants --------------------------------------------------------

def _sech_weight(b: float, k: int) -> float:
    # b**(k-1) / cosh(b) written to stay finite for large b
    return 2.0 * b ** (k - 1) * math.exp(-b) / (1.0 + math.exp(-2.0 * b))


def moment_integral(k: int) -> float:
    """``int_0^inf b**(k-1) / cosh(b) db``.

    Split at ``b = 1``; the tail is mapped to ``(0, 1]`` by ``b = 1 - ln u``
    so that the exponential decay becomes a bounded integrand.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
    head, err_h = integrate.quad(_sech_weight, 0.0, 1.0, args=(k,), **opts)

    def tail_integrand(u: float) -> float:
        # exp(-b) = u / e cancels the Jacobian 1/u
        if u <= 0.0:
            return 0.0
        b = 1.0 - math.log(u)
        v = u / math.e
        return 2.0 / math.e * b ** (k - 1) / (1.0 + v * v)

    tail, err_t = integrate.quad(tail_integrand, 0.0, 1.0, **opts)
    total = head + tail
    if err_h + err_t > 1e-12 * max(1.0, total):
        raise RuntimeError(f"quadrature for k={k} did not converge (error {err_h + err_t:g})")
    return total


def _half_factorial(k: int) -> float:
    """``(k/2)!`` as ``Gamma(k/2 + 1)``."""
    if k % 2 == 0:
        return float(math.factorial(k // 2))
    return math.gamma(k / 2 + 1)


def limit_factorial_moment(k: int) -> MomentReport:
    """``lim* n**(-k/2) E[C(A_n, k)]``."""
    val = moment_integral(k) / (2 ** (k / 2) * _half_factorial(k) * math.factorial(k - 1))
    return MomentReport(k, val, "integral", 1e-13 * val)


def limit_moment(k: int) -> MomentReport:
    """``lim* n**(-k/2) E[A_n**k]``."""
    val = k * moment_integral(k) / (2 ** (k / 2) * _half_factorial(k))
    return MomentReport(k, val, "integral", 1e-13 * val)


def limit_variance() -> float:
    """``lim* Var(A_n) / n``."""
    m1 = limit_moment(1).value
    return limit_moment(2).value - m1 * m1


def position_limit_constants() -> dict[str, float]:
    """Limits of ``E(S_n)/sqrt(n)`` and ``Var(S_n)/n`` for the reflected walk."""
    return {"mean": math.sqrt(2.0 / math.pi), "variance": 1.0 - 2.0 / math.pi}


def comparison_table() -> dict[str, float]:
    pos = position_limit_constants()
    return {
        "mean_S_over_sqrt_n": pos["mean"],
        "mean_A_over_sqrt_n": limit_moment(1).value,
        "var_S_over_n": pos["variance"],
        "var_A_over_n": limit_variance(),
        "second_moment_A_over_n": limit_moment(2).value,
    }


# -- Abel limit --------------------------------------------------------------

def abel_sequence(k: int, lam: float) -> float:
    """``((1-lam)/lam)**(k/2) sum_a C(a-1, k-1) sech_a / (k/2)!`` at one ``lam``."""
    gf = factorial_moment_gf(lam, k)
    s = (1.0 - lam) * gf.value
    return ((1.0 - lam) / lam) ** (k / 2) * s / _half_factorial(k)


def _neville_at_zero(xs: Sequence[float], ys: Sequence[float]) -> list[float]:
    """Diagonal of the Neville tableau for the polynomial through (xs, ys) at 0."""
    p = list(ys)
    diag = [p[-1]]
    n = len(xs)
    for order in range(1, n):
        for i in range(n - order):
            x0, x1 = xs[i], xs[i + order]
            p[i] = (x0 * p[i + 1] - x1 * p[i]) / (x0 - x1)
        diag.append(p[n - order - 1])
    return diag


def abel_limit_estimate(k: int, lambda_grid: Sequence[float]) -> MomentReport:
    """Abel limit of the factorial-moment series, extrapolated to ``lam = 1``.

    With ``theta = exp(-t)``, ``(1 - lam)/lam = cosh(t) - 1`` and the error
    of the finite-``lam`` value is a power series in ``t``, so polynomial
    extrapolation is done in ``t`` (not in ``1 - lam``, where the expansion
    has half-integer powers).
    """
    grid = [float(l) for l in lambda_grid]
    if len(grid) < 2 or any(not 0 < l < 1 for l in grid) or any(
        b <= a for a, b in zip(grid, grid[1:])
    ):
        raise ValueError("lambda grid must be increasing inside (0, 1) with >= 2 points")
    ts = [-math.log(gf_theta(l).theta) for l in grid]
    vals = [abel_sequence(k, l) for l in grid]
    diag = _neville_at_zero(ts, vals)
    steps = [abs(b - a) for a, b in zip(diag, diag[1:])]
    if len(steps) >= 2 and steps[-1] > steps[-2]:
        raise ExtrapolationError(
            f"extrapolation corrections grew ({steps[-2]:.3g} -> {steps[-1]:.3g}); refine the grid"
        )
    return MomentReport(k, diag[-1], "abel", steps[-1])


# -- limiting density --------------------------------------------------------

@dataclass(frozen=True)
class ThetaPoint:
    """Limiting density of ``A_N`` at one value of ``gamma``.

    ``theta_sum`` is the one-sided alternating series
    ``sum_{j>=0} (-1)**j (2j+1)/gamma exp(-pi (2j+1)**2 / (4 gamma))``;
    the mirror half of the trigonometric sum contributes the same amount,
    so ``density = 2 * theta_sum``.
    """

    gamma: float
    density: float
    branch: str
    terms_used: int
    truncation_bound: float
    theta_sum: float


_REL_STOP = 1e-16
_MAX_TERMS = 10_000


def _alternating_series(term, rel_stop: float = _REL_STOP) -> tuple[float, int, float]:
    """Sum ``term(0) - term(1) + ...`` (``term`` returns magnitudes).

    Stops once the next magnitude is below ``rel_stop`` times the partial
    sum. Returns (sum, terms used, magnitude of first omitted term).
    """
    parts: list[float] = []
    total = 0.0
    j = 0
    while j < _MAX_TERMS:
        t = term(j)
        if parts and t <= rel_stop * abs(total):
            return total, j, t
        parts.append(t if j % 2 == 0 else -t)
        total = math.fsum(parts)
        if t == 0.0:
            return total, j + 1, 0.0
        j += 1
    raise RuntimeError("theta series did not converge")


def _direct_term(gamma: float):
    return lambda j: (2 * j + 1) / gamma * math.exp(-math.pi / (4 * gamma) * (2 * j + 1) ** 2)


def _resummed_term(gamma: float):
    r = math.sqrt(gamma)
    return lambda j: r * (2 * j + 1) * math.exp(-math.pi * gamma / 4 * (2 * j + 1) ** 2)


def _check_gamma(gamma: float) -> None:
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")


def _theta_point(gamma: float, branch: str, term) -> ThetaPoint:
    val, used, nxt = _alternating_series(term)
    return ThetaPoint(gamma, 2.0 * val, branch, used, 2.0 * nxt, val)


def density_direct(gamma: float) -> ThetaPoint:
    """Series in ``exp(-pi/(4 gamma))``; fast for small ``gamma``."""
    _check_gamma(gamma)
    return _theta_point(gamma, "direct", _direct_term(gamma))


def density_resummed(gamma: float) -> ThetaPoint:
    """Jacobi-transformed series in ``exp(-pi gamma / 4)``; fast for large ``gamma``."""
    _check_gamma(gamma)
    return _theta_point(gamma, "resummed", _resummed_term(gamma))


def limiting_density(gamma: float) -> ThetaPoint:
    """``lim a Q_N(a)`` as ``a, N -> inf`` with ``2 a**2 / (pi N) -> gamma``."""
    _check_gamma(gamma)
    return density_direct(gamma) if gamma < 1.0 else density_resummed(gamma)


def first_term_bounds(gamma: float) -> tuple[float, float, float]:
    """(lower, upper, alpha) for the density from the leading term alone.

    The faster series is alternating with decreasing terms and its second
    term is ``alpha`` times the first, so
    ``(1 - alpha) * first <= density <= first``.
    """
    _check_gamma(gamma)
    if gamma <= 1.0:
        first = 2.0 * _direct_term(gamma)(0)
        alpha = 3.0 * math.exp(-2 * math.pi / gamma)
    else:
        first = 2.0 * _resummed_term(gamma)(0)
        alpha = 3.0 * math.exp(-2 * math.pi * gamma)
    return (1.0 - alpha) * first, first, alpha


def _theta_side(scale, gamma_pow) -> mpmath.mpf:
    """``gamma_pow * sum_{n in Z} (-1)**n (n+1/2) exp(-pi scale (n+1/2)**2)``."""
    # the summand is even under n -> -1-n, so sum n >= 0 and double
    f = lambda n: (-1) ** int(n) * (n + mpmath.mpf(1) / 2) * mpmath.exp(
        -mpmath.pi * scale * (n + mpmath.mpf(1) / 2) ** 2
    )
    total = mpmath.mpf(0)
    n = 0
    while True:
        t = f(n)
        total += t
        if n > 2 and abs(t) < mpmath.mpf(10) ** (-mpmath.mp.dps - 5) * max(abs(total), mpmath.mpf(10) ** -300):
            break
        n += 1
    return 2 * gamma_pow * total


def theta_identity_check(gamma: float) -> float:
    """Residual of the Jacobi transformation for the half-integer theta series.

    Both sides carry heavy cancellation for small ``gamma``, so they are
    summed in 40-digit arithmetic and the difference is returned as a float.
    """
    if not (0.05 <= gamma <= 20.0):
        raise ValueError("gamma must lie in [0.05, 20]")
    with mpmath.workdps(40):
        g = mpmath.mpf(gamma)
        lhs = _theta_side(g, g ** mpmath.mpf(1.5))
        rhs = _theta_side(1 / g, mpmath.mpf(1))
        return float(abs(lhs - rhs))


def theta_identity_sides(gamma: float) -> tuple[float, float]:
    with mpmath.workdps(40):
        g = mpmath.mpf(gamma)
        return float(_theta_side(g, g ** mpmath.mpf(1.5))), float(_theta_side(1 / g, mpmath.mpf(1)))


# -- finite-size approach ----------------------------------------------------

def finite_size_convergence(a: int, gamma: float) -> tuple[float, float, float]:
    """Compare ``a Q_N(a)`` at ``N ~ 2 a**2 / (pi gamma)`` with the limit.

    ``N`` is rounded, then bumped up by one if needed so that ``N = a (mod 2)``.
    """
    if a < 2:
        raise ValueError("a must be >= 2")
    _check_gamma(gamma)
    N = round(2 * a * a / (math.pi * gamma))
    if (N - a) % 2:
        N += 1
    if N < a:
        raise ValueError(f"gamma={gamma} too large for a={a}: N={N} < a")
    finite = a * max_pmf(N, a)
    limit = limiting_density(gamma).density
    return finite, limit, abs(finite - limit)
