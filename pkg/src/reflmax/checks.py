"""Cross-validation matrix: every route checked against an independent one.

Each ``criterion_*`` function returns a list of :class:`Check` results. The
``verify`` command runs them at ``quick`` or ``full`` level; the test suite
runs them at full strength.
"""

from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np

from . import asymptotics as asy
from . import closed_form as cf
from .core_model import (
    enumerate_paths_oracle,
    iter_joint,
    joint_distribution,
    marginal_max,
    marginal_position,
    max_distribution_float,
)
from .dyadic import DyadicProb
from .monte_carlo import SimConfig, chi_squared_test, run
from .serialization import Check

__all__ = ["CRITERIA", "run_matrix", "REFERENCE_CONSTANTS"]

REFERENCE_CONSTANTS = {
    "mean_S_over_sqrt_n": 0.797885,
    "mean_A_over_sqrt_n": 1.253314,
    "second_moment_A_over_n": 1.831931,
    "var_A_over_n": 0.261130,
}

# relative slack for comparing an exact inequality evaluated in floating point
FLOAT_ULPS = 4 * np.finfo(float).eps


def _timed(fn: Callable[[], object]) -> tuple[object, float]:
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def criterion_1_oracle(level: str = "full") -> list[Check]:
    n_max = 16 if level == "full" else 12
    mism = []

    def body():
        for n in range(1, n_max + 1):
            if joint_distribution(n) != enumerate_paths_oracle(n):
                mism.append(n)

    _, dt = _timed(body)
    return [
        Check(f"oracle equivalence n<={n_max}", not mism, mism or "all equal", "exact"),
        Check("oracle equivalence runtime [s]", dt < 60.0, dt, 60.0),
    ]


def criterion_2_position_law(level: str = "full") -> list[Check]:
    n_max = 200 if level == "full" else 60
    bad = []
    for t in iter_joint(n_max):
        pos = marginal_position(t)
        for x in range(0, t.n + 1):
            if pos.pmf.get(x, DyadicProb(0)) != cf.position_pmf(t.n, x):
                bad.append((t.n, x))
    return [Check(f"DP position marginal == binomial law, n<={n_max}", not bad, bad[:5] or "all equal", "exact")]


def criterion_3_moments(level: str = "full") -> list[Check]:
    bad = []
    for m in range(1, 101):
        summed, closed = cf.position_moments(2 * m), cf.position_moments_even(m)
        if (summed.mean, summed.variance) != (closed.mean, closed.variance):
            bad.append(m)
    mom = cf.position_moments(10_000)
    n = 10_000
    lim = asy.position_limit_constants()
    r_mean = mom.mean_float / math.sqrt(n) / lim["mean"] - 1
    r_var = mom.variance_float / n / lim["variance"] - 1
    return [
        Check("summed moments == closed even-n moments, 2n<=200", not bad, bad or "all equal", "exact"),
        Check("E(S_n)/sqrt(n) vs sqrt(2/pi), n=1e4 (rel)", abs(r_mean) <= 0.01, r_mean, 0.01),
        Check("Var(S_n)/n vs 1-2/pi, n=1e4 (rel)", abs(r_var) <= 0.01, r_var, 0.01),
    ]


def criterion_4_trig_vs_dp(level: str = "full") -> list[Check]:
    n_max = 64 if level == "full" else 40
    worst = 0.0
    for t in iter_joint(n_max):
        q = marginal_max(t).as_floats()
        for a in range(1, t.n + 1):
            worst = max(worst, abs(q[a] - cf.max_pmf(t.n, a)))
    fq = max_distribution_float(500).as_floats()
    worst500 = max(abs(fq[a] - cf.max_pmf(500, a)) for a in range(1, 501))
    return [
        Check(f"trig Q_N(a) vs exact DP, N<={n_max}", worst <= 1e-12, worst, 1e-12),
        Check("trig Q_N(a) vs float DP, N=500", worst500 <= 1e-10, worst500, 1e-10),
    ]


def criterion_5_constants(level: str = "full") -> list[Check]:
    table, dt = _timed(asy.comparison_table)
    out = []
    for key in ("mean_A_over_sqrt_n", "second_moment_A_over_n", "var_A_over_n"):
        got = table[key]
        out.append(Check(f"{key} to 5 decimals", round(got, 5) == round(REFERENCE_CONSTANTS[key], 5),
                         got, REFERENCE_CONSTANTS[key]))
    out.append(Check("constants runtime [s]", dt < 1.0, dt, 1.0))
    return out


def criterion_6_finite_moments(level: str = "full") -> list[Check]:
    N = 10**6 if level == "full" else 10**4
    (mean, var), dt = _timed(lambda: cf.max_moments(N))
    r_mean = mean / math.sqrt(N) / 1.2533 - 1
    r_var = var / N / 0.26113 - 1
    return [
        Check(f"E(A_N)/sqrt(N) vs 1.2533, N={N} (rel)", abs(r_mean) <= 0.005, r_mean, 0.005),
        Check(f"Var(A_N)/N vs 0.26113, N={N} (rel)", abs(r_var) <= 0.02, r_var, 0.02),
        Check("finite-N moments runtime [s]", dt < 300.0, dt, 300.0),
    ]


def criterion_7_theta(level: str = "full") -> list[Check]:
    dual = max(
        abs(asy.density_direct(g).theta_sum - asy.density_resummed(g).theta_sum)
        for g in (0.5, 0.8, 1.0, 1.25, 2.0)
    )
    grid = np.geomspace(0.05, 20.0, 50 if level == "full" else 5)
    worst = 0.0
    for g in grid:
        lhs, _ = asy.theta_identity_sides(float(g))
        worst = max(worst, asy.theta_identity_check(float(g)) / max(abs(lhs), 1e-300))
    return [
        Check("direct vs resummed series, gamma in {0.5..2}", dual <= 1e-12, dual, 1e-12),
        Check(f"theta identity relative residual, {len(grid)} gammas", worst <= 1e-13, worst, 1e-13),
    ]


def criterion_8_first_term(level: str = "full") -> list[Check]:
    worst_alpha = worst_rel = 0.0
    failures = []
    # the crossover gamma = 1 is where alpha peaks, so it is always on the grid
    grid = np.union1d(np.geomspace(0.05, 20.0, 50), [1.0])
    for g in grid:
        lo, hi, alpha = asy.first_term_bounds(float(g))
        d = asy.limiting_density(float(g)).density
        worst_alpha = max(worst_alpha, alpha)
        worst_rel = max(worst_rel, (hi - d) / hi)
        if not (lo * (1 - FLOAT_ULPS) <= d <= hi * (1 + FLOAT_ULPS)):
            failures.append(float(g))
    return [
        Check("one-term estimate brackets density", not failures, failures or "all bracketed", "alpha"),
        # 3 exp(-2 pi) = 0.0056023 is quoted as 0.0056, i.e. to four decimals
        Check("max alpha over grid (4 decimals)", round(worst_alpha, 4) <= 0.0056, worst_alpha, 0.0056),
        Check("max relative error of one-term estimate", worst_rel <= worst_alpha, worst_rel, worst_alpha),
    ]


def criterion_9_finite_size(level: str = "full") -> list[Check]:
    out = []
    for g in (0.5, 1.0, 2.0):
        _, _, gap50 = asy.finite_size_convergence(50, g)
        _, _, gap100 = asy.finite_size_convergence(100, g)
        out.append(Check(f"gap a=50, gamma={g}", gap50 <= 0.02, gap50, 0.02))
        out.append(Check(f"gap(100)/gap(50), gamma={g}", gap100 <= 0.6 * gap50, gap100 / gap50, 0.6))
    return out


def criterion_10_monte_carlo(level: str = "full") -> list[Check]:
    if level == "full":
        n, trials = 1000, 10**6
    else:
        n, trials = 100, 20_000
    seed = 20240611
    summary, dt = _timed(lambda: run(SimConfig(n, trials, seed, workers=1)))
    exact = cf.max_distribution(n)
    _, _, p = chi_squared_test(summary.hist_A, exact.pmf)
    mean_exact = exact.mean()
    z = (summary.mean_A - mean_exact) / summary.stderr_mean_A()
    split_trials = min(trials, 3 * 65536 + 17)
    s1 = run(SimConfig(n, split_trials, seed, workers=1))
    s3 = run(SimConfig(n, split_trials, seed, workers=3))
    return [
        Check(f"chi-squared p-value, n={n}, trials={trials}", p > 0.001, p, 0.001),
        Check("|mean_A - exact| in standard errors", abs(z) <= 4.0, z, 4.0),
        Check("simulation runtime [s]", dt < 120.0, dt, 120.0),
        Check("bit-identical across worker counts", s1 == s3, s1 == s3, True),
    ]


def criterion_11_abel(level: str = "full") -> list[Check]:
    est = asy.abel_limit_estimate(1, [0.9, 0.99, 0.999, 0.9999])
    err = est.value - math.sqrt(math.pi / 2)
    return [Check("Abel-extrapolated E(A_n)/sqrt(n) vs sqrt(pi/2)", abs(err) <= 1e-3, err, 1e-3)]


def criterion_12_first_passage(level: str = "full") -> list[Check]:
    total = math.fsum(cf.first_passage_pmf(n, 3) for n in range(1, 2001))
    f33 = cf.first_passage_pmf(3, 3)
    return [
        Check("sum_{n<=2000} first passage to a=3", total >= 0.98, total, 0.98),
        Check("first passage (n=3, a=3) = 1/4", abs(f33 - 0.25) <= 1e-12, f33, 0.25),
    ]


CRITERIA: dict[int, Callable[[str], list[Check]]] = {
    1: criterion_1_oracle,
    2: criterion_2_position_law,
    3: criterion_3_moments,
    4: criterion_4_trig_vs_dp,
    5: criterion_5_constants,
    6: criterion_6_finite_moments,
    7: criterion_7_theta,
    8: criterion_8_first_term,
    9: criterion_9_finite_size,
    10: criterion_10_monte_carlo,
    11: criterion_11_abel,
    12: criterion_12_first_passage,
}


def run_matrix(level: str = "quick") -> list[Check]:
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    out: list[Check] = []
    for num, fn in CRITERIA.items():
        for c in fn(level):
            c.name = f"{num:>2}. {c.name}"
            out.append(c)
    return out
