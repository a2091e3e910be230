"""Seeded simulation of the reflected walk.

Trials are grouped in fixed-size blocks. Block ``b`` draws from its own
PCG64 stream keyed by ``SeedSequence(seed, spawn_key=(b,))``, so the
output depends only on ``(n, trials, seed)`` and never on how blocks are
spread over workers. Blocks reduce to integer histograms of ``S_n`` and
``A_n``, which merge exactly in any order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

__all__ = [
    "SimConfig",
    "SimSummary",
    "simulate_walk",
    "run",
    "block_stream",
    "chi_squared_test",
    "BLOCK_SIZE",
    "CI_MIN_TRIALS",
]

BLOCK_SIZE = 1 << 16
CI_MIN_TRIALS = 10_000
Z_99 = float(stats.norm.ppf(0.995))


@dataclass(frozen=True)
class SimConfig:
    n: int
    trials: int
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 1 <= self.trials < 2**63:
            raise ValueError("trials must be in [1, 2**63)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class SimSummary:
    n: int
    trials: int
    seed: int
    mean_S: float
    var_S: float
    mean_A: float
    var_A: float
    ci_halfwidth_mean_S: float | None
    ci_halfwidth_var_S: float | None
    ci_halfwidth_mean_A: float | None
    ci_halfwidth_var_A: float | None
    hist_A: dict[int, int] = field(repr=False)
    hist_S: dict[int, int] = field(repr=False)

    def stderr_mean_A(self) -> float:
        return math.sqrt(self.var_A / self.trials)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["hist_A"] = {str(a): c for a, c in sorted(self.hist_A.items())}
        d["hist_S"] = {str(s): c for s, c in sorted(self.hist_S.items())}
        return d


def simulate_walk(n: int, stream: np.random.Generator) -> tuple[int, int]:
    """One sample of ``(S_n, A_n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    s = a = 1
    for _ in range(n - 1):
        if s == 0 or stream.random() < 0.5:
            s += 1
        else:
            s -= 1
        if s > a:
            a = s
    return s, a


def block_stream(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _run_block(n: int, size: int, seed: int, block: int) -> tuple[np.ndarray, np.ndarray]:
    """Histograms (over 0..n) of final position and maximum for one block."""
    rng = block_stream(seed, block)
    pos = np.ones(size, dtype=np.int32)
    top = np.ones(size, dtype=np.int32)
    steps = n - 1
    chunk = 256
    for start in range(0, steps, chunk):
        c = min(chunk, steps - start)
        raw = np.frombuffer(rng.bytes(size * ((c + 7) // 8)), dtype=np.uint8)
        bits = np.unpackbits(raw.reshape(size, -1), axis=1)[:, :c]
        signs = (2 * bits.astype(np.int32) - 1).T.copy()
        for k in range(c):
            # forced up-step at the origin
            pos += np.where(pos == 0, 1, signs[k])
            np.maximum(top, pos, out=top)
    return (
        np.bincount(pos, minlength=n + 1).astype(np.int64),
        np.bincount(top, minlength=n + 1).astype(np.int64),
    )


def _run_block_args(args):
    return _run_block(*args)


def _moments(hist: np.ndarray, trials: int) -> tuple[Fraction, Fraction, Fraction]:
    """Mean, variance (ddof=1) and fourth central moment from a histogram."""
    vals = range(len(hist))
    counts = [int(c) for c in hist]
    s1 = sum(v * c for v, c in zip(vals, counts))
    mean = Fraction(s1, trials)
    m2 = sum(c * (v - mean) ** 2 for v, c in zip(vals, counts) if c)
    m4 = sum(c * (v - mean) ** 4 for v, c in zip(vals, counts) if c) / trials
    var = m2 / (trials - 1) if trials > 1 else Fraction(0)
    return mean, var, m4


def run(config: SimConfig) -> SimSummary:
    n, trials, seed = config.n, config.trials, config.seed
    tasks = [
        (n, min(BLOCK_SIZE, trials - lo), seed, b)
        for b, lo in enumerate(range(0, trials, BLOCK_SIZE))
    ]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_block_args, tasks))
    else:
        parts = [_run_block(*t) for t in tasks]
    hist_S = np.zeros(n + 1, dtype=np.int64)
    hist_A = np.zeros(n + 1, dtype=np.int64)
    for hs, ha in parts:
        hist_S += hs
        hist_A += ha

    mean_S, var_S, m4_S = _moments(hist_S, trials)
    mean_A, var_A, m4_A = _moments(hist_A, trials)

    def ci_mean(var: Fraction) -> float | None:
        if trials < CI_MIN_TRIALS:
            return None
        return Z_99 * math.sqrt(float(var) / trials)

    def ci_var(var: Fraction, m4: Fraction) -> float | None:
        if trials < CI_MIN_TRIALS:
            return None
        return Z_99 * math.sqrt(max(float(m4 - var * var), 0.0) / trials)

    return SimSummary(
        n=n,
        trials=trials,
        seed=seed,
        mean_S=float(mean_S),
        var_S=float(var_S),
        mean_A=float(mean_A),
        var_A=float(var_A),
        ci_halfwidth_mean_S=ci_mean(var_S),
        ci_halfwidth_var_S=ci_var(var_S, m4_S),
        ci_halfwidth_mean_A=ci_mean(var_A),
        ci_halfwidth_var_A=ci_var(var_A, m4_A),
        hist_A={a: int(c) for a, c in enumerate(hist_A) if c},
        hist_S={s: int(c) for s, c in enumerate(hist_S) if c},
    )


def chi_squared_test(
    hist: dict[int, int], probs: dict[int, float], min_expected: float = 5.0
) -> tuple[float, int, float]:
    """Pearson goodness of fit of ``hist`` against ``probs``.

    Adjacent levels are pooled (in increasing order) until each pooled cell
    expects at least ``min_expected`` counts; the remainder folds into the
    last cell. Returns (statistic, degrees of freedom, p-value).
    """
    total = sum(hist.values())
    support = sorted(set(hist) | {a for a, p in probs.items() if p > 0})
    obs_cells, exp_cells = [], []
    o = e = 0.0
    for a in support:
        o += hist.get(a, 0)
        e += total * max(float(probs.get(a, 0.0)), 0.0)
        if e >= min_expected:
            obs_cells.append(o)
            exp_cells.append(e)
            o = e = 0.0
    if obs_cells:
        obs_cells[-1] += o
        exp_cells[-1] += e
    obs = np.array(obs_cells)
    exp = np.array(exp_cells)
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = len(obs) - 1
    return stat, dof, float(stats.chi2.sf(stat, dof)) if dof > 0 else 1.0
