"""Exact joint law of position and running maximum for the reflected walk.

The walk lives on ``{0, 1, 2, ...}``. From ``x > 0`` it steps to ``x +- 1``
with probability 1/2 each; from ``0`` it always steps to ``1``. After ``n``
steps the pair ``(S_n, A_n)`` (position, running maximum) has a law
``P_n(x, a)`` supported on the wedge ``0 <= x <= a <= n`` with
``x = n (mod 2)``.

Every probability involved is a multiple of ``2**-(n-1)``, so the tables are
kept as arrays of integer numerators over one shared power-of-two
denominator, and are exposed as :class:`~reflmax.dyadic.DyadicProb` values.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Mapping

import numpy as np

from .dyadic import DyadicProb

__all__ = [
    "JointTable",
    "PosDist",
    "MaxDist",
    "step_joint",
    "joint_distribution",
    "iter_joint",
    "marginal_position",
    "marginal_max",
    "enumerate_paths_oracle",
    "joint_distribution_float",
    "max_distribution_float",
    "ORACLE_CAP",
]

ORACLE_CAP = 24


def _check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError(f"step count must be an integer, got {n!r}")
    if n < 1:
        raise ValueError(f"step count must be >= 1, got {n} (the walk starts with a forced step)")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class JointTable:
    """Exact ``P{S_n = x, A_n = a}`` for a single ``n``.

    ``numerators[x, a] / 2**log2_denominator`` is the probability; the array
    has shape ``(n + 1, n + 1)`` and is read-only.
    """

    n: int
    numerators: np.ndarray = field(repr=False)
    log2_denominator: int

    @classmethod
    def from_entries(cls, n: int, entries: Mapping[tuple[int, int], DyadicProb]) -> "JointTable":
        _check_n(n)
        d = max((p.log2_denominator for p in entries.values()), default=0)
        num = np.zeros((n + 1, n + 1), dtype=object)
        for (x, a), p in entries.items():
            if not (0 <= x <= a <= n and a >= 1) or (x - n) % 2:
                raise ValueError(f"({x}, {a}) is outside the admissible wedge for n={n}")
            num[x, a] += p.numerator << (d - p.log2_denominator)
        table = cls(n, _frozen(num), d)
        if table.total() != DyadicProb(1):
            raise ValueError(f"entries sum to {table.total()}, not 1")
        return table

    @cached_property
    def entries(self) -> dict[tuple[int, int], DyadicProb]:
        d = self.log2_denominator
        xs, as_ = np.nonzero(self.numerators)
        return {
            (int(x), int(a)): DyadicProb(int(self.numerators[x, a]), d)
            for x, a in zip(xs, as_)
        }

    def __getitem__(self, key: tuple[int, int]) -> DyadicProb:
        x, a = key
        if 0 <= x <= self.n and 0 <= a <= self.n:
            return DyadicProb(int(self.numerators[x, a]), self.log2_denominator)
        return DyadicProb(0)

    def total(self) -> DyadicProb:
        return DyadicProb(int(self.numerators.sum()), self.log2_denominator)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JointTable):
            return NotImplemented
        return self.n == other.n and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self.entries.items())))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class PosDist:
    """Law of the position ``S_n``."""

    n: int
    pmf: dict[int, DyadicProb]

    def total(self) -> DyadicProb:
        return DyadicProb.sum(self.pmf.values())

    def mean(self) -> Fraction:
        return sum((x * p.to_fraction() for x, p in self.pmf.items()), Fraction(0))

    def variance(self) -> Fraction:
        m = self.mean()
        return sum((x * x * p.to_fraction() for x, p in self.pmf.items()), Fraction(0)) - m * m


@dataclass(frozen=True)
class MaxDist:
    """Law of the running maximum ``A_n``.

    ``pmf`` values are :class:`DyadicProb` on the exact route and ``float``
    on the trigonometric route; ``route`` says which.
    """

    n: int
    pmf: dict[int, DyadicProb | float]
    route: str = "dp"

    def total(self):
        if self.route == "dp":
            return DyadicProb.sum(self.pmf.values())
        return float(np.sum(list(self.pmf.values())))

    def as_floats(self) -> np.ndarray:
        """Dense float vector indexed by ``a`` (index 0 is unused and zero)."""
        out = np.zeros(self.n + 1)
        for a, p in self.pmf.items():
            out[a] = float(p)
        return out

    def mean(self):
        if self.route == "dp":
            return sum((a * p.to_fraction() for a, p in self.pmf.items()), Fraction(0))
        q = self.as_floats()
        return float(np.dot(np.arange(self.n + 1), q))

    def variance(self):
        m = self.mean()
        if self.route == "dp":
            return sum((a * a * p.to_fraction() for a, p in self.pmf.items()), Fraction(0)) - m * m
        q = self.as_floats()
        a = np.arange(self.n + 1)
        return float(np.dot(a * a, q)) - m * m

    def cdf(self, a: int):
        """``P(A_n <= a)``."""
        if self.route == "dp":
            return DyadicProb.sum(p for b, p in self.pmf.items() if b <= a)
        return float(sum(p for b, p in self.pmf.items() if b <= a))


# -- the recursion -----------------------------------------------------------

def _advance(num: np.ndarray) -> np.ndarray:
    """One application of the unified recursion, without the factor 1/2.

    ``num`` is indexed ``[x, a]`` over ``0 <= x, a <= n``; the result covers
    ``0 <= x, a <= n + 1``. Each output is

        (1 + [x=1] - [x=a+1]) * num[x-1, a] + num[x+1, a] + [x=a, a>=2] * num[a-1, a-1]

    so that halving it gives ``P_{n+1}(x, a)``.
    """
    m = num.shape[0]
    new = np.zeros((m + 1, m + 1), dtype=num.dtype)
    idx = np.arange(m)
    # walker moved up from x-1 (doubled at x=1: forced step out of 0)
    new[1:, :m] += num
    new[1, :m] += num[0, :]
    # an up-step from x=a raises the maximum; it is not a move inside column a
    new[idx + 1, idx] -= num[idx, idx]
    # walker moved down from x+1
    new[: m - 1, :m] += num[1:, :]
    # new maximum a reached from (a-1, a-1)
    a = np.arange(2, m + 1)
    new[a, a] += num[a - 1, a - 1]
    return new


def step_joint(t: JointTable) -> JointTable:
    """Advance a joint table by one step."""
    return JointTable(t.n + 1, _frozen(_advance(t.numerators)), t.log2_denominator + 1)


def _initial_numerators(dtype=object) -> np.ndarray:
    num = np.zeros((2, 2), dtype=dtype)
    num[1, 1] = 1
    return num


def iter_joint(n_max: int) -> Iterator[JointTable]:
    """Yield ``joint_distribution(1), ..., joint_distribution(n_max)``."""
    _check_n(n_max)
    num = _initial_numerators()
    for n in range(1, n_max + 1):
        if n > 1:
            num = _advance(num)
        yield JointTable(n, _frozen(num.copy()), n - 1)


def joint_distribution(n: int) -> JointTable:
    """Exact joint law after ``n`` steps, starting from ``P_1 = delta(1, 1)``."""
    _check_n(n)
    num = _initial_numerators()
    for _ in range(n - 1):
        num = _advance(num)
    return JointTable(n, _frozen(num), n - 1)


def marginal_position(t: JointTable) -> PosDist:
    col = t.numerators.sum(axis=1)
    return PosDist(
        t.n,
        {int(x): DyadicProb(int(v), t.log2_denominator) for x, v in enumerate(col) if v},
    )


def marginal_max(t: JointTable) -> MaxDist:
    row = t.numerators.sum(axis=0)
    return MaxDist(
        t.n,
        {int(a): DyadicProb(int(v), t.log2_denominator) for a, v in enumerate(row) if v},
        route="dp",
    )


# -- floating point mode -----------------------------------------------------

def joint_distribution_float(n: int) -> np.ndarray:
    """Same recursion in float64; returns the dense ``[x, a]`` probability array.

    Meant for large ``n`` where exact tables become expensive.
    """
    _check_n(n)
    p = _initial_numerators(np.float64)
    for _ in range(n - 1):
        p = 0.5 * _advance(p)
    return p


def max_distribution_float(n: int) -> MaxDist:
    q = joint_distribution_float(n).sum(axis=0)
    return MaxDist(n, {a: float(q[a]) for a in range(1, n + 1)}, route="float_dp")


# -- brute-force oracle ------------------------------------------------------

def _enumerate_chunk(n: int, lo: int, hi: int) -> np.ndarray:
    """Counts of final (x, a) over sign sequences with indices in [lo, hi)."""
    seq = np.arange(lo, hi, dtype=np.int64)
    pos = np.ones(hi - lo, dtype=np.int64)
    top = np.ones(hi - lo, dtype=np.int64)
    for k in range(n - 1):
        up = ((seq >> k) & 1).astype(bool) | (pos == 0)
        pos += np.where(up, 1, -1)
        np.maximum(top, pos, out=top)
    counts = np.bincount(pos * (n + 1) + top, minlength=(n + 1) ** 2)
    return counts.reshape(n + 1, n + 1)


def enumerate_paths_oracle(n: int, *, workers: int = 1, cap: int = ORACLE_CAP) -> JointTable:
    """Joint law by walking every sign sequence of length ``n - 1``.

    Each of the ``2**(n-1)`` sequences of fair coin flips for steps
    ``2..n`` is equally likely; at the origin the flip is ignored and the
    walker moves up. Counting final ``(x, a)`` pairs gives the exact law.
    """
    _check_n(n)
    if n > cap:
        raise ValueError(f"enumeration oracle is capped at n={cap}, got {n}")
    total = 1 << (n - 1)
    chunk = 1 << 18
    bounds = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _enumerate_chunk(n, *b), bounds))
    else:
        parts = [_enumerate_chunk(n, lo, hi) for lo, hi in bounds]
    counts = np.zeros((n + 1, n + 1), dtype=object)
    for part in parts:
        counts += part.astype(object)
    return JointTable(n, _frozen(counts), n - 1)
