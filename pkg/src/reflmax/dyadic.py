"""Exact probabilities with power-of-two denominators."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

__all__ = ["DyadicProb"]


@dataclass(frozen=True)
class DyadicProb:
    """A probability ``numerator / 2**log2_denominator``.

    Instances are always stored in canonical form (odd numerator, or zero
    with a zero exponent), so ``==`` and ``hash`` are structural.
    """

    numerator: int
    log2_denominator: int = 0

    def __post_init__(self) -> None:
        num, d = self.numerator, self.log2_denominator
        if not isinstance(num, int) or not isinstance(d, int):
            raise TypeError("numerator and log2_denominator must be int")
        if num < 0 or d < 0:
            raise ValueError("numerator and log2_denominator must be non-negative")
        if num > (1 << d):
            raise ValueError(f"{num}/2^{d} exceeds 1")
        if num == 0:
            d = 0
        else:
            shift = min((num & -num).bit_length() - 1, d)
            num >>= shift
            d -= shift
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "log2_denominator", d)

    @classmethod
    def from_fraction(cls, value: Fraction | int) -> "DyadicProb":
        value = Fraction(value)
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not dyadic")
        return cls(value.numerator, den.bit_length() - 1)

    @classmethod
    def sum(cls, items: Iterable["DyadicProb"]) -> "DyadicProb":
        items = list(items)
        if not items:
            return ZERO
        d = max(p.log2_denominator for p in items)
        return cls(sum(p.numerator << (d - p.log2_denominator) for p in items), d)

    def __add__(self, other: "DyadicProb") -> "DyadicProb":
        if not isinstance(other, DyadicProb):
            return NotImplemented
        d = max(self.log2_denominator, other.log2_denominator)
        return DyadicProb(
            (self.numerator << (d - self.log2_denominator))
            + (other.numerator << (d - other.log2_denominator)),
            d,
        )

    def half(self) -> "DyadicProb":
        return DyadicProb(self.numerator, self.log2_denominator + 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.log2_denominator)

    def __float__(self) -> float:
        # Fraction -> float is correctly rounded even for huge exponents.
        return float(self.to_fraction())

    def __lt__(self, other: "DyadicProb") -> bool:
        return self.to_fraction() < other.to_fraction()

    def __le__(self, other: "DyadicProb") -> bool:
        return self.to_fraction() <= other.to_fraction()

    def __bool__(self) -> bool:
        return self.numerator != 0

    def __str__(self) -> str:
        if self.log2_denominator == 0:
            return str(self.numerator)
        return f"{self.numerator}/2^{self.log2_denominator}"


ZERO = DyadicProb(0)
ONE = DyadicProb(1)
