"""Exact and asymptotic laws for the running maximum of a reflected walk."""

from .closed_form import first_passage_pmf, max_distribution, max_moments, max_pmf, position_pmf
from .core_model import (
    JointTable,
    MaxDist,
    PosDist,
    joint_distribution,
    marginal_max,
    marginal_position,
)
from .dyadic import DyadicProb

__all__ = [
    "DyadicProb",
    "JointTable",
    "MaxDist",
    "PosDist",
    "first_passage_pmf",
    "joint_distribution",
    "marginal_max",
    "marginal_position",
    "max_distribution",
    "max_moments",
    "max_pmf",
    "position_pmf",
]
