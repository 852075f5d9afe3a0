"""Correlation measures of two intervals in quasiparticle excited states.

Reflected entropy, mutual information and logarithmic negativity of free
bosonic and fermionic chains, computed in non-orthonormal block bases, plus
the classical-particle limit and an exact-diagonalization cross-check.
"""

from .combinatorics import MomentumMultiset, MomentumSpec, MultisetError
from .measures import (
    InvariantViolation,
    MeasureSet,
    OrthoDensity,
    classical_closed_forms,
    compose_additive,
    compute_measures,
    measures_from_ortho,
)
from .model import Geometry, GeometryError, Statistics, alpha, gram_matrix
from .oracle import oracle_measures, oracle_suite, run_case
from .statebuilder import (
    ClassicalState,
    NonOrthoDensity,
    build_classical_density,
    build_density,
    build_quasiparticle_density,
)
from .sweeps import GeometryTemplate, StateSpec, additivity_report, extrapolate_L, sweep

__version__ = "0.1.0"


def measures(K, geometry: Geometry, stats) -> MeasureSet:
    """Measures of the state ``K`` (a multiset or string such as ``"1^2,3"``)."""
    stats = Statistics.parse(stats) if isinstance(stats, str) else stats
    if isinstance(K, str):
        K = MomentumSpec.parse(K).resolve(geometry.L)
    return compute_measures(build_density(K, geometry, stats))


__all__ = [
    "ClassicalState",
    "Geometry",
    "GeometryError",
    "GeometryTemplate",
    "InvariantViolation",
    "MeasureSet",
    "MomentumMultiset",
    "MomentumSpec",
    "MultisetError",
    "NonOrthoDensity",
    "OrthoDensity",
    "StateSpec",
    "Statistics",
    "additivity_report",
    "alpha",
    "build_classical_density",
    "build_density",
    "build_quasiparticle_density",
    "classical_closed_forms",
    "compose_additive",
    "compute_measures",
    "extrapolate_L",
    "gram_matrix",
    "measures",
    "measures_from_ortho",
    "oracle_measures",
    "oracle_suite",
    "run_case",
    "sweep",
]
