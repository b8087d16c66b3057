"""Rationally extended non-central potentials built from exceptional orthogonal polynomials."""
from ._jit import backend
from .extensions import (
    AdmissibilityError,
    DegenerateError,
    DerivedParams,
    MissingLevelError,
    ParityError,
    PotentialSpec,
    RankError,
    SectorSolution,
    SectorVariant,
    SingularDenominatorError,
    sector_solution,
)
from .orthopoly import CoeffPoly, jacobi_eval, laguerre_eval

__version__ = "0.1.0"
