"""sinhlab: equilibrium measures, exact biorthogonal polynomials and their
large-n asymptotics for the sinh^2 biorthogonal ensemble."""

from .conformal import SpectralCurve, build_curve
from .equilibrium import EquilibriumMeasure, Potential, build_measure, dmpk_measure, solve_c
from .errors import ComputeError, ConfigError, SinhLabError
from .kernels import BACKEND
from .numerics import PrecisionContext

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ComputeError",
    "ConfigError",
    "EquilibriumMeasure",
    "Potential",
    "PrecisionContext",
    "SinhLabError",
    "SpectralCurve",
    "build_curve",
    "build_measure",
    "dmpk_measure",
    "solve_c",
]
