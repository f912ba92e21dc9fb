"""Normalized volumes of klt singularities: exact evaluation and numerical minimization."""

from .errors import (DomainError, GeometryError, NormVolError, NotKltError, RefusedError,
                     ValidationError)
from .hypersurface import WeightedHypersurface, a_family, e_family
from .minimizer import (MinimizerReport, OptimizerConfig, minimize_hypersurface, minimize_toric,
                        uniqueness_certificate)
from .toric import ToricSingularity, ToricValuation, from_cyclic_quotient

__version__ = "0.1.0"

__all__ = [
    "DomainError", "GeometryError", "NormVolError", "NotKltError", "RefusedError",
    "ValidationError", "WeightedHypersurface", "a_family", "e_family", "MinimizerReport",
    "OptimizerConfig", "minimize_hypersurface", "minimize_toric", "uniqueness_certificate",
    "ToricSingularity", "ToricValuation", "from_cyclic_quotient",
]
