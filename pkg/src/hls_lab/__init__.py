"""Numerical checks of stability for the Hardy-Littlewood-Sobolev and
fractional Sobolev inequalities on the sphere, in the axially symmetric sector."""

from .bubbles import BubbleKind, BubbleParams, Constants, bubble_sphere, constants, critical_bubble
from .distance import Manifold, ProjectionResult, nearest_bubble_Lp, nearest_bubble_P
from .errors import ConfigurationError, DomainError, LiftOverflowError, PreconditionError, SingularityError
from .operators import apply_A2s, apply_P2s, apply_P2s_direct, hls_deficit, hls_residual, sobolev_residual
from .sphere import Params, ZonalField, ZonalGrid, build_grid

__version__ = "0.1.0"

__all__ = [
    "BubbleKind",
    "BubbleParams",
    "ConfigurationError",
    "Constants",
    "DomainError",
    "LiftOverflowError",
    "Manifold",
    "Params",
    "PreconditionError",
    "ProjectionResult",
    "SingularityError",
    "ZonalField",
    "ZonalGrid",
    "apply_A2s",
    "apply_P2s",
    "apply_P2s_direct",
    "bubble_sphere",
    "build_grid",
    "constants",
    "critical_bubble",
    "hls_deficit",
    "hls_residual",
    "nearest_bubble_Lp",
    "nearest_bubble_P",
    "sobolev_residual",
    "__version__",
]
