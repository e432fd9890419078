"""Linear stability of warped-product Einstein manifolds."""

__version__ = "0.1.0"

from .blocks import BlockKind, Family, block_form, block_min, special_matrix
from .catalog import CATALOG, CatalogEntry, Flag, classify_entry
from .errors import (
    BudgetExceeded,
    InvalidState,
    NotFound,
    SolverError,
    ValidationError,
    WarpstabError,
)
from .model import BaseSpectrum, Kind, WarpModel, make_warp_model, validate_spectrum
from .radial import RadialForm, hardy_suite, make_mesh, min_rayleigh
from .verdict import Classification, MeshPolicy, StabilityVerdict, decide, find_destabilizer, strict_constant

__all__ = [
    "BaseSpectrum",
    "BlockKind",
    "BudgetExceeded",
    "CATALOG",
    "CatalogEntry",
    "Classification",
    "Family",
    "Flag",
    "InvalidState",
    "Kind",
    "MeshPolicy",
    "NotFound",
    "RadialForm",
    "SolverError",
    "StabilityVerdict",
    "ValidationError",
    "WarpModel",
    "WarpstabError",
    "block_form",
    "block_min",
    "classify_entry",
    "decide",
    "find_destabilizer",
    "hardy_suite",
    "make_mesh",
    "make_warp_model",
    "min_rayleigh",
    "special_matrix",
    "strict_constant",
    "validate_spectrum",
]
