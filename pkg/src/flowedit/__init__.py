"""flowedit: design and edit 2D vector fields with explicit physical properties."""

from .fields import (
    DegenerateField,
    DimensionMismatch,
    FieldError,
    InvalidField,
    Rect,
    RegionTooSmall,
    ScalarField,
    VectorField,
    curl2d,
    divergence,
    gradient,
    normalize_field,
    perpendicular_gradient,
)
from .hhd import (
    ComponentMask,
    EditRequest,
    HHDResult,
    apply_edit_sequence,
    curl_free_part,
    decompose,
    divergence_free_part,
    edit_region,
)
from .io import read_field, read_scalar, write_field, write_scalar
from .poisson import NotConverged, SolveOptions, SolveReport, apply_laplacian, solve_poisson
from .sim import Inflow, SmokeState, advect_semi_lagrangian, project_incompressible, step_smoke
from .sketch import SketchImage, Streamline, rasterize_sketch, sketch_to_field_baseline, trace_streamlines

__version__ = "0.1.0"

__all__ = [
    "ComponentMask",
    "DegenerateField",
    "DimensionMismatch",
    "EditRequest",
    "FieldError",
    "HHDResult",
    "Inflow",
    "InvalidField",
    "NotConverged",
    "Rect",
    "RegionTooSmall",
    "ScalarField",
    "SketchImage",
    "SmokeState",
    "SolveOptions",
    "SolveReport",
    "Streamline",
    "VectorField",
    "advect_semi_lagrangian",
    "apply_edit_sequence",
    "apply_laplacian",
    "curl2d",
    "curl_free_part",
    "decompose",
    "divergence",
    "divergence_free_part",
    "edit_region",
    "gradient",
    "normalize_field",
    "perpendicular_gradient",
    "project_incompressible",
    "rasterize_sketch",
    "read_field",
    "read_scalar",
    "sketch_to_field_baseline",
    "solve_poisson",
    "step_smoke",
    "trace_streamlines",
    "write_field",
    "write_scalar",
    "__version__",
]
