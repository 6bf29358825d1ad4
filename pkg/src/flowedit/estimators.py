"""Scikit-learn compatible wrappers around the core field operations.

The decomposition, extraction, normalization and projection operations are
all transform-shaped (one field in, one field out), so they are exposed as
stateless transformers with the standard fit/transform/get_params surface
and can sit in sklearn pipelines. Inputs are (H, W, 2) arrays or
VectorField instances; outputs are float64 arrays of the same shape.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .fields import normalize_field
from .hhd import COMPONENT_NAMES, ComponentMask, decompose, recompose
from .poisson import SolveOptions
from .sim import project_incompressible
from .sketch import SketchImage, sketch_to_field_baseline
from .validation import as_vector_field


class FieldNormalizer(BaseEstimator, TransformerMixin):
    """Normalize a field by max magnitude or per-channel z-score."""

    def __init__(self, mode="max-norm"):
        self.mode = mode

    def fit(self, X, y=None):
        as_vector_field(X)
        return self

    def transform(self, X):
        return normalize_field(as_vector_field(X), self.mode).data


class ComponentExtractor(BaseEstimator, TransformerMixin):
    """Whole-field decomposition edit: keep a subset of the components.

    ``keep`` is any subset of ("curl_free", "div_free", "harmonic");
    keeping all three reproduces the input.
    """

    def __init__(self, keep=("div_free",), tolerance=1e-10):
        self.keep = keep
        self.tolerance = tolerance

    def _mask(self) -> ComponentMask:
        return ComponentMask.from_names(self.keep)

    def fit(self, X, y=None):
        self._mask()
        as_vector_field(X)
        return self

    def transform(self, X):
        f = as_vector_field(X)
        result = decompose(f, SolveOptions(tolerance=self.tolerance))
        return recompose(result, self._mask()).data


class IncompressibleProjector(BaseEstimator, TransformerMixin):
    """Project a velocity field onto the divergence-free subspace."""

    def __init__(self, tolerance=1e-10):
        self.tolerance = tolerance

    def fit(self, X, y=None):
        as_vector_field(X)
        return self

    def transform(self, X):
        f = as_vector_field(X)
        return project_incompressible(f, SolveOptions(tolerance=self.tolerance)).data


class SketchFieldGenerator(BaseEstimator):
    """Predict-shaped provider: binary sketch raster in, unit field out."""

    def __init__(self, tolerance=1e-10):
        self.tolerance = tolerance

    def fit(self, X=None, y=None):
        return self

    def predict(self, X, strokes=None):
        img = X if isinstance(X, SketchImage) else SketchImage(np.asarray(X, dtype=np.uint8))
        field = sketch_to_field_baseline(img, strokes=strokes,
                                         opts=SolveOptions(tolerance=self.tolerance))
        return field.data


__all__ = [
    "FieldNormalizer",
    "ComponentExtractor",
    "IncompressibleProjector",
    "SketchFieldGenerator",
    "COMPONENT_NAMES",
]
