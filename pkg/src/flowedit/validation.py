"""Input validation and coercion helpers shared by estimators and services."""

from __future__ import annotations

import numpy as np

from .fields import InvalidField, Rect, ScalarField, VectorField


def as_vector_field(x) -> VectorField:
    """Accept a VectorField or an (H, W, 2) array-like."""
    if isinstance(x, VectorField):
        return x
    return VectorField(np.asarray(x, dtype=np.float64))


def as_scalar_field(x) -> ScalarField:
    """Accept a ScalarField or an (H, W) array-like."""
    if isinstance(x, ScalarField):
        return x
    return ScalarField(np.asarray(x, dtype=np.float64))


def as_rect(value, width: int, height: int) -> Rect:
    """Accept a Rect, a (x0, y0, x1, y1) tuple, or a mapping; validate it."""
    if isinstance(value, Rect):
        rect = value
    elif isinstance(value, dict):
        try:
            rect = Rect(int(value["x0"]), int(value["y0"]),
                        int(value["x1"]), int(value["y1"]))
        except KeyError as exc:
            raise InvalidField(f"rect mapping missing key {exc}") from exc
    else:
        try:
            x0, y0, x1, y1 = value
        except (TypeError, ValueError) as exc:
            raise InvalidField(f"cannot interpret {value!r} as a rect") from exc
        rect = Rect(int(x0), int(y0), int(x1), int(y1))
    rect.validate(width, height)
    return rect
