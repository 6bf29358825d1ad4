"""Dense 2D grid fields, discrete differential operators, and normalization.

Grid convention used across the whole package: arrays are indexed
``[row, col]``; x increases with the column index and y with the row index
(image convention). Grid spacing is one cell, so all derivatives are in
grid-velocity units. Interior cells are those with all four neighbours on
the grid; derivative stencils are central on the interior and one-sided
first-order on the boundary.

Fields are immutable once constructed and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_SIZE = 4


class FieldError(Exception):
    """Base class for all flowedit errors."""


class InvalidField(FieldError):
    """Grid data violates a structural invariant (shape, finiteness, bounds)."""


class DegenerateField(FieldError):
    """An operation's required denominator (max norm, std, ...) is zero."""


class DimensionMismatch(FieldError):
    """Two fields that must share dimensions do not."""


class RegionTooSmall(FieldError):
    """A rectangular region spans fewer than 4x4 cells."""


def _as_grid(data, channels: int | None) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    want = 2 if channels is None else 3
    if arr.ndim != want or (channels is not None and arr.shape[-1] != channels):
        raise InvalidField(f"expected array of shape (H, W{', 2' if channels else ''}), got {arr.shape}")
    h, w = arr.shape[:2]
    if h < MIN_SIZE or w < MIN_SIZE:
        raise InvalidField(f"grid must be at least {MIN_SIZE}x{MIN_SIZE}, got {w}x{h}")
    if not np.isfinite(arr).all():
        raise InvalidField("grid contains non-finite values")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One value per cell, row-major. Hosts vorticity, divergence, potentials."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_grid(self.data, None))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return self.data[1:-1, 1:-1]

    @classmethod
    def zeros(cls, width: int, height: int) -> "ScalarField":
        return cls(np.zeros((height, width)))


@dataclass(frozen=True, eq=False)
class VectorField:
    """A (u, v) sample per cell; ``data[i, j] = (u, v)`` at x=j, y=i."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_grid(self.data, 2))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def u(self) -> np.ndarray:
        return self.data[:, :, 0]

    @property
    def v(self) -> np.ndarray:
        return self.data[:, :, 1]

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u, self.v)

    @classmethod
    def from_components(cls, u, v) -> "VectorField":
        return cls(np.stack([np.asarray(u, dtype=np.float64),
                             np.asarray(v, dtype=np.float64)], axis=-1))

    @classmethod
    def zeros(cls, width: int, height: int) -> "VectorField":
        return cls(np.zeros((height, width, 2)))


@dataclass(frozen=True)
class Rect:
    """Half-open cell rectangle: x in [x0, x1), y in [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def validate(self, width: int, height: int) -> None:
        if not (0 <= self.x0 < self.x1 <= width and 0 <= self.y0 < self.y1 <= height):
            raise InvalidField(f"rect {self} out of bounds for {width}x{height} grid")
        if self.x1 - self.x0 < MIN_SIZE or self.y1 - self.y0 < MIN_SIZE:
            raise RegionTooSmall(f"rect {self} spans less than {MIN_SIZE}x{MIN_SIZE} cells")

    def is_whole(self, width: int, height: int) -> bool:
        return (self.x0, self.y0, self.x1, self.y1) == (0, 0, width, height)


def ddx(a: np.ndarray) -> np.ndarray:
    """d/dx of a 2D array: central on the interior, one-sided on the edges."""
    out = np.empty_like(a)
    out[:, 1:-1] = 0.5 * (a[:, 2:] - a[:, :-2])
    out[:, 0] = a[:, 1] - a[:, 0]
    out[:, -1] = a[:, -1] - a[:, -2]
    return out


def ddy(a: np.ndarray) -> np.ndarray:
    """d/dy of a 2D array, same stencil policy as :func:`ddx`."""
    out = np.empty_like(a)
    out[1:-1, :] = 0.5 * (a[2:, :] - a[:-2, :])
    out[0, :] = a[1, :] - a[0, :]
    out[-1, :] = a[-1, :] - a[-2, :]
    return out


def divergence(f: VectorField) -> ScalarField:
    """du/dx + dv/dy."""
    return ScalarField(ddx(f.u) + ddy(f.v))


def curl2d(f: VectorField) -> ScalarField:
    """Scalar vorticity dv/dx - du/dy."""
    return ScalarField(ddx(f.v) - ddy(f.u))


def gradient(s: ScalarField) -> VectorField:
    """(ds/dx, ds/dy)."""
    return VectorField.from_components(ddx(s.data), ddy(s.data))


def perpendicular_gradient(s: ScalarField) -> VectorField:
    """(ds/dy, -ds/dx): the velocity induced by a stream function.

    For any scalar s this field has exactly zero central-difference
    divergence on all interior cells, because the mixed central
    differences commute; the construction is the backbone of the
    divergence-free guarantees elsewhere in the package.
    """
    return VectorField.from_components(ddy(s.data), -ddx(s.data))


def normalize_field(f: VectorField, mode: str = "max-norm") -> VectorField:
    """Rescale a field.

    ``max-norm`` divides both components by the maximum vector magnitude
    (the result has max magnitude 1). ``z-score`` maps each channel to
    mean 0 and std 1 independently; note that per-channel scaling does
    not preserve curl- or divergence-freeness.
    """
    if mode == "max-norm":
        m = float(f.magnitude().max())
        if m == 0.0:
            raise DegenerateField("cannot max-norm normalize an all-zero field")
        return VectorField(f.data / m)
    if mode == "z-score":
        mean = f.data.mean(axis=(0, 1))
        std = f.data.std(axis=(0, 1))
        if np.any(std == 0.0):
            raise DegenerateField("z-score requires nonzero per-channel std")
        return VectorField((f.data - mean) / std)
    raise ValueError(f"unknown normalization mode {mode!r}")


def interior_mean_abs(s: ScalarField) -> float:
    """Mean |value| over interior cells."""
    return float(np.mean(np.abs(s.interior)))


def interior_mean_square(s: ScalarField) -> float:
    """Mean value^2 over interior cells."""
    return float(np.mean(s.interior ** 2))


def interior_rms(s: ScalarField) -> float:
    """Root-mean-square over interior cells."""
    return float(np.sqrt(interior_mean_square(s)))
