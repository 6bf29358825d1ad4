import numpy as np
import pytest

from flowedit.fields import ScalarField, VectorField


def smooth_scalar(seed, width, height, modes=6):
    """Band-limited random scalar grid, deterministic in seed."""
    rng = np.random.default_rng(seed)
    X, Y = np.meshgrid(np.linspace(0.0, 1.0, width), np.linspace(0.0, 1.0, height))
    out = np.zeros((height, width))
    for _ in range(modes):
        kx, ky = rng.integers(1, 6, size=2)
        px, py = rng.uniform(0.0, 2.0 * np.pi, size=2)
        out += rng.normal() * np.sin(2 * np.pi * kx * X + px) * np.sin(2 * np.pi * ky * Y + py)
    return out


def smooth_field(seed, width, height):
    """Random smooth vector field with O(1) magnitudes."""
    u = smooth_scalar(seed * 2 + 1, width, height)
    v = smooth_scalar(seed * 2 + 2, width, height)
    return VectorField.from_components(u, v)


def rough_field(seed, width, height):
    """White-noise vector field (worst case for solvers)."""
    rng = np.random.default_rng(seed)
    return VectorField(rng.normal(size=(height, width, 2)))


@pytest.fixture
def field_16():
    return smooth_field(100, 16, 16)


@pytest.fixture
def field_64():
    return smooth_field(200, 64, 64)


def solid_rotation(width, height):
    """(-(y - cy), x - cx): constant vorticity 2, exactly divergence-free."""
    X, Y = np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    return VectorField.from_components(-(Y - cy), X - cx)


def radial_source(width, height):
    """(x - cx, y - cy): constant divergence 2, exactly curl-free."""
    X, Y = np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    return VectorField.from_components(X - cx, Y - cy)


def scalar_of(arr):
    return ScalarField(np.asarray(arr, dtype=float))
