"""Evaluation metrics: reconstruction accuracy and physical-property scores.

Pairwise metrics (mse, rmse, ssim_cos, vpe, sfe) compare a field under
evaluation ``a`` against a reference ``b``; single-field metrics (cme, cs)
score physical properties of one field on interior cells, consistent with
the boundary-stencil policy of the differential operators.
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dataclass_fields

import numpy as np
from scipy import ndimage

from .fields import (
    DegenerateField,
    DimensionMismatch,
    ScalarField,
    VectorField,
    curl2d,
    divergence,
    interior_mean_abs,
    interior_mean_square,
)
from .hhd import divergence_free_part
from .poisson import SolveOptions, solve_poisson

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
COSINE_MIN_MAGNITUDE = 1e-8

METRIC_NAMES = ("mse", "rmse", "ssim_cos", "cme", "vpe", "cs", "sfe")
PAIRWISE = {"mse", "rmse", "ssim_cos", "vpe", "sfe"}


@dataclass(frozen=True)
class MetricReport:
    mse: float | None = None
    rmse: float | None = None
    ssim_cos: float | None = None
    cme: float | None = None
    vpe: float | None = None
    cs: float | None = None
    sfe: float | None = None

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in dataclass_fields(self)
                if getattr(self, f.name) is not None}


def _check_pair(a: VectorField, b: VectorField) -> None:
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"fields are {a.width}x{a.height} vs {b.width}x{b.height}")


def mse(a: VectorField, b: VectorField) -> float:
    """Mean over all cells and both channels of the squared difference."""
    _check_pair(a, b)
    return float(np.mean((a.data - b.data) ** 2))


def rmse(a: VectorField, b: VectorField) -> float:
    return float(np.sqrt(mse(a, b)))


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    k = np.outer(g, g)
    return k / k.sum()


def ssim_cos(a: VectorField, b: VectorField) -> float:
    """Magnitude-image SSIM weighted by the mean cosine similarity.

    SSIM runs on the per-cell vector magnitudes with an 11x11 Gaussian
    window (sigma 1.5) and constants C1 = (0.01 L)^2, C2 = (0.03 L)^2 where
    L is the maximum magnitude across both fields. The result is multiplied
    by the mean cosine similarity over cells where both vectors have
    magnitude above 1e-8 (0 if no cell qualifies).
    """
    _check_pair(a, b)
    ma, mb = a.magnitude(), b.magnitude()
    level = float(max(ma.max(), mb.max()))
    if level == 0.0:
        raise DegenerateField("ssim_cos is undefined for two all-zero fields")

    c1 = (SSIM_K1 * level) ** 2
    c2 = (SSIM_K2 * level) ** 2
    win = _gaussian_window()
    filt = lambda img: ndimage.correlate(img, win, mode="reflect")
    mu_a, mu_b = filt(ma), filt(mb)
    var_a = filt(ma * ma) - mu_a * mu_a
    var_b = filt(mb * mb) - mu_b * mu_b
    cov = filt(ma * mb) - mu_a * mu_b
    ssim_map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2))
    ssim = float(np.mean(ssim_map))

    both = (ma > COSINE_MIN_MAGNITUDE) & (mb > COSINE_MIN_MAGNITUDE)
    if not both.any():
        return 0.0
    dots = a.u[both] * b.u[both] + a.v[both] * b.v[both]
    cosines = dots / (ma[both] * mb[both])
    return ssim * float(np.mean(cosines))


def cme(f: VectorField) -> float:
    """Curl magnitude error: mean |vorticity| over interior cells."""
    return interior_mean_abs(curl2d(f))


def cs(f: VectorField) -> float:
    """Continuity score: mean squared divergence over interior cells."""
    return interior_mean_square(divergence(f))


def _vorticity_potential(f: VectorField, opts: SolveOptions | None) -> ScalarField:
    alpha = curl2d(f)
    solution, _ = solve_poisson(ScalarField(-alpha.data), opts)
    return solution


def vpe(a: VectorField, b: VectorField, opts: SolveOptions | None = None) -> float:
    """Vector potential error.

    Both fields' vorticity potentials are recovered by solving
    ``L psi = -curl`` with the standard solver; the score is the unaveraged
    sum over cells of the squared potential difference.
    """
    _check_pair(a, b)
    pa = _vorticity_potential(a, opts)
    pb = _vorticity_potential(b, opts)
    return float(np.sum((pa.data - pb.data) ** 2))


def sfe(a: VectorField, b: VectorField, opts: SolveOptions | None = None) -> float:
    """Stream function error.

    Same score as :func:`vpe` but the stream functions are taken from the
    divergence-free extraction path.
    """
    _check_pair(a, b)
    _, psi_a, _ = divergence_free_part(a, opts)
    _, psi_b, _ = divergence_free_part(b, opts)
    return float(np.sum((psi_a.data - psi_b.data) ** 2))


def evaluate(a: VectorField, b: VectorField | None = None,
             which: tuple[str, ...] | None = None,
             opts: SolveOptions | None = None) -> MetricReport:
    """Compute a selection of metrics.

    ``a`` is the field under evaluation, ``b`` the reference; pairwise
    metrics require ``b``. cme and cs are computed on ``a``.
    """
    which = tuple(which) if which is not None else METRIC_NAMES
    unknown = set(which) - set(METRIC_NAMES)
    if unknown:
        raise ValueError(f"unknown metrics: {sorted(unknown)}")
    if b is None and PAIRWISE & set(which):
        raise ValueError("pairwise metrics need a reference field")
    values: dict[str, float] = {}
    for name in which:
        if name == "mse":
            values[name] = mse(a, b)
        elif name == "rmse":
            values[name] = rmse(a, b)
        elif name == "ssim_cos":
            values[name] = ssim_cos(a, b)
        elif name == "cme":
            values[name] = cme(a)
        elif name == "cs":
            values[name] = cs(a)
        elif name == "vpe":
            values[name] = vpe(a, b, opts)
        elif name == "sfe":
            values[name] = sfe(a, b, opts)
    return MetricReport(**values)


def format_report(report: MetricReport) -> str:
    """Flat key-value record, 6 significant digits, locale independent."""
    return "\n".join(f"{name} {value:.6g}" for name, value in report.as_dict().items())
