"""Pseudo-sketch synthesis and a deterministic sketch-to-field baseline.

Pseudo-sketches are binary 256x256 rasters of traced streamlines; they
stand in for hand-drawn input when building (sketch, field) pairs. The
baseline generator inverts the process without any learned model: stroke
tangents are diffused over the grid by two Poisson solves and the result
is unit-normalized. Any other generator can be plugged in behind the same
"sketch in, field out" contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .fields import FieldError, InvalidField, ScalarField, VectorField, ddx, ddy
from .poisson import (
    NotConverged,
    SolveOptions,
    SolveReport,
    conjugate_gradient,
    negated_laplacian_matrix,
)

SKETCH_SIZE = 256
OCCUPANCY_CELLS = 30
STAGNATION_SPEED = 1e-6

TERMINATION_REASONS = ("domain-exit", "max-length", "stagnation", "proximity")


class EmptySketch(FieldError):
    """Sketch has no foreground pixels."""


@dataclass(frozen=True, eq=False)
class SketchImage:
    """Binary 1-channel 256x256 raster; foreground 255 on background 0."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.shape != (SKETCH_SIZE, SKETCH_SIZE) or arr.dtype != np.uint8:
            raise InvalidField(f"sketch must be uint8 {SKETCH_SIZE}x{SKETCH_SIZE}, "
                               f"got {arr.dtype} {arr.shape}")
        if not np.isin(arr, (0, 255)).all():
            raise InvalidField("sketch values must be 0 or 255")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def foreground_fraction(self) -> float:
        return float(np.count_nonzero(self.data)) / self.data.size


@dataclass(frozen=True, eq=False)
class Streamline:
    """Ordered sub-cell positions (x, y) in field coordinates."""

    points: np.ndarray  # (n, 2) float64
    terminated_by: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise InvalidField("a streamline needs at least two (x, y) points")
        if self.terminated_by not in TERMINATION_REASONS:
            raise InvalidField(f"unknown termination reason {self.terminated_by!r}")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


def trace_streamlines(f: VectorField, density: int = 8, step: float = 0.25,
                      max_steps: int = 1000) -> list[Streamline]:
    """Trace streamlines from a uniform seed lattice.

    Seeds lie on a density x density lattice. Each is integrated forward
    and backward with RK4 on the direction field (the bilinearly
    interpolated velocity, normalized to unit length), so consecutive
    points are at most ``step`` apart. A trace stops on domain exit, after
    max_steps steps per direction, when the local speed drops below 1e-6,
    or when it enters a cell of a 30x30 occupancy mask already covered by
    a line (streamplot-style thinning). Seeds whose mask cell is taken are
    skipped. Traces shorter than two points are dropped.
    """
    if density < 1:
        raise ValueError("density must be at least 1")
    if step <= 0 or max_steps < 1:
        raise ValueError("step must be positive and max_steps at least 1")
    w, h = f.width, f.height
    u_arr, v_arr = f.u, f.v
    x_hi, y_hi = float(w - 1), float(h - 1)

    def sample(x: float, y: float) -> tuple[float, float]:
        if x < 0.0:
            x = 0.0
        elif x > x_hi:
            x = x_hi
        if y < 0.0:
            y = 0.0
        elif y > y_hi:
            y = y_hi
        x0 = min(int(x), w - 2)
        y0 = min(int(y), h - 2)
        fx, fy = x - x0, y - y0
        w00 = (1.0 - fx) * (1.0 - fy)
        w01 = fx * (1.0 - fy)
        w10 = (1.0 - fx) * fy
        w11 = fx * fy
        su = (w00 * u_arr[y0, x0] + w01 * u_arr[y0, x0 + 1]
              + w10 * u_arr[y0 + 1, x0] + w11 * u_arr[y0 + 1, x0 + 1])
        sv = (w00 * v_arr[y0, x0] + w01 * v_arr[y0, x0 + 1]
              + w10 * v_arr[y0 + 1, x0] + w11 * v_arr[y0 + 1, x0 + 1])
        return float(su), float(sv)

    def direction(x: float, y: float, sign: float):
        su, sv = sample(x, y)
        speed = np.hypot(su, sv)
        if speed < STAGNATION_SPEED:
            return None
        return sign * su / speed, sign * sv / speed

    occ = np.zeros((OCCUPANCY_CELLS, OCCUPANCY_CELLS), dtype=bool)

    def cell_of(x: float, y: float) -> tuple[int, int]:
        cx = min(int(x * OCCUPANCY_CELLS / w), OCCUPANCY_CELLS - 1)
        cy = min(int(y * OCCUPANCY_CELLS / h), OCCUPANCY_CELLS - 1)
        return cy, cx

    def inside(x: float, y: float) -> bool:
        return 0.0 <= x <= x_hi and 0.0 <= y <= y_hi

    def trace(x: float, y: float, sign: float):
        pts: list[tuple[float, float]] = []
        cur = cell_of(x, y)
        reason = "max-length"
        for _ in range(max_steps):
            d1 = direction(x, y, sign)
            if d1 is None:
                reason = "stagnation"
                break
            half = 0.5 * step
            d2 = direction(x + half * d1[0], y + half * d1[1], sign)
            d3 = direction(x + half * d2[0], y + half * d2[1], sign) if d2 else None
            d4 = direction(x + step * d3[0], y + step * d3[1], sign) if d3 else None
            if d4 is None:
                reason = "stagnation"
                break
            nx = x + step * (d1[0] + 2.0 * d2[0] + 2.0 * d3[0] + d4[0]) / 6.0
            ny = y + step * (d1[1] + 2.0 * d2[1] + 2.0 * d3[1] + d4[1]) / 6.0
            if not inside(nx, ny):
                cx = min(max(nx, 0.0), x_hi)
                cy = min(max(ny, 0.0), y_hi)
                if (cx, cy) != (x, y):
                    pts.append((cx, cy))
                reason = "domain-exit"
                break
            nxt = cell_of(nx, ny)
            if nxt != cur:
                if occ[nxt]:
                    reason = "proximity"
                    break
                occ[nxt] = True
                cur = nxt
            pts.append((nx, ny))
            x, y = nx, ny
        return pts, reason

    seeds_x = np.linspace(0.0, x_hi, density + 2)[1:-1]
    seeds_y = np.linspace(0.0, y_hi, density + 2)[1:-1]
    lines: list[Streamline] = []
    for sy in seeds_y:
        for sx in seeds_x:
            seed_cell = cell_of(sx, sy)
            if occ[seed_cell]:
                continue
            occ[seed_cell] = True
            fwd, fwd_reason = trace(float(sx), float(sy), 1.0)
            bwd, bwd_reason = trace(float(sx), float(sy), -1.0)
            points = bwd[::-1] + [(float(sx), float(sy))] + fwd
            if len(points) < 2:
                continue
            lines.append(Streamline(np.array(points),
                                    fwd_reason if fwd else bwd_reason))
    return lines


def _segment_pixels(x0: float, y0: float, x1: float, y1: float) -> tuple[np.ndarray, np.ndarray]:
    """Integer pixels along a segment (8-connected, endpoints included)."""
    n = int(max(abs(x1 - x0), abs(y1 - y0))) + 1
    xs = np.rint(np.linspace(x0, x1, n + 1)).astype(np.intp)
    ys = np.rint(np.linspace(y0, y1, n + 1)).astype(np.intp)
    return xs, ys


def rasterize_sketch(lines, field_width: int = SKETCH_SIZE,
                     field_height: int = SKETCH_SIZE) -> SketchImage:
    """Rasterize streamlines as 1-pixel polylines on a 256x256 canvas.

    Field coordinates are scaled so the full grid covers the canvas; with
    a 256x256 field the mapping is the identity.
    """
    img = np.zeros((SKETCH_SIZE, SKETCH_SIZE), dtype=np.uint8)
    sx = SKETCH_SIZE / field_width
    sy = SKETCH_SIZE / field_height
    for line in lines:
        pts = line.points
        px = np.clip((pts[:, 0] + 0.5) * sx - 0.5, 0, SKETCH_SIZE - 1)
        py = np.clip((pts[:, 1] + 0.5) * sy - 0.5, 0, SKETCH_SIZE - 1)
        for k in range(len(pts) - 1):
            xs, ys = _segment_pixels(px[k], py[k], px[k + 1], py[k + 1])
            img[ys, xs] = 255
    return SketchImage(img)


def strokes_to_sketch(strokes) -> SketchImage:
    """Rasterize raw polyline strokes (sketch pixel coordinates)."""
    img = np.zeros((SKETCH_SIZE, SKETCH_SIZE), dtype=np.uint8)
    for stroke in strokes:
        pts = np.asarray(stroke, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise InvalidField("each stroke needs at least two (x, y) points")
        pts = np.clip(pts, 0, SKETCH_SIZE - 1)
        for k in range(len(pts) - 1):
            xs, ys = _segment_pixels(pts[k, 0], pts[k, 1], pts[k + 1, 0], pts[k + 1, 1])
            img[ys, xs] = 255
    return SketchImage(img)


def _stroke_tangents(strokes) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel mean stroke direction; orientation follows draw order."""
    tangents = np.zeros((SKETCH_SIZE, SKETCH_SIZE, 2))
    counts = np.zeros((SKETCH_SIZE, SKETCH_SIZE))
    for stroke in strokes:
        pts = np.clip(np.asarray(stroke, dtype=np.float64), 0, SKETCH_SIZE - 1)
        for k in range(len(pts) - 1):
            dx, dy = pts[k + 1] - pts[k]
            norm = np.hypot(dx, dy)
            if norm == 0.0:
                continue
            xs, ys = _segment_pixels(pts[k, 0], pts[k, 1], pts[k + 1, 0], pts[k + 1, 1])
            tangents[ys, xs, 0] += dx / norm
            tangents[ys, xs, 1] += dy / norm
            counts[ys, xs] += 1.0
    return tangents, counts


def _image_tangents(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Structure-tensor stroke orientation for raster-only input.

    Undirected strokes leave a sign ambiguity; it is resolved toward
    positive x (ties toward positive y), so reconstructed directions can
    be flipped relative to the original flow.
    """
    fg = img > 0
    smooth = ndimage.gaussian_filter(fg.astype(np.float64), 1.0)
    gx, gy = ddx(smooth), ddy(smooth)
    jxx = ndimage.gaussian_filter(gx * gx, 2.0)
    jyy = ndimage.gaussian_filter(gy * gy, 2.0)
    jxy = ndimage.gaussian_filter(gx * gy, 2.0)
    # gradients are normal to a stroke; the tangent is the 90-degree turn
    # of the structure tensor's dominant orientation
    theta = 0.5 * np.arctan2(2.0 * jxy, jxx - jyy) + 0.5 * np.pi
    tx, ty = np.cos(theta), np.sin(theta)
    flip = (tx < 0) | ((tx == 0) & (ty < 0))
    tx = np.where(flip, -tx, tx)
    ty = np.where(flip, -ty, ty)
    tangents = np.zeros((SKETCH_SIZE, SKETCH_SIZE, 2))
    tangents[fg, 0] = tx[fg]
    tangents[fg, 1] = ty[fg]
    return tangents, fg.astype(np.float64)


def sketch_to_field_baseline(img: SketchImage, strokes=None,
                             opts: SolveOptions | None = None) -> VectorField:
    """Deterministic non-ML sketch-to-field generator.

    Stroke tangents (from polyline draw order when strokes are given,
    from the image structure tensor otherwise) are held fixed at stroke
    pixels and diffused into the rest of the grid by solving one Laplace
    problem per component with zero-Dirichlet ghost boundaries. The output
    is per-vector unit normalized: sketches carry no magnitude
    information, so none is invented.
    """
    opts = opts or SolveOptions()
    if strokes:
        tangents, counts = _stroke_tangents(strokes)
        if not counts.any():
            raise EmptySketch("strokes cover no pixels")
    else:
        if not img.data.any():
            raise EmptySketch("sketch has no foreground pixels")
        tangents, counts = _image_tangents(img.data)

    constrained = counts > 0
    norm = np.hypot(tangents[:, :, 0], tangents[:, :, 1])
    nz = constrained & (norm > 1e-12)
    for ch in range(2):
        tangents[:, :, ch] = np.where(nz, tangents[:, :, ch] / np.where(nz, norm, 1.0), 0.0)

    n = SKETCH_SIZE * SKETCH_SIZE
    neg_lap = negated_laplacian_matrix(SKETCH_SIZE, SKETCH_SIZE).tocsc()
    fixed = np.flatnonzero(constrained.ravel())
    free = np.flatnonzero(~constrained.ravel())
    a_ff = neg_lap[:, free].tocsr()[free, :].tocsr()
    a_fk = neg_lap[:, fixed].tocsr()[free, :].tocsr()
    max_it = opts.resolve_max_iterations(SKETCH_SIZE, SKETCH_SIZE)

    out = np.zeros((n, 2))
    for ch in range(2):
        t_fixed = tangents[:, :, ch].ravel()[fixed]
        rhs = -(a_fk @ t_fixed)
        x, iterations, residual, converged = conjugate_gradient(
            a_ff, rhs, opts.tolerance, max_it)
        if not converged:
            report = SolveReport(iterations=iterations, final_residual=residual,
                                 converged=False)
            raise NotConverged(report, ScalarField.zeros(SKETCH_SIZE, SKETCH_SIZE))
        out[free, ch] = x
        out[fixed, ch] = t_fixed

    field = out.reshape(SKETCH_SIZE, SKETCH_SIZE, 2)
    mag = np.hypot(field[:, :, 0], field[:, :, 1])
    pos = mag > 1e-12
    for ch in range(2):
        field[:, :, ch] = np.where(pos, field[:, :, ch] / np.where(pos, mag, 1.0), 0.0)
    return VectorField(field)


def parse_strokes(text: str) -> list[np.ndarray]:
    """Parse the stroke record format: one stroke per line, points as x,y."""
    strokes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        points = []
        for token in line.split():
            try:
                x, y = token.split(",")
                points.append((float(x), float(y)))
            except ValueError as exc:
                raise InvalidField(f"stroke line {lineno}: bad point {token!r}") from exc
        if len(points) < 2:
            raise InvalidField(f"stroke line {lineno}: needs at least two points")
        strokes.append(np.array(points))
    return strokes


def format_strokes(strokes) -> str:
    lines = []
    for stroke in strokes:
        pts = np.asarray(stroke, dtype=np.float64)
        lines.append(" ".join(f"{x:g},{y:g}" for x, y in pts))
    return "\n".join(lines) + ("\n" if lines else "")
