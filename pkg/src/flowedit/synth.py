"""Procedural vector-field synthesis and dataset generation.

Three generation strategies are provided: weighted combinations of basic
analytic patterns, short incompressible inflow simulations, and a
rule-based construction around a meandering main flow. On top of those,
six evaluation categories are built directly from scalar potentials,
stream functions, and affine harmonic fields, so each category satisfies
its defining physical property by discrete construction rather than by
filtering.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import ndimage

from .fields import (
    DegenerateField,
    InvalidField,
    ScalarField,
    VectorField,
    gradient,
    normalize_field,
    perpendicular_gradient,
)
from .io import field_to_bytes, pgm_to_bytes, quantize_field
from .sim import Inflow, advect_semi_lagrangian, project_incompressible

PATTERN_KINDS = ("convergent", "divergent", "vortex", "constant",
                 "rotated-constant", "saddle", "sine-wave")

#: Direction swing of the sine-wave pattern around its base angle, radians.
SINE_WAVE_SWING = np.pi / 4

CATEGORIES = ("irrotational", "incompressible", "harmonic",
              "irrotational+harmonic", "incompressible+harmonic", "all")

MAIN_DIRECTIONS = ("up", "down", "left", "right")


@dataclass(frozen=True)
class PatternSpec:
    kind: str
    center: tuple[float, float] | None = None  # defaults to the grid midpoint
    strength: float = 1.0
    angle: float = 0.0
    wavelength: float = 16.0

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        if not np.isfinite(self.strength):
            raise ValueError("strength must be finite")
        if self.wavelength < 2:
            raise ValueError("wavelength must be at least 2 cells")


def _mesh(width: int, height: int):
    return np.meshgrid(np.arange(width, dtype=np.float64),
                       np.arange(height, dtype=np.float64))


def basic_pattern(spec: PatternSpec, width: int, height: int) -> VectorField:
    """Evaluate one analytic pattern at the cell centers.

    Radial and vortex patterns are unit-magnitude away from the center;
    the singular cell at the center (if it falls on the grid) is zero.
    """
    X, Y = _mesh(width, height)
    cx, cy = spec.center if spec.center is not None else ((width - 1) / 2.0, (height - 1) / 2.0)
    s = spec.strength
    dx, dy = X - cx, Y - cy

    if spec.kind in ("convergent", "divergent", "vortex"):
        r = np.hypot(dx, dy)
        safe = np.where(r == 0.0, 1.0, r)
        ux, uy = dx / safe, dy / safe
        ux[r == 0.0] = 0.0
        uy[r == 0.0] = 0.0
        if spec.kind == "convergent":
            return VectorField.from_components(-s * ux, -s * uy)
        if spec.kind == "divergent":
            return VectorField.from_components(s * ux, s * uy)
        return VectorField.from_components(-s * uy, s * ux)

    if spec.kind in ("constant", "rotated-constant"):
        u = np.full((height, width), s * np.cos(spec.angle))
        v = np.full((height, width), s * np.sin(spec.angle))
        return VectorField.from_components(u, v)

    if spec.kind == "saddle":
        return VectorField.from_components(s * dx, -s * dy)

    # sine-wave: direction oscillates along the wave axis
    t = dx * np.cos(spec.angle) + dy * np.sin(spec.angle)
    theta = spec.angle + SINE_WAVE_SWING * np.sin(2.0 * np.pi * t / spec.wavelength)
    return VectorField.from_components(s * np.cos(theta), s * np.sin(theta))


def combine_patterns(specs: Sequence[tuple[PatternSpec, float]],
                     width: int, height: int) -> VectorField:
    """Weighted sum of basic patterns, max-norm normalized."""
    if not specs:
        raise ValueError("need at least one pattern")
    total = np.zeros((height, width, 2))
    for spec, weight in specs:
        total += weight * basic_pattern(spec, width, height).data
    if not total.any():
        raise DegenerateField("patterns cancel to an all-zero field")
    return normalize_field(VectorField(total), "max-norm")


def random_pattern_combination(seed, width: int, height: int,
                               n_patterns: int = 4) -> VectorField:
    """Seeded random weighted combination over all pattern kinds."""
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(n_patterns):
        kind = PATTERN_KINDS[rng.integers(len(PATTERN_KINDS))]
        spec = PatternSpec(
            kind=kind,
            center=(rng.uniform(0.15, 0.85) * (width - 1),
                    rng.uniform(0.15, 0.85) * (height - 1)),
            strength=rng.uniform(0.5, 1.5),
            angle=rng.uniform(0.0, 2.0 * np.pi),
            wavelength=rng.uniform(8.0, max(width, height) / 2.0),
        )
        specs.append((spec, rng.uniform(0.3, 1.0)))
    return combine_patterns(specs, width, height)


@dataclass(frozen=True)
class Tributary:
    attach: tuple[float, float]
    angle: float
    spread: float


@dataclass(frozen=True)
class RuleVortex:
    center: tuple[float, float]
    intensity: float
    radius: float


@dataclass(frozen=True)
class RuleSourceSink:
    center: tuple[float, float]
    scale: float
    intensity: float
    sign: int  # +1 source, -1 sink


@dataclass(frozen=True)
class RuleFieldSpec:
    main_direction: str = "right"
    meander_amplitude: float = 0.0
    meander_wavelength: float = 64.0
    main_width: float = 8.0
    main_intensity: float = 1.0
    tributaries: tuple[Tributary, ...] = ()
    vortices: tuple[RuleVortex, ...] = ()
    sources_sinks: tuple[RuleSourceSink, ...] = ()
    smoothing_sigma: float = 2.0

    def __post_init__(self):
        if self.main_direction not in MAIN_DIRECTIONS:
            raise ValueError(f"main_direction must be one of {MAIN_DIRECTIONS}")
        if self.main_width < 1:
            raise ValueError("main_width must be at least one cell")
        if self.smoothing_sigma < 0:
            raise ValueError("smoothing_sigma must be non-negative")


def _check_center(center, width, height, what):
    cx, cy = center
    if not (0 <= cx <= width - 1 and 0 <= cy <= height - 1):
        raise InvalidField(f"{what} center {center} outside {width}x{height} grid")


def rule_based_field(spec: RuleFieldSpec, width: int, height: int) -> VectorField:
    """Main flow band with meander, plus tributaries, vortices and sources.

    The construction is Gaussian-smoothed and every nonzero vector is then
    normalized to unit length, so magnitudes are in {0, 1} up to the
    smoothing transition band.
    """
    for t in spec.tributaries:
        _check_center(t.attach, width, height, "tributary")
    for v in spec.vortices:
        _check_center(v.center, width, height, "vortex")
    for s in spec.sources_sinks:
        _check_center(s.center, width, height, "source/sink")

    X, Y = _mesh(width, height)
    u = np.zeros((height, width))
    v = np.zeros((height, width))

    # main flow: centerline meanders sinusoidally along the flow axis and
    # the band velocity follows the local centerline tangent
    amp, lam = spec.meander_amplitude, spec.meander_wavelength
    if spec.main_direction in ("left", "right"):
        along, across = X, Y
        mid = (height - 1) / 2.0
    else:
        along, across = Y, X
        mid = (width - 1) / 2.0
    center = mid + amp * np.sin(2.0 * np.pi * along / lam)
    slope = amp * (2.0 * np.pi / lam) * np.cos(2.0 * np.pi * along / lam)
    band = np.abs(across - center) <= spec.main_width / 2.0
    norm = np.sqrt(1.0 + slope ** 2)
    if spec.main_direction == "right":
        tu, tv = 1.0 / norm, slope / norm
    elif spec.main_direction == "left":
        tu, tv = -1.0 / norm, -slope / norm
    elif spec.main_direction == "down":
        tu, tv = slope / norm, 1.0 / norm
    else:  # up
        tu, tv = -slope / norm, -1.0 / norm
    u += spec.main_intensity * np.where(band, tu, 0.0)
    v += spec.main_intensity * np.where(band, tv, 0.0)

    for t in spec.tributaries:
        w = np.exp(-((X - t.attach[0]) ** 2 + (Y - t.attach[1]) ** 2) / (2.0 * t.spread ** 2))
        u += spec.main_intensity * w * np.cos(t.angle)
        v += spec.main_intensity * w * np.sin(t.angle)

    for vx in spec.vortices:
        dx, dy = X - vx.center[0], Y - vx.center[1]
        r = np.hypot(dx, dy)
        safe = np.where(r == 0.0, 1.0, r)
        w = vx.intensity * np.exp(-((r / vx.radius) ** 2))
        u += w * (-dy / safe)
        v += w * (dx / safe)

    for ss in spec.sources_sinks:
        dx, dy = X - ss.center[0], Y - ss.center[1]
        r = np.hypot(dx, dy)
        safe = np.where(r == 0.0, 1.0, r)
        w = ss.sign * ss.intensity * np.exp(-((r / ss.scale) ** 2))
        u += w * (dx / safe)
        v += w * (dy / safe)

    if spec.smoothing_sigma > 0:
        u = ndimage.gaussian_filter(u, spec.smoothing_sigma, mode="nearest")
        v = ndimage.gaussian_filter(v, spec.smoothing_sigma, mode="nearest")

    mag = np.hypot(u, v)
    nz = mag > 1e-12
    u = np.where(nz, u / np.where(nz, mag, 1.0), 0.0)
    v = np.where(nz, v / np.where(nz, mag, 1.0), 0.0)
    return VectorField.from_components(u, v)


def random_rule_field(seed, width: int, height: int) -> VectorField:
    """Seeded random rule-based field."""
    rng = np.random.default_rng(seed)
    def point():
        return (rng.uniform(0.1, 0.9) * (width - 1), rng.uniform(0.1, 0.9) * (height - 1))
    spec = RuleFieldSpec(
        main_direction=MAIN_DIRECTIONS[rng.integers(4)],
        meander_amplitude=rng.uniform(0.0, height / 8.0),
        meander_wavelength=rng.uniform(width / 2.0, 2.0 * width),
        main_width=rng.uniform(4.0, height / 4.0),
        main_intensity=rng.uniform(0.5, 1.5),
        tributaries=tuple(Tributary(point(), rng.uniform(0, 2 * np.pi), rng.uniform(3, 10))
                          for _ in range(rng.integers(0, 3))),
        vortices=tuple(RuleVortex(point(), rng.uniform(0.3, 1.2), rng.uniform(4, 16))
                       for _ in range(rng.integers(0, 3))),
        sources_sinks=tuple(RuleSourceSink(point(), rng.uniform(3, 12),
                                           rng.uniform(0.3, 1.0), int(rng.choice([-1, 1])))
                            for _ in range(rng.integers(0, 3))),
        smoothing_sigma=rng.uniform(1.0, 3.0),
    )
    return rule_based_field(spec, width, height)


@dataclass(frozen=True)
class InflowScenario:
    regions: tuple[Inflow, ...]
    steps: int = 150
    dt: float = 0.5

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


def simulate_inflow(scenario: InflowScenario, width: int, height: int,
                    opts=None) -> list[VectorField]:
    """Velocity sequence of an inflow-driven incompressible simulation.

    Each step imposes the inflow velocities inside their circles, advects
    the velocity semi-Lagrangian style, and projects; the post-projection
    field of every step is returned.
    """
    for region in scenario.regions:
        _check_center(region.center, width, height, "inflow")
    vel = VectorField.zeros(width, height)
    frames = []
    X, Y = _mesh(width, height)
    for _ in range(scenario.steps):
        data = vel.data.copy()
        for region in scenario.regions:
            cx, cy = region.center
            mask = (X - cx) ** 2 + (Y - cy) ** 2 <= region.radius ** 2
            data[mask, 0] = region.speed * np.cos(region.angle)
            data[mask, 1] = region.speed * np.sin(region.angle)
        vel = VectorField(data)
        if vel.data.any():
            vel = advect_semi_lagrangian(vel, vel, scenario.dt)
            vel = project_incompressible(vel, opts)
        frames.append(vel)
    return frames


def _random_smooth_scalar(rng, width: int, height: int, max_modes: int = 8) -> np.ndarray:
    """Band-limited random scalar: a few low-frequency sinusoidal modes."""
    X, Y = np.meshgrid(np.linspace(0.0, 1.0, width), np.linspace(0.0, 1.0, height))
    out = np.zeros((height, width))
    for _ in range(int(rng.integers(3, max_modes + 1))):
        kx, ky = rng.integers(1, 7, size=2)
        px, py = rng.uniform(0.0, 2.0 * np.pi, size=2)
        out += rng.normal() * np.sin(2.0 * np.pi * kx * X + px) * np.sin(2.0 * np.pi * ky * Y + py)
    return out


def _random_affine_harmonic(rng, width: int, height: int) -> np.ndarray:
    """Affine field with exactly zero curl and divergence on every cell.

    (a + c x + d y, b + d x - c y) is harmonic; first-order one-sided and
    central differences are both exact on affine data, so the zeros hold
    on boundary cells too.
    """
    a, b = rng.normal(size=2)
    scale = 2.0 / max(width, height)
    c, d = rng.normal(size=2) * scale
    X, Y = _mesh(width, height)
    Xc, Yc = X - (width - 1) / 2.0, Y - (height - 1) / 2.0
    u = a + c * Xc + d * Yc
    v = b + d * Xc - c * Yc
    return np.stack([u, v], axis=-1)


def generate_category(tag: str, seed, width: int, height: int) -> VectorField:
    """Generate one field of an evaluation category, deterministic in seed.

    irrotational parts are gradients of random smooth potentials,
    incompressible parts are perpendicular gradients of random smooth
    stream functions, harmonic parts are random affine harmonic fields;
    combinations are sums. The result is scaled by its maximum magnitude
    (a uniform scaling, which preserves the defining zeros).
    """
    if tag not in CATEGORIES:
        raise ValueError(f"unknown category {tag!r}; expected one of {CATEGORIES}")
    rng = np.random.default_rng(seed)
    parts = tag.split("+") if tag != "all" else ["irrotational", "incompressible", "harmonic"]
    data = np.zeros((height, width, 2))
    if "irrotational" in parts:
        data += gradient(ScalarField(_random_smooth_scalar(rng, width, height))).data
    if "incompressible" in parts:
        data += perpendicular_gradient(ScalarField(_random_smooth_scalar(rng, width, height))).data
    if "harmonic" in parts:
        data += _random_affine_harmonic(rng, width, height)
    return normalize_field(VectorField(data), "max-norm")


@dataclass(frozen=True)
class DatasetRecord:
    category: str
    seed: str
    field_path: str
    sketch_path: str
    content_hash: str

    def line(self) -> str:
        return "\t".join([self.category, self.seed, self.field_path,
                          self.sketch_path, self.content_hash])


def generate_dataset(counts: Mapping[str, int], seed: int, out_dir,
                     width: int = 256, height: int = 256,
                     sketches: bool = True) -> list[DatasetRecord]:
    """Write (field, pseudo-sketch) pairs plus a manifest.

    Per-sample seeds derive from (seed, category index, sample index), so
    reruns with the same seed reproduce bitwise-identical files. Fields
    are quantized to float32 before writing so the stored file matches the
    in-memory sample exactly.
    """
    from .sketch import rasterize_sketch, trace_streamlines

    unknown = set(counts) - set(CATEGORIES)
    if unknown:
        raise ValueError(f"unknown categories in counts: {sorted(unknown)}")
    if any(n < 0 for n in counts.values()):
        raise ValueError("counts must be non-negative")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records: list[DatasetRecord] = []
    for ci, category in enumerate(CATEGORIES):
        for i in range(counts.get(category, 0)):
            sample = generate_category(category, [seed, ci, i], width, height)
            sample = quantize_field(sample)
            field_name = f"{category.replace('+', '-')}_{i:05d}.vf2"
            field_bytes = field_to_bytes(sample)
            (out / field_name).write_bytes(field_bytes)
            if sketches:
                lines = trace_streamlines(sample)
                img = rasterize_sketch(lines, field_width=width, field_height=height)
                sketch_name = field_name[:-4] + ".pgm"
                sketch_bytes = pgm_to_bytes(img.data)
                (out / sketch_name).write_bytes(sketch_bytes)
            else:
                sketch_name = ""
                sketch_bytes = b""
            digest = hashlib.sha256(field_bytes + sketch_bytes).hexdigest()
            records.append(DatasetRecord(
                category=category,
                seed=f"{seed}-{ci}-{i}",
                field_path=field_name,
                sketch_path=sketch_name,
                content_hash=digest,
            ))
    manifest = "".join(r.line() + "\n" for r in records)
    (out / "manifest.tsv").write_text(manifest, encoding="utf-8")
    return records
