"""Helmholtz-Hodge decomposition and region-local component editing.

A field is split into a divergence-free part reconstructed from a stream
function, a curl-free part reconstructed from a scalar potential, and a
harmonic remainder defined as the exact floating-point residual, so the
three parts always sum back to the input.

The physical guarantees come from the reconstruction stencils, not from
solver accuracy: the perpendicular gradient of any stream function has
exactly zero interior divergence and the gradient of any potential has
exactly zero interior curl (mixed central differences commute), so the
extracted parts satisfy their defining property to roundoff regardless of
how well the Poisson solves converged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .fields import (
    InvalidField,
    Rect,
    ScalarField,
    VectorField,
    curl2d,
    divergence,
    gradient,
    perpendicular_gradient,
)
from .poisson import SolveOptions, SolveReport, solve_poisson

COMPONENT_NAMES = ("curl_free", "div_free", "harmonic")


@dataclass(frozen=True)
class ComponentMask:
    """Which decomposition components an edit keeps."""

    keep_curl_free: bool = False
    keep_div_free: bool = False
    keep_harmonic: bool = False

    def __post_init__(self):
        if not (self.keep_curl_free or self.keep_div_free or self.keep_harmonic):
            raise ValueError("an edit must keep at least one component")

    @property
    def all_selected(self) -> bool:
        return self.keep_curl_free and self.keep_div_free and self.keep_harmonic

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "ComponentMask":
        names = set(names)
        unknown = names - set(COMPONENT_NAMES)
        if unknown:
            raise ValueError(f"unknown component names: {sorted(unknown)}")
        return cls(
            keep_curl_free="curl_free" in names,
            keep_div_free="div_free" in names,
            keep_harmonic="harmonic" in names,
        )

    def names(self) -> tuple[str, ...]:
        out = []
        if self.keep_curl_free:
            out.append("curl_free")
        if self.keep_div_free:
            out.append("div_free")
        if self.keep_harmonic:
            out.append("harmonic")
        return tuple(out)


@dataclass(frozen=True)
class EditRequest:
    """One interactive edit: a rectangle plus the components to keep."""

    region: Rect
    mask: ComponentMask


@dataclass(frozen=True, eq=False)
class HHDResult:
    div_free: VectorField
    curl_free: VectorField
    harmonic: VectorField
    psi: ScalarField
    phi: ScalarField
    div_free_report: SolveReport
    curl_free_report: SolveReport


def divergence_free_part(f: VectorField, opts: SolveOptions | None = None
                         ) -> tuple[VectorField, ScalarField, SolveReport]:
    """Extract the divergence-free component via the stream function.

    Solves ``L psi = -vorticity`` with zero-Dirichlet boundary and returns
    ``(dpsi/dy, -dpsi/dx)``.
    """
    alpha = curl2d(f)
    psi, report = solve_poisson(ScalarField(-alpha.data), opts)
    return perpendicular_gradient(psi), psi, report


def curl_free_part(f: VectorField, opts: SolveOptions | None = None
                   ) -> tuple[VectorField, ScalarField, SolveReport]:
    """Extract the curl-free component via the scalar potential.

    Solves ``L phi = divergence`` with zero-Dirichlet boundary and returns
    the gradient of phi.
    """
    beta = divergence(f)
    phi, report = solve_poisson(beta, opts)
    return gradient(phi), phi, report


def decompose(f: VectorField, opts: SolveOptions | None = None) -> HHDResult:
    """Full decomposition; the harmonic part is the exact residual."""
    div_free, psi, rep_d = divergence_free_part(f, opts)
    curl_free, phi, rep_c = curl_free_part(f, opts)
    harmonic = VectorField(f.data - div_free.data - curl_free.data)
    return HHDResult(
        div_free=div_free,
        curl_free=curl_free,
        harmonic=harmonic,
        psi=psi,
        phi=phi,
        div_free_report=rep_d,
        curl_free_report=rep_c,
    )


def recompose(result: HHDResult, mask: ComponentMask) -> VectorField:
    """Sum the selected components of a decomposition."""
    total = None
    for keep, part in (
        (mask.keep_curl_free, result.curl_free),
        (mask.keep_div_free, result.div_free),
        (mask.keep_harmonic, result.harmonic),
    ):
        if keep:
            total = part.data if total is None else total + part.data
    return VectorField(total)


def edit_region(f: VectorField, region: Rect, mask: ComponentMask,
                opts: SolveOptions | None = None) -> VectorField:
    """Re-compose the selected components inside a rectangle.

    The sub-field is copied out and decomposed as an independent domain
    with its own zero-Dirichlet solves, the selected components are summed
    and written back; every cell outside the rectangle is bitwise
    unchanged. Keeping all three components is the identity edit and
    returns the input as is (floating-point re-summation would not be
    bitwise).
    """
    region.validate(f.width, f.height)
    if mask.all_selected:
        return f
    sub = VectorField(f.data[region.y0:region.y1, region.x0:region.x1])
    edited = recompose(decompose(sub, opts), mask)
    out = f.data.copy()
    out[region.y0:region.y1, region.x0:region.x1] = edited.data
    return VectorField(out)


def apply_edit_sequence(f: VectorField, edits: Sequence[EditRequest],
                        opts: SolveOptions | None = None) -> VectorField:
    """Apply edits in order, each one consuming the previous output.

    Edits do not commute; each re-decomposes the already-edited field.
    """
    current = f
    for edit in edits:
        current = edit_region(current, edit.region, edit.mask, opts)
    return current


def parse_edit_script(text: str) -> list[EditRequest]:
    """Parse the line-based edit script format.

    One edit per line: ``rect X0 Y0 X1 Y1 keep NAME[,NAME...]`` where names
    are curl_free, div_free, harmonic. Blank lines and ``#`` comments are
    ignored.
    """
    edits = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 7 or parts[0] != "rect" or parts[5] != "keep":
            raise InvalidField(f"edit script line {lineno}: expected "
                               f"'rect X0 Y0 X1 Y1 keep NAMES', got {line!r}")
        try:
            x0, y0, x1, y1 = (int(p) for p in parts[1:5])
        except ValueError as exc:
            raise InvalidField(f"edit script line {lineno}: bad coordinates") from exc
        mask = ComponentMask.from_names(n for n in parts[6].split(",") if n)
        edits.append(EditRequest(region=Rect(x0, y0, x1, y1), mask=mask))
    return edits


def format_edit_script(edits: Sequence[EditRequest]) -> str:
    lines = []
    for e in edits:
        r = e.region
        lines.append(f"rect {r.x0} {r.y0} {r.x1} {r.y1} keep {','.join(e.mask.names())}")
    return "\n".join(lines) + ("\n" if lines else "")
