"""Conjugate-gradient Poisson solver on the 5-point Laplacian.

The operator is the standard 5-point stencil with zero-Dirichlet ghost
values outside the grid and unit spacing; it is symmetric negative
definite, so CG runs on the negated system. The solver is deterministic:
identical inputs produce bitwise-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np
import scipy.sparse as sp

from .fields import FieldError, ScalarField

#: Floor for the relative-residual denominator max(||rhs||, EPS).
RESIDUAL_FLOOR = 1e-300


@dataclass(frozen=True)
class SolveOptions:
    tolerance: float = 1e-10
    max_iterations: int | None = None  # defaults to 10 * (width + height)
    boundary: str = "dirichlet-zero"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.boundary != "dirichlet-zero":
            raise ValueError("only dirichlet-zero boundary is supported")

    def resolve_max_iterations(self, width: int, height: int) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return 10 * (width + height)


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    final_residual: float
    converged: bool


class NotConverged(FieldError):
    """CG ran out of iterations; carries the report and best solution."""

    def __init__(self, report: SolveReport, solution: ScalarField):
        super().__init__(
            f"solver stopped after {report.iterations} iterations "
            f"at relative residual {report.final_residual:.3e}"
        )
        self.report = report
        self.solution = solution


def apply_laplacian(s: ScalarField) -> ScalarField:
    """5-point Laplacian with zero-Dirichlet ghost cells, h = 1."""
    a = s.data
    out = -4.0 * a
    out[:, 1:] += a[:, :-1]
    out[:, :-1] += a[:, 1:]
    out[1:, :] += a[:-1, :]
    out[:-1, :] += a[1:, :]
    return ScalarField(out)


@lru_cache(maxsize=16)
def negated_laplacian_matrix(width: int, height: int) -> sp.csr_matrix:
    """-L as CSR, acting on row-major raveled (height, width) grids."""
    tx = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(width, width))
    ty = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(height, height))
    lap = sp.kron(sp.identity(height), tx) + sp.kron(ty, sp.identity(width))
    return (-lap).tocsr()


def conjugate_gradient(matrix: sp.csr_matrix, b: np.ndarray, tolerance: float,
                       max_iterations: int) -> tuple[np.ndarray, int, float, bool]:
    """CG for SPD ``matrix @ x = b`` with a verified true final residual.

    Convergence means ||matrix @ x - b|| / max(||b||, floor) <= tolerance.
    The recursive CG residual can drift from the true one, so once the
    recursion reports convergence the true residual is checked and, if
    needed, iteration resumes from the current iterate.
    """
    bn = max(float(np.linalg.norm(b)), RESIDUAL_FLOOR)
    x = np.zeros_like(b)
    if float(np.linalg.norm(b)) == 0.0:
        return x, 0, 0.0, True

    iterations = 0
    tmp = np.empty_like(b)
    while iterations < max_iterations:
        r = b - matrix @ x
        true_res = float(np.linalg.norm(r)) / bn
        if true_res <= tolerance:
            return x, iterations, true_res, True
        p = r.copy()
        rs = float(r @ r)
        while iterations < max_iterations:
            ap = matrix @ p
            alpha = rs / float(p @ ap)
            np.multiply(p, alpha, out=tmp)
            x += tmp
            np.multiply(ap, alpha, out=tmp)
            r -= tmp
            rs_new = float(r @ r)
            iterations += 1
            if np.sqrt(rs_new) <= tolerance * bn:
                break  # recheck against the true residual in the outer loop
            beta = rs_new / rs
            np.multiply(p, beta, out=tmp)
            np.add(r, tmp, out=p)
            rs = rs_new

    true_res = float(np.linalg.norm(b - matrix @ x)) / bn
    return x, iterations, true_res, true_res <= tolerance


@numba.njit(cache=True)
def _neg_laplacian_apply(x, out):  # pragma: no cover - exercised via solve_poisson
    h, w = x.shape
    for i in range(h):
        for j in range(w):
            s = 4.0 * x[i, j]
            if i > 0:
                s -= x[i - 1, j]
            if i < h - 1:
                s -= x[i + 1, j]
            if j > 0:
                s -= x[i, j - 1]
            if j < w - 1:
                s -= x[i, j + 1]
            out[i, j] = s


@numba.njit(cache=True)
def _cg_grid_kernel(b, tolerance, max_iterations):  # pragma: no cover - jit body
    """Fused CG for (-L) x = b on the grid; returns (x, iterations, residual).

    Same structure as :func:`conjugate_gradient`: the recursive residual
    drives the iteration and the true residual is verified (with a restart
    if it drifted) before success is reported.
    """
    h, w = b.shape
    x = np.zeros((h, w))
    bn = np.sqrt(np.sum(b * b))
    if bn == 0.0:
        return x, 0, 0.0
    ap = np.empty((h, w))
    r = np.empty((h, w))
    p = np.empty((h, w))
    iterations = 0
    while True:
        _neg_laplacian_apply(x, ap)
        true_sq = 0.0
        for i in range(h):
            for j in range(w):
                r[i, j] = b[i, j] - ap[i, j]
                true_sq += r[i, j] * r[i, j]
        true_res = np.sqrt(true_sq) / bn
        if true_res <= tolerance or iterations >= max_iterations:
            return x, iterations, true_res
        for i in range(h):
            for j in range(w):
                p[i, j] = r[i, j]
        rs = true_sq
        while iterations < max_iterations:
            _neg_laplacian_apply(p, ap)
            pap = 0.0
            for i in range(h):
                for j in range(w):
                    pap += p[i, j] * ap[i, j]
            alpha = rs / pap
            rs_new = 0.0
            for i in range(h):
                for j in range(w):
                    x[i, j] += alpha * p[i, j]
                    r[i, j] -= alpha * ap[i, j]
                    rs_new += r[i, j] * r[i, j]
            iterations += 1
            if np.sqrt(rs_new) <= tolerance * bn:
                break
            beta = rs_new / rs
            for i in range(h):
                for j in range(w):
                    p[i, j] = r[i, j] + beta * p[i, j]
            rs = rs_new


def solve_poisson(rhs: ScalarField, opts: SolveOptions | None = None) -> tuple[ScalarField, SolveReport]:
    """Solve L s = rhs with zero-Dirichlet boundary; raises NotConverged."""
    opts = opts or SolveOptions()
    w, h = rhs.width, rhs.height
    max_it = opts.resolve_max_iterations(w, h)
    b = np.ascontiguousarray(-rhs.data)
    x, iterations, residual = _cg_grid_kernel(b, opts.tolerance, max_it)
    converged = residual <= opts.tolerance
    solution = ScalarField(x)
    report = SolveReport(iterations=iterations, final_residual=residual, converged=converged)
    if not converged:
        raise NotConverged(report, solution)
    return solution, report
