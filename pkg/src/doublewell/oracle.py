"""Independent verification tools.

Everything here checks the analytic path by other means: brute-force grid
minimization, central finite differences against the closed-form
derivatives, and empirical second differences along sampled directions at
the saddle.  Sampling is seeded (default recorded in every report) so runs
reproduce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problem import (
    ProblemSpec,
    dual_gradient,
    dual_hessian,
    dual_value,
    primal_gradient,
    primal_hessian,
    primal_value,
)
from .solver import Classification, CriticalPoint
from .triality import SaddleCone

__all__ = [
    "DEFAULT_SEED",
    "GridSearchResult",
    "FdReport",
    "SaddleDirectionSummary",
    "grid_minimize",
    "finite_difference_check",
    "sample_saddle_directions",
    "empirical_second_difference",
]

DEFAULT_SEED = 1729

# Keep the finite-difference sigma grid away from the dual pole.
_DUAL_POLE_MARGIN = 0.05


@dataclass(frozen=True, eq=False)
class GridSearchResult:
    """Best grid node of a brute-force scan.

    mode is "grid" for the exhaustive scan (n <= 2) and "line" for the
    direction-restricted one-dimensional scan used beyond desk scale
    (critical points lie on the line spanned by f).
    """

    best_x: np.ndarray
    best_value: float
    grid_radius: float
    points_per_axis: int
    mode: str


@dataclass(frozen=True)
class FdReport:
    """Max relative finite-difference errors for the derivative family."""

    max_rel_error_gradient: float
    max_rel_error_hessian: float
    max_rel_error_dual_gradient: float
    max_rel_error_dual_hessian: float
    sample_count: int
    step: float
    seed: int


@dataclass(frozen=True, eq=False)
class SaddleDirectionSummary:
    """Agreement between cone-predicted and empirically observed curvature
    signs over sampled unit directions; directions with |cos theta| within
    exclusion_band of the threshold are excluded."""

    count: int
    excluded: int
    agreement_fraction: float
    cos_thetas: np.ndarray
    predicted: np.ndarray
    empirical: np.ndarray
    h: float
    seed: int
    threshold: float
    exclusion_band: float


def grid_minimize(
    spec: ProblemSpec, radius: float, points_per_axis: int
) -> GridSearchResult:
    """Exhaustive objective scan over a uniform grid on [-radius, radius]^n.

    For n <= 2 the scan is the full tensor grid.  For larger n the critical
    points all lie on the line spanned by f, so the scan runs over x = t*d
    with d = f/|f| (first basis vector when f = 0) and the result is marked
    mode="line".  Ties break to the lowest flat index.
    """
    if radius < 2.0 * math.sqrt(2.0 * spec.lam):
        raise ValueError("radius must cover the minimizing sphere: >= 2*sqrt(2*lam)")
    if points_per_axis < 101:
        raise ValueError("points_per_axis must be at least 101")
    axis = np.linspace(-radius, radius, points_per_axis)
    alpha, lam = spec.alpha, spec.lam

    if spec.n == 1:
        values = 0.5 * alpha * (0.5 * axis**2 - lam) ** 2 - spec.f[0] * axis
        best = int(np.argmin(values))
        best_x = np.array([axis[best]])
        mode = "grid"
    elif spec.n == 2:
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        defect = 0.5 * (gx**2 + gy**2) - lam
        values = 0.5 * alpha * defect**2 - spec.f[0] * gx - spec.f[1] * gy
        flat = int(np.argmin(values))
        i, j = np.unravel_index(flat, values.shape)
        best_x = np.array([axis[i], axis[j]])
        best = flat
        mode = "grid"
    else:
        if spec.force_norm_sq > 0.0:
            direction = spec.f / spec.force_norm
        else:
            direction = np.zeros(spec.n)
            direction[0] = 1.0
        tilt = float(spec.f @ direction)
        values = 0.5 * alpha * (0.5 * axis**2 - lam) ** 2 - tilt * axis
        best = int(np.argmin(values))
        best_x = axis[best] * direction
        mode = "line"

    best_x.setflags(write=False)
    return GridSearchResult(
        best_x=best_x,
        best_value=float(values.flat[best] if spec.n == 2 else values[best]),
        grid_radius=float(radius),
        points_per_axis=int(points_per_axis),
        mode=mode,
    )


def _rel_err(approx: float, exact: float) -> float:
    return abs(approx - exact) / max(1.0, abs(exact))


def finite_difference_check(
    spec: ProblemSpec,
    samples: int = 100,
    step: float = 1e-5,
    seed: int = DEFAULT_SEED,
) -> FdReport:
    """Central differences of the objective and the dual function against
    their closed-form derivatives.

    Primal checks run at `samples` random points with |x| <= 3*sqrt(2*lam);
    dual checks run on a sigma grid over [-alpha*lam + 0.1, max(10, alpha*lam
    + 1)] excluding |sigma| < 0.05.  Relative errors use a unit floor.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if not 0.0 < step <= 1e-3:
        raise ValueError("step must be in (0, 1e-3]")
    rng = np.random.default_rng(seed)
    ball = 3.0 * math.sqrt(2.0 * spec.lam)
    n = spec.n
    eye = np.eye(n)

    max_grad = 0.0
    max_hess = 0.0
    for _ in range(samples):
        direction = rng.normal(size=n)
        direction /= np.linalg.norm(direction)
        x = rng.uniform(0.0, ball) * direction
        grad = primal_gradient(spec, x)
        hess = primal_hessian(spec, x)
        for i in range(n):
            h = step * eye[i]
            fd_g = (primal_value(spec, x + h) - primal_value(spec, x - h)) / (2 * step)
            max_grad = max(max_grad, _rel_err(fd_g, grad[i]))
            fd_col = (primal_gradient(spec, x + h) - primal_gradient(spec, x - h)) / (
                2 * step
            )
            for j in range(n):
                max_hess = max(max_hess, _rel_err(fd_col[j], hess[i, j]))

    lo = -spec.alpha * spec.lam + 0.1
    hi = max(10.0, spec.alpha * spec.lam + 1.0)
    sigmas = [s for s in np.linspace(lo, hi, 200) if abs(s) >= _DUAL_POLE_MARGIN]
    max_dual_grad = 0.0
    max_dual_hess = 0.0
    for s in sigmas:
        fd_g = (dual_value(spec, s + step) - dual_value(spec, s - step)) / (2 * step)
        max_dual_grad = max(max_dual_grad, _rel_err(fd_g, dual_gradient(spec, s)))
        fd_h = (dual_gradient(spec, s + step) - dual_gradient(spec, s - step)) / (
            2 * step
        )
        max_dual_hess = max(max_dual_hess, _rel_err(fd_h, dual_hessian(spec, s)))

    return FdReport(
        max_rel_error_gradient=max_grad,
        max_rel_error_hessian=max_hess,
        max_rel_error_dual_gradient=max_dual_grad,
        max_rel_error_dual_hessian=max_dual_hess,
        sample_count=samples,
        step=step,
        seed=seed,
    )


def empirical_second_difference(spec: ProblemSpec, x, z, h: float) -> float:
    """Second difference Pi(x + h z) + Pi(x - h z) - 2 Pi(x); divide by h^2
    for a curvature estimate along z."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    return (
        primal_value(spec, x + h * z)
        + primal_value(spec, x - h * z)
        - 2.0 * primal_value(spec, x)
    )


def sample_saddle_directions(
    spec: ProblemSpec,
    saddle: CriticalPoint,
    cone: SaddleCone,
    count: int,
    h: float,
    seed: int = DEFAULT_SEED,
    exclusion_band: float = 1e-3,
) -> SaddleDirectionSummary:
    """Compare cone-predicted curvature signs with empirical second
    differences along `count` random unit directions at the saddle."""
    if saddle.classification is not Classification.SADDLE:
        raise ValueError("point is not classified as a saddle")
    if count < 1:
        raise ValueError("count must be at least 1")
    if not h > 0.0:
        raise ValueError("h must be positive")
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(count, spec.n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    axis = spec.f / spec.force_norm
    cos_thetas = directions @ axis

    predicted = np.sign(np.abs(cos_thetas) - cone.threshold).astype(int)
    empirical = np.empty(count, dtype=int)
    for i in range(count):
        d2 = empirical_second_difference(spec, saddle.x, directions[i], h)
        empirical[i] = 1 if d2 > 0.0 else (-1 if d2 < 0.0 else 0)

    keep = np.abs(np.abs(cos_thetas) - cone.threshold) > exclusion_band
    kept = int(np.count_nonzero(keep))
    agreement = (
        float(np.count_nonzero(predicted[keep] == empirical[keep]) / kept)
        if kept
        else 1.0
    )
    cos_thetas.setflags(write=False)
    predicted.setflags(write=False)
    empirical.setflags(write=False)
    return SaddleDirectionSummary(
        count=count,
        excluded=count - kept,
        agreement_fraction=agreement,
        cos_thetas=cos_thetas,
        predicted=predicted,
        empirical=empirical,
        h=h,
        seed=seed,
        threshold=cone.threshold,
        exclusion_band=exclusion_band,
    )
