"""Classification of recovered critical points.

The dual-root ordering decides everything: the positive root always pairs
with the global minimizer; with three distinct roots the most negative
pairs with a local maximizer and the middle one with a saddle whose
rise/fall directions form explicit cones around the tilt axis; at the
degenerate boundary the double root pairs with a local maximizer whose
Hessian is singular along the tilt.

The Hessian at a recovered point is alpha*(x x^T + (sigma/alpha) I), an
identity-plus-rank-one matrix, so its spectrum is known in closed form:
sigma with multiplicity n-1 (directions orthogonal to f) and
3 sigma + 2 alpha lam (along f).  Classification is assigned from root
identity; the inertia is an independent numerical cross-check, not the
classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .problem import ProblemSpec, Regime, RegimeTag
from .solver import (
    Classification,
    CriticalPoint,
    CubicSolveTrace,
    ZeroForceError,
    classify_regime,
    recover_critical_points,
    solve_dual,
)

__all__ = [
    "SaddleCone",
    "DirectionProbe",
    "ProblemAnalysis",
    "classify",
    "saddle_cone",
    "directional_second_derivative",
    "hessian_eigenvalues",
    "hessian_inertia",
    "analyze",
]

# Directions whose |cos angle(z, f)| sits within this band of the cone
# threshold have a vanishing second derivative; higher-order terms decide
# there, so the probe reports sign 0.
INDETERMINATE_BAND = 1e-9


@dataclass(frozen=True, eq=False)
class SaddleCone:
    """Angular split of directions at the saddle.

    Directions z with |cos angle(z, f)| < threshold see a local maximum of
    the objective along the line through the saddle; directions above the
    threshold see a local minimum.  threshold = sqrt(-sigma_2 /
    (2 sigma_2 + 2 alpha lam)), strictly inside (0, 1).
    """

    threshold: float
    axis: np.ndarray


@dataclass(frozen=True, eq=False)
class DirectionProbe:
    """Closed-form second derivative of t -> Pi(x_2 + t z) at t = 0.

    sign is -1 (local max along z), +1 (local min along z), or 0 when
    |cos angle(z, f)| is within INDETERMINATE_BAND of the cone threshold.
    """

    z: np.ndarray
    cos_theta: float
    phi_second: float
    sign: int


@dataclass(frozen=True, eq=False)
class ProblemAnalysis:
    """Full solve: regime, dual roots, classified points, saddle cone."""

    spec: ProblemSpec
    regime: Regime
    roots: tuple
    trace: CubicSolveTrace
    points: list
    cone: SaddleCone | None


def classify(spec: ProblemSpec, points, roots) -> list[CriticalPoint]:
    """Fill in the classification of each recovered point from its root index.

    Positive root -> global minimizer (every regime); with three distinct
    roots the middle root -> saddle and the most negative -> local maximizer;
    a multiplicity-2 root -> degenerate local maximizer.
    """
    regime = classify_regime(spec)
    if regime.tag is RegimeTag.ZERO_FORCE:
        raise ZeroForceError(
            "classification needs f != 0; use perturbation.perturb_solve"
        )
    by_index = {root.index: root for root in roots}
    out = []
    for point in points:
        root = by_index[point.index]
        if root.multiplicity == 2:
            label = Classification.DEGENERATE_LOCAL_MAX
        elif point.index == 1:
            label = Classification.GLOBAL_MIN
        elif point.index == 2:
            label = Classification.SADDLE
        else:
            label = Classification.LOCAL_MAX
        out.append(replace(point, classification=label))
    return out


def saddle_cone(spec: ProblemSpec, sigma2: float) -> SaddleCone:
    """Cone threshold sqrt(-sigma_2/(2 sigma_2 + 2 alpha lam)) with axis f/|f|.

    Requires the middle root -2*alpha*lam/3 < sigma_2 < 0; outside that
    interval the threshold is undefined or >= 1.
    """
    alpha, lam = spec.alpha, spec.lam
    if not (-2.0 * alpha * lam / 3.0 < sigma2 < 0.0):
        raise ValueError(
            f"sigma2={sigma2} outside (-2*alpha*lam/3, 0); cone threshold undefined"
        )
    if spec.force_norm_sq == 0.0:
        raise ZeroForceError("the cone axis f/|f| needs f != 0")
    threshold = math.sqrt(-sigma2 / (2.0 * sigma2 + 2.0 * alpha * lam))
    axis = spec.f / spec.force_norm
    axis.setflags(write=False)
    return SaddleCone(threshold=threshold, axis=axis)


def directional_second_derivative(
    spec: ProblemSpec, saddle: CriticalPoint, z
) -> DirectionProbe:
    """Probe one direction z at the saddle.

    phi''(0) = |z|^2 ((2 sigma_2 + 2 alpha lam) cos^2 theta + sigma_2) with
    theta the angle between z and f; negative below the cone threshold,
    positive above it.
    """
    if saddle.classification is not Classification.SADDLE:
        raise ValueError("point is not classified as a saddle")
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.shape[0] != spec.n:
        raise ValueError(f"z must be a vector of length {spec.n}")
    znorm_sq = float(z @ z)
    if znorm_sq == 0.0:
        raise ValueError("z must be nonzero")
    sigma2 = saddle.sigma
    cos_theta = float(spec.f @ z) / (spec.force_norm * math.sqrt(znorm_sq))
    coeff = 2.0 * sigma2 + 2.0 * spec.alpha * spec.lam
    phi_second = znorm_sq * (coeff * cos_theta * cos_theta + sigma2)
    threshold = math.sqrt(-sigma2 / coeff)
    gap = abs(cos_theta) - threshold
    if abs(gap) <= INDETERMINATE_BAND:
        sign = 0
    else:
        sign = -1 if gap < 0.0 else 1
    z = z.copy()
    z.setflags(write=False)
    return DirectionProbe(z=z, cos_theta=cos_theta, phi_second=phi_second, sign=sign)


def hessian_eigenvalues(spec: ProblemSpec, point: CriticalPoint) -> tuple[float, float]:
    """Closed-form Hessian spectrum at a recovered point.

    Returns (perpendicular, axial) = (sigma, 3 sigma + 2 alpha lam); the
    perpendicular eigenvalue has multiplicity n - 1.
    """
    sigma = point.sigma
    return sigma, 3.0 * sigma + 2.0 * spec.alpha * spec.lam


def hessian_inertia(
    spec: ProblemSpec, point: CriticalPoint, zero_tol: float | None = None
) -> tuple[int, int, int]:
    """Eigenvalue sign counts (n_neg, n_zero, n_pos) of the Hessian at a point.

    Uses the closed-form spectrum; the degenerate double root makes the
    axial eigenvalue exactly zero.
    """
    perp, axial = hessian_eigenvalues(spec, point)
    if zero_tol is None:
        scale = spec.alpha * (spec.lam + float(point.x @ point.x))
        zero_tol = 1e-9 * max(1.0, scale)
    eigs = [perp] * (spec.n - 1) + [axial]
    n_neg = sum(1 for e in eigs if e < -zero_tol)
    n_pos = sum(1 for e in eigs if e > zero_tol)
    return n_neg, len(eigs) - n_neg - n_pos, n_pos


def analyze(spec: ProblemSpec) -> ProblemAnalysis:
    """Solve, recover and classify in one call (f != 0 required)."""
    roots, trace = solve_dual(spec)
    points = recover_critical_points(spec, roots)
    points = classify(spec, points, roots)
    cone = None
    for point in points:
        if point.classification is Classification.SADDLE:
            cone = saddle_cone(spec, point.sigma)
    return ProblemAnalysis(
        spec=spec,
        regime=roots[0].regime,
        roots=roots,
        trace=trace,
        points=points,
        cone=cone,
    )
