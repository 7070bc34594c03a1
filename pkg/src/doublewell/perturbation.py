"""Zero-tilt handling by linear perturbation.

With f = 0 the objective has a whole sphere |x|^2 = 2 lam of global
minimizers plus the local maximizer 0, and the dual problem degenerates.
Perturbing with f_k = f_o/k for a fixed direction f_o (chosen inside the
three-root regime) keeps every instance solvable in closed form, and the
three critical-point paths converge:

    x_1k -> +sqrt(2 lam) f_o/|f_o|,   x_2k -> -sqrt(2 lam) f_o/|f_o|,
    x_3k -> 0,

recovering two antipodal minimizers on the sphere and the maximizer.
k is stepped geometrically (1, 2, 4, ...); each step is a closed-form
solve, so very large k is cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problem import ProblemSpec, RegimeTag
from .solver import classify_regime, solve_dual_trig

__all__ = [
    "DEFAULT_TOL",
    "DEFAULT_K_MAX",
    "PerturbationStep",
    "PerturbationTrace",
    "default_perturbation_force",
    "perturb_solve",
    "perturbation_residual",
]

DEFAULT_TOL = 1e-8
DEFAULT_K_MAX = 2**30


@dataclass(frozen=True, eq=False)
class PerturbationStep:
    """Roots and recovered points of the instance with tilt f_o/k."""

    k: int
    sigmas: tuple
    points: tuple
    residuals: tuple


@dataclass(frozen=True, eq=False)
class PerturbationTrace:
    """The followed sequence and its limits.

    limits = (x_bar_1, x_bar_2, x_bar_3) with x_bar_2 the exact negation of
    x_bar_1 and x_bar_3 = 0; final_gaps are the distances of the last
    iterates to their limits.
    """

    f_o: np.ndarray
    steps: tuple
    limits: tuple
    final_gaps: tuple
    converged: bool
    tol: float
    k_max: int


def default_perturbation_force(spec: ProblemSpec) -> np.ndarray:
    """First basis vector scaled so |f_o|^2 is half the regime threshold,
    safely inside the three-root regime."""
    f_o = np.zeros(spec.n)
    f_o[0] = math.sqrt(0.5 * spec.regime_threshold)
    return f_o


def perturb_solve(
    spec: ProblemSpec,
    f_o=None,
    k_max: int = DEFAULT_K_MAX,
    tol: float = DEFAULT_TOL,
) -> PerturbationTrace:
    """Follow the perturbed critical points of a zero-tilt instance.

    Parameters
    ----------
    spec : ProblemSpec
        Must have f identically zero.
    f_o : vector, optional
        Perturbation direction; must put the instance in the three-root
        regime (0 < |f_o|^2 < 8 alpha^2 lam^3/27).  Defaults to the first
        basis vector at half the threshold.
    k_max : int
        Largest perturbation index; k runs over 1, 2, 4, ... up to k_max.
    tol : float
        Early stop once successive x_1 iterates move less than tol.
    """
    if spec.force_norm_sq != 0.0:
        raise ValueError(
            "perturbation needs f = 0; nonzero tilts are solved directly"
        )
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if f_o is None:
        f_o = default_perturbation_force(spec)
    f_o = np.asarray(f_o, dtype=float)
    base = spec.with_force(f_o)
    if classify_regime(base).tag is not RegimeTag.THREE_DISTINCT:
        raise ValueError(
            "f_o must satisfy 0 < |f_o|^2 < 8 alpha^2 lam^3/27 "
            "(perturbed instances must keep three distinct roots)"
        )

    steps = []
    prev_x1 = None
    converged = False
    k = 1
    while k <= k_max:
        spec_k = spec.with_force(base.f / k)
        roots, _ = solve_dual_trig(spec_k)
        sigmas = tuple(root.sigma for root in roots)
        points = tuple(spec_k.f / s for s in sigmas)
        for p in points:
            p.setflags(write=False)
        residuals = tuple(root.residual for root in roots)
        steps.append(
            PerturbationStep(k=k, sigmas=sigmas, points=points, residuals=residuals)
        )
        x1 = points[0]
        if prev_x1 is not None and float(np.linalg.norm(x1 - prev_x1)) < tol:
            converged = True
            break
        prev_x1 = x1
        k *= 2

    unit = base.f / base.force_norm
    radius = math.sqrt(2.0 * spec.lam)
    limit1 = radius * unit
    limit2 = -limit1
    limit3 = np.zeros(spec.n)
    for arr in (limit1, limit2, limit3):
        arr.setflags(write=False)
    last = steps[-1]
    final_gaps = tuple(
        float(np.linalg.norm(last.points[i] - limit))
        for i, limit in enumerate((limit1, limit2, limit3))
    )
    f_o_frozen = base.f
    return PerturbationTrace(
        f_o=f_o_frozen,
        steps=tuple(steps),
        limits=(limit1, limit2, limit3),
        final_gaps=final_gaps,
        converged=converged,
        tol=tol,
        k_max=k_max,
    )


def perturbation_residual(spec: ProblemSpec, trace: PerturbationTrace):
    """Per-step identity check relating the root scale to the sphere radius.

    Every perturbed root satisfies 1/(k |sigma_ik|) = sqrt(2 (sigma_ik/alpha
    + lam))/|f_o| exactly; returns |lhs - rhs| per step and root, which stays
    at rounding level for polished roots.  For the root approaching
    -alpha*lam the right side cancels (sigma + alpha*lam ~ 1/k^2 falls under
    one ulp of sigma near k ~ 1e7), so the residual is only meaningful for
    k up to about 1e6.
    """
    f_o_norm = float(np.linalg.norm(trace.f_o))
    out = []
    for step in trace.steps:
        row = []
        for sigma in step.sigmas:
            lhs = 1.0 / (step.k * abs(sigma))
            # the radicand reaches 0 from above as sigma_3 -> -alpha*lam
            radicand = max(2.0 * (sigma / spec.alpha + spec.lam), 0.0)
            rhs = math.sqrt(radicand) / f_o_norm
            row.append(abs(lhs - rhs))
        out.append(tuple(row))
    return out
