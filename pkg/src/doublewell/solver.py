"""Closed-form solution of the dual cubic and primal critical-point recovery.

Stationarity of the dual function reduces to

    g(sigma) = 2 sigma^2 (sigma/alpha + lam) - |f|^2 = 0,

a cubic with either three real roots (small tilt), one real root (large
tilt), or a double root exactly at |f|^2 = 8 alpha^2 lam^3 / 27.  The
three-root regime is solved with the cosine triple-angle form and the
one-root regime with the real Cardano branch; every closed-form root is
then Newton-polished on g.  Each distinct root sigma yields the primal
stationary point x = f/sigma.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .problem import (
    REGIME_EPS,
    ProblemSpec,
    Regime,
    RegimeTag,
    primal_gradient,
    primal_value,
)

__all__ = [
    "Classification",
    "ZeroForceError",
    "RegimeError",
    "DualRoot",
    "CubicSolveTrace",
    "CriticalPoint",
    "classify_regime",
    "cubic_residual",
    "cubic_residual_derivative",
    "solve_dual_trig",
    "solve_dual_cardano",
    "solve_dual",
    "cardano_roots_complex",
    "recover_critical_points",
]

NEWTON_MAX_ITER = 50
NEWTON_RESIDUAL_FACTOR = 4e-15

# Below this offset of the acos argument from -1 the triple-angle formula
# has lost all digits for the two roots near 0 (tiny |f|^2); small-tilt
# expansions give accurate Newton starts there instead.
ASYMPTOTIC_ARG_OFFSET = 1e-8

# Sanity gate on roots handed to recover_critical_points; looser than the
# solver's own residual guarantee so it only trips on genuinely bad input.
RESIDUAL_GATE = 1e-8


class Classification(enum.Enum):
    """Extremality label of a primal critical point."""

    GLOBAL_MIN = "global_min"
    LOCAL_MAX = "local_max"
    SADDLE = "saddle"
    DEGENERATE_LOCAL_MAX = "degenerate_local_max"


class ZeroForceError(ValueError):
    """Raised when f = 0 reaches a path that needs a nonzero tilt.

    The zero-tilt problem has a whole sphere of minimizers and no isolated
    dual roots; use `perturbation.perturb_solve` for it.
    """


class RegimeError(ValueError):
    """Raised when a solver branch is called outside its regime."""


@dataclass(frozen=True)
class DualRoot:
    """One real root of the dual cubic.

    `index` follows the value ordering sigma_1 > 0 > sigma_2 > -2*alpha*lam/3
    > sigma_3 > -alpha*lam; `multiplicity` is 2 for the collapsed pair at the
    degenerate boundary.  `residual` is g(sigma) after polishing.
    """

    sigma: float
    index: int
    multiplicity: int
    residual: float
    regime: Regime


@dataclass(frozen=True)
class CubicSolveTrace:
    """How each root was produced: the Cardano cube-root argument r (complex
    in the three-root regime), the formula branch, and Newton iteration
    counts per root."""

    r: complex
    branches: tuple
    newton_iterations: tuple


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    """A primal stationary point x = f/sigma with its paired dual root."""

    x: np.ndarray
    sigma: float
    value: float
    gradient_norm: float
    index: int
    multiplicity: int = 1
    classification: Classification | None = None


def classify_regime(spec: ProblemSpec) -> Regime:
    """Classify |f|^2 against the discriminant value 8 alpha^2 lam^3 / 27.

    Inputs within REGIME_EPS relative of the discriminant are reported as
    degenerate so near-boundary floating-point data is handled deterministically.
    """
    threshold = spec.regime_threshold
    fnsq = spec.force_norm_sq
    if fnsq == 0.0:
        tag = RegimeTag.ZERO_FORCE
    elif abs(fnsq - threshold) <= REGIME_EPS * threshold:
        tag = RegimeTag.DEGENERATE
    elif fnsq < threshold:
        tag = RegimeTag.THREE_DISTINCT
    else:
        tag = RegimeTag.SINGLE_REAL
    return Regime(tag=tag, threshold=threshold, force_norm_sq=fnsq)


def cubic_residual(spec: ProblemSpec, sigma: float) -> float:
    """g(sigma) = 2 sigma^2 (sigma/alpha + lam) - |f|^2."""
    sigma = float(sigma)
    return 2.0 * sigma * sigma * (sigma / spec.alpha + spec.lam) - spec.force_norm_sq


def cubic_residual_derivative(spec: ProblemSpec, sigma: float) -> float:
    """g'(sigma) = 6 sigma^2/alpha + 4 lam sigma."""
    sigma = float(sigma)
    return 6.0 * sigma * sigma / spec.alpha + 4.0 * spec.lam * sigma


def _newton_polish(spec: ProblemSpec, sigma: float) -> tuple[float, int]:
    """Refine a closed-form root on g; cos/acos/cbrt lose digits near the
    regime boundaries and Newton restores them.

    The stop threshold is relative to the local scale |2 sigma^2 (sigma/alpha
    + lam)| + |f|^2 (an absolute floor would leave tiny-tilt roots
    unresolved); iteration also ends on a machine fixpoint or when the
    residual stops improving, keeping the best iterate seen.
    """
    fnsq = spec.force_norm_sq
    best_sigma = sigma
    best_g = abs(cubic_residual(spec, sigma))
    iterations = 0
    while iterations < NEWTON_MAX_ITER:
        scale = fnsq + abs(cubic_residual(spec, best_sigma) + fnsq)
        if best_g <= NEWTON_RESIDUAL_FACTOR * scale:
            break
        dg = cubic_residual_derivative(spec, best_sigma)
        if dg == 0.0:
            break
        sigma = best_sigma - cubic_residual(spec, best_sigma) / dg
        if sigma == best_sigma:
            break
        iterations += 1
        g = abs(cubic_residual(spec, sigma))
        if g >= best_g:
            break
        best_sigma, best_g = sigma, g
    return best_sigma, iterations


def _cardano_intermediate(spec: ProblemSpec) -> complex:
    """Cube-root argument of the closed-form root formulas; complex exactly
    when all three roots are real (casus irreducibilis)."""
    alpha, lam, fnsq = spec.alpha, spec.lam, spec.force_norm_sq
    radicand = 27.0 * fnsq - 8.0 * alpha**2 * lam**3
    first = alpha * math.sqrt(fnsq) * cmath.sqrt(complex(radicand, 0.0)) / (
        4.0 * math.sqrt(27.0)
    )
    second = (27.0 * alpha * fnsq - 4.0 * alpha**3 * lam**3) / 108.0
    return first + second


def solve_dual_trig(spec: ProblemSpec):
    """Solve the dual cubic by the cosine triple-angle form.

    Valid when 0 < |f|^2 <= 8 alpha^2 lam^3 / 27: the three real roots are

        sigma_i = (alpha*lam/3) * (2 cos(theta/3 + phase_i) - 1),
        theta   = acos(27 |f|^2 / (4 alpha^2 lam^3) - 1),

    with phases 0, 4 pi/3, 2 pi/3.  At the degenerate boundary the two
    negative roots collapse onto -2*alpha*lam/3 and only two records are
    returned, the double root carrying multiplicity 2 (its residual is not
    polishable: g merely touches zero there).

    Returns
    -------
    roots : tuple of DualRoot
        Ordered by index; three records in the three-root regime, two at
        the degenerate boundary.
    trace : CubicSolveTrace
    """
    regime = classify_regime(spec)
    if regime.tag not in (RegimeTag.THREE_DISTINCT, RegimeTag.DEGENERATE):
        raise RegimeError(
            f"trigonometric branch needs the three-root or degenerate regime, got {regime.tag.value}"
        )
    alpha, lam = spec.alpha, spec.lam
    arg = 27.0 * spec.force_norm_sq / (4.0 * alpha**2 * lam**3) - 1.0
    # rounding can push the acos argument just outside [-1, 1] at the boundaries
    arg = min(1.0, max(-1.0, arg))
    theta = math.acos(arg)
    base = alpha * lam / 3.0
    floor = -alpha * lam
    r = _cardano_intermediate(spec)

    if regime.tag is RegimeTag.DEGENERATE:
        s1, it1 = _newton_polish(spec, base * (2.0 * math.cos(theta / 3.0) - 1.0))
        double = -2.0 * alpha * lam / 3.0
        roots = (
            DualRoot(s1, 1, 1, cubic_residual(spec, s1), regime),
            DualRoot(double, 2, 2, cubic_residual(spec, double), regime),
        )
        trace = CubicSolveTrace(
            r=r, branches=("trigonometric", "trigonometric"), newton_iterations=(it1, 0)
        )
        return roots, trace

    fnsq = spec.force_norm_sq
    if arg <= -1.0 + ASYMPTOTIC_ARG_OFFSET:
        small = math.sqrt(fnsq / (2.0 * lam))
        starts = (small, -small, -alpha * lam + fnsq / (2.0 * alpha * lam * lam))
    else:
        starts = tuple(
            base * (2.0 * math.cos(theta / 3.0 + phase) - 1.0)
            for phase in (0.0, 4.0 * math.pi / 3.0, 2.0 * math.pi / 3.0)
        )
    polished = [_newton_polish(spec, start) for start in starts]
    # index labels follow the value ordering chain, not the formula phase
    polished.sort(key=lambda p: -p[0])
    roots = tuple(
        DualRoot(
            max(s, floor), i + 1, 1, cubic_residual(spec, max(s, floor)), regime
        )
        for i, (s, _) in enumerate(polished)
    )
    trace = CubicSolveTrace(
        r=r,
        branches=("trigonometric",) * 3,
        newton_iterations=tuple(it for _, it in polished),
    )
    return roots, trace


def solve_dual_cardano(spec: ProblemSpec):
    """Solve the dual cubic by the real Cardano branch.

    Valid when |f|^2 > 8 alpha^2 lam^3 / 27, where the cube-root argument r
    is real and positive and

        sigma_1 = r^(1/3) + alpha^2 lam^2 / (9 r^(1/3)) - alpha*lam/3

    is the unique real root (always positive); the complex-conjugate pair is
    not returned.

    Returns
    -------
    root : DualRoot
    trace : CubicSolveTrace
    """
    regime = classify_regime(spec)
    if regime.tag is not RegimeTag.SINGLE_REAL:
        raise RegimeError(
            f"Cardano branch needs the single-root regime, got {regime.tag.value}"
        )
    r = _cardano_intermediate(spec)
    if r.imag != 0.0 or r.real <= 0.0:
        # the regime gate guarantees a positive radicand; reaching this is a bug
        raise RuntimeError("internal error: non-real cube-root argument in the single-root regime")
    u = r.real ** (1.0 / 3.0)
    sigma = u + spec.alpha**2 * spec.lam**2 / (9.0 * u) - spec.alpha * spec.lam / 3.0
    sigma, iters = _newton_polish(spec, sigma)
    root = DualRoot(sigma, 1, 1, cubic_residual(spec, sigma), regime)
    trace = CubicSolveTrace(r=r, branches=("cardano",), newton_iterations=(iters,))
    return root, trace


def solve_dual(spec: ProblemSpec):
    """Solve the dual cubic for all real roots, dispatching on the regime.

    Returns (roots, trace) with roots a tuple of DualRoot in index order.
    """
    regime = classify_regime(spec)
    if regime.tag is RegimeTag.ZERO_FORCE:
        raise ZeroForceError(
            "f = 0 has no isolated dual roots; use perturbation.perturb_solve"
        )
    if regime.tag is RegimeTag.SINGLE_REAL:
        root, trace = solve_dual_cardano(spec)
        return (root,), trace
    return solve_dual_trig(spec)


def cardano_roots_complex(spec: ProblemSpec) -> tuple[complex, complex, complex]:
    """Evaluate the full closed-form root triple in complex arithmetic.

    Cross-check path only: with the principal square and cube roots the
    imaginary parts vanish (to rounding) in the three-root regime and the
    real parts reproduce the trigonometric roots in index order.
    """
    if spec.force_norm_sq == 0.0:
        raise ZeroForceError("f = 0 has no isolated dual roots")
    r = _cardano_intermediate(spec)
    u = r ** (1.0 / 3.0)
    v = spec.alpha**2 * spec.lam**2 / (9.0 * u)
    shift = spec.alpha * spec.lam / 3.0
    w_plus = complex(-0.5, math.sqrt(3.0) / 2.0)
    w_minus = complex(-0.5, -math.sqrt(3.0) / 2.0)
    return (
        u + v - shift,
        w_minus * u + w_plus * v - shift,
        w_plus * u + w_minus * v - shift,
    )


def recover_critical_points(spec: ProblemSpec, roots) -> list[CriticalPoint]:
    """Map dual roots to primal stationary points x = f/sigma.

    One point per distinct root (so at most three).  Classification is left
    unset for `triality.classify` to fill.
    """
    if spec.force_norm_sq == 0.0:
        raise ZeroForceError(
            "critical-point recovery needs f != 0; use perturbation.perturb_solve"
        )
    points = []
    for root in roots:
        if abs(root.residual) > RESIDUAL_GATE * (1.0 + spec.force_norm_sq):
            raise ValueError(
                f"sigma={root.sigma} does not satisfy the dual cubic "
                f"(residual {root.residual:.3e})"
            )
        x = spec.f / root.sigma
        x.setflags(write=False)
        grad = primal_gradient(spec, x)
        points.append(
            CriticalPoint(
                x=x,
                sigma=root.sigma,
                value=primal_value(spec, x),
                gradient_norm=float(np.linalg.norm(grad)),
                index=root.index,
                multiplicity=root.multiplicity,
            )
        )
    return points
