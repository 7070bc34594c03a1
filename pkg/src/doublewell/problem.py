"""Problem definition and the primal/dual function family.

The objective is the tilted double-well potential

    Pi(x) = (alpha/2) * (|x|^2/2 - lam)^2 - <f, x>,   x in R^n,

with given alpha > 0, lam > 0 and tilt vector f.  Its stationarity
condition collapses to a one-variable problem: on the half line
sigma >= -alpha*lam the dual function

    Pi_d(sigma) = -|f|^2/(2 sigma) - sigma^2/(2 alpha) - sigma*lam

has the same critical values as Pi, and each real root sigma of

    2 sigma^2 (sigma/alpha + lam) = |f|^2

pairs with the primal stationary point x = f/sigma.  This module
evaluates Pi, Pi_d, their first two derivatives, and the pieces of the
dual construction (sphere defect, well energy and its conjugate, and
the mixed complementary function).  Root solving lives in `solver`,
classification in `triality`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "REGIME_EPS",
    "RegimeTag",
    "Regime",
    "ProblemSpec",
    "sphere_defect",
    "well_energy",
    "well_energy_conjugate",
    "primal_value",
    "primal_gradient",
    "primal_hessian",
    "total_complementary",
    "dual_value",
    "dual_gradient",
    "dual_hessian",
]

# Relative half-width of the band around |f|^2 = 8 alpha^2 lam^3 / 27 that is
# classified as degenerate; the cubic's root structure changes discontinuously
# there, so floating-point inputs near the boundary need a deterministic rule.
REGIME_EPS = 1e-9


class RegimeTag(enum.Enum):
    """Root structure of the dual cubic."""

    ZERO_FORCE = "zero_force"
    THREE_DISTINCT = "three_distinct"
    DEGENERATE = "degenerate"
    SINGLE_REAL = "single_real"


@dataclass(frozen=True)
class Regime:
    """Classification of |f|^2 against the discriminant value 8 alpha^2 lam^3 / 27."""

    tag: RegimeTag
    threshold: float
    force_norm_sq: float


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """One problem instance: stiffness alpha > 0, well level lam > 0, tilt f."""

    alpha: float
    lam: float
    f: np.ndarray

    def __post_init__(self):
        alpha = float(self.alpha)
        lam = float(self.lam)
        if not (math.isfinite(alpha) and alpha > 0.0):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha!r}")
        if not (math.isfinite(lam) and lam > 0.0):
            raise ValueError(f"lam must be positive and finite, got {self.lam!r}")
        f = np.array(self.f, dtype=float)
        if f.ndim != 1 or f.size < 1:
            raise ValueError("f must be a one-dimensional vector of length >= 1")
        if not np.all(np.isfinite(f)):
            raise ValueError("f must have finite entries")
        f.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "f", f)

    @property
    def n(self) -> int:
        return self.f.shape[0]

    @property
    def force_norm_sq(self) -> float:
        return float(self.f @ self.f)

    @property
    def force_norm(self) -> float:
        return math.sqrt(self.force_norm_sq)

    @property
    def regime_threshold(self) -> float:
        """The discriminant value 8 alpha^2 lam^3 / 27 separating root regimes."""
        return 8.0 * self.alpha**2 * self.lam**3 / 27.0

    def with_force(self, f) -> "ProblemSpec":
        """Same alpha and lam with a different tilt vector."""
        return ProblemSpec(self.alpha, self.lam, f)


def _vector(spec: ProblemSpec, x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != spec.n:
        raise ValueError(
            f"{name} must be a vector of length {spec.n}, got shape {arr.shape}"
        )
    return arr


def _check_dual_domain(spec: ProblemSpec, sigma: float) -> None:
    floor = -spec.alpha * spec.lam
    # one-ulp slack: polished roots at extreme parameters can round onto the boundary
    if sigma < floor - 1e-12 * (1.0 + abs(floor)):
        raise ValueError(f"sigma={sigma} is below the dual domain [{floor}, +inf)")


def _check_pole(sigma: float) -> None:
    if sigma == 0.0:
        raise ValueError("sigma = 0 is the pole of the dual function")


def sphere_defect(spec: ProblemSpec, x) -> float:
    """Offset |x|^2/2 - lam of a point from the well level (zero on the minimizing sphere)."""
    x = _vector(spec, x)
    return float(0.5 * (x @ x) - spec.lam)


def well_energy(spec: ProblemSpec, xi: float) -> float:
    """Quadratic well energy (alpha/2) xi^2 of a sphere-defect value xi >= -lam."""
    return 0.5 * spec.alpha * float(xi) ** 2


def well_energy_conjugate(spec: ProblemSpec, sigma: float) -> float:
    """Legendre conjugate sigma^2/(2 alpha) of the well energy, on sigma >= -alpha*lam."""
    _check_dual_domain(spec, sigma)
    return float(sigma) ** 2 / (2.0 * spec.alpha)


def primal_value(spec: ProblemSpec, x) -> float:
    """Objective value (alpha/2)(|x|^2/2 - lam)^2 - <f, x>."""
    x = _vector(spec, x)
    defect = 0.5 * (x @ x) - spec.lam
    return float(0.5 * spec.alpha * defect * defect - spec.f @ x)


def primal_gradient(spec: ProblemSpec, x) -> np.ndarray:
    """Gradient alpha*(|x|^2/2 - lam)*x - f."""
    x = _vector(spec, x)
    defect = 0.5 * (x @ x) - spec.lam
    return spec.alpha * defect * x - spec.f


def primal_hessian(spec: ProblemSpec, x) -> np.ndarray:
    """Hessian alpha*(x x^T + (|x|^2/2 - lam) I); symmetric by construction."""
    x = _vector(spec, x)
    defect = 0.5 * (x @ x) - spec.lam
    return spec.alpha * (np.outer(x, x) + defect * np.eye(spec.n))


def total_complementary(spec: ProblemSpec, x, sigma: float) -> float:
    """Mixed function sigma*(|x|^2/2 - lam) - sigma^2/(2 alpha) - <f, x>.

    Stationary in x at x = f/sigma, where it reproduces the dual value; for
    sigma > 0 it is a convex minorant of the objective (Fenchel inequality).
    """
    x = _vector(spec, x)
    _check_dual_domain(spec, sigma)
    sigma = float(sigma)
    defect = 0.5 * (x @ x) - spec.lam
    return float(sigma * defect - sigma * sigma / (2.0 * spec.alpha) - spec.f @ x)


def dual_value(spec: ProblemSpec, sigma: float) -> float:
    """Dual function -|f|^2/(2 sigma) - sigma^2/(2 alpha) - sigma*lam.

    Defined on [-alpha*lam, +inf) away from the pole at sigma = 0.  Reaching
    the pole is a caller bug (no root of the dual cubic is 0 when f != 0),
    so it raises instead of returning +/-inf.
    """
    _check_pole(sigma)
    _check_dual_domain(spec, sigma)
    sigma = float(sigma)
    return (
        -spec.force_norm_sq / (2.0 * sigma)
        - sigma * sigma / (2.0 * spec.alpha)
        - sigma * spec.lam
    )


def dual_gradient(spec: ProblemSpec, sigma: float) -> float:
    """Dual derivative |f|^2/(2 sigma^2) - sigma/alpha - lam; zero exactly at dual roots."""
    _check_pole(sigma)
    sigma = float(sigma)
    return spec.force_norm_sq / (2.0 * sigma * sigma) - sigma / spec.alpha - spec.lam


def dual_hessian(spec: ProblemSpec, sigma: float) -> float:
    """Dual second derivative -|f|^2/sigma^3 - 1/alpha.

    At a root of the dual cubic this equals (3 sigma + 2 alpha lam)/(-alpha sigma),
    which fixes its sign per root.
    """
    _check_pole(sigma)
    sigma = float(sigma)
    return -spec.force_norm_sq / sigma**3 - 1.0 / spec.alpha
