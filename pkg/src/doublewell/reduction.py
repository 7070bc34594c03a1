"""Reduction of the generalized objective to the identity-operator form.

The generalized problem replaces |x|^2 by |B x|^2 for a linear map
B: R^n -> R^m (not identically zero):

    Pi_B(x) = (alpha/2) (|B x|^2/2 - lam)^2 - <f, x>.

When f lies in the range of B^T B, substituting y = B x and
f_bar = B (B^T B)^+ f turns this into the standard problem over R^m
restricted to range(B), with <f, x> = <f_bar, y>.  Solutions y_0 of the
reduced problem lift back through x_0 = (B^T B)^+ B^T y_0.  The
pseudoinverse is computed by SVD with singular values below 1e-12 of the
largest treated as zero.
"""

from __future__ import annotations

import numpy as np

from dataclasses import dataclass

from .problem import ProblemSpec

__all__ = [
    "RANK_CUTOFF",
    "MEMBERSHIP_TOL",
    "LIFT_PROJECTION_TOL",
    "NotInRangeError",
    "GeneralProblemSpec",
    "ReducedProblem",
    "reduce_problem",
    "lift_solution",
    "general_value",
    "general_gradient",
]

RANK_CUTOFF = 1e-12
MEMBERSHIP_TOL = 1e-9
LIFT_PROJECTION_TOL = 1e-8


class NotInRangeError(ValueError):
    """The tilt f is not in range(B^T B), so the reduction does not apply."""


@dataclass(frozen=True, eq=False)
class GeneralProblemSpec:
    """Generalized instance (alpha, lam, B, f) with B an m x n matrix."""

    alpha: float
    lam: float
    B: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        alpha = float(self.alpha)
        lam = float(self.lam)
        if not alpha > 0.0 or not lam > 0.0:
            raise ValueError("alpha and lam must be positive")
        B = np.array(self.B, dtype=float)
        if B.ndim != 2:
            raise ValueError("B must be a two-dimensional matrix")
        if not np.any(B):
            raise ValueError("B must not be identically zero")
        f = np.array(self.f, dtype=float)
        if f.ndim != 1 or f.shape[0] != B.shape[1]:
            raise ValueError(
                f"f must be a vector of length {B.shape[1]}, got shape {f.shape}"
            )
        B.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "f", f)

    @property
    def m(self) -> int:
        return self.B.shape[0]

    @property
    def n(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True, eq=False)
class ReducedProblem:
    """The identity-operator instance over R^m plus the lift data."""

    spec: ProblemSpec
    pinv_BtB: np.ndarray
    B: np.ndarray
    membership_residual: float

    @property
    def f_bar(self) -> np.ndarray:
        return self.spec.f


def reduce_problem(gspec: GeneralProblemSpec) -> ReducedProblem:
    """Build the reduced instance with f_bar = B (B^T B)^+ f.

    Verifies the hypothesis f in range(B^T B) through the residual
    ||B^T B (B^T B)^+ f - f|| and raises NotInRangeError when it exceeds
    1e-9 * (1 + ||f||).
    """
    B = gspec.B
    BtB = B.T @ B
    BtB = 0.5 * (BtB + BtB.T)
    pinv = np.linalg.pinv(BtB, rcond=RANK_CUTOFF)
    pf = pinv @ gspec.f
    residual = float(np.linalg.norm(BtB @ pf - gspec.f))
    if residual > MEMBERSHIP_TOL * (1.0 + float(np.linalg.norm(gspec.f))):
        raise NotInRangeError(
            f"f is not in range(B^T B): membership residual {residual:.3e}"
        )
    f_bar = B @ pf
    pinv = np.ascontiguousarray(pinv)
    pinv.setflags(write=False)
    return ReducedProblem(
        spec=ProblemSpec(gspec.alpha, gspec.lam, f_bar),
        pinv_BtB=pinv,
        B=B,
        membership_residual=residual,
    )


def lift_solution(reduced: ReducedProblem, y0) -> np.ndarray:
    """Lift a reduced solution y0 in range(B) back to x0 = (B^T B)^+ B^T y0.

    B x0 is the orthogonal projection of y0 onto range(B); y0 must already
    be in range(B) within 1e-8 relative, otherwise the lift is rejected.
    """
    y0 = np.asarray(y0, dtype=float)
    if y0.ndim != 1 or y0.shape[0] != reduced.B.shape[0]:
        raise ValueError(f"y0 must be a vector of length {reduced.B.shape[0]}")
    x0 = reduced.pinv_BtB @ (reduced.B.T @ y0)
    projection = reduced.B @ x0
    gap = float(np.linalg.norm(projection - y0))
    if gap > LIFT_PROJECTION_TOL * (1.0 + float(np.linalg.norm(y0))):
        raise ValueError(f"y0 is not in range(B): projection residual {gap:.3e}")
    return x0


def general_value(gspec: GeneralProblemSpec, x) -> float:
    """Generalized objective (alpha/2)(|B x|^2/2 - lam)^2 - <f, x>."""
    x = np.asarray(x, dtype=float)
    y = gspec.B @ x
    defect = 0.5 * float(y @ y) - gspec.lam
    return float(0.5 * gspec.alpha * defect * defect - gspec.f @ x)


def general_gradient(gspec: GeneralProblemSpec, x) -> np.ndarray:
    """Gradient alpha*(|B x|^2/2 - lam) B^T B x - f of the generalized objective."""
    x = np.asarray(x, dtype=float)
    y = gspec.B @ x
    defect = 0.5 * float(y @ y) - gspec.lam
    return gspec.alpha * defect * (gspec.B.T @ y) - gspec.f
