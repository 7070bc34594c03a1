"""CSV sample tables for external plotting.

No figures are rendered here; the tables carry enough samples to
regenerate the usual pictures (the dual curve over its domain and the
objective along one-dimensional sections through each critical point)
with any plotting tool.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .problem import ProblemSpec, dual_value, primal_value
from .solver import Classification
from .triality import ProblemAnalysis

__all__ = ["write_solve_plot_data", "write_perturb_plot_data"]

_SAMPLES = 201


def _write_csv(path: Path, header: str, columns) -> None:
    lines = [header]
    for row in zip(*columns):
        lines.append(",".join(format(float(v), ".17g") for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _dual_curve_files(directory: Path, spec: ProblemSpec, sigma_pos_max: float):
    written = []
    floor = -spec.alpha * spec.lam
    neg_end = 0.02 * floor  # stop short of the pole at 0
    sigmas = np.linspace(floor, neg_end, _SAMPLES)
    values = [dual_value(spec, s) for s in sigmas]
    path = directory / "dual_function_negative.csv"
    _write_csv(path, "sigma,dual_value", (sigmas, values))
    written.append(path)

    sigmas = np.linspace(0.25 * sigma_pos_max, 3.0 * sigma_pos_max, _SAMPLES)
    values = [dual_value(spec, s) for s in sigmas]
    path = directory / "dual_function_positive.csv"
    _write_csv(path, "sigma,dual_value", (sigmas, values))
    written.append(path)
    return written


def _orthogonal_direction(axis: np.ndarray) -> np.ndarray | None:
    if axis.shape[0] < 2:
        return None
    seed = np.zeros_like(axis)
    seed[int(np.argmin(np.abs(axis)))] = 1.0
    ortho = seed - (seed @ axis) * axis
    return ortho / np.linalg.norm(ortho)


def write_solve_plot_data(directory, analysis: ProblemAnalysis) -> list:
    """Write the dual curve and objective sections for a solved instance.

    Every critical point gets a section along the tilt axis; the saddle
    additionally gets one along an orthogonal direction (where the
    objective is locally maximized).  Returns the written paths.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    spec = analysis.spec
    sigma1 = max(root.sigma for root in analysis.roots)
    written = _dual_curve_files(directory, spec, sigma1)

    axis = spec.f / spec.force_norm
    t_max = 2.0 * math.sqrt(2.0 * spec.lam)
    ts = np.linspace(-t_max, t_max, _SAMPLES)
    for point in analysis.points:
        directions = [("axis", axis)]
        if point.classification is Classification.SADDLE:
            ortho = _orthogonal_direction(axis)
            if ortho is not None:
                directions.append(("orthogonal", ortho))
        for tag, z in directions:
            values = [primal_value(spec, point.x + t * z) for t in ts]
            path = directory / f"section_point{point.index}_{tag}.csv"
            _write_csv(path, "t,primal_value", (ts, values))
            written.append(path)
    return written


def write_perturb_plot_data(directory, spec: ProblemSpec, trace) -> list:
    """Write the dual curve of the first perturbed instance and the
    convergence table of the followed points."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    first = spec.with_force(trace.f_o / trace.steps[0].k)
    sigma1 = trace.steps[0].sigmas[0]
    written = _dual_curve_files(directory, first, sigma1)

    ks = [float(step.k) for step in trace.steps]
    sphere_gap = [
        abs(float(step.points[0] @ step.points[0]) - 2.0 * spec.lam)
        for step in trace.steps
    ]
    origin_gap = [float(np.linalg.norm(step.points[2])) for step in trace.steps]
    path = Path(directory) / "convergence.csv"
    _write_csv(path, "k,sphere_gap,origin_gap", (ks, sphere_gap, origin_gap))
    written.append(path)
    return written
