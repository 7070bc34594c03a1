"""Structured report documents and their deterministic serialization.

Documents are plain JSON trees.  Serialization is byte-deterministic:
keys are sorted, indentation is fixed, and every float is written with 17
significant digits (binary round-trip exact), so identical inputs produce
identical bytes and golden files diff cleanly.  Timings live in their own
top-level field so consumers can compare documents without them.

The emitted documents validate against the schema shipped at
``doublewell/schemas/report.schema.json``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .problem import dual_value
from .triality import ProblemAnalysis, hessian_inertia

__all__ = [
    "dumps_canonical",
    "load_schema",
    "RootRecord",
    "PointRecord",
    "ConeRecord",
    "SolveReport",
    "build_solve_report",
    "SweepRow",
    "SweepTable",
    "sweep_to_csv",
]


def _emit(value, out: list, depth: int) -> None:
    pad = "  " * depth
    if isinstance(value, bool):
        out.append("true" if value else "false")
    elif value is None:
        out.append("null")
    elif isinstance(value, (int, np.integer)):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise ValueError("non-finite number in report document")
        out.append(format(v, ".17g"))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(value)
        for i, key in enumerate(keys):
            if not isinstance(key, str):
                raise TypeError("document keys must be strings")
            out.append(pad + "  " + json.dumps(key) + ": ")
            _emit(value[key], out, depth + 1)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        if len(value) == 0:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(value):
            out.append(pad + "  ")
            _emit(item, out, depth + 1)
            out.append(",\n" if i + 1 < len(value) else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"unsupported document value of type {type(value)!r}")


def dumps_canonical(doc) -> str:
    """Serialize a document deterministically (sorted keys, 17-digit floats)."""
    out: list = []
    _emit(doc, out, 0)
    out.append("\n")
    return "".join(out)


def load_schema() -> dict:
    """The published report schema shipped with the package."""
    text = (
        resources.files("doublewell")
        .joinpath("schemas/report.schema.json")
        .read_text(encoding="utf-8")
    )
    return json.loads(text)


@dataclass(frozen=True)
class RootRecord:
    index: int
    sigma: float
    multiplicity: int
    residual: float
    branch: str
    newton_iterations: int

    def to_document(self) -> dict:
        return {
            "index": self.index,
            "sigma": self.sigma,
            "multiplicity": self.multiplicity,
            "residual": self.residual,
            "branch": self.branch,
            "newton_iterations": self.newton_iterations,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "RootRecord":
        return cls(
            index=int(doc["index"]),
            sigma=float(doc["sigma"]),
            multiplicity=int(doc["multiplicity"]),
            residual=float(doc["residual"]),
            branch=doc["branch"],
            newton_iterations=int(doc["newton_iterations"]),
        )


@dataclass(frozen=True)
class PointRecord:
    index: int
    x: tuple
    sigma: float
    value: float
    classification: str
    gradient_norm: float
    duality_gap: float
    hessian_inertia: tuple
    multiplicity: int

    def to_document(self) -> dict:
        return {
            "index": self.index,
            "x": list(self.x),
            "sigma": self.sigma,
            "value": self.value,
            "classification": self.classification,
            "gradient_norm": self.gradient_norm,
            "duality_gap": self.duality_gap,
            "hessian_inertia": list(self.hessian_inertia),
            "multiplicity": self.multiplicity,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "PointRecord":
        return cls(
            index=int(doc["index"]),
            x=tuple(float(v) for v in doc["x"]),
            sigma=float(doc["sigma"]),
            value=float(doc["value"]),
            classification=doc["classification"],
            gradient_norm=float(doc["gradient_norm"]),
            duality_gap=float(doc["duality_gap"]),
            hessian_inertia=tuple(int(v) for v in doc["hessian_inertia"]),
            multiplicity=int(doc["multiplicity"]),
        )


@dataclass(frozen=True)
class ConeRecord:
    threshold: float
    axis: tuple

    def to_document(self) -> dict:
        return {"threshold": self.threshold, "axis": list(self.axis)}

    @classmethod
    def from_document(cls, doc: dict) -> "ConeRecord":
        return cls(
            threshold=float(doc["threshold"]),
            axis=tuple(float(v) for v in doc["axis"]),
        )


@dataclass(frozen=True)
class SolveReport:
    """Full solve output; round-trips losslessly through the document form."""

    alpha: float
    lam: float
    f: tuple
    regime: str
    threshold: float
    force_norm_sq: float
    roots: tuple
    critical_points: tuple
    saddle_cone: ConeRecord | None

    def to_document(self) -> dict:
        return {
            "kind": "solve",
            "spec": {"alpha": self.alpha, "lambda": self.lam, "f": list(self.f)},
            "regime": {
                "tag": self.regime,
                "threshold": self.threshold,
                "force_norm_sq": self.force_norm_sq,
            },
            "roots": [r.to_document() for r in self.roots],
            "critical_points": [p.to_document() for p in self.critical_points],
            "saddle_cone": (
                self.saddle_cone.to_document() if self.saddle_cone else None
            ),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "SolveReport":
        cone = doc.get("saddle_cone")
        return cls(
            alpha=float(doc["spec"]["alpha"]),
            lam=float(doc["spec"]["lambda"]),
            f=tuple(float(v) for v in doc["spec"]["f"]),
            regime=doc["regime"]["tag"],
            threshold=float(doc["regime"]["threshold"]),
            force_norm_sq=float(doc["regime"]["force_norm_sq"]),
            roots=tuple(RootRecord.from_document(r) for r in doc["roots"]),
            critical_points=tuple(
                PointRecord.from_document(p) for p in doc["critical_points"]
            ),
            saddle_cone=ConeRecord.from_document(cone) if cone else None,
        )


def build_solve_report(analysis: ProblemAnalysis) -> SolveReport:
    """Assemble the report for a completed analysis, adding per-point duality
    gaps and Hessian inertia."""
    spec = analysis.spec
    roots = tuple(
        RootRecord(
            index=root.index,
            sigma=root.sigma,
            multiplicity=root.multiplicity,
            residual=root.residual,
            branch=analysis.trace.branches[i],
            newton_iterations=analysis.trace.newton_iterations[i],
        )
        for i, root in enumerate(analysis.roots)
    )
    points = tuple(
        PointRecord(
            index=point.index,
            x=tuple(float(v) for v in point.x),
            sigma=point.sigma,
            value=point.value,
            classification=point.classification.value,
            gradient_norm=point.gradient_norm,
            duality_gap=point.value - dual_value(spec, point.sigma),
            hessian_inertia=hessian_inertia(spec, point),
            multiplicity=point.multiplicity,
        )
        for point in analysis.points
    )
    cone = None
    if analysis.cone is not None:
        cone = ConeRecord(
            threshold=analysis.cone.threshold,
            axis=tuple(float(v) for v in analysis.cone.axis),
        )
    return SolveReport(
        alpha=spec.alpha,
        lam=spec.lam,
        f=tuple(float(v) for v in spec.f),
        regime=analysis.regime.tag.value,
        threshold=analysis.regime.threshold,
        force_norm_sq=analysis.regime.force_norm_sq,
        roots=roots,
        critical_points=points,
        saddle_cone=cone,
    )


@dataclass(frozen=True)
class SweepRow:
    """One tilt magnitude: roots (middle/low absent past the regime flip)
    and the minimum objective value."""

    force_norm: float
    sigma_1: float
    sigma_2: float | None
    sigma_3: float | None
    min_value: float
    regime: str

    def to_document(self) -> dict:
        return {
            "force_norm": self.force_norm,
            "sigma_1": self.sigma_1,
            "sigma_2": self.sigma_2,
            "sigma_3": self.sigma_3,
            "min_value": self.min_value,
            "regime": self.regime,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "SweepRow":
        return cls(
            force_norm=float(doc["force_norm"]),
            sigma_1=float(doc["sigma_1"]),
            sigma_2=None if doc["sigma_2"] is None else float(doc["sigma_2"]),
            sigma_3=None if doc["sigma_3"] is None else float(doc["sigma_3"]),
            min_value=float(doc["min_value"]),
            regime=doc["regime"],
        )


@dataclass(frozen=True)
class SweepTable:
    alpha: float
    lam: float
    direction: tuple
    rows: tuple

    def to_document(self) -> dict:
        return {
            "kind": "sweep",
            "alpha": self.alpha,
            "lambda": self.lam,
            "direction": list(self.direction),
            "rows": [row.to_document() for row in self.rows],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "SweepTable":
        return cls(
            alpha=float(doc["alpha"]),
            lam=float(doc["lambda"]),
            direction=tuple(float(v) for v in doc["direction"]),
            rows=tuple(SweepRow.from_document(r) for r in doc["rows"]),
        )


def _csv_number(value: float | None) -> str:
    return "" if value is None else format(float(value), ".17g")


def sweep_to_csv(table: SweepTable) -> str:
    """Comma-separated sweep rows with a one-line header."""
    lines = ["force_norm,sigma_1,sigma_2,sigma_3,min_value,regime"]
    for row in table.rows:
        lines.append(
            ",".join(
                (
                    _csv_number(row.force_norm),
                    _csv_number(row.sigma_1),
                    _csv_number(row.sigma_2),
                    _csv_number(row.sigma_3),
                    _csv_number(row.min_value),
                    row.regime,
                )
            )
        )
    return "\n".join(lines) + "\n"
