"""End-to-end tests of the command-line interface."""

import json
import math
import subprocess
import sys
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from doublewell.cli import main
from doublewell.report import dumps_canonical, load_schema

SCHEMA = load_schema()


def run_cli(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_doc(capsys, *args):
    code, out, err = run_cli(capsys, *args)
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return doc


def strip_timings(out: str) -> str:
    doc = json.loads(out)
    doc.pop("timings", None)
    return dumps_canonical(doc)


class TestSolve:
    def test_reference_instance(self, capsys):
        doc = run_doc(capsys, "solve", "--alpha", "1", "--lambda", "3", "--f", "1,1")
        assert doc["kind"] == "solve"
        assert doc["regime"]["tag"] == "three_distinct"
        sigmas = [r["sigma"] for r in doc["roots"]]
        assert sigmas == pytest.approx(
            [
                2 * math.cos(math.radians(40)) - 1,
                2 * math.cos(math.radians(80)) - 1,
                2 * math.cos(math.radians(160)) - 1,
            ],
            abs=1e-12,
        )
        labels = [p["classification"] for p in doc["critical_points"]]
        assert labels == ["global_min", "saddle", "local_max"]
        assert doc["saddle_cone"]["threshold"] == pytest.approx(0.3728713875328767, abs=1e-12)

    def test_degenerate_instance(self, capsys):
        doc = run_doc(capsys, "solve", "--alpha", "1", "--lambda", "3", "--f", "2,2")
        assert doc["regime"]["tag"] == "degenerate"
        assert len(doc["roots"]) == 2
        assert doc["roots"][1]["sigma"] == -2.0
        assert doc["roots"][1]["multiplicity"] == 2
        double = doc["critical_points"][1]
        assert double["classification"] == "degenerate_local_max"
        assert double["hessian_inertia"] == [1, 1, 0]

    def test_single_root_instance(self, capsys):
        doc = run_doc(capsys, "solve", "--alpha", "1", "--lambda", "3", "--f", "3,3")
        assert doc["regime"]["tag"] == "single_real"
        assert len(doc["roots"]) == 1
        assert doc["roots"][0]["branch"] == "cardano"
        assert doc["critical_points"][0]["classification"] == "global_min"

    def test_byte_determinism(self, capsys):
        args = ("solve", "--alpha", "1", "--lambda", "3", "--f", "1,1")
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert strip_timings(first) == strip_timings(second)

    def test_zero_tilt_is_wrong_mode(self, capsys):
        code, _, err = run_cli(capsys, "solve", "--alpha", "1", "--lambda", "3", "--f", "0,0")
        assert code == 2
        assert "perturb" in err

    def test_zero_tilt_with_perturb_flag(self, capsys):
        doc = run_doc(
            capsys,
            "solve", "--alpha", "1", "--lambda", "3", "--f", "0,0",
            "--perturb", "--f-o", "1,1",
        )
        assert doc["kind"] == "perturb"

    def test_invalid_parameters(self, capsys):
        assert run_cli(capsys, "solve", "--alpha", "-1", "--lambda", "3", "--f", "1,1")[0] == 1
        assert run_cli(capsys, "solve", "--alpha", "1", "--lambda", "3")[0] == 1
        assert run_cli(capsys, "solve", "--alpha", "1", "--lambda", "3", "--f", "1,1", "--n", "3")[0] == 1
        assert run_cli(capsys, "solve", "--alpha", "1", "--lambda", "3", "--f", "a,b")[0] == 1
        assert run_cli(capsys, "solve", "--alpha", "1", "--lambda", "3", "--f", "1,1", "--format", "csv")[0] == 1
        assert run_cli(capsys, "solve", "--no-such-flag")[0] == 1

    def test_config_file(self, capsys, tmp_path):
        config = tmp_path / "spec.json"
        config.write_text('{"alpha": 1.0, "lambda": 3.0, "f": [1.0, 1.0]}')
        doc = run_doc(capsys, "solve", "--config", str(config))
        assert doc["spec"]["f"] == [1.0, 1.0]

    def test_config_rejects_unknown_keys(self, capsys, tmp_path):
        config = tmp_path / "spec.json"
        config.write_text('{"alpha": 1.0, "lambda": 3.0, "f": [1.0], "alpa": 2}')
        code, _, err = run_cli(capsys, "solve", "--config", str(config))
        assert code == 1
        assert "alpa" in err

    def test_config_and_flags_are_exclusive(self, capsys, tmp_path):
        config = tmp_path / "spec.json"
        config.write_text('{"alpha": 1.0, "lambda": 3.0, "f": [1.0]}')
        code, _, _ = run_cli(capsys, "solve", "--config", str(config), "--alpha", "1")
        assert code == 1

    def test_emit_plot_data(self, capsys, tmp_path):
        out_dir = tmp_path / "plots"
        run_doc(
            capsys,
            "solve", "--alpha", "1", "--lambda", "3", "--f", "1,1",
            "--emit-plot-data", str(out_dir),
        )
        names = sorted(p.name for p in out_dir.iterdir())
        assert names == [
            "dual_function_negative.csv",
            "dual_function_positive.csv",
            "section_point1_axis.csv",
            "section_point2_axis.csv",
            "section_point2_orthogonal.csv",
            "section_point3_axis.csv",
        ]
        header, first = (out_dir / "dual_function_negative.csv").read_text().splitlines()[:2]
        assert header == "sigma,dual_value"
        assert len(first.split(",")) == 2


class TestClassify:
    def test_reference_instance(self, capsys):
        doc = run_doc(capsys, "classify", "--alpha", "1", "--lambda", "3", "--f", "1,1")
        assert doc["kind"] == "classify"
        labels = [c["classification"] for c in doc["classifications"]]
        assert labels == ["global_min", "saddle", "local_max"]
        assert doc["saddle_cone"] is not None

    def test_zero_tilt_is_wrong_mode(self, capsys):
        code, _, _ = run_cli(capsys, "classify", "--alpha", "1", "--lambda", "3", "--n", "2")
        assert code == 2


class TestPerturb:
    def test_reference_limits(self, capsys):
        doc = run_doc(
            capsys, "perturb", "--alpha", "1", "--lambda", "3", "--n", "2", "--f-o", "1,1"
        )
        assert doc["kind"] == "perturb"
        root3 = math.sqrt(3.0)
        assert doc["limits"][0] == pytest.approx([root3, root3], abs=1e-12)
        assert doc["limits"][1] == pytest.approx([-root3, -root3], abs=1e-12)
        assert doc["limits"][2] == [0.0, 0.0]
        assert doc["converged"] is True
        assert max(doc["final_gaps"]) <= 1e-6

    def test_default_direction_reaches_sphere(self, capsys):
        doc = run_doc(capsys, "perturb", "--alpha", "1", "--lambda", "3", "--n", "2")
        x1 = np.array(doc["limits"][0])
        assert abs(float(x1 @ x1) - 6.0) <= 1e-6

    def test_k_max_truncation(self, capsys):
        doc = run_doc(
            capsys,
            "perturb", "--alpha", "1", "--lambda", "3", "--n", "2",
            "--f-o", "1,1", "--k-max", "4",
        )
        assert [s["k"] for s in doc["steps"]] == [1, 2, 4]
        assert doc["converged"] is False
        assert max(doc["final_gaps"]) > 1e-3

    def test_nonzero_tilt_is_wrong_mode(self, capsys):
        code, _, _ = run_cli(capsys, "perturb", "--alpha", "1", "--lambda", "3", "--f", "1,1")
        assert code == 2

    def test_invalid_direction(self, capsys):
        code, _, _ = run_cli(
            capsys,
            "perturb", "--alpha", "1", "--lambda", "3", "--n", "2", "--f-o", "3,3",
        )
        assert code == 1

    def test_emit_plot_data(self, capsys, tmp_path):
        out_dir = tmp_path / "plots"
        run_doc(
            capsys,
            "perturb", "--alpha", "1", "--lambda", "3", "--n", "2",
            "--emit-plot-data", str(out_dir),
        )
        names = sorted(p.name for p in out_dir.iterdir())
        assert "convergence.csv" in names


class TestSweep:
    def test_regime_transition_and_monotonicity(self, capsys):
        doc = run_doc(
            capsys,
            "sweep", "--alpha", "1", "--lambda", "3", "--f-dir", "1,1",
            "--f-min", "0.1", "--f-max", "5", "--steps", "100",
        )
        rows = doc["rows"]
        assert len(rows) == 100
        norms = [r["force_norm"] for r in rows]
        assert norms == sorted(norms)
        sigma1 = [r["sigma_1"] for r in rows]
        assert all(a < b for a, b in zip(sigma1, sigma1[1:]))
        threshold = math.sqrt(8.0)
        for row in rows:
            expected = "three_distinct" if row["force_norm"] < threshold else "single_real"
            assert row["regime"] == expected
            absent = row["sigma_2"] is None
            assert absent == (row["regime"] == "single_real")
            assert (row["sigma_3"] is None) == absent
        step = norms[1] - norms[0]
        last_three = max(r["force_norm"] for r in rows if r["regime"] == "three_distinct")
        first_single = min(r["force_norm"] for r in rows if r["regime"] == "single_real")
        assert last_three < threshold < first_single
        assert first_single - last_three <= step * (1 + 1e-12)

    def test_middle_roots_approach_degenerate_value(self, capsys):
        doc = run_doc(
            capsys,
            "sweep", "--alpha", "1", "--lambda", "3", "--f-dir", "1,0",
            "--f-min", "2.82", "--f-max", "2.8284", "--steps", "5",
        )
        last = doc["rows"][-1]
        assert last["regime"] == "three_distinct"
        assert abs(last["sigma_2"] - (-2.0)) <= 0.05
        assert abs(last["sigma_3"] - (-2.0)) <= 0.05

    def test_csv_output(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "sweep", "--alpha", "1", "--lambda", "3", "--f-dir", "1,1",
            "--f-min", "1", "--f-max", "4", "--steps", "4", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "force_norm,sigma_1,sigma_2,sigma_3,min_value,regime"
        assert len(lines) == 5
        assert lines[-1].endswith("single_real")

    def test_invalid_ranges(self, capsys):
        base = ("sweep", "--alpha", "1", "--lambda", "3", "--f-dir", "1,1")
        assert run_cli(capsys, *base, "--f-min", "0", "--f-max", "5")[0] == 1
        assert run_cli(capsys, *base, "--f-min", "5", "--f-max", "1")[0] == 1
        assert run_cli(capsys, *base, "--f-min", "1", "--f-max", "5", "--steps", "1")[0] == 1
        assert run_cli(capsys, "sweep", "--alpha", "1", "--lambda", "3",
                       "--f-dir", "0,0", "--f-min", "1", "--f-max", "5")[0] == 1


class TestVerify:
    def test_reference_instance_passes(self, capsys):
        doc = run_doc(capsys, "verify", "--alpha", "1", "--lambda", "3", "--f", "1,1")
        assert doc["kind"] == "verify"
        assert doc["passed"] is True
        names = {c["name"] for c in doc["checks"]}
        assert {"fd_primal_gradient", "root_residuals", "duality_gap",
                "grid_minimum", "saddle_direction_agreement"} <= names

    def test_injected_root_fails(self, capsys):
        code, out, err = run_cli(
            capsys,
            "verify", "--alpha", "1", "--lambda", "3", "--f", "1,1",
            "--inject-sigma", "0.6",
        )
        assert code == 3
        doc = json.loads(out)
        check = next(c for c in doc["checks"] if c["name"] == "injected_sigma_residual")
        assert check["passed"] is False
        assert "injected_sigma_residual" in err

    def test_injected_true_root_passes(self, capsys):
        sigma1 = 2 * math.cos(math.radians(40)) - 1
        code, _, _ = run_cli(
            capsys,
            "verify", "--alpha", "1", "--lambda", "3", "--f", "1,1",
            "--inject-sigma", f"{sigma1:.17g}",
        )
        assert code == 0

    def test_zero_tilt_runs_perturbation_checks(self, capsys):
        doc = run_doc(capsys, "verify", "--alpha", "1", "--lambda", "3", "--f", "0,0")
        names = {c["name"] for c in doc["checks"]}
        assert {"sphere_convergence", "antipodal_convergence",
                "origin_convergence", "perturbation_identity"} <= names
        assert doc["passed"] is True

    def test_seeded_determinism(self, capsys):
        args = ("verify", "--alpha", "1", "--lambda", "3", "--f", "1,1", "--seed", "5")
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert strip_timings(first) == strip_timings(second)


class TestReduce:
    def write_config(self, tmp_path, alpha, lam, f, rows, cols, data):
        config = tmp_path / "general.json"
        config.write_text(
            json.dumps(
                {"alpha": alpha, "lambda": lam, "f": f,
                 "B": {"rows": rows, "cols": cols, "data": data}}
            )
        )
        return config

    def test_scaled_identity(self, capsys, tmp_path):
        config = self.write_config(tmp_path, 1.0, 3.0, [1.0, 1.0], 2, 2, [2, 0, 0, 2])
        doc = run_doc(capsys, "reduce", "--config", str(config))
        assert doc["kind"] == "reduce"
        assert doc["reduced_force"] == [0.5, 0.5]
        assert doc["experimental"] is False
        assert doc["solve"]["regime"]["tag"] == "three_distinct"
        for point in doc["lifted_points"]:
            assert point["gradient_norm"] <= 1e-7 * (1.0 + math.sqrt(2.0))

    def test_tilt_outside_range(self, capsys, tmp_path):
        config = self.write_config(tmp_path, 1.0, 3.0, [0.0, 1.0], 2, 2, [1, 0, 0, 0])
        code, _, err = run_cli(capsys, "reduce", "--config", str(config))
        assert code == 1
        assert "range" in err

    def test_zero_tilt_routes_to_perturbation(self, capsys, tmp_path):
        config = self.write_config(tmp_path, 1.0, 3.0, [0.0, 0.0], 2, 2, [1, 0, 0, 1])
        doc = run_doc(capsys, "reduce", "--config", str(config))
        assert doc["experimental"] is True
        assert doc["perturb"]["kind"] == "perturb"
        for point in doc["lifted_points"]:
            assert point["gradient_norm"] <= 1e-7

    def test_rank_deficient_zero_tilt(self, capsys, tmp_path):
        config = self.write_config(
            tmp_path, 1.0, 3.0, [0.0, 0.0, 0.0], 2, 3, [1.0, 0.5, 0.0, 0.0, 0.5, 1.0]
        )
        doc = run_doc(capsys, "reduce", "--config", str(config))
        assert doc["experimental"] is True
        assert doc["operator_shape"] == [2, 3]
        for point in doc["lifted_points"]:
            assert point["gradient_norm"] <= 1e-7

    def test_requires_operator(self, capsys, tmp_path):
        config = tmp_path / "plain.json"
        config.write_text('{"alpha": 1.0, "lambda": 3.0, "f": [1.0, 1.0]}')
        assert run_cli(capsys, "reduce", "--config", str(config))[0] == 1
        assert run_cli(capsys, "reduce", "--alpha", "1", "--lambda", "3", "--f", "1,1")[0] == 1

    def test_bad_operator_shape(self, capsys, tmp_path):
        config = self.write_config(tmp_path, 1.0, 3.0, [1.0, 1.0], 2, 2, [1, 0, 0])
        assert run_cli(capsys, "reduce", "--config", str(config))[0] == 1
        config = self.write_config(tmp_path, 1.0, 3.0, [1.0, 1.0], -1, -2, [1, 0])
        assert run_cli(capsys, "reduce", "--config", str(config))[0] == 1


class TestDeterminismAcrossCommands:
    @pytest.mark.parametrize(
        "args",
        [
            ("classify", "--alpha", "1", "--lambda", "3", "--f", "2,2"),
            ("perturb", "--alpha", "1", "--lambda", "3", "--n", "2", "--k-max", "1024"),
            ("sweep", "--alpha", "1", "--lambda", "3", "--f-dir", "1,1",
             "--f-min", "0.5", "--f-max", "4", "--steps", "7"),
        ],
        ids=["classify", "perturb", "sweep"],
    )
    def test_repeat_runs_are_byte_identical(self, capsys, args):
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert strip_timings(first) == strip_timings(second)

    def test_reduce_runs_are_byte_identical(self, capsys, tmp_path):
        config = tmp_path / "general.json"
        config.write_text(
            json.dumps({"alpha": 1.0, "lambda": 3.0, "f": [1.0, 0.5],
                        "B": {"rows": 2, "cols": 2, "data": [1.5, 0.25, 0.0, 2.0]}})
        )
        _, first, _ = run_cli(capsys, "reduce", "--config", str(config))
        _, second, _ = run_cli(capsys, "reduce", "--config", str(config))
        assert strip_timings(first) == strip_timings(second)


def test_solve_output_round_trips_through_report_type(capsys):
    from doublewell.report import SolveReport

    _, out, _ = run_cli(capsys, "solve", "--alpha", "1", "--lambda", "3", "--f", "1,1")
    doc = json.loads(out)
    report = SolveReport.from_document(doc)
    doc.pop("timings")
    assert dumps_canonical(report.to_document()) == dumps_canonical(doc)


def test_plot_data_matches_the_dual_function(capsys, tmp_path):
    from doublewell.problem import ProblemSpec, dual_value

    out_dir = tmp_path / "plots"
    run_doc(
        capsys,
        "solve", "--alpha", "1", "--lambda", "3", "--f", "1,1",
        "--emit-plot-data", str(out_dir),
    )
    spec = ProblemSpec(1.0, 3.0, [1.0, 1.0])
    for name in ("dual_function_negative.csv", "dual_function_positive.csv"):
        lines = (out_dir / name).read_text().splitlines()[1:]
        assert len(lines) == 201
        for line in lines[:: 40]:
            sigma, value = (float(tok) for tok in line.split(","))
            assert value == pytest.approx(dual_value(spec, sigma), rel=1e-12)
    # the section through the global minimizer dips at t = 0
    lines = (out_dir / "section_point1_axis.csv").read_text().splitlines()[1:]
    values = [float(line.split(",")[1]) for line in lines]
    center = values[len(values) // 2]
    assert center == min(values)


class TestShippedConfigs:
    CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

    @pytest.mark.parametrize(
        "name,regime",
        [
            ("three_roots.json", "three_distinct"),
            ("degenerate_boundary.json", "degenerate"),
            ("single_root.json", "single_real"),
        ],
    )
    def test_solve_configs(self, capsys, name, regime):
        doc = run_doc(capsys, "solve", "--config", str(self.CONFIG_DIR / name))
        assert doc["regime"]["tag"] == regime

    def test_zero_tilt_config(self, capsys):
        code, _, _ = run_cli(capsys, "perturb", "--config", str(self.CONFIG_DIR / "zero_tilt.json"))
        assert code == 0

    def test_general_operator_config(self, capsys):
        doc = run_doc(capsys, "reduce", "--config", str(self.CONFIG_DIR / "general_operator.json"))
        assert doc["reduced_force"] == [0.5, 0.5]


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "doublewell", "solve",
         "--alpha", "1", "--lambda", "3", "--f", "1,1"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    doc = json.loads(result.stdout)
    assert doc["kind"] == "solve"


def test_no_command_prints_help(capsys):
    code, _, err = run_cli(capsys)
    assert code == 1
    assert "solve" in err
