import csv
import filecmp
import json
from pathlib import Path

from vib2move.cli import main


def run(args):
    return main([str(a) for a in args])


class TestPredict:
    def test_writes_trajectory_and_plot(self, tmp_path):
        assert run(["predict", "--scenario", "demo_pulse", "--out", tmp_path / "o"]) == 0
        rows = list(csv.reader(open(tmp_path / "o" / "trajectory.csv")))
        assert rows[0][0] == "step"
        assert rows[0][1:3] == ["finger_x_mm", "finger_y_mm"]
        assert len(rows) == 2301
        assert (tmp_path / "o" / "path.svg").read_text().startswith("<svg")

    def test_zero_steps_gives_header_only(self, tmp_path):
        assert run(["predict", "--scenario", "demo_pulse", "--n-steps", 0,
                    "--out", tmp_path / "o"]) == 0
        rows = list(csv.reader(open(tmp_path / "o" / "trajectory.csv")))
        assert len(rows) == 1

    def test_two_phase_classes_present(self, tmp_path):
        run(["predict", "--scenario", "demo_pulse", "--out", tmp_path / "o"])
        rows = list(csv.reader(open(tmp_path / "o" / "trajectory.csv")))[1:]
        classes = [r[7] for r in rows]
        assert classes[0] == "near_rotational"
        assert classes[-1] == "translational"

    def test_identical_invocations_byte_identical(self, tmp_path):
        run(["predict", "--scenario", "demo_pulse", "--out", tmp_path / "a"])
        run(["predict", "--scenario", "demo_pulse", "--out", tmp_path / "b"])
        for name in ("trajectory.csv", "path.svg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_missing_scenario_fails(self, tmp_path):
        assert run(["predict", "--scenario", "nope", "--out", tmp_path / "o"]) == 1


class TestPlan:
    def test_outputs(self, tmp_path):
        assert run(["plan", "--scenario", "demo_plan", "--out", tmp_path / "o"]) == 0
        metrics = json.loads((tmp_path / "o" / "metrics.json").read_text())
        assert metrics["final_error_pos_mm"] < 5.0
        assert metrics["final_error_angle_deg"] < 1.01
        actions = json.loads((tmp_path / "o" / "actions.json").read_text())
        assert {a["stage"] for a in actions} == {0, 1, 2, 3}
        assert (tmp_path / "o" / "path.svg").exists()

    def test_seeded_runs_byte_identical(self, tmp_path):
        run(["plan", "--scenario", "demo_plan", "--seed", 3, "--out", tmp_path / "a"])
        run(["plan", "--scenario", "demo_plan", "--seed", 3, "--out", tmp_path / "b"])
        match, mismatch, errors = filecmp.cmpfiles(
            tmp_path / "a", tmp_path / "b",
            ["trajectory.csv", "actions.json", "metrics.json", "path.svg"], shallow=False)
        assert not mismatch and not errors

    def test_unreachable_goal_exit_code(self, tmp_path):
        doc = json.loads(Path("src/vib2move/data/demo_plan.json").read_text())
        doc["goal_rel_mm_deg"] = [22.5, -40.0, 0.0]  # straight below the com
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        assert run(["plan", "--scenario", bad, "--out", tmp_path / "o"]) == 1


class TestEvaluate:
    def test_noise_free_batch(self, tmp_path):
        assert run(["evaluate", "--config", "eval_noise_free", "--seed", 7,
                    "--out", tmp_path / "o"]) == 0
        table = list(csv.reader(open(tmp_path / "o" / "table.csv")))
        assert table[0] == ["object", "surface", "size_mm", "weight_g", "rmse_pos_mm",
                            "rel_error_pct", "rmse_orient_deg", "success_rate"]
        assert len(table) == 8  # six objects + average + header
        assert table[-1][0] == "average"
        metrics = json.loads((tmp_path / "o" / "metrics.json").read_text())
        assert metrics["reconfigure"]["success_rate"] == 1.0
        trials = list(csv.reader(open(tmp_path / "o" / "trials.csv")))
        assert len(trials) == 61
        assert (tmp_path / "o" / "error_distribution.svg").exists()

    def test_two_seeds_differ_structurally_same(self, tmp_path):
        run(["evaluate", "--config", "eval_noise_free", "--seed", 1, "--out", tmp_path / "a"])
        run(["evaluate", "--config", "eval_noise_free", "--seed", 2, "--out", tmp_path / "b"])
        ma = json.loads((tmp_path / "a" / "metrics.json").read_text())
        mb = json.loads((tmp_path / "b" / "metrics.json").read_text())
        assert ma.keys() == mb.keys()
        assert ma != mb

    def test_seeded_runs_byte_identical(self, tmp_path):
        run(["evaluate", "--config", "eval_noise_free", "--seed", 5, "--out", tmp_path / "a"])
        run(["evaluate", "--config", "eval_noise_free", "--seed", 5, "--out", tmp_path / "b"])
        match, mismatch, errors = filecmp.cmpfiles(
            tmp_path / "a", tmp_path / "b",
            ["trials.csv", "table.csv", "metrics.json", "error_distribution.svg"],
            shallow=False)
        assert not mismatch and not errors
