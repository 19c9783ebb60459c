import csv
import io
import json
import math

import pytest

from hus_hill.cli import build_parser, main, run_sweep
from hus_hill.config import AnalysisConfig


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestAnalyze:
    def test_small_cycle(self, capsys):
        code, out = _run(capsys, "analyze", "--h", "1", "--cycle", "0,0.5,-0.5", "--family", "Hill")
        assert code == 0
        document = json.loads(out)
        assert document["verdict"] == "Stable"
        assert document["composite"] == pytest.approx(224.0)
        assert document["s_pos"]["argmax_index"] == 2
        assert len(document["floquet_multipliers"]) == 2

    def test_pqr_expressions(self, capsys):
        code, out = _run(capsys, "analyze", "--h", "0.1", "--cycle", "pi,2*pi", "--family", "PQR")
        assert code == 0
        h, pi = 0.1, math.pi
        document = json.loads(out)
        assert document["k0_pos"] == pytest.approx(2 * (1 + h * pi) / (pi * (3 + 2 * h * pi)), rel=1e-12)

    def test_not_stable_exit_code(self, capsys):
        a = repr(math.sqrt(2.0))
        code, out = _run(capsys, "analyze", "--h", "1", f"--cycle=0,{a},-{a}")
        assert code == 3
        assert json.loads(out)["verdict"] == "NotStable_UnitModulus"

    def test_degenerate_exit_code(self, capsys):
        code, out = _run(capsys, "analyze", "--h", "0.5", "--cycle=-1/h")
        assert code == 4
        assert json.loads(out)["verdict"] == "Degenerate_ZeroFactor"

    def test_config_error_exit_code(self, capsys):
        code, _ = _run(capsys, "analyze", "--h", "1", "--cycle", "0.5", "--family", "Mathieu")
        assert code == 2

    def test_missing_cycle(self, capsys):
        code, _ = _run(capsys, "analyze", "--h", "1")
        assert code == 2

    def test_config_file(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"h": 1, "cycle": [0, 0.5, -0.5], "family": "PQR"}))
        code, out = _run(capsys, "analyze", "--config", str(path), "--family", "Hill")
        assert code == 0
        assert json.loads(out)["family"] == "Hill"

    @pytest.mark.parametrize("field,value", [("family", 5), ("params", "A"), ("window", True), ("cycle", [[0.5]])])
    def test_config_file_type_error(self, capsys, tmp_path, field, value):
        data = {"h": 1, "cycle": [0.5], "family": "Hill"}
        data[field] = value
        path = tmp_path / "run.json"
        path.write_text(json.dumps(data))
        code, out = _run(capsys, "analyze", "--config", str(path))
        assert code == 2
        assert out == ""

    def test_csv(self, capsys):
        code, out = _run(capsys, "analyze", "--h", "1", "--cycle", "0.5", "--out", "csv")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rows[0]["verdict"] == "Stable"
        assert float(rows[0]["composite"]) == pytest.approx(4.0)


class TestTrack:
    def test_bounded_hill(self, capsys):
        code, out = _run(
            capsys, "track", "--h", "1", "--cycle", "0.5", "--family", "Hill", "--epsilon", "1e-3", "--bounded"
        )
        assert code == 0
        document = json.loads(out)
        assert document["within_bound"]
        assert document["ratio"] <= 1.0 + 1e-6
        assert document["constant"] == pytest.approx(4.0)

    def test_zero_epsilon(self, capsys):
        code, out = _run(capsys, "track", "--h", "1", "--cycle", "0,0.5,-0.5", "--epsilon", "0")
        assert code == 0
        document = json.loads(out)
        assert document["sup_deviation"] == 0.0
        assert document["ratio"] is None

    def test_trajectories_csv(self, capsys):
        code, out = _run(
            capsys, "track", "--h", "1", "--cycle", "0.5", "--sign", "-", "--window", "20",
            "--bounded", "--trajectories", "--out", "csv",
        )
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 21
        assert list(rows[0]) == ["index", "t", "psi", "exact", "deviation"]

    def test_inconclusive_exit_code(self, capsys):
        code, _ = _run(
            capsys, "track", "--h", "1", "--cycle", "0.01", "--sign", "-", "--window", "10",
            "--profile", "constant_plus",
        )
        assert code == 5

    def test_explicit_profile(self, capsys):
        code, out = _run(
            capsys, "track", "--h", "1", "--cycle", "0,0.5,-0.5", "--sign", "+", "--epsilon", "0.01",
            "--profile", "explicit:0.01,-0.01,0.005",
        )
        assert code == 0
        assert json.loads(out)["epsilon"] == pytest.approx(0.01)

    def test_expanding_cycle_defaults_to_bounded(self, capsys):
        code, out = _run(capsys, "track", "--h", "1", "--cycle", "1.5", "--family", "PQR", "--epsilon", "1e-3")
        assert code == 0
        document = json.loads(out)
        assert document["bounded"]
        assert document["epsilon"] <= 1e-3 * (1 + 1e-9)
        assert document["within_bound"]
        assert document["constant"] == pytest.approx(8.0 / 3.0)

    def test_contracting_cycle_stays_forward(self, capsys):
        code, out = _run(capsys, "track", "--h", "1", "--cycle", "0,0.5,-0.5", "--family", "PQR")
        assert code == 0
        document = json.loads(out)
        assert not document["bounded"]
        assert document["within_bound"]

    def test_two_cycle_selected_sums(self, capsys):
        # A > B with 2/(A+B) < h < 1/B
        code, out = _run(capsys, "track", "--h", "1", "--cycle", "2,0.5", "--family", "Hill", "--epsilon", "1e-3")
        assert code == 0
        document = json.loads(out)
        assert document["selected_sums"] == "S1(lambda)*S1(-lambda)"
        assert document["bounded"]
        assert document["within_bound"]
        assert document["epsilon"] <= 1e-3 * (1 + 1e-9)


class TestSweep:
    def test_rows_in_grid_order(self, capsys):
        code, out = _run(
            capsys, "sweep", "--h", "1", "--cycle", "0,A,-A", "--param", "A=1", "--sweep", "A:0.1:0.9:9"
        )
        assert code == 0
        document = json.loads(out)
        assert [row["index"] for row in document["rows"]] == list(range(9))
        assert document["rows"][4]["value"] == pytest.approx(0.5)
        assert document["rows"][4]["composite"] == pytest.approx(224.0)

    def test_flags_unit_modulus(self):
        a = math.sqrt(2.0)
        config = AnalysisConfig.from_dict(
            {"h": 1, "cycle": [0, "A", "-A"], "params": {"A": 1}, "sweep": {"param": "A", "min": a, "max": a, "count": 1}}
        )
        row = run_sweep(config, max_workers=1)[0]
        assert row["verdict"] == "NotStable_UnitModulus"
        assert "unit_modulus" in row["flags"]
        assert row["skipped"]

    @pytest.mark.parametrize("h", [0.5, 1.0, 2.0])
    def test_three_cycle_argmax_switches(self, capsys, h):
        grid = f"A:{repr(0.006 / h)}:{repr(3.0 / h)}:500"
        code, out = _run(capsys, "sweep", "--h", repr(h), "--cycle", "0,A,-A", "--param", "A=1", "--sweep", grid)
        assert code == 0
        switch_pos = (1 + math.sqrt(17)) / 2
        switch_neg = math.sqrt(2.0)
        checked = 0
        for row in json.loads(out)["rows"]:
            x = h * row["value"]
            if row["skipped"] or min(abs(x - p) for p in (1.0, switch_neg, switch_pos)) < 1e-6:
                continue
            assert row["argmax_pos"] == (2 if x < switch_pos else 0)
            assert row["argmax_neg"] == (1 if x < switch_neg else 0)
            checked += 1
        assert checked >= 490

    def test_flags_near_zero_factor(self):
        value = 1.0 + 1e-11
        config = AnalysisConfig.from_dict(
            {"h": 1, "cycle": [0, "A", "-A"], "params": {"A": 1}, "sweep": {"param": "A", "min": value, "max": value, "count": 1}}
        )
        row = run_sweep(config, max_workers=1)[0]
        assert "zero_factor" in row["flags"]
        assert row["skipped"]

    def test_single_point_matches_analyze(self, capsys):
        _, out = _run(capsys, "analyze", "--h", "0.1", "--cycle", "pi,2*pi")
        analyzed = json.loads(out)
        _, out = _run(capsys, "sweep", "--h", "1", "--cycle", "pi,2*pi", "--sweep", "h:0.1:0.1:1")
        row = json.loads(out)["rows"][0]
        assert row["composite"] == analyzed["composite"]
        assert row["k0_pos"] == analyzed["k0_pos"]

    def test_csv(self, capsys):
        code, out = _run(
            capsys, "sweep", "--h", "1", "--cycle", "0,A,-A", "--param", "A=1", "--sweep", "A:0.1:0.5:3",
            "--out", "csv",
        )
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 3
        assert rows[0]["argmax_pos"] == "2"

    def test_missing_sweep(self, capsys):
        code, _ = _run(capsys, "sweep", "--h", "1", "--cycle", "0.5")
        assert code == 2


class TestOracle:
    def test_exhaustive(self, capsys):
        code, out = _run(capsys, "oracle", "--h", "1", "--cycle", "3", "--family", "FirstHomog")
        assert code == 0
        document = json.loads(out)
        assert document["exhaustive"]
        assert document["best_ratio"] >= 0.8


class TestParser:
    def test_no_command(self, capsys):
        assert main([]) == 1

    def test_verbose_flag(self):
        args = build_parser().parse_args(["-v", "analyze", "--cycle", "1"])
        assert args.verbose
        assert args.command == "analyze"
