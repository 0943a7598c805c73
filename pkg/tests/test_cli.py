"""Command-line interface: building, evaluating, benchmarking, exit codes."""

import csv
import json
import os

import numpy as np
import pytest

from spectraltt import cli, stt


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBuild:
    def test_rank_one_family_reports_unit_ranks(self, capsys, tmp_path):
        out = str(tmp_path / "g.stt")
        code, stdout, _ = run(capsys, [
            "build", "--function", "genz-gaussian", "--dim", "10",
            "--degree", "7", "--eps", "1e-10", "--seed", "0", "--out", out])
        assert code == 0
        report = json.loads(stdout)
        assert report["ranks"] == [1] * 11
        assert os.path.exists(out)

    def test_alternate_function_spelling(self, capsys):
        code, stdout, _ = run(capsys, [
            "build", "--function", "gaussian-genz", "--dim", "3", "--degree", "3"])
        assert code == 0
        assert json.loads(stdout)["function"] == "genz-gaussian"

    def test_identical_seed_identical_report(self, capsys):
        argv = ["build", "--function", "genz-oscillatory", "--dim", "4", "--degree", "5",
                "--seed", "3"]
        code1, out1, _ = run(capsys, argv)
        code2, out2, _ = run(capsys, argv)
        assert code1 == code2 == 0
        r1, r2 = json.loads(out1), json.loads(out2)
        r1.pop("seconds"), r2.pop("seconds")  # wall time is the only jitter
        assert r1 == r2

    def test_zero_eps_is_usage_error(self, capsys):
        code, _, err = run(capsys, [
            "build", "--function", "genz-gaussian", "--dim", "3", "--eps", "0"])
        assert code == 2
        assert "eps" in err

    def test_unknown_function_is_usage_error(self, capsys):
        code, _, _ = run(capsys, ["build", "--function", "nope", "--dim", "2"])
        assert code == 2

    def test_config_file_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"function": "genz-gaussian", "dim": 3, "degree": 9}))
        code, stdout, _ = run(capsys, ["build", "--config", str(cfg), "--degree", "4"])
        assert code == 0
        report = json.loads(stdout)
        assert report["dim"] == 3 and report["degree"] == 4

    def test_malformed_config_is_format_error(self, capsys, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{not json")
        code, _, _ = run(capsys, ["build", "--function", "bump", "--config", str(cfg)])
        assert code == 4


class TestEval:
    @pytest.fixture()
    def surrogate_file(self, capsys, tmp_path):
        out = str(tmp_path / "b.stt")
        code, _, _ = run(capsys, [
            "build", "--function", "bump", "--dim", "2", "--mode", "linear",
            "--degree", "25", "--out", out])  # 26 nodes: 0.2 is a grid point
        assert code == 0
        return out

    def test_values_appended(self, capsys, tmp_path, surrogate_file):
        pts = tmp_path / "p.csv"
        with open(pts, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x1", "x2"])
            w.writerow([0.2, 0.2])
            w.writerow([0.9, 0.9])
        code, stdout, _ = run(capsys, ["eval", surrogate_file, str(pts)])
        assert code == 0
        rows = list(csv.reader(stdout.strip().splitlines()))
        assert rows[0] == ["x1", "x2", "value"]
        assert abs(float(rows[1][2]) - 1.0) < 1e-7  # grid node at the bump peak
        assert len(rows) == 3

    def test_empty_points_empty_output(self, capsys, tmp_path, surrogate_file):
        pts = tmp_path / "empty.csv"
        pts.write_text("x1,x2\n")
        code, stdout, _ = run(capsys, ["eval", surrogate_file, str(pts)])
        assert code == 0
        assert stdout.strip() == "x1,x2,value"

    def test_malformed_row_names_line(self, capsys, tmp_path, surrogate_file):
        pts = tmp_path / "bad.csv"
        pts.write_text("0.1,0.2\n0.3,oops\n")
        code, _, err = run(capsys, ["eval", surrogate_file, str(pts)])
        assert code == 4
        assert "line 2" in err

    def test_dimension_mismatch(self, capsys, tmp_path, surrogate_file):
        pts = tmp_path / "dim.csv"
        pts.write_text("0.1,0.2,0.3\n")
        code, _, _ = run(capsys, ["eval", surrogate_file, str(pts)])
        assert code == 4

    def test_not_a_surrogate_file(self, capsys, tmp_path):
        bogus = tmp_path / "x.stt"
        bogus.write_bytes(b"garbage")
        pts = tmp_path / "p.csv"
        pts.write_text("0.5,0.5\n")
        code, _, _ = run(capsys, ["eval", str(bogus), str(pts)])
        assert code == 4


class TestBench:
    def test_genz_suite_csv_shape(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"dims": [3, 5], "samples": 500}))
        code, stdout, _ = run(capsys, [
            "bench", "genz", "--family", "gaussian", "--degree", "5",
            "--seed", "0", "--config", str(cfg)])
        assert code == 0
        rows = list(csv.reader(stdout.strip().splitlines()))
        assert rows[0] == list(cli.BENCH_COLUMNS)
        assert len(rows) == 3
        assert [int(r[0]) for r in rows[1:]] == [3, 5]

    def test_byte_stable_for_fixed_seed(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"dims": [3], "samples": 300}))
        argv = ["bench", "genz", "--family", "oscillatory", "--degree", "4",
                "--seed", "1", "--config", str(cfg)]
        _, out1, _ = run(capsys, argv)
        _, out2, _ = run(capsys, argv)
        rows1 = [r[:-1] for r in csv.reader(out1.strip().splitlines())]
        rows2 = [r[:-1] for r in csv.reader(out2.strip().splitlines())]
        assert rows1 == rows2  # everything but the trailing seconds column

    def test_feature_suite(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"dims": [2], "samples": 500}))
        code, stdout, _ = run(capsys, [
            "bench", "feature", "--eps", "1e-10", "--seed", "0", "--config", str(cfg)])
        assert code == 0
        row = list(csv.reader(stdout.strip().splitlines()))[1]
        assert int(row[3]) < 1024  # far fewer evaluations than grid points

    def test_unknown_suite_usage_error(self, capsys):
        assert run(capsys, ["bench", "nosuch"])[0] == 2

    def test_out_flag_writes_file(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"dims": [3], "samples": 300}))
        out = tmp_path / "rows.csv"
        code, _, _ = run(capsys, [
            "bench", "genz", "--family", "gaussian", "--degree", "3",
            "--config", str(cfg), "--out", str(out)])
        assert code == 0
        assert out.read_text().startswith(",".join(cli.BENCH_COLUMNS))


class TestLedgerSpill:
    def test_cache_dir_reused_across_builds(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("STT_CACHE_DIR", str(tmp_path / "cache"))
        argv = ["build", "--function", "genz-gaussian", "--dim", "4", "--degree", "6",
                "--seed", "0"]
        code, out1, _ = run(capsys, argv)
        assert code == 0
        assert json.loads(out1)["eval_count"] > 0
        code, out2, _ = run(capsys, argv)
        assert code == 0
        assert json.loads(out2)["eval_count"] == 0  # everything served from spill

    def test_no_env_no_spill(self, capsys, tmp_path, monkeypatch):
        monkeypatch.delenv("STT_CACHE_DIR", raising=False)
        code, stdout, _ = run(capsys, [
            "build", "--function", "genz-gaussian", "--dim", "3", "--degree", "4"])
        assert code == 0


class TestHelp:
    def test_help_exits_cleanly(self, capsys):
        assert run(capsys, ["--help"])[0] == 0

    def test_no_command_is_usage_error(self, capsys):
        assert run(capsys, [])[0] == 2
