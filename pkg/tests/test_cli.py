import json
from pathlib import Path

import pytest

from doublecover.cli import main
from doublecover.report import CheckResult, ExperimentReport


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


class TestCoverCube:
    def test_basic_run(self, capsys, tmp_path):
        code, out = run_cli(capsys, [
            "cover-cube", "--dim", "2", "--punctures", "0,0",
            "--delta", "0.0078125", "--gamma", "2", "--samples", "2000",
            "--out", str(tmp_path), "--no-figures"])
        assert code == 0
        doc = json.loads(out)
        assert doc["passed"]
        assert {c["name"] for c in doc["checks"]} >= {
            "separation-exact", "coverage", "count-bound"}
        assert (tmp_path / "report.json").exists()
        assert (tmp_path / "table.csv").exists()

    def test_gamma_validation(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["cover-cube", "--dim", "2", "--punctures", "0,0",
                  "--delta", "0.1", "--gamma", "1.0"])
        assert exc.value.code == 2

    def test_empty_punctures_vacuous(self, capsys):
        code, out = run_cli(capsys, [
            "cover-cube", "--dim", "2", "--punctures", "",
            "--delta", "0.25", "--gamma", "2", "--samples", "500"])
        assert code == 0
        doc = json.loads(out)
        assert doc["extra"]["count"] == 4

    def test_figures_rendered(self, capsys, tmp_path):
        code, _ = run_cli(capsys, [
            "cover-cube", "--dim", "2", "--punctures", "0,0",
            "--delta", "0.03125", "--gamma", "2", "--samples", "500",
            "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "cover_layout.png").stat().st_size > 1000


class TestChain:
    def test_chain_report(self, capsys):
        code, out = run_cli(capsys, [
            "chain", "--dim", "2", "--punctures", "0,0", "--delta", "0.03125",
            "--gamma", "2", "--from", "0.9,0.9", "--to=-0.9,0.9"])
        assert code == 0
        doc = json.loads(out)
        assert doc["extra"]["chain_length"] >= 2
        assert any(c["name"] == "radius-ratios" and c["passed"]
                   for c in doc["checks"])


class TestExperiments:
    def test_quadric_rejects_n5(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["experiment", "quadric", "--n", "5", "--eps-list", "0.25"])
        assert exc.value.code == 2

    def test_hyperbola_eps_range_validated(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["experiment", "hyperbola", "--eps-list", "0.6"])
        assert exc.value.code == 2

    def test_product_small(self, capsys):
        code, out = run_cli(capsys, [
            "experiment", "product", "--d", "2",
            "--eps-list", "0.125,0.0625", "--samples", "500"])
        assert code == 0
        doc = json.loads(out)
        assert any(c["name"] == "puncture-count" and c["passed"]
                   for c in doc["checks"])

    def test_table_format(self, capsys):
        code, out = run_cli(capsys, [
            "experiment", "product", "--d", "2", "--eps-list", "0.125",
            "--format", "table"])
        assert code == 0
        header = out.splitlines()[0]
        assert "count" in header and "delta" in header


class TestCoverHypersurface:
    def test_practical_small(self, capsys):
        code, out = run_cli(capsys, [
            "cover-hypersurface", "--poly", "z1*z2 - 0.04", "--dim", "2",
            "--K", "1.0", "--delta", "0.28", "--gamma", "1.5",
            "--samples", "500"])
        assert code == 0
        doc = json.loads(out)
        assert doc["extra"]["kappa"] > 10
        assert doc["passed"]

    def test_faithful_budget_reported(self, capsys):
        code, out = run_cli(capsys, [
            "cover-hypersurface", "--poly", "z1*z2 - 0.01", "--dim", "2",
            "--K", "1.0", "--delta", "0.14", "--mode", "faithful"])
        assert code == 0
        doc = json.loads(out)
        assert doc["extra"]["faithful_executed"] is False
        assert doc["extra"]["faithful_gamma"] == pytest.approx(38401.0)
        assert doc["extra"]["chart_count_bound"] > 1e20


class TestDeterminism:
    def test_cover_cube_reports_byte_identical(self, capsys, tmp_path):
        outs = []
        for d in ("a", "b"):
            code, _ = run_cli(capsys, [
                "cover-cube", "--dim", "2", "--punctures", "0.25,0.125",
                "--delta", "0.015625", "--gamma", "2", "--seed", "7",
                "--samples", "2000", "--out", str(tmp_path / d), "--no-figures"])
            assert code == 0
            outs.append(d)
        a, b = (tmp_path / d for d in outs)
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
        assert (a / "table.csv").read_bytes() == (b / "table.csv").read_bytes()


class TestExitCodes:
    def test_failing_check_gives_exit_one(self, capsys, tmp_path):
        from doublecover.cli import _emit

        report = ExperimentReport("x", {}, 0)
        report.checks.append(CheckResult("doomed", False, ""))

        class Args:
            out = None
            format = "report"
            no_figures = True

        assert _emit(report, Args()) == 1
        capsys.readouterr()
