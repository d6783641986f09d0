import math
import subprocess
import sys
from pathlib import Path

import pytest

from wvamp.cli import main
from wvamp.config import parse_config
from wvamp.scan import COLUMNS, ScanRow, amplification_scan, emit_csv, parse_csv

FIG1_TEXT = (
    Path(__file__).resolve().parents[1]
    / "src"
    / "wvamp"
    / "recipes"
    / "figure1.cfg"
).read_text(encoding="utf-8")

SINGLE_POINT = """
eigenvalues = -1, 1
pre = 1, 1
post = 0, 1
g = 0.4
d = 1.5
delta_q = 0.05
n0 = 100000
eta = 0.9
"""


class TestScan:
    def test_single_row_eigenstate_postselection(self):
        rows = amplification_scan(parse_config(SINGLE_POINT))
        assert len(rows) == 1
        row = rows[0]
        assert row.nonlinear_q == 0.0
        assert row.re_weak_value == pytest.approx(1.0)
        assert row.reason == ""

    def test_tiny_sample_budget_marks_rows_undefined(self):
        text = FIG1_TEXT.replace("n0 = 10000000", "n0 = 10")
        cfg = parse_config(text).with_overrides(c_scan=None, c=0.005)
        rows = amplification_scan(cfg)
        assert len(rows) == 1
        row = rows[0]
        assert row.reason == "EtaOutOfDomain"
        assert row.weak_q_ok is False
        assert row.margin_weak_q == -math.inf
        assert row.total_q is None

    def test_rows_self_consistent(self):
        cfg = parse_config(FIG1_TEXT)
        rows = amplification_scan(cfg)
        significant = [r for r in rows if r.weak_q_ok]
        assert significant
        for row in rows:
            if row.total_q is None:
                continue
            recomputed = row.systematic_q + row.statistical_q + row.nonlinear_q
            assert row.total_q == pytest.approx(recomputed, rel=1e-12)
            if row.weak_q_ok:
                assert row.total_q <= abs(row.re_weak_value)

    def test_engine_check_flags_nothing_on_figure_recipe(self):
        cfg = parse_config(FIG1_TEXT).with_overrides(
            c_scan=None, c=0.005, check_engine=True
        )
        rows = amplification_scan(cfg)
        assert rows[0].engine_ok is True
        assert rows[0].engine_dev < 1e-6

    def test_mc_columns_filled_when_enabled(self):
        cfg = parse_config(SINGLE_POINT).with_overrides(
            mc_trials=50, n0=200, seed=3
        )
        rows = amplification_scan(cfg)
        assert rows[0].mc_coverage_q is not None
        assert rows[0].mc_ok_q is True


class TestEmitCsv:
    def test_empty_rows_give_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv([], path)
        data = path.read_bytes()
        assert data == (",".join(COLUMNS) + "\r\n").encode()

    def test_round_trip_exact(self, tmp_path):
        row = ScanRow(
            scan_value=0.1,
            re_weak_value=5.000000000000001,
            im_weak_value=-0.25,
            survival_rate=1e-7,
            weak_q_ok=True,
            reason="",
        )
        path = tmp_path / "one.csv"
        emit_csv([row], path)
        parsed = parse_csv(path.read_text())
        assert len(parsed) == 1
        assert parsed[0]["re_weak_value"] == 5.000000000000001
        assert parsed[0]["survival_rate"] == 1e-7
        assert parsed[0]["weak_q_ok"] is True
        assert parsed[0]["shift_q"] is None

    def test_byte_stable(self, tmp_path):
        cfg = parse_config(SINGLE_POINT)
        rows = amplification_scan(cfg)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(rows, p1)
        emit_csv(amplification_scan(cfg), p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestGoldenFigure:
    def test_figure_scan_matches_pinned_output(self, tmp_path):
        golden = Path(__file__).parent / "data" / "figure1_golden.csv"
        rows = amplification_scan(parse_config(FIG1_TEXT))
        fresh = tmp_path / "fresh.csv"
        emit_csv(rows, fresh)
        assert fresh.read_bytes() == golden.read_bytes()


class TestCli:
    def test_run_success(self, tmp_path):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text(SINGLE_POINT)
        out = tmp_path / "out.csv"
        code = main(["run", str(cfg_path), "--out", str(out), "--no-plot"])
        assert code == 0
        assert out.exists()

    def test_run_renders_figure(self, tmp_path):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text(
            FIG1_TEXT.replace("c_scan = 5e-05, 0.5, 121", "c_scan = 0.001, 0.1, 9")
        )
        out = tmp_path / "scan.csv"
        code = main(["run", str(cfg_path), "--out", str(out)])
        assert code == 0
        assert out.with_suffix(".png").exists()

    def test_config_error_exit_code(self, tmp_path):
        cfg_path = tmp_path / "bad.cfg"
        cfg_path.write_text("eigenvalues = -1, 1\npre = 1, 1\nc = 0.1\n")
        assert main(["run", str(cfg_path), "--no-plot"]) == 2

    def test_missing_file_exit_code(self, tmp_path):
        assert main(["run", str(tmp_path / "absent.cfg"), "--no-plot"]) == 2

    def test_domain_error_exit_code(self, tmp_path):
        cfg_path = tmp_path / "tiny.cfg"
        cfg_path.write_text(FIG1_TEXT.replace("n0 = 10000000", "n0 = 10"))
        out = tmp_path / "tiny.csv"
        code = main(["run", str(cfg_path), "--out", str(out), "--no-plot"])
        assert code == 3
        assert out.exists()

    def test_figure1_subcommand_deterministic(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(["figure1", "--out", str(a), "--no-plot"]) == 0
        assert main(["figure1", "--out", str(b), "--no-plot"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_console_entry_point(self, tmp_path):
        out = tmp_path / "cli.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "wvamp.cli", "figure1", "--out", str(out), "--no-plot"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert out.exists()
