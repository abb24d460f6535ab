"""Studies, CSV/SVG emission, config handling, CLI integration."""

import subprocess
import sys

import numpy as np
import pytest

from dirac_ml.harness import (
    StudyConfig,
    emit_csv,
    emit_svg,
    format_float,
    parse_csv,
    run_study,
)


def test_study_config_validation():
    with pytest.raises(ValueError):
        StudyConfig(study="T9")
    with pytest.raises(ValueError):
        StudyConfig(study="T1", m_list=(-4.0, -2.0))  # not decreasing
    with pytest.raises(ValueError):
        StudyConfig(study="T2", M_list=())


@pytest.fixture(scope="module")
def t1_report():
    return run_study(StudyConfig(study="T1", jmax=3))


def test_t1_assertions(t1_report):
    assert t1_report.passed
    gaps = [row[-3] for row in t1_report.rows]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.02


def test_t1_gap_columns_derived(t1_report):
    count = 3
    for row in t1_report.rows:
        for j in range(count):
            assert row[1 + 2 * count + j] == abs(row[1 + j] - row[1 + count + j])


def test_csv_determinism_and_roundtrip(tmp_path, t1_report):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(t1_report, p1)
    emit_csv(t1_report, p2)
    assert p1.read_bytes() == p2.read_bytes()
    header, rows, notes = parse_csv(p1)
    assert header[0] == "m"
    flat = [v for row in t1_report.rows for v in row]
    back = [v for row in rows for v in row]
    assert flat == back  # 17 significant digits round-trip binary64


def test_format_float_roundtrip():
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = float(rng.standard_normal() * 10.0 ** rng.integers(-12, 12))
        assert float(format_float(x)) == x


def test_empty_report_refused(tmp_path):
    report = run_study(StudyConfig(study="T1", jmax=1))
    from dataclasses import replace
    empty = replace(report, rows=())
    with pytest.raises(ValueError):
        emit_csv(empty, tmp_path / "x.csv")
    with pytest.raises(ValueError):
        emit_svg(empty, tmp_path / "x.svg")


def test_svg_output(tmp_path, t1_report):
    path = tmp_path / "plot.svg"
    emit_svg(t1_report, path)
    text = path.read_text()
    assert "<svg" in text and "polyline" in text and "log10" in text


def test_t2_slope_band():
    report = run_study(StudyConfig(study="T2"))
    assert report.passed
    assert 0.8 <= report.slopes["gap1"] <= 1.25


def test_t3_decreasing():
    report = run_study(StudyConfig(study="T3", M_list=(16.0, 64.0, 256.0)))
    assert report.passed


def test_lichnerowicz_study():
    report = run_study(StudyConfig(study="lichnerowicz", ngrid=128))
    assert report.passed


def test_cli_end_to_end(tmp_path):
    cmd = [
        sys.executable, "-m", "dirac_ml.cli", "--out", str(tmp_path),
        "study", "--study", "T3",
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "study_T3.csv").exists()
    # determinism across runs: byte-identical CSV
    first = (tmp_path / "study_T3.csv").read_bytes()
    proc = subprocess.run(cmd, capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0
    assert (tmp_path / "study_T3.csv").read_bytes() == first


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("op = Sprime\nalpha = 20.0\nbeta = 1.0\ndelta = 1.0\n# comment\n")
    cmd = [
        sys.executable, "-m", "dirac_ml.cli", "--config", str(cfg),
        "--out", str(tmp_path), "model1d",
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    out = (tmp_path / "model1d_Sprime.csv").read_text()
    first = out.splitlines()[1].split(",")
    assert abs(float(first[1]) + 400.0) < 1e-5


def test_cli_flag_overrides_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 20.0\ndelta = 1.0\n")
    cmd = [
        sys.executable, "-m", "dirac_ml.cli", "--config", str(cfg),
        "--out", str(tmp_path), "model1d", "--op", "S", "--alpha", "0.0",
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    out = (tmp_path / "model1d_S.csv").read_text()
    first = out.splitlines()[1].split(",")
    assert abs(float(first[1]) - (0.5 * np.pi) ** 2) < 1e-9
