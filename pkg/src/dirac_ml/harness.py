"""Convergence studies and report emission.

Six studies:

* ``T1`` / ``T1-ball``: squared bag eigenvalues against the closed-form
  boundary reference (circle / round sphere) along a mass sweep to large
  negative values; asserts strictly decreasing gaps and the final-gap
  threshold.
* ``T2``: whole-plane jump eigenvalues against the bag values at fixed
  interior mass along an exterior-mass sweep; asserts the log-log decay
  slope of the gap.
* ``T3``: jump eigenvalues with coupled masses ``m = -M^p`` against the
  boundary reference; asserts strictly decreasing gaps.
* ``lichnerowicz``: squared-Dirac versus Bochner residuals on a curve.
* ``length-invariance``: Richardson-extrapolated constrained-operator
  eigenvalues of a curve against the equal-perimeter circle.

Reports serialize to CSV (17 significant digits, LF endings, bytewise
deterministic) and optionally to a hand-rolled log-log SVG plot.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from dirac_ml import boundary_spectra as bspec
from dirac_ml import fem2d
from dirac_ml.geometry import ClosedCurve, curve_from_spec
from dirac_ml.radial_exact import (
    RadialProblem,
    ball_mit_spectrum,
    disk_jump_spectrum,
    disk_mit_spectrum,
    reference_boundary_spectrum,
)

__all__ = ["StudyConfig", "StudyReport", "run_study", "emit_csv", "emit_svg"]

_STUDIES = ("T1", "T1-ball", "T2", "T3", "lichnerowicz", "length-invariance")


@dataclass(frozen=True)
class StudyConfig:
    """Sweep definition for one study."""

    study: str
    curve_spec: str = "circle 1.0"
    radius: float = 1.0
    m_list: tuple = (-4.0, -8.0, -16.0, -32.0, -64.0)
    M_list: tuple = (8.0, 16.0, 32.0, 64.0, 128.0)
    m_fixed: float = 0.0
    coupling_exponent: float = 0.5  # T3: m = -M^p
    backend: str = "exact"  # exact | fem
    jmax: int = 4
    h: float = 0.02
    ngrid: int = 256
    scheme: str = "fourier"
    seed: int = 20_250_809
    tol: float = 1e-8

    def __post_init__(self):
        if self.study not in _STUDIES:
            raise ValueError(f"study must be one of {_STUDIES}")
        if self.study in ("T1", "T1-ball") and len(self.m_list) == 0:
            raise ValueError("empty mass sweep")
        if self.study in ("T2", "T3") and len(self.M_list) == 0:
            raise ValueError("empty mass sweep")
        for lst, decreasing in ((self.m_list, True), (self.M_list, False)):
            diffs = np.diff(lst)
            if len(diffs) and not (np.all(diffs < 0) if decreasing else np.all(diffs > 0)):
                raise ValueError("sweep lists must be strictly monotone")


@dataclass(frozen=True)
class StudyReport:
    """Sweep table with references, gaps, fitted slope, and assertions."""

    study: str
    columns: tuple
    rows: tuple  # tuple of tuples of floats
    reference: tuple
    slopes: dict
    passes: dict
    seed: int
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.passes.values())


def _gaps(values, reference):
    return tuple(abs(v - r) for v, r in zip(values, reference))


def _fit_loglog_slope(x, y):
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.maximum(np.asarray(y, dtype=float), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def _bag_values(cfg: StudyConfig, m: float, count: int) -> np.ndarray:
    if cfg.backend == "fem":
        return fem2d.bag_spectrum_on_disk(
            cfg.radius, m, cfg.h, count, tol=cfg.tol
        )
    spec = disk_mit_spectrum(
        RadialProblem("disk", cfg.radius, m, channels=(-2, -1, 0, 1),
                      jmax_per_channel=max(2, count // 2 + 1))
    )
    return spec.values[:count]


def _study_t1(cfg: StudyConfig) -> StudyReport:
    count = cfg.jmax
    ref = reference_boundary_spectrum(
        "circle", 2 * np.pi * cfg.radius, count=count
    ).values
    rows = []
    for m in cfg.m_list:
        vals = _bag_values(cfg, m, count)
        rows.append((m, *vals, *ref[:count], *_gaps(vals, ref)))
    gap1 = [abs(r[1] - ref[0]) for r in rows]
    passes = {
        "gaps_strictly_decreasing": all(b < a for a, b in zip(gap1, gap1[1:])),
        "final_gap_below_0.02": gap1[-1] < 0.02,
    }
    if cfg.backend == "exact":
        last = rows[-1]
        clusters_ok = (
            abs(last[1] - last[2]) < 1e-8
            and abs(last[1] - 0.25) < 0.02
            and (count < 3 or abs(last[3] - 2.25) < 0.05)
        )
        passes["first_clusters_near_reference"] = bool(clusters_ok)
    cols = (
        ["m"]
        + [f"E{j}" for j in range(1, count + 1)]
        + [f"ref{j}" for j in range(1, count + 1)]
        + [f"gap{j}" for j in range(1, count + 1)]
    )
    return StudyReport(
        study="T1", columns=tuple(cols), rows=tuple(tuple(map(float, r)) for r in rows),
        reference=tuple(ref[:count]), slopes={}, passes=passes, seed=cfg.seed,
        meta={"backend": cfg.backend},
    )


def _study_t1_ball(cfg: StudyConfig) -> StudyReport:
    count = min(cfg.jmax, 4)
    ref = reference_boundary_spectrum("sphere", cfg.radius, count=count).values
    rows = []
    for m in cfg.m_list:
        spec = ball_mit_spectrum(
            RadialProblem("ball", cfg.radius, m, channels=(-2, -1, 1, 2),
                          jmax_per_channel=2)
        )
        vals = spec.values[:count]
        rows.append((m, *vals, *ref, *_gaps(vals, ref)))
    gap1 = [abs(r[1] - ref[0]) for r in rows]
    passes = {
        "gaps_strictly_decreasing": all(b < a for a, b in zip(gap1, gap1[1:])),
        "final_gap_below_0.06": gap1[-1] < 0.06,
    }
    cols = (
        ["m"]
        + [f"E{j}" for j in range(1, count + 1)]
        + [f"ref{j}" for j in range(1, count + 1)]
        + [f"gap{j}" for j in range(1, count + 1)]
    )
    return StudyReport(
        study="T1-ball", columns=tuple(cols),
        rows=tuple(tuple(map(float, r)) for r in rows),
        reference=tuple(ref), slopes={}, passes=passes, seed=cfg.seed,
    )


def _study_t2(cfg: StudyConfig) -> StudyReport:
    m = cfg.m_fixed
    bag = _bag_values(
        StudyConfig(study="T1", radius=cfg.radius, backend="exact"), m, 1
    )[0]
    rows = []
    for M in cfg.M_list:
        spec = disk_jump_spectrum(
            RadialProblem("disk", cfg.radius, m, M=float(M),
                          channels=(-1, 0), jmax_per_channel=2)
        )
        e1 = spec.values[0]
        rows.append((M, e1, bag, abs(e1 - bag)))
    slope = -_fit_loglog_slope([r[0] for r in rows], [r[3] for r in rows])
    passes = {"gap_decay_slope_in_band": 0.8 <= slope <= 1.25}
    return StudyReport(
        study="T2", columns=("M", "E1", "bag_E1", "gap1"),
        rows=tuple(tuple(map(float, r)) for r in rows),
        reference=(float(bag),), slopes={"gap1": slope}, passes=passes,
        seed=cfg.seed, meta={"m": m},
    )


def _study_t3(cfg: StudyConfig) -> StudyReport:
    ref = reference_boundary_spectrum("circle", 2 * np.pi * cfg.radius, count=1).values[0]
    rows = []
    for M in cfg.M_list:
        m = -float(M) ** cfg.coupling_exponent
        spec = disk_jump_spectrum(
            RadialProblem("disk", cfg.radius, m, M=float(M),
                          channels=(-1, 0), jmax_per_channel=2)
        )
        e1 = spec.values[0]
        rows.append((M, m, e1, ref, abs(e1 - ref)))
    gaps = [r[4] for r in rows]
    passes = {"gaps_strictly_decreasing": all(b < a for a, b in zip(gaps, gaps[1:]))}
    return StudyReport(
        study="T3", columns=("M", "m", "E1", "ref1", "gap1"),
        rows=tuple(tuple(map(float, r)) for r in rows),
        reference=(float(ref),), slopes={}, passes=passes, seed=cfg.seed,
        meta={"coupling_exponent": cfg.coupling_exponent},
    )


def _study_lichnerowicz(cfg: StudyConfig) -> StudyReport:
    curve = curve_from_spec(cfg.curve_spec)
    rows = []
    for ngrid in (cfg.ngrid, 2 * cfg.ngrid):
        d = bspec.build_discretization(curve, ngrid, cfg.scheme)
        rows.append((float(ngrid), bspec.lichnerowicz_residual(d)))
    passes = {}
    if cfg.scheme == "fourier":
        passes["residual_below_1e-10"] = rows[0][1] <= 1e-10
    else:
        ratio = rows[0][1] / rows[1][1]
        passes["residual_ratio_second_order"] = 3.5 <= ratio <= 4.5
    return StudyReport(
        study="lichnerowicz", columns=("ngrid", "residual"),
        rows=tuple(tuple(map(float, r)) for r in rows),
        reference=(), slopes={}, passes=passes, seed=cfg.seed,
        meta={"scheme": cfg.scheme, "curve": cfg.curve_spec},
    )


def _richardson_L(curve: ClosedCurve, ngrid: int, count: int) -> np.ndarray:
    coarse = bspec.operator_spectrum(
        bspec.assemble_L(bspec.build_discretization(curve, ngrid, "fd2")), count
    ).eigenvalues
    fine = bspec.operator_spectrum(
        bspec.assemble_L(bspec.build_discretization(curve, 2 * ngrid, "fd2")), count
    ).eigenvalues
    return (4.0 * fine - coarse) / 3.0


def _study_length_invariance(cfg: StudyConfig) -> StudyReport:
    curve = curve_from_spec(cfg.curve_spec)
    circle = ClosedCurve.circle(curve.total_length / (2 * np.pi))
    count = max(cfg.jmax, 6)
    a = _richardson_L(curve, cfg.ngrid, count)
    b = _richardson_L(circle, cfg.ngrid, count)
    rows = [
        (float(j + 1), a[j], b[j], abs(a[j] - b[j]) / abs(b[j]))
        for j in range(count)
    ]
    passes = {"relative_agreement_below_1e-3": all(r[3] < 1e-3 for r in rows)}
    return StudyReport(
        study="length-invariance",
        columns=("j", "curve_Ej", "circle_Ej", "rel_diff"),
        rows=tuple(tuple(map(float, r)) for r in rows),
        reference=tuple(b), slopes={}, passes=passes, seed=cfg.seed,
        meta={"curve": cfg.curve_spec},
    )


def run_study(cfg: StudyConfig) -> StudyReport:
    """Execute one study; assertions are recorded in ``report.passes``."""
    runner = {
        "T1": _study_t1,
        "T1-ball": _study_t1_ball,
        "T2": _study_t2,
        "T3": _study_t3,
        "lichnerowicz": _study_lichnerowicz,
        "length-invariance": _study_length_invariance,
    }[cfg.study]
    return runner(cfg)


# ------------------------------------------------------------- reports ---


def format_float(x: float) -> str:
    """17 significant digits (round-trips binary64 exactly)."""
    return f"{x:.16e}"


def emit_csv(report: StudyReport, path) -> None:
    """Deterministic CSV: header, 17-significant-digit decimals, LF."""
    if not report.rows:
        raise ValueError("refusing to write an empty report")
    buf = io.StringIO()
    buf.write(",".join(report.columns) + "\n")
    for row in report.rows:
        buf.write(",".join(format_float(v) for v in row) + "\n")
    for name, slope in sorted(report.slopes.items()):
        buf.write(f"# slope {name},{format_float(slope)}\n")
    for name, ok in sorted(report.passes.items()):
        buf.write(f"# assert {name},{'pass' if ok else 'FAIL'}\n")
    buf.write(f"# seed,{report.seed}\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())


def parse_csv(path):
    """Read back an emitted CSV: (columns, rows, annotations)."""
    rows, notes = [], {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition(",")
                notes[key] = val
                continue
            rows.append(tuple(float(p) for p in line.split(",")))
    return header, rows, notes


def emit_svg(report: StudyReport, path) -> None:
    """Log-log gap plot: one polyline per gap column, labeled axes."""
    if not report.rows:
        raise ValueError("refusing to plot an empty report")
    gap_cols = [i for i, c in enumerate(report.columns) if c.startswith("gap")]
    if not gap_cols:
        gap_cols = [len(report.columns) - 1]
    xs = [abs(r[0]) for r in report.rows]
    width, height, margin = 800, 600, 70
    buf = io.StringIO()
    buf.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
    )
    buf.write(f'<rect width="{width}" height="{height}" fill="white"/>\n')
    all_y = [max(r[i], 1e-300) for r in report.rows for i in gap_cols]
    lx = [math.log10(x) for x in xs]
    ly = [math.log10(y) for y in all_y]
    x0, x1 = min(lx), max(lx) or 1.0
    y0, y1 = min(ly), max(ly)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def px(v):
        return margin + (math.log10(v) - x0) / (x1 - x0) * (width - 2 * margin)

    def py(v):
        return height - margin - (math.log10(max(v, 1e-300)) - y0) / (y1 - y0) * (
            height - 2 * margin
        )

    buf.write(
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>\n'
    )
    buf.write(
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>\n'
    )
    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")
    for k, col in enumerate(gap_cols):
        pts = " ".join(
            f"{px(abs(r[0])):.2f},{py(r[col]):.2f}" for r in report.rows
        )
        buf.write(
            f'<polyline points="{pts}" fill="none" '
            f'stroke="{colors[k % len(colors)]}" stroke-width="2"/>\n'
        )
        buf.write(
            f'<text x="{width - margin + 5}" '
            f'y="{py(report.rows[-1][col]):.2f}" font-size="12">'
            f"{report.columns[col]}</text>\n"
        )
    for x in xs:
        buf.write(
            f'<text x="{px(x):.2f}" y="{height - margin + 20}" '
            f'font-size="12" text-anchor="middle">{x:g}</text>\n'
        )
    buf.write(
        f'<text x="{width / 2}" y="{height - 15}" font-size="14" '
        f'text-anchor="middle">log10 |{report.columns[0]}|</text>\n'
    )
    buf.write(
        f'<text x="20" y="{height / 2}" font-size="14" '
        f'transform="rotate(-90 20 {height / 2})" '
        f'text-anchor="middle">log10 gap</text>\n'
    )
    buf.write(f'<text x="{margin}" y="30" font-size="16">{report.study}</text>\n')
    buf.write("</svg>\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())
