"""Command-line entry point.

Subcommands: clifford-check, model1d, curve-spectrum, disk-exact,
ball-exact, fem2d, study.  Global flags (--config/--out/--seed/--tol/
--jmax/--svg) come before the subcommand; a line-based ``key = value``
config file supplies defaults that explicit command-line flags override.
``DIRAC_ML_THREADS`` caps sweep parallelism, ``DIRAC_ML_BACKEND`` selects
the numba or numpy assembly kernels.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from dirac_ml import boundary_spectra as bspec
from dirac_ml import clifford, fem2d, harness
from dirac_ml.geometry import curve_from_spec
from dirac_ml.harness import StudyConfig, emit_csv, emit_svg, format_float
from dirac_ml.model1d import Model1DParams, spectrum_S, spectrum_Sprime
from dirac_ml.radial_exact import RadialProblem, ball_mit_spectrum, disk_jump_spectrum, disk_mit_spectrum

__all__ = ["main"]


def _read_config(path):
    cfg = {}
    if path is None:
        return cfg
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, _, value = line.partition("=")
            cfg[key.strip()] = value.strip()
    return cfg


def _pick(cli_value, config, key, default, cast):
    if cli_value is not None:
        return cli_value
    if key in config:
        return cast(config[key])
    return default


def _write_rows(path, columns, rows, notes=()):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = [
                format_float(v) if isinstance(v, float) else str(v) for v in row
            ]
            fh.write(",".join(cells) + "\n")
        for note in notes:
            fh.write(f"# {note}\n")


def _cmd_clifford_check(args, config, out_dir):
    n = _pick(args.n, config, "n", 6, int)
    ok_all = True
    for dim in range(1, n + 1):
        rpt = clifford.anticommutation_report(dim)
        status = "pass" if rpt["ok"] else "FAIL"
        ok_all &= rpt["ok"]
        print(f"n={dim:2d} N={rpt['N']:3d} anticommutation {status}")
        for f in rpt["failures"]:
            print(f"    {f}")
    return 0 if ok_all else 1


def _cmd_model1d(args, config, out_dir):
    op = _pick(args.op, config, "op", "S", str)
    alpha = _pick(args.alpha, config, "alpha", 1.0, float)
    beta = _pick(args.beta, config, "beta", 0.0, float)
    delta = _pick(args.delta, config, "delta", 1.0, float)
    jmax = _pick(args.jmax, config, "jmax", 8, int)
    params = Model1DParams(alpha=alpha, beta=beta, delta=delta)
    spec = spectrum_S(params, jmax) if op == "S" else spectrum_Sprime(params, jmax)
    rows = [
        (j + 1, float(ev), float(res))
        for j, (ev, res) in enumerate(zip(spec.eigenvalues, spec.residuals))
    ]
    path = out_dir / f"model1d_{op}.csv"
    notes = [f"regime,{spec.regime_flag}"] if spec.regime_flag else []
    _write_rows(path, ("j", "eigenvalue", "residual"), rows, notes)
    print(f"wrote {path} ({len(rows)} eigenvalues)")
    return 0


def _cmd_curve_spectrum(args, config, out_dir):
    curve = curve_from_spec(_pick(args.curve, config, "curve", "circle 1.0", str))
    op = _pick(args.op, config, "op", "L", str)
    ngrid = _pick(args.ngrid, config, "ngrid", 256, int)
    scheme = _pick(args.scheme, config, "scheme", "fourier", str)
    jmax = _pick(args.jmax, config, "jmax", 8, int)
    d = bspec.build_discretization(curve, ngrid, scheme)
    if op == "lichnerowicz":
        res = bspec.lichnerowicz_residual(d)
        path = out_dir / "curve_lichnerowicz.csv"
        _write_rows(path, ("ngrid", "residual"), [(ngrid, float(res))])
        print(f"lichnerowicz residual = {res:.3e} ({scheme}, ngrid={ngrid})")
        return 0
    if op == "L":
        matrix = bspec.assemble_L(d)
        spec = bspec.operator_spectrum(matrix, jmax)
        vals, resid = spec.eigenvalues, spec.residuals
    elif op == "Dsigma":
        matrix = bspec.assemble_extrinsic_dirac(d)
        all_vals = np.linalg.eigvalsh(matrix.matrix)
        order = np.argsort(np.abs(all_vals))[:jmax]
        vals = all_vals[np.sort(order)]
        resid = np.zeros_like(vals)
    else:
        raise ValueError(f"unknown operator {op!r}")
    rows = [(j + 1, float(v), float(r)) for j, (v, r) in enumerate(zip(vals, resid))]
    path = out_dir / f"curve_{op}.csv"
    _write_rows(path, ("j", "eigenvalue", "residual"), rows)
    print(f"wrote {path}")
    return 0


def _radial_csv(spec, path):
    rows = [
        (int(ch), int(j), float(e2), float(res))
        for (ch, j, _e, e2, res) in spec.entries
    ]
    _write_rows(path, ("channel", "j", "eigenvalue_of_square", "secular_residual"), rows)


def _cmd_disk_exact(args, config, out_dir):
    radius = _pick(args.radius, config, "radius", 1.0, float)
    m = _pick(args.m, config, "m", 0.0, float)
    M = _pick(args.M, config, "M", None, float)
    channels = _pick(args.channels, config, "channels", 3, int)
    jmax = _pick(args.jmax, config, "jmax", 4, int)
    chans = tuple(range(-channels, channels))
    problem = RadialProblem("disk", radius, m, M=M, channels=chans,
                            jmax_per_channel=jmax)
    spec = disk_jump_spectrum(problem) if M is not None else disk_mit_spectrum(problem)
    path = out_dir / "disk_exact.csv"
    _radial_csv(spec, path)
    shown = ", ".join(f"{v:.6f}" for v in spec.values[:6])
    print(f"wrote {path}; lowest squares: {shown}")
    return 0


def _cmd_ball_exact(args, config, out_dir):
    radius = _pick(args.radius, config, "radius", 1.0, float)
    m = _pick(args.m, config, "m", 0.0, float)
    channels = _pick(args.channels, config, "channels", 2, int)
    jmax = _pick(args.jmax, config, "jmax", 4, int)
    chans = tuple(k for k in range(-channels, channels + 1) if k != 0)
    spec = ball_mit_spectrum(
        RadialProblem("ball", radius, m, channels=chans, jmax_per_channel=jmax)
    )
    path = out_dir / "ball_exact.csv"
    _radial_csv(spec, path)
    shown = ", ".join(f"{v:.6f}" for v in spec.values[:6])
    print(f"wrote {path}; lowest squares: {shown}")
    return 0


def _cmd_fem2d(args, config, out_dir):
    problem = _pick(args.problem, config, "problem", "bag", str)
    curve = curve_from_spec(_pick(args.curve, config, "curve", "circle 1.0", str))
    h = _pick(args.h, config, "h", 0.05, float)
    m = _pick(args.m, config, "m", 0.0, float)
    M = _pick(args.M, config, "M", 32.0, float)
    box = _pick(args.box, config, "box", 3.0, float)
    jmax = _pick(args.jmax, config, "jmax", 4, int)
    tol = _pick(args.tol, config, "tol", 1e-8, float)
    seed = _pick(args.seed, config, "seed", 20_250_809, int)
    if problem == "bag":
        mesh = fem2d.build_mesh(curve, h, "bag", layer_spec=fem2d.auto_layer(m))
        pencil = fem2d.assemble_bag_form(mesh, m)
    else:
        mesh = fem2d.build_mesh(
            curve, h, "jump", layer_spec=fem2d.auto_layer(m),
            box_half_width=box, layer_spec_out=fem2d.auto_layer(M),
        )
        pencil = fem2d.assemble_jump_form(mesh, m, M)
    spec = fem2d.pencil_lowest(pencil, jmax, tol=tol, seed=seed)
    flagged = [bool(v >= 0.9 * M * M) if problem == "jump" else False
               for v in spec.eigenvalues]
    rows = [
        (j + 1, float(v), float(r), int(fl))
        for j, (v, r, fl) in enumerate(zip(spec.eigenvalues, spec.residuals, flagged))
    ]
    path = out_dir / f"fem2d_{problem}.csv"
    _write_rows(path, ("j", "eigenvalue_of_square", "residual", "near_essential"),
                rows, [f"seed,{seed}"])
    print(f"wrote {path}; dofs={pencil.K.shape[0]}, nv={mesh.num_vertices}")
    return 0


def _cmd_study(args, config, out_dir):
    name = _pick(args.study, config, "study", "T1", str)
    backend = _pick(args.backend, config, "backend", "exact", str)
    jmax = _pick(args.jmax, config, "jmax", 4, int)
    seed = _pick(args.seed, config, "seed", 20_250_809, int)
    tol = _pick(args.tol, config, "tol", 1e-8, float)
    kwargs = dict(
        study=name,
        backend=backend,
        jmax=jmax,
        seed=seed,
        tol=tol,
        curve_spec=_pick(args.curve, config, "curve", "circle 1.0", str),
        h=_pick(args.h, config, "h", 0.02, float),
        ngrid=_pick(args.ngrid, config, "ngrid", 256, int),
        scheme=_pick(args.scheme, config, "scheme",
                     "fd2" if name == "length-invariance" else "fourier", str),
        coupling_exponent=_pick(args.p, config, "p", 0.5, float),
    )
    if args.m_list or "m_list" in config:
        raw = args.m_list or config["m_list"]
        kwargs["m_list"] = tuple(float(x) for x in raw.split(","))
    if args.M_list or "M_list" in config:
        raw = args.M_list or config["M_list"]
        kwargs["M_list"] = tuple(float(x) for x in raw.split(","))
    if name == "T3" and "M_list" not in kwargs:
        kwargs["M_list"] = (16.0, 64.0, 256.0)
    if name == "T1" and backend == "fem" and "m_list" not in kwargs:
        kwargs["m_list"] = (-4.0, -8.0)
    report = harness.run_study(StudyConfig(**kwargs))
    csv_path = out_dir / f"study_{name}.csv"
    emit_csv(report, csv_path)
    print(f"wrote {csv_path}")
    if args.svg:
        svg_path = out_dir / f"study_{name}.svg"
        emit_svg(report, svg_path)
        print(f"wrote {svg_path}")
    for key, ok in sorted(report.passes.items()):
        print(f"{name}: {key}: {'pass' if ok else 'FAIL'}")
    for key, slope in sorted(report.slopes.items()):
        print(f"{name}: slope[{key}] = {slope:.4f}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirac-ml",
        description="Spectral studies of Dirac operators with large mass couplings",
    )
    parser.add_argument("--config", type=Path, default=None,
                        help="key = value defaults file")
    parser.add_argument("--out", type=Path, default=Path("."),
                        help="output directory for CSV/SVG")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--jmax", type=int, default=None)
    parser.add_argument("--svg", action="store_true",
                        help="emit an SVG plot for study reports")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clifford-check", help="exact anticommutation audit")
    p.add_argument("--n", type=int, default=None)

    p = sub.add_parser("model1d", help="1D Robin model spectra")
    p.add_argument("--op", choices=("S", "Sprime"), default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)

    p = sub.add_parser("curve-spectrum", help="boundary operators on a curve")
    p.add_argument("--curve", type=str, default=None)
    p.add_argument("--op", choices=("L", "Dsigma", "lichnerowicz"), default=None)
    p.add_argument("--ngrid", type=int, default=None)
    p.add_argument("--scheme", choices=("fourier", "fd2"), default=None)

    p = sub.add_parser("disk-exact", help="secular disk spectra")
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--M", type=float, default=None)
    p.add_argument("--channels", type=int, default=None)

    p = sub.add_parser("ball-exact", help="secular ball spectra")
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--channels", type=int, default=None)

    p = sub.add_parser("fem2d", help="finite-element spectra")
    p.add_argument("--problem", choices=("bag", "jump"), default=None)
    p.add_argument("--curve", type=str, default=None)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--M", type=float, default=None)
    p.add_argument("--box", type=float, default=None)

    p = sub.add_parser("study", help="convergence studies")
    p.add_argument("--study", choices=(
        "T1", "T1-ball", "T2", "T3", "lichnerowicz", "length-invariance"
    ), default=None)
    p.add_argument("--backend", choices=("exact", "fem"), default=None)
    p.add_argument("--curve", type=str, default=None)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--ngrid", type=int, default=None)
    p.add_argument("--scheme", choices=("fourier", "fd2"), default=None)
    p.add_argument("--p", type=float, default=None,
                   help="coupling exponent for T3 (m = -M^p)")
    p.add_argument("--m-list", dest="m_list", type=str, default=None,
                   help="comma-separated mass sweep")
    p.add_argument("--M-list", dest="M_list", type=str, default=None,
                   help="comma-separated exterior mass sweep")
    return parser


_COMMANDS = {
    "clifford-check": _cmd_clifford_check,
    "model1d": _cmd_model1d,
    "curve-spectrum": _cmd_curve_spectrum,
    "disk-exact": _cmd_disk_exact,
    "ball-exact": _cmd_ball_exact,
    "fem2d": _cmd_fem2d,
    "study": _cmd_study,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = _read_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return _COMMANDS[args.command](args, config, out_dir)


if __name__ == "__main__":
    sys.exit(main())
