"""Secular spectra on disk and ball against independent root oracles."""

import numpy as np
import pytest

from dirac_ml import specfun
from dirac_ml.radial_exact import (
    RadialProblem,
    ball_mit_spectrum,
    disk_jump_spectrum,
    disk_mit_spectrum,
    reference_boundary_spectrum,
)


def bisect(f, a, b, steps=200):
    fa = f(a)
    for _ in range(steps):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fa * fm <= 0:
            b = mid
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


def test_disk_massless_ground_mode_oracle():
    # oracle: lowest positive root of J_0(x) = J_1(x)
    x0 = bisect(lambda x: specfun.bessel_j(0, x) - specfun.bessel_j(1, x), 1.0, 2.0)
    assert abs(x0 - 1.4347) < 5e-4
    spec = disk_mit_spectrum(RadialProblem("disk", 1.0, 0.0))
    assert abs(spec.values[0] - x0**2) < 1e-10
    # doubly degenerate across the paired angular sectors
    assert abs(spec.values[1] - x0**2) < 1e-10
    assert spec.values[2] > spec.values[1] + 1.0


def test_disk_squares_nonnegative_and_residuals():
    for m in (0.0, -8.0, 5.0):
        spec = disk_mit_spectrum(RadialProblem("disk", 1.0, m))
        assert np.all(spec.values >= 0.0)
        assert all(e[4] <= 1e-10 for e in spec.entries)


def test_disk_deep_mass_window():
    spec = disk_mit_spectrum(RadialProblem("disk", 1.0, -64.0))
    assert 0.25 < spec.values[0] < 0.31


def test_disk_monotone_limit_toward_circle_reference():
    gaps = []
    for m in (-4.0, -8.0, -16.0, -32.0, -64.0):
        spec = disk_mit_spectrum(RadialProblem("disk", 1.0, m))
        gaps.append(spec.values[0] - 0.25)
        assert spec.values[0] > 0.25 - 1e-9
    assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.02


def test_disk_first_clusters_and_multiplicity():
    spec = disk_mit_spectrum(RadialProblem("disk", 1.0, -64.0))
    assert abs(spec.values[0] - spec.values[1]) < 1e-9
    assert abs(spec.values[2] - spec.values[3]) < 1e-9
    assert abs(spec.values[0] - 0.25) < 0.02
    assert abs(spec.values[2] - 2.25) < 0.05


def test_jump_equal_masses_empty():
    spec = disk_jump_spectrum(RadialProblem("disk", 1.0, 3.0, M=3.0))
    assert len(spec.values) == 0


def test_jump_below_threshold():
    spec = disk_jump_spectrum(RadialProblem("disk", 1.0, 0.0, M=16.0))
    assert np.all(spec.values < 16.0**2)


def test_jump_gap_rate_against_calibrated_constant():
    e_ref = disk_mit_spectrum(RadialProblem("disk", 1.0, 0.0)).values[0]
    gap16 = abs(
        disk_jump_spectrum(RadialProblem("disk", 1.0, 0.0, M=16.0)).values[0] - e_ref
    )
    C = 16.0 * gap16
    gap32 = abs(
        disk_jump_spectrum(RadialProblem("disk", 1.0, 0.0, M=32.0)).values[0] - e_ref
    )
    assert gap32 <= C / 32.0 * 1.05


def test_jump_oracle_one_root():
    # independent bracket of the k=0 secular at m=0, M=32 near E ~ 1.995
    m, M, R = 0.0, 32.0, 1.0

    def secular(E):
        p = abs(E)
        q = np.sqrt(M * M - E * E)
        return (E + m) * q * specfun.bessel_j(0, p * R) * specfun.bessel_k(
            1, q * R
        ) - (E + M) * p * specfun.bessel_j(1, p * R) * specfun.bessel_k(0, q * R)

    E_oracle = bisect(secular, 1.2, 1.7)
    spec = disk_jump_spectrum(RadialProblem("disk", 1.0, m, M=M))
    assert abs(spec.values[0] - E_oracle**2) < 1e-9


def test_ball_massless_ground_mode_oracle():
    x0 = bisect(
        lambda x: specfun.sph_bessel_j(0, x) - specfun.sph_bessel_j(1, x), 1.5, 3.0
    )
    assert abs(x0 - 2.0428) < 5e-4
    spec = ball_mit_spectrum(RadialProblem("ball", 1.0, 0.0, channels=(-2, -1, 1, 2)))
    assert abs(spec.values[0] - x0**2) < 1e-10
    # kappa = -1 and kappa = +1 each contribute degeneracy 2
    assert np.allclose(spec.values[:4], x0**2, atol=1e-9)


def test_ball_squares_nonnegative():
    spec = ball_mit_spectrum(RadialProblem("ball", 1.0, -8.0, channels=(-2, -1, 1, 2)))
    assert np.all(spec.values >= 0.0)


def test_ball_deep_mass_window():
    spec = ball_mit_spectrum(RadialProblem("ball", 1.0, -64.0, channels=(-2, -1, 1, 2)))
    assert 1.0 < spec.values[0] < 1.06


def test_reference_circle():
    ref = reference_boundary_spectrum("circle", 2 * np.pi, count=6)
    assert np.allclose(ref.values, [0.25, 0.25, 2.25, 2.25, 6.25, 6.25])


def test_reference_circle_matches_boundary_operator():
    from dirac_ml import boundary_spectra as bs
    from dirac_ml.geometry import ClosedCurve

    d = bs.build_discretization(ClosedCurve.circle(1.0), 128, "fourier")
    ev = bs.operator_spectrum(bs.assemble_L(d), 6).eigenvalues
    ref = reference_boundary_spectrum("circle", 2 * np.pi, count=6)
    assert np.allclose(ev, ref.values, atol=1e-10)


def test_reference_sphere():
    ref = reference_boundary_spectrum("sphere", 1.0, count=12)
    assert np.allclose(ref.values, [1.0] * 4 + [4.0] * 8)


def test_reference_circle_scaling():
    a = reference_boundary_spectrum("circle", 2 * np.pi, count=8)
    b = reference_boundary_spectrum("circle", 4 * np.pi, count=8)
    assert np.allclose(a.values, 4.0 * b.values)


def test_problem_validation():
    with pytest.raises(ValueError):
        RadialProblem("cube", 1.0, 0.0)
    with pytest.raises(ValueError):
        RadialProblem("ball", 1.0, 0.0, channels=(0, 1))
    with pytest.raises(ValueError):
        disk_jump_spectrum(RadialProblem("disk", 1.0, 0.0))
