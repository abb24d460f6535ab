"""Curve geometry: curvature, arclength, tubular charts."""

import numpy as np
import pytest
from scipy.integrate import quad

from dirac_ml.geometry import (
    ClosedCurve,
    CurveError,
    SelfIntersectionError,
    curvature,
    perimeter,
    tubular,
)


def test_unit_circle_curvature():
    c = ClosedCurve.circle(1.0)
    s = np.linspace(0, c.total_length, 17, endpoint=False)
    assert np.allclose(c.curvature(s), 1.0, atol=1e-12)


def test_ellipse_curvature_against_analytic_oracle():
    a, b = 2.0, 1.0
    c = ClosedCurve.ellipse(a, b)
    # oracle: kappa(t) = a b / (a^2 sin^2 t + b^2 cos^2 t)^{3/2}
    for t in np.linspace(0, 2 * np.pi, 13, endpoint=False):
        s = quad(lambda u: np.hypot(a * np.sin(u), b * np.cos(u)), 0, t, limit=200)[0]
        expected = a * b / (a**2 * np.sin(t) ** 2 + b**2 * np.cos(t) ** 2) ** 1.5
        assert abs(curvature(c, s) - expected) < 1e-10
    # the spec point (2, 0) is t = 0
    assert abs(curvature(c, 0.0) - 2.0) < 1e-12


@pytest.mark.parametrize(
    "curve",
    [
        ClosedCurve.circle(1.0),
        ClosedCurve.ellipse(2.0, 1.0),
        ClosedCurve.fourier(
            [[0, 0.1, 0.0, -0.2, 0.0], [1, 1.0, 0.0, 0.0, 1.0], [3, 0.08, 0.02, -0.03, 0.05]]
        ),
    ],
)
def test_total_turning(curve):
    s = np.linspace(0, curve.total_length, 4096, endpoint=False)
    integral = np.sum(curve.curvature(s)) * curve.total_length / len(s)
    assert abs(integral - 2 * np.pi) < 1e-10


def test_perimeter_circle():
    assert abs(perimeter(ClosedCurve.circle(1.0)) - 2 * np.pi) < 1e-12


def test_perimeter_ellipse_oracle():
    c = ClosedCurve.ellipse(2.0, 1.0)
    oracle = quad(
        lambda t: np.hypot(2.0 * np.sin(t), 1.0 * np.cos(t)),
        0.0,
        2 * np.pi,
        epsabs=1e-13,
        epsrel=1e-13,
        limit=400,
    )[0]
    frozen = 9.688448220547675
    assert abs(oracle - frozen) < 1e-12
    assert abs(perimeter(c) - frozen) < 1e-10


def reparametrized_circle_coeffs(radius=1.3, eps=0.3, modes=16):
    """Fourier table of t -> radius * e^{i(t + eps sin t)} via FFT."""
    n = 256
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    z = radius * np.exp(1j * (t + eps * np.sin(t)))
    rows = []
    for coord in (z.real, z.imag):
        f = np.fft.rfft(coord) / n
        a = np.zeros(modes + 1)
        b = np.zeros(modes + 1)
        a[0] = f[0].real
        a[1:] = 2 * f[1 : modes + 1].real
        b[1:] = -2 * f[1 : modes + 1].imag
        rows.append((a, b))
    (ax, bx), (ay, by) = rows
    return np.column_stack([np.arange(modes + 1), ax, bx, ay, by])


def test_fourier_reparametrized_circle():
    c = ClosedCurve.fourier(reparametrized_circle_coeffs())
    assert abs(perimeter(c) - 2 * np.pi * 1.3) < 1e-10
    s = np.linspace(0, c.total_length, 64, endpoint=False)
    assert np.allclose(c.curvature(s), 1 / 1.3, atol=1e-9)
    assert np.allclose(np.linalg.norm(c.point(s), axis=1), 1.3, atol=1e-12)


def test_curvature_parametrization_invariance():
    base = ClosedCurve.circle(1.3)
    repar = ClosedCurve.fourier(reparametrized_circle_coeffs())
    fracs = np.linspace(0, 1, 23, endpoint=False)
    k1 = base.curvature(fracs * base.total_length)
    k2 = repar.curvature(fracs * repar.total_length)
    assert np.allclose(k1, k2, atol=1e-8)


def test_tubular_weights():
    c = ClosedCurve.circle(1.0)
    interior = tubular(c, "interior", 0.5)
    exterior = tubular(c, "exterior", 0.5)
    s = np.array([0.3])
    t = np.array([0.1])
    assert abs(interior.weight(s, t)[0] - 0.9) < 1e-12
    assert abs(exterior.weight(s, t)[0] - 1.1) < 1e-12


@pytest.mark.parametrize("side", ["interior", "exterior"])
def test_tubular_jacobian_matches_weight(side):
    rng = np.random.default_rng(11)
    c = ClosedCurve.ellipse(2.0, 1.0)
    chart = tubular(c, side, 0.35)
    h = 1e-6
    for _ in range(100):
        s = rng.uniform(0, c.total_length)
        t = rng.uniform(0.01, 0.3)
        ds = (chart.map(np.array([s + h]), np.array([t])) - chart.map(np.array([s - h]), np.array([t]))) / (2 * h)
        dt = (chart.map(np.array([s]), np.array([t + h])) - chart.map(np.array([s]), np.array([t - h]))) / (2 * h)
        det = ds[0, 0] * dt[0, 1] - ds[0, 1] * dt[0, 0]
        phi = chart.weight(np.array([s]), np.array([t]))[0]
        assert abs(abs(det) - phi) < 1e-6


def test_tubular_distance_property():
    c = ClosedCurve.ellipse(2.0, 1.0)
    chart = tubular(c, "interior", 0.4)
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = rng.uniform(0, c.total_length)
        t = rng.uniform(0.02, 0.38)
        x = chart.map(np.array([s]), np.array([t]))[0]
        s_near = c.project(x)
        dist = np.linalg.norm(c.point(s_near) - x)
        assert abs(dist - t) < 1e-8


def test_tubular_width_validation():
    c = ClosedCurve.ellipse(2.0, 1.0)  # max |kappa| = 2
    with pytest.raises(SelfIntersectionError):
        tubular(c, "interior", 0.46)
    # exterior side of a convex curve accepts wide layers
    tubular(c, "exterior", 5.0)


def test_fourier_orientation_autofix():
    # clockwise circle: sin column negated
    cw = ClosedCurve.fourier([[1, 1.0, 0.0, 0.0, -1.0]])
    s = np.linspace(0, cw.total_length, 64, endpoint=False)
    assert np.allclose(cw.curvature(s), 1.0, atol=1e-10)


def test_self_intersection_rejected():
    # inner-loop limacon: r = 1 + 2 cos(t) self-intersects
    t = np.linspace(0, 2 * np.pi, 512, endpoint=False)
    with pytest.raises(CurveError):
        ClosedCurve.fourier(
            [[0, 1.0, 0.0, 0.0, 0.0], [1, 1.0, 0.0, 0.0, 1.0], [2, 1.0, 0.0, 0.0, 1.0]]
        )
