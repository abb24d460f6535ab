"""Bessel-function accuracy checks against a high-precision series oracle."""

import math

import mpmath as mp
import numpy as np
import pytest

from dirac_ml import specfun
from dirac_ml.specfun import (
    RangeError,
    SingularityError,
    bessel_i,
    bessel_j,
    bessel_k,
    sph_bessel_i,
    sph_bessel_j,
)

mp.mp.dps = 40


def oracle_j_series(k, x, terms=30):
    """Independent 30-term ascending-series oracle in 40-digit arithmetic."""
    x = mp.mpf(x)
    out = mp.mpf(0)
    for j in range(terms):
        out += (-1) ** j * (x / 2) ** (2 * j + k) / (mp.factorial(j) * mp.factorial(j + k))
    return out


def oracle_i_series(k, x, terms=30):
    x = mp.mpf(x)
    out = mp.mpf(0)
    for j in range(terms):
        out += (x / 2) ** (2 * j + k) / (mp.factorial(j) * mp.factorial(j + k))
    return out


def test_j_at_zero():
    assert bessel_j(0, 0.0) == 1.0
    for k in (1, 2, 7, 40):
        assert bessel_j(k, 0.0) == 0.0


def test_j0_of_one_frozen_value():
    frozen = 0.765197686557967
    assert abs(oracle_j_series(0, 1) - frozen) < 1e-15
    assert abs(bessel_j(0, 1.0) - frozen) < 1e-12


def test_i0_of_one_frozen_value():
    frozen = 1.266065877752008
    assert abs(oracle_i_series(0, 1) - frozen) < 1e-15
    assert abs(bessel_i(0, 1.0) - frozen) < 1e-12


@pytest.mark.parametrize("kind,ours,ref", [
    ("j", bessel_j, mp.besselj),
    ("i", bessel_i, mp.besseli),
])
def test_accuracy_grid_j_i(kind, ours, ref):
    ks = [0, 1, 2, 3, 5, 8, 13, 21, 40]
    xs = [1e-3, 0.1, 0.7, 1.0, 3.0, 7.5, 9.9, 10.1, 14.0, 25.0, 60.0, 130.0, 200.0]
    worst = 0.0
    for k in ks:
        for x in xs:
            v = ours(k, x)
            r = float(ref(k, mp.mpf(x)))
            err = abs(v - r) / max(1.0, abs(r))
            worst = max(worst, err)
    assert worst <= specfun.ERR_BOUND


def test_accuracy_grid_k():
    ks = [0, 1, 2, 3, 5, 8, 13, 21, 40]
    xs = [1e-3, 0.1, 0.7, 1.0, 3.0, 6.9, 7.1, 9.0, 12.0, 15.9, 16.1, 25.0, 80.0, 200.0]
    worst = 0.0
    for k in ks:
        for x in xs:
            v = bessel_k(k, x)
            r = float(mp.besselk(k, mp.mpf(x)))
            err = abs(v - r) / max(1.0, abs(r))
            worst = max(worst, err)
    assert worst <= specfun.ERR_BOUND


def test_accuracy_grid_spherical():
    ls = [0, 1, 2, 3, 5, 8, 12, 20]
    xs = [1e-3, 0.5, 1.0, 3.0, 7.0, 15.0, 40.0, 110.0, 200.0]
    worst = 0.0
    for l in ls:
        for x in xs:
            vj = sph_bessel_j(l, x)
            rj = float(mp.sqrt(mp.pi / (2 * mp.mpf(x))) * mp.besselj(l + mp.mpf("0.5"), mp.mpf(x)))
            worst = max(worst, abs(vj - rj))
            vi = sph_bessel_i(l, x)
            ri = float(mp.sqrt(mp.pi / (2 * mp.mpf(x))) * mp.besseli(l + mp.mpf("0.5"), mp.mpf(x)))
            worst = max(worst, abs(vi - ri) / max(1.0, abs(ri)))
    assert worst <= specfun.ERR_BOUND


def test_sph_j0_closed_form():
    xs = np.linspace(0.3, 40.0, 37)
    for x in xs:
        assert abs(sph_bessel_j(0, x) - math.sin(x) / x) < 1e-13
    assert abs(sph_bessel_j(0, math.pi)) < 1e-13


def test_j_three_term_recurrence_grid():
    rng = np.random.default_rng(5)
    count = 0
    while count < 200:
        k = int(rng.integers(1, 39))
        x = float(rng.uniform(0.05, 200.0))
        resid = bessel_j(k + 1, x) - (2 * k / x) * bessel_j(k, x) + bessel_j(k - 1, x)
        assert abs(resid) <= 1e-11
        count += 1


def test_ik_wronskian_grid():
    rng = np.random.default_rng(6)
    for _ in range(200):
        k = int(rng.integers(0, 39))
        x = float(rng.uniform(0.05, 200.0))
        w = bessel_i(k, x) * bessel_k(k + 1, x) + bessel_i(k + 1, x) * bessel_k(k, x)
        assert abs(w - 1.0 / x) <= 1e-11 * max(1.0, 1.0 / x)


def test_monotonicity():
    xs = np.linspace(0.05, 60.0, 300)
    for k in (0, 1, 4):
        iv = specfun.bessel_i_array(k, xs)
        kv = specfun.bessel_k_array(k, xs)
        assert np.all(np.diff(iv) > 0)
        assert np.all(np.diff(kv) < 0)


def test_range_errors():
    with pytest.raises(RangeError):
        bessel_j(41, 1.0)
    with pytest.raises(RangeError):
        bessel_j(3, 701.0)  # oscillatory families extend to 700
    with pytest.raises(RangeError):
        bessel_i(3, 201.0)  # growing families stop at the accuracy box
    with pytest.raises(RangeError):
        bessel_j(3, -0.5)
    with pytest.raises(SingularityError):
        bessel_k(0, 0.0)


def test_eval_record():
    rec = specfun.evaluate("j", 2, 1.5)
    assert rec.order == 2 and rec.argument == 1.5
    assert rec.est_abs_err <= 1e-12 * max(1.0, abs(rec.value)) + 1e-30
