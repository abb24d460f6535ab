"""Self-contained real Bessel functions for the radial secular solvers.

Integer-order J_k, I_k, K_k and spherical j_l (plus the modified spherical
i_l needed by the ball solver) on the parameter box ``0 <= k <= 40``,
``0 <= x <= 200``.  No scipy.special: J and the spherical kinds use a power
series at small argument and Miller backward recurrence elsewhere, I uses
its (cancellation-free) power series everywhere, and K_0/K_1 switch between
the ascending series, a Gauss-Legendre evaluation of the cosh-kernel
integral in the midrange, and the optimally truncated large-x expansion;
K_k then follows by upward recurrence, which is stable since K grows with
the order.  Internal accumulation is done in ``numpy.longdouble`` so the
advertised 1e-12 accuracy survives the series cancellations.

All core routines are vectorized over the argument; the public scalar API
wraps them.  Accuracy contract: absolute error <= 1e-12 * max(1, |value|)
on the parameter box (tested against a high-precision oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BesselEval",
    "RangeError",
    "SingularityError",
    "bessel_j",
    "bessel_i",
    "bessel_k",
    "sph_bessel_j",
    "sph_bessel_i",
    "bessel_j_array",
    "bessel_i_array",
    "bessel_k_array",
    "sph_bessel_j_array",
    "sph_bessel_i_array",
    "evaluate",
]

MAX_ORDER = 40
MAX_ARG = 200.0  # advertised accuracy box
# hard caps per family: Miller recurrence and the K asymptotics stay
# accurate well past the box, while the positive I series would overflow
_MAX_ARG_OSC = 700.0  # J, spherical j, K
_MAX_ARG_GROW = 200.0  # I, spherical i (e^x magnitude)
_LD = np.longdouble
_EULER_GAMMA = _LD("0.5772156649015328606065120900824024310421")

# accuracy model: abs error <= ERR_BOUND * max(1, |value|) on the box
ERR_BOUND = 1e-12


class RangeError(ValueError):
    """Order or argument outside the supported box."""


class SingularityError(ValueError):
    """Evaluation requested at a singular point (K_k at x = 0)."""


@dataclass(frozen=True)
class BesselEval:
    """One evaluation with its error estimate.

    ``est_abs_err`` bounds the absolute error scaled by ``max(1, |value|)``
    (plain absolute error for the order-one functions J and j).
    """

    order: int
    argument: float
    value: float
    est_abs_err: float


def _check(k: int, x, allow_zero: bool = True, xmax: float = _MAX_ARG_OSC) -> np.ndarray:
    if not 0 <= k <= MAX_ORDER:
        raise RangeError(f"order {k} outside [0, {MAX_ORDER}]")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > xmax):
        raise RangeError(f"argument outside [0, {xmax}]")
    if not allow_zero and np.any(x == 0):
        raise SingularityError("argument 0 is singular here")
    return x


# ----------------------------------------------------------------- J_k ---


def _bessel_j_series(k: int, x: np.ndarray) -> np.ndarray:
    """Ascending series, adequate for x <= ~10 in extended precision."""
    xl = x.astype(_LD)
    half = xl / 2
    term = half**k / _LD(math.factorial(k))
    out = term.copy()
    q = half * half
    for j in range(1, 120):
        term = -term * q / (_LD(j) * _LD(j + k))
        out += term
        if np.all(np.abs(term) <= np.finfo(_LD).eps * (np.abs(out) + 1e-300)):
            break
    return out.astype(float)


def _miller_start(k: int, xmax: float) -> int:
    return int(max(k, xmax) + 14.0 * max(1.0, xmax) ** (1.0 / 3.0) + 30)


def _bessel_j_miller(k: int, x: np.ndarray) -> np.ndarray:
    """Backward recurrence normalized by J_0 + 2*sum J_{2m} = 1.

    All additions carry the same sign pattern as the dominant terms, so
    float64 keeps ~1e-14 relative accuracy and is several times faster
    than extended precision here.
    """
    mstart = _miller_start(k, float(np.max(x)))
    if mstart % 2:
        mstart += 1
    jp = np.zeros_like(x)
    jc = np.full_like(x, 1e-35)
    norm = np.zeros_like(x)
    out = np.zeros_like(x)
    for n in range(mstart, 0, -1):
        jm = (2.0 * n / x) * jc - jp
        jp = jc
        jc = jm
        # jc now holds J_{n-1}; jp holds J_n
        if n - 1 == k:
            out = jc.copy()
        if (n - 1) % 2 == 0:
            norm += jc if n - 1 == 0 else 2 * jc
        big = np.abs(jc) > 1e280
        if np.any(big):
            scale = np.where(big, 1e-280, 1.0)
            jc = jc * scale
            jp = jp * scale
            norm = norm * scale
            out = out * scale
    return out / norm


def bessel_j_array(k: int, x) -> np.ndarray:
    """J_k on an array of arguments."""
    x = _check(k, x)
    scalar_shape = x.shape
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    zero = x == 0.0
    out[zero] = 1.0 if k == 0 else 0.0
    small = (~zero) & (x <= 10.0)
    if np.any(small):
        out[small] = _bessel_j_series(k, x[small])
    large = (~zero) & (x > 10.0)
    if np.any(large):
        out[large] = _bessel_j_miller(k, x[large])
    return out.reshape(scalar_shape)


def bessel_j(k: int, x: float) -> float:
    """Bessel function of the first kind, integer order."""
    return float(bessel_j_array(k, x))


# ----------------------------------------------------------------- I_k ---


def bessel_i_array(k: int, x) -> np.ndarray:
    """I_k on an array of arguments (all-positive power series).

    Every term is positive, so float64 summation is accurate to a few ulp.
    """
    x = _check(k, x, xmax=_MAX_ARG_GROW)
    scalar_shape = x.shape
    xl = np.atleast_1d(x)
    half = xl / 2
    term = half**k / math.factorial(k)
    out = term.copy()
    q = half * half
    for j in range(1, 400):
        term = term * q / (j * (j + k))
        out += term
        if np.all(term <= 1e-17 * (out + 1e-300)):
            break
    return out.reshape(scalar_shape)


def bessel_i(k: int, x: float) -> float:
    """Modified Bessel function of the first kind, integer order."""
    return float(bessel_i_array(k, x))


# ----------------------------------------------------------------- K_k ---


def _k01_series(x: np.ndarray):
    """Ascending series for K_0, K_1; extended precision keeps the
    log/series cancellation below 1e-13 for x <= 7."""
    xl = x.astype(_LD)
    q = xl * xl / 4
    lg = np.log(xl / 2)
    # K0
    i_term = np.ones_like(xl)
    k0 = -(lg + _EULER_GAMMA) * np.ones_like(xl)
    acc0 = k0.copy()
    h = _LD(0)
    for j in range(1, 160):
        i_term = i_term * q / (_LD(j) * _LD(j))
        h = h + 1 / _LD(j)
        contrib = i_term * (h - lg - _EULER_GAMMA)
        acc0 += contrib
        if np.all(np.abs(contrib) <= np.finfo(_LD).eps * (np.abs(acc0) + 1e-300)):
            break
    # K1 via DLMF 10.31.2 with psi-functions
    i_term = xl / 2
    acc1 = 1 / xl + (lg * i_term)  # log * I1 leading term accumulates below
    # build sum_{j} (psi(j+1)+psi(j+2))/2 * (x/2)^{2j+1}/(j!(j+1)!)
    term = xl / 2
    hj = _LD(0)
    s = np.zeros_like(xl)
    for j in range(0, 160):
        hjp1 = hj + 1 / _LD(j + 1)
        psi_sum = (hj - _EULER_GAMMA) + (hjp1 - _EULER_GAMMA)
        contrib = term * psi_sum / 2
        s += contrib
        if j > 2 and np.all(np.abs(contrib) <= np.finfo(_LD).eps * (np.abs(s) + 1e-300)):
            break
        term = term * q / (_LD(j + 1) * _LD(j + 2))
        hj = hjp1
    # I1 series for the log term
    i1 = np.zeros_like(xl)
    term = xl / 2
    for j in range(0, 200):
        i1 += term
        term = term * q / (_LD(j + 1) * _LD(j + 2))
        if np.all(term <= np.finfo(_LD).eps * (i1 + 1e-300)):
            break
    k1 = 1 / xl + lg * i1 - s
    return acc0, k1


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(120)


def _k01_integral(x: np.ndarray):
    """K_nu(x) = int_0^T exp(-x cosh t) cosh(nu t) dt on a truncated range;
    the integrand is analytic so 120-node Gauss-Legendre is exact to
    machine precision for the midrange arguments this covers."""
    out0 = np.empty_like(x)
    out1 = np.empty_like(x)
    for i, xv in enumerate(x):
        T = math.acosh(1.0 + 45.0 / xv)
        t = 0.5 * T * (_GL_NODES + 1.0)
        w = 0.5 * T * _GL_WEIGHTS
        ker = np.exp(-xv * np.cosh(t))
        out0[i] = np.sum(w * ker)
        out1[i] = np.sum(w * ker * np.cosh(t))
    return out0, out1


def _k01_asymptotic(x: np.ndarray):
    """Large-x expansion sqrt(pi/2x) e^{-x} sum a_j(nu)/x^j, truncated at
    the smallest term; relative error ~ e^{-2x} <= 1.3e-14 for x >= 16."""
    out = []
    for nu in (0.0, 1.0):
        mu = 4.0 * nu * nu
        xl = x.astype(_LD)
        term = np.ones_like(xl)
        acc = np.ones_like(xl)
        prev = np.full_like(xl, np.inf)
        for j in range(1, 60):
            factor = (mu - (2 * j - 1) ** 2) / (_LD(j) * 8 * xl)
            term = term * factor
            if np.all(np.abs(term) >= prev):
                break
            acc += term
            prev = np.abs(term)
        out.append(np.sqrt(np.pi / (2 * xl)) * np.exp(-xl) * acc)
    return out[0].astype(float), out[1].astype(float)


def bessel_k_array(k: int, x) -> np.ndarray:
    """K_k on an array of positive arguments."""
    x = _check(k, x, allow_zero=False)
    scalar_shape = x.shape
    x = np.atleast_1d(x)
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    small = x <= 7.0
    mid = (x > 7.0) & (x < 16.0)
    big = x >= 16.0
    if np.any(small):
        a, b = _k01_series(x[small])
        k0[small], k1[small] = a.astype(float), b.astype(float)
    if np.any(mid):
        k0[mid], k1[mid] = _k01_integral(x[mid])
    if np.any(big):
        k0[big], k1[big] = _k01_asymptotic(x[big])
    if k == 0:
        out = k0
    elif k == 1:
        out = k1
    else:
        km, kc = k0.astype(_LD), k1.astype(_LD)
        xl = x.astype(_LD)
        for n in range(1, k):
            km, kc = kc, km + (2 * _LD(n) / xl) * kc
        out = kc.astype(float)
    return out.reshape(scalar_shape)


def bessel_k(k: int, x: float) -> float:
    """Modified Bessel function of the second kind, integer order."""
    return float(bessel_k_array(k, x))


# ------------------------------------------------------- spherical j_l ---


def _sph_series(l: int, x: np.ndarray, sign: float) -> np.ndarray:
    """Series x^l/(2l+1)!! * sum (sign * x^2/2)^j / (j! (2l+2j+1)!!)."""
    xl = x.astype(_LD)
    dfact = _LD(1)
    for i in range(1, 2 * l + 2, 2):
        dfact *= i
    term = xl**l / dfact
    out = term.copy()
    q = xl * xl / 2
    for j in range(1, 200):
        term = term * (_LD(sign) * q) / (_LD(j) * _LD(2 * l + 2 * j + 1))
        out += term
        if np.all(np.abs(term) <= np.finfo(_LD).eps * (np.abs(out) + 1e-300)):
            break
    return out.astype(float)


def sph_bessel_j_array(l: int, x) -> np.ndarray:
    """Spherical Bessel j_l on an array of arguments."""
    x = _check(l, x)
    scalar_shape = x.shape
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    zero = x == 0.0
    out[zero] = 1.0 if l == 0 else 0.0
    small = (~zero) & (x <= max(4.0, 1.5 * l))
    if np.any(small):
        out[small] = _sph_series(l, x[small], -1.0)
    rest = (~zero) & ~small
    if np.any(rest):
        xs = x[rest]
        if l == 0:
            out[rest] = np.sin(xs) / xs
        else:
            # Miller backward recurrence normalized by j0 (or j1 near sin zeros)
            mstart = _miller_start(l, float(np.max(xs))) + l
            jp = np.zeros_like(xs)
            jc = np.full_like(xs, 1e-35)
            keep = np.zeros_like(xs)
            j1v = np.zeros_like(xs)
            j0v = jc
            for n in range(mstart, 0, -1):
                jm = ((2.0 * n + 1.0) / xs) * jc - jp
                jp = jc
                jc = jm
                if n - 1 == l:
                    keep = jc.copy()
                if n - 1 == 1:
                    j1v = jc.copy()
                if n - 1 == 0:
                    j0v = jc.copy()
                big = np.abs(jc) > 1e280
                if np.any(big):
                    scale = np.where(big, 1e-280, 1.0)
                    jc, jp, keep, j1v = jc * scale, jp * scale, keep * scale, j1v * scale
            ref0 = np.sin(xs) / xs
            ref1 = np.sin(xs) / (xs * xs) - np.cos(xs) / xs
            use0 = np.abs(ref0) >= np.abs(ref1)
            ratio = np.where(use0, ref0 / j0v, ref1 / np.where(j1v == 0, 1, j1v))
            out[rest] = keep * ratio
    return out.reshape(scalar_shape)


def sph_bessel_j(l: int, x: float) -> float:
    """Spherical Bessel function of the first kind."""
    return float(sph_bessel_j_array(l, x))


def sph_bessel_i_array(l: int, x) -> np.ndarray:
    """Modified spherical Bessel i_l (first kind) on an array."""
    x = _check(l, x, xmax=_MAX_ARG_GROW)
    scalar_shape = x.shape
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    zero = x == 0.0
    out[zero] = 1.0 if l == 0 else 0.0
    if np.any(~zero):
        out[~zero] = _sph_series(l, x[~zero], 1.0)
    return out.reshape(scalar_shape)


def sph_bessel_i(l: int, x: float) -> float:
    """Modified spherical Bessel function of the first kind."""
    return float(sph_bessel_i_array(l, x))


_KINDS = {
    "j": bessel_j,
    "i": bessel_i,
    "k": bessel_k,
    "sph_j": sph_bessel_j,
    "sph_i": sph_bessel_i,
}


def evaluate(kind: str, order: int, x: float) -> BesselEval:
    """Evaluate one Bessel function with the package error model."""
    value = _KINDS[kind](order, x)
    return BesselEval(
        order=order,
        argument=float(x),
        value=value,
        est_abs_err=ERR_BOUND * max(1.0, abs(value)),
    )
