"""Exact spectra of the 1D Robin model operators on an interval.

Two operators on (0, delta), both acting as f -> -f'':

* ``S``  with f'(0) + alpha f(0) = 0 and f(delta) = 0,
* ``S'`` with f'(0) + alpha f(0) = 0 and f'(delta) - beta f(delta) = 0.

Eigenvalues come from transcendental secular equations.  For ``S`` the
negative branch solves x*coth(x) = alpha*delta (one root iff
alpha*delta > 1), zero is an eigenvalue iff alpha*delta = 1 (eigenfunction
delta - t), and the positive branch solves tan(k delta) = k/alpha with one
root pinned in each interval ((j-1)pi, j pi)/delta by Dirichlet
interlacing.  For ``S'`` the negative branch solves
(k+alpha)(k+beta) e^{-k delta} = (k-alpha)(k-beta) e^{k delta}, zero is an
eigenvalue iff alpha*beta*delta = alpha + beta, and the positive branch
solves tan(k delta) = (alpha+beta) k / (alpha beta - k^2).

Roots are isolated by dense sign scans (two resolutions, compared, so a
missed root is detected) and polished by Brent's method; all returned
eigenvalues carry a scaled secular residual <= 1e-12.  Eigenfunctions are
reported as closed-form coefficients, never sampled arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "Model1DParams",
    "Model1DSpectrum",
    "EigenfunctionData",
    "RootSearchError",
    "spectrum_S",
    "spectrum_Sprime",
]

_ZERO_TOL = 1e-12


class RootSearchError(RuntimeError):
    """Bracketing or consistency failure in the secular root search."""


@dataclass(frozen=True)
class Model1DParams:
    """Robin strengths and interval length; ``delta > 0`` required."""

    alpha: float
    delta: float
    beta: float = 0.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class EigenfunctionData:
    """Closed-form eigenfunction coefficients.

    ``kind`` is one of ``sinh`` (f = C1 sinh(k(delta-t)) for S,
    f = C1 e^{kt} + C2 e^{-kt} for S'), ``linear`` (f = C1 (delta-t) or
    C1 + C2 t) and ``sin`` (f = C1 sin(k(delta-t)) or
    C1 cos(kt) + C2 sin(kt)).
    """

    kind: str
    k: float
    C1: float
    C2: float
    value_at_0: float
    value_at_delta: float


@dataclass(frozen=True)
class Model1DSpectrum:
    """Ordered eigenvalues with closed-form eigenfunction data."""

    eigenvalues: np.ndarray
    eigenfunction_data: tuple
    residuals: np.ndarray
    boundary_value_sq_at_0: float
    regime_flag: str = ""

    def __post_init__(self):
        diffs = np.diff(self.eigenvalues)
        if np.any(diffs <= 0):
            raise ValueError("eigenvalues must be strictly increasing")


def _bisect_refine(f, a, b):
    """Brent root with a residual-driven polish."""
    root = brentq(f, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(root)


def _scan_roots(f, grid):
    """Sign-change brackets of f on an increasing grid."""
    vals = np.array([f(g) for g in grid])
    roots = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0:
            roots.append(_bisect_refine(f, grid[i], grid[i + 1]))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


# ----------------------------------------------------------------- S ---


def _neg_secular_S(y, ad):
    # x coth x - alpha delta, with the removable singularity at 0 filled.
    if y == 0.0:
        return 1.0 - ad
    return y / np.tanh(y) - ad


def _pos_secular_S(y, ad):
    # alpha delta sin y - y cos y  (y = k delta)
    return ad * np.sin(y) - y * np.cos(y)


def spectrum_S(p: Model1DParams, jmax: int) -> Model1DSpectrum:
    """Lowest ``jmax`` eigenvalues of the Robin/Dirichlet operator S."""
    if jmax < 1:
        raise ValueError("jmax must be >= 1")
    alpha, delta = p.alpha, p.delta
    ad = alpha * delta
    evs, funcs, resid = [], [], []

    if ad > 1 + _ZERO_TOL:
        hi = ad + 1.0
        y = _bisect_refine(lambda t: _neg_secular_S(t, ad), 1e-14, hi)
        k = y / delta
        evs.append(-k * k)
        funcs.append(
            EigenfunctionData(
                "sinh", k, 1.0, 0.0, value_at_0=np.sinh(y), value_at_delta=0.0
            )
        )
        resid.append(abs(_neg_secular_S(y, ad)) / (1.0 + abs(ad)))

    if abs(ad - 1) <= _ZERO_TOL:
        evs.append(0.0)
        funcs.append(EigenfunctionData("linear", 0.0, 1.0, 0.0, delta, 0.0))
        resid.append(0.0)

    interval = 1
    while len(evs) < jmax:
        if interval == 1:
            # one root here iff alpha*delta < 1 (the slot is otherwise taken
            # by the nonpositive eigenvalue)
            expect = 1 if ad < 1 - _ZERO_TOL else 0
        else:
            expect = 1
        if expect == 0:
            interval += 1
            continue
        lo = (interval - 1) * np.pi + 1e-11
        hi = interval * np.pi - 1e-11
        found = _scan_roots(
            lambda y: _pos_secular_S(y, ad), np.linspace(lo, hi, 64)
        )
        if len(found) != expect:
            raise RootSearchError(
                f"S secular scan found {len(found)} roots in interval {interval}, "
                f"expected {expect} (alpha={alpha}, delta={delta})"
            )
        for y in found:
            k = y / delta
            evs.append(k * k)
            funcs.append(
                EigenfunctionData(
                    "sin", k, 1.0, 0.0, value_at_0=np.sin(y), value_at_delta=0.0
                )
            )
            resid.append(abs(_pos_secular_S(y, ad)) / (1.0 + abs(ad) + y))
        interval += 1

    evs_arr = np.array(evs[:jmax])
    bvsq = _ground_state_bv_sq_S(funcs[0], delta)
    return Model1DSpectrum(
        eigenvalues=evs_arr,
        eigenfunction_data=tuple(funcs[:jmax]),
        residuals=np.array(resid[:jmax]),
        boundary_value_sq_at_0=bvsq,
    )


def _ground_state_bv_sq_S(fn: EigenfunctionData, delta: float) -> float:
    """|psi(0)|^2 for the L2-normalized ground state of S."""
    if fn.kind == "sinh":
        y = fn.k * delta
        if y > 250.0:
            # norm^2 -> e^{2y}/(8k) up to exponentially small terms
            return 2.0 * fn.k * (1.0 - (2.0 * fn.k * delta - 1.0) * np.exp(-2.0 * y))
        norm_sq = np.sinh(2 * y) / (4 * fn.k) - delta / 2
        return float(np.sinh(y) ** 2 / norm_sq)
    if fn.kind == "linear":
        return float(3.0 / delta)
    y = fn.k * delta
    norm_sq = delta / 2 - np.sin(2 * y) / (4 * fn.k)
    return float(np.sin(y) ** 2 / norm_sq)


# ---------------------------------------------------------------- S' ---


def _neg_secular_Sprime(k, alpha, beta, delta):
    # (k+a)(k+b) e^{-2 k delta} - (k-a)(k-b); e^{+k delta}-free to avoid
    # overflow, same roots for k > 0.
    return (k + alpha) * (k + beta) * np.exp(-2 * k * delta) - (k - alpha) * (k - beta)


def _pos_secular_Sprime(y, alpha, beta, delta):
    # (alpha beta delta^2 - y^2) sin y - (alpha + beta) delta y cos y
    return (alpha * beta * delta**2 - y * y) * np.sin(y) - (
        (alpha + beta) * delta * y
    ) * np.cos(y)


def spectrum_Sprime(p: Model1DParams, jmax: int) -> Model1DSpectrum:
    """Lowest ``jmax`` eigenvalues of the double-Robin operator S'."""
    if jmax < 1:
        raise ValueError("jmax must be >= 1")
    alpha, beta, delta = p.alpha, p.beta, p.delta
    evs, funcs, resid = [], [], []
    regime = "" if alpha > beta > 0 or beta == 0 else "alpha<=beta"

    # negative eigenvalues: dense two-resolution scan on (0, kmax]
    kmax = 2.0 * max(abs(alpha), abs(beta), 1.0) + 10.0 / delta
    f = lambda k: _neg_secular_Sprime(k, alpha, beta, delta)
    roots_a = _scan_roots(f, np.linspace(1e-12, kmax, 2001))
    roots_b = _scan_roots(f, np.linspace(1e-12, kmax, 5003))
    if len(roots_a) != len(roots_b):
        raise RootSearchError("S' negative-branch scans disagree; refine grid")
    for k in sorted(roots_b, reverse=True):  # most negative eigenvalue first
        evs.append(-k * k)
        c1, c2 = k - alpha, k + alpha
        fn = EigenfunctionData(
            "sinh", k, c1, c2,
            value_at_0=c1 + c2,
            value_at_delta=c1 * np.exp(min(k * delta, 700.0)) + c2 * np.exp(-k * delta),
        )
        funcs.append(fn)
        scale = (abs(k) + abs(alpha)) * (abs(k) + abs(beta)) + 1.0
        resid.append(abs(f(k)) / scale)

    if abs(alpha * beta * delta - (alpha + beta)) <= _ZERO_TOL * (1 + abs(alpha) + abs(beta)):
        evs.append(0.0)
        funcs.append(EigenfunctionData("linear", 0.0, 1.0, -alpha, 1.0, 1.0 - alpha * delta))
        resid.append(0.0)

    y_hi = (jmax + 2) * np.pi
    g = lambda y: _pos_secular_Sprime(y, alpha, beta, delta)
    pos_a = _scan_roots(g, np.linspace(1e-11, y_hi, int(40 * y_hi / np.pi)))
    pos_b = _scan_roots(g, np.linspace(1e-11, y_hi, int(97 * y_hi / np.pi)))
    if len(pos_a) != len(pos_b):
        raise RootSearchError("S' positive-branch scans disagree; refine grid")
    for y in pos_b:
        k = y / delta
        evs.append(k * k)
        c1, c2 = k, -alpha  # f = C1 cos(kt) + C2 sin(kt), scaled by 1/k
        funcs.append(
            EigenfunctionData(
                "sin", k, c1, c2,
                value_at_0=c1,
                value_at_delta=c1 * np.cos(y) + c2 * np.sin(y),
            )
        )
        resid.append(abs(g(y)) / ((1 + abs(alpha * beta) * delta**2 + y * y) * (1 + y)))

    order = np.argsort(evs)[:jmax]
    evs_arr = np.array([evs[i] for i in order])
    funcs_t = tuple(funcs[i] for i in order)
    resid_arr = np.array([resid[i] for i in order])
    bvsq = _ground_state_bv_sq_Sprime(funcs_t[0], delta)
    return Model1DSpectrum(
        eigenvalues=evs_arr,
        eigenfunction_data=funcs_t,
        residuals=resid_arr,
        boundary_value_sq_at_0=bvsq,
        regime_flag=regime,
    )


def _ground_state_bv_sq_Sprime(fn: EigenfunctionData, delta: float) -> float:
    """|psi(0)|^2 for the L2-normalized ground state of S'."""
    if fn.kind == "sinh":
        k, c1, c2 = fn.k, fn.C1, fn.C2
        y = k * delta
        if y > 250.0:
            # dominated by the c1 e^{kt} tail: norm^2 ~ c1^2 e^{2y}/(2k)
            return (c1 + c2) ** 2 * 2 * k / (c1 * c1 * np.exp(2 * y))
        norm_sq = (
            c1 * c1 * (np.exp(2 * y) - 1) / (2 * k)
            + 2 * c1 * c2 * delta
            + c2 * c2 * (1 - np.exp(-2 * y)) / (2 * k)
        )
        return float((c1 + c2) ** 2 / norm_sq)
    if fn.kind == "linear":
        c1, c2 = fn.C1, fn.C2
        norm_sq = c1 * c1 * delta + c1 * c2 * delta**2 + c2 * c2 * delta**3 / 3
        return float(c1 * c1 / norm_sq)
    k, c1, c2 = fn.k, fn.C1, fn.C2
    y = k * delta
    norm_sq = (
        c1 * c1 * (delta / 2 + np.sin(2 * y) / (4 * k))
        + c2 * c2 * (delta / 2 - np.sin(2 * y) / (4 * k))
        + c1 * c2 * (1 - np.cos(2 * y)) / (2 * k)
    )
    return float(c1 * c1 / norm_sq)


# ------------------------------------------------- comparison operators ---


def dirichlet_robin_spectrum(beta: float, delta: float, jmax: int) -> np.ndarray:
    """Eigenvalues of -f'' with f(0) = 0, f'(delta) - beta f(delta) = 0.

    By the reflection t -> delta - t this is the operator S with Robin
    strength ``beta``; used as the interlacing comparison for S'.
    """
    return spectrum_S(Model1DParams(alpha=beta, delta=delta), jmax).eigenvalues
