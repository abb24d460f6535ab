"""Exact rotationally-symmetric spectra via transcendental secular equations.

Disk (R, mass m, boundary involution locked to
``B = [[0, -i e^{-i theta}], [i e^{i theta}, 0]]``): the angular sector
``u = (f(r) e^{i k theta}, i g(r) e^{i (k+1) theta})`` reduces the
eigenvalue problem to the radial system

    g' + (k+1)/r g = (E - m) f,      f' - k/r f = -(E + m) g,

whose regular solution is ``f = J_k(p r)``, ``g = (p/(E+m)) J_{k+1}(p r)``
with ``p = sqrt(E^2 - m^2)`` (modified Bessel ``I`` continuation for
``E^2 < m^2``), and the boundary condition ``u = B u`` becomes
``f(R) = g(R)``.  The whole-plane jump problem replaces the boundary
condition by matching against the decaying exterior solution built from
Macdonald functions ``K`` with mass ``M``; discrete eigenvalues satisfy
``E^2 < M^2``.

Ball (R, mass m): standard relativistic partial waves indexed by
``kappa_D in {+-1, +-2, ...}`` (degeneracy ``2|kappa_D|``), with the
spherical secular conditions

    kappa_D < 0:  (E+m) j_l(pR) = p j_{l+1}(pR),   l = -kappa_D - 1,
    kappa_D > 0:  (E+m) j_l(pR) = -p j_{l-1}(pR),  l = kappa_D,

in the chirality convention fixed by requiring the massless lowest mode
``j_0(x) = j_1(x)`` (x ~ 2.0428) together with the large negative mass
limit toward the round-sphere squared-Dirac values; the disk branch is
locked the same way against the finite-element solver (regression tested).

Root isolation: per channel, dense sign scans over the energy window in
each analytic region (|E| below/above |m|), bisection refinement, merge of
``E^2`` across channels.  An optional coarse finite-element cross-check
flags missing disk eigenvalues.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from dirac_ml._backend import thread_count
from dirac_ml import specfun

__all__ = [
    "RadialProblem",
    "RadialSpectrum",
    "ReferenceSpectrum",
    "disk_mit_spectrum",
    "disk_jump_spectrum",
    "ball_mit_spectrum",
    "reference_boundary_spectrum",
]


@dataclass(frozen=True)
class RadialProblem:
    """Rotationally symmetric spectral problem.

    ``geometry`` is ``disk`` or ``ball`` with radius ``radius``; ``m`` is
    the interior mass and ``M`` the exterior mass (jump problems only).
    ``channels`` lists angular indices: integers ``k`` for the disk,
    nonzero ``kappa_D`` for the ball.  ``jmax_per_channel`` bounds how many
    squared eigenvalues each channel contributes, ordered by magnitude.
    """

    geometry: str
    radius: float
    m: float
    M: float | None = None
    channels: tuple = (-3, -2, -1, 0, 1, 2)
    jmax_per_channel: int = 6

    def __post_init__(self):
        if self.geometry not in ("disk", "ball"):
            raise ValueError("geometry must be 'disk' or 'ball'")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.geometry == "ball" and any(c == 0 for c in self.channels):
            raise ValueError("ball channels are nonzero relativistic indices")


@dataclass(frozen=True)
class RadialSpectrum:
    """Merged squared eigenvalues with per-root bookkeeping.

    ``entries`` rows are ``(channel, j_in_channel, E, E^2, residual)``
    sorted by ``E^2`` then channel; ``values`` repeats each root according
    to its angular degeneracy (1 for disk sectors, 2|kappa_D| for ball
    channels).
    """

    values: np.ndarray
    entries: tuple
    warnings: tuple = ()


# ------------------------------------------------------------ secular ---


def _jk_signed(k: int, x: np.ndarray) -> np.ndarray:
    """J_k for possibly negative integer order via J_{-n} = (-1)^n J_n."""
    if k >= 0:
        return specfun.bessel_j_array(k, x)
    return (-1) ** (-k) * specfun.bessel_j_array(-k, x)


def _ik_signed(k: int, x: np.ndarray) -> np.ndarray:
    """I_k for possibly negative integer order (I_{-n} = I_n)."""
    return specfun.bessel_i_array(abs(k), x)


def _disk_mit_secular(E: np.ndarray, k: int, m: float, R: float) -> np.ndarray:
    """f(R) - g(R) = 0 rearranged as (E+m) J_k(pR) - p J_{k+1}(pR)."""
    E = np.asarray(E, dtype=float)
    out = np.empty_like(E)
    osc = E * E >= m * m
    if np.any(osc):
        p = np.sqrt(E[osc] ** 2 - m * m)
        out[osc] = (E[osc] + m) * _jk_signed(k, p * R) - p * _jk_signed(k + 1, p * R)
    if np.any(~osc):
        q = np.sqrt(m * m - E[~osc] ** 2)
        out[~osc] = (E[~osc] + m) * _ik_signed(k, q * R) + q * _ik_signed(k + 1, q * R)
    return out


def _disk_jump_secular(
    E: np.ndarray, k: int, m: float, M: float, R: float
) -> np.ndarray:
    """Interior/exterior matching determinant for the mass-jump operator."""
    E = np.asarray(E, dtype=float)
    qM = np.sqrt(M * M - E * E)
    kk, kk1 = abs(k), abs(k + 1)
    K_k = specfun.bessel_k_array(kk, qM * R)
    K_k1 = specfun.bessel_k_array(kk1, qM * R)
    out = np.empty_like(E)
    osc = E * E >= m * m
    if np.any(osc):
        p = np.sqrt(E[osc] ** 2 - m * m)
        out[osc] = (E[osc] + m) * qM[osc] * _jk_signed(k, p * R) * K_k1[osc] - (
            E[osc] + M
        ) * p * _jk_signed(k + 1, p * R) * K_k[osc]
    if np.any(~osc):
        qm = np.sqrt(m * m - E[~osc] ** 2)
        out[~osc] = (E[~osc] + m) * qM[~osc] * _ik_signed(k, qm * R) * K_k1[~osc] + (
            E[~osc] + M
        ) * qm * _ik_signed(k + 1, qm * R) * K_k[~osc]
    return out


def _ball_mit_secular(E: np.ndarray, kappa: int, m: float, R: float) -> np.ndarray:
    """Spherical matching condition per relativistic channel."""
    E = np.asarray(E, dtype=float)
    if kappa < 0:
        l, lbar, sgn = -kappa - 1, -kappa, +1.0
    else:
        l, lbar, sgn = kappa, kappa - 1, -1.0
    out = np.empty_like(E)
    osc = E * E >= m * m
    if np.any(osc):
        p = np.sqrt(E[osc] ** 2 - m * m)
        out[osc] = (E[osc] + m) * specfun.sph_bessel_j_array(l, p * R) - sgn * (
            p * specfun.sph_bessel_j_array(lbar, p * R)
        )
    if np.any(~osc):
        q = np.sqrt(m * m - E[~osc] ** 2)
        # j_l(i q r) = i^l i_l(q r): the i-powers cancel into real signs
        sign_mod = +1.0 if kappa < 0 else sgn * (-1.0)
        out[~osc] = (E[~osc] + m) * specfun.sph_bessel_i_array(l, q * R) + sign_mod * (
            q * specfun.sph_bessel_i_array(lbar, q * R)
        )
    return out


# --------------------------------------------------------- root search ---


def _region_roots(fun, lo: float, hi: float, points: int) -> list:
    """Sign-change roots of ``fun`` on (lo, hi) from a dense scan.

    All brackets are refined simultaneously by vectorized bisection, which
    keeps the per-iteration cost at one batched secular evaluation.
    """
    if hi <= lo:
        return []
    grid = np.linspace(lo, hi, points)
    vals = fun(grid)
    idx = np.where(vals[:-1] * vals[1:] < 0)[0]
    roots = []
    if len(idx):
        a, b = grid[idx], grid[idx + 1]
        fa = vals[idx]
        for _ in range(90):
            mid = 0.5 * (a + b)
            fm = fun(mid)
            go_left = fa * fm <= 0
            b = np.where(go_left, mid, b)
            a = np.where(go_left, a, mid)
            fa = np.where(go_left, fa, fm)
            if np.all((b - a) <= 4e-16 * (1.0 + np.abs(a))):
                break
        roots.extend((0.5 * (a + b)).tolist())
    exact = np.where(vals == 0.0)[0]
    for i in exact:
        if 0 < i < len(grid) - 1:
            roots.append(float(grid[i]))
    return roots


def _channel_roots(secular, m: float, window: float, R: float, jmax: int):
    """Roots of one channel's secular function ordered by E^2."""
    am = abs(m)
    pad = 1e-9 * (1.0 + am)
    dE = min(np.pi / (40.0 * R), 0.05)
    regions = []
    if am > pad * 4:
        regions.append((-am + pad, am - pad))
    regions.append((am + pad, window))
    regions.append((-window, -am - pad))
    roots = []
    for lo, hi in regions:
        lo, hi = max(lo, -window), min(hi, window)
        if hi <= lo:
            continue
        n_pts = max(64, int((hi - lo) / dE) + 2)
        roots.extend(_region_roots(secular, lo, hi, n_pts))
    roots.sort(key=lambda E: E * E)
    out = []
    for E in roots[:jmax]:
        res = abs(float(secular(np.array([E]))[0]))
        scale = (abs(E) + am + 1.0) * max(1.0, abs(E) * R)
        out.append((E, E * E, res / scale))
    return out


def _merge_channels(per_channel: dict, degeneracy) -> RadialSpectrum:
    entries = []
    values = []
    for ch, roots in sorted(per_channel.items()):
        for j, (E, E2, res) in enumerate(roots, start=1):
            entries.append((ch, j, E, E2, res))
            values.extend([E2] * degeneracy(ch))
    entries.sort(key=lambda t: (t[3], t[0]))
    return RadialSpectrum(values=np.sort(np.array(values)), entries=tuple(entries))


def _solve_channels(channel_fun, channels, jmax: int):
    workers = min(thread_count(), len(channels))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(channel_fun, channels))
    else:
        results = [channel_fun(c) for c in channels]
    return dict(zip(channels, results))


def disk_mit_spectrum(p: RadialProblem) -> RadialSpectrum:
    """Squared eigenvalues of the disk operator with the bag constraint."""
    if p.geometry != "disk":
        raise ValueError("disk_mit_spectrum requires disk geometry")
    m, R = p.m, p.radius
    window = abs(m) + (p.jmax_per_channel + 2 * max(abs(k) for k in p.channels) + 6) * np.pi / R

    def one(k: int):
        return _channel_roots(
            lambda E: _disk_mit_secular(E, k, m, R), m, window, R, p.jmax_per_channel
        )

    per = _solve_channels(one, tuple(p.channels), p.jmax_per_channel)
    return _merge_channels(per, lambda ch: 1)


def disk_jump_spectrum(p: RadialProblem) -> RadialSpectrum:
    """Squared eigenvalues below M^2 of the whole-plane mass-jump operator."""
    if p.geometry != "disk":
        raise ValueError("disk_jump_spectrum requires disk geometry")
    if p.M is None:
        raise ValueError("jump problems need the exterior mass M")
    m, M, R = p.m, p.M, p.radius
    window = M * (1.0 - 1e-9)

    def one(k: int):
        roots = _channel_roots(
            lambda E: _disk_jump_secular(E, k, m, M, R), m, window, R,
            p.jmax_per_channel,
        )
        return [r for r in roots if r[1] < M * M]

    per = _solve_channels(one, tuple(p.channels), p.jmax_per_channel)
    return _merge_channels(per, lambda ch: 1)


def ball_mit_spectrum(p: RadialProblem) -> RadialSpectrum:
    """Squared eigenvalues of the ball operator with the bag constraint.

    Each channel's roots enter the merged list with degeneracy
    ``2 |kappa_D|``.
    """
    if p.geometry != "ball":
        raise ValueError("ball_mit_spectrum requires ball geometry")
    m, R = p.m, p.radius
    window = abs(m) + (p.jmax_per_channel + 2 * max(abs(k) for k in p.channels) + 6) * np.pi / R

    def one(kappa: int):
        return _channel_roots(
            lambda E: _ball_mit_secular(E, kappa, m, R), m, window, R,
            p.jmax_per_channel,
        )

    per = _solve_channels(one, tuple(p.channels), p.jmax_per_channel)
    return _merge_channels(per, lambda ch: 2 * abs(ch))


def verify_against_fem(spectrum: RadialSpectrum, p: RadialProblem, count: int = 4,
                       rtol: float = 0.05) -> list:
    """Coarse finite-element count/value cross-check (disk bag only).

    Returns warning strings; empty means the first ``count`` values agree
    within ``rtol`` relative.
    """
    from dirac_ml.fem2d import bag_spectrum_on_disk

    fem_vals = bag_spectrum_on_disk(radius=p.radius, m=p.m, h=0.08, count=count)
    warnings = []
    for i in range(count):
        a, b = spectrum.values[i], fem_vals[i]
        if abs(a - b) > rtol * max(abs(b), 1e-12):
            warnings.append(
                f"eigenvalue {i + 1}: exact {a:.6g} vs FEM {b:.6g} beyond {rtol:.0%}"
            )
    return warnings


# ----------------------------------------------------------- reference ---


@dataclass(frozen=True)
class ReferenceSpectrum:
    """Closed-form squared boundary-Dirac eigenvalues with multiplicity."""

    source: str
    size: float  # perimeter for circles, radius for spheres
    values: np.ndarray = field(init=False, default=None)
    count: int = 32

    def __post_init__(self):
        if self.source == "circle":
            ell = self.size
            vals = []
            k = 0
            while len(vals) < self.count:
                vals.extend([((k + 0.5) * 2 * np.pi / ell) ** 2] * 2)
                k += 1
        elif self.source == "sphere":
            rad = self.size
            vals = []
            k = 0
            while len(vals) < self.count:
                vals.extend([((k + 1) / rad) ** 2] * (4 * (k + 1)))
                k += 1
        else:
            raise ValueError("source must be 'circle' or 'sphere'")
        object.__setattr__(self, "values", np.array(vals[: self.count]))


def reference_boundary_spectrum(source: str, size: float, count: int = 32) -> ReferenceSpectrum:
    """Sorted reference values: circle(perimeter) or sphere(radius)."""
    return ReferenceSpectrum(source=source, size=size, count=count)
