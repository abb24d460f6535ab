"""Exact gamma-matrix families and boundary projectors.

The matrices are produced by the classical doubling recursion: starting
from ``g1(1) = (1)`` and the two 2x2 generators, each odd dimension adds
the (signed) product of the previous even family and each even dimension
embeds the previous family off-diagonally.  All entries stay in
``{0, +-1, +-i}``, which binary floating point represents exactly, so every
algebraic identity in this module is checked with exact equality rather
than tolerances.

The boundary involution attached to a unit normal ``nu`` is built from the
ambient ``(n+1)``-family as ``B = -i * G(nu) @ g_{n+1}``; with the default
``+`` product branch this makes ``B`` for ``n = 2``, ``nu = (cos t, sin t)``
equal to ``[[0, -i e^{-it}], [i e^{it}, 0]]``, the convention every radial
and finite-element solver in this package is locked to.  (Swapping the
factor order flips the sign of ``B``, which is the same family with the
opposite product branch.)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CliffordRep",
    "BoundaryProjectorData",
    "DimensionError",
    "NormalizationError",
    "ParityError",
    "build_gammas",
    "gamma_of",
    "boundary_matrix",
    "lambda_block",
]

MAX_DIMENSION = 12


class DimensionError(ValueError):
    """Requested dimension outside the supported range."""


class NormalizationError(ValueError):
    """Vector expected to be unit length is not."""


class ParityError(ValueError):
    """Operation requires the opposite parity of the ambient dimension."""


@dataclass(frozen=True)
class CliffordRep:
    """Family of ``n`` anticommuting Hermitian involutions of size ``N``.

    ``N = 2**(n//2)`` and every entry of every matrix lies in
    ``{0, +-1, +-i}``.  ``sign_choice`` records the branch used for the
    odd-step product matrices.
    """

    n: int
    N: int
    gammas: tuple = field(repr=False)
    sign_choice: int = 1

    def __post_init__(self):
        if self.N != 2 ** (self.n // 2):
            raise DimensionError(f"size {self.N} != 2**({self.n}//2)")


@dataclass(frozen=True)
class BoundaryProjectorData:
    """Boundary involution ``B`` with its spectral projectors ``P_pm``."""

    B: np.ndarray
    P_plus: np.ndarray
    P_minus: np.ndarray
    nu: np.ndarray


def build_gammas(n: int, sign_choice: int = 1) -> CliffordRep:
    """Build the gamma family in dimension ``n`` by the doubling recursion.

    Parameters
    ----------
    n : int
        Ambient dimension, ``1 <= n <= 12``.
    sign_choice : {+1, -1}
        Branch of the odd-step product matrix; both give valid families.

    Returns
    -------
    CliffordRep
        ``n`` Hermitian matrices of size ``2**(n//2)`` that pairwise
        anticommute and square to the identity, exactly.
    """
    if not isinstance(n, int) or not 1 <= n <= MAX_DIMENSION:
        raise DimensionError(f"dimension must be an integer in [1, {MAX_DIMENSION}], got {n}")
    if sign_choice not in (1, -1):
        raise ValueError("sign_choice must be +1 or -1")

    gam = [np.array([[1.0 + 0.0j]])]
    for dim in range(2, n + 1):
        if dim == 2:
            gam = [
                np.array([[0, 1], [1, 0]], dtype=complex),
                np.array([[0, -1j], [1j, 0]], dtype=complex),
            ]
        elif dim % 2 == 1:
            # dim = 2m+1: append the signed product i^m * g_1 ... g_{2m}.
            m = dim // 2
            prod = gam[0]
            for g in gam[1:]:
                prod = prod @ g
            gam = gam + [sign_choice * (1j**m) * prod]
        else:
            # dim = 2m+2: off-diagonal embedding of the odd family.
            half = gam[0].shape[0]
            new = []
            for g in gam:
                blk = np.zeros((2 * half, 2 * half), dtype=complex)
                blk[:half, half:] = g
                blk[half:, :half] = g
                new.append(blk)
            last = np.zeros((2 * half, 2 * half), dtype=complex)
            last[:half, half:] = -1j * np.eye(half)
            last[half:, :half] = 1j * np.eye(half)
            gam = new + [last]

    mats = tuple(m.copy() for m in gam)
    for m in mats:
        m.setflags(write=False)
    return CliffordRep(n=n, N=mats[0].shape[0], gammas=mats, sign_choice=sign_choice)


def gamma_of(rep: CliffordRep, x) -> np.ndarray:
    """Linear combination ``sum_j x_j gamma_j`` for ``x`` in R^n."""
    x = np.asarray(x)
    if x.shape != (rep.n,):
        raise DimensionError(f"vector of length {rep.n} expected, got shape {x.shape}")
    out = np.zeros((rep.N, rep.N), dtype=complex)
    for xj, g in zip(x, rep.gammas):
        out += xj * g
    return out


def boundary_matrix(rep_ambient: CliffordRep, nu) -> BoundaryProjectorData:
    """Boundary involution for a unit normal ``nu`` in R^n.

    ``rep_ambient`` must be the family for dimension ``n + 1``; the first
    ``n`` matrices contract with ``nu`` and the last one supplies the
    chirality factor: ``B = -i * G(nu) @ gamma_{n+1}``.

    Returns
    -------
    BoundaryProjectorData
        ``B`` Hermitian with ``B @ B = I`` and ``tr B = 0``;
        ``P_pm = (I +- B)/2`` of rank ``N/2``.
    """
    nu = np.asarray(nu, dtype=float)
    n = rep_ambient.n - 1
    if nu.shape != (n,):
        raise DimensionError(f"normal of length {n} expected, got shape {nu.shape}")
    norm = float(np.sqrt(np.sum(nu * nu)))
    if abs(norm - 1.0) > 1e-14:
        raise NormalizationError(f"|nu| = {norm!r} is not 1 within 1e-14")

    gam_nu = np.zeros((rep_ambient.N, rep_ambient.N), dtype=complex)
    for j in range(n):
        gam_nu += nu[j] * rep_ambient.gammas[j]
    B = -1j * gam_nu @ rep_ambient.gammas[n]
    eye = np.eye(rep_ambient.N)
    return BoundaryProjectorData(
        B=B, P_plus=(eye + B) / 2, P_minus=(eye - B) / 2, nu=nu
    )


def lambda_block(rep: CliffordRep, x) -> np.ndarray:
    """Off-diagonal block of ``G(x)`` for even ``n``.

    For ``n = 2m`` the matrix ``G_n(x)`` has the block form
    ``[[0, lam(x)], [lam(x)*, 0]]`` with
    ``lam(x) = sum_{j<2m} gamma_j(2m-1) x_j - i x_{2m} I``.  The block is
    computed from the ``(2m-1)``-family directly so that the block identity
    against :func:`gamma_of` is a genuine cross-check.
    """
    if rep.n % 2 != 0:
        raise ParityError(f"even dimension required, got n = {rep.n}")
    x = np.asarray(x)
    if x.shape != (rep.n,):
        raise DimensionError(f"vector of length {rep.n} expected, got shape {x.shape}")
    sub = build_gammas(rep.n - 1, sign_choice=rep.sign_choice)
    half = rep.N // 2
    lam = np.zeros((half, half), dtype=complex)
    for j in range(rep.n - 1):
        lam += x[j] * sub.gammas[j]
    lam += -1j * x[rep.n - 1] * np.eye(half)
    return lam


def anticommutation_report(n: int, sign_choice: int = 1) -> dict:
    """Exact anticommutation audit used by the ``clifford-check`` command.

    Returns a dict with the worst-case deviation (exactly zero on success)
    and a boolean ``ok`` flag; every check uses exact equality.
    """
    rep = build_gammas(n, sign_choice)
    eye = np.eye(rep.N)
    ok = True
    failures = []
    for j, gj in enumerate(rep.gammas):
        if not np.array_equal(gj.conj().T, gj):
            ok = False
            failures.append(f"gamma_{j + 1} not Hermitian")
        for k, gk in enumerate(rep.gammas):
            target = 2 * eye if j == k else np.zeros_like(eye)
            if not np.array_equal(gj @ gk + gk @ gj, target):
                ok = False
                failures.append(f"anticommutator ({j + 1},{k + 1})")
    entries = np.concatenate([g.ravel() for g in rep.gammas])
    allowed = np.isin(entries, [0, 1, -1, 1j, -1j])
    if not bool(np.all(allowed)):
        ok = False
        failures.append("entry outside {0,+-1,+-i}")
    return {"n": n, "N": rep.N, "ok": ok, "failures": failures}
