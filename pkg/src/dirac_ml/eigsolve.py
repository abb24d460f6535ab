"""Lowest eigenpairs of Hermitian pencils (K, M).

Small dense problems go straight to LAPACK.  Everything else runs
shift-invert Lanczos with full reorthogonalization on the operator
``(K - sigma M)^{-1} M`` in the M-inner product, restarting with fresh
seeded vectors deflated against converged eigenvectors; that is what
recovers the multiplicity-2 clusters these discretizations produce, which
a single Krylov sequence cannot split.  The shifted matrix is factorized
once per request with a sparse LU (indefinite-safe).

Every returned pair satisfies ``norm(K x - lambda M x) / norm(M x) <= tol``
or the result is flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = ["EigRequest", "Spectrum", "EigsolveError", "lowest"]

_DENSE_CUTOFF = 900


class EigsolveError(RuntimeError):
    """Factorization breakdown or non-convergence."""


@dataclass(frozen=True)
class EigRequest:
    """Eigenvalue request for a Hermitian pencil.

    ``pencil`` is either a single Hermitian matrix (mass = identity) or a
    pair ``(K, M)`` with M Hermitian positive definite; sparse or dense.
    """

    pencil: object
    count: int = 6
    shift: float | None = None
    tol: float = 1e-8
    max_iter: int = 2000
    seed: int = 20_250_809
    method: str = "auto"  # auto | dense | lanczos
    cluster_tol: float = 1e-6

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with residuals and multiplicity clusters."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    multiplicity_clusters: tuple
    eigenvectors: np.ndarray = field(repr=False, default=None)
    converged: bool = True
    seed: int = 0


def _split(pencil):
    if isinstance(pencil, (tuple, list)):
        K, M = pencil
    else:
        K, M = pencil, None
    return K, M


def _cluster(vals: np.ndarray, tol: float) -> tuple:
    clusters = []
    start = 0
    for i in range(1, len(vals) + 1):
        scale = 1.0 + abs(vals[start])
        if i == len(vals) or abs(vals[i] - vals[i - 1]) > tol * scale:
            clusters.append((start, i - start))
            start = i
    return tuple(clusters)


def _mass_extremal_estimates(M, seed: int):
    """(lambda_min, lambda_max) estimates for SPD M by seeded power iterations."""
    Ms = sp.csc_matrix(M, dtype=complex)
    n = Ms.shape[0]
    rng = np.random.default_rng(seed ^ 0x5EED)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    for _ in range(20):
        x = Ms @ x
        x /= np.linalg.norm(x)
    lam_max = float(np.vdot(x, Ms @ x).real)
    try:
        lu = spla.splu(Ms)
    except RuntimeError as exc:
        raise EigsolveError(f"mass matrix factorization failed (not SPD?): {exc}") from exc
    y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y /= np.linalg.norm(y)
    for _ in range(25):
        y = lu.solve(y)
        y /= np.linalg.norm(y)
    lam_min = float(np.vdot(y, Ms @ y).real)
    if lam_min <= 0:
        raise EigsolveError("mass matrix is not positive definite")
    return lam_min, lam_max


def _gershgorin_under_shift(K, M, seed: int = 0) -> float:
    """Safe shift strictly below the lowest pencil eigenvalue.

    Gershgorin bounds K from below; for the SPD mass the extremal
    eigenvalues are estimated by power iterations with a 2x safety factor,
    since Gershgorin is useless for non-diagonally-dominant mass matrices.
    """
    if sp.issparse(K):
        Kc = sp.csr_matrix(K)
        diag = Kc.diagonal().real
        radius = np.asarray(abs(Kc).sum(axis=1)).ravel() - np.abs(diag)
    else:
        Kd = np.asarray(K)
        diag = np.diag(Kd).real
        radius = np.sum(np.abs(Kd), axis=1) - np.abs(diag)
    low_K = float(np.min(diag - radius))
    if M is None:
        return low_K - 1.0
    m_lo, m_hi = _mass_extremal_estimates(M, seed)
    bound = low_K / (0.5 * m_lo) if low_K < 0 else low_K / (2.0 * m_hi)
    return bound - 1.0


def _residuals(K, M, vals, vecs):
    out = np.empty(len(vals))
    for i, lam in enumerate(vals):
        x = vecs[:, i]
        Mx = x if M is None else M @ x
        out[i] = np.linalg.norm(K @ x - lam * Mx) / max(np.linalg.norm(Mx), 1e-300)
    return out


def _dense_path(K, M, req: EigRequest) -> Spectrum:
    Kd = K.toarray() if sp.issparse(K) else np.asarray(K)
    Md = None if M is None else (M.toarray() if sp.issparse(M) else np.asarray(M))
    if Md is None:
        vals, vecs = sla.eigh(Kd)
    else:
        vals, vecs = sla.eigh(Kd, Md)
    k = min(req.count, len(vals))
    vals, vecs = vals[:k], vecs[:, :k]
    res = _residuals(Kd, Md, vals, vecs)
    return Spectrum(
        eigenvalues=vals,
        residuals=res,
        multiplicity_clusters=_cluster(vals, req.cluster_tol),
        eigenvectors=vecs,
        converged=bool(np.all(res <= req.tol)),
        seed=req.seed,
    )


def _factorize(Ks, Ms, sigma: float, n: int):
    eye = sp.identity(n, format="csc", dtype=complex)
    shifted = Ks - sigma * (eye if Ms is None else Ms)
    try:
        return spla.splu(shifted.tocsc()), sigma
    except RuntimeError:
        sigma -= max(1.0, abs(sigma)) * 1e-6
        shifted = Ks - sigma * (eye if Ms is None else Ms)
        try:
            return spla.splu(shifted.tocsc()), sigma
        except RuntimeError as exc:
            raise EigsolveError(f"factorization of K - sigma*M failed: {exc}") from exc


def _lanczos_sweep(lu, Ks, apply_m, m_dot, v0, steps: int, locked_vecs):
    """One full-reorthogonalization Lanczos run; returns (T, basis, ops)."""
    V = [v0]
    alphas: list[float] = []
    betas: list[float] = []
    ops = 0
    for _ in range(steps):
        w = lu.solve(apply_m(V[-1]))
        ops += 1
        if betas:
            w -= betas[-1] * V[-2]
        alpha = m_dot(V[-1], w).real
        w -= alpha * V[-1]
        alphas.append(alpha)
        # full reorthogonalization (twice) against locked and basis
        for _ in range(2):
            for u in locked_vecs:
                w -= u * m_dot(u, w)
            for u in V:
                w -= u * m_dot(u, w)
        beta = np.sqrt(abs(m_dot(w, w)))
        if beta < 1e-14:
            break
        betas.append(beta)
        V.append(w / beta)
    m = len(alphas)
    T = np.diag(alphas)
    for i, b in enumerate(betas[: m - 1]):
        T[i, i + 1] = T[i + 1, i] = b
    return T, np.column_stack(V[:m]) if m else None, ops


def _lanczos_path(K, M, req: EigRequest) -> Spectrum:
    n = K.shape[0]
    Ks = sp.csc_matrix(K, dtype=complex)
    Ms = None if M is None else sp.csc_matrix(M, dtype=complex)

    def apply_m(x):
        return x if Ms is None else Ms @ x

    def m_dot(a, b):
        return np.vdot(a, apply_m(b))

    rng = np.random.default_rng(req.seed)

    def fresh_vector(locked_vecs):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        for u in locked_vecs:
            v -= u * m_dot(u, v)
        nrm = np.sqrt(abs(m_dot(v, v)))
        return None if nrm < 1e-14 else v / nrm

    shift_given = req.shift is not None
    sigma = req.shift if shift_given else _gershgorin_under_shift(K, M, req.seed)
    lu, sigma = _factorize(Ks, Ms, sigma, n)
    ops = 0

    if not shift_given:
        # pilot sweep: even a rough smallest Ritz value lets us refactorize
        # with a shift close below E_1, restoring shift-invert separation
        v0 = fresh_vector([])
        T, _, used = _lanczos_sweep(lu, Ks, apply_m, m_dot, v0,
                                    min(n, 60), [])
        ops += used
        theta = np.linalg.eigvalsh(T)
        lams = sigma + 1.0 / theta[np.abs(theta) > 1e-300]
        lams = np.sort(lams[np.isfinite(lams)])
        if len(lams):
            gap = (lams[1] - lams[0]) if len(lams) > 1 else 0.0
            refined = lams[0] - max(gap, 0.05 * (1.0 + abs(lams[0])))
            if refined > sigma:
                sigma = refined
                lu, sigma = _factorize(Ks, Ms, sigma, n)

    locked_vals: list[float] = []
    locked_vecs: list[np.ndarray] = []
    steps = min(n, max(2 * req.count + 30, 50))
    empty_restarts = 0
    shift_attempts = 0

    while len(locked_vals) < req.count and ops < req.max_iter and empty_restarts < 4:
        v0 = fresh_vector(locked_vecs)
        if v0 is None:
            break
        T, basis, used = _lanczos_sweep(
            lu, Ks, apply_m, m_dot, v0,
            min(steps, n - len(locked_vecs)), locked_vecs,
        )
        ops += used
        if basis is None:
            break
        theta, S = np.linalg.eigh(T)

        # spectrum below the shift shows up as converged negative theta;
        # that invalidates the ascending-lambda prefix, so descend and redo
        if theta[0] < -1e-12 * max(1.0, abs(theta[-1])) and shift_attempts < 4:
            lam_below = sigma + 1.0 / theta[0]
            sigma = lam_below - max(1.0, 0.05 * abs(lam_below))
            lu, sigma = _factorize(Ks, Ms, sigma, n)
            locked_vals, locked_vecs = [], []
            shift_attempts += 1
            continue

        # Lock in descending-theta order and stop at the first unconverged
        # Ritz pair: with sigma below the remaining spectrum that order is
        # ascending in lambda, so the locked set never skips an eigenvalue.
        locked_any = False
        for idx in np.argsort(-theta):
            if theta[idx] < 1e-13:
                break
            lam = sigma + 1.0 / theta[idx]
            x = basis @ S[:, idx]
            Mx = apply_m(x)
            res = np.linalg.norm(Ks @ x - lam * Mx) / max(np.linalg.norm(Mx), 1e-300)
            if res > req.tol:
                break
            for u in locked_vecs:
                x -= u * m_dot(u, x)
            nx = np.sqrt(abs(m_dot(x, x)))
            if nx < 1e-8:
                continue
            x /= nx
            locked_vals.append(lam)
            locked_vecs.append(x)
            locked_any = True
        if locked_any:
            empty_restarts = 0
            order = np.argsort(locked_vals)
            locked_vals = [locked_vals[i] for i in order]
            locked_vecs = [locked_vecs[i] for i in order]
        else:
            # deepen the Krylov space before trying a fresh start vector
            empty_restarts += 1
            steps = min(n, int(steps * 1.6) + 10)

    if not locked_vals:
        raise EigsolveError("Lanczos produced no converged eigenpairs")
    vals = np.array(locked_vals[: req.count])
    vecs = np.column_stack(locked_vecs[: req.count])
    res = _residuals(Ks, Ms, vals, vecs)
    converged = len(vals) == req.count and bool(np.all(res <= req.tol))
    return Spectrum(
        eigenvalues=vals,
        residuals=res,
        multiplicity_clusters=_cluster(vals, req.cluster_tol),
        eigenvectors=vecs,
        converged=converged,
        seed=req.seed,
    )


def lowest(req: EigRequest) -> Spectrum:
    """Lowest ``req.count`` eigenvalues of the pencil, ascending."""
    K, M = _split(req.pencil)
    n = K.shape[0]
    if req.method == "dense" or (req.method == "auto" and n <= _DENSE_CUTOFF):
        return _dense_path(K, M, req)
    return _lanczos_path(K, M, req)
