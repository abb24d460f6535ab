"""P1 assembly of the squared-operator quadratic forms on 2D meshes.

Bag problem on the interior of a curve: stiffness + m^2 mass over the
domain plus the line integral of ``(m + kappa/2)|u|^2`` along the curve,
with the pointwise constraint ``u = B u`` imposed by eliminating boundary
DOFs through the transported frame (one complex scalar per boundary node,
two per interior node).

Jump problem on the truncated plane: region-weighted masses (m^2 inside,
M^2 outside), Dirichlet outer ring, and the interface line integral; the
projector combination ``(M-m)(|P_- u|^2 - |P_+ u|^2)`` collapses to
``-(M-m) <B u, u>``, which is what gets assembled (3-point Gauss with the
exact curve supplying kappa and B along each edge).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from dirac_ml import eigsolve
from dirac_ml.boundary_spectra import transported_frame
from dirac_ml.clifford import boundary_matrix, build_gammas
from dirac_ml.fem2d.kernels import p1_triplets
from dirac_ml.fem2d.mesh import LayerSpec, Mesh2D, build_mesh
from dirac_ml.geometry import ClosedCurve

__all__ = [
    "QuadraticPencil",
    "assemble_bag_form",
    "assemble_jump_form",
    "bag_full_matrices",
    "pencil_lowest",
    "bag_spectrum_on_disk",
    "jump_spectrum_on_disk",
    "auto_layer",
]

_GAUSS3_XI = np.array([0.5 - np.sqrt(0.6) / 2, 0.5, 0.5 + np.sqrt(0.6) / 2])
_GAUSS3_W = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])


@dataclass(frozen=True)
class QuadraticPencil:
    """Hermitian form matrix K with SPD mass M on the reduced DOF space."""

    K: sp.csr_matrix = field(repr=False)
    M_mass: sp.csr_matrix = field(repr=False)
    dof_map: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        dev = abs(self.K - self.K.conj().T).max()
        scale = max(abs(self.K).max(), 1e-300)
        if dev > 1e-12 * scale:
            raise ValueError(f"form matrix not Hermitian (dev {dev:.2e})")


_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


def _t_shapes(q: np.ndarray, t0, t1, tq):
    """Boundary-layer shape functions on [t0, t1] at points tq.

    For |q| dt above a tiny threshold the pair spans the local solutions
    exp(+-q t) of the 1D reaction operator (nodal at the endpoints); the
    q -> 0 limit is the linear pair.  Shapes stay bounded by 1 and the
    construction is symmetric under t -> -t, so the exterior side (t < 0)
    uses the same formulas.
    """
    dt = (t1 - t0)[:, None]
    qv = q[:, None]
    arg = qv * dt
    lin_L = (t1[:, None] - tq) / dt
    lin_R = (tq - t0[:, None]) / dt
    lin_dL = -1.0 / dt * np.ones_like(tq)
    lin_dR = 1.0 / dt * np.ones_like(tq)
    use_fit = np.abs(arg) > 1e-6
    safe_arg = np.where(use_fit, arg, 1.0)
    sh = np.sinh(safe_arg)
    L = np.where(use_fit, np.sinh(qv * (t1[:, None] - tq)) / sh, lin_L)
    R = np.where(use_fit, np.sinh(qv * (tq - t0[:, None])) / sh, lin_R)
    dL = np.where(use_fit, -qv * np.cosh(qv * (t1[:, None] - tq)) / sh, lin_dL)
    dR = np.where(use_fit, qv * np.cosh(qv * (tq - t0[:, None])) / sh, lin_dR)
    return (L, dL), (R, dR)


def _band_quad_triplets(mesh: Mesh2D, wmass: np.ndarray, qfit_by_region):
    """COO triplets for the band quads, assembled in tubular coordinates.

    3-point Gauss along s times 8-point Gauss along t; volume weight
    phi = 1 - t*kappa(s); the t-direction basis is exponentially fitted
    with the per-region rate from ``qfit_by_region``.
    """
    quads = mesh.quads
    chart = mesh.quad_chart
    nq = len(quads)
    ell = mesh.curve.total_length
    s_lo, s_hi, t0, t1 = chart[:, 0], chart[:, 1], chart[:, 2], chart[:, 3]
    ds = (s_hi - s_lo)
    q_rate = np.where(mesh.quad_region == 0, qfit_by_region[0], qfit_by_region[1])
    # do not fit elements where the layer mode is numerically dead
    q_rate = np.where(np.abs(q_rate * np.minimum(np.abs(t0), np.abs(t1))) > 60.0,
                      0.0, q_rate)

    sq = s_lo[:, None] + (0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)]))[None, :] * ds[:, None]
    ws = (np.array([5.0, 8.0, 5.0]) / 18.0)[None, :] * ds[:, None]
    tq = t0[:, None] + (0.5 * (_GL8_X + 1.0))[None, :] * (t1 - t0)[:, None]
    wt = (0.5 * _GL8_W)[None, :] * (t1 - t0)[:, None]

    kappa = np.asarray(mesh.curve.curvature(np.mod(sq.ravel(), ell))).reshape(nq, 3)
    # phi(s, t) at the tensor quadrature grid: (nq, 3s, 8t)
    phi = 1.0 - tq[:, None, :] * kappa[:, :, None]
    if np.any(phi <= 0):
        raise ValueError("chart weight nonpositive; band too deep")
    w2 = np.abs(ws[:, :, None] * wt[:, None, :])

    xi = (sq - s_lo[:, None]) / ds[:, None]
    ls, rs = 1.0 - xi, xi
    dls, drs = -1.0 / ds[:, None] * np.ones_like(xi), 1.0 / ds[:, None] * np.ones_like(xi)
    (L, dL), (R, dR) = _t_shapes(q_rate, t0, t1, tq)

    # dof order (s_lo,t0), (s_hi,t0), (s_hi,t1), (s_lo,t1)
    Ns = (ls, rs, rs, ls)
    dNs = (dls, drs, drs, dls)
    Nt = (L, L, R, R)
    dNt = (dL, dL, dR, dR)

    rows = np.repeat(quads, 4, axis=1).ravel()
    cols = np.tile(quads, (1, 4)).ravel()
    sv = np.empty((nq, 16))
    mv = np.empty((nq, 16))
    k = 0
    for a in range(4):
        for b in range(4):
            grad_s = dNs[a][:, :, None] * Nt[a][:, None, :] * (
                dNs[b][:, :, None] * Nt[b][:, None, :]
            )
            grad_t = Ns[a][:, :, None] * dNt[a][:, None, :] * (
                Ns[b][:, :, None] * dNt[b][:, None, :]
            )
            val = Ns[a][:, :, None] * Nt[a][:, None, :] * (
                Ns[b][:, :, None] * Nt[b][:, None, :]
            )
            sv[:, k] = np.sum(w2 * (grad_s / phi + grad_t * phi), axis=(1, 2))
            mv[:, k] = wmass * np.sum(w2 * val * phi, axis=(1, 2))
            k += 1
    return rows, cols, sv.ravel(), mv.ravel()


def _scalar_matrices(mesh: Mesh2D, tri_w: np.ndarray, quad_w: np.ndarray,
                     qfit_by_region=(0.0, 0.0)):
    """Scalar stiffness and weighted mass over triangles plus band quads."""
    n = mesh.num_vertices
    parts = []
    if len(mesh.triangles):
        parts.append(p1_triplets(mesh.vertices, mesh.triangles, tri_w))
    if len(mesh.quads):
        parts.append(_band_quad_triplets(mesh, quad_w, qfit_by_region))
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    sv = np.concatenate([p[2] for p in parts])
    mv = np.concatenate([p[3] for p in parts])
    S = sp.coo_matrix((sv, (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((mv, (rows, cols)), shape=(n, n)).tocsr()
    return S, M


def _spinor(A: sp.spmatrix) -> sp.csr_matrix:
    return sp.kron(A, sp.identity(2, format="csr"), format="csr").astype(complex)


def _boundary_line_matrix(mesh: Mesh2D, coeff) -> sp.csr_matrix:
    """Scalar line-mass matrix sum_edges int coeff(s) N_i N_j ds."""
    n = mesh.num_vertices
    rows, cols, vals = [], [], []
    for a, b, sa, sb in mesh.boundary_edges:
        a, b = int(a), int(b)
        ds = sb - sa
        sq = sa + _GAUSS3_XI * ds
        cq = coeff(sq) * _GAUSS3_W * ds
        na = 1.0 - _GAUSS3_XI
        nb = _GAUSS3_XI
        for (i, Ni) in ((a, na), (b, nb)):
            for (j, Nj) in ((a, na), (b, nb)):
                rows.append(i)
                cols.append(j)
                vals.append(float(np.sum(cq * Ni * Nj)))
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def _interface_matrix(mesh: Mesh2D, factor: float) -> sp.csr_matrix:
    """Spinor-level line matrix ``factor * int <B(s) u, u> ds``."""
    n = mesh.num_vertices
    rep3 = build_gammas(3)
    rows, cols, vals = [], [], []
    for a, b, sa, sb in mesh.boundary_edges:
        a, b = int(a), int(b)
        ds = sb - sa
        sq = sa + _GAUSS3_XI * ds
        normals = np.asarray(mesh.curve.normal(sq))
        na = 1.0 - _GAUSS3_XI
        nb = _GAUSS3_XI
        for q in range(3):
            B = boundary_matrix(rep3, normals[q]).B
            w = factor * _GAUSS3_W[q] * ds
            for (i, Ni) in ((a, na[q]), (b, nb[q])):
                for (j, Nj) in ((a, na[q]), (b, nb[q])):
                    for ci in range(2):
                        for cj in range(2):
                            v = w * Ni * Nj * B[ci, cj]
                            if v != 0:
                                rows.append(2 * i + ci)
                                cols.append(2 * j + cj)
                                vals.append(v)
    return sp.coo_matrix(
        (vals, (rows, cols)), shape=(2 * n, 2 * n), dtype=complex
    ).tocsr()


def _fit_rate(mass: float) -> float:
    """Layer decay rate for the fitted band basis (0 disables fitting)."""
    return abs(mass) if abs(mass) >= 2.0 else 0.0


def bag_full_matrices(mesh: Mesh2D, m: float):
    """Unconstrained spinor matrices (K_full, M_full) of the bag form."""
    if mesh.curve is None:
        raise ValueError("mesh carries no curve; rebuild or pass one on import")
    S, Mm = _scalar_matrices(
        mesh,
        np.full(len(mesh.triangles), 1.0),
        np.full(len(mesh.quads), 1.0),
        (_fit_rate(m), 0.0),
    )
    line = _boundary_line_matrix(
        mesh, lambda s: m + 0.5 * np.asarray(mesh.curve.curvature(s))
    )
    K_full = _spinor(S + (m * m) * Mm + line)
    M_full = _spinor(Mm)
    return K_full, M_full


def _constraint(mesh: Mesh2D) -> tuple:
    """Sparse reduction C with x_full = C x_red and the dof bookkeeping."""
    n = mesh.num_vertices
    order = np.argsort(mesh.boundary_s)
    bnodes = np.asarray(mesh.boundary_nodes, dtype=np.int64)[order]
    s_sorted = np.asarray(mesh.boundary_s)[order]
    frame = transported_frame(mesh.curve, s_sorted)
    is_boundary = np.zeros(n, dtype=bool)
    is_boundary[bnodes] = True

    rows, cols, vals = [], [], []
    col = 0
    dof_of_node = {}
    for v in range(n):
        if is_boundary[v]:
            continue
        for c in range(2):
            rows.append(2 * v + c)
            cols.append(col)
            vals.append(1.0)
            col += 1
        dof_of_node[v] = ("interior", col - 2)
    for bi, v in enumerate(bnodes):
        rows.append(2 * v)
        cols.append(col)
        vals.append(frame[bi, 0])
        rows.append(2 * v + 1)
        cols.append(col)
        vals.append(frame[bi, 1])
        dof_of_node[int(v)] = ("boundary", col)
        col += 1
    C = sp.coo_matrix((vals, (rows, cols)), shape=(2 * n, col), dtype=complex).tocsr()
    return C, dof_of_node


def assemble_bag_form(mesh: Mesh2D, m: float) -> QuadraticPencil:
    """Constrained bag pencil; DOFs = 2*interior + 1*boundary (complex)."""
    if mesh.interface_flag != "bag":
        raise ValueError("bag form needs a bag mesh")
    K_full, M_full = bag_full_matrices(mesh, m)
    C, dof_of_node = _constraint(mesh)
    K = (C.conj().T @ K_full @ C).tocsr()
    M = (C.conj().T @ M_full @ C).tocsr()
    K = (K + K.conj().T) * 0.5
    n_int = mesh.num_vertices - len(mesh.boundary_nodes)
    return QuadraticPencil(
        K=K,
        M_mass=M,
        dof_map={
            "kind": "bag",
            "interior_nodes": n_int,
            "boundary_nodes": len(mesh.boundary_nodes),
            "node_dofs": dof_of_node,
        },
        meta={"m": m, "h": mesh.h},
    )


def assemble_jump_form(mesh: Mesh2D, m: float, M_out: float) -> QuadraticPencil:
    """Whole-plane jump pencil on the truncated mesh (Dirichlet outer ring)."""
    if mesh.interface_flag != "jump":
        raise ValueError("jump form needs a jump mesh")
    qfit = (_fit_rate(m), _fit_rate(M_out))
    S, Mm_plain = _scalar_matrices(
        mesh,
        np.full(len(mesh.triangles), 1.0),
        np.full(len(mesh.quads), 1.0),
        qfit,
    )
    _, Mm_weighted = _scalar_matrices(
        mesh,
        np.where(mesh.tri_region == 0, m * m, M_out * M_out),
        np.where(mesh.quad_region == 0, m * m, M_out * M_out),
        qfit,
    )
    K_full = _spinor(S + Mm_weighted) + _interface_matrix(mesh, -(M_out - m))
    M_full = _spinor(Mm_plain)

    keep = np.ones(2 * mesh.num_vertices, dtype=bool)
    for v in mesh.dirichlet_nodes:
        keep[2 * v] = keep[2 * v + 1] = False
    idx = np.where(keep)[0]
    K = K_full[idx][:, idx].tocsr()
    M = M_full[idx][:, idx].tocsr()
    K = (K + K.conj().T) * 0.5
    return QuadraticPencil(
        K=K,
        M_mass=M,
        dof_map={"kind": "jump", "kept_dofs": idx},
        meta={"m": m, "M": M_out, "h": mesh.h},
    )


def pencil_lowest(pencil: QuadraticPencil, count: int, tol: float = 1e-8,
                  seed: int = 20_250_809, shift: float | None = None):
    """Lowest pencil eigenvalues through the shared eigensolver."""
    return eigsolve.lowest(
        eigsolve.EigRequest(
            pencil=(pencil.K, pencil.M_mass), count=count, tol=tol, seed=seed,
            shift=shift,
        )
    )


def auto_layer(mass: float) -> LayerSpec | None:
    """Boundary-layer grading for |mass| >= 4: width 6/|m|, ratio 1.2.

    The band elements carry the fitted layer basis, so the graded rings
    are cheap; what the width buys is keeping the fitted region deep
    enough that the field is numerically dead beyond it.
    """
    if abs(mass) >= 4.0:
        return LayerSpec(width=6.0 / abs(mass), ratio=1.2, start_divisor=24.0)
    return None


def bag_spectrum_on_disk(radius: float, m: float, h: float, count: int,
                         layer_spec: LayerSpec | None = None,
                         tol: float = 1e-8) -> np.ndarray:
    """Convenience path: disk bag eigenvalues of the squared operator."""
    curve = ClosedCurve.circle(radius)
    mesh = build_mesh(curve, h, "bag", layer_spec=layer_spec or auto_layer(m))
    pencil = assemble_bag_form(mesh, m)
    return pencil_lowest(pencil, count, tol=tol).eigenvalues


def jump_spectrum_on_disk(radius: float, m: float, M_out: float, h: float,
                          box_half_width: float, count: int,
                          tol: float = 1e-8) -> np.ndarray:
    """Convenience path: disk jump eigenvalues of the squared operator."""
    curve = ClosedCurve.circle(radius)
    mesh = build_mesh(
        curve, h, "jump",
        layer_spec=auto_layer(m),
        box_half_width=box_half_width,
        layer_spec_out=auto_layer(M_out),
    )
    pencil = assemble_jump_form(mesh, m, M_out)
    return pencil_lowest(pencil, count, tol=tol).eigenvalues
