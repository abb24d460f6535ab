"""Meshes, forms, and cross-validation of the finite-element path."""

import numpy as np
import pytest
import scipy.sparse as sp

from dirac_ml.fem2d import (
    LayerSpec,
    MeshError,
    assemble_bag_form,
    assemble_jump_form,
    auto_layer,
    bag_full_matrices,
    bag_spectrum_on_disk,
    build_mesh,
    export_mesh,
    import_mesh,
    jump_spectrum_on_disk,
    pencil_lowest,
    refine_mesh,
)
from dirac_ml.fem2d.kernels import p1_triplets_numpy
from dirac_ml.fem2d.mesh import mesh_area
from dirac_ml.geometry import ClosedCurve
from dirac_ml.radial_exact import RadialProblem, disk_jump_spectrum, disk_mit_spectrum


@pytest.fixture(scope="module")
def disk():
    return ClosedCurve.circle(1.0)


def test_boundary_nodes_on_exact_curve(disk):
    mesh = build_mesh(disk, 0.05, "bag")
    pts = mesh.vertices[mesh.boundary_nodes]
    assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) <= 1e-12


def test_mesh_area_refinement_order(disk):
    errs = []
    for h in (0.1, 0.05):
        mesh = build_mesh(disk, h, "bag", mode="plain")
        errs.append(abs(mesh_area(mesh) - np.pi))
    assert 3.0 < errs[0] / errs[1] < 5.5


def test_layer_spec_smallest_edge():
    # spacing sequence starts at width/start_divisor
    from dirac_ml.fem2d.mesh import _layer_spacings
    sp_ = _layer_spacings(LayerSpec(width=1.0 / 32.0, ratio=1.2, start_divisor=2.0), 0.02)
    assert sp_[0] <= 1.0 / 64.0


def test_nonconvex_rejected():
    wavy = ClosedCurve.fourier(
        [[1, 1.0, 0.0, 0.0, 1.0], [3, 0.15, 0.0, 0.0, -0.15]]
    )
    if not wavy.is_convex():
        with pytest.raises(MeshError):
            build_mesh(wavy, 0.05, "bag")


def test_kernel_backends_agree(disk):
    mesh = build_mesh(disk, 0.1, "bag", mode="plain")
    w = np.linspace(0.5, 2.0, len(mesh.triangles))
    a = p1_triplets_numpy(mesh.vertices, mesh.triangles, w)
    from dirac_ml._backend import USE_NUMBA
    if USE_NUMBA:
        from dirac_ml.fem2d.kernels import p1_triplets_numba
        b = p1_triplets_numba(mesh.vertices, mesh.triangles, w)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        assert np.allclose(a[2], b[2], atol=1e-14)
        assert np.allclose(a[3], b[3], atol=1e-14)


def test_constant_field_boundary_term(disk):
    # full-space form on the constant spinor (1, 0): stiffness vanishes and
    # the m=0 boundary term integrates kappa/2 to pi
    mesh = build_mesh(disk, 0.05, "bag")
    K_full, M_full = bag_full_matrices(mesh, 0.0)
    x = np.zeros(2 * mesh.num_vertices, dtype=complex)
    x[0::2] = 1.0
    val = np.vdot(x, K_full @ x).real
    assert abs(val - np.pi) < 1e-10
    # the frame-following boundary field sees the same line integral up to
    # the O(h^2) interpolation dip of the rotating unit spinor
    from dirac_ml.boundary_spectra import transported_frame
    from dirac_ml.fem2d.forms import _boundary_line_matrix, _spinor
    line = _spinor(_boundary_line_matrix(
        mesh, lambda s: 0.5 * np.asarray(mesh.curve.curvature(s))
    ))
    frame = transported_frame(mesh.curve, mesh.boundary_s)
    y = np.zeros(2 * mesh.num_vertices, dtype=complex)
    y[2 * mesh.boundary_nodes] = frame[:, 0]
    y[2 * mesh.boundary_nodes + 1] = frame[:, 1]
    val2 = np.vdot(y, line @ y).real
    # the +1 eigenbundle has holonomy -1, so one seam edge of any nodal
    # frame field interpolates through e -> -e and loses ds/3 of the
    # integral; away from the seam the value is pi up to the O(h^2) dip
    ds = mesh.curve.total_length / len(mesh.boundary_nodes)
    assert abs(val2 - (np.pi - ds / 3.0)) < 2 * mesh.h**2


def test_hermiticity(disk):
    mesh = build_mesh(disk, 0.08, "bag")
    pencil = assemble_bag_form(mesh, -4.0)
    assert abs(pencil.K - pencil.K.conj().T).max() <= 1e-12 * abs(pencil.K).max()


def test_dof_count(disk):
    mesh = build_mesh(disk, 0.1, "bag")
    pencil = assemble_bag_form(mesh, 0.0)
    n_int = mesh.num_vertices - len(mesh.boundary_nodes)
    assert pencil.K.shape[0] == 2 * n_int + len(mesh.boundary_nodes)


def test_bag_matches_exact_solver_one_percent(disk):
    exact = disk_mit_spectrum(RadialProblem("disk", 1.0, -8.0)).values[:4]
    fem = bag_spectrum_on_disk(1.0, -8.0, 0.02, 4)
    assert np.all(np.abs(fem - exact) / exact < 0.01)


def test_jump_matches_exact_solver_two_percent(disk):
    exact = disk_jump_spectrum(RadialProblem("disk", 1.0, 0.0, M=32.0)).values[0]
    fem = jump_spectrum_on_disk(1.0, 0.0, 32.0, 0.05, 3.0, 1)[0]
    assert abs(fem - exact) / exact < 0.02


def test_jump_equal_masses_reduces_to_free_form(disk):
    mesh = build_mesh(disk, 0.1, "jump", box_half_width=2.5)
    m = 3.0
    pencil = assemble_jump_form(mesh, m, m)
    # interface terms cancel: K = spinor(S + m^2 M) restricted to kept dofs
    from dirac_ml.fem2d.forms import _scalar_matrices, _spinor
    S, Mm = _scalar_matrices(
        mesh,
        np.full(len(mesh.triangles), 1.0),
        np.full(len(mesh.quads), 1.0),
        (abs(m), abs(m)),
    )
    K_ref = _spinor(S + m * m * Mm)
    keep = np.ones(2 * mesh.num_vertices, dtype=bool)
    for v in mesh.dirichlet_nodes:
        keep[2 * v] = keep[2 * v + 1] = False
    idx = np.where(keep)[0]
    K_ref = K_ref[idx][:, idx]
    assert abs(pencil.K - K_ref).max() <= 1e-10 * abs(K_ref).max()


def test_interface_projectors_identity(disk):
    from dirac_ml.clifford import boundary_matrix, build_gammas
    rep3 = build_gammas(3)
    mesh = build_mesh(disk, 0.1, "jump", box_half_width=2.5)
    for s in mesh.boundary_s[:8]:
        data = boundary_matrix(rep3, np.asarray(mesh.curve.normal(s)))
        assert np.allclose(data.P_plus + data.P_minus, np.eye(2), atol=1e-15)


def test_convergence_order_plain(disk):
    vals = {}
    for h in (0.16, 0.08, 0.04):
        mesh = build_mesh(disk, h, "bag", mode="plain")
        vals[h] = pencil_lowest(assemble_bag_form(mesh, -4.0), 1, shift=0.0).eigenvalues[0]
    ratio = (vals[0.16] - vals[0.08]) / (vals[0.08] - vals[0.04])
    assert 3.2 <= ratio <= 4.8


def test_nested_refinement_monotonicity(disk):
    mesh = build_mesh(disk, 0.1, "bag", mode="plain")
    fine = refine_mesh(mesh)
    ev_c = pencil_lowest(assemble_bag_form(mesh, -4.0), 3, shift=0.0).eigenvalues
    ev_f = pencil_lowest(assemble_bag_form(fine, -4.0), 3, shift=0.0).eigenvalues
    assert np.all(ev_f <= ev_c + 1e-9)


def test_refine_requires_plain(disk):
    mesh = build_mesh(disk, 0.1, "bag")
    with pytest.raises(MeshError):
        refine_mesh(mesh)


def test_outer_box_independence(disk):
    a = jump_spectrum_on_disk(1.0, 0.0, 32.0, 0.05, 3.0, 1)[0]
    b = jump_spectrum_on_disk(1.0, 0.0, 32.0, 0.05, 6.0, 1)[0]
    assert abs(a - b) < 1e-6


def test_export_import_roundtrip(tmp_path, disk):
    mesh = build_mesh(disk, 0.1, "bag", mode="plain")
    path = tmp_path / "mesh.txt"
    export_mesh(mesh, path)
    back = import_mesh(path, curve=disk)
    assert back.num_vertices == mesh.num_vertices
    assert np.allclose(back.vertices, mesh.vertices)
    assert np.array_equal(np.sort(back.boundary_nodes), np.sort(mesh.boundary_nodes))
    val_a = pencil_lowest(assemble_bag_form(mesh, 0.0), 1, shift=0.0).eigenvalues[0]
    val_b = pencil_lowest(assemble_bag_form(back, 0.0), 1, shift=0.0).eigenvalues[0]
    assert abs(val_a - val_b) < 1e-10


def test_jump_requires_box(disk):
    with pytest.raises(ValueError):
        build_mesh(disk, 0.1, "jump")
    with pytest.raises(ValueError):
        build_mesh(disk, 0.1, "jump", box_half_width=1.5)


def test_auto_layer_policy():
    assert auto_layer(0.0) is None
    assert auto_layer(-2.0) is None
    spec = auto_layer(-8.0)
    assert spec is not None and abs(spec.width - 6.0 / 8.0) < 1e-15
