"""Structured boundary-layer meshes on convex curve domains.

Two element families:

* ring bands next to the curve, stored as quadrilaterals with their exact
  tubular coordinates ``(s, t)`` (``t > 0`` inside the curve, ``t < 0``
  outside, ``s`` unwrapped across the seam): these are assembled in chart
  coordinates with the exact volume weight ``1 - t*kappa(s)`` and carry
  the boundary-layer basis, so neither the polygonal geometry error nor
  the layer resolution is amplified by large masses;
* a hex-lattice Delaunay triangle core (plus nothing else for bag
  problems; jump problems add outward bands to the truncation ring, whose
  outermost ring is marked Dirichlet).

``mode="plain"`` builds the classical straight-triangle mesh instead
(bands split into triangles, no chart data); only plain meshes support
nested red refinement, which is what the discrete min-max monotonicity
check needs.

Only convex curves are supported: inward offsets of a convex curve stay
convex, which keeps the ring construction and the Delaunay core valid
without a general-purpose mesher.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import Delaunay

from dirac_ml.geometry import ClosedCurve

__all__ = ["Mesh2D", "LayerSpec", "MeshError", "build_mesh", "refine_mesh",
           "export_mesh", "import_mesh", "mesh_area"]

MIN_ANGLE_DEG = 20.0


class MeshError(RuntimeError):
    """Mesh generation or quality failure."""


@dataclass(frozen=True)
class LayerSpec:
    """Geometric grading of the first rings off the curve.

    ``width`` is the total graded depth, ``ratio`` the geometric growth of
    consecutive ring spacings, and the smallest spacing (on the curve) is
    ``width / start_divisor``.
    """

    width: float
    ratio: float = 1.2
    start_divisor: float = 24.0


@dataclass(frozen=True)
class Mesh2D:
    """Conforming triangle/quad mesh with exact-curve boundary data."""

    vertices: np.ndarray
    triangles: np.ndarray
    tri_region: np.ndarray  # 0 = inside curve, 1 = outside
    quads: np.ndarray  # (nq, 4) band elements, empty in plain mode
    quad_chart: np.ndarray  # (nq, 4): s_lo, s_hi, t_near, t_far (signed)
    quad_region: np.ndarray
    boundary_nodes: np.ndarray
    boundary_s: np.ndarray
    boundary_edges: np.ndarray  # rows (a, b, s_a, s_b) with int-casted a, b
    dirichlet_nodes: np.ndarray
    h: float
    interface_flag: str  # bag | jump
    mode: str = "chart"  # chart | plain
    layer_spec: LayerSpec | None = None
    nested: bool = False
    curve: ClosedCurve = field(repr=False, default=None)

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]


def _layer_spacings(layer: LayerSpec | None, h: float) -> list:
    """Ring spacings through the graded layer (then the caller continues
    at the bulk size)."""
    if layer is None or layer.width <= 0:
        return []
    w, r = layer.width, layer.ratio
    if r <= 1.0:
        raise MeshError("layer ratio must exceed 1")
    d = min(h, w / layer.start_divisor)
    out = []
    total = 0.0
    while total < w:
        out.append(d)
        total += d
        d = min(d * r, h)
    return out


def _quality_or_raise(xy, tris, where: str, skip: np.ndarray | None = None):
    """Min-angle gate for the isotropic triangles (band triangles of plain
    meshes are exempt; graded layers are anisotropic by design)."""
    if len(tris) == 0:
        return
    v0, v1, v2 = xy[tris[:, 0]], xy[tris[:, 1]], xy[tris[:, 2]]
    def ang(a, b, c):
        u, v = b - a, c - a
        cosv = np.sum(u * v, axis=1) / (
            np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
        )
        return np.degrees(np.arccos(np.clip(cosv, -1, 1)))
    angles = np.stack([ang(v0, v1, v2), ang(v1, v2, v0), ang(v2, v0, v1)], axis=1)
    per_tri = np.min(angles, axis=1)
    if np.any(per_tri <= 0.0):
        raise MeshError(f"{where}: degenerate triangle")
    if skip is not None:
        per_tri = np.where(skip, np.inf, per_tri)
    worst = float(np.min(per_tri))
    if worst < MIN_ANGLE_DEG:
        t = int(np.argmin(per_tri))
        raise MeshError(
            f"{where}: min angle {worst:.2f} deg < {MIN_ANGLE_DEG} at triangle "
            f"{t} with vertices {xy[tris[t]].tolist()}"
        )


def _orient_ccw(xy, tris):
    if len(tris) == 0:
        return tris
    v0, v1, v2 = xy[tris[:, 0]], xy[tris[:, 1]], xy[tris[:, 2]]
    area2 = (v1[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1]) - (
        v2[:, 0] - v0[:, 0]
    ) * (v1[:, 1] - v0[:, 1])
    flip = area2 < 0
    tris = tris.copy()
    tris[flip, 1], tris[flip, 2] = tris[flip, 2].copy(), tris[flip, 1].copy()
    return tris


def _band_quads(ring_a, ring_b, s_nodes, ell, t_a, t_b):
    """Quad strip between two aligned rings: corners (lo,a),(hi,a),(hi,b),(lo,b)."""
    n = len(ring_a)
    i = np.arange(n)
    ip = (i + 1) % n
    s_lo = s_nodes
    s_hi = np.where(ip == 0, ell, s_nodes[ip])
    quads = np.stack([ring_a[i], ring_a[ip], ring_b[ip], ring_b[i]], axis=1)
    chart = np.stack(
        [s_lo, s_hi, np.full(n, t_a), np.full(n, t_b)], axis=1
    )
    return quads, chart


def _split_quads(quads: np.ndarray) -> np.ndarray:
    t1 = quads[:, [0, 1, 2]]
    t2 = quads[:, [0, 2, 3]]
    return np.concatenate([t1, t2], axis=0)


def _convex_interior_points(poly: np.ndarray, spacing: float, margin: float):
    """Hex-lattice points strictly inside a convex CCW polygon."""
    lo = poly.min(axis=0)
    hi = poly.max(axis=0)
    dy = spacing * np.sqrt(3.0) / 2.0
    ys = np.arange(lo[1] + margin / 2, hi[1], dy)
    pts = []
    for row, y in enumerate(ys):
        x0 = lo[0] + (spacing / 2 if row % 2 else 0.0)
        xs = np.arange(x0, hi[0], spacing)
        pts.append(np.stack([xs, np.full_like(xs, y)], axis=1))
    if not pts:
        return np.zeros((0, 2))
    pts = np.concatenate(pts, axis=0)
    edges = np.roll(poly, -1, axis=0) - poly
    lengths = np.linalg.norm(edges, axis=1)
    rel = pts[:, None, :] - poly[None, :, :]
    cross = edges[None, :, 0] * rel[:, :, 1] - edges[None, :, 1] * rel[:, :, 0]
    dist = cross / lengths[None, :]
    keep = np.min(dist, axis=1) >= margin
    return pts[keep]


def _inward_rings(curve: ClosedCurve, n_b: int, h: float, layer: LayerSpec | None):
    ell = curve.total_length
    kmax = curve.max_abs_curvature()
    t_geom = 0.45 / kmax
    spacings = _layer_spacings(layer, h)
    t_list = []
    t = 0.0
    queue = list(spacings)
    while True:
        dt = queue.pop(0) if queue else h
        circum_next = (ell - 2 * np.pi * (t + dt)) / n_b
        if t + dt >= t_geom or circum_next < 0.55 * dt or circum_next * n_b < 8 * h:
            break
        t += dt
        t_list.append(t)
    if not t_list:
        raise MeshError("target size h too coarse for this curve")
    return t_list


def _outward_rings(curve: ClosedCurve, n_b: int, h: float, layer: LayerSpec | None,
                   t_out: float):
    ell = curve.total_length
    spacings = list(_layer_spacings(layer, h))
    t_list = []
    t = 0.0
    dt = spacings[0] if spacings else h
    while t < t_out:
        if spacings:
            dt = spacings.pop(0)
        else:
            circum = (ell + 2 * np.pi * t) / n_b
            dt = min(dt * 1.15, 1.3 * circum)
        t = min(t + dt, t_out)
        t_list.append(t)
        if t >= t_out:
            break
    return t_list


def build_mesh(
    curve: ClosedCurve,
    h: float,
    problem: str = "bag",
    layer_spec: LayerSpec | None = None,
    box_half_width: float | None = None,
    layer_spec_out: LayerSpec | None = None,
    mode: str = "chart",
) -> Mesh2D:
    """Conforming mesh for the bag (interior) or jump (two-sided) problem.

    ``box_half_width`` bounds the truncated exterior: the Dirichlet ring is
    the curve offset at distance ``box_half_width - circumradius``, so the
    whole mesh fits in the disk of that half-width around the origin.
    """
    if problem not in ("bag", "jump"):
        raise ValueError("problem must be 'bag' or 'jump'")
    if mode not in ("chart", "plain"):
        raise ValueError("mode must be 'chart' or 'plain'")
    if not curve.is_convex():
        raise MeshError("mesh generation supports convex curves only")
    ell = curve.total_length
    n_b = max(16, int(round(ell / h)))
    s_nodes = np.arange(n_b) * (ell / n_b)
    base_points = curve.point(s_nodes)
    normals = curve.normal(s_nodes)

    t_in = _inward_rings(curve, n_b, h, layer_spec)
    rings = [base_points]
    for t in t_in:
        rings.append(base_points - t * normals)
    ring_ids = [np.arange(j * n_b, (j + 1) * n_b) for j in range(len(rings))]

    verts = list(rings)
    quads, qchart, qregion = [], [], []
    t_edges = [0.0] + list(t_in)
    for j in range(len(rings) - 1):
        qd, ch = _band_quads(
            ring_ids[j], ring_ids[j + 1], s_nodes, ell, t_edges[j], t_edges[j + 1]
        )
        quads.append(qd)
        qchart.append(ch)
        qregion.append(np.zeros(len(qd), dtype=np.int64))

    # convex core: innermost ring polygon + hex fill + Delaunay
    core_poly = rings[-1]
    circ_spacing = (ell - 2 * np.pi * t_in[-1]) / n_b
    spacing = min(h, 1.3 * circ_spacing)
    hex_pts = _convex_interior_points(core_poly, spacing, margin=0.55 * spacing)
    offset = len(rings) * n_b
    core_points = np.concatenate([core_poly, hex_pts], axis=0)
    core_index = np.concatenate([ring_ids[-1], offset + np.arange(len(hex_pts))])
    dela = Delaunay(core_points)
    tris = [core_index[dela.simplices]]
    tregion = [np.zeros(len(dela.simplices), dtype=np.int64)]
    verts.append(hex_pts)

    dirichlet = np.zeros(0, dtype=np.int64)
    if problem == "jump":
        if box_half_width is None:
            raise ValueError("jump meshes need box_half_width")
        circumradius = float(np.max(np.linalg.norm(base_points, axis=1)))
        if box_half_width < 2 * circumradius:
            raise ValueError("box_half_width must be >= 2 * curve circumradius")
        t_out = _outward_rings(
            curve, n_b, h, layer_spec_out, box_half_width - circumradius
        )
        out_offset = offset + len(hex_pts)
        out_ids = [ring_ids[0]] + [
            out_offset + np.arange(j * n_b, (j + 1) * n_b) for j in range(len(t_out))
        ]
        for t in t_out:
            verts.append(base_points + t * normals)
        t_edges_out = [0.0] + list(t_out)
        for j in range(len(t_out)):
            qd, ch = _band_quads(
                out_ids[j], out_ids[j + 1], s_nodes, ell,
                -t_edges_out[j], -t_edges_out[j + 1],
            )
            quads.append(qd)
            qchart.append(ch)
            qregion.append(np.ones(len(qd), dtype=np.int64))
        dirichlet = out_ids[-1]

    xy = np.concatenate(verts, axis=0)
    quads_all = np.concatenate(quads, axis=0)
    qchart_all = np.concatenate(qchart, axis=0)
    qregion_all = np.concatenate(qregion)
    tris_all = np.concatenate(tris, axis=0)
    tregion_all = np.concatenate(tregion)

    if mode == "plain":
        tris_all = np.concatenate([tris_all, _split_quads(quads_all)], axis=0)
        tregion_all = np.concatenate(
            [tregion_all, np.concatenate([qregion_all, qregion_all])]
        )
        skip = np.concatenate(
            [np.zeros(len(tregion_all) - 2 * len(quads_all), dtype=bool),
             np.ones(2 * len(quads_all), dtype=bool)]
        )
        quads_all = np.zeros((0, 4), dtype=np.int64)
        qchart_all = np.zeros((0, 4))
        qregion_all = np.zeros(0, dtype=np.int64)
    else:
        skip = None

    tris_all = _orient_ccw(xy, tris_all)
    _quality_or_raise(xy, tris_all, f"{problem} mesh (h={h})", skip=skip)

    ds = ell / n_b
    edges = np.empty((n_b, 4))
    edges[:, 0] = np.arange(n_b)
    edges[:, 1] = (np.arange(n_b) + 1) % n_b
    edges[:, 2] = s_nodes
    edges[:, 3] = s_nodes + ds
    mesh = Mesh2D(
        vertices=xy,
        triangles=tris_all,
        tri_region=tregion_all,
        quads=quads_all,
        quad_chart=qchart_all,
        quad_region=qregion_all,
        boundary_nodes=np.arange(n_b),
        boundary_s=s_nodes,
        boundary_edges=edges,
        dirichlet_nodes=dirichlet,
        h=float(h),
        interface_flag=problem,
        mode=mode,
        layer_spec=layer_spec,
        curve=curve,
    )
    _validate_boundary(mesh)
    return mesh


def _validate_boundary(mesh: Mesh2D):
    if mesh.nested:
        return
    pts = mesh.vertices[mesh.boundary_nodes]
    exact = mesh.curve.point(mesh.boundary_s)
    dev = np.max(np.linalg.norm(pts - exact, axis=1))
    if dev > 1e-12:
        raise MeshError(f"boundary node off the curve by {dev:.2e}")


def mesh_area(mesh: Mesh2D, region: int | None = None) -> float:
    """Polygonal area covered by the mesh (triangles plus straight quads)."""
    total = 0.0
    if len(mesh.triangles):
        sel = slice(None) if region is None else mesh.tri_region == region
        t = mesh.triangles[sel]
        v0, v1, v2 = mesh.vertices[t[:, 0]], mesh.vertices[t[:, 1]], mesh.vertices[t[:, 2]]
        total += float(
            0.5
            * np.sum(
                (v1[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1])
                - (v2[:, 0] - v0[:, 0]) * (v1[:, 1] - v0[:, 1])
            )
        )
    if len(mesh.quads):
        sel = slice(None) if region is None else mesh.quad_region == region
        q = mesh.quads[sel]
        p = mesh.vertices[q]  # (nq, 4, 2)
        x, y = p[:, :, 0], p[:, :, 1]
        total += float(
            0.5
            * np.sum(
                np.abs(
                    np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)
                )
            )
        )
    return total


def refine_mesh(mesh: Mesh2D) -> Mesh2D:
    """Regular red refinement of a plain mesh (exact space nesting).

    Edge midpoints stay on the straight edges, so the coarse P1 space is a
    subspace of the fine one; boundary midpoints carry interpolated
    arclength and the result is flagged ``nested``.
    """
    if mesh.mode != "plain" or len(mesh.quads):
        raise MeshError("nested refinement is defined for plain meshes only")
    xy = mesh.vertices
    tris = mesh.triangles
    edge_mid = {}
    new_pts = []

    def midpoint(a, b):
        key = (min(a, b), max(a, b))
        if key not in edge_mid:
            edge_mid[key] = len(xy) + len(new_pts)
            new_pts.append(0.5 * (xy[a] + xy[b]))
        return edge_mid[key]

    fine = []
    fregion = []
    for t, reg in zip(tris, mesh.tri_region):
        a, b, c = int(t[0]), int(t[1]), int(t[2])
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        fine.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]])
        fregion.extend([reg] * 4)
    xy2 = np.concatenate([xy, np.array(new_pts)], axis=0)
    tris2 = _orient_ccw(xy2, np.array(fine, dtype=np.int64))

    new_edges = []
    new_bnodes = list(mesh.boundary_nodes)
    new_bs = list(mesh.boundary_s)
    for a, b, sa, sb in mesh.boundary_edges:
        a, b = int(a), int(b)
        mid = edge_mid[(min(a, b), max(a, b))]
        smid = 0.5 * (sa + sb)
        new_bnodes.append(mid)
        new_bs.append(smid)
        new_edges.append([a, mid, sa, smid])
        new_edges.append([mid, b, smid, sb])
    dir_set = set(int(d) for d in mesh.dirichlet_nodes)
    new_dir = list(dir_set)
    for (a, b), mid in edge_mid.items():
        if a in dir_set and b in dir_set:
            new_dir.append(mid)
    return replace(
        mesh,
        vertices=xy2,
        triangles=tris2,
        tri_region=np.array(fregion, dtype=np.int64),
        boundary_nodes=np.array(new_bnodes, dtype=np.int64),
        boundary_s=np.array(new_bs),
        boundary_edges=np.array(new_edges),
        dirichlet_nodes=np.array(sorted(new_dir), dtype=np.int64),
        h=mesh.h / 2,
        nested=True,
    )


def export_mesh(mesh: Mesh2D, path):
    """Plain-text sections: $vertices, $triangles, $boundary.

    Band quads are written as split triangles; importing therefore yields
    a plain mesh.
    """
    tris = mesh.triangles
    if len(mesh.quads):
        tris = np.concatenate([tris, _split_quads(mesh.quads)], axis=0)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("$vertices\n")
        for i, (x, y) in enumerate(mesh.vertices):
            fh.write(f"{i} {x:.17g} {y:.17g}\n")
        fh.write("$triangles\n")
        for i, (a, b, c) in enumerate(tris):
            fh.write(f"{i} {a} {b} {c}\n")
        fh.write("$boundary\n")
        for node, s in zip(mesh.boundary_nodes, mesh.boundary_s):
            fh.write(f"{node} {s:.17g}\n")


def import_mesh(path, curve: ClosedCurve | None = None) -> Mesh2D:
    """Read the plain-text format written by :func:`export_mesh`."""
    section = None
    verts, tris, bnodes, bs = [], [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("$"):
                section = line[1:]
                continue
            parts = line.split()
            if section == "vertices":
                verts.append([float(parts[1]), float(parts[2])])
            elif section == "triangles":
                tris.append([int(parts[1]), int(parts[2]), int(parts[3])])
            elif section == "boundary":
                bnodes.append(int(parts[0]))
                bs.append(float(parts[1]))
            else:
                raise MeshError(f"unknown section for line {line!r}")
    order = np.argsort(bs)
    bnodes = np.array(bnodes, dtype=np.int64)[order]
    bs = np.array(bs)[order]
    n_b = len(bnodes)
    edges = np.empty((n_b, 4))
    total = bs[-1] + (bs[1] - bs[0]) if n_b > 1 else 0.0
    for i in range(n_b):
        j = (i + 1) % n_b
        edges[i] = [bnodes[i], bnodes[j], bs[i], bs[j] if j else total]
    tris_arr = np.array(tris, dtype=np.int64)
    xy = np.array(verts)
    return Mesh2D(
        vertices=xy,
        triangles=_orient_ccw(xy, tris_arr),
        tri_region=np.zeros(len(tris_arr), dtype=np.int64),
        quads=np.zeros((0, 4), dtype=np.int64),
        quad_chart=np.zeros((0, 4)),
        quad_region=np.zeros(0, dtype=np.int64),
        boundary_nodes=bnodes,
        boundary_s=bs,
        boundary_edges=edges,
        dirichlet_nodes=np.zeros(0, dtype=np.int64),
        h=0.0,
        interface_flag="bag",
        mode="plain",
        nested=curve is None,
        curve=curve,
    )
