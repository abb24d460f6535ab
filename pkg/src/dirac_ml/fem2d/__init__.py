"""Finite-element path: meshes, forms, and convenience spectra."""

from dirac_ml.fem2d.forms import (
    QuadraticPencil,
    assemble_bag_form,
    assemble_jump_form,
    auto_layer,
    bag_full_matrices,
    bag_spectrum_on_disk,
    jump_spectrum_on_disk,
    pencil_lowest,
)
from dirac_ml.fem2d.mesh import (
    LayerSpec,
    Mesh2D,
    MeshError,
    build_mesh,
    export_mesh,
    import_mesh,
    refine_mesh,
)

__all__ = [
    "QuadraticPencil",
    "LayerSpec",
    "Mesh2D",
    "MeshError",
    "build_mesh",
    "refine_mesh",
    "export_mesh",
    "import_mesh",
    "assemble_bag_form",
    "assemble_jump_form",
    "bag_full_matrices",
    "bag_spectrum_on_disk",
    "jump_spectrum_on_disk",
    "pencil_lowest",
    "auto_layer",
]
