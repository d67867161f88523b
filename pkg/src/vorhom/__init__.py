"""Voronoi complexes, Steinberg homology and K_4 for GL_n over Z[i] and Z[rho]."""
from .forms import HermForm
from .homology import FGAbGroupModSerre, SparseIntMatrix, smith_normal_form
from .ring import EISENSTEIN, GAUSSIAN, get_ring
from .voronoi import build_cell_complex, enumerate_perfect_forms, is_equivalent

__version__ = "0.1.0"

__all__ = [
    "EISENSTEIN", "GAUSSIAN", "FGAbGroupModSerre", "HermForm", "SparseIntMatrix",
    "build_cell_complex", "enumerate_perfect_forms", "get_ring", "is_equivalent",
    "smith_normal_form",
]
