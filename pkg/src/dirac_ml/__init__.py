"""Spectral solvers for Euclidean Dirac operators with large mass couplings.

Subpackages cover exact gamma-matrix algebra, self-contained Bessel
functions, 1D Robin model operators, planar curve geometry, boundary
operator discretizations, exact radial spectra on the disk and ball, a P1
finite-element path on general convex domains, a Hermitian pencil
eigensolver, and the study harness behind the ``dirac-ml`` command.
"""

from dirac_ml._backend import BACKEND, USE_NUMBA, thread_count

__version__ = "0.1.0"

__all__ = ["BACKEND", "USE_NUMBA", "thread_count", "__version__"]
