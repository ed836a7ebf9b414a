"""
Numerical toolkit for the elastic Neumann-Poincare operator on closed surfaces.

Modules
-------
lame
    Kelvin matrix, the conormal kernel split ``k0*K1 - K2`` and the
    direct Kelvin traction ``kelvin_traction`` (operator tag ``"Ktr"``).
geometry
    Surfaces, spherical charts, metrics and cutoff functions.
nystrom
    Dense discretizations of ``K``, ``T = K1``, ``K2`` and the single layer.
riesz
    Flat Riesz transforms and the half-space operator as FFT multipliers.
symbols
    Surface Riesz transforms, principal symbols and their quantization.
spectral
    Eigenvalue clustering, compactness probes and symmetrization defects.
cli
    Command-line driver (``python -m elastic_np``).
"""

from .errors import ConfigError, NumericError
from .lame import (LameParameters, SingularPointError, conormal_kernel, k1_kernel, k2_kernel, kelvin_matrix,
                   kelvin_traction)
from .geometry import Ellipsoid, Sphere, StarSphere, make_surface
from .nystrom import assemble, assemble_K, assemble_S, assemble_T, build_grid
from .spectral import cluster, polynomial_compactness_probe, spectrum, symmetrization_defect

__all__ = [
    "ConfigError", "NumericError", "LameParameters", "SingularPointError", "conormal_kernel", "k1_kernel",
    "k2_kernel", "kelvin_matrix", "kelvin_traction", "Ellipsoid", "Sphere", "StarSphere", "make_surface", "assemble",
    "assemble_K", "assemble_S", "assemble_T", "build_grid", "cluster", "polynomial_compactness_probe",
    "spectrum", "symmetrization_defect",
]

__version__ = "0.1.0"
