"""Numerical laboratory for Gaussian random waves on explicit manifolds.

Subpackages cover the universal limit kernels, spectral data of flat tori
and the round 2-sphere, wave-ensemble sampling, nodal-set measurement, and
the statistics used to verify the limit theorems empirically.
"""

from .kernels import KernelSpec, Regime

__all__ = ["KernelSpec", "Regime"]
__version__ = "0.1.0"
