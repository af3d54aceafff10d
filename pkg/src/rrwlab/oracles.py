"""Independent numerical oracles used for verification.

These deliberately avoid the closed forms used by the production
evaluators: kernels are integrated from their defining ball/sphere
integrals by adaptive quadrature, and moment identities come from their
own special-function route.  Production code must never call these for
anything but cross-checks.
"""

from __future__ import annotations

import math

from scipy.integrate import quad

__all__ = [
    "ball_kernel_quadrature",
    "sphere_kernel_quadrature",
    "gaussian_abs_moment",
]


def _cross_section_normalizer(power: float) -> float:
    val, _ = quad(lambda s: (1.0 - s * s) ** power, -1.0, 1.0)
    return val


def ball_kernel_quadrature(d: int, r: float) -> float:
    """B_d(r) from the defining integral over the unit ball, reduced to the
    1-d cross-section integral c_d * int_-1^1 cos(r s) (1-s^2)^((d-1)/2) ds."""
    if d < 1:
        raise ValueError("d >= 1")
    power = (d - 1) / 2.0
    norm = _cross_section_normalizer(power)
    if r == 0.0:
        return 1.0
    val, _ = quad(lambda s: (1.0 - s * s) ** power, -1.0, 1.0,
                  weight="cos", wvar=r, limit=400, epsabs=1e-13, epsrel=1e-13)
    return val / norm


def sphere_kernel_quadrature(d: int, r: float) -> float:
    """S_d(r) from the surface average of plane waves over the unit sphere:
    c_d * int_0^pi cos(r cos t) sin(t)^{d-2} dt."""
    if d < 2:
        raise ValueError("d >= 2")
    norm, _ = quad(lambda t: math.sin(t) ** (d - 2), 0.0, math.pi)
    val, _ = quad(lambda t: math.cos(r * math.cos(t)) * math.sin(t) ** (d - 2),
                  0.0, math.pi, limit=400, epsabs=1e-13, epsrel=1e-13)
    return val / norm


def gaussian_abs_moment(nu: float) -> float:
    """E |N|^{-nu} for a standard normal: 2^{-nu/2} Gamma((1-nu)/2) / Gamma(1/2)."""
    if nu >= 1.0:
        raise ValueError("moment finite only for nu < 1")
    return 2.0 ** (-nu / 2.0) * math.gamma((1.0 - nu) / 2.0) / math.gamma(0.5)
