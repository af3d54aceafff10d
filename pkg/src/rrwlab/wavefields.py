"""Gaussian wave ensembles, rescaled chart views, and the Euclidean limit fields.

A wave sample is one draw of iid standard Gaussian coefficients over a
spectral basis, f = K^{-1/2} sum a_n phi_n.  Rescaled views compose the
field with a chart at scale 1/lambda.  Limit fields are simulated by the
random-phase spectral sampler: g(v) = sqrt(2/m) sum_j cos(<xi_j, v> + theta_j)
with frequencies xi_j drawn from the kernel's spectral measure (uniform
ball for the large-band kernel, uniform sphere for the monochromatic one),
which has exact unit variance for every m and the right covariance as
m -> infinity.

Evaluation fast paths for the torus: full uniform grids go through the FFT
(optionally with a sub-grid shift and analytic derivative factors applied
in Fourier space); small rectangular patch grids contract the dense
coefficient array against per-axis phase matrices, which costs two small
matrix products per patch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSpec, Regime, unit_ball_volume
from .manifolds import (
    ChartMap,
    ManifoldKind,
    SpectralBasis,
    exp_map,
    sphere_mode_gradient_matrices,
    sphere_mode_matrix,
    _sphere_frame_components,
)
from .rng import normal_box_muller, substream

__all__ = [
    "WaveSample",
    "RescaledFieldView",
    "LimitFieldSample",
    "sample_wave",
    "eval_field",
    "eval_field_gradient",
    "eval_rescaled",
    "rescaled_domain_guard",
    "sample_limit_field",
    "eval_limit",
    "eval_limit_gradient",
    "limit_field_values_mc",
    "limit_gradient_samples_mc",
    "torus_field_grid",
    "torus_field_patch",
]


@dataclass(frozen=True)
class WaveSample:
    """One draw of Gaussian coefficients over a spectral basis."""

    basis: SpectralBasis
    coeffs: np.ndarray
    seed: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def regime(self) -> Regime:
        return self.basis.regime

    @property
    def lam(self) -> float:
        return self.basis.lambda_cut


def sample_wave(basis: SpectralBasis, seed: int) -> WaveSample:
    """Draw iid standard Gaussian coefficients, reproducible from the seed."""
    rng = substream(seed, "wave-coeffs")
    coeffs = normal_box_muller(rng, basis.count)
    return WaveSample(basis=basis, coeffs=coeffs, seed=int(seed))


# ---------------------------------------------------------------------------
# pointwise evaluation

def eval_field(sample: WaveSample, x: np.ndarray):
    """Field value K^{-1/2} sum a_n phi_n(x) at point(s) x."""
    b = sample.basis
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    if b.manifold.kind is ManifoldKind.TORUS:
        a = sample.coeffs
        phases = 2.0 * math.pi * xs @ b.lattice.T
        vals = a[0] + math.sqrt(2.0) * (np.cos(phases) @ a[1::2] + np.sin(phases) @ a[2::2])
    else:
        vals = sphere_mode_matrix(b, xs) @ sample.coeffs
    vals = vals / math.sqrt(b.count)
    return vals if np.asarray(x).ndim > 1 else float(vals[0])


def eval_field_gradient(sample: WaveSample, x: np.ndarray, chart: ChartMap) -> np.ndarray:
    """Manifold gradient of the field at x, in the chart's tangent frame."""
    b = sample.basis
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    a = sample.coeffs
    if b.manifold.kind is ManifoldKind.TORUS:
        k = b.lattice.astype(float)
        phases = 2.0 * math.pi * xs @ k.T
        two_pi_s2 = 2.0 * math.pi * math.sqrt(2.0)
        weights = two_pi_s2 * (-np.sin(phases) * a[1::2] + np.cos(phases) * a[2::2])
        grad = (weights @ k) @ chart.frame
    else:
        dth, dph = sphere_mode_gradient_matrices(b, xs)
        e_theta, e_phi = _sphere_frame_components(xs)
        gt = dth @ a
        gp = dph @ a
        ambient = gt[:, None] * e_theta + gp[:, None] * e_phi
        grad = ambient @ chart.frame
    grad = grad / math.sqrt(b.count)
    return grad if np.asarray(x).ndim > 1 else grad[0]


# ---------------------------------------------------------------------------
# torus fast paths

def _torus_coefficient_array(sample: WaveSample) -> np.ndarray:
    """Dense complex Fourier coefficients c_k on [-M..M]^d with
    f(x) = Re sum_k c_k e^{2 pi i k.x} summed over the full cube (zeros
    outside the frequency ball); c_{-k} = conj(c_k)."""
    if "cgrid" in sample._cache:
        return sample._cache["cgrid"]
    b = sample.basis
    reps = b.lattice
    d = b.manifold.dim
    M = int(np.max(np.abs(reps)))
    shape = (2 * M + 1,) * d
    C = np.zeros(shape, dtype=complex)
    a = sample.coeffs / math.sqrt(b.count)
    ac, as_ = a[1::2], a[2::2]
    cvals = (ac - 1j * as_) / math.sqrt(2.0)
    idx_pos = tuple((reps[:, i] + M) for i in range(d))
    idx_neg = tuple((-reps[:, i] + M) for i in range(d))
    C[idx_pos] = cvals
    C[idx_neg] = np.conj(cvals)
    center = (M,) * d
    C[center] = a[0]
    sample._cache["cgrid"] = C
    return C


def _apply_deriv_factors(C: np.ndarray, deriv: tuple[int, ...]) -> np.ndarray:
    if not any(deriv):
        return C
    M = (C.shape[0] - 1) // 2
    k = np.arange(-M, M + 1, dtype=float)
    out = C.copy()
    for axis, order in enumerate(deriv):
        if order:
            fac = (2j * math.pi * k) ** order
            shape = [1] * C.ndim
            shape[axis] = C.shape[axis]
            out = out * fac.reshape(shape)
    return out


def torus_field_grid(sample: WaveSample, n: int, shift=None, deriv: tuple[int, ...] | None = None) -> np.ndarray:
    """Field (or a coordinate derivative) on the uniform n^d grid j/n,
    optionally at shifted points j/n + shift.  Exact spectral evaluation via
    the inverse FFT; requires n > 2*max|k| to avoid aliasing."""
    b = sample.basis
    d = b.manifold.dim
    C = _torus_coefficient_array(sample)
    M = (C.shape[0] - 1) // 2
    if n <= 2 * M:
        raise ValueError(f"grid n={n} must exceed twice the max lattice coordinate {M}")
    if deriv is not None:
        C = _apply_deriv_factors(C, deriv)
    if shift is not None:
        shift = np.asarray(shift, dtype=float)
        k = np.arange(-M, M + 1, dtype=float)
        for axis in range(d):
            fac = np.exp(2j * math.pi * k * shift[axis])
            shp = [1] * d
            shp[axis] = 2 * M + 1
            C = C * fac.reshape(shp)
    big = np.zeros((n,) * d, dtype=complex)
    idx = [np.arange(-M, M + 1) % n] * d
    mesh = np.meshgrid(*idx, indexing="ij")
    big[tuple(mesh)] = C
    vals = np.fft.ifftn(big) * n**d
    return np.real(vals)


def torus_field_patch(sample: WaveSample, axes: list[np.ndarray], deriv: tuple[int, ...] | None = None) -> np.ndarray:
    """Field on the rectangular product grid axes[0] x ... x axes[d-1]
    (arbitrary real coordinates), by per-axis phase-matrix contraction."""
    b = sample.basis
    d = b.manifold.dim
    C = _torus_coefficient_array(sample)
    if deriv is not None:
        C = _apply_deriv_factors(C, deriv)
    M = (C.shape[0] - 1) // 2
    k = np.arange(-M, M + 1, dtype=float)
    mats = [np.exp(2j * math.pi * np.outer(np.asarray(ax, dtype=float), k)) for ax in axes]
    if d == 1:
        vals = mats[0] @ C
    elif d == 2:
        vals = mats[0] @ C @ mats[1].T
    else:
        vals = np.einsum("ai,bj,ck,ijk->abc", mats[0], mats[1], mats[2], C, optimize=True)
    return np.real(vals)


# ---------------------------------------------------------------------------
# rescaled view

def rescaled_domain_guard(d: int, lam: float) -> float:
    """Radius up to which the rescaled field may be evaluated:
    min(10 * delta * sqrt(d), 0.4 * lambda) with delta = sigma_d^{-1/d}."""
    delta = unit_ball_volume(d) ** (-1.0 / d)
    return min(10.0 * delta * math.sqrt(d), 0.4 * lam)


@dataclass(frozen=True)
class RescaledFieldView:
    """The field seen in a chart at scale 1/lambda: v -> f(Phi_x(v/lambda))."""

    sample: WaveSample
    chart: ChartMap

    @property
    def lam(self) -> float:
        return self.sample.lam

    @property
    def guard(self) -> float:
        return rescaled_domain_guard(self.chart.manifold.dim, self.lam)


def eval_rescaled(view: RescaledFieldView, v: np.ndarray):
    """Rescaled field g(v) = f(Phi_x(v / lambda)); v within the domain guard."""
    v = np.asarray(v, dtype=float)
    vv = np.atleast_2d(v)
    norms = np.linalg.norm(vv, axis=1)
    if np.any(norms > view.guard * (1.0 + 1e-12)):
        raise ValueError("offset outside the rescaled-chart domain guard")
    pts = exp_map(view.chart, vv / view.lam)
    vals = eval_field(view.sample, pts)
    vals = np.atleast_1d(vals)
    return vals if v.ndim > 1 else float(vals[0])


# ---------------------------------------------------------------------------
# limit fields

@dataclass(frozen=True)
class LimitFieldSample:
    """Random-phase realization of the limit field with kernel B_d or S_d."""

    spec: KernelSpec
    frequencies: np.ndarray  # (m, d)
    phases: np.ndarray       # (m,)
    seed: int

    @property
    def amplitude(self) -> float:
        return math.sqrt(2.0 / self.frequencies.shape[0])


def _draw_frequencies(spec: KernelSpec, m: int, rng: np.random.Generator) -> np.ndarray:
    d = spec.dim
    gauss = normal_box_muller(rng, m * d).reshape(m, d)
    norms = np.linalg.norm(gauss, axis=1)
    norms[norms < 1e-300] = 1.0
    dirs = gauss / norms[:, None]
    if spec.regime is Regime.LARGE_BAND:
        radii = rng.random(m) ** (1.0 / d)
        return dirs * radii[:, None]
    return dirs


def sample_limit_field(d: int, regime: Regime, m: int = 256,
                       seed: int = 0) -> LimitFieldSample:
    """Draw m frequencies from the spectral measure plus m uniform phases."""
    if m < 1:
        raise ValueError("need at least one spectral atom")
    spec = KernelSpec(d, regime)
    rng = substream(seed, "limit-field")
    xi = _draw_frequencies(spec, m, rng)
    theta = 2.0 * math.pi * rng.random(m)
    return LimitFieldSample(spec=spec, frequencies=xi, phases=theta, seed=int(seed))


def eval_limit(s: LimitFieldSample, v: np.ndarray):
    """g(v) = sqrt(2/m) sum_j cos(<xi_j, v> + theta_j)."""
    v = np.asarray(v, dtype=float)
    vv = np.atleast_2d(v)
    vals = s.amplitude * np.sum(np.cos(vv @ s.frequencies.T + s.phases), axis=1)
    return vals if v.ndim > 1 else float(vals[0])


def eval_limit_gradient(s: LimitFieldSample, v: np.ndarray):
    """Gradient of the random-phase field at v."""
    v = np.asarray(v, dtype=float)
    vv = np.atleast_2d(v)
    sines = np.sin(vv @ s.frequencies.T + s.phases)
    grad = -s.amplitude * sines @ s.frequencies
    return grad if v.ndim > 1 else grad[0]


def limit_field_values_mc(d: int, regime: Regime, m: int, n_samples: int,
                          offsets: np.ndarray, seed: int, chunk: int = 4096) -> np.ndarray:
    """Values at the given offsets for n_samples independent limit-field
    draws (fresh frequencies and phases each), shape (n_samples, n_offsets)."""
    spec = KernelSpec(d, regime)
    offsets = np.atleast_2d(np.asarray(offsets, dtype=float))
    rng = substream(seed, "limit-field-mc")
    out = np.empty((n_samples, offsets.shape[0]))
    amp = math.sqrt(2.0 / m)
    done = 0
    while done < n_samples:
        b = min(chunk, n_samples - done)
        xi = _draw_frequencies(spec, b * m, rng).reshape(b, m, d)
        theta = 2.0 * math.pi * rng.random((b, m))
        args = np.einsum("bmd,od->bmo", xi, offsets) + theta[:, :, None]
        out[done:done + b] = amp * np.sum(np.cos(args), axis=1)
        done += b
    return out


def limit_gradient_samples_mc(d: int, regime: Regime, m: int, n_samples: int,
                              seed: int, chunk: int = 4096):
    """(values, gradients) of g at 0 for n_samples independent draws."""
    spec = KernelSpec(d, regime)
    rng = substream(seed, "limit-grad-mc")
    vals = np.empty(n_samples)
    grads = np.empty((n_samples, d))
    amp = math.sqrt(2.0 / m)
    done = 0
    while done < n_samples:
        b = min(chunk, n_samples - done)
        xi = _draw_frequencies(spec, b * m, rng).reshape(b, m, d)
        theta = 2.0 * math.pi * rng.random((b, m))
        vals[done:done + b] = amp * np.sum(np.cos(theta), axis=1)
        grads[done:done + b] = -amp * np.einsum("bm,bmd->bd", np.sin(theta), xi)
        done += b
    return vals, grads
