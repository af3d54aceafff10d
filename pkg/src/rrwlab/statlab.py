"""Probabilistic verification statistics for the wave ensembles.

Empirical characteristic functions of probe combinations N = sum t_i g(v_i)
under the random evaluation point (coefficients held fixed), their Gaussian
limits, decorrelation integrals, coefficient-replica moments of the CF
error, negative moments, Kolmogorov distances, derivative moments of the
rescaled field, and log-log rate regression with trend tests.

On the torus every expectation over the evaluation point is computed by
tensor-grid quadrature over the fundamental domain (trapezoid rule is
spectrally accurate for periodic integrands), which removes X-sampling
noise from rate fits; on the sphere plain Monte Carlo is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import kendalltau

from .kernels import KernelSpec, Regime, eval_B, eval_S, unit_ball_volume
from .manifolds import (
    ManifoldKind,
    SpectralBasis,
    spectral_kernel,
    sphere_exp_batch,
    sphere_frames,
    sphere_mode_matrix,
    uniform_point,
)
from .rng import derive_seed, substream
from .wavefields import (
    WaveSample,
    _torus_coefficient_array,
    rescaled_domain_guard,
    sample_wave,
    torus_field_grid,
)

__all__ = [
    "CFProbe",
    "RateFit",
    "eta",
    "empirical_cf",
    "field_values_over_x",
    "limit_cf",
    "cf_error_weighted_sup",
    "decorrelation_stat",
    "delta_q",
    "negative_moment",
    "kolmogorov_distance",
    "derivative_moment",
    "loglog_slope",
    "kendall_trend_pvalue",
    "disk_quadrature",
]


@dataclass(frozen=True)
class CFProbe:
    """Offsets v_i (chart coordinates) and weights t_i of a linear probe."""

    offsets: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.offsets, dtype=float))
        t = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if v.shape[0] != t.shape[0] or t.shape[0] < 1:
            raise ValueError("need one weight per offset, at least one probe point")
        object.__setattr__(self, "offsets", v)
        object.__setattr__(self, "weights", t)

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def single(cls, d: int, t: float = 1.0) -> "CFProbe":
        return cls(np.zeros((1, d)), np.array([t]))


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(error) against log(lambda)."""

    lambdas: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float
    r2: float


def eta(lam: float, spec: KernelSpec) -> float:
    """Dimension/regime correction factor of the decorrelation rates:
    log(lam), 1, sqrt(lam), or 1."""
    if lam <= 1.0:
        raise ValueError("eta defined for lam > 1")
    if spec.regime is Regime.LARGE_BAND:
        return math.log(lam) if spec.dim == 1 else 1.0
    if spec.dim == 1:
        raise ValueError("monochromatic regime undefined in dimension 1")
    return math.sqrt(lam) if spec.dim == 2 else 1.0


def limit_cf(probe: CFProbe, spec: KernelSpec) -> complex:
    """CF of the Gaussian limit: exp(-1/2 sum t_i t_j K(|v_i - v_j|))."""
    v, t = probe.offsets, probe.weights
    diff = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)
    if spec.regime is Regime.LARGE_BAND:
        km = eval_B(spec.dim, diff)
    else:
        km = eval_S(spec.dim, diff)
    quad = float(t @ km @ t)
    return complex(math.exp(-0.5 * quad))


def _torus_quadrature_grid_n(sample: WaveSample, x_draws: int) -> int:
    d = sample.basis.manifold.dim
    M = int(np.max(np.abs(sample.basis.lattice)))
    n = max(int(math.ceil(x_draws ** (1.0 / d))), int(2.5 * M) + 2, 64)
    return 1 << int(math.ceil(math.log2(n)))


def _probe_field_on_grid(sample: WaveSample, probe: CFProbe, n: int) -> np.ndarray:
    """h(x) = sum_i t_i f(x + v_i/lam) on the uniform n^d grid, via one
    inverse FFT with the shift phases folded into the coefficients."""
    b = sample.basis
    d = b.manifold.dim
    lam = b.lambda_cut
    C = _torus_coefficient_array(sample)
    M = (C.shape[0] - 1) // 2
    k = np.arange(-M, M + 1, dtype=float)
    mult = np.zeros(C.shape, dtype=complex)
    for vi, ti in zip(probe.offsets, probe.weights):
        shift = np.asarray(vi, dtype=float) / lam
        fac = None
        for axis in range(d):
            f1 = np.exp(2j * math.pi * k * shift[axis])
            shp = [1] * d
            shp[axis] = 2 * M + 1
            f1 = f1.reshape(shp)
            fac = f1 if fac is None else fac * f1
        mult = mult + ti * fac
    ch = C * mult
    big = np.zeros((n,) * d, dtype=complex)
    idx = [np.arange(-M, M + 1) % n] * d
    mesh = np.meshgrid(*idx, indexing="ij")
    big[tuple(mesh)] = ch
    return np.real(np.fft.ifftn(big) * n**d)


def _sphere_probe_values(sample: WaveSample, probe: CFProbe, n_draws: int,
                         rng: np.random.Generator) -> np.ndarray:
    """N(X_j) = sum_i t_i g^{X_j}(v_i) for n_draws uniform sphere points."""
    b = sample.basis
    m = b.manifold
    lam = b.lambda_cut
    xs = uniform_point(m, rng, n_draws)
    e1, e2 = sphere_frames(m, xs)
    acc = np.zeros(n_draws)
    coeffs = sample.coeffs / math.sqrt(b.count)
    for vi, ti in zip(probe.offsets, probe.weights):
        pts = sphere_exp_batch(m, xs, e1, e2, np.asarray(vi, dtype=float) / lam)
        acc += ti * (sphere_mode_matrix(b, pts) @ coeffs)
    return acc


def _check_probe_domain(sample: WaveSample, probe: CFProbe) -> None:
    guard = rescaled_domain_guard(sample.basis.manifold.dim, sample.lam)
    if np.any(np.linalg.norm(probe.offsets, axis=1) > guard):
        raise ValueError("probe offsets outside the rescaled-domain guard")


def empirical_cf(sample: WaveSample, probe: CFProbe, x_draws: int,
                 rng: np.random.Generator | None = None) -> complex:
    """E_X exp(i N(v, t)) for one fixed coefficient draw: grid quadrature on
    the torus, Monte Carlo over uniform points on the sphere."""
    _check_probe_domain(sample, probe)
    if sample.basis.manifold.kind is ManifoldKind.TORUS:
        n = _torus_quadrature_grid_n(sample, x_draws)
        h = _probe_field_on_grid(sample, probe, n)
        return complex(np.mean(np.exp(1j * h)))
    if rng is None:
        rng = substream(sample.seed, "cf-x-draws")
    vals = _sphere_probe_values(sample, probe, x_draws, rng)
    return complex(np.mean(np.exp(1j * vals)))


def field_values_over_x(sample: WaveSample, offset: np.ndarray, x_draws: int,
                        rng: np.random.Generator | None = None) -> np.ndarray:
    """g_lambda^X(offset) over the X-quadrature nodes / Monte Carlo draws."""
    probe = CFProbe(np.atleast_2d(offset), np.array([1.0]))
    _check_probe_domain(sample, probe)
    if sample.basis.manifold.kind is ManifoldKind.TORUS:
        n = _torus_quadrature_grid_n(sample, x_draws)
        return _probe_field_on_grid(sample, probe, n).ravel()
    if rng is None:
        rng = substream(sample.seed, "field-x-draws")
    return _sphere_probe_values(sample, probe, x_draws, rng)


def cf_error_weighted_sup(sample: WaveSample, spec: KernelSpec,
                          t_grid=(0.5, 1.0, 2.0, 4.0),
                          v_grid: np.ndarray | None = None,
                          x_draws: int = 250_000,
                          eps: float = 0.1) -> float:
    """max over (v, t) of |empirical CF - Gaussian CF| / (1 + |t|^{2+eps})
    for single-point probes with offsets from v_grid."""
    d = sample.basis.manifold.dim
    if v_grid is None:
        v_grid = np.zeros((1, d))
    best = 0.0
    for v in np.atleast_2d(v_grid):
        vals = field_values_over_x(sample, v, x_draws)
        for t in t_grid:
            emp = np.mean(np.exp(1j * t * vals))
            err = abs(emp - math.exp(-0.5 * t * t)) / (1.0 + abs(t) ** (2.0 + eps))
            best = max(best, float(err))
    return best


def decorrelation_stat(basis: SpectralBasis, probe: CFProbe, xy_draws: int,
                       rng: np.random.Generator | None = None) -> float:
    """E_{X,Y} |Cov_a(N^X, N^Y)| with the covariance computed exactly from
    the spectral kernel (no coefficient sampling)."""
    lam = basis.lambda_cut
    t = probe.weights
    v = probe.offsets
    if basis.manifold.kind is ManifoldKind.TORUS:
        # Cov(N^X, N^Y) = (1/K) sum_k |s_k|^2 e^{2 pi i k (X - Y)} with
        # s_k = sum_i t_i e^{2 pi i k v_i / lam}: a trig polynomial in
        # u = X - Y, integrated in |.| over the torus by grid quadrature.
        d = basis.manifold.dim
        reps = basis.lattice
        M = int(np.max(np.abs(reps)))
        k = np.arange(-M, M + 1, dtype=float)
        s = None
        for axis in range(d):
            f1 = np.exp(2j * math.pi * np.outer(k, v[:, axis] / lam))
            shp = [1] * d + [probe.p]
            shp[axis] = 2 * M + 1
            f1 = f1.reshape(shp)
            s = f1 if s is None else s * f1
        s = s @ t  # sum_i t_i e^{2 pi i k v_i / lam} over the dense cube
        # keep only lattice points of the ball (plus the constant mode)
        mask = np.zeros(s.shape, dtype=bool)
        idx = tuple(reps[:, i] + M for i in range(d))
        mask[idx] = True
        idxn = tuple(-reps[:, i] + M for i in range(d))
        mask[idxn] = True
        mask[(M,) * d] = True
        w = np.where(mask, np.abs(s) ** 2, 0.0) / basis.count
        n_req = max(4 * M + 4, 64, int(math.ceil(xy_draws ** (1.0 / d))))
        n = 1 << int(math.ceil(math.log2(n_req)))
        big = np.zeros((n,) * d, dtype=complex)
        mesh = np.meshgrid(*([np.arange(-M, M + 1) % n] * d), indexing="ij")
        big[tuple(mesh)] = w
        vals = np.real(np.fft.ifftn(big) * n**d)
        return float(np.mean(np.abs(vals)))
    if rng is None:
        rng = substream(0, "decor", basis.lambda_cut)
    m = basis.manifold
    xs = uniform_point(m, rng, xy_draws)
    ys = uniform_point(m, rng, xy_draws)
    ex1, ex2 = sphere_frames(m, xs)
    ey1, ey2 = sphere_frames(m, ys)
    acc = np.zeros(xy_draws)
    for i in range(probe.p):
        pxi = sphere_exp_batch(m, xs, ex1, ex2, v[i] / lam)
        for j in range(probe.p):
            pyj = sphere_exp_batch(m, ys, ey1, ey2, v[j] / lam)
            acc += t[i] * t[j] * spectral_kernel(basis, pxi, pyj)
    return float(np.mean(np.abs(acc)))


def delta_q(basis: SpectralBasis, probe: CFProbe, spec: KernelSpec, q: int,
            coeff_replicas: int, seed: int) -> float:
    """Monte Carlo estimate over coefficient draws of
    E_a |E_X e^{iN} - limit CF|^{2q}, the CLT rate functional."""
    if q not in (1, 2):
        raise ValueError("q restricted to {1, 2}")
    if coeff_replicas < 50:
        raise ValueError("need at least 50 coefficient replicas")
    target = limit_cf(probe, spec)
    acc = 0.0
    for rep in range(coeff_replicas):
        w = sample_wave(basis, seed=derive_seed(seed, "delta-q", rep))
        emp = empirical_cf(w, probe, x_draws=0)
        acc += abs(emp - target) ** (2 * q)
    return acc / coeff_replicas


def negative_moment(sample: WaveSample, v: np.ndarray, nu: float,
                    x_draws: int, rng: np.random.Generator | None = None) -> float:
    """E_X |g_lambda^X(v)|^{-nu} for 0 < nu < 1/(40 d)."""
    d = sample.basis.manifold.dim
    if not (0.0 < nu < 1.0 / (40.0 * d)):
        raise ValueError(f"negative moment guaranteed only for 0 < nu < 1/(40*{d})")
    vals = np.abs(field_values_over_x(sample, np.asarray(v, dtype=float), x_draws, rng))
    vals = vals[vals > 1e-300]
    return float(np.mean(vals ** (-nu)))


def kolmogorov_distance(samples: np.ndarray, cdf=None) -> float:
    """sup_t |F_n(t) - F(t)| by the sorted-sample formula (F defaults to the
    standard normal CDF)."""
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.shape[0]
    if n < 1:
        raise ValueError("need at least one sample")
    ref = ndtr(xs) if cdf is None else np.asarray(cdf(xs), dtype=float)
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(np.abs(ref - grid)), np.max(np.abs(ref - (grid - 1.0 / n)))))


def disk_quadrature(radius: float, n_radial: int = 24, n_angular: int = 32):
    """Gauss-Legendre x uniform-angle product rule on the disk: (points, weights)."""
    x, w = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * radius * (x + 1.0)
    wr = 0.5 * radius * w * r
    ang = 2.0 * math.pi * np.arange(n_angular) / n_angular
    wa = 2.0 * math.pi / n_angular
    pts = np.stack([np.outer(r, np.cos(ang)).ravel(),
                    np.outer(r, np.sin(ang)).ravel()], axis=1)
    wts = np.repeat(wr, n_angular) * wa
    return pts, wts


def derivative_moment(sample: WaveSample, alpha: tuple[int, ...], p: int,
                      n_radial: int = 16, n_angular: int = 24,
                      x_draws: int = 65536) -> float:
    """Quadrature estimate of E_X int_B |d_alpha g_lambda^X(v)|^{2p} dv over
    the unit-volume ball B; derivatives are those of the rescaled field, so
    each order carries a factor 1/lambda."""
    b = sample.basis
    if b.manifold.kind is not ManifoldKind.TORUS:
        raise NotImplementedError("derivative moments implemented on the torus")
    d = b.manifold.dim
    if d != 2:
        raise NotImplementedError("ball quadrature implemented for d = 2")
    if sum(alpha) > 2:
        raise ValueError("multi-index order limited to |alpha| <= 2")
    lam = b.lambda_cut
    delta = unit_ball_volume(d) ** (-1.0 / d)
    pts, wts = disk_quadrature(delta, n_radial, n_angular)
    n = _torus_quadrature_grid_n(sample, x_draws)
    scale = lam ** (-sum(alpha))
    acc = 0.0
    for v, wq in zip(pts, wts):
        vals = torus_field_grid(sample, n, shift=v / lam, deriv=tuple(alpha))
        acc += wq * float(np.mean((scale * vals) ** (2 * p)))
    return acc


def loglog_slope(points) -> RateFit:
    """Least-squares fit of log(error) against log(lambda), with r^2."""
    pts = [(float(l), float(e)) for l, e in points]
    if len(pts) < 4:
        raise ValueError("need at least 4 points for a rate fit")
    lams = np.array([p[0] for p in pts])
    errs = np.array([p[1] for p in pts])
    if np.any(errs <= 0.0) or np.any(lams <= 0.0):
        raise ValueError("rate fits need positive lambdas and errors")
    x, y = np.log(lams), np.log(errs)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(lambdas=lams, errors=errs, slope=float(slope),
                   intercept=float(intercept), r2=r2)


def kendall_trend_pvalue(xs, ys) -> float:
    """One-sided Kendall test p-value for an increasing trend of ys in xs."""
    res = kendalltau(xs, ys, alternative="greater")
    return float(res.pvalue)
