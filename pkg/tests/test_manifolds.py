"""Spectral geometry: enumeration, normalization, charts, kernels, sampling."""

import math

import numpy as np
import pytest

from rrwlab.kernels import KernelSpec, Regime, eval_B, kernel_second_derivative_at_zero
from rrwlab.manifolds import (
    ManifoldSpec,
    chart_at,
    enumerate_spectrum,
    eval_mode,
    eval_mode_gradient,
    exp_map,
    geodesic_distance,
    spectral_kernel,
    sphere_degree_frequency,
    sphere_frames,
    sphere_mode_matrix,
    uniform_point,
    weyl_count_prediction,
)
from rrwlab.rng import substream

T1 = ManifoldSpec.torus(1)
T2 = ManifoldSpec.torus(2)
S2 = ManifoldSpec.sphere2()


# ---------------------------------------------------------------------------
# enumeration

def test_torus2_small_count():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 1.01)
    assert basis.count == 5  # constant + the four |k| = 1 modes


def test_torus1_trig_polynomial_count():
    for n in (1, 3, 10, 40):
        assert enumerate_spectrum(T1, 2.0 * math.pi * n).count == 2 * n + 1


def test_torus2_weyl_ratio_converges():
    lam = 2.0 * math.pi * 40
    basis = enumerate_spectrum(T2, lam)
    ratio = basis.count / weyl_count_prediction(T2, lam)
    assert abs(ratio - 1.0) < 0.03


def test_weyl_ratio_error_decays_like_one_over_lambda():
    mults = [10, 20, 40, 80]
    devs = []
    for m in mults:
        lam = 2.0 * math.pi * m
        ratio = enumerate_spectrum(T2, lam).count / weyl_count_prediction(T2, lam)
        devs.append(abs(ratio - 1.0))
    # |ratio - 1| <= C / lambda with a single fitted constant
    C = max(d * 2.0 * math.pi * m for d, m in zip(devs, mults))
    for d, m in zip(devs, mults):
        assert d <= C / (2.0 * math.pi * m) + 1e-12


def test_eigenvalue_asymptotics():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 30)
    freqs = np.sort(basis.frequencies)
    for n in range(100, basis.count, 97):
        pred = 2.0 * math.pi * math.sqrt(n / math.pi)
        assert abs(freqs[n] / pred - 1.0) <= 0.1


def test_torus3_counts_and_stationarity():
    t3 = ManifoldSpec.torus(3)
    lam = 2.0 * math.pi * 6
    basis = enumerate_spectrum(t3, lam)
    ratio = basis.count / weyl_count_prediction(t3, lam)
    assert abs(ratio - 1.0) < 0.12
    xs = uniform_point(t3, substream(8, "t3"), 3)
    total = np.zeros(3)
    for n in range(basis.count):
        total += np.asarray(eval_mode(basis, n, xs)) ** 2
    assert np.allclose(total, basis.count, atol=1e-9)


def test_empty_spectrum_reported():
    with pytest.raises(ValueError, match="empty spectrum"):
        enumerate_spectrum(T2, 1.0)


def test_monochromatic_torus_rejected():
    with pytest.raises(ValueError):
        enumerate_spectrum(T2, 100.0, Regime.MONOCHROMATIC)


def test_sphere_mono_selects_nearest_degree():
    lam = sphere_degree_frequency(12)
    basis = enumerate_spectrum(S2, lam * 1.001, Regime.MONOCHROMATIC)
    assert list(basis.degrees) == [12]
    assert basis.count == 25
    assert basis.effective_lambda == pytest.approx(lam)


# ---------------------------------------------------------------------------
# modes

def test_torus_constant_mode():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 3)
    xs = uniform_point(T2, substream(0, "x"), 7)
    assert np.allclose(eval_mode(basis, 0, xs), 1.0)


def test_torus_cos_mode_at_origin():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 3)
    at0 = [eval_mode(basis, n, np.zeros(2)) for n in range(1, basis.count, 2)]
    assert np.allclose(at0, math.sqrt(2.0))


def test_mode_index_out_of_range():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 2)
    with pytest.raises(IndexError):
        eval_mode(basis, basis.count, np.zeros(2))


def test_torus_stationarity_sum_of_squares():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 6)
    xs = uniform_point(T2, substream(3, "x"), 5)
    total = np.zeros(5)
    for n in range(basis.count):
        total += np.asarray(eval_mode(basis, n, xs)) ** 2
    assert np.allclose(total, basis.count, atol=1e-10)


def test_sphere_addition_theorem():
    basis = enumerate_spectrum(S2, sphere_degree_frequency(14) + 1e-9,
                               Regime.MONOCHROMATIC)
    xs = uniform_point(S2, substream(5, "x"), 8)
    mm = sphere_mode_matrix(basis, xs)
    assert np.allclose(np.sum(mm**2, axis=1), 2 * 14 + 1, atol=1e-9)


def test_sphere_mode_l2_norm_by_quadrature():
    # Gauss-Legendre in z times uniform longitude, ~1 degree resolution
    basis = enumerate_spectrum(S2, sphere_degree_frequency(9) + 1e-9,
                               Regime.MONOCHROMATIC)
    zs, wz = np.polynomial.legendre.leggauss(180)
    phis = 2.0 * math.pi * np.arange(360) / 360
    R = S2.radius
    Z, P = np.meshgrid(zs, phis, indexing="ij")
    rho = np.sqrt(1.0 - Z**2)
    pts = R * np.stack([rho * np.cos(P), rho * np.sin(P), Z], axis=-1).reshape(-1, 3)
    w = np.repeat(wz / 2.0, 360) / 360.0  # probability weights
    rng = substream(7, "mode")
    for n in rng.choice(basis.count, size=5, replace=False):
        vals = sphere_mode_matrix(basis, pts)[:, int(n)]
        norm2 = float(np.sum(w * vals**2))
        assert 0.99 <= norm2 <= 1.01


def test_torus_gradients():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 3)
    ch = chart_at(T2, np.zeros(2))
    assert np.allclose(eval_mode_gradient(basis, 0, np.zeros(2), ch), 0.0)
    # sin mode at the origin has gradient 2 pi sqrt(2) k
    for j, k in enumerate(basis.lattice):
        g = eval_mode_gradient(basis, 2 * j + 2, np.zeros(2), ch)
        assert np.allclose(g, 2.0 * math.pi * math.sqrt(2.0) * k, atol=1e-12)


def test_sphere_gradient_matches_finite_differences():
    basis = enumerate_spectrum(S2, sphere_degree_frequency(11) + 1e-9,
                               Regime.MONOCHROMATIC)
    rng = substream(11, "fd")
    checked = 0
    while checked < 100:
        x = uniform_point(S2, rng)
        if abs(x[2] / S2.radius) > 0.998:
            continue
        ch = chart_at(S2, x)
        n = int(rng.integers(0, basis.count))
        g = eval_mode_gradient(basis, n, x, ch)
        h = 1e-6
        for i in range(2):
            v = np.zeros(2)
            v[i] = h
            fd = (eval_mode(basis, n, exp_map(ch, v))
                  - eval_mode(basis, n, exp_map(ch, -v))) / (2.0 * h)
            assert abs(fd - g[i]) < 1e-6 * max(1.0, abs(g[i])) + 1e-5
        checked += 1


def test_gradient_variance_matches_kernel_second_derivative():
    # sum over modes of (d_i phi)^2 / (lambda^2 K) vs -K''(0), 5% at 2 pi 60
    lam = 2.0 * math.pi * 60
    basis = enumerate_spectrum(T2, lam)
    k = basis.lattice.astype(float)
    total = np.sum(2.0 * (2.0 * math.pi * k[:, 0]) ** 2)
    emp = total / (lam**2 * basis.count)
    target = kernel_second_derivative_at_zero(KernelSpec(2))
    assert abs(emp - target) <= 0.05 * target


# ---------------------------------------------------------------------------
# distance / charts

def test_distances():
    assert geodesic_distance(T2, np.array([0.3, 0.7]), np.array([0.3, 0.7])) == 0.0
    assert geodesic_distance(T1, np.array([0.1]), np.array([0.9])) == pytest.approx(0.2)
    north = np.array([0.0, 0.0, S2.radius])
    assert geodesic_distance(S2, north, -north) == pytest.approx(
        math.sqrt(math.pi) / 2.0, rel=1e-12)


def test_exp_map_torus():
    ch = chart_at(T2, np.array([0.9, 0.9]))
    assert np.allclose(exp_map(ch, np.zeros(2)), [0.9, 0.9])
    assert np.allclose(exp_map(ch, np.array([0.2, 0.0])), [0.1, 0.9], atol=1e-12)


def test_exp_map_sphere_geodesic_property():
    rng = substream(2, "exp")
    for _ in range(100):
        x = uniform_point(S2, rng)
        ch = chart_at(S2, x)
        v = rng.normal(size=2)
        v *= rng.random() * min(1.0, ch.guard) / np.linalg.norm(v)
        y = exp_map(ch, v)
        assert geodesic_distance(S2, x, y) == pytest.approx(
            np.linalg.norm(v), abs=1e-10)


def test_exp_map_guard():
    ch = chart_at(T2, np.zeros(2))
    with pytest.raises(ValueError):
        exp_map(ch, np.array([0.7, 0.0]))


def test_sphere_frames_batch_match_charts():
    rng = substream(9, "frames")
    xs = uniform_point(S2, rng, 50)
    e1, e2 = sphere_frames(S2, xs)
    for i in range(50):
        ch = chart_at(S2, xs[i])
        assert np.allclose(e1[i], ch.frame[:, 0], atol=1e-12)
        assert np.allclose(e2[i], ch.frame[:, 1], atol=1e-12)


# ---------------------------------------------------------------------------
# spectral kernel

def test_spectral_kernel_on_diagonal_torus():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 10)
    xs = uniform_point(T2, substream(4, "k"), 6)
    assert np.allclose(spectral_kernel(basis, xs, xs), 1.0, atol=1e-12)


def test_spectral_kernel_sphere_mono_is_legendre():
    l = 9
    basis = enumerate_spectrum(S2, sphere_degree_frequency(l) + 1e-9,
                               Regime.MONOCHROMATIC)
    rng = substream(6, "kk")
    R = S2.radius
    for _ in range(50):
        x, y = uniform_point(S2, rng), uniform_point(S2, rng)
        val = spectral_kernel(basis, x, y)
        c = float(np.dot(x, y) / R**2)
        ref = np.polynomial.legendre.legval(c, [0.0] * l + [1.0])
        assert val == pytest.approx(ref, abs=1e-10)


def test_spectral_kernel_approaches_ball_kernel():
    lam = 2.0 * math.pi * 30
    basis = enumerate_spectrum(T2, lam)
    x = np.array([0.37, 0.81])
    u = np.array([10.0, 0.0])
    val = spectral_kernel(basis, x, np.mod(x + u / lam, 1.0))
    assert abs(val - eval_B(2, 10.0)) <= 0.05


def test_local_weyl_sup_error_decreases():
    from rrwlab.experiments import _local_weyl_sup_error
    e20 = _local_weyl_sup_error(T2, 2.0 * math.pi * 20)
    e80 = _local_weyl_sup_error(T2, 2.0 * math.pi * 80)
    assert e80 <= 0.5 * e20


# ---------------------------------------------------------------------------
# sampling

def test_uniform_torus_chi_square():
    rng = substream(0, "chi2")
    pts = uniform_point(T2, rng, 100_000)
    counts, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=10,
                                  range=[[0, 1], [0, 1]])
    expected = pts.shape[0] / 100.0
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    # dof = 99; p > 0.001 iff chi2 below the upper quantile ~ 148.2
    assert chi2 < 148.2


def test_uniform_sphere_z_symmetry():
    rng = substream(0, "zsym")
    pts = uniform_point(S2, rng, 100_000)
    z = pts[:, 2] / S2.radius
    # z is uniform on [-1, 1]: sd of the mean is 1/sqrt(3 n)
    assert abs(np.mean(z)) < 4.0 / math.sqrt(3.0 * pts.shape[0])


def test_sampling_replay():
    a = uniform_point(S2, substream(42, "replay"), 100)
    b = uniform_point(S2, substream(42, "replay"), 100)
    assert np.array_equal(a, b)
