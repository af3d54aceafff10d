"""Wave samples, rescaled views, limit-field sampler."""

import math

import numpy as np
import pytest

from rrwlab.kernels import KernelSpec, Regime, eval_B, eval_S, expected_gradient_norm
from rrwlab.manifolds import (
    ManifoldSpec,
    chart_at,
    enumerate_spectrum,
    eval_mode,
    spectral_kernel,
    sphere_degree_frequency,
    uniform_point,
)
from rrwlab.rng import substream
from rrwlab.wavefields import (
    RescaledFieldView,
    WaveSample,
    eval_field,
    eval_field_gradient,
    eval_limit,
    eval_limit_gradient,
    eval_rescaled,
    limit_field_values_mc,
    limit_gradient_samples_mc,
    rescaled_domain_guard,
    sample_limit_field,
    sample_wave,
    torus_field_grid,
    torus_field_patch,
)

T2 = ManifoldSpec.torus(2)
S2 = ManifoldSpec.sphere2()


def test_same_seed_same_draw():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 5)
    a = sample_wave(basis, 7)
    b = sample_wave(basis, 7)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert not np.array_equal(a.coeffs, sample_wave(basis, 8).coeffs)


def test_field_variance_and_mean_over_draws():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 4)
    x = np.array([0.21, 0.58])
    vals = np.array([eval_field(sample_wave(basis, s), x) for s in range(2000)])
    # flat-basis stationarity makes Var f(x) exactly 1
    assert 0.9 <= np.var(vals) <= 1.1
    assert abs(np.mean(vals)) <= 4.0 / math.sqrt(2000.0)


def test_zero_coefficients_give_zero_field():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 3)
    w = WaveSample(basis=basis, coeffs=np.zeros(basis.count), seed=0)
    assert eval_field(w, np.array([0.3, 0.4])) == 0.0


def test_single_coefficient_reproduces_mode():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 3)
    coeffs = np.zeros(basis.count)
    coeffs[3] = 1.0
    w = WaveSample(basis=basis, coeffs=coeffs, seed=0)
    xs = uniform_point(T2, substream(1, "x"), 20)
    expect = np.array([eval_mode(basis, 3, x) for x in xs]) / math.sqrt(basis.count)
    assert np.allclose(eval_field(w, xs), expect, atol=1e-13)


def test_field_linearity_in_coefficients():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 3)
    rng = substream(2, "lin")
    c1 = rng.normal(size=basis.count)
    c2 = rng.normal(size=basis.count)
    x = uniform_point(T2, rng, 10)
    f1 = eval_field(WaveSample(basis=basis, coeffs=c1, seed=0), x)
    f2 = eval_field(WaveSample(basis=basis, coeffs=c2, seed=0), x)
    f12 = eval_field(WaveSample(basis=basis, coeffs=2.0 * c1 - 3.0 * c2, seed=0), x)
    assert np.allclose(f12, 2.0 * f1 - 3.0 * f2, atol=1e-12)


def test_field_gradient_finite_differences():
    for m, seed in ((T2, 3), (S2, 4)):
        lam = 2.0 * math.pi * 5 if m is T2 else sphere_degree_frequency(8)
        regime = Regime.LARGE_BAND if m is T2 else Regime.MONOCHROMATIC
        basis = enumerate_spectrum(m, lam + 1e-9, regime)
        w = sample_wave(basis, seed)
        rng = substream(seed, "fdg")
        checked = 0
        while checked < 50:
            x = uniform_point(m, rng)
            if m is S2 and abs(x[2] / S2.radius) > 0.998:
                continue
            ch = chart_at(m, x)
            g = eval_field_gradient(w, x, ch)
            from rrwlab.manifolds import exp_map
            h = 1e-6
            for i in range(2):
                v = np.zeros(2)
                v[i] = h
                fd = (eval_field(w, exp_map(ch, v))
                      - eval_field(w, exp_map(ch, -v))) / (2.0 * h)
                assert abs(fd - g[i]) <= 1e-6 * max(1.0, abs(g[i])) + 2e-5
            checked += 1


def test_fft_grid_matches_pointwise_and_shift_and_derivative():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 7)
    w = sample_wave(basis, 11)
    n = 64
    xs = np.stack(np.meshgrid(np.arange(n) / n, np.arange(n) / n,
                              indexing="ij"), axis=-1).reshape(-1, 2)
    assert np.allclose(torus_field_grid(w, n), eval_field(w, xs).reshape(n, n),
                       atol=1e-12)
    shift = np.array([0.0131, -0.0052])
    assert np.allclose(torus_field_grid(w, n, shift=shift),
                       eval_field(w, np.mod(xs + shift, 1.0)).reshape(n, n),
                       atol=1e-12)
    g = torus_field_grid(w, n, deriv=(0, 1))
    h = 1e-6
    fd = (eval_field(w, np.mod(xs + [0, h], 1.0))
          - eval_field(w, np.mod(xs - [0, h], 1.0))) / (2.0 * h)
    assert np.allclose(g, fd.reshape(n, n), atol=1e-6)


def test_torus3_grid_and_patch_paths():
    t3 = ManifoldSpec.torus(3)
    basis = enumerate_spectrum(t3, 2.0 * math.pi * 3)
    w = sample_wave(basis, 6)
    n = 16
    ax = np.arange(n) / n
    pts = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
    assert np.allclose(torus_field_grid(w, n),
                       eval_field(w, pts).reshape(n, n, n), atol=1e-12)
    axes = [np.linspace(0.1, 0.2, 4), np.linspace(0.5, 0.6, 5),
            np.linspace(0.8, 0.9, 3)]
    ppts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    assert np.allclose(torus_field_patch(w, axes),
                       eval_field(w, ppts).reshape(4, 5, 3), atol=1e-12)


def test_torus3_nodal_not_shipped():
    from rrwlab.experiments import exp_nodal
    with pytest.raises(NotImplementedError):
        exp_nodal(ManifoldSpec.torus(3), Regime.LARGE_BAND, 2.0 * math.pi * 4,
                  replicas=1, seed=0)


def test_patch_gemm_matches_pointwise():
    basis = enumerate_spectrum(T2, 2.0 * math.pi * 7)
    w = sample_wave(basis, 12)
    ax0 = np.linspace(0.31, 0.34, 9)
    ax1 = np.linspace(0.72, 0.78, 11)
    pts = np.stack(np.meshgrid(ax0, ax1, indexing="ij"), axis=-1).reshape(-1, 2)
    assert np.allclose(torus_field_patch(w, [ax0, ax1]),
                       eval_field(w, pts).reshape(9, 11), atol=1e-12)


def test_rescaled_view_identities():
    lam = 2.0 * math.pi * 9
    basis = enumerate_spectrum(T2, lam)
    w = sample_wave(basis, 5)
    x = uniform_point(T2, substream(5, "x"))
    view = RescaledFieldView(w, chart_at(T2, x))
    assert eval_rescaled(view, np.zeros(2)) == pytest.approx(eval_field(w, x), abs=0)
    v = np.array([0.7, -0.4])
    assert eval_rescaled(view, v) == pytest.approx(
        eval_field(w, np.mod(x + v / lam, 1.0)), abs=1e-15)


def test_rescaled_covariance_identity():
    # Cov_a(g(u), g(v)) equals the normalized spectral kernel, exactly
    lam = 2.0 * math.pi * 6
    basis = enumerate_spectrum(T2, lam)
    x = np.array([0.15, 0.62])
    u = np.array([1.3, 0.4])
    v = np.array([-0.8, 2.1])
    xu = np.mod(x + u / lam, 1.0)
    xv = np.mod(x + v / lam, 1.0)
    phi_u = np.array([eval_mode(basis, n, xu) for n in range(basis.count)])
    phi_v = np.array([eval_mode(basis, n, xv) for n in range(basis.count)])
    cov = float(phi_u @ phi_v) / basis.count
    assert cov == pytest.approx(float(spectral_kernel(basis, xu, xv)), abs=1e-12)


def test_rescaled_domain_guard_enforced():
    lam = 2.0 * math.pi * 9
    basis = enumerate_spectrum(T2, lam)
    w = sample_wave(basis, 5)
    view = RescaledFieldView(w, chart_at(T2, np.zeros(2)))
    guard = rescaled_domain_guard(2, lam)
    with pytest.raises(ValueError):
        eval_rescaled(view, np.array([guard * 1.01, 0.0]))


# ---------------------------------------------------------------------------
# limit fields

def test_limit_sampler_requires_atoms():
    with pytest.raises(ValueError):
        sample_limit_field(2, Regime.LARGE_BAND, 0, 1)


def test_limit_sampler_replay_and_unit_variance():
    s = sample_limit_field(2, Regime.LARGE_BAND, 64, 9)
    s2_ = sample_limit_field(2, Regime.LARGE_BAND, 64, 9)
    assert np.array_equal(s.frequencies, s2_.frequencies)
    vals = limit_field_values_mc(2, Regime.LARGE_BAND, 64, 10_000,
                                 np.zeros((1, 2)), seed=1)
    # exact unit variance per sample construction; 4 sigma MC window
    assert abs(np.var(vals) - 1.0) < 4.0 * math.sqrt(2.0 / 10_000)


def test_limit_gradient_matches_finite_difference():
    s = sample_limit_field(2, Regime.MONOCHROMATIC, 32, 3)
    v = np.array([0.4, -1.1])
    g = eval_limit_gradient(s, v)
    h = 1e-7
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (eval_limit(s, v + e) - eval_limit(s, v - e)) / (2.0 * h)
        assert fd == pytest.approx(g[i], abs=1e-6)


def test_limit_covariance_matches_kernels():
    offsets = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
    n = 20_000
    vals = limit_field_values_mc(2, Regime.LARGE_BAND, 256, n, offsets, seed=5)
    c1 = float(np.mean(vals[:, 0] * vals[:, 1]))
    c2 = float(np.mean(vals[:, 0] * vals[:, 2]))
    sigma = 3.0 / math.sqrt(n)
    assert abs(c1 - eval_B(2, 2.0)) < sigma
    assert abs(c2 - eval_B(2, 2.0)) < sigma
    # isotropy: the two directions agree within MC error
    assert abs(c1 - c2) < 2.0 * sigma
    vals_m = limit_field_values_mc(2, Regime.MONOCHROMATIC, 256, n,
                                   offsets[:2], seed=6)
    assert abs(float(np.mean(vals_m[:, 0] * vals_m[:, 1])) - eval_S(2, 2.0)) < sigma


def test_limit_covariance_converges_in_atom_count():
    # theta-averaged covariance of one fixed draw is (1/m) sum cos(<xi_j, v>);
    # its rms error against B_d shrinks as m grows
    vs = np.array([[0.5, 0.0], [1.5, 0.5], [0.0, 3.0], [2.5, 2.5]])
    target = eval_B(2, np.linalg.norm(vs, axis=1))

    def rms(m):
        errs = []
        for seed in range(40):
            s = sample_limit_field(2, Regime.LARGE_BAND, m, seed)
            cov = np.mean(np.cos(vs @ s.frequencies.T), axis=1)
            errs.append(np.mean((cov - target) ** 2))
        return math.sqrt(np.mean(errs))

    assert rms(1024) < 0.3 * rms(64)


def test_limit_gradient_moments_and_independence():
    n = 200_000
    g0, grads = limit_gradient_samples_mc(2, Regime.LARGE_BAND, 256, n, seed=2)
    var = np.mean(grads**2, axis=0)
    assert np.all(np.abs(var - 0.25) <= 0.02 * 0.25)
    target = expected_gradient_norm(KernelSpec(2))
    assert abs(np.mean(np.linalg.norm(grads, axis=1)) - target) <= 0.01 * target
    # value/gradient independence at a point: correlation within 4 sigma of 0
    for i in range(2):
        corr = float(np.corrcoef(g0, grads[:, i])[0, 1])
        assert abs(corr) < 4.0 / math.sqrt(n)
    gm, gradm = limit_gradient_samples_mc(2, Regime.MONOCHROMATIC, 256, n, seed=3)
    assert np.all(np.abs(np.mean(gradm**2, axis=0) - 0.5) <= 0.02 * 0.5)
