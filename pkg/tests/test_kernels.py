"""Limit kernels: closed forms vs quadrature oracles, constants, asymptotics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rrwlab.kernels import (
    KernelSpec,
    Regime,
    bessel_j0,
    eval_B,
    eval_S,
    expected_gradient_norm,
    gamma_fn,
    kac_rice_constant,
    kernel_asymptotic,
    kernel_second_derivative_at_zero,
    unit_ball_volume,
)
from rrwlab.oracles import ball_kernel_quadrature, sphere_kernel_quadrature


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2.0, abs=1e-14)
    assert unit_ball_volume(2) == pytest.approx(math.pi, abs=1e-14)
    # d=3 via the independent Gamma route
    assert unit_ball_volume(3) == pytest.approx(
        math.pi**1.5 / math.gamma(2.5), rel=1e-13)


def test_gamma_half_integers():
    for x in (0.5, 1.0, 1.5, 2.0, 2.5, 3.5, 4.5, 7.0, 9.5):
        assert gamma_fn(x) == pytest.approx(math.gamma(x), rel=1e-12)


def test_ball_kernel_at_zero_and_closed_points():
    for d in range(1, 7):
        assert eval_B(d, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert eval_B(1, math.pi) == pytest.approx(0.0, abs=1e-14)
    # oracle value: radial quadrature of the defining integral
    assert ball_kernel_quadrature(3, math.pi) == pytest.approx(3.0 / math.pi**2, abs=1e-10)
    assert eval_B(3, math.pi) == pytest.approx(3.0 / math.pi**2, abs=1e-12)


def test_sphere_kernel_points():
    for d in range(2, 7):
        assert eval_S(d, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert eval_S(3, math.pi / 2) == pytest.approx(2.0 / math.pi, abs=1e-12)
    assert eval_S(3, math.pi / 2) == pytest.approx(
        sphere_kernel_quadrature(3, math.pi / 2), abs=1e-10)
    # first zero of J_0 located by bisection on the circle-average oracle
    lo, hi = 2.0, 3.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if sphere_kernel_quadrature(2, mid) > 0:
            lo = mid
        else:
            hi = mid
    assert eval_S(2, 0.5 * (lo + hi)) == pytest.approx(0.0, abs=1e-10)
    assert 0.5 * (lo + hi) == pytest.approx(2.40482555769577, abs=1e-8)


def test_kernels_match_quadrature_oracle_over_range():
    rng = np.random.default_rng(1234)
    for d in range(1, 7):
        rs = 50.0 * rng.random(200)
        exact = eval_B(d, rs)
        oracle = np.array([ball_kernel_quadrature(d, float(r)) for r in rs])
        assert np.max(np.abs(exact - oracle)) < 1e-8
    for d in range(2, 7):
        rs = 50.0 * rng.random(60)
        exact = eval_S(d, rs)
        oracle = np.array([sphere_kernel_quadrature(d, float(r)) for r in rs])
        assert np.max(np.abs(exact - oracle)) < 1e-8


def test_sphere_kernel_is_shifted_ball_kernel():
    r = np.linspace(0.0, 50.0, 401)
    for d in (3, 4, 5):
        assert np.max(np.abs(eval_S(d, r) - eval_B(d - 2, r))) < 1e-12


@settings(max_examples=120, deadline=None, derandomize=True)
@given(d=st.integers(min_value=1, max_value=6),
       r=st.floats(min_value=0.0, max_value=50.0, allow_nan=False))
def test_ball_kernel_bounded_by_one(d, r):
    assert abs(eval_B(d, r)) <= 1.0 + 1e-12


@settings(max_examples=120, deadline=None, derandomize=True)
@given(d=st.integers(min_value=2, max_value=6),
       r=st.floats(min_value=0.0, max_value=50.0, allow_nan=False))
def test_sphere_kernel_bounded_by_one(d, r):
    assert abs(eval_S(d, r)) <= 1.0 + 1e-12


def test_second_derivative_values():
    assert kernel_second_derivative_at_zero(KernelSpec(2)) == 0.25
    assert kernel_second_derivative_at_zero(KernelSpec(2, Regime.MONOCHROMATIC)) == 0.5
    assert kernel_second_derivative_at_zero(KernelSpec(3)) == pytest.approx(0.2)


def test_second_derivative_matches_finite_differences():
    # central second difference of the kernel at 0, step sweep
    for d in (1, 2, 3):
        for h in (1e-3, 1e-4):
            fd = (eval_B(d, h) - 2.0 + eval_B(d, h)) / h**2  # even function
            assert -fd == pytest.approx(1.0 / (d + 2.0), rel=5e-4)


def test_envelope_decay_of_oscillations():
    # per-period maxima of |B_2| are non-increasing on [5, 100]
    edges = np.arange(5.0, 100.0, math.pi)
    maxima = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = np.linspace(lo, hi, 200)
        maxima.append(np.max(np.abs(eval_B(2, r))))
    assert all(b <= a + 1e-12 for a, b in zip(maxima[:-1], maxima[1:]))


def test_asymptotic_accuracy():
    spec = KernelSpec(2)
    for r in (10.0, 20.0, 40.0):
        assert abs(kernel_asymptotic(spec, r) - eval_B(2, r)) <= 5.0 * r**-2.5
    # d=1 large band: the asymptotic is exactly sin(r)/r
    s1 = KernelSpec(1)
    for r in (10.0, 25.0, 47.0):
        assert kernel_asymptotic(s1, r) == pytest.approx(math.sin(r) / r, abs=1e-14)
    mono = KernelSpec(2, Regime.MONOCHROMATIC)
    assert abs(kernel_asymptotic(mono, 50.0) - eval_S(2, 50.0)) < 1e-3


def test_asymptotic_rejects_small_radius():
    with pytest.raises(ValueError):
        kernel_asymptotic(KernelSpec(2), 9.0)


def test_kac_rice_constants():
    assert kac_rice_constant(KernelSpec(1)) == pytest.approx(
        1.0 / (math.pi * math.sqrt(3.0)), rel=1e-12)
    assert kac_rice_constant(KernelSpec(2)) == pytest.approx(0.25, abs=1e-13)
    assert kac_rice_constant(KernelSpec(2, Regime.MONOCHROMATIC)) == pytest.approx(
        1.0 / (2.0 * math.sqrt(2.0)), rel=1e-12)


def test_kac_rice_equals_gradient_norm_chain():
    # density = E|grad g| / sqrt(2 pi) with E|grad| = sqrt(2/(d+2)) G((d+1)/2)/G(d/2)
    for d in range(1, 7):
        for regime in (Regime.LARGE_BAND, Regime.MONOCHROMATIC):
            if regime is Regime.MONOCHROMATIC and d < 2:
                continue
            spec = KernelSpec(d, regime)
            chain = expected_gradient_norm(spec) / math.sqrt(2.0 * math.pi)
            assert kac_rice_constant(spec) == pytest.approx(chain, rel=1e-12)
    assert expected_gradient_norm(KernelSpec(2)) == pytest.approx(
        math.sqrt(0.5) * math.sqrt(math.pi) / 2.0, rel=1e-12)


def test_monochromatic_requires_dim_two():
    with pytest.raises(ValueError):
        KernelSpec(1, Regime.MONOCHROMATIC)
    with pytest.raises(ValueError):
        eval_S(1, 1.0)


def test_bessel_j0_j1_reference_values():
    # independent reference: scipy's Bessel implementation
    from scipy.special import j0, j1
    x = np.linspace(0.0, 80.0, 1501)
    assert np.max(np.abs(bessel_j0(x) - j0(x))) < 1e-10
    from rrwlab.kernels import bessel_j1
    assert np.max(np.abs(bessel_j1(x) - j1(x))) < 1e-10
