"""Acceptance criteria: the 16 gated checks at their nominal parameters.

Each test prints its PASS/FAIL line (run with -s to stream them) and
asserts the criterion at the stated tolerance.  Criteria 5 and 6 encode
rate windows that the exact flat-torus statistics provably cannot satisfy
(the measured decay is faster than the paper's upper bounds, which the
windows treated as sharp); they are implemented faithfully and left red;
see the decisions ledger for the analysis.
"""

import math
import time

import pytest

from rrwlab.experiments import (
    default_nodal_weight,
    exp_crofton,
    exp_decor,
    exp_kacrice,
    exp_kernels,
    exp_local_global,
    exp_negmom,
    exp_nodal,
    exp_szclt,
    exp_tightness,
    exp_weyl,
)
from rrwlab.kernels import Regime
from rrwlab.manifolds import ManifoldSpec, sphere_degree_frequency

TWO_PI = 2.0 * math.pi
SEED = 0
LADDER = tuple(TWO_PI * m for m in (15, 30, 60, 120))
T1 = ManifoldSpec.torus(1)
T2 = ManifoldSpec.torus(2)
S2 = ManifoldSpec.sphere2()


def _timed(fn):
    t0 = time.time()
    out = fn()
    return out, time.time() - t0


def _emit(result):
    for c in result.criteria:
        print(c.line())
    return {c.cid: c for c in result.criteria}


@pytest.fixture(scope="module")
def kernels_result():
    res, wall = _timed(lambda: exp_kernels(seed=SEED))
    return _emit(res), wall


@pytest.fixture(scope="module")
def weyl_result():
    res, wall = _timed(lambda: exp_weyl(
        T2, tuple(TWO_PI * m for m in (10, 20, 40, 80)), seed=SEED,
        local_pair=(TWO_PI * 20, TWO_PI * 80)))
    return _emit(res), wall


@pytest.fixture(scope="module")
def szclt_result():
    res, wall = _timed(lambda: exp_szclt(T2, LADDER, seed=SEED, replicas=128))
    return _emit(res), wall, res


@pytest.fixture(scope="module")
def decor_result():
    res, wall = _timed(lambda: exp_decor(T2, LADDER, seed=SEED))
    return _emit(res), wall, res


@pytest.fixture(scope="module")
def nodal1d_result():
    res, wall = _timed(lambda: exp_nodal(T1, Regime.LARGE_BAND, TWO_PI * 300,
                                         replicas=20, seed=SEED))
    return _emit(res), wall, res


@pytest.fixture(scope="module")
def nodal2d_result():
    res, wall = _timed(lambda: exp_nodal(T2, Regime.LARGE_BAND, TWO_PI * 40,
                                         replicas=20, seed=SEED, grid_n=2048,
                                         weight=default_nodal_weight))
    return _emit(res), wall, res


@pytest.fixture(scope="module")
def sphere_result():
    res, wall = _timed(lambda: exp_nodal(S2, Regime.MONOCHROMATIC,
                                         sphere_degree_frequency(60),
                                         replicas=20, seed=SEED))
    return _emit(res), wall, res


@pytest.fixture(scope="module")
def local_global_result():
    res, wall = _timed(lambda: exp_local_global(TWO_PI * 20, 2000, seed=SEED))
    return _emit(res), wall, res


@pytest.fixture(scope="module")
def kacrice_result():
    res, wall = _timed(lambda: exp_kacrice(d=2, regime=Regime.LARGE_BAND,
                                           m=256, n_samples=1_000_000, seed=SEED))
    return _emit(res), wall, res


@pytest.fixture(scope="module")
def crofton_result():
    res, wall = _timed(lambda: exp_crofton(T2, TWO_PI * 30, n_patches=100,
                                           seed=SEED, c=0.125))
    return _emit(res), wall, res


@pytest.fixture(scope="module")
def negmom_result():
    res, wall = _timed(lambda: exp_negmom(T2, LADDER, nu=0.012, seed=SEED))
    return _emit(res), wall, res


@pytest.fixture(scope="module")
def tightness_result():
    res, wall = _timed(lambda: exp_tightness(T2, LADDER, seed=SEED,
                                             z_replicas=200,
                                             moment_lambda=TWO_PI * 60))
    return _emit(res), wall, res


def test_criterion_01_kernel_exactness(kernels_result):
    crits, wall = kernels_result
    assert crits[1].value <= 1e-8, crits[1].line()
    assert wall < 30.0


def test_criterion_02_weyl_law(weyl_result):
    crits, _ = weyl_result
    c = crits[2]
    assert c.value <= 0.05, c.line()
    assert c.passed, c.line()


def test_criterion_03_local_weyl_halving(weyl_result):
    crits, wall = weyl_result
    c = crits[3]
    assert c.value <= 0.5, c.line()
    assert wall < 120.0


def test_criterion_04_salem_zygmund_clt(szclt_result):
    crits, wall, res = szclt_result
    assert res.summary["cf_err"] <= 0.02, crits[4].line()
    assert res.summary["kolmogorov"] <= 0.04, crits[4].line()


def test_criterion_05_clt_rate(szclt_result):
    crits, wall, res = szclt_result
    slope, r2 = res.summary["slope"], res.summary["r2"]
    assert wall < 1800.0
    assert r2 >= 0.9, crits[5].line()
    assert -1.3 <= slope <= -0.7, (
        f"{crits[5].line()}  [expected red: the exact torus statistic decays "
        f"like 1/K(lambda) ~ lambda^-2, inside Thm 1's upper bound but outside "
        f"the spec window; see decisions ledger]")


def test_criterion_06_decorrelation_rate(decor_result):
    crits, wall, res = decor_result
    slope, r2 = res.summary["slope"], res.summary["r2"]
    assert wall < 600.0
    assert r2 >= 0.9, crits[6].line()
    assert -1.25 <= slope <= -0.75, (
        f"{crits[6].line()}  [expected red: the exact torus covariance integral "
        f"decays like lambda^-(d+1)/2 = lambda^-1.5, inside Lemma 1bis's upper "
        f"bound but outside the spec window; see decisions ledger]")


def test_criterion_07_nodal_constant_1d(nodal1d_result):
    crits, wall, res = nodal1d_result
    target = 1.0 / (math.pi * math.sqrt(3.0))
    mean = res.summary["mean"]
    single = res.rows[0]["length_over_lambda"]
    assert abs(mean - target) <= 0.01 * target, crits[7].line()
    assert abs(single - target) <= 0.03 * target, crits[7].line()
    assert wall < 60.0


def test_criterion_08_nodal_constant_2d(nodal2d_result):
    crits, wall, res = nodal2d_result
    mean = res.summary["mean"]
    single = res.rows[0]["length_over_lambda"]
    assert abs(mean - 0.25) <= 0.03 * 0.25, crits[8].line()
    assert abs(single - 0.25) <= 0.08 * 0.25, crits[8].line()
    assert wall < 1200.0


def test_criterion_09_nodal_constant_sphere(sphere_result):
    crits, wall, res = sphere_result
    target = 1.0 / (2.0 * math.sqrt(2.0))
    assert abs(res.summary["mean"] - target) <= 0.05 * target, crits[9].line()
    assert wall < 1800.0


def test_criterion_10_nodal_measure(nodal2d_result):
    crits, _, res = nodal2d_result
    assert abs(res.summary["weighted_mean"] - 0.25) <= 0.05 * 0.25, crits[10].line()


def test_criterion_11_local_global(local_global_result):
    crits, wall, res = local_global_result
    assert 0.97 <= res.summary["ratio_closed"] <= 1.03, crits[11].line()
    assert 0.97 <= res.summary["ratio_draw"] <= 1.03, crits[11].line()
    assert wall < 300.0


def test_criterion_12_kac_rice_chain(kacrice_result):
    crits, wall, res = kacrice_result
    for v in res.summary["grad_var"]:
        assert abs(v - 0.25) <= 0.02 * 0.25, crits[12].line()
    target = math.sqrt(0.5) * math.sqrt(math.pi) / 2.0
    assert abs(res.summary["grad_norm_mean"] - target) <= 0.01 * target
    assert abs(res.summary["implied_density"] - 0.25) <= 0.01 * 0.25
    assert wall < 120.0


def test_criterion_13_crofton_bound(crofton_result):
    crits, wall, res = crofton_result
    assert res.summary["n_ok"] == res.summary["n_patches"] == 100, crits[13].line()
    assert wall < 600.0


def test_criterion_14_negative_moments(negmom_result):
    crits, wall, res = negmom_result
    assert res.summary["max"] <= 1.2, crits[14].line()
    assert res.summary["kendall_p_increasing"] > 0.05, crits[14].line()
    assert wall < 300.0


def test_criterion_15_tightness_moments(tightness_result):
    crits, _, res = tightness_result
    moments = res.summary["grad_moments"]
    # reference lambda = 2 pi 60 is the third ladder entry
    assert abs(moments[2] - 0.25) <= 0.05 * 0.25, crits[15].line()
    assert max(moments) / min(moments) <= 1.3, crits[15].line()


def test_criterion_16_uniform_integrability(tightness_result):
    crits, wall, res = tightness_result
    assert res.summary["kendall_p_increasing"] > 0.05, crits[16].line()
    assert wall < 2700.0
