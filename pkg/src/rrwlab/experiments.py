"""Experiment implementations: one function per experiment family.

Each function takes explicit parameters plus a master seed, derives all of
its randomness through labeled sub-streams, and returns an
ExperimentResult with per-replica rows, a summary, an optional rate fit,
and the list of gated checks it evaluated.  Everything is deterministic in
(parameters, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import (
    KernelSpec,
    Regime,
    eval_B,
    eval_S,
    expected_gradient_norm,
    kac_rice_constant,
    kernel_second_derivative_at_zero,
    unit_ball_volume,
)
from .manifolds import (
    ManifoldKind,
    ManifoldSpec,
    SpectralBasis,
    chart_at,
    enumerate_spectrum,
    exp_map,
    spectral_kernel,
    sphere_mode_matrix,
    uniform_point,
)
from .nodal import (
    GridTooCoarseError,
    clip_segments_to_disk,
    count_zeros_1d,
    crofton_lower_bound,
    local_global_check,
    nodal_length_2d,
    nodal_measure_integral,
)
from .oracles import ball_kernel_quadrature, sphere_kernel_quadrature
from .rng import derive_seed, substream
from .statlab import (
    CFProbe,
    RateFit,
    empirical_cf,
    delta_q,
    decorrelation_stat,
    derivative_moment,
    field_values_over_x,
    kendall_trend_pvalue,
    kolmogorov_distance,
    loglog_slope,
    negative_moment,
)
from .wavefields import (
    WaveSample,
    eval_field,
    limit_gradient_samples_mc,
    sample_wave,
    torus_field_grid,
    torus_field_patch,
)

__all__ = [
    "CriterionResult",
    "ExperimentResult",
    "exp_kernels",
    "exp_weyl",
    "exp_szclt",
    "exp_decor",
    "default_nodal_weight",
    "exp_nodal",
    "exp_nodal_measure",
    "exp_local_global",
    "exp_kacrice",
    "exp_negmom",
    "exp_tightness",
    "exp_crofton",
]

DELTA2 = unit_ball_volume(2) ** -0.5  # radius of the unit-area disk


@dataclass(frozen=True)
class CriterionResult:
    cid: int
    theorem: str
    name: str
    passed: bool
    value: float
    target: float | None
    tol_text: str
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tgt = "" if self.target is None else f" target {self.target:.7g}"
        return (f"{status} criterion {self.cid:2d} [{self.theorem}] {self.name}: "
                f"value {self.value:.6g}{tgt} ({self.tol_text}) {self.detail}".rstrip())


@dataclass
class ExperimentResult:
    experiment: str
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    rate: RateFit | None = None
    criteria: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)


# ---------------------------------------------------------------------------
# kernels (criterion 1)

def exp_kernels(seed: int = 0, n_radii: int = 200, rmax: float = 50.0) -> ExperimentResult:
    res = ExperimentResult("kernels")
    worst = 0.0
    for d, regime in [(1, Regime.LARGE_BAND), (2, Regime.LARGE_BAND), (3, Regime.LARGE_BAND),
                      (2, Regime.MONOCHROMATIC), (3, Regime.MONOCHROMATIC)]:
        rng = substream(seed, "kernel-radii", d, regime.value)
        radii = rmax * rng.random(n_radii)
        if regime is Regime.LARGE_BAND:
            exact = eval_B(d, radii)
            oracle = np.array([ball_kernel_quadrature(d, float(r)) for r in radii])
        else:
            exact = eval_S(d, radii)
            oracle = np.array([sphere_kernel_quadrature(d, float(r)) for r in radii])
        err = float(np.max(np.abs(exact - oracle)))
        worst = max(worst, err)
        res.rows.append({"dim": d, "regime": regime.value, "n_radii": n_radii,
                         "max_abs_err": err})
    res.summary = {"max_abs_err": worst}
    res.criteria.append(CriterionResult(
        1, "Thm4", "kernel evaluators vs quadrature oracle", worst <= 1e-8,
        worst, 0.0, "max abs err <= 1e-8"))
    return res


# ---------------------------------------------------------------------------
# weyl (criteria 2, 3)

def _local_weyl_sup_error(m: ManifoldSpec, lam: float, box: float = 10.0,
                          grid: int = 20) -> float:
    basis = enumerate_spectrum(m, lam)
    h = 2.0 * box / (grid - 1)
    dg = h * np.arange(-(grid - 1), grid)
    D = np.stack(np.meshgrid(dg, dg, indexing="ij"), axis=-1).reshape(-1, 2)
    D = D[np.linalg.norm(D, axis=1) <= 2.0 * box]
    vals = spectral_kernel(basis, D / lam, np.zeros_like(D))
    target = eval_B(m.dim, np.linalg.norm(D, axis=1))
    return float(np.max(np.abs(vals - target)))


def exp_weyl(manifold: ManifoldSpec, lambdas, seed: int = 0,
             with_local: bool = True,
             local_pair: tuple[float, float] | None = None) -> ExperimentResult:
    res = ExperimentResult("weyl")
    d = manifold.dim
    sigma = unit_ball_volume(d)
    devs = []
    for lam in lambdas:
        basis = enumerate_spectrum(manifold, lam)
        ratio = basis.count * (2.0 * math.pi) ** d / (sigma * lam**d)
        devs.append((lam, max(abs(ratio - 1.0), 1e-12)))
        res.rows.append({"lambda": lam, "count": basis.count, "weyl_ratio": ratio})
    lam_last = float(lambdas[-1])
    dev_last = devs[-1][1]
    fit = loglog_slope(devs) if len(devs) >= 4 else None
    res.rate = fit
    slope = fit.slope if fit else (devs[-1][1] - devs[0][1])
    res.summary = {"last_ratio_dev": dev_last, "trend_slope": slope}
    res.criteria.append(CriterionResult(
        2, "Weyl", "counting function vs Weyl volume term",
        dev_last <= 0.05 and slope < 0.0, dev_last, 0.0,
        "|ratio-1| <= 0.05 at top lambda, negative trend",
        detail=f"slope {slope:.3g}"))
    if with_local and manifold.kind is ManifoldKind.TORUS and d == 2:
        pair = local_pair or (float(lambdas[0]), lam_last)
        e_low = _local_weyl_sup_error(manifold, pair[0])
        e_high = _local_weyl_sup_error(manifold, pair[1])
        ratio = e_high / e_low
        res.summary.update({"local_sup_low": e_low, "local_sup_high": e_high})
        res.criteria.append(CriterionResult(
            3, "Thm4", "local Weyl sup error halving", ratio <= 0.5, ratio, None,
            f"sup err({pair[1]:.4g}) <= 0.5 * sup err({pair[0]:.4g})",
            detail=f"{e_low:.4g} -> {e_high:.4g}"))
    return res


# ---------------------------------------------------------------------------
# szclt (criteria 4, 5)

def exp_szclt(manifold: ManifoldSpec, lambdas, seed: int = 0,
              replicas: int = 128, q: int = 1) -> ExperimentResult:
    res = ExperimentResult("szclt")
    spec = KernelSpec(manifold.dim, Regime.LARGE_BAND)
    probe = CFProbe.single(manifold.dim, 1.0)
    pts = []
    for i, lam in enumerate(lambdas):
        basis = enumerate_spectrum(manifold, lam)
        dq = delta_q(basis, probe, spec, q=q, coeff_replicas=replicas,
                     seed=derive_seed(seed, "szclt", i))
        pts.append((lam, dq))
        res.rows.append({"lambda": lam, "delta_q": dq, "q": q, "replicas": replicas})
    fit = loglog_slope(pts)
    res.rate = fit
    lam_top = float(lambdas[-1])
    basis = enumerate_spectrum(manifold, lam_top)
    w = sample_wave(basis, derive_seed(seed, "szclt-single", len(lambdas) - 1))
    cf = empirical_cf(w, probe, 0)
    cf_err = abs(cf - math.exp(-0.5))
    kol = kolmogorov_distance(field_values_over_x(w, np.zeros(manifold.dim), 0))
    res.summary = {"cf_err": cf_err, "kolmogorov": kol,
                   "slope": fit.slope, "r2": fit.r2}
    res.criteria.append(CriterionResult(
        4, "Thm0", "CLT of the characteristic function at top lambda",
        cf_err <= 0.02 and kol <= 0.04, cf_err, 0.0,
        "|cf - exp(-1/2)| <= 0.02 and Kolmogorov <= 0.04",
        detail=f"kolmogorov {kol:.4g}"))
    res.criteria.append(CriterionResult(
        5, "Thm1", "CLT rate exponent", -1.3 <= fit.slope <= -0.7 and fit.r2 >= 0.9,
        fit.slope, -1.0, "slope in [-1.3, -0.7], r2 >= 0.9",
        detail=f"r2 {fit.r2:.4f}"))
    return res


# ---------------------------------------------------------------------------
# decor (criterion 6)

def exp_decor(manifold: ManifoldSpec, lambdas, seed: int = 0,
              xy_draws: int = 65536) -> ExperimentResult:
    res = ExperimentResult("decor")
    probe = CFProbe.single(manifold.dim, 1.0)
    pts = []
    for lam in lambdas:
        basis = enumerate_spectrum(manifold, lam)
        stat = decorrelation_stat(basis, probe, xy_draws,
                                  substream(seed, "decor", lam))
        pts.append((lam, stat))
        res.rows.append({"lambda": lam, "decorrelation": stat})
    fit = loglog_slope(pts)
    res.rate = fit
    res.summary = {"slope": fit.slope, "r2": fit.r2}
    res.criteria.append(CriterionResult(
        6, "L1bis", "decorrelation rate exponent",
        -1.25 <= fit.slope <= -0.75 and fit.r2 >= 0.9, fit.slope, -1.0,
        "slope in [-1.25, -0.75], r2 >= 0.9", detail=f"r2 {fit.r2:.4f}"))
    return res


# ---------------------------------------------------------------------------
# nodal (criteria 7, 8, 9, 11)

def _torus1_zero_run(basis: SpectralBasis, seed: int, grid_n: int):
    w = sample_wave(basis, seed)

    def ev(t):
        return torus_field_patch(w, [np.mod(np.asarray(t, dtype=float), 1.0)])

    # resolution rule: keep doubling until the count is stable
    last = None
    for _ in range(7):
        try:
            return count_zeros_1d(ev, (0.0, 1.0), grid_n, lam=basis.lambda_cut)
        except GridTooCoarseError as exc:
            last = exc
            grid_n *= 2
    raise last


def _torus2_nodal_draw(basis: SpectralBasis, seed: int, grid_n: int,
                       weight=None, want_soup: bool = False):
    w = sample_wave(basis, seed)
    lam = basis.lambda_cut
    vals = torus_field_grid(w, grid_n)

    def center_fn(pts):
        return eval_field(w, np.mod(pts, 1.0))

    est, soup = nodal_length_2d(vals, 1.0 / grid_n, lam=lam, periodic=True,
                                center_fn=center_fn, domain="torus")
    out = {"length": est.value, "length_over_lambda": est.value / lam,
           "grid_n": grid_n}
    if weight is not None:
        out["weighted_integral"] = nodal_measure_integral(soup, weight, lam)
    if want_soup:
        out["soup"] = soup
    return out


def _sphere_mono_intensity_draw(basis: SpectralBasis, seed: int,
                                n_patches: int, patch_radius: float,
                                step: float) -> float:
    """Nodal length per unit chart area for one coefficient draw, averaged
    over chart-disk patches at uniform centers.  The length density of the
    rescaled field is offset-independent, so this estimates E_X[Z_lambda]
    for the unit-volume ball."""
    m = basis.manifold
    lam = basis.effective_lambda
    w = sample_wave(basis, seed)
    rng = substream(seed, "patch-centers")
    coeffs = w.coeffs / math.sqrt(basis.count)
    nv = 2 * int(math.ceil(patch_radius / step)) + 1
    g = np.linspace(-patch_radius, patch_radius, nv)
    V = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    total = 0.0
    for _ in range(n_patches):
        x = uniform_point(m, rng)
        ch = chart_at(m, x)
        pts = exp_map(ch, V / lam)
        vals = (sphere_mode_matrix(basis, pts) @ coeffs).reshape(nv, nv)

        def center_fn(mid):
            return sphere_mode_matrix(basis, exp_map(ch, mid / lam)) @ coeffs

        _, soup = nodal_length_2d(vals, 2.0 * patch_radius / (nv - 1), lam=lam,
                                  origin=(-patch_radius, -patch_radius),
                                  center_fn=center_fn, domain="chart-disk")
        if soup.n:
            total += float(np.sum(clip_segments_to_disk(
                soup.a, soup.b, np.zeros(2), patch_radius)))
    area = n_patches * math.pi * patch_radius**2
    return total / area


def _parallel_map(fn, items, threads: int):
    """Order-preserving map; each item must be independently seeded, so the
    result never depends on scheduling."""
    if threads and threads > 1 and len(items) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def exp_nodal(manifold: ManifoldSpec, regime: Regime, lam: float,
              replicas: int, seed: int = 0, grid_n: int = 0,
              n_patches: int = 6, patch_radius: float = 5.0,
              patch_step: float = 0.125, weight=None,
              stability_check: bool = True, threads: int = 0) -> ExperimentResult:
    res = ExperimentResult("nodal")
    basis = enumerate_spectrum(manifold, lam, regime)
    lam = basis.effective_lambda
    target = kac_rice_constant(KernelSpec(manifold.dim, regime))
    vals = []
    if manifold.kind is ManifoldKind.TORUS and manifold.dim == 1:
        grid_n = grid_n or 32 * int(round(lam / (2.0 * math.pi)))
        for rep in range(replicas):
            est = _torus1_zero_run(basis, derive_seed(seed, "nodal", f"lam={lam:.6f}", rep), grid_n)
            vals.append(est.value / lam)
            res.rows.append({"replica": rep, "lambda": lam, "length": est.value,
                             "length_over_lambda": est.value / lam, "grid_n": est.grid_n})
        mean = float(np.mean(vals))
        res.summary = {"lambda": lam, "mean": mean, "sd": float(np.std(vals)),
                       "target_constant": target}
        res.criteria.append(CriterionResult(
            7, "Thm5", "zero density on the circle",
            abs(mean - target) <= 0.01 * target and abs(vals[0] - target) <= 0.03 * target,
            mean, target, "mean within 1%, single draw within 3%",
            detail=f"single {vals[0]:.6g}"))
        return res
    if manifold.kind is ManifoldKind.TORUS and manifold.dim == 2:
        grid_n = grid_n or 2048
        weighted = []
        seeds = [derive_seed(seed, "nodal", f"lam={lam:.6f}", rep)
                 for rep in range(replicas)]
        outs = _parallel_map(
            lambda s: _torus2_nodal_draw(basis, s, grid_n, weight=weight),
            seeds, threads)
        if stability_check and outs:
            fine = _torus2_nodal_draw(basis, seeds[0], 2 * grid_n)
            drift = abs(fine["length"] - outs[0]["length"]) / max(outs[0]["length"], 1e-300)
            res.summary["stability_drift"] = drift
            if drift > 0.01:
                raise RuntimeError(
                    f"nodal length unstable under grid doubling: {drift:.3%}")
        for rep, out in enumerate(outs):
            vals.append(out["length_over_lambda"])
            row = {"replica": rep, "lambda": lam, "length": out["length"],
                   "length_over_lambda": out["length_over_lambda"], "grid_n": grid_n}
            if weight is not None:
                weighted.append(out["weighted_integral"])
                row["weighted_integral"] = out["weighted_integral"]
            res.rows.append(row)
        mean = float(np.mean(vals))
        res.summary.update({"lambda": lam, "mean": mean, "sd": float(np.std(vals)),
                            "target_constant": target})
        res.criteria.append(CriterionResult(
            8, "Thm5", "nodal length density, torus large band",
            abs(mean - target) <= 0.03 * target and abs(vals[0] - target) <= 0.08 * target,
            mean, target, "mean within 3%, single draw within 8%",
            detail=f"single {vals[0]:.6g}"))
        if weight is not None:
            wmean = float(np.mean(weighted))
            res.summary["weighted_mean"] = wmean
            res.criteria.append(CriterionResult(
                10, "Thm6", "weighted nodal measure vs volume measure",
                abs(wmean - target) <= 0.05 * target, wmean, target,
                "mean weighted integral within 5% of (int h dmu) * const"))
        return res
    if manifold.kind is ManifoldKind.TORUS:
        raise NotImplementedError(
            "nodal extraction for the 3-torus (marching cubes) is not gated "
            "and not shipped")
    # sphere, monochromatic (or large band): patch intensity estimator
    for rep in range(replicas):
        rep_seed = derive_seed(seed, "nodal", f"lam={lam:.6f}", rep)
        z = _sphere_mono_intensity_draw(basis, rep_seed, n_patches, patch_radius, patch_step)
        vals.append(z)
        res.rows.append({"replica": rep, "lambda": lam, "length": z * lam,
                         "length_over_lambda": z, "grid_n": int(2 * patch_radius / patch_step)})
    mean = float(np.mean(vals))
    res.summary = {"lambda": lam, "mean": mean, "sd": float(np.std(vals)),
                   "target_constant": target}
    res.criteria.append(CriterionResult(
        9, "Thm5", "nodal length density, sphere monochromatic",
        abs(mean - target) <= 0.05 * target, mean, target,
        "mean of patch estimates within 5%",
        detail=f"{replicas} draws x {n_patches} patches"))
    return res


def default_nodal_weight(pts: np.ndarray) -> np.ndarray:
    """h(x) = 1 + cos(2 pi x_1): continuous, mean one against the volume
    measure, so the weighted limit equals the bare Kac-Rice constant."""
    return 1.0 + np.cos(2.0 * math.pi * pts[:, 0])


def exp_nodal_measure(manifold: ManifoldSpec, lam: float, replicas: int,
                      seed: int = 0, grid_n: int = 2048) -> ExperimentResult:
    res = exp_nodal(manifold, Regime.LARGE_BAND, lam, replicas, seed=seed,
                    grid_n=grid_n, weight=default_nodal_weight)
    res.experiment = "nodal-measure"
    res.criteria = [c for c in res.criteria if c.cid == 10]
    return res


def exp_local_global(lam: float, n_ball_samples: int = 2000,
                     seed: int = 0, grid_n: int = 1024) -> ExperimentResult:
    """Criterion 11: the ball-restriction representation ratio for a
    closed-form field and for one wave draw."""
    res = ExperimentResult("nodal")
    m = ManifoldSpec.torus(2)
    xs = np.arange(grid_n) / grid_n
    X = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1)
    closed = np.sin(2.0 * math.pi * X[..., 0])
    _, soup_closed = nodal_length_2d(closed, 1.0 / grid_n, lam=lam, periodic=True)
    r_closed = local_global_check(soup_closed, lam, n_ball_samples)
    basis = enumerate_spectrum(m, lam)
    w = sample_wave(basis, derive_seed(seed, "local-global"))
    vals = torus_field_grid(w, grid_n)
    _, soup_draw = nodal_length_2d(vals, 1.0 / grid_n, lam=lam, periodic=True,
                                   center_fn=lambda p: eval_field(w, np.mod(p, 1.0)))
    r_draw = local_global_check(soup_draw, lam, n_ball_samples)
    res.rows = [{"field": "sin(2 pi x1)", "ratio": r_closed},
                {"field": "wave draw", "ratio": r_draw}]
    res.summary = {"ratio_closed": r_closed, "ratio_draw": r_draw}
    ok = 0.97 <= r_closed <= 1.03 and 0.97 <= r_draw <= 1.03
    res.criteria.append(CriterionResult(
        11, "L6", "local-ball representation of the nodal volume", ok,
        r_draw, 1.0, "ratios in [0.97, 1.03]",
        detail=f"closed-form {r_closed:.5g}, draw {r_draw:.5g}"))
    return res


# ---------------------------------------------------------------------------
# kacrice (criterion 12)

def exp_kacrice(d: int = 2, regime: Regime = Regime.LARGE_BAND, m: int = 256,
                n_samples: int = 1_000_000, seed: int = 0) -> ExperimentResult:
    res = ExperimentResult("kacrice")
    spec = KernelSpec(d, regime)
    g0, grads = limit_gradient_samples_mc(d, regime, m, n_samples, seed)
    var_coord = np.mean(grads**2, axis=0)
    grad_norm = float(np.mean(np.linalg.norm(grads, axis=1)))
    density = grad_norm / math.sqrt(2.0 * math.pi)
    corr = [float(np.corrcoef(g0, grads[:, i])[0, 1]) for i in range(d)]
    var_target = kernel_second_derivative_at_zero(spec)
    norm_target = expected_gradient_norm(spec)
    dens_target = kac_rice_constant(spec)
    res.rows = [{"statistic": "grad_var_coord", "value": float(v),
                 "target": var_target} for v in var_coord]
    res.rows.append({"statistic": "grad_norm_mean", "value": grad_norm,
                     "target": norm_target})
    res.rows.append({"statistic": "implied_density", "value": density,
                     "target": dens_target})
    res.summary = {"grad_var": [float(v) for v in var_coord],
                   "grad_norm_mean": grad_norm, "implied_density": density,
                   "value_gradient_corr": corr}
    ok = (all(abs(v - var_target) <= 0.02 * var_target for v in var_coord)
          and abs(grad_norm - norm_target) <= 0.01 * norm_target
          and abs(density - dens_target) <= 0.01 * dens_target)
    res.criteria.append(CriterionResult(
        12, "Thm5", "Kac-Rice constants from the limit-field sampler", ok,
        density, dens_target,
        "gradient variances within 2%, E|grad| and density within 1%",
        detail=f"E|grad| {grad_norm:.6g} vs {norm_target:.6g}"))
    return res


# ---------------------------------------------------------------------------
# negmom (criterion 14)

def exp_negmom(manifold: ManifoldSpec, lambdas, nu: float = 0.012,
               seed: int = 0, x_draws: int = 262144) -> ExperimentResult:
    res = ExperimentResult("negmom")
    vals = []
    for i, lam in enumerate(lambdas):
        basis = enumerate_spectrum(manifold, lam)
        w = sample_wave(basis, derive_seed(seed, "negmom", i))
        v = negative_moment(w, np.zeros(manifold.dim), nu, x_draws)
        vals.append(v)
        res.rows.append({"lambda": lam, "neg_moment": v, "nu": nu})
    pval = kendall_trend_pvalue(list(lambdas), vals)
    biggest = max(vals)
    res.summary = {"max": biggest, "kendall_p_increasing": pval, "nu": nu}
    res.criteria.append(CriterionResult(
        14, "L7", "negative moments bounded along the ladder",
        biggest <= 1.2 and pval > 0.05, biggest, None,
        "max <= 1.2 and no increasing trend (Kendall 5%)",
        detail=f"kendall p {pval:.3f}"))
    return res


# ---------------------------------------------------------------------------
# tightness (criteria 15, 16)

def _torus_patch_Z(basis: SpectralBasis, w: WaveSample, x: np.ndarray,
                   nv: int = 32) -> float:
    """Nodal length of the rescaled field inside the unit-area chart disk."""
    lam = basis.lambda_cut
    g = np.linspace(-DELTA2, DELTA2, nv)
    axes = [np.mod(x[0] + g / lam, 1.0), np.mod(x[1] + g / lam, 1.0)]
    # the chart is x + v/lambda; evaluate on the product grid directly
    vals = torus_field_patch(w, axes)
    _, soup = nodal_length_2d(vals, 2.0 * DELTA2 / (nv - 1), lam=lam,
                              origin=(-DELTA2, -DELTA2), domain="chart-disk")
    if not soup.n:
        return 0.0
    return float(np.sum(clip_segments_to_disk(soup.a, soup.b, np.zeros(2), DELTA2)))


def exp_tightness(manifold: ManifoldSpec, lambdas, seed: int = 0,
                  z_replicas: int = 200, z_grid: int = 32,
                  moment_lambda: float | None = None) -> ExperimentResult:
    res = ExperimentResult("tightness")
    d = manifold.dim
    target = 1.0 / (d + 2.0)  # Vol(B) = 1 by the delta normalization
    moments = []
    for i, lam in enumerate(lambdas):
        basis = enumerate_spectrum(manifold, lam)
        w = sample_wave(basis, derive_seed(seed, "tightness", i))
        val = derivative_moment(w, (1, 0), 1)
        moments.append(val)
        res.rows.append({"lambda": lam, "statistic": "grad_moment", "value": val})
    lam_ref = moment_lambda or float(lambdas[-1])
    idx_ref = int(np.argmin([abs(l - lam_ref) for l in lambdas]))
    spread = max(moments) / min(moments)
    ok15 = abs(moments[idx_ref] - target) <= 0.05 * target and spread <= 1.3
    res.criteria.append(CriterionResult(
        15, "L3", "first-derivative moment of the rescaled field",
        ok15, moments[idx_ref], target,
        "within 5% of 1/(d+2) at reference lambda; ladder max/min <= 1.3",
        detail=f"spread {spread:.3f}"))
    # uniform-integrability proxy: second moment of Z_lambda across replicas
    second = []
    for i, lam in enumerate(lambdas):
        basis = enumerate_spectrum(manifold, lam)
        zs = []
        rng = substream(seed, "zmoment-X", i)
        for rep in range(z_replicas):
            w = sample_wave(basis, derive_seed(seed, "zmoment", i, rep))
            x = uniform_point(manifold, rng)
            zs.append(_torus_patch_Z(basis, w, x, nv=z_grid))
        zs = np.asarray(zs)
        second.append(float(np.mean(zs**2)))
        res.rows.append({"lambda": lam, "statistic": "z_second_moment",
                         "value": second[-1]})
    pval = kendall_trend_pvalue(list(lambdas), second)
    res.summary = {"grad_moments": moments, "z_second_moments": second,
                   "kendall_p_increasing": pval}
    res.criteria.append(CriterionResult(
        16, "Thm8", "second moment of the local nodal volume",
        pval > 0.05, max(second), None,
        "no increasing trend across the ladder (Kendall 5%)",
        detail=f"kendall p {pval:.3f}"))
    return res


# ---------------------------------------------------------------------------
# crofton (criterion 13)

def exp_crofton(manifold: ManifoldSpec, lam: float, n_patches: int = 100,
                seed: int = 0, samples: int = 512, c: float = 0.125,
                nv: int = 64) -> ExperimentResult:
    res = ExperimentResult("crofton")
    basis = enumerate_spectrum(manifold, lam)
    lam = basis.lambda_cut
    side = 2.0 * DELTA2
    g = np.linspace(0.0, side, nv)
    n_ok = 0
    for rep in range(n_patches):
        w = sample_wave(basis, derive_seed(seed, "crofton", rep))
        rng = substream(seed, "crofton-pts", rep)
        x = uniform_point(manifold, rng)
        axes = [np.mod(x[0] + g / lam, 1.0), np.mod(x[1] + g / lam, 1.0)]
        vals = torus_field_patch(w, axes)
        _, soup = nodal_length_2d(vals, side / (nv - 1), lam=lam, domain="patch")
        count, ok = crofton_lower_bound(soup, side, samples, rng, c=c)
        n_ok += int(ok)
        res.rows.append({"replica": rep, "lambda": lam, "best_count": count,
                         "bound_ok": ok, "length": soup.total_length()})
    res.summary = {"n_ok": n_ok, "n_patches": n_patches, "c": c}
    res.criteria.append(CriterionResult(
        13, "L12", "Crofton vertex-segment lower bound", n_ok == n_patches,
        float(n_ok), float(n_patches), f"bound holds on all patches at c={c:g}"))
    return res
