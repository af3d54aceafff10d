"""Experiment orchestration: configs, seeding, persistence, acceptance runner.

A config serializes to a canonical key=value text whose SHA-256 prefix is
embedded in every output file; reloading a config reproduces identical
CSVs byte for byte.  The acceptance suite runs the gated criteria (fast
tier for smoke checks, full tier at the nominal parameters) and prints one
pass/fail line per criterion.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .experiments import (
    CriterionResult,
    ExperimentResult,
    default_nodal_weight,
    exp_crofton,
    exp_decor,
    exp_kacrice,
    exp_kernels,
    exp_local_global,
    exp_negmom,
    exp_nodal,
    exp_nodal_measure,
    exp_szclt,
    exp_tightness,
    exp_weyl,
)
from .kernels import Regime
from .manifolds import ManifoldSpec, sphere_degree_frequency

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "run",
    "acceptance_suite",
    "write_report",
    "verify_report_dir",
    "EXPERIMENT_IDS",
]

EXPERIMENT_IDS = ("kernels", "weyl", "szclt", "decor", "nodal", "nodal-measure",
                  "kacrice", "negmom", "tightness", "crofton")

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ExperimentConfig:
    """Canonical description of one experiment run."""

    experiment: str
    manifold: str = "torus2"
    regime: str = "largeband"
    lambdas: tuple = ()
    replicas: int = 20
    grid_n: int = 0
    nu: float = 0.012
    mc_samples: int = 0
    probe_weights: tuple = (1.0,)
    seed: int = 0
    threads: int = 0
    out_dir: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose from {EXPERIMENT_IDS}")
        object.__setattr__(self, "lambdas", tuple(float(l) for l in self.lambdas))
        object.__setattr__(self, "probe_weights",
                           tuple(float(t) for t in self.probe_weights))

    def canonical_text(self) -> str:
        # out_dir and threads do not influence any emitted number
        pairs = {
            "experiment": self.experiment,
            "manifold": self.manifold,
            "regime": self.regime,
            "lambdas": ",".join(repr(l) for l in self.lambdas),
            "replicas": self.replicas,
            "grid_n": self.grid_n,
            "nu": repr(self.nu),
            "mc_samples": self.mc_samples,
            "probe_weights": ",".join(repr(t) for t in self.probe_weights),
            "seed": self.seed,
        }
        return "\n".join(f"{k}={pairs[k]}" for k in sorted(pairs)) + "\n"

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    result: ExperimentResult
    wallclock: float

    @property
    def passed(self) -> bool:
        return self.result.passed

    def summary_json(self) -> dict:
        rate = self.result.rate
        rows = []
        for c in self.result.criteria:
            rows.append({
                "lambda": self.result.summary.get("lambda"),
                "estimate": c.value,
                "sd": self.result.summary.get("sd"),
                "target": c.target,
                "tol": c.tol_text,
                "pass": c.passed,
            })
        return {
            "experiment": self.config.experiment,
            "config_hash": self.config.config_hash,
            "rows": rows,
            "rate": None if rate is None else {"slope": rate.slope, "r2": rate.r2},
            "criteria": [
                {"id": c.cid, "theorem": c.theorem, "name": c.name,
                 "pass": c.passed, "value": c.value, "target": c.target,
                 "tol": c.tol_text, "detail": c.detail}
                for c in self.result.criteria
            ],
            "summary": _jsonable(self.result.summary),
            "seed": self.config.seed,
            "wallclock_s": round(self.wallclock, 3),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return str(v)


def write_report(report: ExperimentReport, out_dir: str,
                 base: str | None = None) -> None:
    """Persist per-replica rows as CSV plus a JSON summary; both carry the
    config hash so a mismatch is detectable at load time."""
    os.makedirs(out_dir, exist_ok=True)
    cfg = report.config
    base = base or cfg.experiment
    rows = report.result.rows
    csv_path = os.path.join(out_dir, f"{base}.csv")
    with open(csv_path, "w") as fh:
        fh.write(f"# seed={cfg.seed} config_hash={cfg.config_hash}\n")
        if rows:
            keys = list(rows[0].keys())
            fh.write(",".join(keys) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(row.get(k, "")) for k in keys) + "\n")
    with open(os.path.join(out_dir, f"{base}.json"), "w") as fh:
        json.dump(_jsonable(report.summary_json()), fh, indent=2, sort_keys=True)
        fh.write("\n")


def verify_report_dir(out_dir: str) -> None:
    """Hard-fail when any CSV's embedded hash disagrees with its JSON."""
    for name in sorted(os.listdir(out_dir)):
        if not name.endswith(".json"):
            continue
        with open(os.path.join(out_dir, name)) as fh:
            summary = json.load(fh)
        csv_path = os.path.join(out_dir, name[:-5] + ".csv")
        if not os.path.exists(csv_path):
            continue
        with open(csv_path) as fh:
            head = fh.readline().strip()
        tag = f"config_hash={summary['config_hash']}"
        if tag not in head:
            raise ValueError(f"config hash mismatch between {csv_path} and {name}")


def _manifold(cfg: ExperimentConfig) -> ManifoldSpec:
    return ManifoldSpec.parse(cfg.manifold)


def _regime(cfg: ExperimentConfig) -> Regime:
    return Regime.parse(cfg.regime)


def run(config: ExperimentConfig) -> ExperimentReport:
    """Dispatch a config to its experiment; deterministic in (config, seed)."""
    t0 = time.time()
    cfg = config
    exp = cfg.experiment
    if exp == "kernels":
        result = exp_kernels(seed=cfg.seed, n_radii=cfg.replicas * 10 if cfg.replicas else 200)
    elif exp == "weyl":
        result = exp_weyl(_manifold(cfg), cfg.lambdas, seed=cfg.seed)
    elif exp == "szclt":
        result = exp_szclt(_manifold(cfg), cfg.lambdas, seed=cfg.seed,
                           replicas=max(cfg.replicas, 50))
    elif exp == "decor":
        result = exp_decor(_manifold(cfg), cfg.lambdas, seed=cfg.seed,
                           xy_draws=cfg.mc_samples or 65536)
    elif exp == "nodal":
        result = _run_nodal(cfg)
    elif exp == "nodal-measure":
        merged = None
        for lam in cfg.lambdas:
            r = exp_nodal_measure(_manifold(cfg), lam, cfg.replicas, seed=cfg.seed,
                                  grid_n=cfg.grid_n or 2048)
            merged = r if merged is None else _merge(merged, r)
        result = merged
    elif exp == "kacrice":
        result = exp_kacrice(d=_manifold(cfg).dim, regime=_regime(cfg),
                             n_samples=cfg.mc_samples or 1_000_000, seed=cfg.seed)
    elif exp == "negmom":
        result = exp_negmom(_manifold(cfg), cfg.lambdas, nu=cfg.nu, seed=cfg.seed)
    elif exp == "tightness":
        result = exp_tightness(_manifold(cfg), cfg.lambdas, seed=cfg.seed,
                               z_replicas=cfg.replicas or 200)
    elif exp == "crofton":
        result = exp_crofton(_manifold(cfg), cfg.lambdas[0], n_patches=cfg.replicas or 100,
                             seed=cfg.seed)
    else:  # pragma: no cover - guarded by __post_init__
        raise ValueError(exp)
    report = ExperimentReport(config=cfg, result=result, wallclock=time.time() - t0)
    if cfg.out_dir:
        if cfg.out_dir.endswith(".csv"):
            parent = os.path.dirname(cfg.out_dir) or "."
            write_report(report, parent,
                         base=os.path.basename(cfg.out_dir)[:-4])
        else:
            write_report(report, cfg.out_dir)
    return report


def _merge(a: ExperimentResult, b: ExperimentResult) -> ExperimentResult:
    a.rows.extend(b.rows)
    a.criteria.extend(b.criteria)
    per = a.summary.setdefault("per_lambda", [])
    if not per:
        per.append({k: v for k, v in a.summary.items() if k != "per_lambda"})
    per.append(b.summary)
    return a


def _run_nodal(cfg: ExperimentConfig) -> ExperimentResult:
    m = _manifold(cfg)
    reg = _regime(cfg)
    merged = None
    for lam in cfg.lambdas:
        r = exp_nodal(m, reg, lam, cfg.replicas, seed=cfg.seed,
                      grid_n=cfg.grid_n, threads=cfg.threads)
        merged = r if merged is None else _merge(merged, r)
    return merged


# ---------------------------------------------------------------------------
# acceptance suite

ACCEPTANCE_THEOREMS = ("Thm0", "Thm1", "Thm4", "Thm5", "Thm6", "Thm8",
                       "L1bis", "L3", "L6", "L7", "L12")


def _acceptance_jobs(tier: str, seed: int):
    t2 = ManifoldSpec.torus(2)
    t1 = ManifoldSpec.torus(1)
    s2 = ManifoldSpec.sphere2()
    ladder = tuple(TWO_PI * m for m in (15, 30, 60, 120))
    if tier == "full":
        return [
            ("kernels", lambda: exp_kernels(seed=seed)),
            ("weyl", lambda: exp_weyl(t2, tuple(TWO_PI * m for m in (10, 20, 40, 80)),
                                      seed=seed, local_pair=(TWO_PI * 20, TWO_PI * 80))),
            ("szclt", lambda: exp_szclt(t2, ladder, seed=seed, replicas=128)),
            ("decor", lambda: exp_decor(t2, ladder, seed=seed)),
            ("nodal-1d", lambda: exp_nodal(t1, Regime.LARGE_BAND, TWO_PI * 300,
                                           20, seed=seed)),
            ("nodal-2d", lambda: exp_nodal(t2, Regime.LARGE_BAND, TWO_PI * 40, 20,
                                           seed=seed, grid_n=2048,
                                           weight=default_nodal_weight)),
            ("nodal-sphere", lambda: exp_nodal(s2, Regime.MONOCHROMATIC,
                                               sphere_degree_frequency(60), 20,
                                               seed=seed)),
            ("local-global", lambda: exp_local_global(TWO_PI * 20, 2000, seed=seed)),
            ("kacrice", lambda: exp_kacrice(seed=seed, n_samples=1_000_000)),
            ("crofton", lambda: exp_crofton(t2, TWO_PI * 30, n_patches=100, seed=seed)),
            ("negmom", lambda: exp_negmom(t2, ladder, nu=0.012, seed=seed)),
            ("tightness", lambda: exp_tightness(t2, ladder, seed=seed,
                                                z_replicas=200,
                                                moment_lambda=TWO_PI * 60)),
        ]
    return [
        ("kernels", lambda: exp_kernels(seed=seed, n_radii=60)),
        ("weyl", lambda: exp_weyl(t2, tuple(TWO_PI * m for m in (10, 20, 40, 80)),
                                  seed=seed, local_pair=(TWO_PI * 20, TWO_PI * 80))),
        ("szclt", lambda: exp_szclt(t2, ladder, seed=seed, replicas=50)),
        ("decor", lambda: exp_decor(t2, ladder, seed=seed)),
        ("nodal-1d", lambda: exp_nodal(t1, Regime.LARGE_BAND, TWO_PI * 150,
                                       12, seed=seed)),
        ("nodal-2d", lambda: exp_nodal(t2, Regime.LARGE_BAND, TWO_PI * 20, 6,
                                       seed=seed, grid_n=1024,
                                       weight=default_nodal_weight)),
        ("nodal-sphere", lambda: exp_nodal(s2, Regime.MONOCHROMATIC,
                                           sphere_degree_frequency(40), 8,
                                           seed=seed)),
        ("local-global", lambda: exp_local_global(TWO_PI * 20, 2000, seed=seed)),
        ("kacrice", lambda: exp_kacrice(seed=seed, n_samples=200_000)),
        ("crofton", lambda: exp_crofton(t2, TWO_PI * 30, n_patches=30, seed=seed)),
        ("negmom", lambda: exp_negmom(t2, ladder, nu=0.012, seed=seed)),
        ("tightness", lambda: exp_tightness(t2, ladder, seed=seed, z_replicas=60,
                                            moment_lambda=TWO_PI * 60)),
    ]


def acceptance_suite(tier: str = "fast", seed: int = 0, threads: int = 0,
                     out_dir: str | None = None, echo=print) -> dict:
    """Run the gated acceptance criteria; prints one line per criterion and
    returns the summary (criteria, theorem coverage, pass flag)."""
    if tier not in ("fast", "full"):
        raise ValueError("tier must be 'fast' or 'full'")
    jobs = _acceptance_jobs(tier, seed)
    t0 = time.time()
    criteria: list[CriterionResult] = []
    names = []
    workers = threads or (os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [(name, pool.submit(job)) for name, job in jobs]
        results = [(name, f.result()) for name, f in futures]
    for name, result in results:
        names.append(name)
        criteria.extend(result.criteria)
    criteria.sort(key=lambda c: c.cid)
    for c in criteria:
        echo(c.line())
    covered = sorted({c.theorem for c in criteria})
    missing = [t for t in ACCEPTANCE_THEOREMS if t not in covered]
    n_pass = sum(c.passed for c in criteria)
    wall = time.time() - t0
    echo(f"{n_pass}/{len(criteria)} criteria passed in {wall:.1f} s "
         f"(tier={tier}, seed={seed}); theorems covered: {', '.join(covered)}")
    summary = {
        "tier": tier,
        "seed": seed,
        "criteria": [{"id": c.cid, "theorem": c.theorem, "name": c.name,
                      "pass": c.passed, "value": c.value, "target": c.target,
                      "tol": c.tol_text, "detail": c.detail} for c in criteria],
        "theorems_covered": covered,
        "theorems_missing": missing,
        "experiments": names,
        "passed": n_pass == len(criteria),
        "wallclock_s": round(wall, 2),
    }
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, f"acceptance_{tier}.json"), "w") as fh:
            json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return summary
