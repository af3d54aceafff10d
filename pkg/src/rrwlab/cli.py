"""Command-line interface: rrw <subcommand>.

Subcommands mirror the experiment families (weyl, szclt, decor, nodal,
negmom, tightness, crofton, kacrice), plus kernel/field table dumps and
the acceptance runner.  All randomness derives from --seed; outputs embed
the config hash for reproducibility checks.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .harness import ExperimentConfig, acceptance_suite, run, verify_report_dir
from .kernels import KernelSpec, Regime, eval_B, eval_S, kernel_asymptotic
from .manifolds import ManifoldSpec, chart_at, enumerate_spectrum, uniform_point
from .rng import substream
from .wavefields import RescaledFieldView, eval_rescaled, sample_wave


def _parse_lambdas(text: str) -> tuple:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _load_config_file(path: str) -> dict:
    with open(path) as fh:
        content = fh.read()
    try:
        return json.loads(content)
    except json.JSONDecodeError:
        out = {}
        for line in content.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
        return out


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default all)")
    parser.add_argument("--out", default=None, help="output directory or file")
    parser.add_argument("--config", default=None, help="key=value or JSON config file")


def _merged(args: argparse.Namespace, key: str, fallback):
    val = getattr(args, key, None)
    if val is not None:
        return val
    if args.config:
        cfg = _load_config_file(args.config)
        if key in cfg:
            raw = cfg[key]
            if isinstance(fallback, tuple):
                return _parse_lambdas(raw) if isinstance(raw, str) else tuple(raw)
            if fallback is None:
                return raw
            return type(fallback)(raw)
    return fallback


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rrw",
                                 description="Random-wave laboratory experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernels", help="tabulate a limit kernel vs its asymptotic")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--regime", default="largeband")
    p.add_argument("--rmax", type=float, default=50.0)
    p.add_argument("--n", type=int, default=256)
    _common(p)

    p = sub.add_parser("weyl", help="eigenvalue counts vs the Weyl prediction")
    p.add_argument("--manifold", default="torus2")
    p.add_argument("--lambda-list", dest="lambdas", type=_parse_lambdas, default=None)
    _common(p)

    p = sub.add_parser("field", help="dump one rescaled wave draw on a chart grid")
    p.add_argument("--manifold", default="torus2")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--regime", default="largeband")
    p.add_argument("--grid", type=int, default=128)
    _common(p)

    p = sub.add_parser("nodal", help="nodal length / zero count measurements")
    p.add_argument("--manifold", default="torus2")
    p.add_argument("--regime", default="largeband")
    p.add_argument("--lambda-list", dest="lambdas", type=_parse_lambdas, default=None)
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--grid", type=int, default=None)
    _common(p)

    p = sub.add_parser("nodal-measure", help="weighted nodal integrals")
    p.add_argument("--manifold", default="torus2")
    p.add_argument("--lambda-list", dest="lambdas", type=_parse_lambdas, default=None)
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--grid", type=int, default=None)
    _common(p)

    for name, help_text in [("szclt", "characteristic-function CLT and its rate"),
                            ("decor", "spatial decorrelation of the covariance")]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--manifold", default="torus2")
        p.add_argument("--lambda-list", dest="lambdas", type=_parse_lambdas, default=None)
        p.add_argument("--replicas", type=int, default=None)
        _common(p)

    p = sub.add_parser("negmom", help="negative moments of the rescaled field")
    p.add_argument("--manifold", default="torus2")
    p.add_argument("--lambda-list", dest="lambdas", type=_parse_lambdas, default=None)
    p.add_argument("--nu", type=float, default=None)
    _common(p)

    p = sub.add_parser("tightness", help="derivative moments and local nodal moments")
    p.add_argument("--manifold", default="torus2")
    p.add_argument("--lambda-list", dest="lambdas", type=_parse_lambdas, default=None)
    p.add_argument("--replicas", type=int, default=None)
    _common(p)

    p = sub.add_parser("crofton", help="vertex-segment lower bound on nodal patches")
    p.add_argument("--manifold", default="torus2")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--patches", type=int, default=None)
    _common(p)

    p = sub.add_parser("kacrice", help="limit-field gradient moments")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--regime", default="largeband")
    p.add_argument("--samples", type=int, default=None)
    _common(p)

    p = sub.add_parser("accept", help="run the acceptance criteria")
    p.add_argument("--tier", choices=("fast", "full"), default="fast")
    _common(p)

    p = sub.add_parser("verify-outputs", help="check config hashes in a report dir")
    p.add_argument("dir")
    return ap


def _cmd_kernels(args) -> int:
    seed = _merged(args, "seed", 0)
    spec = KernelSpec(args.dim, Regime.parse(args.regime))
    rs = np.linspace(0.0, args.rmax, args.n)
    exact = eval_B(spec.dim, rs) if spec.regime is Regime.LARGE_BAND else eval_S(spec.dim, rs)
    lines = ["r,exact,asymptotic,abs_err"]
    for r, e in zip(rs, exact):
        r, e = float(r), float(e)
        if r >= 10.0:
            a = float(kernel_asymptotic(spec, r))
            lines.append(f"{r!r},{e!r},{a!r},{abs(e - a)!r}")
        else:
            lines.append(f"{r!r},{e!r},,")
    text = f"# seed={seed} config_hash=kernels-table\n" + "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_field(args) -> int:
    seed = _merged(args, "seed", 0)
    m = ManifoldSpec.parse(args.manifold)
    basis = enumerate_spectrum(m, args.lam, Regime.parse(args.regime))
    w = sample_wave(basis, seed)
    x = uniform_point(m, substream(seed, "field-base"))
    view = RescaledFieldView(w, chart_at(m, x))
    half = view.guard / math.sqrt(2.0) * 0.999
    g = np.linspace(-half, half, args.grid)
    V = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    vals = eval_rescaled(view, V)
    lines = ["v1,v2,value"]
    lines += [f"{float(v[0])!r},{float(v[1])!r},{float(val)!r}"
              for v, val in zip(V, vals)]
    text = f"# seed={seed} config_hash=field-table\n" + "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _experiment_config(args, experiment: str, defaults: dict) -> ExperimentConfig:
    lambdas = _merged(args, "lambdas", defaults.get("lambdas", ()))
    if "lam" in defaults and getattr(args, "lam", None) is not None:
        lambdas = (args.lam,)
    elif "lam" in defaults and not lambdas:
        lambdas = (defaults["lam"],)
    return ExperimentConfig(
        experiment=experiment,
        manifold=getattr(args, "manifold", defaults.get("manifold", "torus2")),
        regime=getattr(args, "regime", None) or defaults.get("regime", "largeband"),
        lambdas=lambdas,
        replicas=_merged(args, "replicas", defaults.get("replicas", 20)),
        grid_n=_merged(args, "grid", defaults.get("grid", 0)),
        nu=_merged(args, "nu", defaults.get("nu", 0.012)),
        mc_samples=_merged(args, "samples", defaults.get("samples", 0)),
        seed=_merged(args, "seed", 0),
        threads=_merged(args, "threads", 0),
        out_dir=_merged(args, "out", None),
    )


_DEFAULT_LADDER = tuple(2.0 * math.pi * m for m in (15, 30, 60, 120))

_CMD_DEFAULTS = {
    "weyl": {"lambdas": tuple(2.0 * math.pi * m for m in (10, 20, 40, 80))},
    "szclt": {"lambdas": _DEFAULT_LADDER, "replicas": 128},
    "decor": {"lambdas": _DEFAULT_LADDER},
    "nodal": {"lambdas": (2.0 * math.pi * 40,), "replicas": 20},
    "nodal-measure": {"lambdas": (2.0 * math.pi * 40,), "replicas": 20},
    "negmom": {"lambdas": _DEFAULT_LADDER},
    "tightness": {"lambdas": _DEFAULT_LADDER, "replicas": 200},
    "crofton": {"lam": 2.0 * math.pi * 30, "replicas": 100},
    "kacrice": {"manifold": "torus2", "samples": 1_000_000},
}


def main(argv=None) -> int:
    try:
        return _dispatch(build_parser().parse_args(argv))
    except (ValueError, OSError) as exc:
        print(f"rrw: error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "kernels":
        return _cmd_kernels(args)
    if cmd == "field":
        return _cmd_field(args)
    if cmd == "accept":
        summary = acceptance_suite(tier=args.tier, seed=_merged(args, "seed", 0),
                                   threads=_merged(args, "threads", 0) or 0,
                                   out_dir=_merged(args, "out", None))
        return 0 if summary["passed"] else 1
    if cmd == "verify-outputs":
        verify_report_dir(args.dir)
        print(f"config hashes consistent in {args.dir}")
        return 0
    defaults = dict(_CMD_DEFAULTS.get(cmd, {}))
    if cmd == "crofton":
        if getattr(args, "patches", None) is not None:
            defaults["replicas"] = args.patches
        else:
            defaults.setdefault("replicas", 100)
    cfg = _experiment_config(args, cmd, defaults)
    report = run(cfg)
    for c in report.result.criteria:
        print(c.line())
    if report.result.rate is not None:
        print(f"rate: slope {report.result.rate.slope:.4f}, r2 {report.result.rate.r2:.4f}")
    if cfg.out_dir:
        if cfg.out_dir.endswith(".csv"):
            print(f"wrote {cfg.out_dir} and {cfg.out_dir[:-4]}.json")
        else:
            print(f"wrote {cfg.out_dir}/{cfg.experiment}.csv and .json")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
