"""Command-line front end.

Every file written with ``--out`` is accompanied by ``<out>.manifest.json``
holding the resolved parameters and SHA-256 checksums of the outputs.
Passing that manifest back through ``--config`` reproduces the outputs
byte for byte.  Exit codes: 0 success, 1 usage, 2 verification failure,
3 divergent or non-normalizable model.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .applications import (
    BSParams,
    InvestParams,
    bs_marginal_cdf,
    bs_mean,
    growth_ratio,
    q0,
    q_ballistic,
    q_ballistic_smallmu,
    q_mu,
)
from .errors import DivergentIntegral, InvalidParameter, NonConvergence, NotNormalizable, NumericalBlowup
from .montecarlo import (
    SimConfig,
    ballistic_sde_sample,
    exact_ballistic_sample,
    histogram_mode_count,
    ks_distance,
    l1_distance,
    simulate_coupled,
)
from .process import check_risk, hermite_family, linear_drift
from .stationary import (
    cep_classify,
    curvature_origin,
    mode_count,
    stationary_ballistic_marginal,
)
from .verifier import Tolerances, VerifyGrid, cdf_P, check_proposition1, default_grid, hermite_grid, verify_ballistic

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_DIVERGENT = 3

# keys never stored in a manifest: they do not change the outputs
_VOLATILE = {"out", "config", "workers", "command", "func"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(v: float) -> str:
    return format(float(v), ".17g")


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_num(v) for v in row) + "\n")
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _emit(args, outputs: dict[str, str], primary: str) -> None:
    """Write outputs next to ``--out`` plus a manifest, or print the primary one."""
    if args.out is None:
        sys.stdout.write(outputs[primary])
        return
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    names = {}
    for suffix, text in outputs.items():
        path = out if suffix == primary else out.with_name(out.name + suffix)
        path.write_text(text)
        names[path.name] = _sha256(text)
    params = {k.rstrip("_"): v for k, v in sorted(vars(args).items()) if k not in _VOLATILE}
    manifest = {
        "command": args.command,
        "parameters": params,
        "seed": params.get("seed"),
        "version": __version__,
        "outputs": names,
    }
    out.with_name(out.name + ".manifest.json").write_text(_json(manifest))


# ---------------------------------------------------------------------------
# subcommands


def cmd_figure1(args) -> int:
    lams = [check_risk(v) for v in args.lambda_]
    ts = args.t if args.t else list(np.linspace(0.1, 2.0, 40))
    xs = args.x if args.x else list(np.linspace(-8.0, 8.0, 161))
    if any(not t > 0 for t in ts):
        raise InvalidParameter("all t must be positive")
    rows = []
    for lam in lams:
        for t in ts:
            ps = cdf_P(lam, t, np.asarray(xs, dtype=float))
            rows.extend((lam, t, x, p) for x, p in zip(xs, ps))
    if args.format == "json":
        text = _json([dict(zip(("lambda", "t", "x", "P"), r)) for r in rows])
    else:
        text = _csv(["lambda", "t", "x", "P"], rows)
    _emit(args, {"main": text}, "main")
    return EXIT_OK


def figure2_rows(lambdas, ts, x0: float, mu: float, sigma: float, convention: str) -> list[tuple]:
    rows = []
    for lam in lambdas:
        p = BSParams(x0=x0, mu=mu, sigma=sigma, lam=lam, moment_convention=convention)
        rows.extend((lam, t, bs_mean(t, p)) for t in ts)
    return rows


def cmd_figure2(args) -> int:
    ts = args.t if args.t else list(np.linspace(0.0, 1.0, 101))
    if any(t < 0 for t in ts):
        raise InvalidParameter("all t must be non-negative")
    rows = figure2_rows(args.lambda_, ts, args.x0, args.mu, args.sigma, args.convention)
    if args.format == "json":
        text = _json([dict(zip(("lambda", "t", "mean"), r)) for r in rows])
    else:
        text = _csv(["lambda", "t", "mean"], rows)
    _emit(args, {"main": text}, "main")
    return EXIT_OK


def _single(values, name):
    if len(values) != 1:
        raise InvalidParameter(f"{name} takes exactly one value for this command")
    return float(values[0])


def cmd_verify(args) -> int:
    lam = _single(args.lambda_, "--lambda")
    t = _single(args.t or [1.0], "--t")
    if not lam > 0:
        raise InvalidParameter("verify needs lambda > 0 (the lambda-difference quotient is undefined at 0)")
    if not t > 0:
        raise InvalidParameter("verify needs t > 0")
    if args.family == "hermite":
        base = hermite_grid(t, args.n_x)
    else:
        base = default_grid(lam, t, args.n_x)
    half = args.half_width
    grid = base if half is None else VerifyGrid(-half, half, args.n_x, tail_guard=base.tail_guard)
    if args.family == "hermite":
        report = check_proposition1(hermite_family(lam), t, grid)
    else:
        report = verify_ballistic(lam, t, grid)
    checks = Tolerances().check(report)
    passed = all(checks.values())
    payload = {
        "report": report.to_dict(),
        "checks": checks,
        "pass": passed,
        "grid": {"x_lo": grid.x_lo, "x_hi": grid.x_hi, "n_x": grid.n_x},
    }
    _emit(args, {"main": _json(payload)}, "main")
    return EXIT_OK if passed else EXIT_VERIFY


def _simulate_ballistic(args):
    lam = _single(args.lambda_, "--lambda")
    t = _single(args.t or [1.0], "--t")
    if args.method == "exact":
        s = exact_ballistic_sample(lam, t, args.paths, args.seed, workers=args.workers)
    else:
        s = ballistic_sde_sample(lam, SimConfig(args.dt, t, args.paths, args.seed), workers=args.workers)
    stats = {
        "process": "ballistic",
        "method": args.method,
        "provenance": s.provenance,
        "n": len(s),
        "mean": s.mean(),
        "var": s.var(),
        "var_theory": t + 2.0 * lam * t * t,
        "ks": ks_distance(s, lambda x: cdf_P(lam, t, x)),
    }
    return s.values, stats


def _simulate_coupled(args):
    lam = _single(args.lambda_, "--lambda")
    spec = linear_drift(-args.k, args.sigma)
    cfg = SimConfig(args.dt, args.horizon, args.paths, args.seed)
    hist = simulate_coupled(spec, lam, cfg, bins=args.bins, bernoulli_scale=args.bernoulli_scale, workers=args.workers)
    cosh_form = stationary_ballistic_marginal(spec, lam)
    sum_form = stationary_ballistic_marginal(spec, lam, form="sum", bernoulli_scale=args.bernoulli_scale)
    s = hist.samples
    stats = {
        "process": "coupled",
        "provenance": s.provenance,
        "n": len(s),
        "mean": s.mean(),
        "var": s.var(),
        "modes": histogram_mode_count(hist),
        "l1_cosh_form": l1_distance(hist, cosh_form, cosh_form.support),
        "l1_sum_form": l1_distance(hist, sum_form, sum_form.support),
        "modes_cosh_form": mode_count(cosh_form),
        "modes_sum_form": mode_count(sum_form),
    }
    return s.values, stats


def _simulate_bs(args):
    lam = _single(args.lambda_, "--lambda")
    t = _single(args.t or [1.0], "--t")
    p = BSParams(x0=args.x0, mu=args.mu, sigma=args.sigma, lam=lam, moment_convention="half-variance")
    y = exact_ballistic_sample(lam, t, args.paths, args.seed, workers=args.workers)
    values = args.x0 * np.exp(args.mu * t + args.sigma * y.values)
    n = values.size
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1)) / math.sqrt(n)
    stats = {
        "process": "bs",
        "provenance": y.provenance,
        "n": n,
        "mean": mean,
        "mean_se": se,
        "mean_theory_half_variance": bs_mean(t, p),
        "ks": ks_distance(values, lambda x: bs_marginal_cdf(x, t, p)),
    }
    return values, stats


def cmd_simulate(args) -> int:
    runner = {"ballistic": _simulate_ballistic, "coupled": _simulate_coupled, "bs": _simulate_bs}[args.process]
    values, stats = runner(args)
    samples = _csv(["value"], ((v,) for v in values))
    _emit(args, {"main": samples, ".stats.json": _json(stats)}, "main" if args.out else ".stats.json")
    return EXIT_OK


def cmd_invest(args) -> int:
    p = InvestParams(
        r=args.r,
        delta=args.delta,
        alpha=args.alpha,
        omega=args.omega,
        theta=args.theta,
        sigma=args.sigma,
        mu=args.mu,
        p_t=args.p_t,
        h=args.h,
    )
    payload = {
        "inputs": {k: getattr(p, k) for k in ("r", "delta", "alpha", "omega", "theta", "sigma", "mu", "p_t", "h")},
        "discount": p.discount,
        "q0": q0(p),
        "q_mu_plus": q_mu(p, 1),
        "q_mu_minus": q_mu(p, -1),
        "q_ballistic": q_ballistic(p),
        "q_ballistic_smallmu": q_ballistic_smallmu(p),
    }
    _emit(args, {"main": _json(payload)}, "main")
    return EXIT_OK


def cmd_price(args) -> int:
    lam = _single(args.lambda_, "--lambda")
    ts = args.t or [1.0]
    p = BSParams(x0=args.x0, mu=args.mu, sigma=args.sigma, lam=lam, moment_convention=args.convention)
    p_base = BSParams(x0=args.x0, mu=args.mu, sigma=args.sigma, lam=0.0, moment_convention=args.convention)
    rows = [
        {"t": t, "mean": bs_mean(t, p), "mean_lambda0": bs_mean(t, p_base), "ratio": growth_ratio(t, args.sigma, lam)}
        for t in ts
    ]
    payload = {
        "inputs": {"x0": args.x0, "mu": args.mu, "sigma": args.sigma, "lambda": lam, "convention": args.convention},
        "rows": rows,
    }
    _emit(args, {"main": _json(payload)}, "main")
    return EXIT_OK


def cmd_cep(args) -> int:
    if args.b is None or args.lambda_ is None:
        raise UsageError("cep needs --b and --lambda")
    lam = _single(args.lambda_, "--lambda")
    v = cep_classify(args.b, lam)
    payload = {"b": args.b, "lambda": lam, "holds": v.holds, "margin": v.margin}
    _emit(args, {"main": _json(payload)}, "main")
    return EXIT_OK


def cmd_stationary(args) -> int:
    lam = _single(args.lambda_, "--lambda")
    spec = linear_drift(-args.k, args.sigma)
    d = stationary_ballistic_marginal(spec, lam, form=args.form, bernoulli_scale=args.bernoulli_scale)
    xs = d.grid(args.grid_n)
    if args.format == "csv":
        text = _csv(["x", "density"], zip(xs, d(xs)))
    else:
        text = _json(
            {
                "lambda": lam,
                "k": args.k,
                "sigma": args.sigma,
                "form": args.form,
                "norm": d.norm,
                "support": list(d.support),
                "modes": mode_count(d, args.grid_n),
                "curvature_origin": curvature_origin(spec, lam),
            }
        )
    _emit(args, {"main": text}, "main")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, formats=("json",)) -> None:
    p.add_argument("--out", default=None, help="output path; a manifest is written beside it")
    p.add_argument("--config", default=None, help="JSON file of flag values or a manifest to replay")
    p.add_argument("--format", choices=formats, default=formats[0])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dmps", description="Ballistic-noise risk toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("figure1", help="CDF surface P(x, t) for several lambda")
    p.add_argument("--lambda", dest="lambda_", type=float, nargs="+", default=[1.0, 2.0, 5.0, 10.0])
    p.add_argument("--t", type=float, nargs="+", default=None, help="default: 40 points on [0.1, 2]")
    p.add_argument("--x", type=float, nargs="+", default=None, help="default: 161 points on [-8, 8]")
    _common(p, ("csv", "json"))
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("figure2", help="mean asset price under ballistic Black-Scholes dynamics")
    p.add_argument("--lambda", dest="lambda_", type=float, nargs="+", default=[0.0, 1.0, 2.0, 5.0, 10.0])
    p.add_argument("--t", type=float, nargs="+", default=None, help="default: 101 points on [0, 1]")
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--convention", choices=("paper", "half-variance"), default="paper")
    _common(p, ("csv", "json"))
    p.set_defaults(func=cmd_figure2)

    p = sub.add_parser("verify", help="check the mean-preserving spread conditions at (lambda, t)")
    p.add_argument("--lambda", dest="lambda_", type=float, nargs="+", default=[2.0])
    p.add_argument("--t", type=float, nargs="+", default=None)
    p.add_argument("--family", choices=("ballistic", "hermite"), default="ballistic")
    p.add_argument("--n-x", type=int, default=2048)
    p.add_argument("--half-width", type=float, default=None, help="override the automatic x-range")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo samples and summary statistics")
    p.add_argument("--process", choices=("ballistic", "coupled", "bs"), default="ballistic")
    p.add_argument("--method", choices=("exact", "euler"), default="exact")
    p.add_argument("--lambda", dest="lambda_", type=float, nargs="+", default=[2.0])
    p.add_argument("--t", type=float, nargs="+", default=None)
    p.add_argument("--k", type=float, default=1.0, help="restoring rate of the coupled drift b(x) = -k x")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--horizon", type=float, default=50.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--bins", type=int, default=80)
    p.add_argument("--bernoulli-scale", choices=("sigma", "unit"), default="sigma")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--workers", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("invest", help="marginal value of installed capital")
    p.add_argument("--r", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=2.0)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--p-t", type=float, default=1.0)
    p.add_argument("--h", type=float, default=None, help="profit scale; required when omega is 0")
    _common(p)
    p.set_defaults(func=cmd_invest)

    p = sub.add_parser("price", help="mean asset price and growth ratio")
    p.add_argument("--lambda", dest="lambda_", type=float, nargs="+", default=[1.0])
    p.add_argument("--t", type=float, nargs="+", default=None)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--convention", choices=("paper", "half-variance"), default="paper")
    _common(p)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("cep", help="certainty-equivalence classifier")
    # required, but checked after --config is merged so a file can supply them
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--lambda", dest="lambda_", type=float, nargs="+", default=None)
    _common(p)
    p.set_defaults(func=cmd_cep)

    p = sub.add_parser("stationary", help="stationary marginal under ballistic forcing")
    p.add_argument("--lambda", dest="lambda_", type=float, nargs="+", default=[1.5])
    p.add_argument("--k", type=float, default=1.0, help="restoring rate of b(x) = -k x")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--form", choices=("cosh", "sum"), default="cosh")
    p.add_argument("--bernoulli-scale", choices=("sigma", "unit"), default="unit")
    p.add_argument("--grid-n", type=int, default=4096)
    _common(p, ("json", "csv"))
    p.set_defaults(func=cmd_stationary)
    parser.subcommands = sub.choices
    return parser


def _load_config(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    if "parameters" in doc:
        params = dict(doc["parameters"])
        params["command"] = doc.get("command")
        return params
    return doc


def _apply_config(parser: argparse.ArgumentParser, argv: list[str], args) -> argparse.Namespace:
    cfg = _load_config(args.config)
    cmd = cfg.pop("command", None)
    if cmd is not None and cmd != args.command:
        raise UsageError(f"config is for command {cmd!r}, not {args.command!r}")
    sub = parser.subcommands[args.command]
    known = set(vars(args))
    defaults = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        dest = "lambda_" if dest == "lambda" else dest
        if dest not in known or dest in _VOLATILE:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if dest in ("lambda_", "t", "x") and value is not None and not isinstance(value, list):
            value = [value]
        defaults[dest] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            args = _apply_config(parser, argv, args)
        return args.func(args)
    except UsageError as exc:
        print(f"dmps: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergentIntegral, NotNormalizable, NumericalBlowup) as exc:
        print(f"dmps: divergent model: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except (InvalidParameter, NonConvergence) as exc:
        print(f"dmps: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
