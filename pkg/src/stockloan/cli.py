"""Command-line surface: price contracts, sweep parameters, reproduce the
rational-values table, validate the transform against Monte Carlo, and dump
root diagnostics.

All data goes to stdout (CSV numbers carry 17 significant digits so parsing
and re-emitting is byte-exact); diagnostics go to stderr. Exit codes: 0 on
success, 2 when a parameter violates a standing assumption, 3 on a numerical
failure, 4 when Monte Carlo validation rejects the analytic values.
"""

from __future__ import annotations

import functools
import json
import math
import sys

import click

from . import __version__
from .errors import (
    NUMERICAL_ERRORS,
    DomainError,
    FinitenessViolation,
    PoleEvaluation,
    ValidationError,
)
from .mc import McConfig, simulate_exit_expectation
from .model import JumpParams, LevyModel, MarketParams, drifted_exponent, exponent_minimum
from .passage import BarrierProblem, expected_discounted_payoff
from .payoff import call_payoff_vector
from .pricing import value_client
from .roots import solve_roots

#: Baseline contract: the double-exponential default parameter set.
DEFAULT_CONFIG: dict = {
    "r": 0.05,
    "delta": 0.02,
    "sigma": 0.15,
    "gamma": 0.07,
    "q": 80.0,
    "d": 80.0 / 90.0,
    "lambda": 0.5,
    "p": [0.09],
    "eta": [2.3],
    "qw": [0.91],
    "theta": [1.8],
    "s0": 100.0,
    "grid_n": 999,
    "refine": True,
}

_SCALAR_KEYS = ("r", "delta", "sigma", "gamma", "q", "d", "lambda", "s0")
_LIST_KEYS = ("p", "eta", "qw", "theta")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _load_config(path: str | None) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        unknown = set(data) - set(DEFAULT_CONFIG)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    return cfg


def _apply_sets(cfg: dict, sets: tuple[str, ...]) -> None:
    for item in sets:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ValidationError(f"--set expects KEY=VALUE, got {item!r}")
        if key in _SCALAR_KEYS:
            cfg[key] = float(raw)
        elif key in _LIST_KEYS:
            cfg[key] = [float(v) for v in raw.split(",") if v]
        elif key == "grid_n":
            cfg[key] = int(raw)
        elif key == "refine":
            cfg[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            raise ValidationError(f"unknown config key {key!r}")


def _build_model(cfg: dict) -> tuple[LevyModel, float]:
    market = MarketParams(
        r=cfg["r"], delta=cfg["delta"], sigma=cfg["sigma"],
        gamma=cfg["gamma"], q=cfg["q"], d=cfg["d"],
    )
    jumps = JumpParams(
        lam=cfg["lambda"], p=cfg["p"], eta=cfg["eta"],
        qw=cfg["qw"], theta=cfg["theta"],
    )
    s0 = float(cfg["s0"])
    if s0 <= 0.0:
        raise ValidationError(f"initial collateral must satisfy s0 > 0, got {s0}")
    return LevyModel(market, jumps), math.log(s0)


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValidationError, DomainError, PoleEvaluation, FinitenessViolation) as exc:
            click.echo(f"validation error: {exc}", err=True)
            sys.exit(2)
        except NUMERICAL_ERRORS as exc:
            click.echo(f"numerical error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _common_options(fn):
    fn = click.option(
        "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
        envvar="STOCKLOAN_CONFIG", default=None,
        help="JSON config file (defaults to the built-in baseline; "
             "STOCKLOAN_CONFIG is honoured).",
    )(fn)
    fn = click.option(
        "--set", "sets", multiple=True, metavar="KEY=VALUE",
        help="Override a config value (lists comma-separated, e.g. eta=2.3,4).",
    )(fn)
    fn = click.option(
        "--format", "fmt", type=click.Choice(["human", "csv", "json"]), default="human",
        show_default=True, help="Output format.",
    )(fn)
    fn = click.option("--grid-n", type=int, default=None, help="Threshold grid resolution.")(fn)
    fn = click.option("--no-refine", is_flag=True, help="Disable golden-section refinement.")(fn)
    return fn


def _resolve(config_path, sets, grid_n, no_refine) -> dict:
    cfg = _load_config(config_path)
    _apply_sets(cfg, sets)
    if grid_n is not None:
        cfg["grid_n"] = int(grid_n)
    if no_refine:
        cfg["refine"] = False
    return cfg


@click.group()
@click.version_option(version=__version__, prog_name="stockloan")
def main() -> None:
    """Stock-loan pricing under a hyper-exponential jump-diffusion."""


@main.command("price")
@_common_options
@_handle_errors
def cmd_price(config_path, sets, fmt, grid_n, no_refine) -> None:
    """Price the contract: client value, lender value, rational premium."""
    cfg = _resolve(config_path, sets, grid_n, no_refine)
    model, x = _build_model(cfg)
    res = value_client(model, x, grid_n=cfg["grid_n"], refine=cfg["refine"])
    s0 = float(cfg["s0"])
    lender = s0 - res.v
    premium = max(cfg["q"] - lender, 0.0)
    if fmt == "human":
        click.echo(f"client value v        {res.v:.2f}")
        click.echo(f"lender value u(x)     {lender:.2f}")
        click.echo(f"rational premium c    {premium:.2f}")
        if res.u_star is None:
            click.echo("optimal threshold     immediate settlement")
        else:
            click.echo(f"optimal threshold     {res.u_star:.6f}")
        click.echo(f"grid_n={res.grid_n} refined={res.refined} "
                   f"condition_worst={res.condition_worst} clamp={res.clamp}", err=True)
    elif fmt == "csv":
        click.echo("v,lender_u,premium_c,u_star")
        u_star = "" if res.u_star is None else _fmt(res.u_star)
        click.echo(f"{_fmt(res.v)},{_fmt(lender)},{_fmt(premium)},{u_star}")
    else:
        click.echo(json.dumps({
            "v": res.v,
            "lender_u": lender,
            "premium_c": premium,
            "u_star": res.u_star,
            "grid_n": res.grid_n,
            "refined": res.refined,
            "condition_worst": res.condition_worst,
            "clamp": res.clamp,
        }))


def _sweep_cfg(cfg: dict, vary: str, value: float) -> dict:
    out = dict(cfg)
    out["s0" if vary == "x" else vary] = value
    return out


@main.command("sweep")
@_common_options
@click.option("--vary", type=click.Choice(["x", "lambda", "q", "gamma"]), required=True,
              help="Parameter to sweep (x sweeps the collateral value e^x).")
@click.option("--from", "start", type=float, required=True, help="First value.")
@click.option("--to", "stop", type=float, required=True, help="Last value.")
@click.option("--points", type=int, default=21, show_default=True, help="Number of points.")
@_handle_errors
def cmd_sweep(config_path, sets, fmt, grid_n, no_refine, vary, start, stop, points) -> None:
    """Sweep one parameter; always emits CSV (failed rows carry an error column)."""
    cfg = _resolve(config_path, sets, grid_n, no_refine)
    if points < 1:
        raise ValidationError(f"--points must be >= 1, got {points}")
    values = [start + (stop - start) * i / (points - 1) for i in range(points)] if points > 1 else [start]
    click.echo("vary_value,v,lender_u,premium_c,u_star,error")
    for value in values:
        row_cfg = _sweep_cfg(cfg, vary, value)
        try:
            model, x = _build_model(row_cfg)
            res = value_client(model, x, grid_n=row_cfg["grid_n"], refine=row_cfg["refine"])
            lender = float(row_cfg["s0"]) - res.v
            premium = max(row_cfg["q"] - lender, 0.0)
            u_star = "" if res.u_star is None else _fmt(res.u_star)
            click.echo(f"{_fmt(value)},{_fmt(res.v)},{_fmt(lender)},{_fmt(premium)},{u_star},")
        except (ValidationError, FinitenessViolation, *NUMERICAL_ERRORS) as exc:
            click.echo(f"{_fmt(value)},,,,,{type(exc).__name__}")


@main.command("table")
@_common_options
@_handle_errors
def cmd_table(config_path, sets, fmt, grid_n, no_refine) -> None:
    """Rational lender values and premiums for both jump intensities over a
    grid of principals (the reference table of the engine; always CSV)."""
    cfg = _resolve(config_path, sets, grid_n, no_refine)
    click.echo("lambda,q,u,c,error")
    for lam in (1.0, 2.0):
        for q in range(30, 101, 10):
            row_cfg = dict(cfg)
            row_cfg["lambda"] = lam
            row_cfg["q"] = float(q)
            try:
                model, x = _build_model(row_cfg)
                res = value_client(model, x, grid_n=row_cfg["grid_n"], refine=row_cfg["refine"])
                lender = float(row_cfg["s0"]) - res.v
                premium = max(q - lender, 0.0)
                click.echo(f"{_fmt(lam)},{_fmt(q)},{_fmt(lender)},{_fmt(premium)},")
            except (ValidationError, FinitenessViolation, *NUMERICAL_ERRORS) as exc:
                click.echo(f"{_fmt(lam)},{_fmt(q)},,,{type(exc).__name__}")


#: Fixed validation suite: barrier problems priced both analytically and by
#: Monte Carlo. Entries override the baseline config and pin (h, H, x, alpha).
VALIDATION_CASES: tuple[tuple[str, dict, dict], ...] = (
    ("baseline", {}, {"h": math.log(90.0), "H": math.log(160.0), "x": math.log(100.0), "alpha": -0.02}),
    ("baseline_lam1", {"lambda": 1.0}, {"h": math.log(90.0), "H": math.log(160.0), "x": math.log(100.0), "alpha": -0.02}),
    ("baseline_lam2", {"lambda": 2.0}, {"h": math.log(90.0), "H": math.log(160.0), "x": math.log(100.0), "alpha": -0.02}),
    ("alpha_zero", {}, {"h": math.log(90.0), "H": math.log(160.0), "x": math.log(100.0), "alpha": 0.0}),
    ("two_up", {"lambda": 0.8, "p": [0.05, 0.04], "eta": [2.3, 4.0]},
     {"h": math.log(90.0), "H": math.log(160.0), "x": math.log(100.0), "alpha": -0.02}),
    ("two_down", {"lambda": 0.8, "qw": [0.5, 0.41], "theta": [1.5, 3.0]},
     {"h": math.log(90.0), "H": math.log(160.0), "x": math.log(100.0), "alpha": -0.02}),
    ("wide_corridor", {"q": 60.0},
     {"h": math.log(80.0), "H": math.log(200.0), "x": math.log(120.0), "alpha": -0.02}),
    ("high_vol", {"sigma": 0.30},
     {"h": math.log(90.0), "H": math.log(160.0), "x": math.log(100.0), "alpha": -0.02}),
    ("near_upper", {},
     {"h": math.log(90.0), "H": math.log(160.0), "x": math.log(150.0), "alpha": -0.02}),
    ("up_dominant", {"lambda": 1.0, "p": [0.6], "qw": [0.4]},
     {"h": math.log(90.0), "H": math.log(160.0), "x": math.log(100.0), "alpha": -0.02}),
)


@main.command("validate")
@_common_options
@click.option("--paths", type=int, default=200_000, show_default=True, help="Monte Carlo paths per case.")
@click.option("--seed", type=int, default=20240501, show_default=True, help="Monte Carlo seed.")
@click.option("--corrupt-analytic", is_flag=True, hidden=True,
              help="Self-test hook: perturb the analytic values so validation must fail.")
@_handle_errors
def cmd_validate(config_path, sets, fmt, grid_n, no_refine, paths, seed, corrupt_analytic) -> None:
    """Cross-check the analytic transform against the Monte Carlo oracle."""
    cfg = _resolve(config_path, sets, grid_n, no_refine)
    rows = []
    for name, overrides, prob in VALIDATION_CASES:
        case_cfg = dict(cfg)
        case_cfg.update(overrides)
        model, _ = _build_model(case_cfg)
        problem = BarrierProblem(h=prob["h"], H=prob["H"], x=prob["x"], alpha=prob["alpha"])
        roots = solve_roots(model, problem.alpha)
        fvec = call_payoff_vector(model.market.q, problem.h, problem.H, model.jumps)
        analytic = expected_discounted_payoff(problem, roots, fvec)
        if corrupt_analytic:
            analytic *= 1.25
        mc_cfg = McConfig(paths=paths, seed=seed)
        res = simulate_exit_expectation(model, problem.h, problem.H, problem.x, problem.alpha, mc_cfg)
        z = (analytic - res.estimate) / res.stderr if res.stderr > 0 else math.inf
        rows.append((name, analytic, res.estimate, res.stderr, z, res.truncated_fraction))

    if fmt == "csv":
        click.echo("name,analytic,mc,stderr,z,truncated_fraction")
        for name, analytic, est, se, z, tf in rows:
            click.echo(f"{name},{_fmt(analytic)},{_fmt(est)},{_fmt(se)},{_fmt(z)},{_fmt(tf)}")
    elif fmt == "json":
        click.echo(json.dumps([
            {"name": n, "analytic": a, "mc": e, "stderr": s, "z": z, "truncated_fraction": tf}
            for n, a, e, s, z, tf in rows
        ]))
    else:
        click.echo(f"{'case':<16}{'analytic':>12}{'mc':>12}{'stderr':>11}{'z':>8}{'trunc':>8}")
        for name, analytic, est, se, z, tf in rows:
            click.echo(f"{name:<16}{analytic:>12.6f}{est:>12.6f}{se:>11.6f}{z:>8.2f}{tf:>8.2g}")

    worst = max(abs(z) for _, _, _, _, z, _ in rows)
    if worst > 3.0:
        click.echo(f"validation FAILED: worst |z| = {worst:.2f} > 3", err=True)
        sys.exit(4)
    click.echo(f"validation passed: worst |z| = {worst:.2f}", err=True)


@main.command("roots")
@_common_options
@_handle_errors
def cmd_roots(config_path, sets, fmt, grid_n, no_refine) -> None:
    """Dump the discount argument, exponent minimum, and root diagnostics."""
    cfg = _resolve(config_path, sets, grid_n, no_refine)
    model, _ = _build_model(cfg)
    if model.jumps.lam == 0.0 or model.jumps.n == 0:
        click.echo("root machinery bypassed: no down-jump risk, the loan prices in closed form")
        return
    alpha = model.market.r - model.market.gamma
    x_star, m_min = exponent_minimum(model, drifted=True)
    roots = solve_roots(model, alpha)

    entries = [("beta", i, b) for i, b in enumerate(roots.beta)]
    entries += [("gamma", j, -g) for j, g in enumerate(roots.gamma_mag)]
    if fmt == "json":
        click.echo(json.dumps({
            "alpha": alpha,
            "exponent_minimum": m_min,
            "minimizer": x_star,
            "roots": [
                {"kind": k, "index": i, "root": r, "residual": drifted_exponent(model, r) - alpha}
                for k, i, r in entries
            ],
            "interlacing_ok": roots.interlacing_ok(),
        }))
    elif fmt == "csv":
        click.echo("kind,index,root,residual")
        for kind, i, r in entries:
            click.echo(f"{kind},{i},{_fmt(r)},{_fmt(drifted_exponent(model, r) - alpha)}")
    else:
        click.echo(f"alpha = r - gamma = {alpha:.6g}")
        click.echo(f"exponent minimum M = {m_min:.6g} at x* = {x_star:.6g}")
        for kind, i, r in entries:
            res = drifted_exponent(model, r) - alpha
            click.echo(f"  {kind}[{i}] = {r: .12g}   residual = {res: .3g}")
        click.echo(f"interlacing {'OK' if roots.interlacing_ok() else 'VIOLATED'}")


if __name__ == "__main__":
    main()
