"""Command-line front end.

    hardylab exponents --n N --p P --mu MU
    hardylab solve CONFIG [--out DIR]
    hardylab verify CHECK CONFIG [--out DIR] [--jobs K]

Exit codes: 0 success/pass, 1 inequality failed, 2 configuration or
parameter error, 3 solver failure, 4 check infrastructure failure.
Output files go to ``--out``, else ``[output] dir``, else
``$HARDYLAB_OUTPUT_DIR``, else the working directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .closed_forms import BubbleFamily, aubin_talenti, profile_residual, terracini
from .config import load_config
from .errors import (
    ConfigError,
    DomainError,
    GridCoverage,
    GridUnderflow,
    InsufficientRange,
    NewtonDiverged,
    NonConvergentLimit,
    OutOfRange,
    QuadratureFailure,
    SingularJacobian,
    SolverError,
)
from .exponents import ProblemParams, QSpec, char_poly, gamma_roots, validate
from .profile import RadialProfile, log_grid
from .radial_solver import ShootingConfig, decay_diagnostics, flux_conservation_residual, shoot
from .regularized_bvp import BVPProblem, NewtonConfig, power_manufactured, solve_bvp
from .verification import (
    DEFAULT_BUDGET,
    build_moser_schedule,
    check_caccioppoli_average,
    check_epsilon_sweep,
    check_gradient_decay,
    check_interior_gradient_estimate,
    check_moser,
    check_scaling_constants,
    check_solution_decay,
    check_source_bound,
)

__all__ = ["main", "cmd_exponents", "cmd_solve", "cmd_verify", "CHECKS", "OUTPUT_ENV"]

OUTPUT_ENV = "HARDYLAB_OUTPUT_DIR"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SOLVER, EXIT_CHECK = 0, 1, 2, 3, 4

CHECKS = (
    "solution-decay",
    "gradient-decay",
    "scaling-constants",
    "caccioppoli",
    "source-bound",
    "interior-gradient",
    "moser",
    "epsilon-sweep",
)

_INFRA_ERRORS = (GridCoverage, GridUnderflow, InsufficientRange, QuadratureFailure, NonConvergentLimit, DomainError)
_SOLVER_ERRORS = (SolverError, NewtonDiverged, SingularJacobian)


class _Exit(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _err(msg):
    print(f"hardylab: error: {msg}", file=sys.stderr)


def _dumps(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _jsonable(x):
    from .verification import _jsonable as conv

    return conv(x)


# -- config to objects -----------------------------------------------------------


def _problem(cfg):
    sec = cfg.section("problem")
    for key in ("N", "p"):
        cfg.require("problem", key)
    params = ProblemParams(sec["N"], sec["p"], sec.get("mu", 0.0), QSpec.constant(sec.get("Q", 1.0)))
    params = validate(params)
    return params, gamma_roots(params)


def _shooting_config(cfg):
    try:
        return ShootingConfig(**cfg.section("shooting"))
    except ValueError as exc:
        raise ConfigError(f"[shooting]: {exc}") from None


def _closed_form(params, lam):
    if params.p != 2:
        raise ConfigError("closed_form profiles need p = 2")
    if params.q_spec.value != 1:
        raise ConfigError("closed_form profiles need Q = 1")
    if params.mu == 0:
        return aubin_talenti(params.N, lam)
    return terracini(params.N, params.mu, lam)


def _grid(sec, lo=1e-6, hi=1e6):
    try:
        return log_grid(sec.get("r_min", lo), sec.get("r_max", hi), sec.get("points_per_decade", 100))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"[profile] grid: {exc}") from None


def _source(cfg, params, exps):
    """Family or profile named by [profile] source (default shooting)."""
    sec = cfg.section("profile")
    kind = sec.get("source", "shooting")
    if kind == "closed_form":
        return _closed_form(params, sec.get("lam", 1.0))
    if kind == "synthetic":
        rate = sec.get("rate")
        if rate is None:
            raise ConfigError("[profile] source = synthetic needs 'rate'")
        r = _grid(sec, 1e-4, 1e4)
        return RadialProfile(r, r**-rate, -rate * r ** (-rate - 1), params, meta={"source": "synthetic", "rate": rate})
    if kind == "csv":
        return _read_profile_csv(sec.get("path"), params, cfg)
    return shoot(params, exps, _shooting_config(cfg))


def _read_profile_csv(path, params, cfg):
    """Profile from a CSV with header columns r, u, du (others ignored);
    a relative path is taken relative to the config file."""
    if not path:
        raise ConfigError("[profile] source = csv needs 'path'")
    path = Path(path)
    if not path.is_absolute() and cfg.path is not None:
        path = Path(cfg.path).parent / path
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read profile {path}: {exc.strerror}") from None
    try:
        cols = {k: np.array([float(row[k]) for row in rows]) for k in ("r", "u", "du")}
        return RadialProfile(cols["r"], cols["u"], cols["du"], params, meta={"source": "csv", "path": str(path)})
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"profile {path}: needs numeric columns r, u, du ({exc})") from None


def _bvp_problem(cfg, N, p):
    sec = dict(cfg.section("bvp"))
    eps = sec.get("epsilon", 0.0)
    annulus = sec.get("annulus", (1.0, 2.0))
    src = sec.get("source", 0.0)
    exact = None
    if src == "manufactured":
        exact, src = power_manufactured(N, p, eps, sec.get("power", 2.0))
    bv = sec.get("boundary_values")
    if bv is None:
        if exact is None:
            raise ConfigError("[bvp] boundary_values required unless source = manufactured")
        bv = (float(exact(annulus[0])), float(exact(annulus[1])))
    try:
        return BVPProblem(N, p, eps, tuple(annulus), tuple(bv), src), exact
    except ValueError as exc:
        raise ConfigError(f"[bvp]: {exc}") from None


def _newton(cfg):
    sec = cfg.section("bvp")
    return NewtonConfig(tol=sec.get("newton_tol", 1e-10), max_iter=sec.get("max_iter", 60))


def _output_dir(args, cfg=None):
    if getattr(args, "out", None):
        d = Path(args.out)
    elif cfg is not None and "dir" in cfg.section("output"):
        d = Path(cfg.section("output")["dir"])
    elif os.environ.get(OUTPUT_ENV):
        d = Path(os.environ[OUTPUT_ENV])
    else:
        d = Path.cwd()
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_csv(path, columns):
    names = list(columns)
    arrays = [np.asarray(columns[k], dtype=float) for k in names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*arrays):
            w.writerow([repr(float(v)) for v in row])


# -- commands --------------------------------------------------------------------


def cmd_exponents(args):
    params = validate(ProblemParams(args.n, args.p, args.mu, QSpec.constant(args.q)))
    ex = gamma_roots(params)
    out = {
        "N": params.N,
        "p": params.p,
        "mu": params.mu,
        "mu_bar": ex.mu_bar,
        "p_star": ex.p_star,
        "gamma1": ex.gamma1,
        "gamma2": ex.gamma2,
        "residuals": [
            float(char_poly(ex.gamma1, params.N, params.p, params.mu)),
            float(char_poly(ex.gamma2, params.N, params.p, params.mu)),
        ],
    }
    sys.stdout.write(_dumps(_jsonable(out)))
    return EXIT_OK


def _solve_bvp_cmd(cfg, outdir, prefix):
    N, p = cfg.require("problem", "N"), cfg.require("problem", "p")
    prob, exact = _bvp_problem(cfg, N, p)
    try:
        sol = solve_bvp(prob, cfg.section("bvp").get("grid_size", 200), _newton(cfg))
    except _SOLVER_ERRORS as exc:
        diag = getattr(exc, "diagnostics", {})
        (outdir / f"{prefix}summary.json").write_text(
            _dumps(_jsonable({"status": "solver-failure", "error": str(exc), "diagnostics": diag})), encoding="utf-8")
        raise _Exit(EXIT_SOLVER, f"solver failure: {exc}") from None
    prof = sol.profile
    csv_path = outdir / f"{prefix}profile.csv"
    _write_csv(csv_path, {"r": prof.grid, "u": sol.nodes, "du": prof.derivs, "w": sol.w_channel, "flux": sol.flux})
    summary = {
        "status": "ok",
        "solver": "bvp",
        "params": {"N": N, "p": p, "epsilon": prob.epsilon, "annulus": list(prob.annulus)},
        "newton_iters": sol.newton_iters,
        "final_residual": sol.final_residual,
        "csv": csv_path.name,
    }
    if exact is not None:
        summary["max_error_vs_manufactured"] = float(np.max(np.abs(sol.nodes - exact(prof.grid))))
    (outdir / f"{prefix}summary.json").write_text(_dumps(_jsonable(summary)), encoding="utf-8")
    sys.stdout.write(_dumps(_jsonable(summary)))
    return EXIT_OK


def cmd_solve(args):
    cfg = load_config(args.config)
    outdir = _output_dir(args, cfg)
    prefix = cfg.section("output").get("prefix", "")
    if cfg.has("bvp") and not cfg.has("shooting"):
        # the regularised problem has no Hardy term, so p >= N is allowed
        return _solve_bvp_cmd(cfg, outdir, prefix)
    params, ex = _problem(cfg)
    sc = _shooting_config(cfg)
    try:
        prof = shoot(params, ex, sc)
    except SolverError as exc:
        (outdir / f"{prefix}summary.json").write_text(
            _dumps(_jsonable({"status": "solver-failure", "error": str(exc), "diagnostics": exc.diagnostics})),
            encoding="utf-8")
        raise _Exit(EXIT_SOLVER, f"solver failure: {exc}") from None
    res, sc_ = profile_residual(prof, params)
    rel = np.divide(res, sc_, out=np.zeros_like(res), where=sc_ > 0)
    csv_path = outdir / f"{prefix}profile.csv"
    _write_csv(csv_path, {"r": prof.grid, "u": prof.values, "du": prof.derivs, "flux": prof.extra["flux"],
                          "residual": rel})
    try:
        sl = decay_diagnostics(prof, ex)
        slopes = {
            "origin": sl.slope_origin,
            "infinity": sl.slope_infinity,
            "gradient_origin": sl.grad_slope_origin,
            "gradient_infinity": sl.grad_slope_infinity,
            "expected_origin": 0.0 - ex.gamma1,
            "expected_infinity": -ex.gamma2,
            # gamma1 = 0: the origin fit only says u stays bounded
            "origin_bounded": abs(sl.slope_origin) < 1e-2,
        }
    except InsufficientRange as exc:
        slopes = {"error": str(exc)}
    summary = {
        "status": "ok",
        "solver": "shooting",
        "params": params.as_dict(),
        "exponents": ex.as_dict(),
        "decay_slopes": slopes,
        "flux_conservation_residual": flux_conservation_residual(prof, params),
        "meta": prof.meta,
        "csv": csv_path.name,
    }
    (outdir / f"{prefix}summary.json").write_text(_dumps(_jsonable(summary)), encoding="utf-8")
    sys.stdout.write(_dumps(_jsonable(summary)))
    return EXIT_OK


def _windows(chk):
    return {"origin": chk.get("origin_window"), "infinity": chk.get("infinity_window")} \
        if ("origin_window" in chk or "infinity_window" in chk) else None


def _run_check(name, cfg, jobs):
    chk = cfg.section("check")
    budget = chk.get("budget", DEFAULT_BUDGET)
    if name in ("moser", "epsilon-sweep"):
        prob_sec = cfg.section("problem")
        cfg.require("problem", "N")
        cfg.require("problem", "p")
        N, p = prob_sec["N"], prob_sec["p"]
        prob, _ = _bvp_problem(cfg, N, p)
        if name == "epsilon-sweep":
            eps = cfg.section("bvp").get("eps_list", [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
            return check_epsilon_sweep(prob, eps, cfg.section("bvp").get("grid_size", 200), _newton(cfg),
                                       budget=budget, stability=chk.get("stability", 2.0))
        ms = cfg.section("moser")
        sol = solve_bvp(prob, cfg.section("bvp").get("grid_size", 400), _newton(cfg))
        wbar = RadialProfile(sol.profile.grid, np.sqrt(sol.w_channel), None, meta={"channel": "wbar"})
        sched = build_moser_schedule(ProblemParams(N, p, 0.0), ms.get("depth", 4), ms.get("sigma", 0.5),
                                     ms.get("r", 1.0))
        return check_moser(wbar, prob.f_sup(), sched, budget=budget)
    params, ex = _problem(cfg)
    src = _source(cfg, params, ex)
    slope_tol = chk.get("slope_tol")
    kw = {} if slope_tol is None else {"slope_tol": slope_tol}
    if name == "solution-decay":
        return check_solution_decay(src, ex, _windows(chk), budget, **kw)
    if name == "gradient-decay":
        return check_gradient_decay(src, ex, _windows(chk), budget, **kw)
    if name == "source-bound":
        return check_source_bound(src, params, ex, chk.get("window"), budget, **kw)
    if name == "caccioppoli":
        branch = chk.get("branch", "origin")
        default = [1e-1, 1e-2, 1e-3] if branch == "origin" else [1e1, 1e2, 1e3]
        return check_caccioppoli_average(src, ex, chk.get("x_sweep", default), branch, budget=budget,
                                         jobs=jobs, **kw)
    if name == "interior-gradient":
        return check_interior_gradient_estimate(src, params, chk.get("x_sweep", [1e-2, 1e-1, 1, 1e1, 1e2]),
                                                budget, chk.get("stability", 3.0), jobs=jobs)
    if name == "scaling-constants":
        lambdas = chk.get("lambdas", [1.0, 2.0])
        is_closed = isinstance(src, BubbleFamily)
        tol = chk.get("tol", 1e-3 if is_closed else 1e-2)
        if isinstance(src, RadialProfile) and src.meta.get("source") == "shooting":
            sc = _shooting_config(cfg)
            a = ex.scaling_exponent - ex.gamma1

            def member(lam):
                return shoot(params, ex, replace(sc, amplitude=sc.amplitude * lam**a))

            src = member
        return check_scaling_constants(src, ex, lambdas, windows=_windows(chk), tol=tol, params=params)
    raise ConfigError(f"unknown check {name!r}")


def cmd_verify(args):
    if args.check not in CHECKS:
        raise ConfigError(f"unknown check {args.check!r}; choose from {', '.join(CHECKS)}")
    cfg = load_config(args.config)
    outdir = _output_dir(args, cfg)
    prefix = cfg.section("output").get("prefix", "")
    try:
        report = _run_check(args.check, cfg, args.jobs)
    except _SOLVER_ERRORS as exc:
        raise _Exit(EXIT_SOLVER, f"solver failure: {exc}") from None
    except _INFRA_ERRORS as exc:
        raise _Exit(EXIT_CHECK, f"check could not be evaluated: {type(exc).__name__}: {exc}") from None
    text = report.to_json() + "\n"
    (outdir / f"{prefix}{args.check}.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


# -- entry point -----------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="hardylab", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"hardylab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("exponents", help="decay exponents gamma1, gamma2 and thresholds")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--mu", type=float, default=0.0)
    e.add_argument("--q", type=float, default=1.0, help="constant weight Q (default 1)")
    e.set_defaults(func=cmd_exponents)

    s = sub.add_parser("solve", help="radial ground state (shooting) or regularised BVP")
    s.add_argument("config")
    s.add_argument("--out", help="output directory")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="run one check and write its JSON report")
    v.add_argument("check", help=", ".join(CHECKS))
    v.add_argument("config")
    v.add_argument("--out", help="output directory")
    v.add_argument("--jobs", type=int, default=1, help="threads for sweep points")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except _Exit as exc:
        _err(str(exc))
        return exc.code
    except OutOfRange as exc:
        _err(f"invalid parameters: {exc.field}={exc.value!r} violates {exc.window}")
        return EXIT_CONFIG
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except _SOLVER_ERRORS as exc:
        _err(f"solver failure: {exc}")
        return EXIT_SOLVER
    except _INFRA_ERRORS as exc:
        _err(f"check could not be evaluated: {exc}")
        return EXIT_CHECK
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
