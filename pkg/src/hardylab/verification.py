"""Executable versions of the decay, scaling, ball and iteration estimates.

Every check returns a :class:`CheckReport`.  Its sweep lists, per
location, the two sides of an inequality ``lhs <= C * rhs`` together with
the empirical constant ``c_emp = lhs / rhs``.  The constants in the
estimates are not explicit, so a check asks two things of the sweep: every
``c_emp`` stays under a configured budget, and ``c_emp`` does not drift
towards infinity as the sweep approaches the limit (origin or infinity).
"""

from __future__ import annotations

import enum
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .closed_forms import BubbleFamily, scale
from .errors import GridCoverage, InsufficientRange, NonConvergentLimit, Overflow
from .exponents import critical_exponent
from .geometry import BallSpec, ball_average, ball_sup, ball_volume, log_lq_norm
from .profile import RadialProfile, log_grid
from .regularized_bvp import epsilon_sweep

__all__ = [
    "CheckReport",
    "SweepEntry",
    "MoserCase",
    "MoserSchedule",
    "ANCHORS",
    "DEFAULT_BUDGET",
    "check_solution_decay",
    "check_gradient_decay",
    "check_scaling_constants",
    "check_caccioppoli_average",
    "check_source_bound",
    "check_interior_gradient_estimate",
    "build_moser_schedule",
    "check_iteration_step",
    "check_moser",
    "check_epsilon_sweep",
]

DEFAULT_BUDGET = 1e3
# largest Moser exponent (alpha+p)*chi evaluated before the chain is cut
MAX_MOSER_EXPONENT = 200.0

ANCHORS = {
    "solution-decay": "|u(x)| ≤ C|x|^{−γ₁} (origin); |u(x)| ≤ C|x|^{−γ₂} (infinity)",
    "gradient-decay": "|∇u(x)| ≤ C|x|^{−γ₁−1} (origin); |∇u(x)| ≤ C|x|^{−γ₂−1} (infinity)",
    "scaling-constants": "C₁λ^{(N−p)/p−γ₁}; C₂λ^{(N−p)/p−γ₂}",
    "caccioppoli": "⨍_{B_{|x|/4}(x)}|∇u|^p ≤ C|x|^{−p(γ₁+1)}; ≤ C|x|^{−p(γ₂+1)}",
    "source-bound": "|f(x)| ≤ C|x|^{−p−(p−1)γ₁}",
    "interior-gradient": "CR^{1/(p−1)}||f||_{∞,B_R(x_0)}^{1/(p−1)}",
    "moser": "F(r)=(r||f||_{∞,B_r})^{1/(p−1)}",
    "epsilon-sweep": "(ε+|∇u_ε|²)^{p/2}",
}


# -- reports -------------------------------------------------------------------


def _ratio(lhs, rhs):
    if rhs > 0:
        return lhs / rhs
    if lhs == 0:
        return 0.0
    return math.inf


@dataclass(frozen=True)
class SweepEntry:
    loc: float
    lhs: float
    rhs: float
    c_emp: float

    @classmethod
    def make(cls, loc, lhs, rhs):
        lhs, rhs = float(lhs), float(rhs)
        return cls(float(loc), lhs, rhs, _ratio(lhs, rhs))


def _jsonable(x):
    if isinstance(x, float) or isinstance(x, np.floating):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, enum.Enum):
        return x.value
    return x


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one check.

    ``passed`` is serialised under the key ``"pass"``.  ``extras`` holds
    check-specific diagnostics (trend slopes, passing windows, truncation
    flags) and is appended after the fixed keys.
    """

    name: str
    anchor: str
    params: dict
    sweep: tuple
    c_emp_max: float
    passed: bool
    tolerance_used: float
    extras: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    @property
    def c_values(self):
        return np.array([e.c_emp for e in self.sweep])

    def to_dict(self):
        d = {
            "name": self.name,
            "anchor": self.anchor,
            "params": self.params,
            "sweep": [{"loc": e.loc, "lhs": e.lhs, "rhs": e.rhs, "c_emp": e.c_emp} for e in self.sweep],
            "c_emp_max": self.c_emp_max,
            "pass": self.passed,
            "tolerance_used": self.tolerance_used,
        }
        for k, v in self.extras.items():
            d[k] = v
        return _jsonable(d)

    def to_json(self, indent=2):
        # json writes floats with repr, the shortest round-trip form
        return json.dumps(self.to_dict(), indent=indent, ensure_ascii=False)


def _report(name, params, sweep, passed, tol, **extras):
    sweep = tuple(sweep)
    cmax = max((e.c_emp for e in sweep), default=0.0)
    return CheckReport(name, ANCHORS[name], dict(params), sweep, cmax, bool(passed), float(tol), extras)


def _params_of(src, params=None):
    if params is not None:
        return params
    p = getattr(src, "params", None)
    if p is None:
        raise ValueError("problem parameters are needed for this input")
    return p


def _params_dict(params, exps=None, **more):
    d = params.as_dict() if params is not None else {}
    if exps is not None:
        d["gamma1"] = exps.gamma1
        d["gamma2"] = exps.gamma2
    d.update(more)
    return d


def _map(fn, items, jobs=1):
    # results come back in input order whatever the completion order
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# -- shared sweep logic --------------------------------------------------------


def _trend_slope(locs, cs, side, decades=1.0):
    """Log-log slope of c_emp against the location over the ``decades``
    closest to the limit.  None when the fit is impossible or c vanishes."""
    locs, cs = np.asarray(locs, float), np.asarray(cs, float)
    if locs.size < 2 or np.any(cs <= 0) or not np.all(np.isfinite(cs)):
        return None
    if side == "origin":
        sel = locs <= locs.min() * 10**decades * (1 + 1e-12)
    else:
        sel = locs >= locs.max() / 10**decades * (1 - 1e-12)
    if sel.sum() < 2:
        order = np.argsort(locs)
        sel = order[:2] if side == "origin" else order[-2:]
    x, y = np.log(locs[sel]), np.log(cs[sel])
    if np.ptp(x) == 0:
        return None
    return float(np.polyfit(x, y, 1)[0])


def _diverges(slope, side, slope_tol):
    # c_emp growing towards the limit means the extrapolated sup is infinite
    if slope is None:
        return False
    return slope < -slope_tol if side == "origin" else slope > slope_tol


def _passing_window(entries, side, budget):
    """Largest stretch, starting at the limit end, on which c_emp <= budget."""
    ordered = sorted(entries, key=lambda e: e.loc, reverse=(side == "infinity"))
    good = []
    for e in ordered:
        if e.c_emp > budget:
            break
        good.append(e.loc)
    if not good:
        return None
    return [min(good), max(good)]


def _sided_verdict(entries_by_side, budget, slope_tol):
    slopes, windows, limits, ok = {}, {}, {}, True
    for side, entries in entries_by_side.items():
        if not entries:
            continue
        locs = [e.loc for e in entries]
        cs = [e.c_emp for e in entries]
        s = _trend_slope(locs, cs, side)
        slopes[side] = s
        windows[side] = _passing_window(entries, side, budget)
        lim = min(entries, key=lambda e: e.loc) if side == "origin" else max(entries, key=lambda e: e.loc)
        limits[side] = lim.c_emp
        if any(c > budget for c in cs) or _diverges(s, side, slope_tol):
            ok = False
    return ok, {"trend_slopes": slopes, "passing_windows": windows, "limit_estimates": limits}


# -- sampling inputs -----------------------------------------------------------


def _default_windows(src):
    if isinstance(src, RadialProfile):
        lo, hi = src.r_min, src.r_max
        span = math.log10(hi / lo)
        if span < 2:
            raise InsufficientRange(f"profile spans {span:.2f} decades, need 2")
        return {"origin": (lo, lo * 10), "infinity": (hi / 10, hi)}
    return {"origin": (1e-6, 1e-5), "infinity": (1e5, 1e6)}


def _normalise_windows(src, windows):
    if windows is None:
        return _default_windows(src)
    if isinstance(windows, dict):
        out = {k: windows[k] for k in ("origin", "infinity") if windows.get(k) is not None}
    else:
        w0, w1 = windows
        out = {k: w for k, w in (("origin", w0), ("infinity", w1)) if w is not None}
    for side, (lo, hi) in out.items():
        if not 0 < lo < hi:
            raise ValueError(f"{side} window must satisfy 0 < lo < hi")
    return out


def _sample(src, lo, hi, channel, points_per_decade=100):
    """(r, |channel|) over [lo, hi]: the grid points of a profile, or a
    log-uniform sample of a closed form."""
    if isinstance(src, RadialProfile):
        if not src.covers(lo, hi):
            raise InsufficientRange(
                f"window [{lo:.4g}, {hi:.4g}] outside profile grid [{src.r_min:.4g}, {src.r_max:.4g}]"
            )
        mask = src.window(lo, hi)
        if mask.sum() < 3:
            raise InsufficientRange("fewer than three grid points in the window")
        r = src.grid[mask]
        y = src.values[mask] if channel == "values" else src.derivs[mask]
        return r, np.abs(y)
    r = log_grid(lo, hi, points_per_decade)
    y = src.value(r) if channel == "values" else src.gradient(r)
    return r, np.abs(y)


def _decay_check(name, channel, extra_power, src, exponents, windows, budget, slope_tol, params=None):
    windows = _normalise_windows(src, windows)
    by_side = {}
    for side, (lo, hi) in windows.items():
        g = exponents.gamma1 if side == "origin" else exponents.gamma2
        r, y = _sample(src, lo, hi, channel)
        by_side[side] = [SweepEntry.make(ri, yi, ri ** (-(g + extra_power))) for ri, yi in zip(r, y)]
    ok, info = _sided_verdict(by_side, budget, slope_tol)
    sweep = by_side.get("origin", []) + by_side.get("infinity", [])
    prm = _params_dict(getattr(src, "params", params), exponents)
    return _report(name, prm, sweep, ok, budget, windows={k: list(v) for k, v in windows.items()},
                   slope_tolerance=slope_tol, **info)


def check_solution_decay(profile, exponents, windows=None, budget=DEFAULT_BUDGET, slope_tol=1e-2):
    """u(r) r^{gamma} over an origin window (gamma1) and an infinity window
    (gamma2).

    Parameters
    ----------
    profile : RadialProfile or BubbleFamily
    exponents : Exponents
    windows : dict or pair, optional
        ``{"origin": (lo, hi), "infinity": (lo, hi)}``; either may be None.
        Defaults to the innermost and outermost decade of the grid.
    budget : float
        Bound on every empirical constant.
    slope_tol : float
        Largest tolerated log-log drift of c_emp towards the limit; a
        steeper drift means the constant is unbounded in the limit.
    """
    return _decay_check("solution-decay", "values", 0.0, profile, exponents, windows, budget, slope_tol)


def check_gradient_decay(profile, exponents, windows=None, budget=DEFAULT_BUDGET, slope_tol=1e-2):
    """|u'(r)| r^{gamma+1}, otherwise as :func:`check_solution_decay`."""
    return _decay_check("gradient-decay", "derivs", 1.0, profile, exponents, windows, budget, slope_tol)


def _source_values(src, params, r):
    N, p, mu = params.N, params.p, params.mu
    ps = critical_exponent(N, p)
    u = np.abs(src.value(r) if isinstance(src, BubbleFamily) else src(r))
    return mu * r ** (-p) * u ** (p - 1) + params.q_spec(r) * u ** (ps - 1)


def check_source_bound(profile, params, exponents, window=None, budget=DEFAULT_BUDGET, slope_tol=1e-2):
    """|f(r)| r^{p+(p-1)gamma1} near the origin, with
    f = mu r^{-p} u^{p-1} + Q u^{p*-1} built from the profile values."""
    params = _params_of(profile, params)
    p = params.p
    if window is None:
        window = _default_windows(profile)["origin"]
    lo, hi = window
    r, _ = _sample(profile, lo, hi, "values")
    if isinstance(profile, RadialProfile):
        u = np.abs(profile.values[profile.window(lo, hi)])
        ps = critical_exponent(params.N, p)
        f = params.mu * r ** (-p) * u ** (p - 1) + params.q_spec(r) * u ** (ps - 1)
    else:
        f = _source_values(profile, params, r)
    rate = p + (p - 1) * exponents.gamma1
    entries = [SweepEntry.make(ri, fi, ri ** (-rate)) for ri, fi in zip(r, f)]
    ok, info = _sided_verdict({"origin": entries}, budget, slope_tol)
    return _report("source-bound", _params_dict(params, exponents, rate=rate), entries, ok, budget,
                   window=list(window), slope_tolerance=slope_tol, **info)


# -- scaling -------------------------------------------------------------------


def _member(src, lam, exponents):
    if isinstance(src, BubbleFamily):
        return src.rescaled(lam)
    if isinstance(src, RadialProfile):
        return scale(src, lam, exponents, outside="clip")
    return src(lam)


def _windowed_limit(member, lo, hi, g, cauchy_tol):
    r, y = _sample(member, lo, hi, "derivs")
    k = y * r ** (g + 1)
    half = k.size // 2
    a, b = float(np.mean(k[:half])), float(np.mean(k[half:]))
    ref = max(abs(a), abs(b))
    if ref == 0 or abs(a - b) > cauchy_tol * ref:
        raise NonConvergentLimit(
            f"r^(g+1)|u'| not settled on [{lo:.4g}, {hi:.4g}]: half-window means {a!r}, {b!r}"
        )
    return float(np.mean(k))


def check_scaling_constants(family_or_solver, exponents, lambdas, branches=("origin", "infinity"),
                            windows=None, tol=1e-3, cauchy_tol=None, params=None):
    """Ratios of the extracted constants K(lam) = lim r^{gamma+1}|u_lam'(r)|
    against the dilation law (lam/lam0)^{(N-p)/p - gamma}.

    ``family_or_solver`` is a :class:`BubbleFamily` (rescaled exactly), a
    :class:`RadialProfile` (resampled with :func:`~hardylab.closed_forms.scale`)
    or a callable ``lam -> profile``.  The first entry of ``lambdas`` is the
    reference.  Passes iff every ratio of ratios is within ``tol`` of 1.
    """
    lambdas = [float(x) for x in lambdas]
    if len(lambdas) < 2:
        raise ValueError("need at least two lambda values")
    cauchy_tol = tol if cauchy_tol is None else cauchy_tol
    a = exponents.scaling_exponent
    members = [_member(family_or_solver, lam, exponents) for lam in lambdas]
    if windows is None:
        profs = [m for m in members if isinstance(m, RadialProfile)]
        if profs:
            lo = max(m.r_min for m in profs)
            hi = min(m.r_max for m in profs)
            if hi <= 100 * lo:
                raise InsufficientRange("rescaled profiles share less than two decades")
            windows = {"origin": (lo, 10 * lo), "infinity": (hi / 10, hi)}
        else:
            windows = {"origin": (1e-8, 1e-7), "infinity": (1e7, 1e8)}
    windows = _normalise_windows(None, windows)
    sweep, labels, ks = [], [], {}
    for side in branches:
        if side not in windows:
            continue
        g = exponents.gamma1 if side == "origin" else exponents.gamma2
        lo, hi = windows[side]
        K = [_windowed_limit(m, lo, hi, g, cauchy_tol) for m in members]
        ks[side] = K
        for lam, k in zip(lambdas, K):
            sweep.append(SweepEntry.make(lam, k / K[0], (lam / lambdas[0]) ** (a - g)))
            labels.append(side)
    ok = all(abs(e.c_emp - 1) <= tol for e in sweep)
    prm = _params_dict(_params_of_any(family_or_solver, members, params), exponents)
    return _report("scaling-constants", prm, sweep, ok, tol, branch_of_entry=labels,
                   limits=ks, windows={k: list(v) for k, v in windows.items()})


def _params_of_any(src, members, params):
    if params is not None:
        return params
    for obj in (src, *members):
        p = getattr(obj, "params", None)
        if p is not None:
            return p
    return None


# -- ball estimates ------------------------------------------------------------


def _dim(src, N):
    if N is not None:
        return int(N)
    return int(_params_of(src).N)


def check_caccioppoli_average(profile, exponents, x_sweep, branch="origin", p=None, N=None,
                              budget=DEFAULT_BUDGET, slope_tol=5e-2, jobs=1):
    """Mean of |u'|^p over B_{|x|/4}(x) against |x|^{-p(gamma+1)}.

    ``branch`` picks gamma1 ("origin") or gamma2 ("infinity").  The trend
    test fits c_emp over the last decade of the sweep towards the limit.
    """
    N = _dim(profile, N)
    p = float(p if p is not None else _params_of(profile).p)
    g = exponents.gamma1 if branch == "origin" else exponents.gamma2
    xs = [float(x) for x in x_sweep]

    def one(x):
        ball = BallSpec(x, x / 4)
        return SweepEntry.make(x, ball_average(profile, p, ball, "derivs", N), x ** (-p * (g + 1)))

    entries = _map(one, xs, jobs)
    ok, info = _sided_verdict({branch: entries}, budget, slope_tol)
    cs = [e.c_emp for e in entries if e.c_emp > 0]
    spread = max(cs) / min(cs) if cs else 1.0
    prm = _params_dict(getattr(profile, "params", None), exponents, branch=branch)
    return _report("caccioppoli", prm, entries, ok, budget, c_emp_spread=spread,
                   slope_tolerance=slope_tol, **info)


def check_interior_gradient_estimate(profile, params, x_sweep, budget=DEFAULT_BUDGET, stability=3.0,
                                     source=None, jobs=1):
    """sup_{B_{R/2}(x)}|u'| against the mean of |u'|^p on B_R(x) plus the
    source term, with R = |x|/2.

    The constant in this estimate depends on N and p only, so on top of
    the budget the spread max(c)/min(c) over the sweep must not exceed
    ``stability``.  ``source`` overrides the default
    f = mu r^{-p} u^{p-1} + Q u^{p*-1}.
    """
    params = _params_of(profile, params)
    N, p = params.N, params.p
    if source is None:
        def source(r):
            return _source_values(profile, params, np.asarray(r, dtype=float))
    xs = [float(x) for x in x_sweep]

    def one(x):
        R = x / 2
        outer = BallSpec(x, R)
        lhs = ball_sup(profile, BallSpec(x, R / 2), "derivs")
        avg = ball_average(profile, p, outer, "derivs", N)
        fsup = ball_sup(source, outer)
        rhs = avg ** (1 / p) + R ** (1 / (p - 1)) * fsup ** (1 / (p - 1))
        return SweepEntry.make(x, lhs, rhs)

    entries = _map(one, xs, jobs)
    cs = [e.c_emp for e in entries if e.c_emp > 0]
    spread = max(cs) / min(cs) if cs else 1.0
    ok = all(e.c_emp <= budget for e in entries) and spread <= stability
    return _report("interior-gradient", _params_dict(params), entries, ok, budget,
                   c_emp_spread=spread, stability=stability)


# -- Moser iteration -----------------------------------------------------------


class MoserCase(enum.Enum):
    P_LESS_EQ_2 = "PLessEq2"
    P_GREATER_2 = "PGreater2"


@dataclass(frozen=True)
class MoserSchedule:
    case: MoserCase
    N: int
    p: float
    chi: float
    alphas: np.ndarray
    radii: np.ndarray
    sigma: float
    r: float
    beta: float | None = None

    @property
    def depth(self):
        return self.alphas.size - 1

    def as_dict(self):
        return {
            "case": self.case.value,
            "chi": self.chi,
            "alphas": self.alphas.tolist(),
            "radii": self.radii.tolist(),
            "sigma": self.sigma,
            "r": self.r,
            "beta": self.beta,
        }


def build_moser_schedule(params, depth, sigma=0.5, r=1.0):
    """Exponents alpha_i (i = 0..depth) and radii r_i (i = 0..depth+1).

    p <= 2: alpha_i = p chi^i - p;  p > 2: alpha_i = (2p-2) chi^i - p,
    with chi = N/(N-2) and r_i = sigma r + (1-sigma) r / 2^i.
    """
    N, p = int(params.N), float(params.p)
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    if N < 3:
        raise ValueError("N must be at least 3")
    chi = N / (N - 2)
    i = np.arange(depth + 1)
    if p <= 2:
        case, alphas, beta = MoserCase.P_LESS_EQ_2, p * chi**i - p, None
    else:
        case, alphas, beta = MoserCase.P_GREATER_2, (2 * p - 2) * chi**i - p, p / (2 * p - 2)
    radii = sigma * r + (1 - sigma) * r / 2.0 ** np.arange(depth + 2)
    return MoserSchedule(case, N, p, chi, alphas, radii, float(sigma), float(r), beta)


def _log_ball_power(field, q, rho, N, core=None):
    """ln of int_{B_rho} |field|^q over the centred ball.

    A profile grid starting at a > 0 is completed on B_a by the constant
    value at the grid start."""
    if isinstance(field, RadialProfile):
        a = field.r_min
        if rho > field.r_max * (1 + 1e-12):
            raise GridCoverage(f"ball radius {rho!r} beyond grid end {field.r_max!r}")
        shell = q * log_lq_norm(field, q, (a, rho), "values", N)
        w0 = abs(float(field.values[0]))
        if w0 == 0:
            return shell
        return float(np.logaddexp(shell, math.log(ball_volume(N, a)) + q * math.log(w0)))
    if np.isscalar(field):
        w = abs(float(field))
        return -math.inf if w == 0 else math.log(ball_volume(N, rho)) + q * math.log(w)
    a = rho * 1e-9 if core is None else core
    shell = q * log_lq_norm(field, q, (a, rho), "values", N)
    w0 = abs(float(field(a)))
    if w0 == 0:
        return shell
    return float(np.logaddexp(shell, math.log(ball_volume(N, a)) + q * math.log(w0)))


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError as exc:
        raise Overflow(f"exp({x!r}) exceeds double precision") from exc


def _step(profile_w, f_bound, schedule, i, r, N):
    if not 0 <= i <= schedule.depth:
        raise ValueError(f"step {i} outside schedule depth {schedule.depth}")
    chi, p = schedule.chi, schedule.p
    q = schedule.alphas[i] + p
    if q * chi > MAX_MOSER_EXPONENT:
        raise Overflow(f"(alpha_{i}+p)chi = {q * chi:.4g} exceeds {MAX_MOSER_EXPONENT}")
    r2, r1 = schedule.radii[i], schedule.radii[i + 1]
    F = (r * f_bound) ** (1 / (p - 1)) if f_bound > 0 else 0.0
    logF = math.log(F) if F > 0 else -math.inf

    def side(qq, rho):
        lw = _log_ball_power(profile_w, qq, rho, N)
        lf = math.log(ball_volume(N, rho)) + qq * logF
        return float(np.logaddexp(lw, lf))

    log_lhs = side(q * chi, r1) / chi
    log_rhs = side(q, r2) + 2 * math.log(q) - 2 * math.log(r2 - r1)
    return SweepEntry(float(i), _exp(log_lhs), _exp(log_rhs), _exp(log_lhs - log_rhs))


def check_iteration_step(profile_w, f_bound, schedule, i, r=None, N=None, budget=DEFAULT_BUDGET):
    """One step of the iteration: with q = alpha_i + p, r1 = r_{i+1}, r2 = r_i,

        (int_{B_r1} wbar^{q chi} + F^{q chi})^{1/chi}
            <= C q^2/(r2 - r1)^2 int_{B_r2} wbar^q + F^q,

    F = (r ||f||)^{1/(p-1)}.  The sweep entry carries the normalised
    constant as ``c_emp``.  Integrals are formed in log space; Overflow is
    raised once q chi exceeds 200.
    """
    N = schedule.N if N is None else int(N)
    r = schedule.r if r is None else float(r)
    e = _step(profile_w, f_bound, schedule, i, r, N)
    return _report("moser", {"N": N, "p": schedule.p, "step": i, "f_bound": f_bound}, [e],
                   e.c_emp <= budget, budget, schedule=schedule.as_dict())


def check_moser(profile_w, f_bound, schedule, r=None, N=None, budget=DEFAULT_BUDGET):
    """All steps i = 0..depth under one budget; the chain is cut and
    flagged ``truncated`` at the first exponent overflow."""
    N = schedule.N if N is None else int(N)
    r = schedule.r if r is None else float(r)
    entries, truncated, cut = [], False, None
    for i in range(schedule.depth + 1):
        try:
            entries.append(_step(profile_w, f_bound, schedule, i, r, N))
        except Overflow:
            truncated, cut = True, i
            break
    ok = all(e.c_emp <= budget for e in entries)
    return _report("moser", {"N": N, "p": schedule.p, "f_bound": f_bound}, entries, ok, budget,
                   schedule=schedule.as_dict(), truncated=truncated, truncated_at=cut)


# -- epsilon sweep -------------------------------------------------------------


def check_epsilon_sweep(problem_template, eps_list, grid_size=200, newton_cfg=None,
                        budget=DEFAULT_BUDGET, stability=2.0):
    """Uniform-in-eps gradient bound on the middle half of the annulus.

    Passes iff every constant is under ``budget`` and max/min of the
    constants over the sweep is at most ``stability``.
    """
    kw = {} if newton_cfg is None else {"newton_cfg": newton_cfg}
    pts = epsilon_sweep(problem_template, eps_list, grid_size, **kw)
    entries = [SweepEntry.make(sp.epsilon, sp.gradient_sup, sp.rhs_bound) for sp in pts]
    cs = [e.c_emp for e in entries if e.c_emp > 0]
    spread = max(cs) / min(cs) if cs else 1.0
    steps = [float(np.max(np.abs(b.solution.nodes - a.solution.nodes))) for a, b in zip(pts, pts[1:])]
    ok = all(e.c_emp <= budget for e in entries) and spread <= stability
    pt = problem_template
    prm = {"N": pt.N, "p": pt.p, "annulus": list(pt.annulus), "boundary_values": list(pt.boundary_values),
           "grid_size": grid_size}
    return _report("epsilon-sweep", prm, entries, ok, budget, c_emp_spread=spread, stability=stability,
                   solution_steps=steps, newton_iters=[sp.solution.newton_iters for sp in pts])
