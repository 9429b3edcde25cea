"""Positive radial solutions for general 1 < p < N by shooting in log-radius.

With t = ln r, U(t) = u(e^t) and the flux S(t) = r^{N-1}|u'|^{p-2}u', the
radial equation -Delta_p u - mu r^{-p} u^{p-1} = Q u^{p*-1} becomes

    dU/dt = sign(S)|S|^{1/(p-1)} e^{t(1 - (N-1)/(p-1))}
    dS/dt = -e^{tN} (mu e^{-tp} U^{p-1} + Q U^{p*-1}).

The flux stays smooth where u' vanishes (p > 2) or where |u'|^{p-2} blows up
(p < 2).  At the critical exponent every amplitude lies on the one-parameter
family of ground states, so no bisection on the amplitude is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import DOP853, RK45

from .errors import BlowUp, BudgetExceeded, InsufficientRange, SignChange
from .exponents import critical_exponent
from .profile import RadialProfile, log_grid

__all__ = [
    "ShootingConfig",
    "DecaySlopes",
    "shoot",
    "initial_state",
    "decay_diagnostics",
    "flux_conservation_residual",
    "flux",
]

_METHODS = {"RK45": RK45, "DOP853": DOP853}


@dataclass(frozen=True)
class ShootingConfig:
    """Integration window and tolerances for :func:`shoot`.

    ``amplitude`` is A in u ~ A r^{-gamma1} near the origin when mu > 0, and
    the centre value u(0) = A when mu = 0.  The integration actually starts
    at the smaller of ``r_min`` and the radius where the first correction to
    the asymptotic seed drops below ``init_correction``.
    """

    r_min: float = 1e-4
    r_max: float = 1e4
    amplitude: float = 1.0
    rk_tol: float = 1e-12
    max_steps: int = 200_000
    points_per_decade: int = 100
    method: str = "RK45"
    init_correction: float = 1e-8
    overflow_guard: float = 1e150
    on_sign_change: str = "raise"
    max_restarts: int = 3

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        if not 1e-13 <= self.rk_tol <= 1e-3:
            raise ValueError("rk_tol must lie in [1e-13, 1e-3]")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {sorted(_METHODS)}")
        if self.on_sign_change not in ("raise", "truncate"):
            raise ValueError("on_sign_change must be 'raise' or 'truncate'")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


def flux(r, du, N, p):
    """r^{N-1}|u'|^{p-2}u'."""
    return r ** (N - 1) * np.sign(du) * np.abs(du) ** (p - 1)


def _rhs(N, p, mu, Q):
    ps = critical_exponent(N, p)
    e_u = 1 - (N - 1) / (p - 1)
    inv = 1 / (p - 1)

    def f(t, y):
        U, S = y
        aU = abs(U)
        dU = math.copysign(abs(S) ** inv, S) * math.exp(t * e_u)
        dS = -math.exp(t * N) * (
            mu * math.exp(-t * p) * math.copysign(aU ** (p - 1), U)
            + Q * math.copysign(aU ** (ps - 1), U)
        )
        return np.array([dU, dS])

    return f


def _seed_coefficients(params, exponents, A):
    N, p, mu = params.N, params.p, params.mu
    Q = params.q_spec.value
    ps = critical_exponent(N, p)
    if mu > 0:
        g = exponents.gamma1
        b = p - g * (ps - p)
        e0 = N - p - g * (p - 1)
        c = -Q * A ** (ps - p) / ((p - 1) * (g ** (p - 2) * (b - g) * (e0 + b) + mu))
        return {"branch": "gamma1", "gamma": g, "beta": b, "c1": c}
    q = p / (p - 1)
    B = (p - 1) / p * (Q * A ** (ps - 1) / N) ** (1 / (p - 1))
    return {"branch": "regular-centre", "q": q, "B": B}


def _seed_at(params, A, co, r0):
    N, p = params.N, params.p
    Q = params.q_spec.value
    ps = critical_exponent(N, p)
    if co["branch"] == "gamma1":
        g, b, c = co["gamma"], co["beta"], co["c1"]
        u0 = A * r0**-g * (1 + c * r0**b)
        du0 = A * r0 ** (-g - 1) * (-g + c * (b - g) * r0**b)
        return u0, du0
    q, B = co["q"], co["B"]
    u0 = A - B * r0**q
    # flux with its first correction, S = -Q int_0^r u^{p*-1} s^{N-1} ds
    S0 = -Q * A ** (ps - 1) * (r0**N / N - (ps - 1) * (B / A) * r0 ** (N + q) / (N + q))
    du0 = -((abs(S0) / r0 ** (N - 1)) ** (1 / (p - 1)))
    return u0, du0


def initial_state(params, exponents, amplitude, correction=1e-8):
    """Seed radius and (u, u') on the gamma1 branch.

    mu > 0:  u = A r^{-g}(1 + c r^b) with b = p - g(p* - p) and c fixed by
    balancing the r^b term of the equation.
    mu = 0:  regular centre, u = A - B r^{p/(p-1)} with the matching flux.
    The seed radius makes the correction term equal ``correction``.
    Returns (r0, u0, du0, coefficients).
    """
    co = _seed_coefficients(params, exponents, amplitude)
    if co["branch"] == "gamma1":
        c = abs(co["c1"])
        r0 = (correction / c) ** (1 / co["beta"]) if c else 1e-8
    else:
        r0 = (correction * amplitude / co["B"]) ** (1 / co["q"])
    u0, du0 = _seed_at(params, amplitude, co, r0)
    return r0, u0, du0, co


def _integrate(params, config, r0, u0, du0, out_r):
    N, p, mu = params.N, params.p, params.mu
    Q = params.q_spec.value
    f = _rhs(N, p, mu, Q)
    t0, t1 = math.log(r0), math.log(config.r_max)
    y0 = np.array([u0, float(flux(r0, du0, N, p))])
    solver = _METHODS[config.method](
        f, t0, y0, t1, rtol=config.rk_tol, atol=np.array([1e-300, 1e-300])
    )
    out_t = np.log(out_r)
    U = np.full(out_t.size, np.nan)
    S = np.full(out_t.size, np.nan)
    k = 0
    steps = 0
    status = "ok"
    while solver.status == "running":
        t_old = solver.t
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            raise BudgetExceeded(f"integrator failed: {msg}", {"t": t_old, "steps": steps})
        sol = solver.dense_output()
        j = k
        while j < out_t.size and out_t[j] <= solver.t + 1e-14:
            j += 1
        if j > k:
            ys = sol(np.clip(out_t[k:j], t_old, solver.t))
            U[k:j], S[k:j] = ys[0], ys[1]
        Unew = solver.y[0]
        if not np.isfinite(Unew) or abs(Unew) > config.overflow_guard:
            raise BlowUp("U exceeded the overflow guard", {"t": solver.t, "U": float(Unew), "steps": steps})
        bad = np.nonzero(U[k:j] <= 0)[0]
        if Unew <= 0 or bad.size:
            cut = k + bad[0] if bad.size else j
            status = "sign-change"
            k = cut
            break
        k = j
        if steps >= config.max_steps and solver.status == "running":
            raise BudgetExceeded(
                f"step budget {config.max_steps} exhausted at r={math.exp(solver.t):.3g}",
                {"t": solver.t, "steps": steps},
            )
    return U[:k], S[:k], steps, status


def shoot(params, exponents, config):
    """Integrate the ground state with the given amplitude.

    Returns a :class:`RadialProfile` on a log-uniform grid over
    [config.r_min, config.r_max].  Raises :class:`SignChange` if U crosses
    zero after ``max_restarts`` restarts with smaller seed radii (or returns
    the positive part, flagged, when ``on_sign_change='truncate'``).
    """
    if not params.q_spec.is_constant or not params.q_spec.value > 0:
        raise ValueError("the shooting solver needs a positive constant Q")
    N, p = params.N, params.p
    out_r = log_grid(config.r_min, config.r_max, config.points_per_decade)
    r0, _, _, co = initial_state(params, exponents, config.amplitude, config.init_correction)
    r0 = min(r0, config.r_min)
    restarts = 0
    while True:
        u0, du0 = _seed_at(params, config.amplitude, co, r0)
        U, S, steps, status = _integrate(params, config, r0, u0, du0, out_r)
        if status == "ok":
            break
        if restarts < config.max_restarts:
            restarts += 1
            r0 *= 1e-2
            continue
        if config.on_sign_change == "raise" or U.size < 2:
            stop = out_r[U.size] if U.size < out_r.size else config.r_max
            raise SignChange(
                f"solution changed sign near r={stop:.4g}",
                {"r": float(stop), "restarts": restarts, "steps": steps},
            )
        break
    grid = out_r[: U.size]
    du = np.sign(S) * np.abs(S / grid ** (N - 1)) ** (1 / (p - 1))
    meta = {
        "source": "shooting",
        "amplitude": config.amplitude,
        "seed_radius": r0,
        "steps": steps,
        "restarts": restarts,
        "truncated": status != "ok",
        "method": config.method,
        "rk_tol": config.rk_tol,
    }
    meta.update(co)
    return RadialProfile(grid, U, du, params, meta, extra={"flux": S})


class DecaySlopes(NamedTuple):
    slope_origin: float
    slope_infinity: float
    grad_slope_origin: float
    grad_slope_infinity: float


def _fit_slope(r, y):
    return float(np.polyfit(np.log(r), np.log(np.abs(y)), 1)[0])


def decay_diagnostics(profile, exponents=None, decades=1.0):
    """Least-squares log-log slopes of u and |u'| over the innermost and
    outermost ``decades`` of the profile grid."""
    span = math.log10(profile.r_max / profile.r_min)
    if span < 2 * decades:
        raise InsufficientRange(f"profile spans {span:.2f} decades, need {2 * decades}")
    lo = profile.window(profile.r_min, profile.r_min * 10**decades)
    hi = profile.window(profile.r_max / 10**decades, profile.r_max)
    if lo.sum() < 3 or hi.sum() < 3:
        raise InsufficientRange("fewer than three grid points in a fit window")
    r, u, du = profile.grid, profile.values, profile.derivs
    return DecaySlopes(
        _fit_slope(r[lo], u[lo]),
        _fit_slope(r[hi], u[hi]),
        _fit_slope(r[lo], du[lo]),
        _fit_slope(r[hi], du[hi]),
    )


def flux_conservation_residual(profile, params):
    """Largest relative defect of S(t2) - S(t1) + int_{t1}^{t2} e^{tN}(...) dt
    over adjacent grid intervals, the integral by Simpson's rule on the
    interval (midpoint from the profile interpolant)."""
    N, p, mu = params.N, params.p, params.mu
    Q = params.q_spec.value
    ps = critical_exponent(N, p)
    r = profile.grid
    S = flux(r, profile.derivs, N, p)
    rm = np.sqrt(r[1:] * r[:-1])
    um = profile(rm)

    def integrand(rr, uu):
        return rr**N * (mu * rr**-p * uu ** (p - 1) + Q * uu ** (ps - 1))

    dt = np.diff(np.log(r))
    fa = integrand(r[:-1], profile.values[:-1])
    fb = integrand(r[1:], profile.values[1:])
    fm = integrand(rm, um)
    quad = dt / 6 * (fa + 4 * fm + fb)
    defect = np.diff(S) + quad
    scale = np.maximum(np.maximum(np.abs(S[1:]), np.abs(S[:-1])), np.abs(quad))
    return float(np.max(np.abs(defect) / scale))
