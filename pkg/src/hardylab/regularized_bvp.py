"""Finite-difference solver for the epsilon-regularised radial problem

    -(r^{N-1} (eps + u'^2)^{(p-2)/2} u')' = r^{N-1} f   on (a, b),
    u(a) = ua,  u(b) = ub,

discretised in flux form on a uniform grid and solved by damped Newton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import LinAlgError, solve_banded

from .errors import NewtonDiverged, SingularJacobian
from .profile import RadialProfile

__all__ = [
    "BVPProblem",
    "NewtonConfig",
    "BVPSolution",
    "SweepPoint",
    "solve_bvp",
    "epsilon_sweep",
    "flux_coefficient",
    "manufactured_source",
    "power_manufactured",
    "convergence_order",
]


def flux_coefficient(du, eps, p):
    """phi(du) = (eps + du^2)^{(p-2)/2} du."""
    du = np.asarray(du, dtype=float)
    if p == 2:
        return du.copy()
    base = eps + du * du
    with np.errstate(divide="ignore", invalid="ignore"):
        out = base ** ((p - 2) / 2) * du
    return np.where(du == 0, 0.0, out)


def _flux_slope(du, eps, p):
    """phi'(du) = (eps + du^2)^{(p-4)/2} (eps + (p-1) du^2)."""
    if p == 2:
        return np.ones_like(du)
    base = eps + du * du
    with np.errstate(divide="ignore", invalid="ignore"):
        return base ** ((p - 4) / 2) * (eps + (p - 1) * du * du)


@dataclass(frozen=True)
class BVPProblem:
    N: int
    p: float
    epsilon: float
    annulus: tuple
    boundary_values: tuple
    source: Callable | float = 0.0
    source_sup: float | None = None

    def __post_init__(self):
        a, b = self.annulus
        if not 0 < a < b:
            raise ValueError("annulus needs 0 < a < b")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if not all(math.isfinite(v) for v in self.boundary_values):
            raise ValueError("boundary values must be finite")
        if not 1 < self.p:
            raise ValueError("p must exceed 1")

    def f(self, r):
        r = np.asarray(r, dtype=float)
        if callable(self.source):
            return np.asarray(self.source(r), dtype=float) * np.ones_like(r)
        return np.full_like(r, float(self.source))

    def f_sup(self, samples=4001):
        if self.source_sup is not None:
            return self.source_sup
        return float(np.max(np.abs(self.f(np.linspace(*self.annulus, samples)))))


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10
    max_iter: int = 60
    max_halvings: int = 30


@dataclass(frozen=True, eq=False)
class BVPSolution:
    profile: RadialProfile
    newton_iters: int
    final_residual: float
    w_channel: np.ndarray
    problem: BVPProblem = None
    nodes: np.ndarray = field(default=None, repr=False)

    @property
    def flux(self):
        pr = self.problem
        r = self.profile.grid
        return r ** (pr.N - 1) * flux_coefficient(self.profile.derivs, pr.epsilon, pr.p)


class _Discretisation:
    def __init__(self, problem, n):
        self.pb = problem
        a, b = problem.annulus
        self.r = np.linspace(a, b, n + 1)
        self.h = (b - a) / n
        self.rh = 0.5 * (self.r[1:] + self.r[:-1])
        self.wh = self.rh ** (problem.N - 1)
        self.rhs = self.r[1:-1] ** (problem.N - 1) * problem.f(self.r[1:-1])
        self.ref = float(np.max(np.abs(self.rhs))) if self.rhs.size else 0.0

    def set_reference(self, F):
        # divergence scale of the flux; keeps the stopping test scale-free when f = 0
        a, b = self.pb.annulus
        self.ref = max(self.ref, float(np.max(np.abs(F))) / (b - a))
        if self.ref == 0:
            self.ref = 1.0

    def full(self, interior):
        ua, ub = self.pb.boundary_values
        return np.concatenate(([ua], interior, [ub]))

    def slopes(self, u):
        return np.diff(u) / self.h

    def residual(self, u):
        F = self.wh * flux_coefficient(self.slopes(u), self.pb.epsilon, self.pb.p)
        return np.diff(F) / self.h + self.rhs, F

    def jacobian(self, u):
        d = self.slopes(u)
        if self.pb.p < 2 and self.pb.epsilon == 0 and np.any(d == 0):
            raise SingularJacobian("p < 2 with eps = 0 and a vanishing gradient")
        k = self.wh * _flux_slope(d, self.pb.epsilon, self.pb.p) / self.h**2
        if not np.all(np.isfinite(k)):
            raise SingularJacobian("flux slope is not finite")
        m = k.size - 1
        ab = np.zeros((3, m))
        ab[0, 1:] = k[1:-1]
        ab[1, :] = -(k[:-1] + k[1:])
        ab[2, :-1] = k[1:-1]
        return ab


def solve_bvp(problem, grid_size=200, newton_cfg=NewtonConfig(), initial=None):
    """Damped Newton on the flux-form discretisation.

    ``grid_size`` is the number of uniform intervals.  ``initial`` may hold a
    full nodal vector (boundary included) to start from; the default is the
    linear interpolant of the boundary data.
    """
    disc = _Discretisation(problem, grid_size)
    r = disc.r
    if initial is None:
        ua, ub = problem.boundary_values
        u = ua + (ub - ua) * (r - r[0]) / (r[-1] - r[0])
    else:
        u = np.array(initial, dtype=float)
        u[0], u[-1] = problem.boundary_values
    res, F = disc.residual(u)
    disc.set_reference(F)
    norm = float(np.max(np.abs(res))) / disc.ref if res.size else 0.0
    it = 0
    while norm > newton_cfg.tol:
        if it >= newton_cfg.max_iter:
            raise NewtonDiverged(f"no convergence in {it} Newton steps", last=u,
                                 diagnostics={"residual": norm})
        try:
            step = solve_banded((1, 1), disc.jacobian(u), -res)
        except (LinAlgError, ValueError) as exc:
            raise SingularJacobian(str(exc)) from exc
        lam = 1.0
        for _ in range(newton_cfg.max_halvings + 1):
            trial = u.copy()
            trial[1:-1] += lam * step
            tres, _ = disc.residual(trial)
            tnorm = float(np.max(np.abs(tres))) / disc.ref
            if np.isfinite(tnorm) and tnorm < (1 - 1e-4 * lam) * norm:
                break
            lam *= 0.5
        else:
            if np.max(np.abs(step)) <= 1e-14 * (1 + np.max(np.abs(u))):
                break
            raise NewtonDiverged("line search failed", last=u, diagnostics={"residual": norm, "iter": it})
        u, res, norm = trial, tres, tnorm
        it += 1
    du = np.gradient(u, r, edge_order=2)
    w = problem.epsilon + du**2
    prof = RadialProfile(
        r, u, du, None,
        meta={"source": "bvp", "grid": "uniform", "epsilon": problem.epsilon, "p": problem.p, "N": problem.N},
        extra={"w": w, "flux": r ** (problem.N - 1) * flux_coefficient(du, problem.epsilon, problem.p)},
    )
    return BVPSolution(prof, it, norm, w, problem, u)


class SweepPoint(NamedTuple):
    epsilon: float
    solution: BVPSolution
    gradient_sup: float
    rhs_bound: float


def _radial_mean(r, g, N):
    wt = r ** (N - 1)
    return float(trapezoid(g * wt, r) / trapezoid(wt, r))


def epsilon_sweep(problem_template, eps_list, grid_size=200, newton_cfg=NewtonConfig()):
    """Solve for each eps (strictly decreasing) and collect the two sides of
    the uniform gradient bound

        sup_{inner half} |u'| <= C (mean (eps + u'^2)^{p/2})^{1/p} + C R^{1/(p-1)} ||f||^{1/(p-1)},

    with R the half-width of the annulus and the inner half the middle half
    of it.  Each solve starts from the previous solution.
    """
    eps_list = [float(e) for e in eps_list]
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    a, b = problem_template.annulus
    R = 0.5 * (b - a)
    c = 0.5 * (a + b)
    p, N = problem_template.p, problem_template.N
    fterm = R ** (1 / (p - 1)) * problem_template.f_sup() ** (1 / (p - 1))
    out = []
    guess = None
    for eps in eps_list:
        sol = solve_bvp(replace(problem_template, epsilon=eps), grid_size, newton_cfg, initial=guess)
        guess = sol.nodes
        r = sol.profile.grid
        du = sol.profile.derivs
        inner = (r >= c - R / 2) & (r <= c + R / 2)
        lhs = float(np.max(np.abs(du[inner])))
        rhs = _radial_mean(r, sol.w_channel ** (p / 2), N) ** (1 / p) + fterm
        out.append(SweepPoint(eps, sol, lhs, rhs))
    return out


def manufactured_source(N, p, eps, du, d2u):
    """f = -(r^{N-1} phi(u'))'/r^{N-1} for an exact solution with derivatives
    ``du`` and ``d2u`` (callables of r)."""

    def f(r):
        r = np.asarray(r, dtype=float)
        g, g2 = du(r), d2u(r)
        return -((N - 1) / r * flux_coefficient(g, eps, p) + _flux_slope(g, eps, p) * g2)

    return f


def power_manufactured(N, p, eps, k=2.0, c=1.0):
    """Exact solution u* = c r^k together with its source term."""
    u = lambda r: c * np.asarray(r, dtype=float) ** k
    du = lambda r: c * k * np.asarray(r, dtype=float) ** (k - 1)
    d2u = lambda r: c * k * (k - 1) * np.asarray(r, dtype=float) ** (k - 2)
    return u, manufactured_source(N, p, eps, du, d2u)


def convergence_order(problem, exact, sizes=(100, 200, 400), newton_cfg=NewtonConfig()):
    """Nodal max errors against ``exact`` and the observed orders between
    consecutive grid sizes."""
    errs = []
    for n in sizes:
        sol = solve_bvp(problem, n, newton_cfg)
        errs.append(float(np.max(np.abs(sol.nodes - exact(sol.profile.grid)))))
    orders = [math.log(e1 / e2) / math.log(n2 / n1)
              for (e1, n1), (e2, n2) in zip(zip(errs, sizes), zip(errs[1:], sizes[1:]))]
    return errs, orders
