"""Quadrature for radial fields over off-centre balls and annuli.

A radial integrand over a ball B_s(x) with |x| = d reduces to a 1-D
integral in rho = |y| once the (N-1)-measure of the sphere {|y| = rho}
inside the ball is known; :func:`cap_weight` supplies that measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from .errors import GridCoverage, QuadratureFailure
from .profile import RadialProfile, as_field

__all__ = [
    "BallSpec",
    "CutoffSpec",
    "sphere_area",
    "ball_volume",
    "wedge_integral",
    "cap_weight",
    "ball_average",
    "ball_sup",
    "ball_integral",
    "lq_norm",
    "log_lq_norm",
    "cutoff",
]

_QUAD_RTOL = 1e-7


@dataclass(frozen=True)
class BallSpec:
    """Ball of radius ``radius`` whose centre sits at distance
    ``center_distance`` from the origin."""

    center_distance: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        if self.center_distance < 0:
            raise ValueError("centre distance must be nonnegative")

    @property
    def inner(self):
        return self.center_distance - self.radius

    @property
    def outer(self):
        return self.center_distance + self.radius

    @property
    def avoids_origin(self):
        return self.inner > 0


@dataclass(frozen=True)
class CutoffSpec:
    inner_radius: float
    outer_radius: float
    degree: int = 2

    def __post_init__(self):
        if not 0 <= self.inner_radius < self.outer_radius:
            raise ValueError("need 0 <= inner_radius < outer_radius")
        if self.degree < 2:
            raise ValueError("ramp degree must be at least 2")


def sphere_area(n):
    """(n-1)-measure of the unit sphere in R^n."""
    return 2 * math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n))


def ball_volume(N, s=1.0):
    return math.exp(0.5 * N * math.log(math.pi) - gammaln(0.5 * N + 1)) * s**N


def wedge_integral(theta, k):
    """int_0^theta sin^k, by the downward recurrence to k = 0 or 1."""
    theta = np.asarray(theta, dtype=float)
    s, c = np.sin(theta), np.cos(theta)
    if k % 2 == 0:
        val, j = theta.copy(), 0
    else:
        val, j = 1 - c, 1
    while j < k:
        j += 2
        val = -(s ** (j - 1)) * c / j + (j - 1) / j * val
    return val


def cap_weight(rho, ball, N):
    """(N-1)-measure of {|y| = rho} intersected with the ball."""
    rho = np.asarray(rho, dtype=float)
    d, s = ball.center_distance, ball.radius
    full = sphere_area(N) * rho ** (N - 1)
    out = np.zeros_like(rho)
    inside = rho + d <= s
    out[inside] = full[inside]
    part = (~inside) & (rho >= d - s) & (rho <= d + s) & (d > 0)
    if np.any(part):
        r = rho[part]
        cos_t = np.clip((d * d + r * r - s * s) / (2 * d * r), -1.0, 1.0)
        theta = np.arccos(cos_t)
        out[part] = r ** (N - 1) * sphere_area(N - 1) * wedge_integral(theta, N - 2)
    return out


def _dimension(obj, N):
    if N is not None:
        return int(N)
    params = getattr(obj, "params", None)
    if params is None:
        raise ValueError("dimension N is required for this field")
    return int(params.N)


def _check_range(obj, lo, hi):
    if isinstance(obj, RadialProfile) and not obj.covers(lo, hi):
        raise GridCoverage(
            f"[{lo:.6g}, {hi:.6g}] not covered by grid [{obj.r_min:.6g}, {obj.r_max:.6g}]"
        )


def _quad(fun, a, b, points=None):
    val, err = quad(fun, a, b, epsabs=0.0, epsrel=1e-10, limit=200, points=points)
    if not np.isfinite(val) or err > _QUAD_RTOL * abs(val) + 1e-300:
        raise QuadratureFailure(f"quad on [{a:.6g}, {b:.6g}]: value {val!r}, error {err!r}")
    return val


def _ball_limits(obj, ball, allow_origin):
    lo, hi = ball.inner, ball.outer
    if lo <= 0:
        if not allow_origin:
            raise GridCoverage("ball touches the origin; pass allow_origin=True for bounded fields")
        lo = obj.r_min if isinstance(obj, RadialProfile) else 0.0
    _check_range(obj, lo, hi)
    return lo, hi


def ball_integral(field, power, ball, channel="values", N=None, allow_origin=False):
    """int_{B} |field|^power, reduced to 1-D with cap weights."""
    N = _dimension(field, N)
    f = as_field(field, channel)
    lo, hi = _ball_limits(field, ball, allow_origin)

    def integrand(rho):
        return abs(float(f(rho))) ** power * float(cap_weight(np.array([rho]), ball, N)[0])

    kink = ball.radius - ball.center_distance
    points = [kink] if lo < kink < hi else None
    return _quad(integrand, lo, hi, points)


def ball_average(field, power, ball, channel="values", N=None, allow_origin=False):
    """Mean of |field|^power over the ball, relative tolerance 1e-7."""
    N = _dimension(field, N)
    if power == 0:
        _ball_limits(field, ball, allow_origin)
        return 1.0
    return ball_integral(field, power, ball, channel, N, allow_origin) / ball_volume(N, ball.radius)


def ball_sup(field, ball, channel="values", samples=513):
    """max |field| over the radii met by the ball, refined once around the
    discrete argmax."""
    f = as_field(field, channel)
    lo = ball.inner
    if isinstance(field, RadialProfile):
        lo = max(lo, field.r_min)
    elif lo <= 0:
        lo = 0.0
    hi = ball.outer
    _check_range(field, lo, hi)
    rho = np.linspace(lo, hi, samples)
    if rho[0] == 0:
        rho[0] = np.nextafter(0.0, 1.0)
    vals = np.abs(f(rho))
    k = int(np.argmax(vals))
    best = float(vals[k])
    a, b = rho[max(k - 1, 0)], rho[min(k + 1, samples - 1)]
    if b > a:
        res = minimize_scalar(lambda x: -abs(float(f(x))), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12 * max(abs(b), 1.0)})
        best = max(best, -float(res.fun))
    return best


def log_lq_norm(field, q, annulus, channel="values", N=None):
    """ln of (int_a^b |field|^q |S^{N-1}| rho^{N-1} d rho)^{1/q}.

    The field is normalised by its sampled maximum first, so very large q
    does not overflow.
    """
    N = _dimension(field, N)
    a, b = annulus
    if not 0 < a < b:
        raise ValueError("annulus needs 0 < a < b")
    if q < 1:
        raise ValueError("q must be >= 1")
    _check_range(field, a, b)
    f = as_field(field, channel)
    probe = np.exp(np.linspace(math.log(a), math.log(b), 2049))
    M = float(np.max(np.abs(f(probe))))
    if M == 0:
        return -math.inf
    omega = sphere_area(N)

    def integrand(t):
        rho = math.exp(t)
        return (abs(float(f(rho))) / M) ** q * omega * rho**N

    val = _quad(integrand, math.log(a), math.log(b))
    return math.log(M) + math.log(val) / q


def lq_norm(field, q, annulus, channel="values", N=None):
    """L^q norm of a radial field over the annulus a < |y| < b."""
    return math.exp(log_lq_norm(field, q, annulus, channel, N))


def cutoff(spec):
    """Radial cutoff eta with eta = 1 on [0, r1], 0 beyond r2.

    The ramp is the piecewise polynomial 1 - 2^{k-1} s^k, 2^{k-1}(1-s)^k
    (s = (rho - r1)/(r2 - r1)), whose slope peaks at k/(r2 - r1).
    Returns (eta, deta, c) with |eta'| <= c/(r2 - r1).
    """
    r1, r2, k = spec.inner_radius, spec.outer_radius, spec.degree
    w = r2 - r1

    def eta(rho):
        s = np.clip((np.asarray(rho, dtype=float) - r1) / w, 0.0, 1.0)
        return np.where(s <= 0.5, 1 - 2 ** (k - 1) * s**k, 2 ** (k - 1) * (1 - s) ** k)

    def deta(rho):
        s = np.clip((np.asarray(rho, dtype=float) - r1) / w, 0.0, 1.0)
        d = np.where(s <= 0.5, -k * 2 ** (k - 1) * s ** (k - 1), -k * 2 ** (k - 1) * (1 - s) ** (k - 1))
        return d / w

    probe = np.linspace(r1, r2, 4097)
    c = float(np.max(np.abs(deta(probe))) * w)
    return eta, deta, c
