"""Parameter validation and the critical exponents of the problem.

The equation studied throughout the package is

    -div(|grad u|^{p-2} grad u) - mu |x|^{-p} |u|^{p-2} u = Q(x) |u|^{p*-2} u

in R^N.  This module houses the admissible parameter window and the two
nonnegative roots gamma1 < gamma2 of the characteristic polynomial

    g(gamma) = (p-1) gamma^p - (N-p) gamma^{p-1} + mu,

which are the sharp decay rates of solutions at the origin and at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NearThreshold, NoConvergence, OutOfRange

__all__ = [
    "QSpec",
    "ProblemParams",
    "Exponents",
    "validate",
    "mu_bar",
    "critical_exponent",
    "char_poly",
    "gamma_roots",
    "exponents_for",
]

# mu above mu_bar * (1 - NEAR_THRESHOLD) is rejected: the roots merge there.
NEAR_THRESHOLD = 1e-10
_BISECT_WIDTH = 1e-8
_NEWTON_RESIDUAL = 1e-14
_ACCEPT_RESIDUAL = 1e-12
_TINY = float(np.finfo(float).smallest_subnormal)


@dataclass(frozen=True)
class QSpec:
    """Radial weight Q in front of the critical nonlinearity.

    Either a constant ``value`` or samples ``(radii, samples)`` with a
    declared ``sup_bound``.  Sampled weights are linearly interpolated in
    log-radius and held constant beyond the sampled range.
    """

    value: float | None = 1.0
    radii: tuple | None = None
    samples: tuple | None = None
    sup_bound: float | None = None

    @classmethod
    def constant(cls, value=1.0):
        return cls(value=float(value))

    @classmethod
    def sampled(cls, radii, samples, sup_bound=None):
        radii = tuple(float(r) for r in radii)
        samples = tuple(float(s) for s in samples)
        if sup_bound is None:
            sup_bound = max(abs(s) for s in samples)
        return cls(value=None, radii=radii, samples=samples, sup_bound=float(sup_bound))

    @property
    def is_constant(self):
        return self.value is not None

    @property
    def sup_norm(self):
        if self.is_constant:
            return abs(self.value)
        return self.sup_bound

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.is_constant:
            return np.full_like(r, self.value)
        return np.interp(np.log(r), np.log(self.radii), self.samples)


@dataclass(frozen=True)
class ProblemParams:
    """The quadruple (N, p, mu, Q) defining the equation."""

    N: int
    p: float
    mu: float
    q_spec: QSpec = field(default_factory=QSpec)

    @property
    def Q(self):
        return self.q_spec

    @property
    def p_star(self):
        return critical_exponent(self.N, self.p)

    @property
    def mu_bar(self):
        return mu_bar(self.N, self.p)

    def as_dict(self):
        d = {"N": self.N, "p": self.p, "mu": self.mu}
        if self.q_spec.is_constant:
            d["Q"] = self.q_spec.value
        else:
            d["Q_sup"] = self.q_spec.sup_norm
        return d


@dataclass(frozen=True)
class Exponents:
    mu_bar: float
    p_star: float
    gamma1: float
    gamma2: float
    # (N - p)/p, the scaling weight of the critical dilation
    scaling_exponent: float

    def as_dict(self):
        return {
            "mu_bar": self.mu_bar,
            "p_star": self.p_star,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
        }


def mu_bar(N, p):
    """Hardy threshold ((N - p)/p)^p."""
    return ((N - p) / p) ** p


def critical_exponent(N, p):
    """Critical Sobolev exponent Np/(N - p)."""
    return N * p / (N - p)


def validate(params):
    """Check ``params`` against the admissible window and return it.

    Raises
    ------
    OutOfRange
        With the violated inequality spelled out in the message.
    NearThreshold
        If mu lies within a relative 1e-10 of the Hardy threshold.
    """
    N, p, mu = params.N, params.p, params.mu
    if isinstance(N, bool) or int(N) != N:
        raise OutOfRange("N", N, "N must be an integer")
    if N < 3:
        raise OutOfRange("N", N, "N >= 3")
    if not math.isfinite(p) or not p > 1:
        raise OutOfRange("p", p, "1 < p")
    if not p < N:
        raise OutOfRange("p", p, f"p < N (N={N})")
    mb = mu_bar(N, p)
    if not math.isfinite(mu) or mu < 0:
        raise OutOfRange("mu", mu, "0 <= mu")
    if not mu < mb:
        raise OutOfRange("mu", mu, f"mu < mu_bar = {mb!r}")
    if mu > mb * (1 - NEAR_THRESHOLD):
        raise NearThreshold("mu", mu, f"mu <= mu_bar*(1-{NEAR_THRESHOLD:g}) = {mb * (1 - NEAR_THRESHOLD)!r}")
    q = params.q_spec.sup_norm
    if q is None or not math.isfinite(q) or not q > 0:
        raise OutOfRange("Q", q, "0 < ||Q||_inf < inf")
    if not isinstance(N, int):
        params = replace(params, N=int(N))
    return params


def char_poly(gamma, N, p, mu):
    """g(gamma) = (p-1) gamma^p - (N-p) gamma^{p-1} + mu."""
    return (p - 1) * gamma**p - (N - p) * gamma ** (p - 1) + mu


def _char_poly_deriv(gamma, N, p):
    return (p - 1) * (p * gamma ** (p - 1) - (N - p) * gamma ** (p - 2))


def _residual_scale(gamma, N, p, mu):
    # size of the largest term, so p near N (all terms tiny) is judged fairly
    return max((p - 1) * gamma**p, (N - p) * gamma ** (p - 1), mu, _TINY)


def _root_in(lo, hi, N, p, mu):
    """Bracketed bisection then safeguarded Newton polish."""
    g = lambda x: char_poly(x, N, p, mu)
    glo = g(lo)
    if glo == 0:
        return lo
    ghi = g(hi)
    if ghi == 0:
        return hi
    if glo * ghi > 0:
        # g(top) = mu exactly; for tiny mu rounding can hide the sign change
        end, gend = (lo, glo) if abs(glo) < abs(ghi) else (hi, ghi)
        if abs(gend) <= _ACCEPT_RESIDUAL * _residual_scale(end, N, p, mu):
            return end
        raise NoConvergence(f"no sign change on [{lo}, {hi}]")
    a, b, ga = lo, hi, glo
    for _ in range(200):
        if b - a <= _BISECT_WIDTH:
            break
        m = 0.5 * (a + b)
        gm = g(m)
        if gm == 0:
            return m
        if (gm > 0) == (ga > 0):
            a, ga = m, gm
        else:
            b = m
    # Newton polish, kept inside the bracket: roots far below the bisection
    # width (p near 1, or tiny mu) make plain Newton overshoot past 0
    x = 0.5 * (a + b)
    best, width = x, math.inf
    for _ in range(400):
        gx = g(x)
        if abs(gx) < abs(g(best)):
            best = x
        if abs(gx) <= _NEWTON_RESIDUAL * _residual_scale(x, N, p, mu):
            return x
        if (gx > 0) == (ga > 0):
            a, ga = x, gx
        else:
            b = x
        if b - a <= 2 * np.spacing(b):
            # sign change between neighbouring floats: the root is located as
            # well as it can be, even when it underflows (mu subnormal)
            return min((best, a, b), key=lambda t: abs(g(t)))
        # Newton can crawl towards a root near 0 (g ~ mu - x^2 halves x per
        # step), so force a bisection unless the log-width of the bracket halves
        w = math.log(b) - math.log(max(a, _TINY))
        slow, width = w > 0.5 * width, w
        d = _char_poly_deriv(x, N, p) if x > 0 else math.nan
        xn = x - gx / d if d != 0 and math.isfinite(d) else math.nan
        if slow or not a < xn < b:
            # bisect, geometrically when the bracket spans orders of magnitude
            lo_ = max(a, _TINY)
            xn = math.exp(0.5 * (math.log(lo_) + math.log(b))) if b > 4 * lo_ else 0.5 * (a + b)
        x = xn
    if abs(g(best)) <= _ACCEPT_RESIDUAL * _residual_scale(best, N, p, mu):
        return best
    raise NoConvergence(f"root polish failed near {best!r}: residual {g(best)!r}")


def gamma_roots(params):
    """Return the :class:`Exponents` of a validated parameter set.

    gamma1 is the root in [0, (N-p)/p), gamma2 the root in
    ((N-p)/p, (N-p)/(p-1)].  For mu = 0 both are exact: 0 and (N-p)/(p-1).
    """
    N, p, mu = params.N, params.p, params.mu
    a = (N - p) / p
    top = (N - p) / (p - 1)
    if mu == 0:
        g1, g2 = 0.0, top
    else:
        g1 = _root_in(0.0, a, N, p, mu)
        g2 = _root_in(a, top, N, p, mu)
    return Exponents(
        mu_bar=mu_bar(N, p),
        p_star=critical_exponent(N, p),
        gamma1=g1,
        gamma2=g2,
        scaling_exponent=a,
    )


def exponents_for(N, p, mu, Q=1.0):
    """Shorthand: validate (N, p, mu, Q constant) and compute its exponents."""
    params = validate(ProblemParams(N, p, mu, QSpec.constant(Q)))
    return params, gamma_roots(params)
