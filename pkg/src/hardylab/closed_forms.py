"""Explicit p = 2 bubbles, the critical dilation, and pointwise PDE residuals.

Both explicit families share one formula.  With m = (N-2)/2, rho = lambda*r,

    u(r) = lambda^m K (rho^a1 + rho^a2)^(-m),
    K    = (4N(mu_bar - mu)/(N - 2))^((N-2)/4),
    a1,2 = (sqrt(mu_bar) -/+ sqrt(mu_bar - mu)) / sqrt(mu_bar).

mu = 0 gives a1 = 0, a2 = 2 and the Aubin-Talenti bubble; 0 < mu < mu_bar
gives the Terracini bubble.  Everything is evaluated through ln(rho) so that
radii far outside [1e-300, 1e300] still produce finite logs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DomainError, GridUnderflow
from .exponents import ProblemParams, QSpec, critical_exponent, mu_bar
from .profile import RadialProfile

__all__ = [
    "BubbleKind",
    "BubbleFamily",
    "aubin_talenti",
    "terracini",
    "eval_value",
    "eval_gradient",
    "scale",
    "residual",
    "profile_residual",
]


class BubbleKind(enum.Enum):
    AUBIN_TALENTI = "aubin_talenti"
    TERRACINI = "terracini"


@dataclass(frozen=True)
class BubbleFamily:
    kind: BubbleKind
    N: int
    mu: float = 0.0
    lam: float = 1.0
    x0: tuple | None = None

    def __post_init__(self):
        if self.N < 3:
            raise ValueError("bubbles need N >= 3")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam!r}")
        mb = mu_bar(self.N, 2)
        if self.kind is BubbleKind.AUBIN_TALENTI:
            if self.mu != 0:
                raise ValueError("Aubin-Talenti bubble requires mu = 0")
            if self.x0 is not None and len(self.x0) != self.N:
                raise ValueError("x0 must have N coordinates")
        else:
            if not 0 < self.mu < mb:
                raise ValueError(f"Terracini bubble requires 0 < mu < {mb}")
            if self.x0 is not None and any(c != 0 for c in self.x0):
                raise ValueError("Terracini bubble is centred at the origin")

    # -- derived constants -------------------------------------------------
    @property
    def p(self):
        return 2.0

    @property
    def m(self):
        return (self.N - 2) / 2

    @property
    def centered(self):
        return self.x0 is None or all(c == 0 for c in self.x0)

    @property
    def powers(self):
        mb = mu_bar(self.N, 2)
        s, d = math.sqrt(mb), math.sqrt(mb - self.mu)
        return (s - d) / s, (s + d) / s

    @property
    def amplitude(self):
        """K = (4N(mu_bar - mu)/(N-2))^((N-2)/4)."""
        mb = mu_bar(self.N, 2)
        return (4 * self.N * (mb - self.mu) / (self.N - 2)) ** ((self.N - 2) / 4)

    @property
    def params(self):
        return ProblemParams(self.N, 2.0, self.mu, QSpec.constant(1.0))

    @property
    def origin_coefficient(self):
        """A with u ~ A r^{-gamma1} as r -> 0."""
        a1, _ = self.powers
        return self.lam ** (self.m - self.m * a1) * self.amplitude

    def rescaled(self, lam):
        """Family member lam * self.lam (the critical dilation composes)."""
        return BubbleFamily(self.kind, self.N, self.mu, self.lam * lam, self.x0)

    # -- evaluation ---------------------------------------------------------
    def _pieces(self, r):
        r = np.asarray(r, dtype=float)
        a1, a2 = self.powers
        with np.errstate(divide="ignore"):
            lr = np.log(self.lam) + np.log(r)
        first = np.zeros_like(lr) if a1 == 0 else a1 * lr
        log_g = np.logaddexp(first, a2 * lr)
        w2 = expit((a2 - a1) * lr)
        w1 = expit(-(a2 - a1) * lr)
        log_u = self.m * math.log(self.lam) + math.log(self.amplitude) - self.m * log_g
        return r, log_u, w1, w2, a1, a2

    def log_value(self, r):
        return self._pieces(self._radial(r, allow_zero=True))[1]

    def value(self, r):
        r = self._radial(r, allow_zero=True)
        return np.exp(self._pieces(r)[1])

    def gradient(self, r):
        """Signed radial derivative u'(r)."""
        r = self._radial(r, allow_zero=False)
        r, log_u, w1, w2, a1, a2 = self._pieces(r)
        d1 = a1 * w1 + a2 * w2
        return -self.m * np.exp(log_u) * d1 / r

    def second_derivative(self, r):
        r = self._radial(r, allow_zero=False)
        r, log_u, w1, w2, a1, a2 = self._pieces(r)
        d1 = a1 * w1 + a2 * w2
        bracket = -self.m * d1**2 + (a2 - a1) ** 2 * w1 * w2 - d1
        return -self.m * np.exp(log_u) * bracket / r**2

    def _radial(self, r, allow_zero):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise DomainError("radius must be nonnegative")
        if np.any(r == 0) and (not allow_zero or self.kind is BubbleKind.TERRACINI):
            raise DomainError("evaluation at r = 0 is undefined here")
        return r

    def to_profile(self, grid):
        if not self.centered:
            raise ValueError("off-centre bubbles support point evaluation only")
        grid = np.asarray(grid, dtype=float)
        return RadialProfile(
            grid,
            self.value(grid),
            self.gradient(grid),
            self.params,
            meta={"source": "closed-form", "kind": self.kind.value, "lambda": self.lam},
        )


def aubin_talenti(N, lam=1.0, x0=None):
    return BubbleFamily(BubbleKind.AUBIN_TALENTI, N, 0.0, lam, None if x0 is None else tuple(x0))


def terracini(N, mu, lam=1.0):
    return BubbleFamily(BubbleKind.TERRACINI, N, mu, lam)


def eval_value(fam, r_or_x):
    """Value of the family at radii or at points of R^N.

    A 2-D array (rows are points) is always read as points; a 1-D array is
    read as a single point only for an off-centre bubble, otherwise as radii.
    Only the Aubin-Talenti bubble admits a centre x0 away from the origin.
    """
    arr = np.asarray(r_or_x, dtype=float)
    as_points = arr.ndim >= 2 or (not fam.centered and arr.ndim == 1 and arr.size == fam.N)
    if as_points:
        if arr.shape[-1] != fam.N:
            raise ValueError(f"points must have {fam.N} coordinates")
        x0 = np.zeros(fam.N) if fam.x0 is None else np.asarray(fam.x0, dtype=float)
        return fam.value(np.linalg.norm(arr - x0, axis=-1))
    if not fam.centered:
        raise ValueError("off-centre bubble: pass points of R^N, not radii")
    return fam.value(arr)


def eval_gradient(fam, r):
    """Signed radial derivative u'(r); |grad u| = |u'(r)|."""
    if not fam.centered:
        raise ValueError("radial derivative is defined about the bubble centre only")
    return fam.gradient(r)


def scale(profile, lam, exponents, outside="raise"):
    """Critical dilation r -> lam^a u(lam r), a = (N-p)/p, on the same grid.

    ``outside`` decides what happens to grid points whose image lam*r falls
    off the source grid: ``"raise"`` (GridUnderflow), ``"clip"`` (drop them)
    or ``"extrapolate"`` (power-law continuation from the end slopes).
    A :class:`BubbleFamily` is rescaled exactly.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if isinstance(profile, BubbleFamily):
        return profile.rescaled(lam)
    if lam == 1:
        return profile.with_meta(scaled_by=profile.meta.get("scaled_by", 1.0))
    a = exponents.scaling_exponent
    grid = profile.grid
    src = lam * grid
    inside = (src >= profile.r_min * (1 - 1e-12)) & (src <= profile.r_max * (1 + 1e-12))
    if not np.all(inside):
        if outside == "raise":
            raise GridUnderflow(
                f"lambda={lam!r} maps {np.count_nonzero(~inside)} grid points off the source grid"
            )
        if outside == "clip":
            grid, src = grid[inside], src[inside]
            if grid.size < 2:
                raise GridUnderflow("fewer than two grid points survive clipping")
        elif outside != "extrapolate":
            raise ValueError(f"unknown outside mode {outside!r}")
    vals = np.empty_like(src)
    ders = np.empty_like(src)
    inn = (src >= profile.r_min * (1 - 1e-12)) & (src <= profile.r_max * (1 + 1e-12))
    vals[inn] = profile(src[inn])
    ders[inn] = profile(src[inn], "derivs")
    for mask, end in ((src < profile.r_min, 0), (src > profile.r_max, -1)):
        if not np.any(mask):
            continue
        u0, du0, r0 = profile.values[end], profile.derivs[end], profile.grid[end]
        if u0 <= 0:
            raise GridUnderflow("power-law extrapolation needs positive end values")
        s = r0 * du0 / u0
        vals[mask] = u0 * (src[mask] / r0) ** s
        ders[mask] = s * vals[mask] / src[mask]
    meta = dict(profile.meta)
    meta["scaled_by"] = meta.get("scaled_by", 1.0) * lam
    return RadialProfile(grid, lam**a * vals, lam ** (a + 1) * ders, profile.params, meta)


def _terms_closed(fam, params, r):
    N, p, mu = params.N, params.p, params.mu
    ps = critical_exponent(N, p)
    u = fam.value(r)
    du = fam.gradient(r)
    d2u = fam.second_derivative(r)
    Q = params.q_spec(r)
    # -Delta u for radial u: -(u'' + (N-1)u'/r)
    lap = -(d2u + (N - 1) * du / r)
    hardy = mu * np.abs(u) ** (p - 2) * u / r**p
    src = Q * np.abs(u) ** (ps - 2) * u
    scale_ = np.abs(d2u) + (N - 1) * np.abs(du) / r + np.abs(hardy) + np.abs(src)
    return lap - hardy - src, scale_


def _signed_power(u, e):
    """|u|^{e-1} u, with 0 -> 0 even for e < 1."""
    return np.sign(u) * np.abs(u) ** e


def profile_residual(profile, params):
    """Residual on the profile grid from centred differences of the flux
    r^{N-1}|u'|^{p-2}u'.  Returns (residual, local_scale) arrays."""
    N, p, mu = params.N, params.p, params.mu
    ps = critical_exponent(N, p)
    r, u, du = profile.grid, profile.values, profile.derivs
    flux = r ** (N - 1) * _signed_power(du, p - 1)
    dflux = np.gradient(flux, r, edge_order=2)
    div = -dflux / r ** (N - 1)
    hardy = mu * _signed_power(u, p - 1) / r**p
    src = params.q_spec(r) * _signed_power(u, ps - 1)
    res = div - hardy - src
    return res, np.abs(div) + np.abs(hardy) + np.abs(src)


def residual(fam_or_profile, params, r=None, with_scale=False):
    """PDE residual -Delta_p u - mu r^{-p}|u|^{p-2}u - Q|u|^{p*-2}u at radii r.

    Closed forms are differentiated analytically; grid profiles use the
    conservative flux form and are interpolated (in ln r) to ``r``.  With
    ``with_scale`` the sum of the magnitudes of the individual terms is
    returned as well, which is the natural yardstick for relative checks.
    """
    if isinstance(fam_or_profile, BubbleFamily):
        if r is None:
            raise ValueError("closed forms need explicit radii")
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("residual is undefined at r = 0")
        res, sc = _terms_closed(fam_or_profile, params, r)
    else:
        res, sc = profile_residual(fam_or_profile, params)
        if r is not None:
            r = np.asarray(r, dtype=float)
            if np.any(r <= 0):
                raise DomainError("residual is undefined at r = 0")
            t = np.log(fam_or_profile.grid)
            res = np.interp(np.log(r), t, res)
            sc = np.interp(np.log(r), t, sc)
    return (res, sc) if with_scale else res
