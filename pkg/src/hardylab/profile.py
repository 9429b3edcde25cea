"""Discretised radial functions carrying values and first derivatives."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .errors import GridCoverage

__all__ = ["RadialProfile", "log_grid", "as_field"]


def log_grid(r_min, r_max, points_per_decade=100):
    """Log-uniform radii covering [r_min, r_max] inclusive."""
    n = max(2, int(round(np.log10(r_max / r_min) * points_per_decade)) + 1)
    return np.exp(np.linspace(np.log(r_min), np.log(r_max), n))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Samples of a radial function u and its derivative u' on a radius grid.

    ``grid`` is normally log-uniform (solver and closed-form output); the
    finite-difference BVP produces uniform grids, recorded in ``meta``.
    Interpolation always happens in t = ln r.
    """

    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    params: object = None
    meta: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        derivs = self.derivs
        if derivs is None:
            derivs = np.gradient(values, grid, edge_order=2)
        derivs = np.asarray(derivs, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid must be a 1-D array with at least two radii")
        if values.shape != grid.shape or derivs.shape != grid.shape:
            raise ValueError("values/derivs must match the grid shape")
        if not np.all(grid > 0) or not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing and positive")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(derivs))):
            raise ValueError("profile contains non-finite samples")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivs", derivs)
        object.__setattr__(self, "meta", dict(self.meta))
        object.__setattr__(self, "extra", {k: np.asarray(v, dtype=float) for k, v in self.extra.items()})

    @property
    def r_min(self):
        return self.grid[0]

    @property
    def r_max(self):
        return self.grid[-1]

    def __len__(self):
        return self.grid.size

    def channel(self, name):
        if name in ("values", "u"):
            return self.values
        if name in ("derivs", "du"):
            return self.derivs
        return self.extra[name]

    @cached_property
    def _t(self):
        return np.log(self.grid)

    @cached_property
    def _value_interp(self):
        t, u = self._t, self.values
        dudt = self.grid * self.derivs
        if np.all(u > 0):
            return "log", CubicHermiteSpline(t, np.log(u), dudt / u)
        if np.all(u < 0):
            return "neglog", CubicHermiteSpline(t, np.log(-u), dudt / u)
        return "lin", CubicHermiteSpline(t, u, dudt)

    def _spline(self, y):
        if np.all(y > 0):
            return "log", CubicSpline(self._t, np.log(y))
        if np.all(y < 0):
            return "neglog", CubicSpline(self._t, np.log(-y))
        return "lin", CubicSpline(self._t, y)

    @cached_property
    def _splines(self):
        return {}

    def _interp_for(self, name):
        if name in ("values", "u"):
            return self._value_interp
        if name not in self._splines:
            self._splines[name] = self._spline(self.channel(name))
        return self._splines[name]

    def __call__(self, r, channel="values", extrapolate=False):
        """Interpolate ``channel`` at radii ``r``."""
        r = np.asarray(r, dtype=float)
        if not extrapolate:
            lo, hi = self.grid[0], self.grid[-1]
            tol = 1e-12 * hi
            if np.any(r < lo * (1 - 1e-12)) or np.any(r > hi + tol):
                raise GridCoverage(
                    f"radii [{np.min(r):.6g}, {np.max(r):.6g}] outside grid [{lo:.6g}, {hi:.6g}]"
                )
            r = np.clip(r, lo, hi)
        kind, spl = self._interp_for(channel)
        y = spl(np.log(r))
        if kind == "log":
            return np.exp(y)
        if kind == "neglog":
            return -np.exp(y)
        return y

    def value_derivative(self, r):
        """Derivative of the value interpolant (used when resampling)."""
        r = np.asarray(r, dtype=float)
        kind, spl = self._value_interp
        t = np.log(r)
        if kind == "lin":
            return spl(t, 1) / r
        u = self(r, extrapolate=True)
        return u * spl(t, 1) / r

    def covers(self, lo, hi):
        return lo >= self.grid[0] * (1 - 1e-12) and hi <= self.grid[-1] * (1 + 1e-12)

    def window(self, lo, hi):
        """Boolean mask of grid points inside [lo, hi]."""
        return (self.grid >= lo * (1 - 1e-12)) & (self.grid <= hi * (1 + 1e-12))

    def derivative_consistency(self):
        """Largest relative mismatch between chord slopes and averaged derivs,
        together with the bound 10 * dt^2 it is measured against."""
        dt = np.diff(self._t)
        chord = np.diff(self.values) / np.diff(self.grid)
        avg = 0.5 * (self.derivs[1:] + self.derivs[:-1])
        # chords of nearly flat stretches are dominated by rounding in the values
        noise = 8 * np.finfo(float).eps * np.max(np.abs(self.values)) / np.diff(self.grid)
        scale = np.maximum(np.abs(avg), np.abs(chord)) + noise
        scale = np.where(scale > 0, scale, 1.0)
        rel = np.abs(chord - avg) / scale
        return float(np.max(rel / (10 * dt**2))), float(np.max(rel))

    def with_meta(self, **kw):
        meta = dict(self.meta)
        meta.update(kw)
        return RadialProfile(self.grid, self.values, self.derivs, self.params, meta, self.extra)


def as_field(obj, channel="values"):
    """Callable r -> field for a :class:`RadialProfile` channel, a plain callable,
    or a closed-form family (anything with ``value``/``gradient`` methods)."""
    if isinstance(obj, RadialProfile):
        return lambda r: obj(r, channel)
    if hasattr(obj, "value") and hasattr(obj, "gradient"):
        return obj.value if channel in ("values", "u") else obj.gradient
    if callable(obj):
        return obj
    if np.isscalar(obj):
        c = float(obj)
        return lambda r: np.full_like(np.asarray(r, dtype=float), c)
    raise TypeError(f"cannot build a radial field from {type(obj).__name__}")
