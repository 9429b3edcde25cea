import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from hardylab.closed_forms import aubin_talenti, terracini
from hardylab.errors import GridCoverage
from hardylab.geometry import (
    BallSpec,
    CutoffSpec,
    ball_average,
    ball_integral,
    ball_sup,
    ball_volume,
    cap_weight,
    cutoff,
    log_lq_norm,
    lq_norm,
    sphere_area,
    wedge_integral,
)
from hardylab.profile import log_grid


def mc_ball_average(fun, d, s, N, power, n=400_000, seed=0):
    """Monte Carlo mean of |fun(|y|)|^power over B_s(d e_1)."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, N))
    g /= np.linalg.norm(g, axis=1)[:, None]
    rad = s * rng.random(n) ** (1 / N)
    y = g * rad[:, None]
    y[:, 0] += d
    vals = np.abs(fun(np.linalg.norm(y, axis=1))) ** power
    return vals.mean(), vals.std() / math.sqrt(n)


def test_sphere_and_ball_constants():
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert ball_volume(3, 2.0) == pytest.approx(4 / 3 * math.pi * 8)
    assert ball_volume(4) == pytest.approx(math.pi**2 / 2)


@pytest.mark.parametrize("k", range(0, 8))
def test_wedge_integral(k):
    for th in (0.3, 1.2, math.pi):
        ref, _ = quad(lambda t: math.sin(t) ** k, 0, th, epsabs=1e-14)
        assert wedge_integral(th, k) == pytest.approx(ref, rel=1e-12, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 7), st.floats(0.0, 3.0), st.floats(0.1, 2.0))
def test_cap_weights_integrate_to_volume(N, d, s):
    ball = BallSpec(d, s)
    lo, hi = max(0.0, d - s), d + s
    pts = [abs(s - d)] if lo < abs(s - d) < hi else None
    vol, _ = quad(lambda r: cap_weight(np.array([r]), ball, N)[0], lo, hi, points=pts, epsabs=0, epsrel=1e-11, limit=200)
    assert vol == pytest.approx(ball_volume(N, s), rel=1e-9)


def test_cap_weight_closed_case():
    # N = 3: area of the part of {|y| = rho} in the ball is 2 pi rho^2 (1 - cos theta)
    ball = BallSpec(1.0, 0.5)
    w = cap_weight(np.array([1.0]), ball, 3)[0]
    cos_t = (1 + 1 - 0.25) / 2
    assert w == pytest.approx(2 * math.pi * (1 - cos_t), rel=1e-14)
    assert w / (2 * math.pi) == pytest.approx(0.125)


@pytest.mark.parametrize("N,d,s,power", [(3, 1.0, 0.5, 2.0), (4, 0.3, 0.15, 3.0), (5, 10.0, 2.5, 1.5)])
def test_ball_average_against_monte_carlo(N, d, s, power):
    fam = aubin_talenti(N)
    got = ball_average(fam, power, BallSpec(d, s), "derivs")
    mc, se = mc_ball_average(fam.gradient, d, s, N, power)
    assert abs(got - mc) <= 5 * se


def test_profile_and_family_agree():
    fam = terracini(3, 3 / 16)
    prof = fam.to_profile(log_grid(1e-4, 1e4, 100))
    for x in (1e-3, 1.0, 1e3):
        b = BallSpec(x, x / 4)
        assert ball_average(prof, 2.0, b, "derivs") == pytest.approx(ball_average(fam, 2.0, b, "derivs"), rel=1e-8)


def test_ball_average_of_constant_and_power_zero():
    b = BallSpec(2.0, 1.0)
    assert ball_average(3.0, 2.0, b, N=4) == pytest.approx(9.0, rel=1e-9)
    assert ball_average(lambda r: r, 0, b, N=4) == 1.0


def test_origin_handling():
    fam = aubin_talenti(3)
    touching = BallSpec(0.5, 1.0)
    with pytest.raises(GridCoverage):
        ball_average(fam, 2.0, touching)
    centred = BallSpec(0.0, 1.0)
    got = ball_average(lambda r: np.ones_like(r), 2.0, centred, N=3, allow_origin=True)
    assert got == pytest.approx(1.0, rel=1e-9)
    prof = fam.to_profile(log_grid(1e-2, 1e2))
    with pytest.raises(GridCoverage):
        ball_average(prof, 2.0, BallSpec(0.01, 0.005))


def test_ball_sup():
    fam = aubin_talenti(3)
    # |u'| = r (1 + r^2/3)^{-3/2}/ sqrt(3) ... peaks at r = sqrt(3/2) for N = 3 in units lam = 1
    r = np.linspace(0.01, 5, 200001)
    peak = np.max(np.abs(fam.gradient(r)))
    assert ball_sup(fam, BallSpec(1.5, 1.0), "derivs") == pytest.approx(peak, rel=1e-9)
    assert ball_sup(lambda x: np.zeros_like(x), BallSpec(1.0, 0.5)) == 0.0


def test_lq_norms():
    # ||1||_{L^q(annulus)} = |annulus|^{1/q}
    N, a, b = 3, 0.5, 2.0
    vol = ball_volume(N, b) - ball_volume(N, a)
    for q in (1.0, 2.0, 150.0):
        assert lq_norm(7.0, q, (a, b), N=N) == pytest.approx(7.0 * vol ** (1 / q), rel=1e-9)
    # large exponents do not overflow in log space
    v = log_lq_norm(lambda r: 1e5 * r, 400.0, (a, b), N=N)
    assert np.isfinite(v)


def test_ball_integral_matches_volume_for_one():
    b = BallSpec(3.0, 1.2)
    assert ball_integral(lambda r: np.ones_like(r), 1.0, b, N=5) == pytest.approx(ball_volume(5, 1.2), rel=1e-9)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_cutoff(k):
    eta, deta, c = cutoff(CutoffSpec(1.0, 2.0, k))
    r = np.linspace(0, 3, 3001)
    e = eta(r)
    assert np.all((e >= 0) & (e <= 1))
    assert np.all(e[r <= 1] == 1) and np.all(e[r >= 2] == 0)
    assert c == pytest.approx(k, rel=1e-6)
    h = 1e-6
    mid = np.linspace(1.1, 1.9, 9)
    np.testing.assert_allclose(deta(mid), (eta(mid + h) - eta(mid - h)) / (2 * h), rtol=1e-5, atol=1e-8)


def test_spec_validation():
    with pytest.raises(ValueError):
        BallSpec(1.0, 0.0)
    with pytest.raises(ValueError):
        CutoffSpec(2.0, 1.0)
