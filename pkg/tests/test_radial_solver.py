from dataclasses import replace

import numpy as np
import pytest

from hardylab.closed_forms import aubin_talenti, terracini
from hardylab.errors import BudgetExceeded, InsufficientRange
from hardylab.exponents import ProblemParams, QSpec, exponents_for
from hardylab.profile import RadialProfile
from hardylab.radial_solver import (
    ShootingConfig,
    decay_diagnostics,
    flux,
    flux_conservation_residual,
    initial_state,
    shoot,
)


def shoot_like(fam, r_min=1e-2, r_max=1e2, **kw):
    params, ex = exponents_for(fam.N, 2.0, fam.mu)
    cfg = ShootingConfig(r_min=r_min, r_max=r_max, amplitude=fam.origin_coefficient, **kw)
    return shoot(params, ex, cfg)


@pytest.mark.parametrize("fam", [aubin_talenti(3), aubin_talenti(4), aubin_talenti(5), terracini(3, 1 / 16), terracini(3, 3 / 16)])
def test_reproduces_closed_forms(fam):
    prof = shoot_like(fam)
    rel_u = np.abs(prof.values / fam.value(prof.grid) - 1)
    rel_du = np.abs(prof.derivs / fam.gradient(prof.grid) - 1)
    # forward shooting amplifies errors like r^{gamma2 - gamma1}, which is
    # 3 for N = 5; the tolerance allows for that growth up to r = 100
    assert rel_u.max() < 1e-6
    assert rel_du.max() < 1e-6


def test_seed_matches_terracini_expansion():
    # K r^{-1/4}(1 + r)^{-1/2} = K r^{-1/4}(1 - r/2 + ...), so c = -1/2 at A = K
    params, ex = exponents_for(3, 2.0, 3 / 16)
    K = terracini(3, 3 / 16).amplitude
    r0, u0, du0, co = initial_state(params, ex, K, 1e-8)
    assert co["c1"] == pytest.approx(-0.5, rel=1e-12)
    assert co["beta"] == pytest.approx(1.0)
    assert r0 == pytest.approx(2e-8, rel=1e-12)
    assert u0 == pytest.approx(K * r0**-0.25 * (1 - 0.5 * r0), rel=1e-15)
    # c scales like A^{p*-p} = A^4
    assert initial_state(params, ex, 1.0)[3]["c1"] == pytest.approx(-0.5 / K**4, rel=1e-12)


def test_amplitude_is_the_origin_coefficient():
    params, ex = exponents_for(5, 3.0, 0.1)
    prof = shoot(params, ex, ShootingConfig(r_min=1e-6, r_max=1e2, amplitude=2.5))
    assert prof.values[0] * prof.grid[0] ** ex.gamma1 == pytest.approx(2.5, rel=1e-6)


def test_general_p_slopes_and_flux():
    params, ex = exponents_for(5, 3.0, 0.1)
    prof = shoot(params, ex, ShootingConfig(r_min=1e-6, r_max=1e6))
    sl = decay_diagnostics(prof, ex)
    assert sl.slope_origin == pytest.approx(-ex.gamma1, abs=2e-2)
    assert sl.slope_infinity == pytest.approx(-ex.gamma2, abs=2e-2)
    assert sl.grad_slope_origin == pytest.approx(-ex.gamma1 - 1, abs=2e-2)
    assert sl.grad_slope_infinity == pytest.approx(-ex.gamma2 - 1, abs=2e-2)
    assert flux_conservation_residual(prof, params) < 1e-8
    assert np.all(prof.values > 0)
    np.testing.assert_allclose(prof.extra["flux"], flux(prof.grid, prof.derivs, 5, 3.0), rtol=1e-10)


def test_double_resolution_agrees():
    # the tolerance, not the output grid, controls accuracy
    params, ex = exponents_for(4, 1.5, 0.2)
    cfg = ShootingConfig(r_min=1e-3, r_max=1e3)
    a = shoot(params, ex, cfg)
    b = shoot(params, ex, replace(cfg, points_per_decade=200))
    np.testing.assert_allclose(b.values[::2], a.values, rtol=1e-9)
    sa, sb = decay_diagnostics(a, ex), decay_diagnostics(b, ex)
    assert np.allclose(sa, sb, atol=1e-3)


def test_p_below_two():
    # gamma2 - gamma1 is nearly 3 here, so the far window stays at r <= 1e4
    params, ex = exponents_for(3, 1.5, 0.05)
    prof = shoot(params, ex, ShootingConfig(r_min=1e-5, r_max=1e4))
    sl = decay_diagnostics(prof, ex)
    assert sl.slope_origin == pytest.approx(-ex.gamma1, abs=2e-2)
    assert sl.slope_infinity == pytest.approx(-ex.gamma2, abs=2e-2)


def test_dop853_agrees():
    fam = terracini(3, 3 / 16)
    prof = shoot_like(fam, method="DOP853")
    assert np.max(np.abs(prof.values / fam.value(prof.grid) - 1)) < 1e-8


def test_budget_and_config_errors():
    params, ex = exponents_for(3, 2.0, 0.1)
    with pytest.raises(BudgetExceeded):
        shoot(params, ex, ShootingConfig(max_steps=5))
    with pytest.raises(ValueError):
        ShootingConfig(rk_tol=1e-16)
    with pytest.raises(ValueError):
        ShootingConfig(r_min=2.0, r_max=1.0)
    with pytest.raises(ValueError):
        shoot(ProblemParams(3, 2.0, 0.1, QSpec.sampled([1, 2], [1, 2])), ex, ShootingConfig())


def test_decay_diagnostics_needs_range():
    prof = RadialProfile(np.array([1.0, 2.0, 3.0]), np.ones(3), np.zeros(3))
    with pytest.raises(InsufficientRange):
        decay_diagnostics(prof)


def test_profile_derivative_consistency():
    fam = terracini(3, 3 / 16)
    prof = shoot_like(fam, r_min=1e-4, r_max=1e4)
    normalised, raw = prof.derivative_consistency()
    assert normalised < 1.0
