import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardylab.closed_forms import (
    BubbleFamily,
    BubbleKind,
    aubin_talenti,
    eval_gradient,
    eval_value,
    residual,
    scale,
    terracini,
)
from hardylab.errors import DomainError, GridUnderflow
from hardylab.exponents import exponents_for
from hardylab.profile import RadialProfile, log_grid


def at_direct(N, lam, r):
    # textbook form (N(N-2) lam^2)^{(N-2)/4} (1 + lam^2 r^2)^{-(N-2)/2}
    return (N * (N - 2) * lam**2) ** ((N - 2) / 4) * (1 + lam**2 * r**2) ** (-(N - 2) / 2)


def terracini_direct(N, mu, lam, r):
    # direct transcription with the exponents written out
    mb = ((N - 2) / 2) ** 2
    s, d = math.sqrt(mb), math.sqrt(mb - mu)
    a1, a2 = (s - d) / s, (s + d) / s
    K = (4 * N * (mb - mu) / (N - 2)) ** ((N - 2) / 4)
    rho = lam * r
    return lam ** ((N - 2) / 2) * K / (rho**a1 + rho**a2) ** ((N - 2) / 2)


@pytest.mark.parametrize("N", [3, 4, 5, 7])
def test_aubin_talenti_matches_textbook_form(N):
    r = np.logspace(-3, 3, 61)
    for lam in (0.3, 1.0, 5.0):
        np.testing.assert_allclose(aubin_talenti(N, lam).value(r), at_direct(N, lam, r), rtol=1e-13)


@pytest.mark.parametrize("mu", [1 / 16, 3 / 16, 0.2])
def test_terracini_matches_direct_form(mu):
    r = np.logspace(-3, 3, 61)
    np.testing.assert_allclose(terracini(3, mu, 2.0).value(r), terracini_direct(3, mu, 2.0, r), rtol=1e-13)


def test_frozen_values():
    assert terracini(3, 3 / 16).value(1.0) == pytest.approx(0.6580370064762462, rel=1e-14)
    assert aubin_talenti(4).gradient(1.0) == pytest.approx(-math.sqrt(2), rel=1e-14)
    assert aubin_talenti(4).value(0.0) == pytest.approx(math.sqrt(8), rel=1e-14)


def test_powers_and_origin_coefficient():
    fam = terracini(3, 3 / 16)
    a1, a2 = fam.powers
    assert (a1, a2) == pytest.approx((0.5, 1.5))
    # (N-2)/2 * a1 = gamma1, (N-2)/2 * a2 = gamma2
    _, ex = exponents_for(3, 2.0, 3 / 16)
    assert fam.m * a1 == pytest.approx(ex.gamma1)
    assert fam.m * a2 == pytest.approx(ex.gamma2)
    r = 1e-9
    assert fam.value(r) * r**ex.gamma1 == pytest.approx(fam.origin_coefficient, rel=1e-8)


@pytest.mark.parametrize("fam", [aubin_talenti(3), aubin_talenti(5, 0.7), terracini(3, 1 / 16), terracini(4, 0.5, 3.0)])
def test_gradient_matches_finite_differences(fam):
    r = np.logspace(-2, 2, 17)
    h = 1e-5 * r
    # rounding floor of a centred difference is ~ eps u / h
    floor = fam.value(r) / r
    fd = (fam.value(r + h) - fam.value(r - h)) / (2 * h)
    assert np.all(np.abs(fam.gradient(r) - fd) <= 1e-8 * (np.abs(fd) + floor))
    fd2 = (fam.gradient(r + h) - fam.gradient(r - h)) / (2 * h)
    assert np.all(np.abs(fam.second_derivative(r) - fd2) <= 1e-7 * (np.abs(fd2) + floor / r))


@pytest.mark.parametrize("fam", [aubin_talenti(3), aubin_talenti(4, 2.0), aubin_talenti(5), terracini(3, 1 / 16), terracini(3, 3 / 16)])
def test_closed_forms_solve_the_equation(fam):
    r = np.logspace(-3, 3, 601)
    res, sc = residual(fam, fam.params, r, with_scale=True)
    assert np.max(np.abs(res) / sc) < 1e-12


def test_extreme_radii_stay_finite():
    fam = terracini(3, 3 / 16)
    r = np.array([1e-300, 1e-150, 1e150, 1e300])
    lu = fam.log_value(r)
    assert np.all(np.isfinite(lu))
    # log-slope at both ends is -gamma1, -gamma2
    assert (lu[1] - lu[0]) / (math.log(1e-150) - math.log(1e-300)) == pytest.approx(-0.25, abs=1e-12)
    assert (lu[3] - lu[2]) / (math.log(1e300) - math.log(1e150)) == pytest.approx(-0.75, abs=1e-12)


def test_domain_errors():
    with pytest.raises(DomainError):
        terracini(3, 0.1).value(0.0)
    with pytest.raises(DomainError):
        aubin_talenti(3).gradient(0.0)
    with pytest.raises(DomainError):
        aubin_talenti(3).value(-1.0)
    with pytest.raises(ValueError):
        BubbleFamily(BubbleKind.TERRACINI, 3, 0.3)
    with pytest.raises(ValueError):
        terracini(3, 0.1).rescaled(-1.0)
    with pytest.raises(ValueError):
        BubbleFamily(BubbleKind.TERRACINI, 3, 0.1, 1.0, (1.0, 0.0, 0.0))


def test_off_centre_points():
    x0 = (1.0, 0.0, 0.0)
    fam = aubin_talenti(3, 1.0, x0)
    pts = np.array([[1.0, 0.0, 0.0], [1.0, 2.0, 0.0]])
    vals = eval_value(fam, pts)
    assert vals[0] == pytest.approx(aubin_talenti(3).value(0.0))
    assert vals[1] == pytest.approx(aubin_talenti(3).value(2.0))
    assert eval_value(fam, [1.0, 0.0, 1.0]) == pytest.approx(aubin_talenti(3).value(1.0))
    with pytest.raises(ValueError):
        eval_value(fam, [0.5])
    with pytest.raises(ValueError):
        eval_gradient(fam, 1.0)
    # a centred family reads a 1-D array as radii, even of length N
    np.testing.assert_allclose(eval_value(aubin_talenti(3), [1.0, 2.0, 3.0]), aubin_talenti(3).value([1.0, 2.0, 3.0]))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(0.05, 20.0), st.floats(0.01, 0.24))
def test_dilation_group_law(l1, l2, mu):
    fam = terracini(3, mu)
    r = np.logspace(-2, 2, 9)
    a = fam.rescaled(l1).rescaled(l2).value(r)
    b = fam.rescaled(l1 * l2).value(r)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    # u_lam(r) = lam^{(N-2)/2} u(lam r)
    np.testing.assert_allclose(fam.rescaled(l1).value(r), l1**0.5 * fam.value(l1 * r), rtol=1e-12)


def test_profile_scaling_agrees_with_family():
    fam = terracini(3, 3 / 16)
    _, ex = exponents_for(3, 2.0, 3 / 16)
    grid = log_grid(1e-4, 1e4, 100)
    prof = fam.to_profile(grid)
    out = scale(prof, 2.0, ex, outside="clip")
    np.testing.assert_allclose(out.values, fam.rescaled(2.0).value(out.grid), rtol=1e-8)
    np.testing.assert_allclose(out.derivs, fam.rescaled(2.0).gradient(out.grid), rtol=1e-7)
    assert 4.8e3 < out.r_max <= 5e3
    with pytest.raises(GridUnderflow):
        scale(prof, 2.0, ex)
    ext = scale(prof, 2.0, ex, outside="extrapolate")
    assert ext.grid.size == grid.size
    # power-law continuation is close far out because the profile is
    # already in its asymptotic regime
    assert ext.values[-1] == pytest.approx(fam.rescaled(2.0).value(grid[-1]), rel=1e-3)
    assert scale(prof, 1.0, ex).values is prof.values


def test_profile_residual_on_sampled_bubble():
    fam = aubin_talenti(4)
    prof = fam.to_profile(log_grid(1e-2, 1e2, 400))
    res, sc = residual(prof, fam.params, with_scale=True)
    inner = slice(2, -2)
    assert np.max(np.abs(res[inner]) / sc[inner]) < 1e-4
    assert isinstance(prof, RadialProfile)
