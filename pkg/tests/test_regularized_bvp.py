import numpy as np
import pytest

from hardylab.errors import NewtonDiverged, SingularJacobian
from hardylab.regularized_bvp import (
    BVPProblem,
    NewtonConfig,
    convergence_order,
    epsilon_sweep,
    flux_coefficient,
    power_manufactured,
    solve_bvp,
)


def manufactured(N, p, eps, k=2.0, annulus=(1.0, 2.0)):
    u, f = power_manufactured(N, p, eps, k)
    a, b = annulus
    return BVPProblem(N, p, eps, annulus, (float(u(a)), float(u(b))), f), u


def test_poisson_case_is_exact_to_second_order():
    # p = 2, u* = r^2 in N = 3: -(r^2 u')'/r^2 = -6
    pb = BVPProblem(3, 2.0, 0.0, (1.0, 2.0), (1.0, 4.0), -6.0)
    errs, orders = convergence_order(pb, lambda r: r**2)
    assert min(orders) >= 1.95
    assert errs[-1] < 1e-6


@pytest.mark.parametrize("p,eps", [(1.5, 1e-4), (1.5, 0.1), (3.0, 1e-4), (3.0, 0.1), (3.0, 0.0)])
def test_manufactured_orders(p, eps):
    pb, u = manufactured(3, p, eps)
    _, orders = convergence_order(pb, u)
    assert min(orders) >= 1.5


def test_linear_solution_p3():
    pb, u = manufactured(3, 3.0, 0.1, k=1.0)
    sol = solve_bvp(pb, 100)
    # in N = 3 the flux form is exact for u = r: (r_{j+1/2}^2 - r_{j-1/2}^2)/h = 2 r_j,
    # so the linear initial guess already solves the discrete system
    assert np.max(np.abs(sol.nodes - u(sol.profile.grid))) < 1e-13
    assert sol.newton_iters == 0
    sol4 = solve_bvp(manufactured(4, 3.0, 0.1, k=1.0)[0], 100)
    assert sol4.newton_iters > 0


@pytest.mark.parametrize("p,eps", [(1.5, 0.0), (2.0, 0.0), (3.0, 0.0), (3.0, 0.5)])
def test_constant_solution_needs_no_newton_step(p, eps):
    sol = solve_bvp(BVPProblem(3, p, eps, (1.0, 2.0), (2.5, 2.5), 0.0), 64)
    assert sol.newton_iters == 0
    assert np.all(sol.nodes == 2.5)
    assert np.all(sol.flux == 0)


def test_singular_jacobian_for_p_below_two():
    with pytest.raises(SingularJacobian):
        solve_bvp(BVPProblem(3, 1.5, 0.0, (1.0, 2.0), (1.0, 1.0), 1.0), 32)


def test_newton_budget():
    pb, _ = manufactured(3, 3.0, 1e-6)
    with pytest.raises(NewtonDiverged) as info:
        solve_bvp(pb, 100, NewtonConfig(max_iter=1))
    assert info.value.last is not None
    assert "residual" in info.value.diagnostics


def test_discrete_flux_balance():
    pb, _ = manufactured(4, 3.0, 1e-3)
    n = 200
    sol = solve_bvp(pb, n)
    r, u = sol.profile.grid, sol.nodes
    h = r[1] - r[0]
    rh = 0.5 * (r[1:] + r[:-1])
    F = rh**3 * flux_coefficient(np.diff(u) / h, pb.epsilon, pb.p)
    bal = np.diff(F) / h + r[1:-1] ** 3 * pb.f(r[1:-1])
    assert np.max(np.abs(bal)) / np.max(np.abs(r[1:-1] ** 3 * pb.f(r[1:-1]))) <= 1e-10


def test_superposition_at_p2():
    base = dict(N=4, p=2.0, epsilon=0.0, annulus=(0.5, 1.5))
    s1 = solve_bvp(BVPProblem(boundary_values=(1.0, 0.0), source=lambda r: np.sin(r), **base), 100)
    s2 = solve_bvp(BVPProblem(boundary_values=(0.0, 2.0), source=3.0, **base), 100)
    s12 = solve_bvp(BVPProblem(boundary_values=(1.0, 2.0), source=lambda r: np.sin(r) + 3.0, **base), 100)
    np.testing.assert_allclose(s12.nodes, s1.nodes + s2.nodes, atol=1e-10)


def test_p2_sweep_is_eps_independent():
    pb = BVPProblem(3, 2.0, 0.1, (1.0, 2.0), (1.0, 4.0), -6.0)
    pts = epsilon_sweep(pb, [1e-1, 1e-3, 1e-6], 100)
    for sp in pts[1:]:
        np.testing.assert_allclose(sp.solution.nodes, pts[0].solution.nodes, atol=1e-12)


def test_sweep_differences_shrink():
    pb, _ = manufactured(3, 3.0, 0.1)
    pts = epsilon_sweep(pb, [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6], 200)
    steps = [np.max(np.abs(b.solution.nodes - a.solution.nodes)) for a, b in zip(pts, pts[1:])]
    assert all(s2 < s1 for s1, s2 in zip(steps, steps[1:]))
    c = [sp.gradient_sup / sp.rhs_bound for sp in pts]
    assert max(c) / min(c) < 2


def test_sweep_zero_source_p15_bounded_and_resolution_stable():
    pb = BVPProblem(3, 1.5, 0.1, (1.0, 2.0), (0.0, 1.0), 0.0)
    eps = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
    a = [sp.gradient_sup for sp in epsilon_sweep(pb, eps, 200)]
    b = [sp.gradient_sup for sp in epsilon_sweep(pb, eps, 400)]
    assert max(a) < 2.0
    np.testing.assert_allclose(a, b, rtol=1e-3)


def test_sweep_requires_decreasing_eps():
    pb, _ = manufactured(3, 3.0, 0.1)
    with pytest.raises(ValueError):
        epsilon_sweep(pb, [1e-3, 1e-2])


def test_problem_validation():
    with pytest.raises(ValueError):
        BVPProblem(3, 2.0, -1.0, (1.0, 2.0), (0.0, 1.0))
    with pytest.raises(ValueError):
        BVPProblem(3, 2.0, 0.0, (0.0, 2.0), (0.0, 1.0))
    with pytest.raises(ValueError):
        BVPProblem(3, 2.0, 0.0, (1.0, 2.0), (0.0, float("nan")))
