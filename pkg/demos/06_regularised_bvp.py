"""
Regularised problem on an annulus
=================================

Finite differences in flux form with a damped Newton solve.  A
manufactured solution u = r^2 gives the source exactly, so the
discretisation error and its order can be measured.
"""

import numpy as np

from hardylab import BVPProblem, ProblemParams, solve_bvp
from hardylab.profile import RadialProfile
from hardylab.regularized_bvp import convergence_order, epsilon_sweep, power_manufactured
from hardylab.verification import build_moser_schedule, check_moser

for p, eps in [(2.0, 0.0), (1.5, 1e-4), (3.0, 1e-4)]:
    u, f = power_manufactured(3, p, eps)
    pb = BVPProblem(3, p, eps, (1.0, 2.0), (1.0, 4.0), f)
    errs, orders = convergence_order(pb, u)
    print(f"p={p} eps={eps}: errors {np.round(errs, 10)} orders {np.round(orders, 3)}")

# as eps -> 0 the solutions settle and the gradient bound stays put
u, f = power_manufactured(3, 3.0, 0.0)
pb = BVPProblem(3, 3.0, 0.1, (1.0, 2.0), (1.0, 4.0), f)
for sp in epsilon_sweep(pb, [1e-1, 1e-3, 1e-6], 200):
    print(f"eps={sp.epsilon:g}  sup|u'|={sp.gradient_sup:.6f}  bound={sp.rhs_bound:.6f}")

# Moser steps on the solved field, p > 2 schedule
u, f = power_manufactured(4, 3.0, 1e-4)
pb = BVPProblem(4, 3.0, 1e-4, (1e-2, 2.0), (float(u(1e-2)), 4.0), f)
sol = solve_bvp(pb, 400)
wbar = RadialProfile(sol.profile.grid, np.sqrt(sol.w_channel), None)
sched = build_moser_schedule(ProblemParams(4, 3.0, 0.0), 4)
print("alphas", sched.alphas, "radii", np.round(sched.radii, 4))
rep = check_moser(wbar, pb.f_sup(), sched)
print("Moser steps pass:", rep.passed, [f"{c:.2e}" for c in rep.c_values])
