"""
Checking the estimates
======================

Each check sweeps a location, forms the empirical constant
c = lhs / rhs and passes when c stays inside the budget without
drifting as the sweep approaches its limit.
"""

from hardylab import exponents_for, terracini
from hardylab.profile import RadialProfile, log_grid
from hardylab.verification import (
    check_caccioppoli_average,
    check_gradient_decay,
    check_interior_gradient_estimate,
    check_scaling_constants,
    check_solution_decay,
)

fam = terracini(3, 3 / 16)
params, ex = exponents_for(3, 2.0, 3 / 16)

for rep in (
    check_solution_decay(fam, ex),
    check_gradient_decay(fam, ex),
    check_scaling_constants(fam, ex, [1.0, 2.0]),
    check_caccioppoli_average(fam, ex, [1e-1, 1e-2, 1e-3, 1e-4]),
    check_interior_gradient_estimate(fam, params, [1e-2, 1e-1, 1.0, 1e1, 1e2]),
):
    print(f"{rep.name:<18} pass={rep.passed!s:<5} c_max={rep.c_emp_max:.4g}")

# a profile decaying at the wrong rate fails: c drifts as r -> 0
r = log_grid(1e-6, 1e6)
rate = ex.gamma1 + 0.1
bad = RadialProfile(r, r**-rate, -rate * r ** (-rate - 1), params)
rep = check_solution_decay(bad, ex, windows={"origin": (1e-6, 1e-5)})
print("wrong rate:", rep.passed, "trend slope", rep.extras["trend_slopes"]["origin"])

# reports serialise to deterministic JSON
print(check_gradient_decay(fam, ex).to_json()[:300], "...")
