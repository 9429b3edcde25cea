"""
Closed-form bubbles at p = 2
============================

Aubin-Talenti (mu = 0) and Terracini (0 < mu < mu_bar) profiles, evaluated
in log space so extreme radii stay finite.
"""

import numpy as np

from hardylab import aubin_talenti, terracini, residual

at = aubin_talenti(4)
ter = terracini(3, 3 / 16)

r = np.logspace(-3, 3, 7)
print("r          AT N=4        Terracini N=3 mu=3/16")
for ri, a, t in zip(r, at.value(r), ter.value(r)):
    print(f"{ri:<10.0e} {a:<13.6e} {t:.6e}")

# the profiles solve the equation to rounding
res, sc = residual(ter, ter.params, np.logspace(-3, 3, 601), with_scale=True)
print("max relative residual:", np.max(np.abs(res) / sc))

# dilation u_lam(r) = lam^{(N-2)/2} u(lam r) stays inside the family
lam = 2.0
print("rescaled at r=1:", ter.rescaled(lam).value(1.0), lam**0.5 * ter.value(lam))

# far out the log-slopes are -gamma1 and -gamma2
lu = ter.log_value(np.array([1e-200, 1e-100, 1e100, 1e200]))
print("slopes:", (lu[1] - lu[0]) / (100 * np.log(10)), (lu[3] - lu[2]) / (100 * np.log(10)))
