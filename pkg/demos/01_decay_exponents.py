"""
Decay exponents
===============

The two roots of (p-1) g^p - (N-p) g^(p-1) + mu = 0 fix how a solution
behaves at the origin (gamma1) and at infinity (gamma2).
"""

import numpy as np

from hardylab import exponents_for
from hardylab.exponents import char_poly

# the p = 2 case has a closed form: (N-2)/2 -+ sqrt(((N-2)/2)^2 - mu)
params, ex = exponents_for(3, 2.0, 3 / 16)
print("N=3 p=2 mu=3/16:", ex.gamma1, ex.gamma2)
print("  mu_bar =", ex.mu_bar, " p* =", ex.p_star)

# general p goes through bisection plus a bracketed Newton polish
for N, p, mu in [(5, 3.0, 0.1), (3, 1.5, 0.05), (8, 7.5, 1e-9)]:
    _, e = exponents_for(N, p, mu)
    res = [char_poly(g, N, p, mu) for g in (e.gamma1, e.gamma2)]
    print(f"N={N} p={p} mu={mu}: gamma1={e.gamma1:.12g} gamma2={e.gamma2:.12g} residuals={res}")

# gamma1 grows and gamma2 shrinks as mu climbs towards mu_bar
mus = np.linspace(0, 0.99, 6) * ex.mu_bar
for mu in mus:
    _, e = exponents_for(3, 2.0, mu)
    print(f"  mu={mu:.4f}  gamma1={e.gamma1:.4f}  gamma2={e.gamma2:.4f}")
