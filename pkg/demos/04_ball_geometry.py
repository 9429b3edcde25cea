"""
Averages over off-centre balls
==============================

A radial field integrated over B_s(x) reduces to a one-dimensional
integral weighted by the area of the spherical cap that the sphere
|y| = rho cuts out of the ball.
"""

import numpy as np

from hardylab import BallSpec, aubin_talenti, ball_average, ball_sup
from hardylab.geometry import ball_volume, cap_weight
from scipy.integrate import quad

ball = BallSpec(1.0, 0.5)
N = 3
vol, _ = quad(lambda r: cap_weight(np.array([r]), ball, N)[0], 0.5, 1.5)
print("cap weights integrate to the volume:", vol, ball_volume(N, 0.5))

fam = aubin_talenti(N)
avg = ball_average(fam, 2.0, ball, "derivs")

# Monte Carlo cross-check
rng = np.random.default_rng(1)
n = 200_000
g = rng.standard_normal((n, N))
g /= np.linalg.norm(g, axis=1)[:, None]
y = g * (0.5 * rng.random(n) ** (1 / N))[:, None]
y[:, 0] += 1.0
mc = np.mean(fam.gradient(np.linalg.norm(y, axis=1)) ** 2)
print("mean |grad u|^2 over B_1/2(e1):", avg, " Monte Carlo:", mc)
print("sup |grad u| there:", ball_sup(fam, ball, "derivs"))
