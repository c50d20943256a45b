"""
The Caputo derivative on a grid
===============================

The L1 scheme against the power rule, and what grading buys near x = 0.
"""

import numpy as np

from fracboussinesq import Field, Grid1D, caputo_l1, caputo_power_rule

##############################################################################
# Power rule
# ----------
#
# For x**beta the Caputo derivative of order nu is known in closed form:
# Gamma(beta+1) / Gamma(beta+1-nu) * x**(beta-nu).

nu = 0.5
x = np.linspace(0.0, 1.0, 6)
print("D^0.5 x^1.5 :", caputo_power_rule(1.5, nu, x))

##############################################################################
# The L1 scheme is exact on piecewise-linear data, so x itself is reproduced
# to rounding error.

grid = Grid1D(1.0, 64)
d = caputo_l1(Field(grid, grid.nodes), nu).values
print("max error on x:", np.max(np.abs(d - caputo_power_rule(1.0, nu, grid.nodes))))

##############################################################################
# Convergence
# -----------
#
# On smooth-enough data the error away from the origin falls like
# dx**(2-nu).

for beta in (nu + 1, 2.0):
    errs = []
    for n in (128, 256, 512):
        g = Grid1D(1.0, n)
        m = g.window(0.1)
        approx = caputo_l1(Field(g, g.nodes**beta), nu).values[m]
        errs.append(np.max(np.abs(approx / caputo_power_rule(beta, nu, g.nodes[m]) - 1)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    print(f"beta={beta:g}: errors {np.round(errs, 10)}, orders {np.round(orders, 3)}")

##############################################################################
# Graded meshes
# -------------
#
# Data like x**(nu/2) has an unbounded derivative at 0. Clustering nodes there
# (x_j = L (j/n)**r) recovers accuracy on the rest of the domain.

beta = nu / 2
for r in (1.0, 2.0, 4.0):
    g = Grid1D(1.0, 256, grading=r)
    m = g.window(0.1)
    approx = caputo_l1(Field(g, g.nodes**beta), nu).values[m]
    err = np.max(np.abs(approx / caputo_power_rule(beta, nu, g.nodes[m]) - 1))
    print(f"grading r={r:g}: max relative error on x >= 0.1 is {err:.2e}")
