"""
Invariant subspaces and ODE reductions
======================================

Power-law subspaces that the nonlinear operator maps into themselves, and
the ODEs that drive their coefficients.
"""

import numpy as np

from fracboussinesq import AquiferParams, Grid1D, PowerBasis, certify_invariance, integrate, reduce
from fracboussinesq.solutions import evaluate, growth_rate, make_solution

nu = 0.5
params = AquiferParams(k=1.0, phi=1.0)
grid = Grid1D(1.0, 200)

##############################################################################
# Certification
# -------------
#
# The operator is applied to random members of each span and the result is
# projected back by least squares. An invariant span leaves a residual at
# rounding level.

bases = {
    "span{x^(nu+1)}": [nu + 1],
    "span{x^(nu+1), 1}": [nu + 1, 0.0],
    "span{x^(nu/2)}": [nu / 2],
    "span{x^(nu/2), 1}": [nu / 2, 0.0],
    "span{x^(nu/3)}": [nu / 3],
}
for name, exps in bases.items():
    cert = certify_invariance(PowerBasis(exps), nu, params, grid)
    print(f"{name:<20} certified={cert.certified!s:<5} residual={cert.max_projection_residual:.2e}")

##############################################################################
# span{x^(nu/2), 1} is not invariant: the product of its two members yields
# a term in x^(-nu/2-1). Only the one-term span{x^(nu/2)} survives.

##############################################################################
# Reduction
# ---------
#
# On span{x^(nu+1)} the PDE collapses to f' = k Gamma(nu+3) f**2 - phi f.

red = reduce(PowerBasis([nu + 1]), nu, params)
print(red.describe())

##############################################################################
# Without a sink the coefficient blows up at t = 1/(k Gamma(nu+3)).

rate = growth_rate(nu, 1.0)
red0 = reduce(PowerBasis([nu + 1]), nu, AquiferParams(k=1.0))
tr = integrate(red0, [1.0], 0.5 / rate, 1e-4)
print("blow-up time:", 1 / rate)
print("RK4 f(t_blowup/2) =", tr.f[-1, 0], " closed form =", 1 / (1 - rate * tr.t[-1]))

##############################################################################
# A strong sink (phi >= k Gamma(nu+3)) gives decay instead, matching the
# closed-form catalog solution.

strong = AquiferParams(k=1.0, phi=2 * rate)
sol = make_solution("unsteady-frac", nu, 1.0, strong)
tr = integrate(reduce(PowerBasis([nu + 1]), nu, strong), [1.0], 1.0, 1e-4)
exact = np.array([evaluate(sol, 1.0, t) for t in tr.t[::2000]])
print("max |RK4 - closed form| :", np.max(np.abs(tr.f[::2000, 0] - exact)))
