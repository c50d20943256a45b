"""
Mittag-Leffler and Kilbas-Saigo functions
=========================================

Evaluating E_gamma(z) for z <= 0 and the relaxation it describes.
"""

import numpy as np
from scipy.special import erfcx

from fracboussinesq import kilbas_saigo, mittag_leffler
from fracboussinesq.special import mittag_leffler_eval

##############################################################################
# Known cases
# -----------
#
# gamma = 1 is the exponential and gamma = 1/2 is exp(x**2) erfc(x).

z = np.linspace(-5, 0, 6)
print("E_1(z) - exp(z):   ", mittag_leffler(1.0, z) - np.exp(z))
x = np.linspace(0, 3, 4)
print("E_1/2(-x) - erfcx: ", mittag_leffler(0.5, -x) - erfcx(x))

##############################################################################
# Three evaluation branches
# -------------------------
#
# The Taylor series serves small |z|, the algebraic asymptotic expansion
# serves large |z|, and a real-axis integral covers the gap. Each result
# carries its own error estimate.

for zz in (-0.5, -10.0, -1e4):
    ev = mittag_leffler_eval(0.7, zz)
    print(f"E_0.7({zz:g}) = {ev.value:.15g}  branch={ev.branch}  error<={ev.error:.1e}")

##############################################################################
# Fractional relaxation
# ---------------------
#
# y(t) = E_gamma(-phi t**gamma) solves D^gamma y = -phi y. Smaller gamma
# gives a fast initial drop followed by a slow power-law tail.

t = np.array([0.0, 0.1, 1.0, 10.0, 100.0])
for g in (0.3, 0.6, 0.9, 1.0):
    print(f"gamma={g:.1f}:", np.round(mittag_leffler(g, -t**g), 6))

##############################################################################
# Time-dependent sink
# -------------------
#
# With phi(t) = lam t**beta the solution is the Kilbas-Saigo function
# E_{a, 1+beta/a, beta/a}(-lam t**(a+beta)); for beta = 0 it reduces to
# the Mittag-Leffler case.

tt = np.linspace(0, 2, 5)
print("KS(a=0.6, b=0):  ", kilbas_saigo(0.6, 0.0, 1.0, tt))
print("E_0.6(-t^0.6):   ", mittag_leffler(0.6, -tt**0.6))
print("KS(a=0.6, b=0.3):", kilbas_saigo(0.6, 0.3, 1.0, tt))
