import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erfcx

from fracboussinesq.exceptions import ConvergenceError, DomainError
from fracboussinesq.operators import Field, Grid1D
from fracboussinesq.special import (
    SeriesControl,
    caputo_residual_time,
    kilbas_saigo,
    kilbas_saigo_eval,
    mittag_leffler,
    mittag_leffler_eval,
    ml_asymptotic,
    ml_integral,
    ml_series,
)


def ml_oracle(g, z):
    """E_g(z), z <= 0, from an independent high-precision evaluation.

    Moderate arguments: the Taylor series with enough digits to absorb the
    cancellation. Large arguments: the real-axis spectral integral
    (1/pi) int_0^inf exp(-r x^(1/g)) r^(g-1) sin(g pi) / (r^2g + 2 r^g cos(g pi) + 1) dr,
    taken in the variable s = log r.
    """
    x = -z
    loss = x ** (1 / g) / math.log(10)
    if loss < 150:
        with mpmath.workdps(int(loss) + 40):
            zz, gg = mpmath.mpf(z), mpmath.mpf(g)
            total, i = mpmath.mpf(0), 0
            while True:
                term = zz**i / mpmath.gamma(gg * i + 1)
                total += term
                if i > 10 and abs(term) < mpmath.mpf(10) ** (-35):
                    return float(total)
                i += 1
    with mpmath.workdps(40):
        # r = exp(s) removes the r**(g-1) endpoint singularity
        gg = mpmath.mpf(g)
        c, sn = mpmath.cos(gg * mpmath.pi), mpmath.sin(gg * mpmath.pi)
        lX = mpmath.log(x) / gg

        def f(s):
            q = mpmath.exp(gg * s)
            return mpmath.exp(-mpmath.exp(s + lX)) * q * sn / (q * q + 2 * q * c + 1)

        # beyond s = log(300) - lX the integrand is below exp(-300)
        top = -lX + mpmath.log(300)
        pts = [-mpmath.inf] + sorted({-lX - 40, -lX - 5, -lX, min(mpmath.mpf(0), top - 1)}) + [top]
        return float(mpmath.quad(f, pts) / mpmath.pi)


def ks_oracle(a, b, lam, t):
    with mpmath.workdps(60):
        a, b, lam, t = map(mpmath.mpf, (a, b, lam, t))
        total, c, i = mpmath.mpf(1), mpmath.mpf(1), 1
        while True:
            j = i - 1
            c *= mpmath.gamma(a * (j + j * b / a + b / a) + 1) / mpmath.gamma(a * (j + j * b / a + b / a + 1) + 1)
            term = (-lam) ** i * t ** (i * (a + b)) * c
            total += term
            if abs(term) < mpmath.mpf(10) ** (-40):
                return float(total)
            i += 1


def test_series_control_validation():
    with pytest.raises(DomainError):
        SeriesControl(max_terms=5)
    with pytest.raises(DomainError):
        SeriesControl(abs_tol=0.0)
    with pytest.raises(DomainError):
        SeriesControl(large_arg_switch=1.0)


@pytest.mark.parametrize("g", [0.2, 0.5, 1.0])
def test_ml_at_zero(g):
    assert mittag_leffler(g, 0.0) == 1.0


def test_ml_examples():
    assert mittag_leffler(1.0, -1.0) == pytest.approx(0.3678794412, abs=1e-10)
    assert mittag_leffler(0.5, -2.0) == pytest.approx(float(mpmath.exp(4) * mpmath.erfc(2)), abs=1e-14)
    assert mittag_leffler(0.5, -2.0) == pytest.approx(0.2554, abs=1e-4)


def test_ml_exponential_identity():
    z = np.linspace(-5, 0, 101)
    assert np.max(np.abs(mittag_leffler(1.0, z) - np.exp(z))) <= 1e-12


def test_ml_half_erfcx_identity():
    x = np.linspace(0, 3, 121)
    assert np.max(np.abs(mittag_leffler(0.5, -x) - erfcx(x))) <= 1e-10


@pytest.mark.parametrize("g", [0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999])
@pytest.mark.parametrize("z", [-0.01, -0.5, -1.4, -3.0, -7.5, -10.0, -12.0, -40.0, -300.0])
def test_ml_against_mpmath(g, z):
    assert mittag_leffler(g, z) == pytest.approx(ml_oracle(g, z), abs=1e-13)


@pytest.mark.parametrize("g", [0.3, 0.5, 0.7, 0.9])
def test_branches_within_their_estimates_at_switch(g):
    # each branch that reports success is within its own error estimate
    z = -SeriesControl().large_arg_switch
    ref = ml_oracle(g, z)
    integral = ml_integral(g, z)
    assert abs(integral.value - ref) <= max(integral.error, 1e-14)
    for branch in (ml_series, ml_asymptotic):
        try:
            ev = branch(g, z)
        except ConvergenceError:
            continue
        assert abs(ev.value - ref) <= ev.error + 1e-15


@pytest.mark.parametrize("g", [0.99, 0.9999, 0.99999, 0.999999])
@pytest.mark.parametrize("z", [-0.5, -4.0, -10.0, -20.0])
def test_integral_near_exponential_limit(g, z):
    # the spectral peak narrows to width ~pi*(1-g); the estimate must still bound the error
    ref = ml_oracle(g, z)
    ev = ml_integral(g, z)
    assert abs(ev.value - ref) <= max(ev.error, 1e-16)
    assert mittag_leffler(g, z) == pytest.approx(ref, abs=1e-14)


def test_branch_selection():
    assert mittag_leffler_eval(0.5, -0.5).branch == "series"
    assert mittag_leffler_eval(0.5, -1e4).branch == "asymptotic"
    assert mittag_leffler_eval(0.9, -10.0).branch == "integral"
    assert mittag_leffler_eval(1.0, -3.0).branch == "exp"


def test_ml_domain():
    with pytest.raises(DomainError):
        mittag_leffler(0.5, 0.1)
    with pytest.raises(DomainError):
        mittag_leffler(0.0, -1.0)


@settings(max_examples=60, deadline=None)
@given(g=st.floats(0.05, 1.0), x=st.floats(0.0, 700.0))
def test_ml_bounds(g, x):
    # x <= 700 keeps exp(-x) (the g = 1 case) representable
    v = mittag_leffler(g, -x)
    assert 0 < v <= 1


@settings(max_examples=30, deadline=None)
@given(g=st.floats(0.1, 1.0), phi=st.floats(0.0, 5.0))
def test_ml_relaxation_monotone(g, phi):
    t = np.linspace(0, 3, 40)
    v = mittag_leffler(g, -phi * t**g)
    assert np.all(np.diff(v) <= 1e-15)


def test_ks_examples():
    assert kilbas_saigo(0.4, 0.3, 2.0, 0.0) == 1.0
    assert kilbas_saigo(1.0, 0.0, 1.0, 2.0) == pytest.approx(0.1353352832, abs=1e-10)
    t = np.linspace(0, 2, 9)
    lam = 0.8
    np.testing.assert_allclose(kilbas_saigo(0.7, 0.0, lam, t), mittag_leffler(0.7, -lam * t**0.7), atol=1e-10)


def test_ks_degenerates_to_ml_on_grid():
    worst = 0.0
    for a in np.linspace(0.3, 0.9, 5):
        for lam in np.linspace(0.2, 1.0, 5):
            t = np.linspace(0, 1, 5)
            worst = max(worst, np.max(np.abs(kilbas_saigo(a, 0.0, lam, t) - mittag_leffler(a, -lam * t**a))))
    assert worst <= 1e-10


@pytest.mark.parametrize(
    "a,b,lam,t",
    [(0.5, 0.2, 1.0, 1.0), (0.4, -0.3, 0.7, 2.0), (0.8, 0.2, 2.0, 1.5), (0.6, 0.4, 1.0, 0.3), (1.0, 0.0, 3.0, 2.0)],
)
def test_ks_against_mpmath_product_form(a, b, lam, t):
    assert kilbas_saigo(a, b, lam, t) == pytest.approx(ks_oracle(a, b, lam, t), abs=1e-12)


def test_ks_domain_and_limits():
    with pytest.raises(DomainError):
        kilbas_saigo(0.5, 0.6, 1.0, 1.0)
    with pytest.raises(DomainError):
        kilbas_saigo(0.5, -0.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        kilbas_saigo(0.5, 0.1, -1.0, 1.0)
    with pytest.raises(ConvergenceError):
        kilbas_saigo_eval(0.5, 0.0, 1.0, 400.0)
    # upper end of the window is inclusive despite 1 - 0.8 != 0.2 in binary
    assert 0 < kilbas_saigo(0.8, 0.2, 1.0, 1.0) < 1


def test_residual_of_constant_is_zero():
    g = Grid1D(1.0, 50)
    assert caputo_residual_time(Field(g, np.ones(51)), 0.5, lambda t: np.zeros_like(t)) == 0.0


def _residuals(y, rhs, g, ms=(200, 400, 800)):
    out = []
    for m in ms:
        grid = Grid1D(1.0, m)
        t = grid.nodes
        out.append(caputo_residual_time(Field(grid, y(t)), g, rhs(t), t_min=0.1))
    return np.array(out)


@pytest.mark.parametrize("g", [0.4, 0.7])
def test_ml_solves_relaxation_equation(g):
    phi = 1.5
    r = _residuals(lambda t: mittag_leffler(g, -phi * t**g), lambda t: -phi * mittag_leffler(g, -phi * t**g), g)
    assert np.all(np.diff(r) < 0)
    assert math.log2(r[1] / r[2]) >= 0.8


@pytest.mark.parametrize("g,beta", [(0.4, 0.1), (0.4, -0.2), (0.7, 0.3)])
def test_ks_solves_cauchy_problem(g, beta):
    lam = 1.0

    def y(t):
        return kilbas_saigo(g, beta, lam, t)

    def rhs(t):
        with np.errstate(divide="ignore"):
            return -lam * t**beta * y(t)

    r = _residuals(y, rhs, g)
    assert np.all(np.diff(r) < 0)
    assert math.log2(r[1] / r[2]) >= 0.8


def test_residual_rejects_graded_time_grid():
    g = Grid1D(1.0, 10, 2.0)
    with pytest.raises(DomainError):
        caputo_residual_time(Field(g, np.ones(11)), 0.5, np.zeros(11))
