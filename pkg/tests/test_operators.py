import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracboussinesq.exceptions import DomainError
from fracboussinesq.operators import (
    Field,
    Grid1D,
    boussinesq_rhs,
    caputo_l1,
    caputo_power_rule,
    flux,
    gamma,
    l1_matrix,
    l1_weights,
)
from fracboussinesq.params import AquiferParams, FractionalOrder

orders = st.floats(min_value=0.05, max_value=0.95)


def test_fractional_order_bounds():
    assert FractionalOrder(1.0).is_local
    assert not FractionalOrder(0.5).is_local
    for bad in (0.0, -0.1, 1.5, math.nan):
        with pytest.raises(DomainError):
            FractionalOrder(bad)


def test_gamma_matches_mpmath_on_range():
    xs = np.linspace(0.5, 30, 200)
    ref = np.array([float(mpmath.gamma(x)) for x in xs])
    assert np.max(np.abs(gamma(xs) / ref - 1)) <= 1e-12


def test_gamma_pole_raises():
    with pytest.raises(DomainError):
        gamma(0.0)
    with pytest.raises(DomainError):
        gamma(-2.0)


def test_grid_nodes():
    g = Grid1D(2.0, 4)
    np.testing.assert_allclose(g.nodes, [0, 0.5, 1, 1.5, 2])
    graded = Grid1D(1.0, 10, grading=3.0)
    assert graded.nodes[0] == 0.0 and graded.nodes[-1] == 1.0
    assert np.all(np.diff(graded.nodes) > 0)
    assert graded.dx_min == pytest.approx(1e-3)
    with pytest.raises(ValueError):
        g.nodes[1] = 3.0


@pytest.mark.parametrize("kwargs", [dict(length=0, n=4), dict(length=1, n=1), dict(length=1, n=4, grading=0.5)])
def test_grid_rejects(kwargs):
    with pytest.raises(DomainError):
        Grid1D(**kwargs)


def test_field_validation():
    g = Grid1D(1.0, 4)
    with pytest.raises(DomainError):
        Field(g, np.ones(4))
    with pytest.raises(DomainError):
        Field(g, [0, 1, np.inf, 1, 1])
    f = Field.sample(g, lambda x: x**2)
    assert np.allclose((2 * f - f).values, f.values)


def test_power_rule_examples():
    nu = 0.5
    assert caputo_power_rule(nu + 1, nu, 2.0) == pytest.approx(gamma(nu + 2) * 2.0, rel=1e-15)
    assert caputo_power_rule(2.0, 1.0, 3.0) == pytest.approx(6.0, rel=1e-15)
    oracle = float(mpmath.gamma(2.5) / mpmath.gamma(2))
    assert caputo_power_rule(1.5, 0.5, 1.0) == pytest.approx(oracle, rel=1e-13)
    assert oracle == pytest.approx(1.3293403882, abs=1e-10)


def test_power_rule_local_limit():
    x = np.linspace(0.1, 2, 20)
    for beta in (0.5, 1.0, 2.5):
        np.testing.assert_allclose(caputo_power_rule(beta, 1 - 1e-6, x), beta * x ** (beta - 1), rtol=1e-4)


def test_power_rule_domain():
    with pytest.raises(DomainError):
        caputo_power_rule(0.0, 0.5, 1.0)
    with pytest.raises(DomainError):
        caputo_power_rule(1.0, 0.5, -1.0)
    assert caputo_power_rule(0.25, 0.5, 0.0) == math.inf


def test_power_rule_against_quadrature_oracle():
    # Caputo integral of x^beta computed independently with mpmath
    beta, nu, x = 1.7, 0.3, 0.8
    integral = mpmath.quad(lambda s: beta * s ** (beta - 1) * (x - s) ** (-nu), [0, x])
    ref = float(integral / mpmath.gamma(1 - nu))
    assert caputo_power_rule(beta, nu, x) == pytest.approx(ref, rel=1e-12)


def test_l1_constant_is_zero():
    g = Grid1D(1.0, 64)
    assert np.all(caputo_l1(Field(g, np.full(65, 3.7)), 0.4).values == 0.0)


@pytest.mark.parametrize("grading", [1.0, 2.0, 4.0])
@pytest.mark.parametrize("nu", [0.25, 0.5, 0.75])
def test_l1_exact_on_linear_data(nu, grading):
    g = Grid1D(1.0, 100, grading)
    d = caputo_l1(Field(g, g.nodes), nu).values
    exact = caputo_power_rule(1.0, nu, g.nodes)
    assert np.max(np.abs(d[1:] - exact[1:])) <= 1e-12


def test_l1_uniform_matches_textbook_weights():
    nu, n = 0.35, 12
    g = Grid1D(1.0, n)
    f = np.sin(3 * g.nodes)
    dx = 1.0 / n
    b = lambda j: (j + 1) ** (1 - nu) - j ** (1 - nu)  # noqa: E731
    ref = [0.0] + [
        dx**-nu / math.gamma(2 - nu) * sum(b(j) * (f[m - j] - f[m - j - 1]) for j in range(m)) for m in range(1, n + 1)
    ]
    np.testing.assert_allclose(caputo_l1(Field(g, f), nu).values, ref, rtol=1e-13, atol=1e-13)


def test_l1_graded_kernel_matches_uniform_weights():
    # the generic nonuniform kernel on a uniform mesh must give the b_j weights
    from fracboussinesq.operators import _kernel_increments

    g = Grid1D(1.0, 40)
    K = _kernel_increments(g.nodes, 0.4)
    W = K / np.diff(g.nodes)[None, :] / gamma(1.4)
    W[0] = 0
    np.testing.assert_allclose(l1_weights(g, 0.6), W, rtol=1e-12, atol=1e-12)


def test_l1_matrix_consistent():
    g = Grid1D(1.0, 30, 2.0)
    f = np.cos(g.nodes)
    np.testing.assert_allclose(l1_matrix(g, 0.3) @ f, caputo_l1(Field(g, f), 0.3).values, atol=1e-13)


def test_l1_rejects_local_order():
    with pytest.raises(DomainError):
        caputo_l1(Field(Grid1D(1.0, 8), np.zeros(9)), 1.0)


def test_l1_order_of_convergence():
    nu, beta = 0.5, 1.5
    errs = []
    for n in (128, 256, 512):
        g = Grid1D(1.0, n)
        m = g.window(0.1)
        d = caputo_l1(Field(g, g.nodes**beta), nu).values[m]
        errs.append(np.max(np.abs(d / caputo_power_rule(beta, nu, g.nodes[m]) - 1)))
    order = math.log2(errs[1] / errs[2])
    assert abs(order - (2 - nu)) <= 0.2


def test_graded_grid_helps_sqrt_data():
    nu, beta = 0.5, 0.25
    errs = {}
    for r in (1.0, 4.0):
        g = Grid1D(1.0, 256, r)
        m = g.window(0.1)
        d = caputo_l1(Field(g, g.nodes**beta), nu).values[m]
        errs[r] = np.max(np.abs(d / caputo_power_rule(beta, nu, g.nodes[m]) - 1))
    assert errs[4.0] < errs[1.0]


@settings(max_examples=25, deadline=None)
@given(nu=orders, a=st.floats(-5, 5), b=st.floats(-5, 5), seed=st.integers(0, 2**16))
def test_l1_linearity(nu, a, b, seed):
    rng = np.random.default_rng(seed)
    g = Grid1D(1.0, 30)
    f, h = rng.normal(size=31), rng.normal(size=31)
    lhs = caputo_l1(Field(g, a * f + b * h), nu).values
    rhs = a * caputo_l1(Field(g, f), nu).values + b * caputo_l1(Field(g, h), nu).values
    scale = 1 + np.max(np.abs(lhs))
    assert np.max(np.abs(lhs - rhs)) <= 1e-11 * scale


@settings(max_examples=25, deadline=None)
@given(nu=orders, c=st.floats(-100, 100), grading=st.floats(1.0, 4.0))
def test_l1_annihilates_constants(nu, c, grading):
    g = Grid1D(1.0, 25, grading)
    assert np.max(np.abs(caputo_l1(Field(g, np.full(26, c)), nu).values)) <= 1e-12 * (1 + abs(c))


def test_rhs_zero_field():
    g = Grid1D(1.0, 20)
    assert np.all(boussinesq_rhs(Field(g, np.zeros(21)), 0.5, AquiferParams(phi=2.0)).values == 0)


def test_rhs_steady_residual_shrinks():
    p = AquiferParams(k=1.0, phi=1.0)
    nu = 0.5
    c = p.phi / (p.k * gamma(nu + 3))
    res = []
    for n in (128, 256, 512):
        g = Grid1D(1.0, n)
        res.append(np.max(np.abs(boussinesq_rhs(Field.sample(g, lambda x: c * x ** (nu + 1)), nu, p).values)))
    assert res[2] < res[1] < res[0]
    assert res[2] <= 1e-3


def test_rhs_half_power_is_pure_decay():
    nu, phi = 0.5, 0.7
    p = AquiferParams(k=2.0, phi=phi)
    g = Grid1D(1.0, 512, grading=4.0)
    h = Field.sample(g, lambda x: 1.3 * x ** (nu / 2))
    r = boussinesq_rhs(h, nu, p).values
    m = g.window(0.1)
    assert np.max(np.abs(r[m] + phi * h.values[m])) <= 1e-2


def test_flux_local_is_exact_product():
    g = Grid1D(1.0, 50)
    h = Field.sample(g, lambda x: x**2)
    np.testing.assert_allclose(flux(h, 1.0).values, 2 * g.nodes**3, atol=1e-12)


def test_flux_of_half_power_is_constant():
    nu = 0.5
    exact = gamma(1 + nu / 2) / gamma(1 - nu / 2)
    g = Grid1D(1.0, 200, grading=4.0)
    f = flux(Field.sample(g, lambda x: x ** (nu / 2)), nu).values
    assert np.max(np.abs(f[g.window(0.1)] / exact - 1)) <= 1e-3


def test_flux_extrapolated_at_origin():
    nu = 0.5
    g = Grid1D(1.0, 400)
    f = flux(Field.sample(g, lambda x: x ** (nu + 1)), nu).values
    # exact flux Gamma(nu+2) x^(2nu+1) vanishes at the origin
    assert abs(f[0]) <= 1e-6
