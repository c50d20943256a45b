"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (shown in the terminal summary) and
then asserts the same condition.
"""

import subprocess
import sys

import numpy as np
import pytest
from scipy.special import erfcx

from fracboussinesq.checks import (
    l1_power_errors,
    observed_orders,
    rk4_closed_form_error,
    steady_residuals,
    time_residual_orders,
)
from fracboussinesq.exceptions import DomainError
from fracboussinesq.operators import Grid1D
from fracboussinesq.params import AquiferParams
from fracboussinesq.solutions import evaluate, growth_rate, make_solution
from fracboussinesq.special import kilbas_saigo, mittag_leffler
from fracboussinesq.subspace import CERTIFY_TOL, PowerBasis, certify_invariance
from fracboussinesq.validator import SimConfig, error_report, simulate

NUS = (0.25, 0.5, 0.75)
NS = (128, 256, 512)


def test_1_power_rule_l1(criterion):
    notes, ok = [], True
    for nu in NUS:
        exact_err = l1_power_errors(1.0, nu, ns=NS)
        ok &= bool(np.all(exact_err <= 1e-12))
        notes.append(f"nu={nu:g} beta=1 err={exact_err.max():.1e}")
        for beta in (nu + 1, 2.0):
            errs = l1_power_errors(beta, nu, ns=NS)
            order = observed_orders(NS, errs)[-1]
            ok &= bool(np.all(np.diff(errs) < 0)) and abs(order - (2 - nu)) <= 0.2
            notes.append(f"nu={nu:g} beta={beta:g} order={order:.3f}")
    assert criterion("1 (power rule / L1)", ok, "; ".join(notes))


def test_2_steady_residual(criterion):
    res = steady_residuals(nu=0.5, k=1.0, phi=1.0, ns=NS)
    ok = res[-1] <= 1e-3 and bool(np.all(np.diff(res) < 0))
    detail = "max|F[h]| at N=128,256,512: " + ", ".join(f"{r:.2e}" for r in res)
    assert criterion("2 (steady residual)", ok, detail)


def test_3_ode_reduction(criterion):
    nu, k = 0.5, 1.0
    rate = growth_rate(nu, k)
    cases = [("phi=0", 0.0, 0.5 / rate), ("phi=2k*Gamma(nu+3)", 2 * rate, 3 / (2 * rate))]
    notes, ok = [], True
    for label, phi, t_end in cases:
        err = rk4_closed_form_error(nu, k, phi, t_end, 1e-4)
        ratio = rk4_closed_form_error(nu, k, phi, t_end, t_end / 20) / rk4_closed_form_error(nu, k, phi, t_end, t_end / 40)
        ok &= err <= 1e-8 and 12 <= ratio <= 20
        notes.append(f"{label}: err={err:.1e}, ratio={ratio:.2f}")
    assert criterion("3 (ODE reduction)", ok, "; ".join(notes))


BASES = [
    ("W1", lambda nu: (nu + 1,), True),
    ("W2", lambda nu: (nu + 1, 0.0), True),
    ("W~1", lambda nu: (nu / 2,), True),
    ("W~2", lambda nu: (nu / 2, 0.0), True),
    ("{nu/3}", lambda nu: (nu / 3,), False),
]


@pytest.mark.parametrize("name,exps,certified", BASES, ids=[b[0] for b in BASES])
def test_4_invariance(name, exps, certified, criterion):
    nu = 0.5
    cert = certify_invariance(PowerBasis(exps(nu)), nu, AquiferParams(k=1.0, phi=1.0), Grid1D(1.0, 200))
    if certified:
        ok = cert.certified and cert.max_projection_residual < 1e-8
        want = "certified, residual < 1e-8"
    else:
        ok = not cert.certified
        want = f"rejected (residual >= {CERTIFY_TOL:g})"
    detail = f"{name}: residual={cert.max_projection_residual:.2e}, expected {want}"
    assert criterion(f"4 (invariance, {name})", ok, detail)


def test_5_special_functions(criterion):
    z = np.linspace(-5, 0, 501)
    e1 = np.max(np.abs(mittag_leffler(1.0, z) - np.exp(z)))
    x = np.linspace(0, 3, 301)
    e_half = np.max(np.abs(mittag_leffler(0.5, -x) - erfcx(x)))
    ks = 0.0
    t = np.linspace(0, 1, 5)
    for a in np.linspace(0.3, 0.9, 5):
        for lam in np.linspace(0.2, 1.0, 5):
            ks = max(ks, np.max(np.abs(kilbas_saigo(a, 0.0, lam, t) - mittag_leffler(a, -lam * t**a))))
    ok = e1 <= 1e-12 and e_half <= 1e-10 and ks <= 1e-10
    detail = f"E_1 vs exp {e1:.1e}; E_1/2 vs erfcx {e_half:.1e}; KS b=0 vs ML {ks:.1e}"
    assert criterion("5 (special functions)", ok, detail)


def test_6_fractional_ode_residuals(criterion):
    phi, lam, beta = 1.5, 1.0, 0.1
    notes, ok = [], True
    for g in (0.4, 0.7):
        res, orders = time_residual_orders(
            lambda t, g=g: mittag_leffler(g, -phi * t**g), lambda t, g=g: -phi * mittag_leffler(g, -phi * t**g), g
        )
        ok &= bool(np.all(np.diff(res) < 0)) and orders[-1] >= 0.8
        notes.append(f"ML g={g:g} order={orders[-1]:.2f}")
        res, orders = time_residual_orders(
            lambda t, g=g: kilbas_saigo(g, beta, lam, t),
            lambda t, g=g: -lam * t**beta * kilbas_saigo(g, beta, lam, t),
            g,
        )
        ok &= bool(np.all(np.diff(res) < 0)) and orders[-1] >= 0.8
        notes.append(f"KS g={g:g} order={orders[-1]:.2f}")
    assert criterion("6 (fractional ODE residuals)", ok, "; ".join(notes))


def _validator_cases():
    rate = growth_rate(0.5, 1.0)
    return [
        ("steady", "steady-frac", AquiferParams(phi=1.0), 1.0, 1.0, 1.0),
        ("unsteady phi=0", "unsteady-frac", AquiferParams(), 1.0, 1.0, "half"),
        ("unsteady phi=2k*Gamma(nu+3)", "unsteady-frac", AquiferParams(phi=2 * rate), 1.0, 1.0, 1 / rate),
        ("x^(nu/2) exponential", "exp-half", AquiferParams(phi=1.0), 1.0, 1.0, 1.0),
        ("time-fractional ML gamma=0.6", "tf-ml", AquiferParams(phi=1.0), 0.6, 40.0, 0.5),
    ]


@pytest.mark.parametrize("label,fam,params,gamma,length,t_end", _validator_cases(), ids=lambda v: str(v) if isinstance(v, str) else None)
def test_7_validator_oracle_closure(label, fam, params, gamma, length, t_end, criterion):
    nu = 0.5
    sol = make_solution(fam, nu, gamma, params)
    if t_end == "half":
        t_end = 0.5 * sol.t_blowup
    errs = []
    for n in (100, 200, 400):
        cfg = SimConfig(Grid1D(length, n), t_end, t_end, nu, gamma, params, solution=sol)
        res = simulate(cfg)
        errs.append(error_report(res, sol).l2_rel if res.stability_flag else np.inf)
    ok = errs[-1] <= 1e-2 and bool(np.all(np.diff(errs) < 0))
    detail = f"{label}: l2_rel at N=100,200,400 = " + ", ".join(f"{e:.2e}" for e in errs)
    assert criterion(f"7 (validator, {label})", ok, detail)


def test_8_admissibility(criterion):
    nu, k = 0.5, 1.0
    rate = growth_rate(nu, k)
    cited = False
    try:
        make_solution("unsteady-frac", nu, 1.0, AquiferParams(k=k, phi=0.5 * rate))
    except DomainError as exc:
        cited = "phi >= k*Gamma(nu+3)" in str(exc)
    sol = make_solution("unsteady-frac", nu, 1.0, AquiferParams(k=k))
    tb = sol.t_blowup
    inside = [tb * (1 - 0.5e-6), tb * (1 - 1e-7), tb]
    rejected = 0
    for t in inside:
        try:
            evaluate(sol, 1.0, t)
        except DomainError:
            rejected += 1
    accepted = np.isfinite(evaluate(sol, 1.0, tb * (1 - 2e-6)))
    ok = cited and rejected == len(inside) and accepted
    detail = f"condition cited={cited}; guard band rejections {rejected}/{len(inside)}; just outside accepted={accepted}"
    assert criterion("8 (admissibility)", ok, detail)


def _cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "fracboussinesq", *args], capture_output=True, text=True, cwd=cwd)


def test_9_cli_end_to_end(tmp_path, criterion):
    proc = _cli("verify", "--suite", "all", "--quiet")
    conf = tmp_path / "run.cfg"
    conf.write_text("family=steady-frac\nnu=0.5\nk=1\nphi=1\nL=1\nN=100\nt_end=0.2\n")
    bodies = []
    for name in ("a.csv", "b.csv"):
        run = _cli("simulate", str(conf), "--quiet", "--output", str(tmp_path / name))
        bodies.append((tmp_path / name).read_bytes() if run.returncode == 0 else None)
    same = bodies[0] is not None and bodies[0] == bodies[1]
    failed = [line for line in proc.stdout.splitlines() if line.endswith("FAIL")]
    ok = proc.returncode == 0 and same
    detail = f"verify --suite all exit={proc.returncode} ({len(failed)} FAIL rows); simulate CSV byte-identical={same}"
    assert criterion("9 (CLI end to end)", ok, detail)
