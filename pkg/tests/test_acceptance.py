"""Acceptance criteria, each with its runtime budget.

Every test prints one ``PASS``/``FAIL criterion N`` line. The checks are written
against the public API directly and do not reuse the self-check suite.
"""
import math
import time

import numpy as np
import pytest

from cavity_qfi import bogoliubov as bg
from cavity_qfi import fock as fk
from cavity_qfi import states as st
from cavity_qfi.matrix_core import ptrace
from cavity_qfi.qfi import (
    RandomFamily,
    classical_fisher,
    qfi_from_matrices,
    qfi_spectral,
    qfi_support,
    qfi_trace_form,
    sld_povm,
)
from cavity_qfi.sweep import FIG3_R, curves, fig1_spec, fig2_spec, fig3_spec, run_sweep

H = 0.01
THETAS = (math.pi / 8, math.pi / 4, 3 * math.pi / 8)
S_VALUES = (0.0, 0.25, 0.5, 0.75)
U_TENTHS = [round(0.1 * i, 10) for i in range(11)]

_SWEPT: dict = {}


def nu_of(k):
    return 1 if k >= 0 else -1


def report(capsys, number, ok, detail, seconds, budget):
    within = budget is None or seconds <= budget
    status = "PASS" if ok and within else "FAIL"
    limit = "no budget" if budget is None else f"budget {budget:g} s"
    with capsys.disabled():
        print(f"\n{status} criterion {number}: {detail} ({seconds:.2f} s, {limit})")
    assert ok, detail
    assert within, f"runtime {seconds:.2f} s over {budget} s"


def provider_for(kind, s):
    if kind == "synthetic":
        return bg.provider_synthetic(3)
    return bg.provider_quadrature(bg.CavityConfig.from_h(H, s=s), check_unitarity=False)


def sums(prov, u, s, k, h=H, n_trunc=bg.DEFAULT_N_TRUNC):
    return bg.mode_sums(prov, bg.CavityConfig.from_h(h, u=u, s=s), k, n_trunc)


def test_criterion_1_pure_invariance(capsys):
    t0 = time.perf_counter()
    closed = numeric = 0.0
    count = 0
    for kind in ("synthetic", "quadrature"):
        for s in S_VALUES:
            prov = provider_for(kind, s)
            for u in U_TENTHS:
                for k in (1, -1, 2, -2):
                    b = sums(prov, u, s, k)
                    for th in THETAS:
                        p = st.PureStateParams(th, 1, 1, nu_of(k))
                        closed = max(closed, abs(st.pure_qfi_total(p, b, H).total - 4))
                        numeric = max(numeric, abs(st.numeric_pure(p, b, H)["total"] - 4))
                        count += 1
    dt = time.perf_counter() - t0
    report(capsys, 1, closed <= 1e-7 and numeric <= 1e-6,
           f"{count} points, closed-form |F-4| max {closed:.2e} (<= 1e-7), numeric max {numeric:.2e} (<= 1e-6)",
           dt, 30)


def test_criterion_2_formula_equivalence(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    pair = sld_gap = 0.0
    for i in range(200):
        fam = RandomFamily.draw(4, 1 + i % 4, rng)
        lam = float(rng.uniform(-1, 1))
        spec = qfi_spectral(fam.family(), lam)
        trace = qfi_trace_form(fam.family(), lam)
        p, psi, dp, dpsi = fam.eigen_functions()
        supp = qfi_support(p, psi, lam, dp=dp, dpsi=dpsi).total
        pair = max(pair, abs(spec - trace), abs(spec - supp), abs(trace - supp))
        sld_gap = max(sld_gap, abs(classical_fisher(fam.family(), lam, sld_povm(fam.family(), lam)) - spec))
    dt = time.perf_counter() - t0
    report(capsys, 2, pair <= 1e-7 and sld_gap <= 1e-9,
           f"200 families, pairwise max {pair:.2e} (<= 1e-7), SLD POVM gap {sld_gap:.2e} (<= 1e-9)", dt, 20)


def _alice_two_level(r, theta):
    # Alice's reduced state is diagonal: diag(r c² + (1-r)/2, r s² + (1-r)/2)
    def rho(t):
        return np.diag([r * math.cos(t) ** 2 + (1 - r) / 2, r * math.sin(t) ** 2 + (1 - r) / 2])

    def drho(t):
        return np.diag([-r * math.sin(2 * t), r * math.sin(2 * t)])

    return qfi_from_matrices(rho(theta), drho(theta))


def test_criterion_3_alice_werner(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    for r in np.linspace(0.02, 0.98, 20):
        for th in np.linspace(0.05, math.pi / 2 - 0.05, 20):
            worst = max(worst, abs(st.werner_qfi_alice(st.WernerParams(float(r), float(th))) -
                                   _alice_two_level(float(r), float(th))))
    spot1 = max(abs(st.werner_qfi_alice(st.WernerParams(1.0, th)) - 4) for th in THETAS)
    spot2 = abs(st.werner_qfi_alice(st.WernerParams(1 / 3, math.pi / 4)) - 4 / 9)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and spot1 <= 1e-12 and spot2 <= 1e-12
    report(capsys, 3, ok, f"20x20 grid max {worst:.2e} (<= 1e-10), F_A(1,θ)-4 {spot1:.1e}, "
                          f"F_A(1/3,π/4)-4/9 {spot2:.1e}", dt, 5)


def _oracle_gap(h, k, r, theta):
    prov = bg.provider_synthetic(3, support=4)
    cfg = bg.CavityConfig.from_h(h, u=0.3, s=0.25)
    fs, v, alpha = fk.oracle_inputs(prov, cfg, 4, h)
    orc = fk.oracle_reduced_rho(theta, 1, fs, v, alpha, k, r=r, psd_tol=1e-6).matrix
    b = bg.mode_sums(prov, cfg, k, n_trunc=64)
    if r == 1.0:
        cf = st.rho_pure_reduced(st.PureStateParams(theta, 1, 1, nu_of(k)), b, h).matrix
    else:
        cf = st.rho_werner_reduced(st.WernerParams(r, theta, 1, nu_of(k)), b, h).matrix
    return float(np.max(np.abs(orc - cf)))


def test_criterion_4_oracle_convergence(capsys):
    t0 = time.perf_counter()
    min_order, worst_small = math.inf, 0.0
    for k in (1, -1):
        for r in (1.0, 1 / 3):
            for th in (math.pi / 4, math.pi / 8):
                d = [_oracle_gap(h, k, r, th) for h in (4e-3, 2e-3, 1e-3)]
                min_order = min(min_order, math.log2(d[0] / d[1]), math.log2(d[1] / d[2]))
                worst_small = max(worst_small, d[2])
    dt = time.perf_counter() - t0
    report(capsys, 4, min_order >= 2.7 and worst_small <= 1e-7,
           f"pure and Werner, observed order min {min_order:.3f} (>= 2.7), "
           f"deviation at h=1e-3 {worst_small:.2e} (<= 1e-7)", dt, 120)


def _werner_outputs(b, r, th, k):
    p = st.WernerParams(r, th, 1, nu_of(k))
    return np.array([st.werner_qfi_total(p, b, H).total, st.werner_qfi_alice(p), st.werner_qfi_rob(p, b, H)])


def _werner_h_free(r, th):
    psi = np.array([math.cos(th), 0, 0, math.sin(th)])
    dpsi = np.array([-math.sin(th), 0, 0, math.cos(th)])
    rho = r * np.outer(psi, psi) + (1 - r) / 4 * np.eye(4)
    drho = r * (np.outer(dpsi, psi) + np.outer(psi, dpsi))
    return qfi_from_matrices(rho, drho)


def test_criterion_5_periodicity(capsys):
    t0 = time.perf_counter()
    period = integer = 0.0
    for kind in ("synthetic", "quadrature"):
        for s in (0.0, 0.5):
            prov = provider_for(kind, s)
            for k in (1, -1):
                for u in (0.13, 0.5, 0.87):
                    a, b = sums(prov, u, s, k), sums(prov, u + 1, s, k)
                    period = max(period, abs(a.f_plus - b.f_plus), abs(a.f_minus - b.f_minus))
                    for r in (0.2, 1 / 3, 0.8):
                        for th in THETAS:
                            period = max(period, float(np.max(np.abs(
                                _werner_outputs(a, r, th, k) - _werner_outputs(b, r, th, k)))))
                for u in (0.0, 1.0, 2.0):
                    b = sums(prov, u, s, k)
                    integer = max(integer, b.f_plus, b.f_minus)
                    for th in THETAS:
                        integer = max(integer, abs(st.pure_qfi_rob(st.PureStateParams(th, 1, 1, nu_of(k)), b, H) - 4))
                        for r in (0.2, 1 / 3, 0.8):
                            tot = st.werner_qfi_total(st.WernerParams(r, th, 1, nu_of(k)), b, H).total
                            integer = max(integer, abs(tot - _werner_h_free(r, th)))
    dt = time.perf_counter() - t0
    report(capsys, 5, period <= 1e-9 and integer <= 1e-9,
           f"|X(u)-X(u+1)| max {period:.2e}, integer-u deviation {integer:.2e} (both <= 1e-9)", dt, 10)


def test_criterion_6_limits(capsys):
    t0 = time.perf_counter()
    near_one = near_zero = f_zero = 0.0
    prov = bg.provider_synthetic(3)
    for k in (1, -1, 2):
        for u in (0.2, 0.5):
            b = sums(prov, u, 0.25, k)
            for th in THETAS:
                pure = st.PureStateParams(th, 1, 1, nu_of(k))
                w = st.WernerParams(1 - 1e-9, th, 1, nu_of(k))
                # Werner total tends to the quantum part of the pure state
                near_one = max(near_one,
                               abs(st.werner_qfi_total(w, b, H).total - st.pure_qfi_total(pure, b, H).pure_part),
                               abs(st.werner_qfi_rob(w, b, H) - st.pure_qfi_rob(pure, b, H)),
                               abs(st.werner_qfi_alice(w) - st.pure_qfi_alice()))
                near_zero = max(near_zero, abs(st.werner_qfi_total(st.WernerParams(1e-10, th, 1, nu_of(k)), b, H).total))
    zero = bg.BogoliubovData.zero(1)
    for r in np.linspace(0.05, 0.95, 10):
        for th in THETAS:
            p = st.WernerParams(float(r), th)
            f_zero = max(f_zero, abs(st.werner_qfi_rob(p, zero, H) - st.werner_qfi_alice(p)))
    dt = time.perf_counter() - t0
    ok = near_one <= 1e-6 and near_zero <= 1e-9 and f_zero <= 1e-12
    report(capsys, 6, ok, f"r->1 gap {near_one:.2e} (<= 1e-6), r->0 total {near_zero:.2e} (<= 1e-9), "
                          f"Rob at f=0 vs Alice {f_zero:.1e}", dt, 5)


def _swept(name):
    if name not in _SWEPT:
        spec = {"fig1": fig1_spec, "fig2": fig2_spec, "fig3": fig3_spec}[name](provider="quadrature")
        _SWEPT[name] = run_sweep(spec)
    return _SWEPT[name]


def test_criterion_7_figure_shapes(capsys):
    t0 = time.perf_counter()
    problems = []
    fig1 = curves(_swept("fig1"))
    for key, rows in fig1.items():
        rob = np.array([r.qfi_rob for r in rows])
        if np.any(rob > 4 + 1e-12):
            problems.append(f"fig1 {key} exceeds 4")
        if abs(rob[0] - 4) > 1e-9 or abs(rob[-1] - 4) > 1e-9:
            problems.append(f"fig1 {key} not 4 at u=0,1")
        i = int(np.argmin(rob))
        if not (0 < i < len(rob) - 1 and rob[i] < 4 - 1e-9):
            problems.append(f"fig1 {key} has no interior minimum")
    a = np.array([r.qfi_rob for r in fig1[(0.0, 1, 1.0)]])
    b = np.array([r.qfi_rob for r in fig1[(0.0, -1, 1.0)]])
    coincide = float(np.max(np.abs(a - b)))
    if coincide > 1e-6:
        problems.append(f"fig1 s=0 k=±1 differ by {coincide:.2e}")
    mid = {r.r: r.qfi_total for r in _swept("fig3") if abs(r.u - 0.5) < 1e-12}
    vals = [mid[r] for r in FIG3_R]
    if not all(x < y for x, y in zip(vals, vals[1:])):
        problems.append(f"fig3 not increasing in r at u=0.5: {vals}")
    dt = time.perf_counter() - t0
    report(capsys, 7, not problems,
           f"{len(fig1)} Fig. 1 curves, s=0 k=±1 gap {coincide:.1e}, Fig. 3 at u=0.5 increasing in r"
           if not problems else "; ".join(problems), dt, 300)


def test_criterion_8_subadditivity(capsys):
    t0 = time.perf_counter()
    alice, rob = [], []
    for name in ("fig1", "fig2", "fig3"):
        for row in _swept(name):
            alice.append(row.qfi_alice)
            rob.append(row.qfi_rob)
    prov = bg.provider_synthetic(3)
    for s in S_VALUES:
        for u in U_TENTHS:
            for k in (1, -1, 2, -2):
                b = sums(prov, u, s, k)
                for th in THETAS:
                    rob.append(st.pure_qfi_rob(st.PureStateParams(th, 1, 1, nu_of(k)), b, H))
                    alice.append(st.pure_qfi_alice())
                    for r in (0.1, 1 / 3, 0.66, 0.99):
                        w = st.WernerParams(r, th, 1, nu_of(k))
                        rob.append(st.werner_qfi_rob(w, b, H))
                        alice.append(st.werner_qfi_alice(w))
    alice, rob = np.array(alice), np.array(rob)
    ok = alice.max() <= 4 + 1e-12 and rob.max() <= 4 + 1e-12 and rob.min() >= 0
    dt = time.perf_counter() - t0
    report(capsys, 8, ok, f"{len(rob)} values, F_A max {alice.max():.12g}, F_R in "
                          f"[{rob.min():.6g}, {rob.max():.12g}]", dt, None)
