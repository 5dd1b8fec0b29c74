import math

import numpy as np
import pytest

from cavity_qfi import bogoliubov as bg
from cavity_qfi import states as st
from cavity_qfi.errors import PerturbationOutOfRange
from cavity_qfi.matrix_core import hermitian_eig

from conftest import THETAS, nu_of

H = 0.01


def bog_at(prov, k, u=0.3, s=0.25, h=H):
    return bg.mode_sums(prov, bg.CavityConfig.from_h(h, u=u, s=s), k, n_trunc=64)


@pytest.mark.parametrize("k", [1, -1])
def test_u_zero_is_input_state(synth, k):
    b = bog_at(synth, k, u=0.0)
    th = 0.5
    rho = st.rho_pure_reduced(st.PureStateParams(th, 1, 1, nu_of(k)), b, H).matrix
    psi = np.array([math.cos(th), 0, 0, math.sin(th)])
    assert np.max(np.abs(rho - np.outer(psi, psi))) < 1e-15
    w = st.rho_werner_reduced(st.WernerParams(0.0, th, 1, nu_of(k)), b, H).matrix
    assert np.max(np.abs(w - np.eye(4) / 4)) < 1e-15


@pytest.mark.parametrize("k", [0, 2, -1, -3])
@pytest.mark.parametrize("theta", THETAS)
def test_pure_eigenvalues(synth, k, theta):
    b = bog_at(synth, k)
    p = st.PureStateParams(theta, 1, 1, nu_of(k))
    rho = st.rho_pure_reduced(p, b, H).matrix
    assert abs(np.trace(rho) - 1) < 1e-14
    es = st.pure_eigensystem(p, b, H)
    num = np.sort(hermitian_eig(rho).eigenvalues)
    # the analytic system spans the support only; the fourth eigenvalue is 0
    assert np.max(np.abs(num - np.sort(np.append(es.values, 0.0)))) <= 5 * H ** 3
    c, s = math.cos(theta), math.sin(theta)
    expect = sorted([1 - (s * s * b.f_nu + c * c * b.f_anti) * H * H,
                     c * c * b.f_anti * H * H, s * s * b.f_nu * H * H, 0.0])
    assert np.max(np.abs(num - expect)) <= 5 * H ** 3


@pytest.mark.parametrize("r", [0.2, 0.5, 0.9])
@pytest.mark.parametrize("k", [1, -2])
def test_werner_eigenvalues(synth, r, k):
    b = bog_at(synth, k)
    th = math.pi / 3
    p = st.WernerParams(r, th, 1, nu_of(k))
    rho = st.rho_werner_reduced(p, b, H).matrix
    assert abs(np.trace(rho) - 1) < 1e-14
    num = np.sort(hermitian_eig(rho).eigenvalues)
    es = st.werner_eigensystem(p, b, H)
    assert np.max(np.abs(num - np.sort(es.values))) <= 5 * H ** 3
    c, s, cc = math.cos(th), math.sin(th), math.cos(2 * th)
    rc, h2 = (1 - r) / 4, H * H
    fn, fa, gn, ga = b.f_nu, b.f_anti, b.g_nu, b.g_anti
    expect = sorted([
        r + rc - r * (c * c * fa + s * s * fn) * h2 + rc * cc * gn * h2,
        rc - rc * cc * gn * h2,
        rc + rc * ga * h2 + r * fa * c * c * h2,
        rc + rc * gn * h2 + r * fn * s * s * h2,
    ])
    assert np.max(np.abs(num - expect)) <= 5 * H ** 3


@pytest.mark.parametrize("k", [1, -1])
@pytest.mark.parametrize("theta", THETAS)
def test_eigensystem_orthonormal_and_reconstructs(synth, k, theta):
    b = bog_at(synth, k)
    for p, build in ((st.PureStateParams(theta, 1, 1, nu_of(k)), st.pure_eigensystem),
                     (st.WernerParams(0.4, theta, 1, nu_of(k)), st.werner_eigensystem)):
        es = build(p, b, H)
        v = es.vectors
        assert np.max(np.abs(v @ v.conj().T - np.eye(len(v)))) <= 5 * H ** 3
        recon = (v.T * es.values) @ v.conj()
        rho = (st.rho_pure_reduced if build is st.pure_eigensystem else st.rho_werner_reduced)(p, b, H).matrix
        assert np.max(np.abs(recon - rho)) <= 5 * H ** 3


@pytest.mark.parametrize("k", [1, -1, 3])
@pytest.mark.parametrize("theta", THETAS)
def test_pure_total_is_four(synth, k, theta):
    b = bog_at(synth, k)
    p = st.PureStateParams(theta, 1, 1, nu_of(k))
    br = st.pure_qfi_total(p, b, H)
    assert abs(br.total - 4) < 1e-12
    assert abs(br.pure_part + br.classical_part - 4) < 1e-12
    assert abs(st.numeric_pure(p, b, H)["total"] - 4) <= 1e-6
    assert st.numeric_pure(p, b, H)["alice"] == pytest.approx(4, abs=1e-6)
    support = st.eigensystem_breakdown(lambda t: st.pure_eigensystem(p.with_theta(t), b, H), theta)
    assert abs(support.total - 4) <= 1e-6


def test_pure_quarter_turn(synth):
    b = bog_at(synth, 1)
    p = st.PureStateParams(math.pi / 4, 1, 1, 1)
    br = st.pure_qfi_total(p, b, H)
    assert br.classical_part == pytest.approx(2 * b.f_total * H * H, rel=1e-12)
    assert st.pure_qfi_rob(p, b, H) == pytest.approx(4 - 8 * b.f_total * H * H, rel=1e-12)


@pytest.mark.parametrize("k", [1, -2])
@pytest.mark.parametrize("theta", THETAS)
def test_pure_rob_bounds_and_numeric(synth, k, theta):
    b = bog_at(synth, k)
    p = st.PureStateParams(theta, 1, 1, nu_of(k))
    rob = st.pure_qfi_rob(p, b, H)
    assert 0 <= rob <= 4
    # closed form drops O((f h² / s²c²)²); the synthetic sums keep that below 1e-6
    assert abs(rob - st.numeric_pure(p, b, H)["rob"]) <= 1e-6


@pytest.mark.parametrize("k", [1, -1])
@pytest.mark.parametrize("r", [0.1, 1 / 3, 0.7])
@pytest.mark.parametrize("theta", THETAS)
def test_werner_closed_forms_vs_numeric(synth, k, r, theta):
    b = bog_at(synth, k)
    p = st.WernerParams(r, theta, 1, nu_of(k))
    num = st.numeric_werner(p, b, H)
    assert abs(st.werner_qfi_total(p, b, H).total - num["total"]) <= 1e-6
    assert abs(st.werner_qfi_rob(p, b, H) - num["rob"]) <= 1e-6
    assert abs(st.werner_qfi_alice(p) - num["alice"]) <= 1e-9
    f_i, f_ij = st.werner_parts(p, b, H)
    assert f_i - f_ij == pytest.approx(st.werner_qfi_total(p, b, H).total, abs=1e-12)


def test_werner_limits(synth):
    b = bog_at(synth, 1)
    for th in THETAS:
        pure = st.PureStateParams(th, 1, 1, 1)
        w1 = st.WernerParams(1.0, th, 1, 1)
        assert st.werner_qfi_total(w1, b, H).total == st.pure_qfi_total(pure, b, H).total
        near = st.werner_qfi_total(st.WernerParams(1 - 1e-9, th, 1, 1), b, H).total
        assert near == pytest.approx(st.pure_qfi_total(pure, b, H).pure_part, abs=1e-7)
        assert abs(st.werner_qfi_total(st.WernerParams(1e-10, th, 1, 1), b, H).total) <= 1e-8
        assert st.werner_qfi_total(st.WernerParams(0.0, th, 1, 1), b, H).total == 0.0


def test_werner_alice_values():
    assert st.werner_qfi_alice(st.WernerParams(1 / 3, math.pi / 4)) == pytest.approx(4 / 9, abs=1e-15)
    assert st.werner_qfi_alice(st.WernerParams(0.5, 1e-9)) == pytest.approx(0, abs=1e-12)
    assert st.werner_qfi_alice(st.WernerParams(1.0, 0.3)) == pytest.approx(4, abs=1e-12)


def test_werner_rob_matches_alice_without_leakage():
    b = bg.BogoliubovData.zero(1)
    for th in THETAS:
        p = st.WernerParams(0.4, th)
        assert st.werner_qfi_rob(p, b, H) == pytest.approx(st.werner_qfi_alice(p), abs=1e-15)


def test_werner_rob_at_r_one(synth):
    b = bog_at(synth, 1)
    w = st.WernerParams(1.0, math.pi / 4, 1, 1)
    assert st.werner_qfi_rob(w, b, H) == pytest.approx(st.pure_qfi_rob(w.pure, b, H), abs=1e-12)


def test_werner_monotone_in_r(synth):
    b = bog_at(synth, 1)
    rs = np.linspace(0.05, 0.95, 19)
    tot = [st.werner_qfi_total(st.WernerParams(r, math.pi / 4), b, H).total for r in rs]
    assert np.all(np.diff(tot) > 0)


def test_periodic_in_u(synth):
    p = st.PureStateParams(math.pi / 3, 1, 1, 1)
    a = st.pure_qfi_rob(p, bog_at(synth, 1, u=0.3), H)
    b = st.pure_qfi_rob(p, bog_at(synth, 1, u=1.3), H)
    assert a == pytest.approx(b, abs=1e-12)


def test_guard(synth):
    b = bog_at(synth, 1, h=0.1)
    with pytest.raises(PerturbationOutOfRange):
        st.pure_qfi_rob(st.PureStateParams(0.05, 1, 1, 1), b, 0.1)
    with pytest.raises(PerturbationOutOfRange):
        st.pure_qfi_total(st.PureStateParams(0.5, 1, 1, 1), b, 0.2)
    with pytest.raises(PerturbationOutOfRange):
        st.werner_parts(st.WernerParams(0.05, 0.5, 1, 1), b, 0.1)
