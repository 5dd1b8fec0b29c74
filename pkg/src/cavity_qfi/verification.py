"""Self-checks behind ``cavity-qfi verify``.

Each check returns ``(defect, tolerance)``; it passes when ``defect <= tolerance``.
The fast level uses the synthetic provider only; the full level adds the
quadrature provider, the Fock-oracle h-scaling study and figure-shape checks.
"""
from __future__ import annotations

import math
import time
from typing import Callable, Dict, List, Tuple

import numpy as np

from . import bogoliubov as bg
from . import fock as fk
from . import states as st
from .matrix_core import hermitian_eig, partial_trace, DensityMatrix, random_hermitian, reconstruct
from .qfi import (
    RandomFamily,
    classical_fisher,
    qfi_pure,
    qfi_spectral,
    qfi_support,
    qfi_trace_form,
    random_povm,
    sld_povm,
)
from .sweep import FIG3_R, curves, fig1_spec, fig3_spec, run_sweep

Check = Callable[[], Tuple[float, float]]
H = 0.01
THETAS = (math.pi / 8, math.pi / 4, 3 * math.pi / 8)


def _nu(k: int) -> int:
    return 1 if k >= 0 else -1


def _bog(provider, u: float, s: float, k: int, h: float = H):
    return bg.mode_sums(provider, bg.CavityConfig.from_h(h, u=u, s=s), k)


# matrix core ------------------------------------------------------------------

def eig_reconstruction():
    m = random_hermitian(4, np.random.default_rng(42))
    return float(np.max(np.abs(reconstruct(hermitian_eig(m)) - m))), 1e-11


def eig_orthonormality():
    rng = np.random.default_rng(7)
    worst = 0.0
    for n in (2, 4, 16, 32):
        v = hermitian_eig(random_hermitian(n, rng)).eigenvectors
        worst = max(worst, float(np.max(np.abs(v.conj().T @ v - np.eye(n)))))
    return worst, 1e-11


def partial_trace_bell():
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    rho = DensityMatrix(np.outer(phi, phi))
    red = partial_trace(rho, 0, (2, 2)).matrix
    return float(np.max(np.abs(red - np.eye(2) / 2))), 1e-14


# QFI engine -------------------------------------------------------------------

def _families(n: int, seed: int):
    rng = np.random.default_rng(seed)
    return [RandomFamily.draw(4, 1 + i % 4, rng) for i in range(n)]


def qfi_routes_agree(n: int = 50):
    worst = 0.0
    for fam in _families(n, 11):
        pf = fam.family()
        a = qfi_spectral(pf, 0.3)
        b = qfi_trace_form(pf, 0.3)
        p, psi, dp, dpsi = fam.eigen_functions()
        c = qfi_support(p, psi, 0.3, dp, dpsi).total
        worst = max(worst, abs(a - b), abs(a - c), abs(b - c))
    return worst, 1e-7


def sld_povm_optimal(n: int = 30):
    worst = 0.0
    for fam in _families(n, 12):
        pf = fam.family()
        worst = max(worst, abs(classical_fisher(pf, 0.3, sld_povm(pf, 0.3)) - qfi_spectral(pf, 0.3)))
    return worst, 1e-9


def random_povm_bounded(n: int = 30):
    rng = np.random.default_rng(13)
    excess = 0.0
    for fam in _families(n, 14):
        pf = fam.family()
        fc = classical_fisher(pf, 0.3, random_povm(4, 5, rng))
        excess = max(excess, fc - qfi_spectral(pf, 0.3))
    return max(excess, 0.0), 1e-9


def pure_state_qfi():
    rng = np.random.default_rng(15)
    h = random_hermitian(3, rng)
    psi0 = rng.normal(size=3) + 1j * rng.normal(size=3)
    psi0 /= np.linalg.norm(psi0)
    w, v = np.linalg.eigh(h)

    def psi(t):
        return (v * np.exp(-1j * t * w)) @ v.conj().T @ psi0

    var = float(np.real(psi0.conj() @ h @ h @ psi0 - (psi0.conj() @ h @ psi0) ** 2))
    # qfi_pure is the Fubini-Study term; the QFI is four times it
    return abs(4 * qfi_pure(psi, 0.2) - 4 * var), 1e-6


# Bogoliubov layer ---------------------------------------------------------------

def synthetic_antihermitian():
    idx = np.arange(-20, 21)
    a = bg.provider_synthetic(3).first_order_block(idx, idx)
    return float(np.max(np.abs(a + a.conj().T))), 1e-12


def e1_ratio_identity():
    cfg = bg.CavityConfig.from_h(H, u=0.37, s=0.25)
    worst = 0.0
    for p in range(-5, 6):
        for k in range(-5, 6):
            lhs = bg.phase_factor(cfg, p) * np.conj(bg.phase_factor(cfg, k))
            worst = max(worst, abs(lhs - cfg.e1 ** (p - k)))
    return worst, 1e-12


def series_unitarity():
    # compact support keeps every coupled mode inside the window
    prov = bg.provider_synthetic(3, support=4)
    defects = []
    for h in (0.02, 0.01):
        cfg = bg.CavityConfig.from_h(h, u=0.3, s=0.0)
        alpha = bg.compose_alpha(prov, cfg, 8, h=h, method="series")
        defects.append(float(np.max(bg.unitarity_defect(alpha))))
    # defect must shrink like h³ (ratio 8) and stay small
    order = math.log2(defects[0] / defects[1])
    return max(0.0, 2.7 - order) + max(0.0, defects[1] - 1e-5), 0.0


def periodicity():
    prov = bg.provider_synthetic(3)
    worst = 0.0
    for u in (0.13, 0.5, 0.81):
        for k in (1, -2):
            a = _bog(prov, u, 0.25, k)
            b = _bog(prov, u + 1.0, 0.25, k)
            worst = max(worst, abs(a.f_plus - b.f_plus), abs(a.f_minus - b.f_minus))
            w = st.WernerParams(1 / 3, math.pi / 4, 1, _nu(k))
            worst = max(worst, abs(st.werner_qfi_total(w, a, H).total - st.werner_qfi_total(w, b, H).total),
                        abs(st.werner_qfi_rob(w, a, H) - st.werner_qfi_rob(w, b, H)))
    return worst, 1e-9


def trip_neutral():
    prov = bg.provider_synthetic(3)
    worst = 0.0
    for u in (0.0, 1.0, 2.0):
        b = _bog(prov, u, 0.25, 1)
        worst = max(worst, b.f_total)
        worst = max(worst, abs(st.pure_qfi_rob(st.PureStateParams(math.pi / 4), b, H) - 4.0))
        w = st.WernerParams(1 / 3, math.pi / 4)
        worst = max(worst, abs(st.werner_qfi_total(w, b, H).total - 8 * w.r ** 2 / (1 + w.r)))
    return worst, 1e-12


# Fock oracle ----------------------------------------------------------------------

def fock_anticommutation():
    fs = fk.build_fock(2)
    worst = 0.0
    eye = np.eye(fs.dim)
    for p in fs.modes:
        ap = fs.annihilation_matrix(p).toarray()
        for q in fs.modes:
            aq_dag = fs.creation_matrix(q).toarray()
            aq = fs.annihilation_matrix(q).toarray()
            target = eye if p == q else 0.0
            worst = max(worst, float(np.max(np.abs(ap @ aq_dag + aq_dag @ ap - target))),
                        float(np.max(np.abs(ap @ aq + aq @ ap))))
    return worst, 1e-14


def _oracle_setup(h: float, u: float = 0.3, s: float = 0.25):
    prov = bg.provider_synthetic(3, support=4)
    cfg = bg.CavityConfig.from_h(h, u=u, s=s)
    return prov, cfg, fk.oracle_inputs(prov, cfg, 4, h)


def fock_charge_conservation():
    _, _, (fs, v, alpha) = _oracle_setup(0.01)
    bad = 0
    bad += len(fk.evolve_vacuum(fs, v).charges() - {0})
    for k in (1, -1):
        bad += len(fk.evolve_one_particle(fs, v, alpha, k).charges() - {_nu(k)})
    return float(bad), 0.0


def fock_orthogonality():
    h = 0.01
    _, _, (fs, v, alpha) = _oracle_setup(h)
    vac = fk.evolve_vacuum(fs, v, normalization="analytic")
    worst = abs(vac.norm() - 1.0)
    for k in (1, -2):
        one = fk.evolve_one_particle(fs, v, alpha, k, normalization="analytic")
        worst = max(worst, abs(vac.inner(one)), abs(one.norm() - 1.0))
    return worst, 5 * h ** 3


def v_dual_form():
    prov = bg.provider_synthetic(3)
    cfg = bg.CavityConfig.from_h(H, u=0.3, s=0.25)
    a = fk.v_matrix(prov, cfg, 6, H)
    b = fk.v_matrix_dual(prov, cfg, 6, H)
    return max(abs(a[key] - b[key]) for key in a), 1e-10


def _oracle_deviation(h: float, k: int, r: float) -> float:
    prov, cfg, (fs, v, alpha) = _oracle_setup(h)
    orc = fk.oracle_reduced_rho(math.pi / 4, 1, fs, v, alpha, k, r=r, psd_tol=1e-6).matrix
    bog = bg.mode_sums(prov, cfg, k, n_trunc=64)
    if r == 1.0:
        cf = st.rho_pure_reduced(st.PureStateParams(math.pi / 4, 1, 1, _nu(k)), bog, h)
    else:
        cf = st.rho_werner_reduced(st.WernerParams(r, math.pi / 4, 1, _nu(k)), bog, h)
    return float(np.max(np.abs(orc - cf.matrix)))


def oracle_deviation_small_h():
    return max(_oracle_deviation(1e-3, k, r) for k in (1, -1) for r in (1.0, 1 / 3)), 1e-7


def oracle_order():
    worst = 0.0
    for k in (1, -1):
        for r in (1.0, 1 / 3):
            d = [_oracle_deviation(h, k, r) for h in (4e-3, 2e-3, 1e-3)]
            order = min(math.log2(d[0] / d[1]), math.log2(d[1] / d[2]))
            worst = max(worst, 2.7 - order)
    return max(worst, 0.0), 0.0


# closed forms ------------------------------------------------------------------------

def _grid(provider_kind: str):
    for s in (0.0, 0.25, 0.5, 0.75):
        prov = bg.provider_synthetic(3) if provider_kind == "synthetic" else \
            bg.provider_quadrature(bg.CavityConfig.from_h(H, s=s), check_unitarity=False)
        for u in np.round(np.arange(0.0, 1.01, 0.1), 10):
            for k in (1, -1, 2, -2):
                yield prov, _bog(prov, float(u), s, k), k


def pure_invariance(provider_kind: str = "synthetic"):
    worst_closed = worst_num = 0.0
    for _, b, k in _grid(provider_kind):
        for th in THETAS:
            p = st.PureStateParams(th, 1, 1, _nu(k))
            worst_closed = max(worst_closed, abs(st.pure_qfi_total(p, b, H).total - 4.0))
            worst_num = max(worst_num, abs(st.numeric_pure(p, b, H)["total"] - 4.0))
    # closed form must be within 1e-7, numeric path within 1e-6
    return max(worst_closed / 1e-7, worst_num / 1e-6), 1.0


def pure_rob_numeric():
    worst = 0.0
    prov = bg.provider_synthetic(3)
    for u in (0.2, 0.5, 0.9):
        for k in (1, -1):
            b = _bog(prov, u, 0.25, k)
            for th in THETAS:
                p = st.PureStateParams(th, 1, 1, _nu(k))
                worst = max(worst, abs(st.numeric_pure(p, b, H)["rob"] - st.pure_qfi_rob(p, b, H)))
    return worst, 1e-6


def pure_support_decomposition():
    worst = 0.0
    prov = bg.provider_synthetic(3)
    for u in (0.2, 0.5):
        for k in (1, -2):
            b = _bog(prov, u, 0.5, k)
            for th in THETAS:
                p = st.PureStateParams(th, 1, 1, _nu(k))
                br = st.eigensystem_breakdown(lambda t: st.pure_eigensystem(p.with_theta(t), b, H), th)
                worst = max(worst, abs(br.total - st.pure_qfi_total(p, b, H).total))
    return worst, 1e-7


def alice_werner():
    worst = 0.0
    for r in np.linspace(0.0, 1.0, 20):
        for th in np.linspace(0.02, math.pi / 2 - 0.02, 20):
            w = st.WernerParams(float(r), float(th))
            c2 = math.cos(2 * th)
            p0 = (1 + r * c2) / 2
            dp0 = -r * math.sin(2 * th)
            two_level = dp0 ** 2 / (p0 * (1 - p0)) if 0 < p0 < 1 else 0.0
            worst = max(worst, abs(st.werner_qfi_alice(w) - two_level))
    worst = max(worst, abs(st.werner_qfi_alice(st.WernerParams(1 / 3, math.pi / 4)) - 4 / 9))
    return worst, 1e-10


def werner_numeric():
    worst = 0.0
    prov = bg.provider_synthetic(3)
    for u in (0.0, 0.25, 0.5):
        for k in (1, -1):
            b = _bog(prov, u, 0.0, k)
            for r in (0.2, 1 / 3, 0.7):
                for th in THETAS:
                    w = st.WernerParams(r, th, 1, _nu(k))
                    num = st.numeric_werner(w, b, H)
                    worst = max(worst, abs(num["total"] - st.werner_qfi_total(w, b, H).total),
                                abs(num["rob"] - st.werner_qfi_rob(w, b, H)))
    return worst, 1e-6


def limits():
    prov = bg.provider_synthetic(3)
    worst = 0.0
    for u in (0.3, 0.5):
        for k in (1, -1):
            b = _bog(prov, u, 0.25, k)
            for th in THETAS:
                p = st.PureStateParams(th, 1, 1, _nu(k))
                near_one = st.werner_qfi_total(st.WernerParams(1 - 1e-9, th, 1, _nu(k)), b, H).total
                worst = max(worst, abs(near_one - st.pure_qfi_total(p, b, H).pure_part) / 1e-6)
                near_zero = st.werner_qfi_total(st.WernerParams(1e-10, th, 1, _nu(k)), b, H).total
                worst = max(worst, abs(near_zero) / 1e-9)
                zero_f = bg.BogoliubovData.zero(k)
                w = st.WernerParams(0.6, th, 1, _nu(k))
                worst = max(worst, abs(st.werner_qfi_rob(w, zero_f, H) - st.werner_qfi_alice(w)) / 1e-12)
    return worst, 1.0


def subadditivity():
    prov = bg.provider_synthetic(3)
    lo, hi = 0.0, 0.0
    for u in np.linspace(0, 1, 11):
        for k in (1, -1, 2):
            b = _bog(prov, float(u), 0.25, k)
            for th in THETAS:
                rob = st.pure_qfi_rob(st.PureStateParams(th, 1, 1, _nu(k)), b, H)
                hi = max(hi, rob - 4.0)
                lo = max(lo, -rob)
                for r in (0.1, 0.5, 0.9):
                    w = st.WernerParams(r, th, 1, _nu(k))
                    hi = max(hi, st.werner_qfi_rob(w, b, H) - 4.0, st.werner_qfi_alice(w) - 4.0)
    return max(lo, hi), 0.0


def monotone_in_r():
    prov = bg.provider_synthetic(3)
    b = _bog(prov, 0.5, 0.0, 1)
    vals = [st.werner_qfi_total(st.WernerParams(r, math.pi / 4), b, H).total for r in FIG3_R]
    return float(max(0.0, max(a - c for a, c in zip(vals, vals[1:])))), 0.0


# full-level figure and quadrature checks ---------------------------------------------

def quadrature_column_norm():
    prov = bg.provider_quadrature(bg.CavityConfig.from_h(H, s=0.25), check_unitarity=False)
    return prov.column_norm_defect(), 1e-6


def fig1_shape():
    """Count shape violations of the Rob-QFI curves (tolerance 0)."""
    groups = curves(run_sweep(fig1_spec()))
    violations = 0
    for c in groups.values():
        v = np.array([r.qfi_rob for r in c])
        violations += int(v.max() > 4.0 + 1e-12)
        violations += int(abs(v[0] - 4.0) > 1e-12 or abs(v[-1] - 4.0) > 1e-12)
        violations += int(not (v.min() < 4.0 and 0 < int(np.argmin(v)) < len(v) - 1))
    a = np.array([r.qfi_rob for r in groups[(0.0, 1, 1.0)]])
    b = np.array([r.qfi_rob for r in groups[(0.0, -1, 1.0)]])
    violations += int(np.max(np.abs(a - b)) > 1e-6)
    return float(violations), 0.0


def fig3_monotone():
    """Number of non-increasing steps in r at u = 0.5 (tolerance 0)."""
    rows = sorted((r for r in run_sweep(fig3_spec()) if abs(r.u - 0.5) < 1e-12), key=lambda r: r.r)
    vals = [r.qfi_total for r in rows]
    return float(sum(1 for x, y in zip(vals, vals[1:]) if not y > x) + (len(vals) != len(FIG3_R))), 0.0


FAST: Dict[str, Check] = {
    "eig_reconstruction": eig_reconstruction,
    "eig_orthonormality": eig_orthonormality,
    "partial_trace_bell": partial_trace_bell,
    "qfi_three_routes_agree": qfi_routes_agree,
    "sld_povm_attains_qfi": sld_povm_optimal,
    "random_povm_below_qfi": random_povm_bounded,
    "pure_state_qfi_variance": pure_state_qfi,
    "synthetic_antihermitian": synthetic_antihermitian,
    "e1_ratio_identity": e1_ratio_identity,
    "series_unitarity_order": series_unitarity,
    "mode_sum_periodicity": periodicity,
    "trip_neutral_integer_u": trip_neutral,
    "fock_anticommutation": fock_anticommutation,
    "fock_charge_superselection": fock_charge_conservation,
    "fock_norm_and_orthogonality": fock_orthogonality,
    "v_matrix_dual_form": v_dual_form,
    "oracle_deviation_h1e-3": oracle_deviation_small_h,
    "pure_invariance_synthetic": lambda: pure_invariance("synthetic"),
    "pure_rob_numeric_path": pure_rob_numeric,
    "pure_support_decomposition": pure_support_decomposition,
    "alice_werner_two_level": alice_werner,
    "werner_numeric_path": werner_numeric,
    "werner_limits": limits,
    "subadditivity": subadditivity,
    "werner_monotone_in_r": monotone_in_r,
}

FULL: Dict[str, Check] = {
    "quadrature_column_norm": quadrature_column_norm,
    "pure_invariance_quadrature": lambda: pure_invariance("quadrature"),
    "oracle_convergence_order": oracle_order,
    "fig1_shape": fig1_shape,
    "fig3_monotone_in_r": fig3_monotone,
}


def run_checks(level: str = "fast") -> dict:
    if level not in ("fast", "full"):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    table = dict(FAST)
    if level == "full":
        table.update(FULL)
    results: List[dict] = []
    for name, fn in table.items():
        t0 = time.perf_counter()
        try:
            defect, tol = fn()
            passed = bool(defect <= tol)
            entry = {"name": name, "passed": passed, "defect": float(defect), "tolerance": float(tol)}
        except Exception as exc:  # a crashing check is a failed check
            entry = {"name": name, "passed": False, "defect": None, "tolerance": None,
                     "error": f"{type(exc).__name__}: {exc}"}
        entry["seconds"] = round(time.perf_counter() - t0, 3)
        results.append(entry)
    return {"level": level, "passed": all(r["passed"] for r in results),
            "n_checks": len(results), "checks": results}
