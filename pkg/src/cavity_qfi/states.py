"""Closed-form reduced states of the two-cavity system and their QFI.

All matrices live on the product basis ``{A0⊗R0, A0⊗R1, A1⊗R0, A1⊗R1}``
where ``A1`` is Alice's mode ``m`` and ``R1`` Rob's reference mode ``k``.
Results are correct through order ``h²``; quantities are functions of the
leakage sums carried by :class:`~cavity_qfi.bogoliubov.BogoliubovData`.

Coherence phase convention: the (A0R0, A1R1) entry is ``±sc·Γ`` for a
particle reference mode (``k >= 0``) and ``±sc·conj(Γ)`` for an antiparticle mode,
with ``Γ = G_k + 𝒜2_kk h²``. This is what the Fock-space expansion produces;
QFI values do not depend on it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bogoliubov import BogoliubovData
from .errors import PerturbationOutOfRange
from .matrix_core import DensityMatrix, ptrace
from .qfi import ParameterizedFamily, QfiBreakdown, qfi_from_matrices, qfi_support

BASIS = ("A:0 ⊗ R:0", "A:0 ⊗ R:1k", "A:1m ⊗ R:0", "A:1m ⊗ R:1k")
GUARD = 0.1
# the closed forms drop O(h⁴) terms, so the matrices may sit this far outside the PSD cone
RELAXED_PSD = 1e-6


@dataclass(frozen=True)
class PureStateParams:
    theta: float
    sign: int = 1
    mu: int = 1
    nu: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.mu not in (1, -1) or self.nu not in (1, -1):
            raise ValueError("charge labels must be +1 or -1")

    def with_theta(self, theta: float) -> "PureStateParams":
        return PureStateParams(theta, self.sign, self.mu, self.nu)


@dataclass(frozen=True)
class WernerParams:
    r: float
    theta: float
    mu: int = 1
    nu: int = 1

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")

    @property
    def r_c(self) -> float:
        return (1.0 - self.r) / 4.0

    @property
    def pure(self) -> PureStateParams:
        return PureStateParams(self.theta, 1, self.mu, self.nu)

    def with_theta(self, theta: float) -> "WernerParams":
        return WernerParams(self.r, theta, self.mu, self.nu)


@dataclass(frozen=True)
class PerturbedEigenSystem:
    """Support of a reduced state: eigenvalues/vectors and their θ-derivatives.

    Eigenvectors are the rows of ``vectors``. ``mixing`` is α (pure) or β/r
    (Werner), the O(h²) rotation inside the ``{A0R0, A1R1}`` block.
    """

    values: np.ndarray
    d_values: np.ndarray
    vectors: np.ndarray
    d_vectors: np.ndarray
    mixing: complex
    norm: float


# helpers ---------------------------------------------------------------------

def _guard(h: float, *scales: float) -> None:
    if not 0.0 < h <= 0.1:
        raise PerturbationOutOfRange(f"h={h} outside (0, 0.1]")
    lim = GUARD * min(scales)
    if h * h > lim:
        raise PerturbationOutOfRange(f"h²={h * h:.3e} exceeds {lim:.3e}; perturbation series not valid here")


def _trig(theta: float):
    return np.cos(theta), np.sin(theta)


def _coherence(bog: BogoliubovData, h: float) -> complex:
    gamma = bog.g_k + bog.a2_kk * h * h
    return gamma if bog.nu > 0 else np.conj(gamma)


def _unit_phase(bog: BogoliubovData) -> complex:
    g = bog.g_k / abs(bog.g_k)
    return g if bog.nu > 0 else np.conj(g)


def _block_epsilon(bog: BogoliubovData, h: float) -> complex:
    """Relative O(h²) correction of the coherence once its phase is removed."""
    return _coherence(bog, h) / _unit_phase(bog) - 1.0


def _pure_matrix(theta: float, sign: int, bog: BogoliubovData, h: float):
    c, s = _trig(theta)
    fa, fn = bog.f_anti, bog.f_nu
    h2 = h * h
    gam = sign * _coherence(bog, h)
    rho = np.diag([c * c * (1 - fa * h2), c * c * fa * h2, s * s * fn * h2, s * s * (1 - fn * h2)]).astype(complex)
    rho[0, 3] = s * c * gam
    rho[3, 0] = np.conj(rho[0, 3])
    s2 = np.sin(2 * theta)
    drho = np.diag([-s2 * (1 - fa * h2), -s2 * fa * h2, s2 * fn * h2, s2 * (1 - fn * h2)]).astype(complex)
    drho[0, 3] = np.cos(2 * theta) * gam
    drho[3, 0] = np.conj(drho[0, 3])
    return rho, drho


def _werner_mix(bog: BogoliubovData, h: float) -> np.ndarray:
    h2 = h * h
    return np.diag([1 + bog.g_nu * h2, 1 + bog.g_anti * h2, 1 + bog.g_nu * h2, 1 + bog.g_anti * h2]).astype(complex)


def _werner_matrix(params: WernerParams, bog: BogoliubovData, h: float):
    rho, drho = _pure_matrix(params.theta, 1, bog, h)
    mix = _werner_mix(bog, h)
    return params.r * rho + params.r_c * mix, params.r * drho


# reduced density matrices ----------------------------------------------------

def rho_pure_reduced(params: PureStateParams, bog: BogoliubovData, h: float) -> DensityMatrix:
    c, s = _trig(params.theta)
    _guard(h, s * s, c * c)
    rho, _ = _pure_matrix(params.theta, params.sign, bog, h)
    return DensityMatrix(rho, BASIS, psd_tol=RELAXED_PSD)


def rho_werner_reduced(params: WernerParams, bog: BogoliubovData, h: float) -> DensityMatrix:
    c, s = _trig(params.theta)
    _guard(h, s * s, c * c)
    rho, _ = _werner_matrix(params, bog, h)
    return DensityMatrix(rho, BASIS, psd_tol=RELAXED_PSD)


def pure_family(params: PureStateParams, bog: BogoliubovData, h: float) -> ParameterizedFamily:
    """The reduced pure-input state as a θ-family with analytic derivative."""
    return ParameterizedFamily(lambda t: _pure_matrix(t, params.sign, bog, h)[0],
                               lambda t: _pure_matrix(t, params.sign, bog, h)[1])


def werner_family(params: WernerParams, bog: BogoliubovData, h: float) -> ParameterizedFamily:
    return ParameterizedFamily(lambda t: _werner_matrix(params.with_theta(t), bog, h)[0],
                               lambda t: _werner_matrix(params.with_theta(t), bog, h)[1])


# perturbed eigen-systems -----------------------------------------------------

def _block_vectors(theta: float, sign: int, phase: complex, kappa: complex, h: float):
    """Top and bottom eigenvectors of the ``{A0R0, A1R1}`` block and θ-derivatives.

    The mixing amplitude is ``sc·κ·h²``; rows are (top, bottom).
    """
    c, s = _trig(theta)
    h2 = h * h
    mix = s * c * kappa * h2
    dmix = np.cos(2 * theta) * kappa * h2
    norm = 1.0 + abs(mix) ** 2
    dnorm = 2.0 * np.real(np.conj(mix) * dmix)
    inv = 1.0 / np.sqrt(norm)
    dinv = -0.5 * dnorm * norm ** -1.5

    top = np.array([phase * (c - mix * s), 0, 0, sign * (s + mix * c)])
    dtop = np.array([phase * (-s - dmix * s - mix * c), 0, 0, sign * (c + dmix * c - mix * s)])
    cm, dcm = np.conj(mix), np.conj(dmix)
    bot = np.array([-phase * (s + cm * c), 0, 0, sign * (c - cm * s)])
    dbot = np.array([-phase * (c + dcm * c - cm * s), 0, 0, sign * (-s - dcm * s - cm * c)])
    vecs = np.array([top * inv, bot * inv])
    dvecs = np.array([dtop * inv + top * dinv, dbot * inv + bot * dinv])
    return vecs, dvecs, mix, norm


def _kappa(bog: BogoliubovData, h: float, delta_scale: float) -> complex:
    eps = _block_epsilon(bog, h)
    im = eps.imag / (h * h) if h > 0 else 0.0
    return (bog.f_anti - bog.f_nu) / 2.0 * delta_scale - 1j * im


_E2 = np.eye(4)[1]
_E3 = np.eye(4)[2]


def pure_eigensystem(params: PureStateParams, bog: BogoliubovData, h: float) -> PerturbedEigenSystem:
    """Non-zero eigenvalues ``{1-(c²f^{-ν}+s²f^ν)h², c²f^{-ν}h², s²f^ν h²}`` and eigenvectors."""
    c, s = _trig(params.theta)
    _guard(h, s * s, c * c)
    h2 = h * h
    fa, fn = bog.f_anti, bog.f_nu
    s2 = np.sin(2 * params.theta)
    vals = np.array([1 - (c * c * fa + s * s * fn) * h2, c * c * fa * h2, s * s * fn * h2])
    dvals = np.array([s2 * (fa - fn) * h2, -s2 * fa * h2, s2 * fn * h2])
    vecs, dvecs, mix, norm = _block_vectors(params.theta, params.sign, _unit_phase(bog), _kappa(bog, h, 1.0), h)
    zeros = np.zeros(4)
    return PerturbedEigenSystem(vals, dvals, np.array([vecs[0], _E2, _E3]),
                                np.array([dvecs[0], zeros, zeros]), complex(mix), float(norm))


def werner_eigensystem(params: WernerParams, bog: BogoliubovData, h: float) -> PerturbedEigenSystem:
    """Werner eigenvalues with the ``β/r`` rotation of the coherent block."""
    c, s = _trig(params.theta)
    r, rc = params.r, params.r_c
    _guard(h, s * s, c * c, r)
    h2 = h * h
    fa, fn, g = bog.f_anti, bog.f_nu, bog.g_nu
    s2 = np.sin(2 * params.theta)
    c2 = np.cos(2 * params.theta)
    vals = np.array([
        r + rc - r * (c * c * fa + s * s * fn) * h2 + rc * c2 * g * h2,
        rc - rc * c2 * g * h2,
        rc + rc * bog.g_anti * h2 + r * fa * c * c * h2,
        rc + rc * g * h2 + r * fn * s * s * h2,
    ])
    dvals = np.array([
        r * s2 * (fa - fn) * h2 - 2 * rc * s2 * g * h2,
        2 * rc * s2 * g * h2,
        -r * fa * s2 * h2,
        r * fn * s2 * h2,
    ])
    vecs, dvecs, mix, norm = _block_vectors(params.theta, 1, _unit_phase(bog), _kappa(bog, h, 1.0 / r), h)
    zeros = np.zeros(4)
    return PerturbedEigenSystem(vals, dvals, np.array([vecs[0], vecs[1], _E2, _E3]),
                                np.array([dvecs[0], dvecs[1], zeros, zeros]), complex(mix), float(norm))


def eigensystem_breakdown(build: Callable[[float], PerturbedEigenSystem], theta: float) -> QfiBreakdown:
    """Run the support-decomposition QFI on an analytic eigen-system."""
    es = build(theta)
    n = len(es.values)
    return qfi_support(
        [lambda t, i=i: build(t).values[i] for i in range(n)],
        [lambda t, i=i: build(t).vectors[i] for i in range(n)],
        theta,
        dp=[lambda t, i=i: build(t).d_values[i] for i in range(n)],
        dpsi=[lambda t, i=i: build(t).d_vectors[i] for i in range(n)],
    )


# pure-state QFI --------------------------------------------------------------

def pure_qfi_total(params: PureStateParams, bog: BogoliubovData, h: float) -> QfiBreakdown:
    """Quantum part ``F_θ``, classical part ``F_c`` and their sum (= 4 at order h²)."""
    c, s = _trig(params.theta)
    _guard(h, s * s, c * c)
    h2 = h * h
    fa, fn = bog.f_anti, bog.f_nu
    classical = 4.0 * (s * s * fa + c * c * fn) * h2
    quantum = 4.0 * (1.0 - (s * s * fa + c * c * fn) * h2)
    rank = 1 + int(c * c * fa * h2 > 0) + int(s * s * fn * h2 > 0)
    return QfiBreakdown(quantum + classical, classical, quantum, 0.0, rank)


def pure_qfi_rob(params: PureStateParams, bog: BogoliubovData, h: float) -> float:
    c, s = _trig(params.theta)
    _guard(h, s * s, c * c)
    num = s * s * bog.f_nu + c * c * bog.f_anti
    return float(4.0 - 4.0 * num * h * h / (s * s * c * c))


def pure_qfi_alice() -> float:
    return 4.0


# Werner QFI ------------------------------------------------------------------

def werner_parts(params: WernerParams, bog: BogoliubovData, h: float) -> tuple[float, float]:
    """``(F_{θ;i}, F_{θ;ij})``: individual-eigenvector and mixture contributions."""
    c, s = _trig(params.theta)
    r = params.r
    _guard(h, s * s, c * c, r)
    h2 = h * h
    fa, fn = bog.f_anti, bog.f_nu
    c2 = np.cos(2 * params.theta)
    f_i = 4.0 * ((1 + r) / 2 + ((1 + r) / (2 * r) * c2 * (fa - fn) - r * (c * c * fa + s * s * fn)) * h2)
    f_ij = 16.0 * (
        (1 + 2 * r - 3 * r * r) / (8 * (1 + r)) * (1 + c2 * (fa - fn) * h2 / r)
        + (1 - r) * r * ((1 + 3 * r) / (4 * (1 + r) ** 2) * (s * s * fn + c * c * fa)
                         - (s * s * fa + c * c * fn) / (2 * (1 + r))) * h2
    )
    return float(f_i), float(f_ij)


def _werner_total(r: float, theta: float, bog: BogoliubovData, h: float) -> float:
    # F_i - F_ij with the 1/r pieces cancelled by hand; equal to the difference
    # of the two parts but stable as r -> 0
    c, s = _trig(theta)
    h2 = h * h
    fa, fn = bog.f_anti, bog.f_nu
    c2 = np.cos(2 * theta)
    lead = 8 * r * r / (1 + r)
    x = c2 * (fa - fn) * h2
    tail = (-4 * r * (c * c * fa + s * s * fn)
            - 16 * (1 - r) * r * ((1 + 3 * r) / (4 * (1 + r) ** 2) * (s * s * fn + c * c * fa)
                                  - (s * s * fa + c * c * fn) / (2 * (1 + r)))) * h2
    return float(lead + 8 * r * x / (1 + r) + tail)


def werner_qfi_total(params: WernerParams, bog: BogoliubovData, h: float) -> QfiBreakdown:
    """Werner QFI; the classical part is O(h⁴) and reported as 0 for ``0 < r < 1``."""
    r = params.r
    if r == 1.0:
        return pure_qfi_total(params.pure, bog, h)
    if r == 0.0:
        return QfiBreakdown(0.0, 0.0, 0.0, 0.0, 4)
    c, s = _trig(params.theta)
    _guard(h, s * s, c * c)
    total = _werner_total(r, params.theta, bog, h)
    if h * h <= GUARD * r:
        f_i, f_ij = werner_parts(params, bog, h)
    else:
        # parts individually carry 1/r terms outside their validity range
        f_i, f_ij = float("nan"), float("nan")
    return QfiBreakdown(total, 0.0, f_i, f_ij, 4)


def werner_qfi_alice(params: WernerParams) -> float:
    s2 = np.sin(2 * params.theta)
    c2 = np.cos(2 * params.theta)
    r = params.r
    den = 1.0 - r * r * c2 * c2
    if den <= 0.0:
        return 4.0 if r == 1.0 else 0.0
    return float(4 * r * r * s2 * s2 / den)


def werner_qfi_rob(params: WernerParams, bog: BogoliubovData, h: float) -> float:
    """Rob's QFI for the Werner input.

    The bracketed correction uses the denominator ``1 - r²cos²2θ``, the one
    that also appears in the prefactor; see the project notes.
    """
    c, s = _trig(params.theta)
    r = params.r
    c2 = np.cos(2 * params.theta)
    den = 1.0 - r * r * c2 * c2
    _guard(h, s * s, c * c, den)
    h2 = h * h
    fa, fn = bog.f_anti, bog.f_nu
    lead = werner_qfi_alice(params)
    corr = r * c2 / den * (4 * r * (c * c * fa - s * s * fn) + 2 * (1 - r) * (fa - fn))
    return float(lead * (1 - 2 * bog.f_total * h2 - corr * h2))


# numeric paths ---------------------------------------------------------------

def numeric_total(family: ParameterizedFamily, theta: float) -> float:
    return qfi_from_matrices(family.rho(theta), family.drho(theta))


def numeric_subsystem(family: ParameterizedFamily, theta: float, keep) -> float:
    """Spectral QFI of Alice's (``keep=0``) or Rob's (``keep=1``) reduced family."""
    return qfi_from_matrices(ptrace(family.rho(theta), keep, (2, 2)),
                             ptrace(family.drho(theta), keep, (2, 2)))


def numeric_pure(params: PureStateParams, bog: BogoliubovData, h: float) -> dict:
    fam = pure_family(params, bog, h)
    t = params.theta
    return {"total": numeric_total(fam, t), "alice": numeric_subsystem(fam, t, 0),
            "rob": numeric_subsystem(fam, t, 1)}


def numeric_werner(params: WernerParams, bog: BogoliubovData, h: float) -> dict:
    fam = werner_family(params, bog, h)
    t = params.theta
    return {"total": numeric_total(fam, t), "alice": numeric_subsystem(fam, t, 0),
            "rob": numeric_subsystem(fam, t, 1)}
