"""Brute-force fermionic Fock space used to re-derive the reduced states.

Modes ``-N_w .. N_w`` of Rob's cavity are ordered by index; bit ``p + N_w``
of a basis bitmask is the occupation of mode ``p``. Ladder operators carry
the usual Jordan-Wigner sign ``(-1)^(occupied modes before p)``. Particle
modes are ``p >= 0`` and antiparticle modes ``q < 0``; both use the same
operator, only their charge differs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .bogoliubov import CavityConfig, CoefficientProvider, alpha_first_order, compose_alpha, phase_factor
from .errors import DimensionTooLarge, WindowTooSmall
from .matrix_core import DensityMatrix

MAX_WINDOW = 6

VMap = Dict[Tuple[int, int], complex]


@dataclass(frozen=True)
class FockSpace:
    n_w: int

    def __post_init__(self):
        if not 1 <= self.n_w <= MAX_WINDOW:
            raise DimensionTooLarge(f"window half-width must be in [1, {MAX_WINDOW}], got {self.n_w}")

    @property
    def modes(self) -> range:
        return range(-self.n_w, self.n_w + 1)

    @property
    def n_modes(self) -> int:
        return 2 * self.n_w + 1

    @property
    def dim(self) -> int:
        return 1 << self.n_modes

    def bit(self, mode: int) -> int:
        if not -self.n_w <= mode <= self.n_w:
            raise WindowTooSmall(f"mode {mode} outside the window ±{self.n_w}")
        return mode + self.n_w

    def occupied(self, state: int, mode: int) -> bool:
        return bool((state >> self.bit(mode)) & 1)

    def _sign(self, state: int, pos: int) -> int:
        return -1 if bin(state & ((1 << pos) - 1)).count("1") % 2 else 1

    def create(self, state: int, mode: int) -> Optional[Tuple[int, int]]:
        pos = self.bit(mode)
        if (state >> pos) & 1:
            return None
        return self._sign(state, pos), state | (1 << pos)

    def annihilate(self, state: int, mode: int) -> Optional[Tuple[int, int]]:
        pos = self.bit(mode)
        if not (state >> pos) & 1:
            return None
        return self._sign(state, pos), state & ~(1 << pos)

    def ket(self, *modes: int) -> Optional[Tuple[int, int]]:
        """``c†_{m1} c†_{m2} ... |0>``: creators act right to left, in ket order."""
        sign, state = 1, 0
        for mode in reversed(modes):
            step = self.create(state, mode)
            if step is None:
                return None
            s, state = step
            sign *= s
        return sign, state

    def charge(self, state: int) -> int:
        pos = sum(1 for p in self.modes if p >= 0 and self.occupied(state, p))
        neg = sum(1 for q in self.modes if q < 0 and self.occupied(state, q))
        return pos - neg

    def annihilation_matrix(self, mode: int) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for state in range(self.dim):
            step = self.annihilate(state, mode)
            if step is not None:
                sign, new = step
                rows.append(new)
                cols.append(state)
                vals.append(sign)
        return sp.csr_matrix((np.array(vals, float), (rows, cols)), shape=(self.dim, self.dim))

    def creation_matrix(self, mode: int) -> sp.csr_matrix:
        return self.annihilation_matrix(mode).T.tocsr()


def build_fock(n_w: int) -> FockSpace:
    return FockSpace(int(n_w))


@dataclass
class RegionIIIState:
    """Sparse state ``{bitmask: amplitude}`` on a :class:`FockSpace`."""

    fock: FockSpace
    amplitudes: Dict[int, complex] = field(default_factory=dict)
    order: int = 2

    def add(self, term: Optional[Tuple[int, int]], coeff: complex) -> None:
        if term is None or coeff == 0:
            return
        sign, state = term
        self.amplitudes[state] = self.amplitudes.get(state, 0.0) + sign * coeff

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values())))

    def normalized(self) -> "RegionIIIState":
        n = self.norm()
        return RegionIIIState(self.fock, {k: v / n for k, v in self.amplitudes.items()}, self.order)

    def inner(self, other: "RegionIIIState") -> complex:
        return complex(sum(np.conj(a) * other.amplitudes.get(k, 0.0) for k, a in self.amplitudes.items()))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.fock.dim, complex)
        for k, a in self.amplitudes.items():
            out[k] = a
        return out

    def charges(self, tol: float = 0.0) -> set:
        return {self.fock.charge(k) for k, a in self.amplitudes.items() if abs(a) > tol}


def _check_v(fock: FockSpace, v: VMap) -> None:
    for p, q in v:
        fock.bit(p)
        fock.bit(q)
        if p < 0 or q >= 0:
            raise ValueError(f"V is indexed by (p >= 0, q < 0), got {(p, q)}")


def _vacuum_norm_factor(v: VMap, normalization: str) -> complex:
    return 1.0 - 0.5 * sum(abs(x) ** 2 for x in v.values()) if normalization == "analytic" else 1.0


def _finish(state: RegionIIIState, normalization: str) -> RegionIIIState:
    return state.normalized() if normalization == "explicit" else state


def evolve_vacuum(fock: FockSpace, v: VMap, normalization: str = "explicit") -> RegionIIIState:
    """Region-I vacuum in the region-III Fock basis through second order in ``V``.

    ``normalization='analytic'`` keeps the ``1 - Σ|V|²/2`` prefactor;
    ``'explicit'`` drops it and rescales the truncated vector to unit norm.
    """
    _check_v(fock, v)
    out = RegionIIIState(fock)
    out.add((1, 0), _vacuum_norm_factor(v, normalization))
    items = list(v.items())
    for (p, q), vpq in items:
        out.add(fock.ket(p, q), vpq)
    for (p, q), vpq in items:
        for (i, j), vij in items:
            if p == i or q == j:
                continue
            out.add(fock.ket(p, i, q, j), -0.5 * vpq * vij)
    return _finish(out, normalization)


def _alpha_entry(alpha: np.ndarray, fock: FockSpace, m: int, k: int) -> complex:
    return alpha[fock.bit(m), fock.bit(k)]


def evolve_one_particle(fock: FockSpace, v: VMap, alpha: np.ndarray, k: int,
                        normalization: str = "explicit") -> RegionIIIState:
    """Region-I one-particle state ``|1_k>`` in the region-III Fock basis.

    ``alpha`` is the region I -> III transformation on the Fock window
    (rows and columns ordered ``-N_w .. N_w``).
    """
    _check_v(fock, v)
    fock.bit(k)
    c0 = _vacuum_norm_factor(v, normalization)
    items = list(v.items())
    out = RegionIIIState(fock)
    if k >= 0:
        for (p, q), vpq in items:
            out.add(fock.ket(p), -vpq * np.conj(_alpha_entry(alpha, fock, q, k)))
        for m in fock.modes:
            if m < 0:
                continue
            amk = np.conj(_alpha_entry(alpha, fock, m, k))
            if amk == 0:
                continue
            out.add(fock.ket(m), amk * c0)
            for (p, q), vpq in items:
                if p != m:
                    out.add(fock.ket(m, p, q), amk * vpq)
            for (p, q), vpq in items:
                if p == m:
                    continue
                for (i, j), vij in items:
                    if p == i or m == i or q == j:
                        continue
                    out.add(fock.ket(m, p, i, q, j), -0.5 * amk * vpq * vij)
    else:
        for (p, q), vpq in items:
            out.add(fock.ket(q), vpq * _alpha_entry(alpha, fock, p, k))
        for m in fock.modes:
            if m >= 0:
                continue
            amk = _alpha_entry(alpha, fock, m, k)
            if amk == 0:
                continue
            out.add(fock.ket(m), amk * c0)
            for (p, q), vpq in items:
                if q != m:
                    out.add(fock.ket(p, q, m), amk * vpq)
            for (p, q), vpq in items:
                if q == m:
                    continue
                for (i, j), vij in items:
                    if p == i or q == j or m == j:
                        continue
                    out.add(fock.ket(p, i, q, j, m), -0.5 * amk * vpq * vij)
    return _finish(out, normalization)


def apply_region_one_creator(state: RegionIIIState, alpha: np.ndarray, k: int) -> RegionIIIState:
    """Apply ``a_k^†`` (``k >= 0``) or ``b_k^†`` (``k < 0``) written in region-III operators.

    With ``c_n = Σ_m 𝒜[m, n] c̃_m`` for the region-I field coefficients
    (``c_n = a_n`` or ``b_n^†``), ``a_k^† = Σ_m conj(𝒜[m,k]) c̃_m^†`` and
    ``b_k^† = Σ_m 𝒜[m,k] c̃_m``, where ``c̃_m`` is ``ã_m`` for ``m >= 0`` and
    ``b̃_m^†`` for ``m < 0``. Independent of the closed-form expansion.
    """
    fock = state.fock
    out = RegionIIIState(fock, order=state.order)
    for m in fock.modes:
        coeff = alpha[fock.bit(m), fock.bit(k)]
        if k >= 0:
            coeff = np.conj(coeff)
            raise_mode = m >= 0
        else:
            raise_mode = m < 0
        if coeff == 0:
            continue
        for basis, amp in state.amplitudes.items():
            step = fock.create(basis, m) if raise_mode else fock.annihilate(basis, m)
            out.add(step, coeff * amp)
    return out


def v_matrix(provider: CoefficientProvider, config: CavityConfig, window: int,
             h: Optional[float] = None) -> VMap:
    """Pair-creation amplitudes ``V_pq = h conj(𝒜1[p, q]) G_q`` on the window."""
    h = config.h if h is None else float(h)
    ps = np.arange(0, window + 1)
    qs = np.arange(-window, 0)
    a1 = alpha_first_order(provider, config, ps, qs)
    g_q = phase_factor(config, qs)
    vals = h * np.conj(a1) * g_q[None, :]
    return {(int(p), int(q)): complex(vals[i, j]) for i, p in enumerate(ps) for j, q in enumerate(qs)}


def v_matrix_dual(provider: CoefficientProvider, config: CavityConfig, window: int,
                  h: Optional[float] = None) -> VMap:
    """Same amplitudes from the dual form ``V_pq = -h 𝒜1[q, p] conj(G_p)``."""
    h = config.h if h is None else float(h)
    ps = np.arange(0, window + 1)
    qs = np.arange(-window, 0)
    a1 = alpha_first_order(provider, config, qs, ps)
    g_p = phase_factor(config, ps)
    vals = -h * a1.T * np.conj(g_p)[:, None]
    return {(int(p), int(q)): complex(vals[i, j]) for i, p in enumerate(ps) for j, q in enumerate(qs)}


def oracle_inputs(provider: CoefficientProvider, config: CavityConfig, n_w: int, h: float):
    """Fock space, ``V`` and the series ``𝒜`` shared by the oracle routines."""
    fock = build_fock(n_w)
    v = v_matrix(provider, config, n_w, h)
    alpha = compose_alpha(provider, config, n_w, h=h, method="series")
    return fock, v, alpha


def _split_mode(fock: FockSpace, vec: np.ndarray, k: int) -> np.ndarray:
    """Rewrite a Fock vector as ``[n_k, rest]`` with ``c_k^†`` moved to the front."""
    pos = fock.bit(k)
    below = (1 << pos) - 1
    out = np.zeros((2, fock.dim), complex)
    nz = np.nonzero(vec)[0]
    for state in nz:
        state = int(state)
        nk = (state >> pos) & 1
        rest = state & ~(1 << pos)
        sign = -1 if (nk and bin(state & below).count("1") % 2) else 1
        out[nk, rest] += sign * vec[state]
    return out


def reduced_mode_k(fock: FockSpace, rob0: RegionIIIState, rob1: RegionIIIState, k: int):
    return _split_mode(fock, rob0.to_dense(), k), _split_mode(fock, rob1.to_dense(), k)


LABELS = ("A:0 ⊗ R:0", "A:0 ⊗ R:1k", "A:1m ⊗ R:0", "A:1m ⊗ R:1k")


def oracle_reduced_rho(theta: float, sign: int, fock: FockSpace, v: VMap, alpha: np.ndarray,
                       k: int, r: float = 1.0, psd_tol: float = 1e-10) -> DensityMatrix:
    """Reduced state of Alice's qubit and Rob's mode ``k`` from the Fock expansion.

    ``r < 1`` mixes in the maximally mixed two-qubit state with weight ``1 - r``
    before Rob's half is evolved, i.e. the Werner family.
    """
    rob0 = evolve_vacuum(fock, v)
    rob1 = evolve_one_particle(fock, v, alpha, k)
    r0, r1 = reduced_mode_k(fock, rob0, rob1, k)
    # sum over the rest index happens inside the einsum below
    pure = np.einsum("akr,blr->akbl", *_alice_rob(theta, sign, r0, r1), optimize=True).reshape(4, 4)
    if r == 1.0:
        return DensityMatrix(pure, LABELS, psd_tol=psd_tol)
    rob_mix = r0 @ r0.conj().T + r1 @ r1.conj().T
    mixed = np.kron(np.eye(2), rob_mix)
    rho = r * pure + 0.25 * (1.0 - r) * mixed
    return DensityMatrix(rho, LABELS, psd_tol=psd_tol)


def _alice_rob(theta: float, sign: int, r0: np.ndarray, r1: np.ndarray):
    psi = np.stack([np.cos(theta) * r0, sign * np.sin(theta) * r1])
    return psi, psi.conj()
