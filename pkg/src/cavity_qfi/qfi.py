"""Classical and quantum Fisher information for one-parameter families of states.

Three QFI evaluations are provided and are expected to agree:

* :func:`qfi_spectral` sums ``2|<m|dρ|n>|^2/(p_m+p_n)`` over the eigenbasis;
* :func:`qfi_trace_form` evaluates ``Tr(dρ L)`` with the SLD from :func:`sld_solve`;
* :func:`qfi_support` splits the value into a classical part, a weighted
  pure-state part and a mixture penalty, using only the support of ρ.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    InvalidPovm,
    NonNormalizedSpectrum,
    NonOrthonormalBasis,
    NonUnitVector,
    SingularOutcome,
    UnsupportedDerivativeComponent,
)
from .matrix_core import TOL, DensityMatrix, as_matrix, hermitian_eig, random_unitary

# a derivative entry between two out-of-support directions above this is
# reported instead of dropped
UNSUPPORTED_TOL = 1e-8
P_ZERO = 1e-14
DP_SINGULAR = 1e-12


def _central(f, lam: float, step: float):
    return (np.asarray(f(lam + step)) - np.asarray(f(lam - step))) / (2.0 * step)


def _raw(x) -> np.ndarray:
    return x.matrix if isinstance(x, DensityMatrix) else as_matrix(x)


@dataclass(frozen=True)
class ParameterizedFamily:
    """``λ -> ρ_λ`` with an optional analytic ``λ -> ∂ρ_λ``.

    Without an analytic derivative a central difference with step
    ``fd_step`` is used.
    """

    evaluate: Callable[[float], object]
    derivative: Optional[Callable[[float], object]] = None
    fd_step: float = TOL.fd_step

    def rho(self, lam: float) -> np.ndarray:
        return _raw(self.evaluate(lam))

    def drho(self, lam: float) -> np.ndarray:
        if self.derivative is not None:
            return _raw(self.derivative(lam))
        return _central(self.rho, lam, self.fd_step)


@dataclass(frozen=True)
class Povm:
    elements: tuple

    def __post_init__(self):
        elems = tuple(as_matrix(e) for e in self.elements)
        if not elems:
            raise InvalidPovm("empty POVM")
        d = elems[0].shape[0]
        for e in elems:
            if e.shape != (d, d):
                raise InvalidPovm("POVM elements have inconsistent shapes")
            if np.max(np.abs(e - e.conj().T)) > 1e-10:
                raise InvalidPovm("POVM element is not Hermitian")
            if hermitian_eig(e).eigenvalues[0] < -1e-10:
                raise InvalidPovm("POVM element is not positive semidefinite")
        defect = np.max(np.abs(sum(elems) - np.eye(d)))
        if defect > 1e-10:
            raise InvalidPovm(f"completeness defect {defect:.3e}")
        object.__setattr__(self, "elements", elems)

    @classmethod
    def projective(cls, basis) -> "Povm":
        basis = as_matrix(basis)
        return cls(tuple(np.outer(basis[:, j], basis[:, j].conj()) for j in range(basis.shape[1])))

    @classmethod
    def computational(cls, dim: int) -> "Povm":
        return cls.projective(np.eye(dim))


@dataclass(frozen=True)
class QfiBreakdown:
    total: float
    classical_part: float
    pure_part: float
    mixture_part: float
    support_rank: int

    @property
    def decomposition_defect(self) -> float:
        return abs(self.total - (self.classical_part + self.pure_part - self.mixture_part))


def classical_fisher(family: ParameterizedFamily, lam: float, povm: Povm) -> float:
    """Fisher information of the outcome distribution ``p(ξ|λ) = Tr[E(ξ) ρ_λ]``."""
    rho = family.rho(lam)
    drho = family.drho(lam)
    total = 0.0
    for e in povm.elements:
        p = float(np.real(np.trace(e @ rho)))
        dp = float(np.real(np.trace(e @ drho)))
        if p < P_ZERO:
            if abs(dp) < P_ZERO:
                continue
            if abs(dp) >= DP_SINGULAR:
                raise SingularOutcome(f"outcome with p={p:.3e} has dp={dp:.3e}")
            continue
        total += dp * dp / p
    return total


def _eigen_frame(rho: np.ndarray, drho: np.ndarray):
    w, v = hermitian_eig(rho)
    d = v.conj().T @ drho @ v
    denom = w[:, None] + w[None, :]
    inside = denom > TOL.p_cut
    outside = ~inside
    if np.any(outside):
        worst = float(np.max(np.abs(d[outside])))
        if worst > UNSUPPORTED_TOL:
            raise UnsupportedDerivativeComponent(
                f"derivative weight {worst:.3e} between out-of-support directions"
            )
    return w, v, d, denom, inside


def sld_solve(rho, drho) -> np.ndarray:
    """Symmetric logarithmic derivative ``L`` with ``∂ρ = (ρL + Lρ)/2``.

    ``L`` is assembled in the eigenbasis of ρ from the pairs whose eigenvalue
    sum exceeds the support cut; the kernel-kernel block is left at zero.
    """
    rho = _raw(rho)
    drho = as_matrix(drho)
    w, v, d, denom, inside = _eigen_frame(rho, drho)
    l_eig = np.zeros_like(d)
    l_eig[inside] = 2.0 * d[inside] / denom[inside]
    return v @ l_eig @ v.conj().T


def sld_residual(rho, drho, sld) -> float:
    rho = _raw(rho)
    return float(np.max(np.abs(as_matrix(drho) - 0.5 * (rho @ sld + sld @ rho))))


def qfi_from_matrices(rho, drho) -> float:
    """Spectral QFI ``Σ 2|<ψ_m|∂ρ|ψ_n>|^2/(p_m+p_n)`` over supported pairs."""
    rho = _raw(rho)
    w, v, d, denom, inside = _eigen_frame(rho, as_matrix(drho))
    return max(float(np.sum(2.0 * np.abs(d[inside]) ** 2 / denom[inside])), 0.0)


def qfi_spectral(family: ParameterizedFamily, lam: float) -> float:
    return qfi_from_matrices(family.rho(lam), family.drho(lam))


def qfi_trace_form(family: ParameterizedFamily, lam: float) -> float:
    drho = family.drho(lam)
    sld = sld_solve(family.rho(lam), drho)
    return float(np.real(np.trace(drho @ sld)))


def sld_povm(family: ParameterizedFamily, lam: float) -> Povm:
    """Projective measurement on the SLD eigenbasis (the optimal POVM)."""
    sld = sld_solve(family.rho(lam), family.drho(lam))
    return Povm.projective(hermitian_eig(0.5 * (sld + sld.conj().T)).eigenvectors)


def qfi_pure(psi: Callable[[float], Sequence[complex]], lam: float,
             dpsi: Optional[Callable[[float], Sequence[complex]]] = None,
             step: float = TOL.fd_step) -> float:
    """``<∂ψ|∂ψ> - |<ψ|∂ψ>|^2`` for a family of unit vectors."""
    vec = np.asarray(psi(lam), dtype=np.complex128)
    if dpsi is None:
        for x in (lam - step, lam, lam + step):
            n = np.linalg.norm(np.asarray(psi(x), dtype=np.complex128))
            if abs(n - 1.0) > 1e-9:
                raise NonUnitVector(f"|ψ({x})| = {n}")
        dvec = _central(lambda x: np.asarray(psi(x), dtype=np.complex128), lam, step)
    else:
        n = np.linalg.norm(vec)
        if abs(n - 1.0) > 1e-9:
            raise NonUnitVector(f"|ψ({lam})| = {n}")
        dvec = np.asarray(dpsi(lam), dtype=np.complex128)
    value = float(np.real(np.vdot(dvec, dvec)) - abs(np.vdot(vec, dvec)) ** 2)
    if value < 0.0 and value >= -1e-12:
        value = 0.0
    return value


def qfi_support(p: Sequence[Callable[[float], float]],
                psi: Sequence[Callable[[float], Sequence[complex]]],
                lam: float,
                dp: Optional[Sequence[Callable[[float], float]]] = None,
                dpsi: Optional[Sequence[Callable[[float], Sequence[complex]]]] = None,
                step: float = TOL.fd_step) -> QfiBreakdown:
    """QFI from an eigen-system given as functions of λ.

    Only eigenvalues above the support cut take part. Derivatives are taken
    from ``dp``/``dpsi`` when given, otherwise by central differences.
    """
    if len(p) != len(psi):
        raise ValueError("need one eigenvector function per eigenvalue function")
    vals = np.array([float(f(lam)) for f in p])
    if abs(vals.sum() - 1.0) > 1e-9:
        raise NonNormalizedSpectrum(f"eigenvalues sum to {vals.sum()}")
    vecs = np.array([np.asarray(f(lam), dtype=np.complex128) for f in psi])
    gram = vecs.conj() @ vecs.T
    if np.max(np.abs(gram - np.eye(len(vecs)))) > 1e-9:
        raise NonOrthonormalBasis("eigenvectors are not orthonormal")

    if dp is None:
        dvals = np.array([float(_central(f, lam, step)) for f in p])
    else:
        dvals = np.array([float(f(lam)) for f in dp])
    if dpsi is None:
        dvecs = np.array([_central(lambda x, f=f: np.asarray(f(x), dtype=np.complex128), lam, step)
                          for f in psi])
    else:
        dvecs = np.array([np.asarray(f(lam), dtype=np.complex128) for f in dpsi])

    support = [i for i, x in enumerate(vals) if x > TOL.p_cut]
    classical = sum(dvals[i] ** 2 / vals[i] for i in support)
    pure = 0.0
    for i in support:
        fi = float(np.real(np.vdot(dvecs[i], dvecs[i])) - abs(np.vdot(vecs[i], dvecs[i])) ** 2)
        pure += 4.0 * vals[i] * fi
    mixture = 0.0
    for i in support:
        for j in support:
            if i != j:
                overlap = abs(np.vdot(vecs[i], dvecs[j])) ** 2
                mixture += 8.0 * vals[i] * vals[j] * overlap / (vals[i] + vals[j])
    total = classical + pure - mixture
    return QfiBreakdown(float(max(total, 0.0)), float(classical), float(pure),
                        float(mixture), len(support))


# random test families ----------------------------------------------------

@dataclass(frozen=True)
class RandomFamily:
    """``ρ(λ) = U(λ) diag(p(λ)) U(λ)^†`` with ``U(λ) = exp(-iλH) U0``.

    The weights are a softmax over the first ``rank`` slots, so the support
    has fixed dimension and every derivative is available in closed form.
    """

    h_evals: np.ndarray
    h_evecs: np.ndarray
    u0: np.ndarray
    logits: np.ndarray
    slopes: np.ndarray
    rank: int

    @classmethod
    def draw(cls, dim: int, rank: int, rng: np.random.Generator) -> "RandomFamily":
        x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = 0.5 * (x + x.conj().T)
        evals, evecs = np.linalg.eigh(h)
        return cls(evals, evecs, random_unitary(dim, rng), rng.normal(size=rank),
                   rng.normal(size=rank), rank)

    @property
    def dim(self) -> int:
        return self.u0.shape[0]

    def _unitary(self, lam):
        return (self.h_evecs * np.exp(-1j * lam * self.h_evals)) @ self.h_evecs.conj().T @ self.u0

    def _dunitary(self, lam):
        h = (self.h_evecs * self.h_evals) @ self.h_evecs.conj().T
        return -1j * h @ self._unitary(lam)

    def weights(self, lam) -> np.ndarray:
        z = self.logits + lam * self.slopes
        e = np.exp(z - z.max())
        out = np.zeros(self.dim)
        out[: self.rank] = e / e.sum()
        return out

    def dweights(self, lam) -> np.ndarray:
        w = self.weights(lam)[: self.rank]
        out = np.zeros(self.dim)
        out[: self.rank] = w * (self.slopes - np.dot(w, self.slopes))
        return out

    def rho(self, lam):
        u = self._unitary(lam)
        return (u * self.weights(lam)) @ u.conj().T

    def drho(self, lam):
        u = self._unitary(lam)
        du = self._dunitary(lam)
        w = self.weights(lam)
        return (du * w) @ u.conj().T + (u * w) @ du.conj().T + (u * self.dweights(lam)) @ u.conj().T

    def family(self) -> ParameterizedFamily:
        return ParameterizedFamily(self.rho, self.drho)

    def eigen_functions(self):
        p = [lambda x, i=i: self.weights(x)[i] for i in range(self.dim)]
        dp = [lambda x, i=i: self.dweights(x)[i] for i in range(self.dim)]
        psi = [lambda x, i=i: self._unitary(x)[:, i] for i in range(self.dim)]
        dpsi = [lambda x, i=i: self._dunitary(x)[:, i] for i in range(self.dim)]
        return p, psi, dp, dpsi


def random_povm(dim: int, n_outcomes: int, rng: np.random.Generator) -> Povm:
    mats = []
    for _ in range(n_outcomes):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        mats.append(a.conj().T @ a)
    s = sum(mats)
    w, v = np.linalg.eigh(s)
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    elems = []
    for m in mats:
        e = s_inv_half @ m @ s_inv_half
        elems.append(0.5 * (e + e.conj().T))
    # absorb the rounding residue of the normalization into the last element
    elems[-1] = elems[-1] + (np.eye(dim) - sum(elems))
    return Povm(tuple(elems))
