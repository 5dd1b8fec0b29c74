"""Dense Hermitian linear algebra for the small matrices used throughout.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``;
:class:`DensityMatrix` adds validation and basis labels on top.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    InvalidDensityMatrix,
    NonHermitianInput,
)


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-12
    trace: float = 1e-10
    psd: float = 1e-10
    # eigenvalue threshold defining the support of a state
    p_cut: float = 1e-10
    # eigenvalue gap below which eigenvectors are treated as one cluster
    degenerate_gap: float = 1e-9
    max_eig_dim: int = 64
    fd_step: float = 1e-6


TOL = Tolerances()


class EigenSystem(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def hermiticity_defect(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def _jacobi_sweeps(a: np.ndarray, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(float(np.max(np.abs(a))), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a)))
        if float(off.max(initial=0.0)) <= 1e-17 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = abs(apq)
                if g <= 1e-300:
                    continue
                phase = apq / g
                tau = (a[q, q].real - a[p, p].real) / (2.0 * g)
                if tau >= 0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # phase-strip the (p, q) entry, then a real Givens rotation:
                # J = [[c, s], [-s*conj(phase), c*conj(phase)]]
                pc = phase.conjugate()
                for x in (a, v):
                    xp = x[:, p].copy()
                    xq = x[:, q]
                    x[:, p] = c * xp - (s * pc) * xq
                    x[:, q] = s * xp + (c * pc) * xq
                rp = a[p, :].copy()
                rq = a[q, :]
                a[p, :] = c * rp - (s * phase) * rq
                a[q, :] = s * rp + (c * phase) * rq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    return a, v


def hermitian_eig(h, *, tol: Tolerances = TOL) -> EigenSystem:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Eigenvalues come back ascending. Eigenvectors within a near-degenerate
    cluster are re-orthonormalized, and every eigenvector is phased so its
    largest component is real and positive, which makes the output a pure
    function of the input.
    """
    h = as_matrix(h)
    n, m = h.shape
    if n != m:
        raise DimensionMismatch(f"matrix is not square: {h.shape}")
    if n > tol.max_eig_dim:
        raise DimensionTooLarge(f"dimension {n} exceeds {tol.max_eig_dim}")
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    defect = hermiticity_defect(h)
    if defect > tol.herm * scale:
        raise NonHermitianInput(f"Hermiticity defect {defect:.3e}")

    a = 0.5 * (h + h.conj().T)
    a, v = _jacobi_sweeps(a.copy())
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]

    start = 0
    for i in range(1, n + 1):
        if i == n or w[i] - w[i - 1] >= tol.degenerate_gap:
            if i - start > 1:
                q, _ = np.linalg.qr(v[:, start:i])
                v[:, start:i] = q
            start = i

    for j in range(n):
        col = v[:, j]
        k = int(np.argmax(np.abs(col) - 1e-12 * np.arange(n)))
        v[:, j] = col * (abs(col[k]) / col[k])
    return EigenSystem(w, v)


def reconstruct(es: EigenSystem) -> np.ndarray:
    w, v = es
    return (v * w) @ v.conj().T


def _resolve_keep(keep) -> int:
    if keep in (0, "A", "a", "first"):
        return 0
    if keep in (1, "B", "b", "R", "second"):
        return 1
    raise ValueError(f"unknown subsystem id {keep!r}")


def ptrace(matrix, keep, dims: tuple[int, int]) -> np.ndarray:
    """Partial trace of an operator on A⊗B (A is the left Kronecker factor)."""
    m = as_matrix(matrix)
    da, db = dims
    if da * db != m.shape[0] or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"dims {dims} do not match matrix shape {m.shape}")
    t = m.reshape(da, db, da, db)
    if _resolve_keep(keep) == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    basis_labels: tuple[str, ...] = ()
    psd_tol: float = field(default=TOL.psd, compare=False)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        n = m.shape[0]
        if m.shape != (n, n):
            raise DimensionMismatch(f"density matrix must be square, got {m.shape}")
        if not self.basis_labels:
            object.__setattr__(self, "basis_labels", tuple(str(i) for i in range(n)))
        elif len(self.basis_labels) != n:
            raise DimensionMismatch("one basis label per dimension required")
        defect = hermiticity_defect(m)
        if defect > TOL.herm:
            raise InvalidDensityMatrix(f"Hermiticity defect {defect:.3e}")
        tr = np.trace(m)
        if abs(tr - 1.0) > TOL.trace:
            raise InvalidDensityMatrix(f"trace {tr} differs from 1")
        lo = float(hermitian_eig(m).eigenvalues[0])
        if lo < -self.psd_tol:
            raise InvalidDensityMatrix(f"smallest eigenvalue {lo:.3e} below -{self.psd_tol:.1e}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "basis_labels", tuple(self.basis_labels))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eig(self) -> EigenSystem:
        return hermitian_eig(self.matrix)


def tensor_labels(la: Sequence[str], lb: Sequence[str]) -> tuple[str, ...]:
    return tuple(f"{x} ⊗ {y}" for x in la for y in lb)


def tensor(a, b):
    """Kronecker product; density matrices keep their labels (left-major)."""
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(
            np.kron(a.matrix, b.matrix),
            tensor_labels(a.basis_labels, b.basis_labels),
            psd_tol=max(a.psd_tol, b.psd_tol),
        )
    return np.kron(as_matrix(_raw(a)), as_matrix(_raw(b)))


def _raw(x):
    return x.matrix if isinstance(x, DensityMatrix) else x


def partial_trace(rho: DensityMatrix, keep, dims: tuple[int, int]) -> DensityMatrix:
    da, db = dims
    reduced = ptrace(rho.matrix, keep, dims)
    if rho.basis_labels and len(rho.basis_labels) == da * db:
        labels = [lab.split(" ⊗ ") for lab in rho.basis_labels]
        if all(len(parts) >= 2 for parts in labels):
            if _resolve_keep(keep) == 0:
                kept = tuple(labels[i * db][0] for i in range(da))
            else:
                kept = tuple(" ⊗ ".join(labels[j][1:]) for j in range(db))
        else:
            kept = ()
    else:
        kept = ()
    return DensityMatrix(reduced, kept, psd_tol=rho.psd_tol)


def pure_density(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return np.outer(psi, psi.conj())


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (x + x.conj().T)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(x)
    d = np.diag(r)
    return q * (d / np.abs(d))
