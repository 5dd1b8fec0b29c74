"""Perturbative Bogoliubov data for a cavity that goes inertial -> accelerated -> inertial.

Mode indices are integers; ``n >= 0`` are particle modes and ``n < 0``
antiparticle modes. The first-order coefficients ``A1[m, n]`` (coefficient of
``h`` in the inertial -> Rindler transformation) come from a
:class:`CoefficientProvider`; everything else is built from them.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad_vec
from scipy.linalg import expm

from .errors import (
    InvalidGeometry,
    QuadratureNonConvergent,
    TruncationInsufficient,
    UnitarityDefectExceeded,
    WindowTooSmall,
)

DEFAULT_N_TRUNC = 128


@dataclass(frozen=True)
class CavityConfig:
    """Cavity walls at ``a < b`` with boundary phase ``s`` and trip length ``u``.

    ``u`` is the Rindler duration in units of ``2 ln(b/a)``, so that the
    relative phase per mode step, ``E1 = exp(2πiu)``, has period 1 in ``u``.
    """

    a: float
    b: float
    u: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and 0.0 < self.a < self.b):
            raise InvalidGeometry(f"need 0 < a < b, got a={self.a}, b={self.b}")
        if not (np.isfinite(self.u) and self.u >= 0.0):
            raise InvalidGeometry(f"u must be >= 0, got {self.u}")
        if not (0.0 <= self.s < 1.0):
            raise InvalidGeometry(f"s must lie in [0, 1), got {self.s}")

    @classmethod
    def from_h(cls, h: float, u: float = 0.0, s: float = 0.0, center: float = 1.0) -> "CavityConfig":
        if not 0.0 < h < 2.0:
            raise InvalidGeometry(f"h must lie in (0, 2), got {h}")
        return cls(center * (1.0 - h / 2.0), center * (1.0 + h / 2.0), u, s)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def h(self) -> float:
        return 2.0 * (self.b - self.a) / (self.a + self.b)

    @property
    def log_ratio(self) -> float:
        return float(np.log(self.b / self.a))

    @property
    def eta1(self) -> float:
        return 2.0 * self.u * self.log_ratio

    @property
    def tau1(self) -> float:
        return 0.5 * (self.a + self.b) * self.eta1

    def omega(self, n) -> np.ndarray:
        """Rindler frequencies ``(n + s) π / ln(b/a)``."""
        return (np.asarray(n) + self.s) * np.pi / self.log_ratio

    @property
    def e1(self) -> complex:
        return complex(np.exp(1j * np.pi * self.eta1 / self.log_ratio))

    def with_u(self, u: float) -> "CavityConfig":
        return CavityConfig(self.a, self.b, u, self.s)


def make_config(a: float, b: float, u: float = 0.0, s: float = 0.0) -> CavityConfig:
    return CavityConfig(float(a), float(b), float(u), float(s))


def phase_factor(config: CavityConfig, n):
    """Diagonal entry ``G_nn = exp(i Ω_n η1)`` of the Rindler phase matrix."""
    out = np.exp(1j * config.omega(n) * config.eta1)
    return complex(out) if np.ndim(out) == 0 else out


def relative_phase(u: float, j) -> np.ndarray:
    """``E1**j`` evaluated from ``u mod 1`` so that results are exactly periodic."""
    frac = float(u) % 1.0
    return np.exp(2j * np.pi * ((frac * np.asarray(j, dtype=float)) % 1.0))


def _window_indices(window) -> np.ndarray:
    if isinstance(window, (int, np.integer)):
        return np.arange(-int(window), int(window) + 1)
    return np.asarray(list(window), dtype=int)


# coefficient providers -----------------------------------------------------

class CoefficientProvider:
    """Source of first-order Bogoliubov coefficients ``A1[m, n]``.

    Subclasses implement :meth:`first_order_block`. ``decay_constant(n)``
    bounds ``|A1[m, n]| * (m - n)**2`` and feeds the truncation tail bound;
    ``support``, when not ``None``, is a mode radius outside of which all
    coefficients vanish.
    """

    kind = "abstract"
    support: Optional[int] = None
    has_exact = False

    def first_order_block(self, rows, cols) -> np.ndarray:
        raise NotImplementedError

    def first_order(self, m: int, n: int) -> complex:
        return complex(self.first_order_block([m], [n])[0, 0])

    def exact_block(self, rows, cols, h: float) -> np.ndarray:
        raise NotImplementedError(f"{self.kind} provider has no exact coefficients")

    def exact(self, m: int, n: int, h: float) -> complex:
        return complex(self.exact_block([m], [n], h)[0, 0])

    def decay_constant(self, n: int) -> float:
        raise NotImplementedError

    def second_order_diag_imag(self, n: int) -> float:
        """``Im A2[n, n]``; the anti-Hermitian part of ``A2`` is taken as zero."""
        return 0.0


_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
        z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
        z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
        return z ^ (z >> np.uint64(31))


def _unit_uniform(seed: int, a: np.ndarray, b: np.ndarray, salt: int) -> np.ndarray:
    """Deterministic uniforms in [0, 1) keyed by (seed, a, b, salt)."""
    off = np.int64(1 << 20)
    with np.errstate(over="ignore"):
        key = _splitmix64(np.uint64(seed & 0xFFFFFFFF) * np.uint64(0x100000001B3) + np.uint64(salt))
        key = _splitmix64(key ^ (a.astype(np.int64) + off).astype(np.uint64))
        key = _splitmix64(key ^ ((b.astype(np.int64) + off).astype(np.uint64) << np.uint64(21)))
    return (key >> np.uint64(11)).astype(np.float64) / float(1 << 53)


@dataclass(frozen=True)
class SyntheticProvider(CoefficientProvider):
    """Pseudo-random coefficients ``strength * ζ_mn / (m - n)**2`` with unit ``|ζ|``.

    Anti-Hermiticity holds exactly: the phase for ``m > n`` is drawn and the
    ``m < n`` entry is its negative conjugate; diagonal entries are
    ``i * strength * x_n`` with ``x_n`` in [-1, 1). The exact map is
    ``expm(h * A1)`` on a padded window, which is unitary by construction.
    """

    seed: int = 0
    strength: float = 0.1
    support: Optional[int] = None

    kind = "synthetic"
    has_exact = True

    def __post_init__(self):
        if not self.strength > 0:
            raise ValueError("strength must be positive")

    def first_order_block(self, rows, cols) -> np.ndarray:
        m = np.asarray(rows, dtype=np.int64)[:, None]
        n = np.asarray(cols, dtype=np.int64)[None, :]
        m, n = np.broadcast_arrays(m, n)
        lo = np.minimum(m, n)
        hi = np.maximum(m, n)
        phi = 2.0 * np.pi * _unit_uniform(self.seed, hi, lo, 1)
        zeta = np.exp(1j * phi)
        # zeta is the (hi, lo) phase; the (lo, hi) entry is -conj(zeta)
        zeta = np.where(m > n, zeta, -np.conj(zeta))
        diff = (m - n).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            off = self.strength * zeta / diff**2
        diag = 1j * self.strength * (2.0 * _unit_uniform(self.seed, m, m, 2) - 1.0)
        out = np.where(m == n, diag, off)
        if self.support is not None:
            out = np.where((np.abs(m) > self.support) | (np.abs(n) > self.support), 0.0, out)
        return out.astype(np.complex128)

    def decay_constant(self, n: int) -> float:
        return self.strength

    def exact_block(self, rows, cols, h: float) -> np.ndarray:
        rows = np.asarray(rows, dtype=int)
        cols = np.asarray(cols, dtype=int)
        lo = int(min(rows.min(), cols.min()))
        hi = int(max(rows.max(), cols.max()))
        pad = max(hi - lo, 16)
        modes = np.arange(lo - pad, hi + pad + 1)
        full = expm(h * self.first_order_block(modes, modes))
        return full[np.ix_(rows - modes[0], cols - modes[0])]


def provider_synthetic(seed: int = 0, strength: float = 0.1, support: Optional[int] = None) -> SyntheticProvider:
    return SyntheticProvider(int(seed), float(strength), support)


# quadrature backend ----------------------------------------------------------

def _overlap_integrand(xi: float, h: float, rows: np.ndarray, cols: np.ndarray, s: float) -> np.ndarray:
    """Integrand of the region-I/region-II mode overlap on the unit cell ξ in [0, 1].

    Region-I components are plane waves in ``x``, region-II components are
    ``x**-1/2`` times plane waves in ``ln x``; after rescaling the cavity to
    unit length the overlap is ``∫ sqrt(y') cos(π[(m+s) y - (n+s) ξ]) dξ``
    with ``y(ξ) = ln(1 + εξ)/ln(1 + ε)`` and ``ε = h/(1 - h/2)``.
    """
    if h == 0.0:
        y, dy = xi, 1.0
    else:
        eps = h / (1.0 - 0.5 * h)
        lr = np.log1p(eps)
        y = np.log1p(eps * xi) / lr
        dy = eps / ((1.0 + eps * xi) * lr)
    phase = np.pi * ((rows + s) * y - (cols + s) * xi)
    return np.sqrt(dy) * np.cos(phase)


@dataclass(frozen=True)
class QuadratureProvider(CoefficientProvider):
    """Coefficients from numerical mode-overlap integrals.

    ``exact_block`` integrates the overlap at finite ``h``; ``first_order``
    is the central difference ``(A(h) - A(-h)) / 2h`` (integrated as one
    integrand to avoid cancellation) refined by Richardson extrapolation
    with step halving.
    """

    s: float = 0.0
    epsabs: float = 1e-10
    fd_start: float = 2e-3
    fd_tol: float = 1e-7
    max_halvings: int = 14

    kind = "quadrature"
    has_exact = True

    def _integrate(self, func, size: int) -> np.ndarray:
        val, err = quad_vec(func, 0.0, 1.0, epsabs=self.epsabs, epsrel=0.0, norm="max", limit=20000)
        if not np.all(np.isfinite(val)) or err > 10 * self.epsabs:
            raise QuadratureNonConvergent(f"quadrature error estimate {err:.3e}")
        return np.asarray(val).reshape(size)

    def exact_block(self, rows, cols, h: float) -> np.ndarray:
        if not -2.0 < h < 2.0:
            raise ValueError(f"h must lie in (-2, 2), got {h}")
        r, c = np.meshgrid(np.asarray(rows, float), np.asarray(cols, float), indexing="ij")
        rf, cf = r.ravel(), c.ravel()
        val = self._integrate(lambda x: _overlap_integrand(x, h, rf, cf, self.s), rf.size)
        return val.reshape(r.shape).astype(np.complex128)

    def _difference_quotient(self, rf, cf, step) -> np.ndarray:
        def f(x):
            up = _overlap_integrand(x, step, rf, cf, self.s)
            down = _overlap_integrand(x, -step, rf, cf, self.s)
            return (up - down) / (2.0 * step)
        return self._integrate(f, rf.size)

    def first_order_block(self, rows, cols) -> np.ndarray:
        rows = tuple(int(x) for x in np.atleast_1d(rows))
        cols = tuple(int(x) for x in np.atleast_1d(cols))
        return _quadrature_first_order(self, rows, cols).copy()

    def decay_constant(self, n: int) -> float:
        # |A1[m, n]| <= (2|n + s| + 1) / (π² (m - n)²) for the plane-wave mode model
        return (2.0 * abs(n + self.s) + 1.0) / np.pi**2

    def column_norm_defect(self, h: float = 0.01, cols=range(-2, 3), window: int = 128) -> float:
        rows = np.arange(-window, window + 1)
        block = self.exact_block(rows, list(cols), h)
        return float(np.max(np.abs(np.sum(np.abs(block) ** 2, axis=0) - 1.0)))


@lru_cache(maxsize=256)
def _quadrature_first_order(provider: QuadratureProvider, rows: tuple, cols: tuple) -> np.ndarray:
    r, c = np.meshgrid(np.asarray(rows, float), np.asarray(cols, float), indexing="ij")
    rf, cf = r.ravel(), c.ravel()
    step = provider.fd_start
    d_prev = provider._difference_quotient(rf, cf, step)
    est_prev = None
    for _ in range(provider.max_halvings):
        step *= 0.5
        d = provider._difference_quotient(rf, cf, step)
        est = (4.0 * d - d_prev) / 3.0
        if est_prev is not None and np.max(np.abs(est - est_prev)) < provider.fd_tol:
            out = est.reshape(r.shape).astype(np.complex128)
            out.setflags(write=False)
            return out
        d_prev, est_prev = d, est
    raise QuadratureNonConvergent("Richardson extrapolation of the first-order coefficients did not settle")


def provider_quadrature(config: CavityConfig, *, check_unitarity: bool = True) -> QuadratureProvider:
    if config.h > 0.5:
        raise InvalidGeometry(f"series extraction needs h <= 0.5, got h={config.h}")
    provider = QuadratureProvider(s=float(config.s))
    if check_unitarity:
        defect = provider.column_norm_defect()
        if defect > 1e-4:
            raise UnitarityDefectExceeded(f"column norm defect {defect:.3e} at h=0.01")
    return provider


def make_provider(kind: str, config: CavityConfig, seed: int = 0, strength: float = 0.1) -> CoefficientProvider:
    if kind == "synthetic":
        return provider_synthetic(seed, strength)
    if kind == "quadrature":
        return provider_quadrature(config)
    raise ValueError(f"unknown provider kind {kind!r}")


# composition -----------------------------------------------------------------

def alpha_first_order(provider: CoefficientProvider, config: CavityConfig, rows, cols) -> np.ndarray:
    """``𝒜1[p, k] = (G_p - G_k) A1[p, k]``."""
    rows = np.asarray(rows, dtype=int)
    cols = np.asarray(cols, dtype=int)
    g_rows = relative_phase(config.u, rows)
    g_cols = relative_phase(config.u, cols)
    gs = np.exp(2j * np.pi * config.u * config.s)
    return gs * (g_rows[:, None] - g_cols[None, :]) * provider.first_order_block(rows, cols)


def _edge_check(defect: np.ndarray, idx: np.ndarray) -> None:
    n = len(idx)
    if n < 10:
        return
    edge = max(1, n // 10)
    mask_edge = np.zeros(n, bool)
    mask_edge[:edge] = mask_edge[-edge:] = True
    mid = slice(n // 4, n - n // 4)
    interior = float(np.max(defect[mid, mid]))
    boundary = float(max(np.max(defect[mask_edge, :]), np.max(defect[:, mask_edge])))
    if boundary > max(10.0 * interior, 1e-8):
        raise WindowTooSmall(
            f"unitarity defect {boundary:.3e} at the window edge vs {interior:.3e} inside"
        )


def compose_alpha(provider: CoefficientProvider, config: CavityConfig, window, *,
                  h: Optional[float] = None, method: str = "auto",
                  check_edges: bool = False) -> np.ndarray:
    """Region I -> III transformation ``𝒜 = A^† G A`` on the mode window.

    ``method='exact'`` composes the finite-``h`` coefficients; ``'series'``
    returns ``G + h 𝒜1 + h² 𝒜2`` with ``𝒜2 = [A1, [A1, G]] / 2``, which is
    the second-order term of the composition when the anti-Hermitian part of
    ``A2`` vanishes. ``'auto'`` prefers the exact map when the provider has one.
    Sums over intermediate modes run over a window padded to twice the width.
    """
    idx = _window_indices(window)
    if len(idx) > 2 * 512 + 1:
        raise ValueError("window half-width must not exceed 512")
    h = config.h if h is None else float(h)
    if method == "auto":
        method = "exact" if provider.has_exact else "series"
    width = int(np.max(np.abs(idx)))
    inner = np.arange(-2 * width - 1, 2 * width + 2)
    g_inner = np.exp(1j * config.omega(inner) * config.eta1)
    if method == "exact":
        a_in = provider.exact_block(inner, idx, h)
        out = a_in.conj().T @ (g_inner[:, None] * a_in)
    elif method == "series":
        g_idx = np.exp(1j * config.omega(idx) * config.eta1)
        a1_idx = provider.first_order_block(idx, idx)
        first = (g_idx[:, None] - g_idx[None, :]) * a1_idx
        a1_out = provider.first_order_block(idx, inner)      # A1[p, n]
        a1_in = provider.first_order_block(inner, idx)       # A1[n, k]
        ga1_in = g_inner[:, None] * a1_in
        # [A1,[A1,G]] = A1²G + GA1² - 2 A1 G A1
        a1sq = a1_out @ a1_in
        second = 0.5 * (a1sq * g_idx[None, :] + g_idx[:, None] * a1sq) - a1_out @ ga1_in
        out = np.diag(g_idx) + h * first + h * h * second
    else:
        raise ValueError(f"unknown method {method!r}")
    if check_edges:
        _edge_check(np.abs(out.conj().T @ out - np.eye(len(idx))), idx)
    return out


def unitarity_defect(alpha: np.ndarray) -> np.ndarray:
    return np.abs(alpha.conj().T @ alpha - np.eye(alpha.shape[0]))


# mode sums -------------------------------------------------------------------

@dataclass(frozen=True)
class BogoliubovData:
    """Order-h² leakage sums for the reference mode ``k``.

    ``f_plus``/``f_minus`` sum ``|𝒜1[p, k]|²`` over particle (``p >= 0``) and
    antiparticle (``p < 0``) modes; ``g_plus = f_plus - f_minus``.
    ``a2_kk`` is the second-order diagonal entry of the composition.
    """

    k: int
    u: float
    s: float
    g_k: complex
    e1: complex
    f_plus: float
    f_minus: float
    f_total: float
    g_plus: float
    g_minus: float
    a2_kk: complex
    n_trunc: int
    tail_estimate: float

    @property
    def nu(self) -> int:
        return 1 if self.k >= 0 else -1

    @property
    def f_nu(self) -> float:
        """``f_k^ν``: leakage into the reference mode's own charge sector."""
        return self.f_plus if self.nu > 0 else self.f_minus

    @property
    def f_anti(self) -> float:
        """``f_k^{-ν}``: leakage into the opposite charge sector."""
        return self.f_minus if self.nu > 0 else self.f_plus

    @property
    def g_nu(self) -> float:
        return self.f_nu - self.f_anti

    @property
    def g_anti(self) -> float:
        return self.f_anti - self.f_nu

    @classmethod
    def zero(cls, k: int, s: float = 0.0) -> "BogoliubovData":
        return cls(k, 0.0, s, 1.0 + 0j, 1.0 + 0j, 0.0, 0.0, 0.0, 0.0, 0.0, 0j, 0, 0.0)


def tail_bound(decay: float, u: float, k: int, n_trunc: int) -> float:
    """Upper bound on the neglected part of ``Σ_p |𝒜1[p, k]|²`` beyond ``|p| > n_trunc``."""
    theta = 2.0 * np.pi * min(u % 1.0, 1.0 - (u % 1.0))
    if theta == 0.0:
        return 0.0
    total = 0.0
    for j0 in (n_trunc - k, n_trunc + k):
        j0 = max(j0, 1)
        total += min(4.0 / (3.0 * j0**3), theta**2 / j0)
    return decay**2 * total


def mode_sums(provider: CoefficientProvider, config: CavityConfig, k: int,
              n_trunc: int = DEFAULT_N_TRUNC) -> BogoliubovData:
    k = int(k)
    if n_trunc < 8 * (abs(k) + 1):
        raise TruncationInsufficient(f"n_trunc={n_trunc} is below 8(|k|+1)={8 * (abs(k) + 1)}")
    p = np.arange(-n_trunc, n_trunc + 1)
    a1 = provider.first_order_block(p, [k])[:, 0]
    weight = np.abs(a1) ** 2
    rel = relative_phase(config.u, p - k)
    leak = np.abs(rel - 1.0) ** 2 * weight
    leak[p == k] = 0.0
    f_plus = float(np.sum(leak[p >= 0]))
    f_minus = float(np.sum(leak[p < 0]))
    f_total = f_plus + f_minus

    if provider.support is not None and n_trunc >= provider.support:
        tail = 0.0
    else:
        tail = tail_bound(provider.decay_constant(k), config.u, k, n_trunc)
    if tail > 1e-3 * f_total + 1e-14:
        raise TruncationInsufficient(
            f"tail bound {tail:.3e} exceeds 1e-3 of f_total={f_total:.3e} (k={k}, u={config.u})"
        )

    g_k = phase_factor(config, k)
    # conj(G_k) 𝒜2_kk = Σ_p |A1[p,k]|² (E1^(p-k) - 1) + 2i Im A2_kk
    mask = p != k
    inner = np.sum(weight[mask] * (rel[mask] - 1.0)) + 2j * provider.second_order_diag_imag(k)
    return BogoliubovData(
        k=k, u=float(config.u), s=float(config.s), g_k=g_k, e1=config.e1,
        f_plus=f_plus, f_minus=f_minus, f_total=f_total,
        g_plus=f_plus - f_minus, g_minus=f_minus - f_plus,
        a2_kk=complex(g_k * inner), n_trunc=int(n_trunc), tail_estimate=float(tail),
    )
