"""
Dense complex linear algebra and quantum-information primitives.

Everything here operates on small dense matrices (dim <= 4096). States and
operators are immutable after construction; all functions are pure.

Conventions:
- Subsystem 0 is the most significant factor of a tensor product, i.e.
  ``kron(A, B)`` puts A on subsystem 0. Basis index of |i>|j> is i*dim_B + j.
- Fidelity is the squared-root-fidelity convention
  F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, so F in [0, 1].

Default tolerance ladder: construction invariants 1e-10, reconstruction and
oracle checks 1e-9, optimization outputs 1e-6.
"""

from __future__ import annotations

import math
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-10
MAX_DIM = 4096


class QsymError(ValueError):
    """Base error for invalid states, operators, or dimension mismatches."""


def _as_square_array(entries) -> np.ndarray:
    a = np.asarray(entries, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise QsymError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[0] > MAX_DIM:
        raise QsymError(f"dimension {a.shape[0]} outside supported range [1, {MAX_DIM}]")
    if not np.isfinite(a).all():
        raise QsymError("matrix entries must be finite")
    return a


class CMatrix:
    """Immutable dense square complex matrix with validity predicates."""

    __slots__ = ("a",)

    def __init__(self, entries):
        a = _as_square_array(entries).copy()
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    def __setattr__(self, name, value):
        raise AttributeError("CMatrix is immutable")

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    @property
    def H(self) -> "CMatrix":
        """Conjugate transpose."""
        return CMatrix(self.a.conj().T)

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return bool(np.max(np.abs(self.a - self.a.conj().T)) <= tol)

    def is_unitary(self, tol: float = DEFAULT_TOL) -> bool:
        d = self.dim
        return bool(np.max(np.abs(self.a.conj().T @ self.a - np.eye(d))) <= tol)

    def is_psd(self, tol: float = DEFAULT_TOL) -> bool:
        if not self.is_hermitian(tol):
            return False
        return bool(np.min(np.linalg.eigvalsh(self.a)) >= -tol)

    def is_projector(self, tol: float = DEFAULT_TOL) -> bool:
        if not self.is_hermitian(tol):
            return False
        return bool(np.max(np.abs(self.a @ self.a - self.a)) <= tol)

    def allclose(self, other, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.a - np.asarray(getattr(other, "a", other)))) <= tol)

    def __matmul__(self, other):
        return CMatrix(self.a @ np.asarray(getattr(other, "a", other)))

    def __add__(self, other):
        return CMatrix(self.a + np.asarray(getattr(other, "a", other)))

    def __sub__(self, other):
        return CMatrix(self.a - np.asarray(getattr(other, "a", other)))

    def __mul__(self, scalar):
        return CMatrix(self.a * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return f"CMatrix(dim={self.dim})"


def asarray(m) -> np.ndarray:
    """Unwrap a CMatrix/DensityMatrix/ndarray-like into a complex ndarray."""
    if isinstance(m, DensityMatrix):
        return m.mat.a
    if isinstance(m, CMatrix):
        return m.a
    return np.asarray(m, dtype=complex)


class DensityMatrix:
    """A quantum state: Hermitian, PSD, unit-trace matrix (all within 1e-10)."""

    __slots__ = ("mat",)

    def __init__(self, entries, tol: float = DEFAULT_TOL):
        mat = entries if isinstance(entries, CMatrix) else CMatrix(entries)
        a = mat.a
        if not mat.is_hermitian(tol):
            raise QsymError("density matrix must be Hermitian")
        if np.min(np.linalg.eigvalsh(a)) < -tol:
            raise QsymError("density matrix must be positive semidefinite")
        if abs(np.trace(a) - 1.0) > tol:
            raise QsymError(f"density matrix trace {np.trace(a)} != 1")
        object.__setattr__(self, "mat", mat)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def a(self) -> np.ndarray:
        return self.mat.a

    @property
    def dim(self) -> int:
        return self.mat.dim

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


class PureState:
    """A normalized state vector (norm within 1e-10 of 1)."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes, tol: float = DEFAULT_TOL):
        v = np.asarray(amplitudes, dtype=complex).reshape(-1).copy()
        if v.size < 1 or v.size > MAX_DIM:
            raise QsymError(f"dimension {v.size} outside supported range")
        if not np.isfinite(v).all():
            raise QsymError("amplitudes must be finite")
        if abs(np.linalg.norm(v) - 1.0) > tol:
            raise QsymError(f"state norm {np.linalg.norm(v)} != 1")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    def __setattr__(self, name, value):
        raise AttributeError("PureState is immutable")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()))

    def __repr__(self):
        return f"PureState(dim={self.dim})"


def statevec(v) -> np.ndarray:
    """Unwrap a PureState/ndarray-like into a complex vector."""
    if isinstance(v, PureState):
        return v.amplitudes
    return np.asarray(v, dtype=complex).reshape(-1)


# ---------------------------------------------------------------------------
# Tensor-product structure
# ---------------------------------------------------------------------------

def kron(a, b) -> CMatrix:
    """Kronecker product; the left factor is the most significant subsystem."""
    return CMatrix(np.kron(asarray(a), asarray(b)))

def kron_all(mats: Iterable) -> CMatrix:
    return CMatrix(reduce(np.kron, (asarray(m) for m in mats)))


def partial_trace(m, dims: Sequence[int], keep) -> CMatrix:
    """Trace out all subsystems not in ``keep``.

    Parameters
    ----------
    m : matrix on the tensor product of ``dims``
    dims : dimensions of the subsystems, most significant first
    keep : iterable of subsystem indices to retain (in their original order)
    """
    a = asarray(m)
    dims = list(dims)
    n = len(dims)
    if int(np.prod(dims)) != a.shape[0]:
        raise QsymError(f"prod(dims)={np.prod(dims)} does not match matrix dim {a.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise QsymError(f"keep indices {keep} out of range for {n} subsystems")
    t = a.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # Trace pairs from the highest index down so earlier axis numbers stay valid.
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + (t.ndim // 2))
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return CMatrix(t.reshape(d_keep, d_keep))


def permute_subsystems_vec(v, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a state vector: new factor i = old factor perm[i]."""
    v = statevec(v)
    dims = list(dims)
    t = v.reshape(dims)
    return np.transpose(t, perm).reshape(-1)


def permutation_operator(dims: Sequence[int], perm: Sequence[int]) -> CMatrix:
    """Unitary W with W|i_0 ... i_{n-1}> = |i_{perm^{-1}(0)} ...>.

    ``perm`` is given in the same convention as ``permute_subsystems_vec``:
    the new factor at slot k is the old factor perm[k].
    """
    dims = list(dims)
    d = int(np.prod(dims))
    w = np.zeros((d, d), dtype=complex)
    eye = np.eye(d)
    for col in range(d):
        w[:, col] = permute_subsystems_vec(eye[:, col] + 0j, dims, perm)
    return CMatrix(w)


# ---------------------------------------------------------------------------
# Spectral primitives
# ---------------------------------------------------------------------------

def hermitian_eig(m, tol: float = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues descending, eigenvectors as CMatrix columns), with
    reconstruction error ||V diag(w) V^dag - m|| <= 1e-9 * dim.
    """
    mat = m if isinstance(m, CMatrix) else CMatrix(m)
    if not mat.is_hermitian(tol):
        raise QsymError("hermitian_eig requires a Hermitian matrix")
    w, v = np.linalg.eigh(mat.a)
    order = np.argsort(w)[::-1]
    return w[order].real, CMatrix(v[:, order])


def _clip_spectrum(w: np.ndarray) -> np.ndarray:
    """Zero out eigenvalues at rounding-noise scale: the square root turns
    O(eps) noise into O(sqrt(eps)) errors otherwise."""
    w = np.clip(w, 0.0, None)
    cutoff = float(np.max(w, initial=0.0)) * 1e-14
    w[w < cutoff] = 0.0
    return w


def sqrtm_psd(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a PSD matrix (eigenvalues clipped at zero)."""
    a = asarray(m)
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    w = np.sqrt(_clip_spectrum(w))
    return (v * w) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Computed from the eigenvalues of sqrt(rho) sigma sqrt(rho), which is
    stabler than the trace norm of sqrt(rho) sqrt(sigma) near singular inputs.
    """
    r = asarray(rho)
    s = asarray(sigma)
    if r.shape != s.shape:
        raise QsymError(f"fidelity dimension mismatch: {r.shape} vs {s.shape}")
    sr = sqrtm_psd(r)
    mid = sr @ s @ sr
    w = np.linalg.eigvalsh((mid + mid.conj().T) / 2)
    val = float(np.sum(np.sqrt(_clip_spectrum(w))) ** 2)
    return min(max(val, 0.0), 1.0)


def purify(rho) -> PureState:
    """Spectral purification of rho on system x purifier.

    The purifier is the least significant factor and has dimension rank(rho)
    rounded up to a power of two (at least 2), so
    ``partial_trace(|psi><psi|, [d, dp], keep={0})`` recovers rho.
    """
    r = asarray(rho)
    w, v = np.linalg.eigh((r + r.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    rank = max(1, int(np.sum(w > 1e-12)))
    dp = 2 ** max(1, math.ceil(math.log2(rank)))
    d = r.shape[0]
    psi = np.zeros(d * dp, dtype=complex)
    order = np.argsort(w)[::-1]
    for j, idx in enumerate(order[:rank]):
        psi += math.sqrt(w[idx]) * np.kron(v[:, idx], _basis_vec(dp, j))
    psi /= np.linalg.norm(psi)
    return PureState(psi)


def complex_conjugate(m) -> CMatrix:
    """Entrywise complex conjugate (no transpose)."""
    return CMatrix(asarray(m).conj())


def _basis_vec(dim: int, i: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


def basis_state(dim: int, i: int) -> PureState:
    return PureState(_basis_vec(dim, i))


# ---------------------------------------------------------------------------
# Random instances (seeded; used by oracles, bounds, and property tests)
# ---------------------------------------------------------------------------

def random_unitary(dim: int, rng: np.random.Generator) -> CMatrix:
    """Haar-distributed unitary via QR of a Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return CMatrix(q)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Hilbert-Schmidt-distributed state G G^dag / Tr (G Ginibre, dim x rank)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m))


def random_pure_state(dim: int, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(v / np.linalg.norm(v))
