"""Local Lie algebra su(d_0) + ... + su(d_{L-1}) and its action on states."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import numkit
from .states import MultipartiteState

FACTOR_TOL = 1e-12


@lru_cache(maxsize=None)
def _su_basis(d: int) -> tuple:
    mats = []
    for k in range(1, d):
        for j in range(k):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1.0
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            mats += [s, a]
        diag = np.zeros(d)
        diag[:k] = 1.0
        diag[k] = -k
        mats.append(np.diag(np.sqrt(2.0 / (k * (k + 1))) * diag).astype(complex))
    for m in mats:
        m.setflags(write=False)
    return tuple(mats)


def su_basis(d: int) -> list[np.ndarray]:
    """Generalized Gell-Mann matrices, normalized to ``Tr(T_a T_b) = 2 delta_ab``.

    Ordered so that d=2 gives (X, Y, Z) and d=3 gives lambda_1..lambda_8.
    """
    if d < 2:
        raise ValueError(f"su(d) basis needs d >= 2, got {d}")
    return list(_su_basis(int(d)))


class LocalHamiltonian:
    """A tuple of traceless Hermitian factors ``(F_0, ..., F_{L-1})``.

    Represents ``sum_k 1 x ... x F_k x ... x 1``.
    """

    __slots__ = ("factors",)

    def __init__(self, factors: Sequence, tol: float = FACTOR_TOL):
        fs = []
        for k, F in enumerate(factors):
            F = numkit.check_hermitian(F, tol)
            scale = max(float(np.max(np.abs(F))), 1.0)
            if abs(np.trace(F)) > tol * scale * F.shape[0]:
                raise ValueError(f"factor {k} is not traceless (trace {np.trace(F):.3e})")
            F = F.copy()
            F.setflags(write=False)
            fs.append(F)
        if not fs:
            raise ValueError("a local Hamiltonian needs at least one factor")
        self.factors = tuple(fs)

    @classmethod
    def projected(cls, factors: Sequence) -> "LocalHamiltonian":
        """Build from Hermitian factors, dropping each factor's trace part."""
        out = []
        for F in factors:
            F = numkit.check_hermitian(F, 1e-10)
            out.append(F - np.trace(F).real / F.shape[0] * np.eye(F.shape[0]))
        return cls(out)

    @classmethod
    def zero(cls, dims: Sequence[int]) -> "LocalHamiltonian":
        return cls([np.zeros((d, d), dtype=complex) for d in dims])

    @classmethod
    def from_coefficients(cls, coeffs, dims: Sequence[int]) -> "LocalHamiltonian":
        coeffs = np.asarray(coeffs, dtype=float)
        factors, pos = [], 0
        for d in dims:
            basis = _su_basis(d)
            c = coeffs[pos:pos + len(basis)]
            factors.append(np.tensordot(c, np.array(basis), axes=1))
            pos += len(basis)
        if pos != coeffs.size:
            raise ValueError(f"{coeffs.size} coefficients do not match dims {tuple(dims)}")
        return cls(factors)

    @classmethod
    def random(cls, dims: Sequence[int], rng: np.random.Generator) -> "LocalHamiltonian":
        return cls([numkit.random_hermitian(d, rng, traceless=True) for d in dims])

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(F.shape[0] for F in self.factors)

    def coefficients(self) -> np.ndarray:
        """Real coordinates in the factor-major Gell-Mann basis."""
        out = []
        for F in self.factors:
            out.extend(0.5 * np.trace(T @ F).real for T in _su_basis(F.shape[0]))
        return np.array(out)

    def __add__(self, other: "LocalHamiltonian") -> "LocalHamiltonian":
        return LocalHamiltonian([a + b for a, b in zip(self.factors, other.factors)])

    def __mul__(self, scalar: float) -> "LocalHamiltonian":
        return LocalHamiltonian([float(scalar) * F for F in self.factors])

    __rmul__ = __mul__

    def __neg__(self) -> "LocalHamiltonian":
        return self * -1.0

    def __repr__(self) -> str:
        return f"LocalHamiltonian(dims={self.dims})"


def algebra_dim(dims: Sequence[int]) -> int:
    return sum(d * d - 1 for d in dims)


def algebra_basis(dims: Sequence[int]) -> list[LocalHamiltonian]:
    """Factor-major basis: all generators of subsystem 0 first, then subsystem 1, ..."""
    dims = tuple(dims)
    out = []
    for k, d in enumerate(dims):
        for T in _su_basis(d):
            factors = [np.zeros((e, e), dtype=complex) for e in dims]
            factors[k] = T
            out.append(LocalHamiltonian(factors))
    return out


def _kron_embed(F: np.ndarray, k: int, dims: Sequence[int]) -> np.ndarray:
    left = int(np.prod(dims[:k], dtype=int))
    right = int(np.prod(dims[k + 1:], dtype=int))
    return np.kron(np.kron(np.eye(left), F), np.eye(right))


def embed_full(F: LocalHamiltonian, dims: Sequence[int] | None = None) -> np.ndarray:
    dims = F.dims if dims is None else tuple(dims)
    if F.dims != dims:
        raise ValueError(f"factor shapes {F.dims} do not match dims {dims}")
    n = int(np.prod(dims))
    out = np.zeros((n, n), dtype=complex)
    for k, Fk in enumerate(F.factors):
        if np.any(Fk):
            out += _kron_embed(Fk, k, dims)
    return out


@lru_cache(maxsize=64)
def _basis_full(dims: tuple) -> np.ndarray:
    arr = np.array([embed_full(F, dims) for F in algebra_basis(dims)])
    arr.setflags(write=False)
    return arr


def basis_full(dims: Sequence[int]) -> np.ndarray:
    """Stack of embedded basis operators, shape ``(N, D, D)``."""
    return _basis_full(tuple(dims))


def as_operator(H, dims: Sequence[int]) -> np.ndarray:
    """Full-space matrix for a LocalHamiltonian or a raw Hermitian matrix."""
    if isinstance(H, LocalHamiltonian):
        return embed_full(H, dims)
    H = np.asarray(H, dtype=complex)
    n = int(np.prod(dims))
    if H.shape != (n, n):
        raise ValueError(f"operator shape {H.shape} does not match state dimension {n}")
    return H


def tangent_vector(state: MultipartiteState, F) -> np.ndarray:
    """Horizontal representative ``-i (F - <F>) psi`` of the tangent vector generated by ``F``."""
    Fhat = as_operator(F, state.dims)
    psi = state.amplitudes
    Fpsi = Fhat @ psi
    mean = np.vdot(psi, Fpsi)
    return -1j * (Fpsi - mean * psi)


def tangent_matrix(state: MultipartiteState) -> np.ndarray:
    """Tangent vectors of all basis generators as columns, shape ``(D, N)``."""
    psi = state.amplitudes
    Fpsi = basis_full(state.dims) @ psi
    means = Fpsi @ psi.conj()
    return (-1j * (Fpsi - means[:, None] * psi[None, :])).T


def commutator(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
        raise ValueError(f"commutator needs square matrices of equal shape, got {A.shape} and {B.shape}")
    return A @ B - B @ A


def realify(vectors: np.ndarray) -> np.ndarray:
    """Stack real and imaginary parts: complex ``(D, m)`` -> real ``(2D, m)``."""
    return np.vstack([vectors.real, vectors.imag])
