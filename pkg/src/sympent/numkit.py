"""Dense complex linear algebra used throughout the package.

Hermitian eigendecomposition is a cyclic Jacobi solver (matrices here are
at most a few hundred rows).  Singular values come from LAPACK via numpy.
Every integer dimension in the package is obtained from
:func:`numerical_rank`, so all routes share one tolerance policy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-10
HERMITIAN_TOL = 1e-12
# singular values within this factor of the threshold make a rank "unstable"
UNSTABLE_MARGIN = 100.0


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class RankResult:
    rank: int
    singular_values: np.ndarray
    tolerance_used: float

    @property
    def stable(self) -> bool:
        """False if any singular value sits within ``UNSTABLE_MARGIN`` of the cut."""
        tau = self.tolerance_used
        if tau == 0.0:
            return True
        s = self.singular_values
        near = (s > tau / UNSTABLE_MARGIN) & (s < tau * UNSTABLE_MARGIN)
        return not bool(np.any(near))


def _as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def check_hermitian(A, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``A`` symmetrized, or raise if ``max|A - A^H|`` exceeds ``tol * max|A|``."""
    A = _as_square(A)
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    dev = float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0
    if dev > tol * max(scale, 1e-300):
        raise NotHermitianError(f"matrix is not Hermitian (deviation {dev:.3e}, scale {scale:.3e})")
    return 0.5 * (A + A.conj().T)


def herm_eig(A, tol: float = HERMITIAN_TOL, max_sweeps: int = 60):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with ``w`` ascending and ``A = V diag(w) V^H``.
    Degenerate eigenvalues are returned as computed, with no grouping.
    """
    A = check_hermitian(A, tol).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    if n <= 1:
        return A.diagonal().real.copy(), V

    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), V
    eps = np.finfo(float).eps
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]

    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(A.diagonal()))
        if off <= eps * scale:
            break
        for p, q in pairs:
            b = complex(A[p, q])
            mag = abs(b)
            if mag <= eps * eps * scale:
                continue
            app, aqq = A[p, p].real, A[q, q].real
            # phase-align the pivot, then a real Jacobi rotation
            ph = b / mag
            phc = ph.conjugate()
            tau = (aqq - app) / (2.0 * mag)
            t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + (1.0 + tau * tau) ** 0.5)
            c = 1.0 / (1.0 + t * t) ** 0.5
            s = t * c
            cp, cq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = c * cp - s * phc * cq
            A[:, q] = s * cp + c * phc * cq
            rp, rq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c * rp - s * ph * rq
            A[q, :] = s * rp + c * ph * rq
            A[p, q] = A[q, p] = 0.0
            A[p, p] = A[p, p].real
            A[q, q] = A[q, q].real
            vp, vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = c * vp - s * phc * vq
            V[:, q] = s * vp + c * phc * vq
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")

    w = A.diagonal().real
    order = np.argsort(w, kind="stable")
    return w[order].copy(), V[:, order]


def svdvals(A) -> np.ndarray:
    A = np.asarray(A)
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


def numerical_rank(A, tol: float | None = None, scale: float | None = None) -> RankResult:
    """Rank from the singular values of ``A``.

    The cut is ``tol * sigma_ref * max(rows, cols)`` with
    ``sigma_ref = max(sigma_max, scale)``; ``tol=None`` uses
    ``DEFAULT_RANK_TOL``.  Pass ``scale`` when the matrix has a known natural
    magnitude, so that a numerically zero matrix gets rank 0.
    """
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {A.shape}")
    if A.size == 0:
        return RankResult(0, np.zeros(0), 0.0)
    rel = DEFAULT_RANK_TOL if tol is None else float(tol)
    if rel <= 0:
        raise ValueError("rank tolerance must be positive")
    s = svdvals(A)
    ref = s[0] if s.size else 0.0
    if scale is not None:
        ref = max(ref, float(scale))
    tau = rel * ref * max(A.shape)
    return RankResult(int(np.count_nonzero(s > tau)), s, float(tau))


def null_space(A, tol: float | None = None, scale: float | None = None) -> tuple[np.ndarray, RankResult]:
    """Orthonormal basis (columns) of the kernel of ``A`` and the rank used to find it."""
    A = np.asarray(A)
    res = numerical_rank(A, tol, scale)
    if A.shape[0] == 0:
        return np.eye(A.shape[1], dtype=A.dtype), res
    _, _, vh = np.linalg.svd(A)
    return vh[res.rank:].conj().T, res


def expm_i_herm(H, t: float = 1.0) -> np.ndarray:
    """``exp(-i H t)`` through the eigendecomposition of ``H``."""
    w, V = herm_eig(H)
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def is_unitary(U, tol: float = 1e-10) -> bool:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) <= tol)


def random_hermitian(n: int, rng: np.random.Generator, traceless: bool = False) -> np.ndarray:
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = 0.5 * (X + X.conj().T)
    if traceless:
        H -= np.trace(H).real / n * np.eye(n)
    return H


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary (QR of a complex Ginibre matrix with phase fix)."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = R.diagonal()
    return Q * (d / np.abs(d))
