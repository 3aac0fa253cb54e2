"""Multipartite pure states, reduced density matrices and Schmidt forms.

Tensor index order is big-endian: subsystem 0 is the slowest-varying index,
so ``|q0 q1 ... q_{L-1}>`` maps to flat index ``q0*d1*...*d_{L-1} + ...``.
Subsystems are indexed from 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import combinations
from math import prod
from typing import Sequence

import numpy as np

from . import numkit

NORM_TOL = 1e-12
# amplitudes at or below this magnitude are treated as zero when fixing the phase
PHASE_TOL = 1e-12


class MultipartiteState:
    """Normalized, phase-fixed amplitude vector on ``C^d0 x ... x C^d_{L-1}``.

    The global phase is fixed so that the first nonzero amplitude is real
    and positive; two states representing the same projective point then
    have (numerically) equal amplitudes.
    """

    __slots__ = ("dims", "amplitudes")

    def __init__(self, amplitudes, dims: Sequence[int]):
        dims = tuple(int(d) for d in dims)
        if not dims or any(d < 2 for d in dims):
            raise ValueError(f"factor dimensions must all be >= 2, got {dims}")
        psi = np.array(amplitudes, dtype=complex).reshape(-1)
        if psi.size != prod(dims):
            raise ValueError(f"{psi.size} amplitudes do not match dims {dims}")
        norm = np.linalg.norm(psi)
        if not np.isfinite(norm) or norm <= NORM_TOL:
            raise ValueError("cannot normalize a zero vector")
        psi = psi / norm
        nz = np.flatnonzero(np.abs(psi) > PHASE_TOL)
        a = psi[nz[0]]
        psi = psi * (abs(a) / a)
        psi[nz[0]] = abs(a)
        psi.setflags(write=False)
        self.dims = dims
        self.amplitudes = psi

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def __repr__(self) -> str:
        return f"MultipartiteState(dims={self.dims}, amplitudes={np.array2string(self.amplitudes, precision=4)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultipartiteState):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.amplitudes, other.amplitudes)

    __hash__ = None


@dataclass(frozen=True)
class DensityTuple:
    """The tuple of one-body reduced density matrices of a pure state."""

    rhos: tuple

    def __len__(self) -> int:
        return len(self.rhos)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.rhos[k]

    def __iter__(self):
        return iter(self.rhos)


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        amps = np.sqrt(self.coefficients)
        m = (self.left_basis * amps) @ self.right_basis.T
        return m.reshape(-1)


def _check_index(state: MultipartiteState, k: int) -> int:
    L = state.n_parties
    if not isinstance(k, (int, np.integer)) or not 0 <= k < L:
        raise IndexError(f"subsystem index {k} out of range for {L} subsystems")
    return int(k)


def partial_trace(state: MultipartiteState, keep: int) -> np.ndarray:
    """Reduced density matrix of subsystem ``keep`` (all others traced out)."""
    k = _check_index(state, keep)
    m = np.moveaxis(state.tensor(), k, 0).reshape(state.dims[k], -1)
    rho = m @ m.conj().T
    return 0.5 * (rho + rho.conj().T)


def momentum_map(state: MultipartiteState) -> DensityTuple:
    return DensityTuple(tuple(partial_trace(state, k) for k in range(state.n_parties)))


def schmidt(state: MultipartiteState) -> SchmidtDecomposition:
    if state.n_parties != 2:
        raise ValueError(f"Schmidt decomposition needs a bipartite state, got {state.n_parties} parties")
    u, s, vh = np.linalg.svd(state.tensor())
    p = s**2
    p = p / p.sum()
    r = p.size
    return SchmidtDecomposition(p, u[:, :r], vh[:r].T)


def projective_equal(a: MultipartiteState, b: MultipartiteState, tol: float = 1e-10) -> bool:
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")
    return bool(abs(np.vdot(a.amplitudes, b.amplitudes)) >= 1.0 - tol)


def apply_local_unitary(state: MultipartiteState, unitaries: Sequence, tol: float = 1e-10) -> MultipartiteState:
    """Image of ``state`` under ``U_0 x ... x U_{L-1}``."""
    if len(unitaries) != state.n_parties:
        raise ValueError(f"need {state.n_parties} unitary factors, got {len(unitaries)}")
    t = state.tensor()
    for k, (U, d) in enumerate(zip(unitaries, state.dims)):
        U = np.asarray(U, dtype=complex)
        if U.shape != (d, d):
            raise ValueError(f"factor {k} has shape {U.shape}, expected {(d, d)}")
        if not numkit.is_unitary(U, tol):
            raise ValueError(f"factor {k} is not unitary")
        t = np.moveaxis(np.tensordot(U, t, axes=([1], [k])), 0, k)
    return MultipartiteState(t.reshape(-1), state.dims)


def apply_operator(state: MultipartiteState, op) -> np.ndarray:
    """Raw (unnormalized) vector ``op @ psi``."""
    return np.asarray(op) @ state.amplitudes


# -- named constructors -------------------------------------------------------

def basis_state(digits: Sequence[int], dims: Sequence[int]) -> MultipartiteState:
    dims = tuple(dims)
    if len(digits) != len(dims):
        raise ValueError("digit count does not match number of factors")
    for q, d in zip(digits, dims):
        if not 0 <= q < d:
            raise ValueError(f"digit {q} out of range for local dimension {d}")
    psi = np.zeros(prod(dims), dtype=complex)
    psi[np.ravel_multi_index(tuple(digits), dims)] = 1.0
    return MultipartiteState(psi, dims)


def ghz(n_parties: int, d: int = 2) -> MultipartiteState:
    if n_parties < 1 or d < 2:
        raise ValueError("ghz needs n_parties >= 1 and d >= 2")
    dims = (d,) * n_parties
    psi = np.zeros(d**n_parties, dtype=complex)
    for j in range(d):
        psi[np.ravel_multi_index((j,) * n_parties, dims)] = 1.0
    return MultipartiteState(psi, dims)


def dicke(n_parties: int, excitations: int) -> MultipartiteState:
    if n_parties < 1 or not 0 <= excitations <= n_parties:
        raise ValueError(f"dicke needs 0 <= k <= L, got L={n_parties}, k={excitations}")
    dims = (2,) * n_parties
    psi = np.zeros(2**n_parties, dtype=complex)
    for ones in combinations(range(n_parties), excitations):
        digits = [1 if q in ones else 0 for q in range(n_parties)]
        psi[np.ravel_multi_index(tuple(digits), dims)] = 1.0
    return MultipartiteState(psi, dims)


def w(n_parties: int) -> MultipartiteState:
    return dicke(n_parties, 1)


def product(*factors) -> MultipartiteState:
    vecs = [np.asarray(f, dtype=complex).reshape(-1) for f in factors]
    if not vecs:
        raise ValueError("product needs at least one factor")
    return MultipartiteState(reduce(np.kron, vecs), [v.size for v in vecs])


def schmidt_state(*weights, d: int | None = None) -> MultipartiteState:
    """``sum_i sqrt(p_i) |i>|i>`` in ``C^d x C^d`` (``d`` defaults to the weight count)."""
    if len(weights) == 1 and np.ndim(weights[0]) == 1:
        weights = tuple(weights[0])
    p = np.asarray(weights, dtype=float)
    d = p.size if d is None else int(d)
    if p.size == 0 or p.size > d:
        raise ValueError("need between 1 and d Schmidt weights")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
        raise ValueError("Schmidt weights must be nonnegative and sum to 1")
    m = np.zeros((d, d), dtype=complex)
    m[np.arange(p.size), np.arange(p.size)] = np.sqrt(p)
    return MultipartiteState(m.reshape(-1), (d, d))


_NAMED = {
    "ghz": ghz,
    "w": w,
    "dicke": dicke,
    "product": product,
    "schmidt_state": schmidt_state,
}


def make_named(name: str, *args, **kwargs) -> MultipartiteState:
    try:
        fn = _NAMED[name]
    except KeyError:
        raise ValueError(f"unknown named state {name!r}; choose from {sorted(_NAMED)}") from None
    return fn(*args, **kwargs)


def random_state(dims: Sequence[int], rng: np.random.Generator) -> MultipartiteState:
    """Haar-random pure state from normalized complex Gaussians."""
    n = prod(dims)
    return MultipartiteState(rng.standard_normal(n) + 1j * rng.standard_normal(n), dims)


def random_local_unitaries(dims: Sequence[int], rng: np.random.Generator) -> list[np.ndarray]:
    return [numkit.random_unitary(d, rng) for d in dims]
