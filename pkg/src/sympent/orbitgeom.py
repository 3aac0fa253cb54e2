"""Fubini-Study form on local-unitary orbits, stabilizers and null directions.

All dimensions are real dimensions obtained as integer ranks through
:func:`sympent.numkit.numerical_rank`.  The per-state work is gathered in
:class:`OrbitGeometry`; the module-level functions are thin wrappers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from . import numkit
from .localalg import (
    LocalHamiltonian,
    _su_basis,
    algebra_dim,
    as_operator,
    basis_full,
    realify,
    tangent_matrix,
)
from .spectramap import DEFAULT_GROUP_TOL, group_multiplicities, spectrum
from .states import MultipartiteState, momentum_map

IMAG_RESIDUE_TOL = 1e-10
HORIZONTAL_TOL = 1e-10
# every rank here is of a map built from unit-norm states and O(1) generators
RANK_SCALE = 1.0


class InconsistencyError(RuntimeError):
    """Two routes that must agree mathematically gave different integers."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class SymplecticGram:
    matrix: np.ndarray
    state_ref: MultipartiteState = field(repr=False)


@dataclass(frozen=True)
class OrbitDims:
    dim_orbit: int
    dim_adjoint_orbit: int
    stab_state: int
    stab_mu: int

    @property
    def difference(self) -> int:
        return self.dim_orbit - self.dim_adjoint_orbit


@dataclass(frozen=True)
class NullBasis:
    generators: tuple
    tangents: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.generators)

    @property
    def count(self) -> int:
        return len(self.generators)


def fs_form_operators(state: MultipartiteState, F, G) -> float:
    """``omega_psi(V_F, V_G) = i <psi|[F, G]|psi>``."""
    Fh = as_operator(F, state.dims)
    Gh = as_operator(G, state.dims)
    psi = state.amplitudes
    val = 1j * np.vdot(psi, (Fh @ Gh - Gh @ Fh) @ psi)
    scale = max(1.0, np.linalg.norm(Fh, 2) * np.linalg.norm(Gh, 2))
    if abs(val.imag) > IMAG_RESIDUE_TOL * scale:
        raise ValueError(f"imaginary residue {val.imag:.3e}: operators are not Hermitian")
    return float(val.real)


def fs_form_vectors(state: MultipartiteState, u, v) -> float:
    """``2 Im <v|u>`` on horizontal representatives.

    Agrees with :func:`fs_form_operators` for ``u = V_F`` and ``v = V_G``.
    """
    psi = state.amplitudes
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    for name, x in (("u", u), ("v", v)):
        if abs(np.vdot(psi, x)) > HORIZONTAL_TOL * max(1.0, np.linalg.norm(x)):
            raise ValueError(f"{name} is not horizontal (overlap with psi {abs(np.vdot(psi, x)):.3e})")
    return float(2.0 * np.vdot(v, u).imag)


def horizontal_basis(state: MultipartiteState) -> np.ndarray:
    """Orthonormal columns spanning the complement of ``psi``, shape ``(D, D-1)``."""
    q, _ = np.linalg.qr(state.amplitudes[:, None], mode="complete")
    return q[:, 1:]


def _commutator_map(rho: np.ndarray) -> np.ndarray:
    """Real matrix of ``f -> [rho, f]`` on su(d) Gell-Mann coordinates."""
    cols = [(rho @ T - T @ rho).reshape(-1) for T in _su_basis(rho.shape[0])]
    return realify(np.array(cols).T)


def canonical_basis(K: np.ndarray) -> np.ndarray:
    """Basis of ``span(K)`` that depends only on the subspace, not on ``K``.

    Column-pivoted QR of the orthogonal projector; ties go to the lower
    coordinate index.  A numerically zero map yields coordinate axes
    instead of an arbitrary rotation of them.
    """
    r = K.shape[1]
    if r == 0:
        return K
    P = K @ K.conj().T
    q, R, _ = scipy.linalg.qr(P, pivoting=True)
    q = q[:, :r] * np.sign(np.diag(R)[:r])
    return q


def _dmu_images(state: MultipartiteState, vecs: np.ndarray) -> np.ndarray:
    """Real coordinates of ``d mu`` applied to each column of ``vecs``."""
    dims = state.dims
    m = vecs.shape[1]
    vt = vecs.T.reshape((m,) + dims)
    pt = state.tensor()
    blocks = []
    for k, d in enumerate(dims):
        a = np.moveaxis(vt, k + 1, 1).reshape(m, d, -1)
        b = np.moveaxis(pt, k, 0).reshape(d, -1)
        x = a @ b.conj().T
        drho = (x + x.conj().transpose(0, 2, 1)).reshape(m, -1)
        blocks += [drho.real, drho.imag]
    return np.hstack(blocks).T


class OrbitGeometry:
    """Lazily computed orbit data for one state.

    Every rank computed along the way is kept in ``rank_results`` so that
    a report can tell whether any of them sat close to the threshold.
    """

    def __init__(self, state: MultipartiteState, rank_tol: float | None = None,
                 group_tol: float = DEFAULT_GROUP_TOL):
        self.state = state
        self.rank_tol = rank_tol
        self.group_tol = group_tol
        self.rank_results: dict[str, numkit.RankResult] = {}

    def _rank(self, name: str, A) -> numkit.RankResult:
        res = numkit.numerical_rank(A, self.rank_tol, RANK_SCALE)
        self.rank_results[name] = res
        return res

    @property
    def dims(self) -> tuple:
        return self.state.dims

    @property
    def algebra_dim(self) -> int:
        return algebra_dim(self.dims)

    @cached_property
    def rhos(self):
        return momentum_map(self.state)

    @cached_property
    def tangents(self) -> np.ndarray:
        return tangent_matrix(self.state)

    # -- stabilizers ---------------------------------------------------------

    @cached_property
    def stab_state(self) -> int:
        return self.algebra_dim - self._rank("tangent_map", realify(self.tangents)).rank

    @cached_property
    def commutant_kernels(self) -> list[np.ndarray]:
        out = []
        for k, rho in enumerate(self.rhos):
            ker, res = numkit.null_space(_commutator_map(rho), self.rank_tol, RANK_SCALE)
            self.rank_results[f"commutant_{k}"] = res
            out.append(canonical_basis(ker.real))
        return out

    @cached_property
    def multiplicities(self) -> list[list[int]]:
        return [group_multiplicities(spectrum(rho), self.group_tol) for rho in self.rhos]

    @cached_property
    def stab_mu(self) -> int:
        by_kernel = sum(K.shape[1] for K in self.commutant_kernels)
        by_mult = sum(sum(n * n for n in m) - 1 for m in self.multiplicities)
        if by_kernel != by_mult:
            raise InconsistencyError(
                f"commutant dimension {by_kernel} disagrees with multiplicity count {by_mult}",
                {"multiplicities": self.multiplicities,
                 "kernel_dims": [K.shape[1] for K in self.commutant_kernels]},
            )
        return by_kernel

    @cached_property
    def dims_report(self) -> OrbitDims:
        n = self.algebra_dim
        return OrbitDims(n - self.stab_state, n - self.stab_mu, self.stab_state, self.stab_mu)

    # -- Gram matrices -------------------------------------------------------

    @cached_property
    def gram(self) -> np.ndarray:
        """``G_ab = i <[F_a, F_b]>`` from full-space operators."""
        w = basis_full(self.dims) @ self.state.amplitudes
        g = -2.0 * (w.conj() @ w.T).imag
        return 0.5 * (g - g.T)

    @cached_property
    def gram_kks(self) -> np.ndarray:
        """Same matrix from reduced states: ``i sum_k Tr(rho_k [F_a,k, F_b,k])``."""
        n = self.algebra_dim
        g = np.zeros((n, n))
        pos = 0
        for rho in self.rhos:
            basis = _su_basis(rho.shape[0])
            m = len(basis)
            for a in range(m):
                for b in range(a + 1, m):
                    c = basis[a] @ basis[b] - basis[b] @ basis[a]
                    val = (1j * np.trace(rho @ c)).real
                    g[pos + a, pos + b] = val
                    g[pos + b, pos + a] = -val
            pos += m
        return g

    @cached_property
    def gram_rank(self) -> int:
        return self._rank("gram", self.gram).rank

    # -- null directions -----------------------------------------------------

    @cached_property
    def null_basis(self) -> NullBasis:
        cols = []
        pos = 0
        n = self.algebra_dim
        for K, d in zip(self.commutant_kernels, self.dims):
            m = d * d - 1
            block = np.zeros((n, K.shape[1]))
            block[pos:pos + m] = K
            cols.append(block)
            pos += m
        C = np.hstack(cols)
        V = self.tangents @ C
        expected = self.dims_report.difference
        if C.shape[1] == 0:
            r, chosen = 0, []
        else:
            r = self._rank("null_tangents", realify(V)).rank
            _, _, piv = scipy.linalg.qr(realify(V), mode="economic", pivoting=True)
            chosen = sorted(piv[:r])
        if r != expected:
            raise InconsistencyError(
                f"null basis has {r} generators but orbit dimensions differ by {expected}",
                {"dims": self.dims_report},
            )
        gens = tuple(LocalHamiltonian.from_coefficients(C[:, j], self.dims) for j in chosen)
        return NullBasis(gens, V[:, chosen])

    @cached_property
    def ker_dmu(self) -> np.ndarray:
        h = horizontal_basis(self.state)
        real_basis = np.hstack([h, 1j * h])
        ker, res = numkit.null_space(_dmu_images(self.state, real_basis), self.rank_tol, RANK_SCALE)
        self.rank_results["dmu"] = res
        return real_basis @ ker.real

    @cached_property
    def e_direct(self) -> int:
        span = np.hstack([self.ker_dmu, self.tangents])
        R = realify(span)
        res = self._rank("stratum_span", R)
        u, _, _ = np.linalg.svd(R, full_matrices=False)
        u = u[:, :res.rank]
        D = self.state.dim
        W = u[:D] + 1j * u[D:]
        omega = -2.0 * (W.conj().T @ W).imag
        omega = 0.5 * (omega - omega.T)
        return res.rank - self._rank("stratum_form", omega).rank

    # -- diagnostics ---------------------------------------------------------

    @property
    def rank_stable(self) -> bool:
        return all(r.stable for r in self.rank_results.values())

    def unstable_ranks(self) -> list[str]:
        return [name for name, r in self.rank_results.items() if not r.stable]


def orbit_gram(state: MultipartiteState, route: str = "operators") -> SymplecticGram:
    geo = OrbitGeometry(state)
    if route == "operators":
        return SymplecticGram(geo.gram, state)
    if route == "kks":
        return SymplecticGram(geo.gram_kks, state)
    raise ValueError(f"unknown Gram route {route!r}")


def stab_dim_state(state: MultipartiteState, rank_tol: float | None = None) -> int:
    return OrbitGeometry(state, rank_tol).stab_state


def stab_dim_mu(state: MultipartiteState, rank_tol: float | None = None,
                group_tol: float = DEFAULT_GROUP_TOL) -> int:
    return OrbitGeometry(state, rank_tol, group_tol).stab_mu


def orbit_dims(state: MultipartiteState, rank_tol: float | None = None,
               group_tol: float = DEFAULT_GROUP_TOL) -> OrbitDims:
    return OrbitGeometry(state, rank_tol, group_tol).dims_report


def null_basis(state: MultipartiteState, rank_tol: float | None = None,
               group_tol: float = DEFAULT_GROUP_TOL) -> NullBasis:
    return OrbitGeometry(state, rank_tol, group_tol).null_basis


def ker_dmu_basis(state: MultipartiteState, rank_tol: float | None = None) -> np.ndarray:
    """Real-orthonormal horizontal vectors (columns) along which ``mu`` is stationary."""
    return OrbitGeometry(state, rank_tol).ker_dmu


def degeneracy_direct(state: MultipartiteState, rank_tol: float | None = None) -> int:
    return OrbitGeometry(state, rank_tol).e_direct
