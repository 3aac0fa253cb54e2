import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from sympent import numkit as nk
from sympent import states as st
from sympent.localalg import (
    LocalHamiltonian, algebra_basis, algebra_dim, commutator, embed_full, realify, su_basis,
    tangent_matrix, tangent_vector,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)


def _kron_embed(factors):
    # oracle: explicit Kronecker sum
    dims = [F.shape[0] for F in factors]
    total = 0
    for k, F in enumerate(factors):
        ops = [np.eye(d) for d in dims]
        ops[k] = F
        term = ops[0]
        for op in ops[1:]:
            term = np.kron(term, op)
        total = total + term
    return total


def test_su2_is_pauli():
    B = su_basis(2)
    assert all(np.allclose(a, b) for a, b in zip(B, [X, Y, Z]))


def test_su3_is_gell_mann():
    B = su_basis(3)
    assert len(B) == 8
    l8 = np.diag([1, 1, -2]) / np.sqrt(3)
    assert np.allclose(B[-1], l8)
    assert np.allclose(B[0], [[0, 1, 0], [1, 0, 0], [0, 0, 0]])


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_su_basis_gram(d):
    B = su_basis(d)
    assert len(B) == d * d - 1
    G = np.array([[np.trace(a @ b) for b in B] for a in B])
    assert np.allclose(G, 2 * np.eye(d * d - 1), atol=1e-13)
    for T in B:
        assert abs(np.trace(T)) < 1e-14
        assert np.allclose(T, T.conj().T)


def test_su_basis_rejects_small_d():
    with pytest.raises(ValueError):
        su_basis(1)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (2, 2, 2)])
def test_algebra_basis_spans(dims):
    basis = algebra_basis(dims)
    assert len(basis) == algebra_dim(dims)
    coords = np.array([np.concatenate([F.ravel() for F in H.factors]) for H in basis]).T
    assert nk.numerical_rank(realify(coords)).rank == algebra_dim(dims)
    # factor-major: first d1^2-1 elements act on subsystem 0 only
    first = basis[: dims[0] ** 2 - 1]
    assert all(np.allclose(H.factors[1], 0) for H in first)


def test_local_hamiltonian_validation():
    with pytest.raises(ValueError):
        LocalHamiltonian([I2])
    with pytest.raises(ValueError):
        LocalHamiltonian([np.array([[0, 1], [0, 0]], dtype=complex)])
    H = LocalHamiltonian.projected([I2 + X, 3 * Z])
    assert np.allclose(H.factors[0], X)


def test_coefficients_round_trip(rng):
    H = LocalHamiltonian.random((2, 3), rng)
    H2 = LocalHamiltonian.from_coefficients(H.coefficients(), H.dims)
    assert all(np.allclose(a, b) for a, b in zip(H.factors, H2.factors))


def test_embed_full_examples():
    assert np.allclose(embed_full(LocalHamiltonian.zero((2, 2))), 0)
    H = LocalHamiltonian([Z, np.zeros((2, 2))])
    assert np.allclose(embed_full(H), np.diag([1, 1, -1, -1]))


@pytest.mark.parametrize("dims", [(2, 2), (3, 2), (2, 2, 2)])
def test_embed_full_matches_kron_and_expectation(dims, rng):
    H = LocalHamiltonian.random(dims, rng)
    full = embed_full(H)
    assert np.allclose(full, _kron_embed(H.factors), atol=1e-14)
    assert abs(np.trace(full)) < 1e-12
    psi = st.random_state(dims, rng)
    lhs = np.vdot(psi.amplitudes, full @ psi.amplitudes).real
    rhs = sum(np.trace(r @ F).real for r, F in zip(st.momentum_map(psi), H.factors))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_embed_full_is_linear(rng):
    F, G = LocalHamiltonian.random((2, 3), rng), LocalHamiltonian.random((2, 3), rng)
    a, b = 0.7, -2.3
    assert np.max(np.abs(embed_full(a * F + b * G) - a * embed_full(F) - b * embed_full(G))) < 1e-13


def test_tangent_vector_examples(bell):
    v = tangent_vector(st.basis_state((0, 0), (2, 2)), LocalHamiltonian([X, np.zeros((2, 2))]))
    assert np.allclose(v, [0, 0, -1j, 0])
    stab = LocalHamiltonian([Z, -Z])
    assert np.allclose(tangent_vector(bell, stab), 0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=hst.integers(0, 2**32 - 1), dims=hst.sampled_from([(2, 2), (2, 3), (2, 2, 2)]))
def test_tangent_vector_horizontal_and_variance(seed, dims):
    rng = np.random.default_rng(seed)
    psi = st.random_state(dims, rng)
    F = LocalHamiltonian.random(dims, rng)
    v = tangent_vector(psi, F)
    Fh = embed_full(F)
    p = psi.amplitudes
    mean = np.vdot(p, Fh @ p).real
    var = np.vdot(p, Fh @ Fh @ p).real - mean**2
    assert abs(np.vdot(p, v)) <= 1e-12
    assert np.vdot(v, v).real == pytest.approx(var, abs=1e-12)


def test_tangent_vector_zero_iff_eigenvector(ghz3, rng):
    # GHZ3 stabilizer: diagonal Z generators with a1 + a2 + a3 = 0
    stab = LocalHamiltonian([0.3 * Z, 0.5 * Z, -0.8 * Z])
    Fh = embed_full(stab)
    p = ghz3.amplitudes
    assert np.allclose(Fh @ p, np.vdot(p, Fh @ p) * p)
    assert np.allclose(tangent_vector(ghz3, stab), 0, atol=1e-12)
    for _ in range(10):
        F = LocalHamiltonian.random((2, 2, 2), rng)
        Fp = embed_full(F) @ p
        assert not np.allclose(Fp, np.vdot(p, Fp) * p)
        assert np.linalg.norm(tangent_vector(ghz3, F)) > 1e-6


def test_tangent_vector_accepts_full_operator(rng):
    psi = st.random_state((2, 2), rng)
    F = LocalHamiltonian.random((2, 2), rng)
    assert np.allclose(tangent_vector(psi, F), tangent_vector(psi, embed_full(F)))


def test_tangent_matrix_columns(rng):
    psi = st.random_state((2, 3), rng)
    T = tangent_matrix(psi)
    for a, F in enumerate(algebra_basis(psi.dims)):
        assert np.allclose(T[:, a], tangent_vector(psi, F))


def test_commuting_generator_preserves_momentum_map(w3):
    # Z-type generators commute with the diagonal reduced states of W3
    F = LocalHamiltonian([Z, 0.4 * Z, -1.1 * Z])
    rhos0 = st.momentum_map(w3)
    for t in np.linspace(0, 1, 11):
        U = nk.expm_i_herm(embed_full(F), t)
        moved = st.momentum_map(st.MultipartiteState(U @ w3.amplitudes, w3.dims))
        for a, b in zip(rhos0, moved):
            assert np.allclose(a, b, atol=1e-10)


def test_commutator_examples(rng):
    assert np.allclose(commutator(X, Y), 2j * Z)
    A = nk.random_hermitian(4, rng)
    assert np.allclose(commutator(A, A), 0)
    B, C = nk.random_hermitian(4, rng), nk.random_hermitian(4, rng)
    jac = sum(commutator(a, commutator(b, c)) for a, b, c in [(A, B, C), (B, C, A), (C, A, B)])
    assert np.max(np.abs(jac)) <= 1e-12
    K = commutator(A, B)
    assert np.allclose(K, -K.conj().T)
    with pytest.raises(ValueError):
        commutator(np.eye(2), np.eye(3))


def test_pairwise_basis_commutators_su2():
    B = su_basis(2)
    eps = {(0, 1): 2, (1, 2): 0, (2, 0): 1}
    for (a, b), c in eps.items():
        assert np.allclose(commutator(B[a], B[b]), 2j * B[c])
    for a, b in itertools.combinations(range(3), 2):
        assert np.allclose(commutator(B[a], B[b]), -commutator(B[b], B[a]))
