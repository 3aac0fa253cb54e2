import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from sympent import numkit as nk
from sympent import states as st

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def _contract(amps, dims, k):
    # independent reduced-state oracle by explicit index sums
    D = int(np.prod(dims))
    rho = np.zeros((dims[k], dims[k]), dtype=complex)
    idx = list(np.ndindex(*dims))
    for a in range(D):
        for b in range(D):
            ia, ib = idx[a], idx[b]
            if all(ia[j] == ib[j] for j in range(len(dims)) if j != k):
                rho[ia[k], ib[k]] += amps[a] * np.conj(amps[b])
    return rho


def test_phase_convention():
    s = st.MultipartiteState(np.array([0, 1j, 1j]), (3,))
    assert s.amplitudes[1].real > 0 and abs(s.amplitudes[1].imag) <= 1e-12
    assert np.linalg.norm(s.amplitudes) == pytest.approx(1.0, abs=1e-12)
    assert not s.amplitudes.flags.writeable


@pytest.mark.parametrize("amps, dims", [
    (np.zeros(4), (2, 2)),
    (np.ones(3), (2, 2)),
    (np.ones(2), (1, 2)),
])
def test_invalid_states(amps, dims):
    with pytest.raises(ValueError):
        st.MultipartiteState(amps, dims)


def test_partial_trace_examples(bell, w3):
    assert np.allclose(st.partial_trace(st.basis_state((0, 0), (2, 2)), 0), np.diag([1, 0]))
    assert np.allclose(st.partial_trace(bell, 0), np.eye(2) / 2)
    for k in range(3):
        assert np.allclose(st.partial_trace(w3, k), np.diag([2 / 3, 1 / 3]), atol=1e-14)
    with pytest.raises(IndexError):
        st.partial_trace(bell, 2)


def test_momentum_map_examples(zero3, ghz3, bell):
    assert all(np.allclose(r, np.diag([1, 0])) for r in st.momentum_map(zero3))
    assert all(np.allclose(r, np.eye(2) / 2) for r in st.momentum_map(ghz3))
    assert len(st.momentum_map(bell)) == 2


@settings(max_examples=25, deadline=None)
@given(seed=hst.integers(0, 2**32 - 1), dims=hst.sampled_from([(2, 2), (2, 3), (3, 2, 2), (2, 2, 2, 2)]))
def test_partial_trace_matches_contraction(seed, dims):
    s = st.random_state(dims, np.random.default_rng(seed))
    for k in range(len(dims)):
        rho = st.partial_trace(s, k)
        assert np.allclose(rho, _contract(s.amplitudes, dims, k), atol=1e-13)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(rho - rho.conj().T)) <= 1e-12
        assert np.min(np.linalg.eigvalsh(rho)) >= -1e-12


def test_schmidt_examples(bell):
    assert np.allclose(st.schmidt(st.basis_state((0, 0), (2, 2))).coefficients, [1, 0])
    assert np.allclose(st.schmidt(bell).coefficients, [0.5, 0.5])
    s = st.MultipartiteState(np.sqrt([0.8, 0, 0, 0.2]), (2, 2))
    assert np.allclose(st.schmidt(s).coefficients, [0.8, 0.2])
    with pytest.raises(ValueError):
        st.schmidt(st.ghz(3))


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (4, 3)])
def test_schmidt_properties(dims, rng):
    s = st.random_state(dims, rng)
    dec = st.schmidt(s)
    p = dec.coefficients
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(p) <= 0)
    assert st.projective_equal(st.MultipartiteState(dec.reconstruct(), dims), s)
    for k in range(2):
        ev = np.sort(np.linalg.eigvalsh(st.partial_trace(s, k)))[::-1][: p.size]
        assert np.allclose(ev, p, atol=1e-10)


def test_named_constructors():
    assert st.projective_equal(st.make_named("ghz", 2, 2),
                               st.MultipartiteState(np.array([1, 0, 0, 1]), (2, 2)))
    w = np.zeros(8)
    w[[1, 2, 4]] = 1
    assert st.projective_equal(st.make_named("w", 3), st.MultipartiteState(w, (2, 2, 2)))
    e = np.zeros(9)
    e[[0, 4]] = 1
    s = st.make_named("schmidt_state", 0.5, 0.5, 0, d=3)
    assert s.dims == (3, 3) and st.projective_equal(s, st.MultipartiteState(e, (3, 3)))
    assert st.dicke(4, 2).amplitudes[np.nonzero(st.dicke(4, 2).amplitudes)].size == 6
    with pytest.raises(ValueError):
        st.dicke(3, 4)
    with pytest.raises(ValueError):
        st.schmidt_state(0.5, 0.6)


def test_product_state_is_outer_product(rng):
    a = rng.normal(size=2) + 1j * rng.normal(size=2)
    b = rng.normal(size=3) + 1j * rng.normal(size=3)
    s = st.product(a, b)
    ref = np.kron(a, b) / np.linalg.norm(np.kron(a, b))
    assert abs(abs(np.vdot(ref, s.amplitudes)) - 1) <= 1e-12


def test_projective_equal_examples(bell, rng):
    phased = st.MultipartiteState(np.exp(0.7j) * bell.amplitudes, bell.dims)
    assert st.projective_equal(bell, phased)
    assert np.allclose(bell.amplitudes, phased.amplitudes, atol=1e-15)
    assert not st.projective_equal(st.basis_state((0, 0), (2, 2)), st.basis_state((1, 1), (2, 2)))
    noisy = bell.amplitudes + 1e-14 * rng.normal(size=4)
    assert st.projective_equal(bell, st.MultipartiteState(noisy, (2, 2)), tol=1e-10)
    with pytest.raises(ValueError):
        st.projective_equal(bell, st.ghz(3))


def test_apply_local_unitary_examples(bell):
    assert st.projective_equal(st.apply_local_unitary(bell, [np.eye(2), np.eye(2)]), bell)
    assert st.projective_equal(st.apply_local_unitary(bell, [X, X]), bell)
    out = st.apply_local_unitary(st.basis_state((0, 0), (2, 2)), [HADAMARD, np.eye(2)])
    assert np.allclose(out.amplitudes, [1 / np.sqrt(2), 0, 1 / np.sqrt(2), 0])
    with pytest.raises(ValueError):
        st.apply_local_unitary(bell, [2 * np.eye(2), np.eye(2)])


def test_apply_local_unitary_matches_kron(rng):
    s = st.random_state((2, 3, 2), rng)
    Us = st.random_local_unitaries(s.dims, rng)
    full = np.kron(np.kron(Us[0], Us[1]), Us[2])
    ref = st.MultipartiteState(full @ s.amplitudes, s.dims)
    assert st.projective_equal(st.apply_local_unitary(s, Us), ref, tol=1e-12)


@pytest.mark.parametrize("dims", [(2, 2), (3, 2), (2, 2, 2)])
def test_momentum_map_equivariance(dims, rng):
    s = st.random_state(dims, rng)
    Us = st.random_local_unitaries(dims, rng)
    moved = st.momentum_map(st.apply_local_unitary(s, Us))
    for U, rho, rho_moved in zip(Us, st.momentum_map(s), moved):
        assert np.allclose(U @ rho @ U.conj().T, rho_moved, atol=1e-10)


def test_random_unitary_is_unitary(rng):
    assert nk.is_unitary(nk.random_unitary(5, rng))
