"""State families and oracles shared by several test modules."""
import numpy as np

from sympent import states as st


def is_product(state, tol=1e-10):
    """Independent oracle: a pure state is a product iff every marginal is pure."""
    return all(abs(np.trace(r @ r).real - 1) <= tol for r in st.momentum_map(state))


def engineered_weights(d, rng):
    """Schmidt weights with repeated levels and zeros drawn at random."""
    n_levels = int(rng.integers(1, d + 1))
    levels = rng.uniform(0.1, 1.0, size=n_levels)
    counts = rng.multinomial(d - n_levels, np.ones(n_levels) / n_levels) + 1
    w = np.repeat(levels, counts)[:d]
    n_zero = int(rng.integers(0, d))
    w[:n_zero] = 0.0
    rng.shuffle(w)
    return w / w.sum()


def schmidt_family(weights, d, rng):
    """Random local rotation of sum_i sqrt(p_i)|ii>."""
    s = st.schmidt_state(*weights, d=d)
    return st.apply_local_unitary(s, st.random_local_unitaries(s.dims, rng))
