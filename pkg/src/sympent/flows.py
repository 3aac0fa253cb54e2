"""Schrodinger flows as Hamiltonian flows, and their null-direction ambiguity."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from . import numkit
from .localalg import LocalHamiltonian, as_operator, embed_full
from .orbitgeom import OrbitGeometry
from .spectramap import spectrum
from .states import MultipartiteState, momentum_map

log = logging.getLogger(__name__)

ADMISSIBLE_TOL = 1e-9


def classical_hamiltonian(state: MultipartiteState, H) -> float:
    """``<psi|H|psi>`` for a LocalHamiltonian or a full Hermitian matrix."""
    Hh = as_operator(H, state.dims)
    psi = state.amplitudes
    return float(np.vdot(psi, Hh @ psi).real)


def local_energy(state: MultipartiteState, H: LocalHamiltonian) -> float:
    """``sum_k Tr(rho_k H_k)``; equals :func:`classical_hamiltonian` for local ``H``."""
    if H.dims != state.dims:
        raise ValueError(f"Hamiltonian dims {H.dims} do not match state dims {state.dims}")
    return float(sum(np.trace(rho @ Hk).real for rho, Hk in zip(momentum_map(state), H.factors)))


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    norm_dev: np.ndarray
    energy: np.ndarray
    spectra: np.ndarray
    fidelity: np.ndarray | None = None
    null_ranks: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.states)

    def columns(self) -> list[str]:
        cols = ["t", "norm_dev", "energy", "fidelity"]
        dims = self.states[0].dims
        cols += [f"spec_{k}_{i}" for k, d in enumerate(dims, start=1) for i in range(1, d + 1)]
        return cols

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(self.columns())
        fid = self.fidelity if self.fidelity is not None else np.full(len(self), np.nan)
        for j in range(len(self)):
            row = [self.times[j], self.norm_dev[j], self.energy[j], fid[j], *self.spectra[j]]
            writer.writerow([repr(float(x)) for x in row])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _spectra_row(state: MultipartiteState) -> np.ndarray:
    return np.concatenate([spectrum(rho) for rho in momentum_map(state)])


def _record(raw: np.ndarray, dims, Hh: np.ndarray):
    norm_dev = abs(np.linalg.norm(raw) - 1.0)
    st = MultipartiteState(raw, dims)
    energy = float(np.vdot(st.amplitudes, Hh @ st.amplitudes).real)
    return st, norm_dev, energy


def _time_grid(T: float, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one step")
    if not T > 0:
        raise ValueError("duration must be positive")
    return np.arange(n + 1) * (T / n)


def flow(state0: MultipartiteState, H, T: float, n: int) -> Trajectory:
    """Samples ``exp(-i H t_j) psi_0`` at ``t_j = j T / n``, ``j = 0..n``.

    One eigendecomposition of ``H`` serves every sample, so each state is an
    exact unitary image of the initial one.
    """
    times = _time_grid(T, n)
    Hh = as_operator(H, state0.dims)
    w, V = numkit.herm_eig(Hh)
    c0 = V.conj().T @ state0.amplitudes
    states, norm_dev, energy, spectra = [], [], [], []
    for t in times:
        raw = V @ (np.exp(-1j * w * t) * c0)
        st, nd, en = _record(raw, state0.dims, Hh)
        states.append(st)
        norm_dev.append(nd)
        energy.append(en)
        spectra.append(_spectra_row(st))
    return Trajectory(times, states, np.array(norm_dev), np.array(energy), np.array(spectra))


def admissibility_check(state: MultipartiteState, H, tol: float = ADMISSIBLE_TOL,
                        rank_tol: float | None = None) -> tuple[bool, float]:
    """Evaluate ``dH(v) = 2 Re <v|H|psi>`` on unit null directions ``v``.

    Returns ``(admissible, max_violation)``.  With no null directions the
    check passes vacuously.
    """
    Hh = as_operator(H, state.dims)
    nb = OrbitGeometry(state, rank_tol).null_basis
    if nb.count == 0:
        return True, 0.0
    V = nb.tangents / np.linalg.norm(nb.tangents, axis=0)
    dH = 2.0 * (V.conj().T @ (Hh @ state.amplitudes)).real
    worst = float(np.max(np.abs(dH)))
    return worst <= tol, worst


def _oriented(F: LocalHamiltonian, prev: LocalHamiltonian | None) -> LocalHamiltonian:
    # keep the sign of the generator continuous from step to step
    if prev is not None and F.dims == prev.dims:
        if float(np.dot(F.coefficients(), prev.coefficients())) < 0:
            return -F
    return F


def null_perturbed_flow(state0: MultipartiteState, H: LocalHamiltonian, eps: float, T: float, n: int,
                        rank_tol: float | None = None) -> tuple[Trajectory, Trajectory]:
    """Reference flow of ``H`` and a flow perturbed along null directions.

    At every step the first generator of the current null basis ``F`` is
    frozen and the state advances by ``exp(-i (H + eps F) dt)``.  Until a
    perturbation is actually applied the perturbed trajectory is the
    reference one, so separable starts and ``eps = 0`` coincide exactly.

    Returns ``(perturbed, reference)``; both carry fidelities to the reference.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    reference = flow(state0, H, T, n)
    dims = state0.dims
    Hh = embed_full(H, dims)
    dt = T / n
    step_H = numkit.expm_i_herm(Hh, dt)

    states = [reference.states[0]]
    norm_dev = [reference.norm_dev[0]]
    energy = [reference.energy[0]]
    spectra = [reference.spectra[0]]
    null_ranks = []
    diverged = False
    prev_F = None
    current = state0
    for j in range(1, n + 1):
        F = None
        if eps > 0:
            nb = OrbitGeometry(current, rank_tol).null_basis
            if null_ranks and nb.count != null_ranks[-1]:
                log.info("null rank changed from %d to %d at step %d", null_ranks[-1], nb.count, j)
            null_ranks.append(nb.count)
            if nb.count:
                F = _oriented(nb.generators[0], prev_F)
                prev_F = F
        else:
            null_ranks.append(0)

        if F is None and not diverged:
            st = reference.states[j]
            states.append(st)
            norm_dev.append(reference.norm_dev[j])
            energy.append(reference.energy[j])
            spectra.append(reference.spectra[j])
            current = st
            continue

        diverged = True
        U = step_H if F is None else numkit.expm_i_herm(Hh + eps * embed_full(F, dims), dt)
        st, nd, en = _record(U @ current.amplitudes, dims, Hh)
        states.append(st)
        norm_dev.append(nd)
        energy.append(en)
        spectra.append(_spectra_row(st))
        current = st

    ref_fid = np.array([abs(np.vdot(s.amplitudes, s.amplitudes)) for s in reference.states])
    reference.fidelity = ref_fid
    fid = np.array([
        ref_fid[j] if states[j] is reference.states[j]
        else abs(np.vdot(reference.states[j].amplitudes, states[j].amplitudes))
        for j in range(n + 1)
    ])
    perturbed = Trajectory(reference.times.copy(), states, np.array(norm_dev), np.array(energy),
                           np.array(spectra), fid, null_ranks)
    return perturbed, reference


def spectra_drift(a: Trajectory, b: Trajectory) -> float:
    """Largest difference of sorted local spectra between two trajectories."""
    return float(np.max(np.abs(a.spectra - b.spectra)))
