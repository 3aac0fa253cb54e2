"""Ordered local spectra and point clouds of the Kirwan polytope.

Spectra are sorted nonincreasingly.  Consumers comparing against
nondecreasing conventions must re-sort.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import numkit
from .states import MultipartiteState, momentum_map, random_state

DEFAULT_GROUP_TOL = 1e-8


def group_multiplicities(values: Sequence[float], tol: float = DEFAULT_GROUP_TOL) -> list[int]:
    """Multiplicities of (near-)equal values by single-link chaining.

    Values are sorted nonincreasingly; neighbours closer than
    ``tol * max|values|`` fall into one group.
    """
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    if v.size == 0:
        return []
    gap = tol * max(float(np.max(np.abs(v))), np.finfo(float).tiny)
    groups = [1]
    for a, b in zip(v[:-1], v[1:]):
        if a - b <= gap:
            groups[-1] += 1
        else:
            groups.append(1)
    return groups


def spectrum(rho) -> np.ndarray:
    """Nonincreasing eigenvalues of a density matrix, clipped to [0, 1]."""
    w, _ = numkit.herm_eig(rho, tol=1e-10)
    return np.clip(w[::-1], 0.0, 1.0)


@dataclass(frozen=True)
class SpectraPoint:
    spectra: tuple
    multiplicities: tuple
    group_tol: float

    @property
    def truncated(self) -> tuple:
        """First ``d_k - 1`` entries per subsystem (the last follows from unit trace)."""
        return tuple(s[:-1] for s in self.spectra)

    def coordinates(self) -> np.ndarray:
        return np.concatenate(self.truncated)


def psi_map(state: MultipartiteState, group_tol: float = DEFAULT_GROUP_TOL) -> SpectraPoint:
    spectra = tuple(spectrum(rho) for rho in momentum_map(state))
    mults = tuple(tuple(group_multiplicities(s, group_tol)) for s in spectra)
    return SpectraPoint(spectra, mults, group_tol)


def sample_polytope(n_parties: int, d: int, n_samples: int, seed: int) -> list[SpectraPoint]:
    """Images of ``n_samples`` Haar-random states; deterministic for a fixed seed."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    dims = (d,) * n_parties
    return [psi_map(random_state(dims, rng)) for _ in range(n_samples)]


def polytope_rows(points: Sequence[SpectraPoint]) -> tuple[list[str], list[list]]:
    """Rows of the point-cloud table: one per (sample, subsystem), 1-based labels."""
    width = max(len(s) for p in points for s in p.truncated)
    header = ["sample", "k"] + [f"lambda_{i}" for i in range(1, width + 1)]
    rows = []
    for n, p in enumerate(points, start=1):
        for k, s in enumerate(p.truncated, start=1):
            rows.append([n, k] + [float(x) for x in s])
    return header, rows


def write_polytope_csv(points: Sequence[SpectraPoint], fh) -> None:
    header, rows = polytope_rows(points)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def polytope_csv(points: Sequence[SpectraPoint]) -> str:
    buf = io.StringIO()
    write_polytope_csv(points, buf)
    return buf.getvalue()
