"""The entanglement indicator E by three independent routes.

* orbit dimensions: ``dim O_psi - dim O_mu(psi)`` from two stabilizer kernels;
* Gram degeneracy: ``dim O_psi - rank`` of the Fubini-Study form on the orbit;
* direct: degeneracy of the form on ``T O_psi + ker d mu``.

For bipartite states the Schmidt multiplicities give a closed form as well.
A state is called separable exactly when E = 0.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .orbitgeom import InconsistencyError, OrbitDims, OrbitGeometry
from .spectramap import DEFAULT_GROUP_TOL, group_multiplicities
from .states import MultipartiteState, schmidt

log = logging.getLogger(__name__)

ZERO_WEIGHT_TOL = 1e-10


class RouteDisagreementError(InconsistencyError):
    pass


@dataclass(frozen=True)
class EntanglementReport:
    e_theorem: int
    e_gram: int
    e_direct: int
    orbit_dims: OrbitDims
    gram_rank: int
    separable: bool
    rank_stable: bool
    e_bipartite: int | None = None
    schmidt_coefficients: tuple | None = None
    schmidt_multiplicities: tuple | None = None
    warnings: tuple = field(default=())

    @property
    def routes_agree(self) -> bool:
        vals = {self.e_theorem, self.e_gram, self.e_direct}
        if self.e_bipartite is not None:
            vals.add(self.e_bipartite)
        return len(vals) == 1


def e_theorem(state: MultipartiteState, rank_tol: float | None = None) -> int:
    return OrbitGeometry(state, rank_tol).dims_report.difference


def e_gram(state: MultipartiteState, rank_tol: float | None = None) -> int:
    geo = OrbitGeometry(state, rank_tol)
    return geo.dims_report.dim_orbit - geo.gram_rank


def e_direct(state: MultipartiteState, rank_tol: float | None = None) -> int:
    return OrbitGeometry(state, rank_tol).e_direct


def schmidt_multiplicities(weights: Sequence[float], group_tol: float = DEFAULT_GROUP_TOL) -> list[int]:
    p = np.asarray(weights, dtype=float)
    if np.any(p < -ZERO_WEIGHT_TOL) or abs(p.sum() - 1.0) > 1e-8:
        raise ValueError("Schmidt weights must be nonnegative and sum to 1")
    nonzero = p[p > ZERO_WEIGHT_TOL]
    if nonzero.size == 0:
        raise ValueError("no nonzero Schmidt weights")
    return group_multiplicities(nonzero, group_tol)


def e_bipartite(weights: Sequence[float], group_tol: float = DEFAULT_GROUP_TOL) -> int:
    """``sum_i m_i**2 - 1`` over multiplicities of the distinct nonzero weights."""
    return sum(m * m for m in schmidt_multiplicities(weights, group_tol)) - 1


def analyze(state: MultipartiteState, rank_tol: float | None = None,
            group_tol: float = DEFAULT_GROUP_TOL) -> EntanglementReport:
    """Compute every route and cross-check them.

    Raises :class:`RouteDisagreementError` if the routes differ while all
    ranks involved are stable.  Unstable disagreements are reported with a
    warning instead.
    """
    geo = OrbitGeometry(state, rank_tol, group_tol)
    dims = geo.dims_report
    e_thm = dims.difference
    e_gr = dims.dim_orbit - geo.gram_rank
    e_dir = geo.e_direct
    geo.null_basis  # noqa: B018 -- raises if the null-basis count disagrees

    coeffs = mults = e_bip = None
    if state.n_parties == 2:
        coeffs = schmidt(state).coefficients
        mults = schmidt_multiplicities(coeffs, group_tol)
        e_bip = sum(m * m for m in mults) - 1

    warnings = [f"rank-unstable: {name}" for name in geo.unstable_ranks()]
    stable = not warnings
    values = {"e_theorem": e_thm, "e_gram": e_gr, "e_direct": e_dir}
    if e_bip is not None:
        values["e_bipartite"] = e_bip
    if len(set(values.values())) > 1:
        msg = "routes disagree: " + ", ".join(f"{k}={v}" for k, v in values.items())
        if stable:
            raise RouteDisagreementError(msg, {"values": values, "orbit_dims": dims,
                                               "gram_rank": geo.gram_rank})
        warnings.append(msg)
        log.warning("%s (ranks unstable)", msg)

    return EntanglementReport(
        e_theorem=e_thm,
        e_gram=e_gr,
        e_direct=e_dir,
        orbit_dims=dims,
        gram_rank=geo.gram_rank,
        separable=e_thm == 0,
        rank_stable=stable,
        e_bipartite=e_bip,
        schmidt_coefficients=None if coeffs is None else tuple(float(c) for c in coeffs),
        schmidt_multiplicities=None if mults is None else tuple(mults),
        warnings=tuple(warnings),
    )
