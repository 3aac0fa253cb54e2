"""Symplectic entanglement indicator for multipartite pure states.

``E(psi)`` is the degeneracy of the Fubini-Study form restricted to the
states whose one-body reduced density matrices share the spectra of
``psi``.  It vanishes exactly for product states and equals
``dim O_psi - dim O_mu(psi)``, the difference between the local-unitary
orbit of the state and the adjoint orbit of its reduced density matrices.
"""
from .entanglement import EntanglementReport, analyze, e_bipartite, e_gram, e_theorem
from .localalg import LocalHamiltonian, embed_full, su_basis, tangent_vector
from .orbitgeom import OrbitGeometry, degeneracy_direct, null_basis, orbit_dims, orbit_gram
from .spectramap import psi_map, sample_polytope
from .statexpr import evaluate, parse
from .states import (
    MultipartiteState,
    apply_local_unitary,
    make_named,
    momentum_map,
    partial_trace,
    projective_equal,
    schmidt,
)

__all__ = [
    "EntanglementReport", "LocalHamiltonian", "MultipartiteState", "OrbitGeometry",
    "analyze", "apply_local_unitary", "degeneracy_direct", "e_bipartite", "e_gram",
    "e_theorem", "embed_full", "evaluate", "make_named", "momentum_map", "null_basis",
    "orbit_dims", "orbit_gram", "parse", "partial_trace", "projective_equal", "psi_map",
    "sample_polytope", "schmidt", "su_basis", "tangent_vector",
]
__version__ = "0.1.0"
