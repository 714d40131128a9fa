"""Local dephasing and the Hilbert-Schmidt discord measure.

The dephasing map projects system operators onto the eigenbasis of the
reduced system state; applied to one side of a bipartite state it leaves
both marginals invariant but generally changes the total state. The
residual Hilbert-Schmidt distance is the discord measure: zero exactly
for classically correlated states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DEGENERACY_GAP, as_square, eig_hermitian, hs_norm, tensor
from .states import BipartiteState, purity

CLASSICALITY_TOL = 1e-8
BASIS_TOL = 1e-10


@dataclass(frozen=True)
class DephasingBasis:
    """Complete set of rank-one projectors from a marginal eigenbasis.

    ``projectors`` is a stack of d_s Hermitian rank-one matrices summing
    to the identity, ordered by ascending marginal eigenvalue.
    ``degenerate`` flags spectra with any gap below the eigensolver's
    degeneracy threshold; the basis is then a convention (the
    deterministic tie-broken one), not a property of the state alone.
    """

    projectors: np.ndarray
    source_eigenvalues: np.ndarray
    degenerate: bool

    def __post_init__(self) -> None:
        proj = np.asarray(self.projectors, dtype=complex)
        if proj.ndim != 3 or proj.shape[1] != proj.shape[2] or proj.shape[0] != proj.shape[1]:
            raise ValueError(f"expected a stack of d square d x d projectors, got {proj.shape}")
        d = proj.shape[1]
        eye = np.eye(d)
        if np.abs(proj.sum(axis=0) - eye).max() > BASIS_TOL:
            raise ValueError("projectors do not sum to the identity")
        for mu in range(d):
            pm = proj[mu]
            if np.abs(pm - pm.conj().T).max() > BASIS_TOL:
                raise ValueError("projectors must be Hermitian")
            if np.abs(pm @ pm - pm).max() > BASIS_TOL:
                raise ValueError("projectors must be idempotent")
            if abs(np.trace(pm).real - 1.0) > BASIS_TOL:
                raise ValueError("projectors must have unit trace (rank one)")
        for mu in range(d):
            for nu in range(mu + 1, d):
                if np.abs(proj[mu] @ proj[nu]).max() > BASIS_TOL:
                    raise ValueError("projectors must be mutually orthogonal")
        object.__setattr__(self, "projectors", proj)
        object.__setattr__(
            self, "source_eigenvalues", np.asarray(self.source_eigenvalues, dtype=float)
        )

    @property
    def dim(self) -> int:
        return self.projectors.shape[1]


def eigenbasis_of_marginal(state: BipartiteState) -> DephasingBasis:
    """Dephasing basis from the eigenvectors of the reduced system state."""
    eig = eig_hermitian(state.marginal_system())
    vecs = eig.eigenvectors
    proj = np.einsum("im,jm->mij", vecs, vecs.conj())
    gaps = np.diff(eig.eigenvalues)
    degenerate = bool(gaps.size and gaps.min() < DEGENERACY_GAP)
    return DephasingBasis(proj, eig.eigenvalues, degenerate)


def dephase_local(a, basis: DephasingBasis) -> np.ndarray:
    """Apply the dephasing map to a system operator: sum_mu pi_mu A pi_mu."""
    a = as_square(a, "a")
    if a.shape != (basis.dim, basis.dim):
        raise ValueError(f"operator shape {a.shape} does not match basis dimension {basis.dim}")
    p = basis.projectors
    return np.einsum("mij,jk,mkl->il", p, a, p)


def dephase_total(state: BipartiteState, basis: DephasingBasis | None = None) -> BipartiteState:
    """Dephase the system side of a total state: sum_mu Pi_mu rho Pi_mu.

    Both marginals are invariant; the purity never increases. With no
    basis given, the marginal eigenbasis of ``state`` is used.
    """
    if basis is None:
        basis = eigenbasis_of_marginal(state)
    if basis.dim != state.d_s:
        raise ValueError(f"basis dimension {basis.dim} does not match d_s = {state.d_s}")
    eye_env = np.eye(state.d_e, dtype=complex)
    out = np.zeros_like(state.rho)
    for pm in basis.projectors:
        big = tensor(pm, eye_env)
        out += big @ state.rho @ big
    out = 0.5 * (out + out.conj().T)
    return BipartiteState(state.d_s, state.d_e, out)


def discord_delta(state: BipartiteState) -> float:
    """Hilbert-Schmidt distance between a state and its dephased image.

    Nonnegative, and zero exactly when the state carries only classical
    correlations. Equals sqrt(purity(rho) - purity(rho')) by the purity
    identity; the direct norm is returned and the identity is asserted in
    debug mode.
    """
    deph = dephase_total(state)
    direct = float(hs_norm(state.rho - deph.rho))
    if __debug__:
        drop = purity(state) - purity(deph)
        assert abs(direct**2 - drop) <= 1e-10 * max(1.0, purity(state)), (
            f"purity identity violated: delta^2 = {direct**2}, purity drop = {drop}"
        )
    return direct


def is_classical(state: BipartiteState, tol: float = CLASSICALITY_TOL) -> bool:
    """True when the state is invariant under local dephasing within tol."""
    return discord_delta(state) <= tol
