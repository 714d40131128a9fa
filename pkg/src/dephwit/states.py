"""Bipartite density matrices and pure-state structure.

Construction from pure vectors and probability tables, Schmidt
decomposition (via the Gram matrix of the reshaped amplitude matrix),
purity, the generalized concurrence, and random-state generators drawn
from the Hilbert-Schmidt ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import as_square, dagger, eig_hermitian, hs_norm_sq, partial_trace_env
from .randmat import RngHandle, haar_unitary

STATE_TOL = 1e-10
# Gram-matrix eigenvalues carry an absolute noise floor near machine
# epsilon, so coefficients (their square roots) below ~1e-8 are pure
# noise; the cutoff sits above that to keep reconstruction at 1e-10.
SCHMIDT_TRUNCATION = 1e-7


@dataclass(frozen=True)
class BipartiteState:
    """Density operator on a system (d_s) times environment (d_e) space.

    Validated on construction: Hermitian, unit trace, and positive
    semidefinite within ``STATE_TOL``.
    """

    d_s: int
    d_e: int
    rho: np.ndarray

    def __post_init__(self) -> None:
        if self.d_s < 1 or self.d_e < 1:
            raise ValueError("dimensions must be at least 1")
        rho = as_square(self.rho, "rho")
        if rho.ndim != 2 or rho.shape[0] != self.d_s * self.d_e:
            raise ValueError(
                f"rho must be {self.d_s * self.d_e} x {self.d_s * self.d_e}, got {rho.shape}"
            )
        if not linalg.is_hermitian(rho, STATE_TOL):
            raise ValueError("rho is not Hermitian within tolerance")
        if abs(complex(np.trace(rho)) - 1.0) > STATE_TOL:
            raise ValueError("rho does not have unit trace")
        lowest = eig_hermitian(rho).eigenvalues[0]
        if lowest < -STATE_TOL:
            raise ValueError(f"rho is not positive semidefinite (min eigenvalue {lowest})")
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.d_s * self.d_e

    def marginal_system(self) -> np.ndarray:
        return partial_trace_env(self.rho, self.d_s, self.d_e)

    def marginal_env(self) -> np.ndarray:
        return linalg.partial_trace_sys(self.rho, self.d_s, self.d_e)


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Biorthogonal expansion of a bipartite pure vector.

    ``coefficients`` are nonnegative and descending with squares summing
    to one; the two vector families are orthonormal columns. Coefficients
    below ``SCHMIDT_TRUNCATION`` are dropped, so the rank can be smaller
    than d_s.
    """

    coefficients: np.ndarray
    system_vectors: np.ndarray
    environment_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.coefficients.size)

    def reconstruct(self) -> np.ndarray:
        cols = [
            lam * np.kron(self.system_vectors[:, i], self.environment_vectors[:, i])
            for i, lam in enumerate(self.coefficients)
        ]
        return np.sum(cols, axis=0)


def _as_state_vector(psi, d_s: int, d_e: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != d_s * d_e:
        raise ValueError(f"vector length {psi.size} does not match d_s*d_e = {d_s * d_e}")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > STATE_TOL:
        raise ValueError(f"state vector is not normalized (norm {norm})")
    return psi


def from_pure(psi, d_s: int, d_e: int) -> BipartiteState:
    """Rank-one density operator |psi><psi| of a normalized vector."""
    psi = _as_state_vector(psi, d_s, d_e)
    return BipartiteState(d_s, d_e, np.outer(psi, psi.conj()))


def schmidt(psi, d_s: int, d_e: int) -> SchmidtDecomposition:
    """Schmidt decomposition of a normalized bipartite vector.

    The amplitude matrix C (d_s by d_e) is diagonalized through the
    Hermitian Gram matrix C C^dagger; environment vectors follow by
    applying the adjoint amplitude matrix and normalizing.
    """
    psi = _as_state_vector(psi, d_s, d_e)
    c = psi.reshape(d_s, d_e)
    gram = c @ dagger(c)
    eig = eig_hermitian(gram)
    lams = np.sqrt(np.clip(eig.eigenvalues[::-1], 0.0, None))
    vecs = eig.eigenvectors[:, ::-1]
    keep = lams > SCHMIDT_TRUNCATION
    lams = lams[keep]
    sys_vecs = vecs[:, keep]
    env_vecs = np.empty((d_e, lams.size), dtype=complex)
    for i in range(lams.size):
        chi = (dagger(c) @ sys_vecs[:, i]).conj()
        env_vecs[:, i] = chi / np.linalg.norm(chi)
    return SchmidtDecomposition(lams, sys_vecs, env_vecs)


def purity(state: BipartiteState) -> float:
    """Tr(rho^2), between 1/(d_s*d_e) for maximally mixed and 1 for pure."""
    return float(hs_norm_sq(state.rho))


def concurrence_pure(psi, d_s: int, d_e: int) -> float:
    """Generalized concurrence sqrt(2 (1 - sum lambda_i^4)) of a pure state.

    Vanishes exactly for product states.
    """
    lams = schmidt(psi, d_s, d_e).coefficients
    return float(np.sqrt(max(2.0 * (1.0 - np.sum(lams**4)), 0.0)))


def classical_state(
    p, system_basis=None, env_basis=None, *, tol: float = STATE_TOL
) -> BipartiteState:
    """Classically correlated state sum_ij p_ij |a_i><a_i| x |b_j><b_j|.

    ``p`` is a d_s by d_e table of probabilities; the bases are matrices
    of orthonormal columns (identity when omitted). When the system
    marginal is nondegenerate the output is an exact fixed point of the
    local dephasing map.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 2:
        raise ValueError("probability table must be 2-dimensional")
    if np.any(p < -tol):
        raise ValueError("probability table has negative entries")
    if abs(float(p.sum()) - 1.0) > tol:
        raise ValueError(f"probability table sums to {p.sum()}, expected 1")
    d_s, d_e = p.shape
    a = np.eye(d_s, dtype=complex) if system_basis is None else as_square(system_basis)
    b = np.eye(d_e, dtype=complex) if env_basis is None else as_square(env_basis)
    linalg.require_unitary(a, "system_basis")
    linalg.require_unitary(b, "env_basis")
    rho = np.zeros((d_s * d_e, d_s * d_e), dtype=complex)
    for i in range(d_s):
        pa = np.outer(a[:, i], a[:, i].conj())
        for j in range(d_e):
            if p[i, j] == 0.0:
                continue
            pb = np.outer(b[:, j], b[:, j].conj())
            rho += p[i, j] * np.kron(pa, pb)
    return BipartiteState(d_s, d_e, rho)


def random_pure(d_s: int, d_e: int, rng: RngHandle) -> np.ndarray:
    """Haar-distributed unit vector (first column of a Haar unitary)."""
    return haar_unitary(d_s * d_e, rng)[:, 0]


def random_mixed(d_s: int, d_e: int, rank: int, rng: RngHandle) -> BipartiteState:
    """Hilbert-Schmidt-ensemble mixed state of the given rank.

    Normalized G G^dagger with G a (d_s*d_e) by rank complex Gaussian
    matrix; rank 1 reproduces a Haar-like pure state.
    """
    d = d_s * d_e
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in [1, {d}], got {rank}")
    g = rng.normals((d, rank)) + 1j * rng.normals((d, rank))
    rho = g @ dagger(g)
    rho /= np.trace(rho).real
    rho = 0.5 * (rho + dagger(rho))
    return BipartiteState(d_s, d_e, rho)
