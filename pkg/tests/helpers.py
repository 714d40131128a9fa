"""Independent oracles for cross-checking library results.

Everything here is built from numpy.linalg and explicit index loops,
deliberately avoiding the library's own decompositions and samplers so
the two routes stay independent.
"""

import numpy as np


def np_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def kron_loops(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product straight from the index definition."""
    na, nb = a.shape[0], b.shape[0]
    out = np.zeros((na * nb, na * nb), dtype=complex)
    for i in range(na):
        for j in range(na):
            for k in range(nb):
                for l in range(nb):
                    out[i * nb + k, j * nb + l] = a[i, j] * b[k, l]
    return out


def ptrace_env_loops(x: np.ndarray, d_s: int, d_e: int) -> np.ndarray:
    """Partial trace over the environment from the index definition."""
    out = np.zeros((d_s, d_s), dtype=complex)
    for i in range(d_s):
        for j in range(d_s):
            for k in range(d_e):
                out[i, j] += x[i * d_e + k, j * d_e + k]
    return out


def random_hermitian_np(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (g + g.conj().T)


def random_density_np(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def haar_np(rng: np.random.Generator, d: int) -> np.ndarray:
    """Independent Haar sampler: numpy QR with phase correction."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q / phases


def discord_oracle(rho: np.ndarray, d_s: int, d_e: int) -> float:
    """Hilbert-Schmidt discord via numpy.linalg.eigh and explicit sums."""
    rho_s = ptrace_env_loops(rho, d_s, d_e)
    _, vecs = np.linalg.eigh(rho_s)
    deph = np.zeros_like(rho)
    for mu in range(d_s):
        proj = np.outer(vecs[:, mu], vecs[:, mu].conj())
        big = kron_loops(proj, np.eye(d_e, dtype=complex))
        deph += big @ rho @ big
    diff = rho - deph
    return float(np.sqrt(np.trace(diff.conj().T @ diff).real))


def hs_norm_np(a: np.ndarray) -> float:
    return float(np.sqrt(np.trace(a.conj().T @ a).real))
