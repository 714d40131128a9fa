"""Local-detection witness and Haar-average machinery.

The witness compares the reduced evolution of a state against that of
its locally dephased image. This module provides the single-unitary
witness distance, Monte Carlo Haar averages of its square with the exact
closed form they must reproduce, structured-evolution averages, the
twirling channel with its analytic constants and Choi-matrix
cross-check, and the trace-distance diagnostic.

Monte Carlo sampling is chunked: samples are split into fixed-size
blocks, each drawn from its own derived RNG substream, and per-block
partial sums are reduced in block order. Results are therefore
bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import (
    as_square,
    dagger,
    eig_hermitian,
    hs_norm,
    partial_trace_env,
    require_hermitian,
    require_unitary,
)
from .randmat import RngHandle, SpectrumEnsemble, StructuredEvolution, haar_unitary, sample_spectrum
from .states import BipartiteState

MC_CHUNK = 512


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo sample mean with its standard error."""

    mean: float
    std_error: float
    n_samples: int

    def __post_init__(self) -> None:
        if self.n_samples < 2:
            raise ValueError("Monte Carlo estimates need at least 2 samples")

    def rms(self) -> tuple[float, float]:
        """Root of the mean with the propagated standard error.

        The estimators target squared norms, for which the closed forms
        are exact; the root is the reported observable. Error propagation
        std_error / (2 rms) degenerates at rms = 0, where the root of the
        error is returned as a conservative scale.
        """
        root = math.sqrt(max(self.mean, 0.0))
        if root > 0.0:
            return root, self.std_error / (2.0 * root)
        return 0.0, math.sqrt(max(self.std_error, 0.0))

    def z_score(self, reference: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.mean == reference else math.inf
        return (self.mean - reference) / self.std_error


@dataclass(frozen=True)
class TwirlConstants:
    """Coefficients of the twirled channel a Tr(X) I + b X.

    Real for Hermitian operator pairs; complex in general.
    """

    a: complex
    b: complex


@dataclass(frozen=True)
class ChoiCheckResult:
    """Residual of the Monte Carlo Choi matrix against the isotropic form."""

    residual: float
    mc_error: float
    constants: TwirlConstants
    n_samples: int


@dataclass(frozen=True)
class WitnessResult:
    """Witness trajectory along a time grid, with diagnostics."""

    time_grid: np.ndarray
    hs_distance: np.ndarray
    trace_distance: np.ndarray | None
    metadata: dict


# ---------------------------------------------------------------------------
# chunked Monte Carlo driver


def _chunk_counts(n_samples: int) -> list[int]:
    full, rest = divmod(n_samples, MC_CHUNK)
    return [MC_CHUNK] * full + ([rest] if rest else [])


def _run_chunks(worker_fn, n_chunks: int, workers: int) -> list:
    if workers <= 1 or n_chunks <= 1:
        return [worker_fn(k) for k in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker_fn, range(n_chunks)))


def _mc_scalar(sample_fn, n_samples: int, rng: RngHandle, workers: int) -> McEstimate:
    """Mean and standard error of a scalar per-sample function.

    ``sample_fn(handle, count)`` returns ``count`` values drawn from the
    given substream. Chunk k always uses rng.derive(0, k), so the result
    does not depend on ``workers``.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    counts = _chunk_counts(n_samples)

    def one_chunk(k: int):
        values = np.asarray(sample_fn(rng.derive(0, k), counts[k]), dtype=float)
        return float(values.sum()), float((values**2).sum())

    partials = _run_chunks(one_chunk, len(counts), workers)
    total = math.fsum(p[0] for p in partials)
    total_sq = math.fsum(p[1] for p in partials)
    mean = total / n_samples
    var = max((total_sq - n_samples * mean * mean) / (n_samples - 1), 0.0)
    return McEstimate(mean, math.sqrt(var / n_samples), n_samples)


def _mc_matrix(sample_fn, n_samples: int, rng: RngHandle, workers: int):
    """Entrywise mean and standard error of a matrix-valued sample function."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    counts = _chunk_counts(n_samples)

    def one_chunk(k: int):
        values = np.asarray(sample_fn(rng.derive(0, k), counts[k]), dtype=complex)
        return (
            values.sum(axis=0),
            (values.real**2).sum(axis=0),
            (values.imag**2).sum(axis=0),
        )

    partials = _run_chunks(one_chunk, len(counts), workers)
    total = np.sum([p[0] for p in partials], axis=0)
    total_re_sq = np.sum([p[1] for p in partials], axis=0)
    total_im_sq = np.sum([p[2] for p in partials], axis=0)
    mean = total / n_samples
    var_re = np.maximum((total_re_sq - n_samples * mean.real**2) / (n_samples - 1), 0.0)
    var_im = np.maximum((total_im_sq - n_samples * mean.imag**2) / (n_samples - 1), 0.0)
    std_error = np.sqrt((var_re + var_im) / n_samples)
    return mean, std_error


def _batch_norm_sq_reduced(u: np.ndarray, m: np.ndarray, d_s: int, d_e: int) -> np.ndarray:
    """Per-sample squared HS norm of the reduced conjugated operator."""
    x = (u @ m) @ dagger(u)
    delta = partial_trace_env(x, d_s, d_e)
    return np.einsum("nij,nij->n", delta.conj(), delta).real


# ---------------------------------------------------------------------------
# witness distance and Haar averages


def _check_state_pair(rho: BipartiteState, rho_deph: BipartiteState) -> np.ndarray:
    if (rho.d_s, rho.d_e) != (rho_deph.d_s, rho_deph.d_e):
        raise ValueError("state pair has mismatched dimensions")
    return rho.rho - rho_deph.rho


def witness_distance(rho: BipartiteState, rho_deph: BipartiteState, u) -> float:
    """HS norm of the reduced difference after a joint unitary evolution.

    Zero (within numerical noise) for every unitary when the state is
    classical; any strictly positive value witnesses nonclassical
    correlations. Bounded above by sqrt(d_e) times the discord measure.
    """
    m = _check_state_pair(rho, rho_deph)
    u = require_unitary(u, "u")
    if u.shape[0] != rho.dim:
        raise ValueError(f"unitary dimension {u.shape[0]} does not match state dimension {rho.dim}")
    return float(hs_norm(partial_trace_env(u @ m @ dagger(u), rho.d_s, rho.d_e)))


def haar_witness_prefactor_sq(d_s: int, d_e: int) -> float:
    """Haar mean of the squared witness per unit squared discord.

    For a traceless Hermitian difference operator the average squared
    reduced distance is this dimensional factor times the squared HS norm.
    """
    if d_s * d_e < 2:
        raise ValueError("total dimension must be at least 2")
    return (d_s**2 * d_e - d_e) / (d_s**2 * d_e**2 - 1)


def pure_state_rms_prefactor(d_s: int, d_e: int) -> float:
    """RMS witness per unit concurrence for pure states (discord = C / sqrt 2)."""
    return math.sqrt(haar_witness_prefactor_sq(d_s, d_e) / 2.0)


def theorem_rhs(m, d_s: int, d_e: int) -> float:
    """Closed-form Haar average of || Tr_env(U M U^dagger) ||^2.

    Two dimensional coefficients multiply the squared HS norm and the
    squared trace of the Hermitian operator M.
    """
    m = require_hermitian(m, "m")
    if m.shape[0] != d_s * d_e:
        raise ValueError(f"operator dimension {m.shape[0]} does not match d_s*d_e = {d_s * d_e}")
    if d_s * d_e < 2:
        raise ValueError("total dimension must be at least 2")
    denom = d_s**2 * d_e**2 - 1
    norm_coeff = (d_s**2 * d_e - d_e) / denom
    trace_coeff = (d_s * d_e**2 - d_s) / denom
    tr = float(np.trace(m).real)
    return norm_coeff * float(hs_norm(m)) ** 2 + trace_coeff * tr**2


def _haar_mean_sq(m: np.ndarray, d_s: int, d_e: int, n_samples: int, rng: RngHandle, workers: int) -> McEstimate:
    d = d_s * d_e

    def sample_fn(handle: RngHandle, count: int) -> np.ndarray:
        u = haar_unitary(d, handle, size=count)
        return _batch_norm_sq_reduced(u, m, d_s, d_e)

    return _mc_scalar(sample_fn, n_samples, rng, workers)


def haar_average_distance_sq(
    rho: BipartiteState,
    rho_deph: BipartiteState,
    n_samples: int,
    rng: RngHandle,
    workers: int = 1,
) -> McEstimate:
    """Monte Carlo Haar average of the squared witness distance.

    Converges to the dimensional prefactor times the squared discord of
    ``rho``; take ``.rms()`` for the root-mean-square witness.
    """
    m = _check_state_pair(rho, rho_deph)
    return _haar_mean_sq(m, rho.d_s, rho.d_e, n_samples, rng, workers)


def theorem_mc_check(
    m, d_s: int, d_e: int, n_samples: int, rng: RngHandle, workers: int = 1
) -> tuple[McEstimate, float]:
    """Monte Carlo estimate of the Haar-averaged squared reduced norm,
    paired with its closed-form value."""
    m = require_hermitian(m, "m")
    est = _haar_mean_sq(m, d_s, d_e, n_samples, rng, workers)
    return est, theorem_rhs(m, d_s, d_e)


def structured_average_distance(
    rho: BipartiteState,
    rho_deph: BipartiteState,
    ensemble: SpectrumEnsemble,
    t: float,
    n_samples: int,
    rng: RngHandle,
    workers: int = 1,
    redraw_spectrum: bool = True,
) -> McEstimate:
    """Average squared witness under W exp(-iDt) W^dagger evolutions.

    W is Haar; the spectrum D is redrawn per sample (annealed) or frozen
    once from a derived substream (``redraw_spectrum=False``, quenched).
    At t = 0 the evolution is the identity and the marginals of the two
    states coincide, so the distance vanishes identically and no sampling
    is performed.
    """
    m = _check_state_pair(rho, rho_deph)
    d = rho.dim
    if ensemble.dim != d:
        raise ValueError(f"ensemble dimension {ensemble.dim} does not match state dimension {d}")
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    t = float(t)
    if t == 0.0:
        return McEstimate(0.0, 0.0, n_samples)
    frozen_levels = None if redraw_spectrum else sample_spectrum(ensemble, rng.derive(1))

    def sample_fn(handle: RngHandle, count: int) -> np.ndarray:
        w = haar_unitary(d, handle, size=count)
        if frozen_levels is None:
            levels = sample_spectrum(ensemble, handle, size=count)
        else:
            levels = np.broadcast_to(frozen_levels, (count, d))
        phases = np.exp(-1j * t * levels)
        u = (w * phases[:, None, :]) @ dagger(w)
        return _batch_norm_sq_reduced(u, m, rho.d_s, rho.d_e)

    return _mc_scalar(sample_fn, n_samples, rng, workers)


def witness_trajectory(
    rho: BipartiteState,
    rho_deph: BipartiteState,
    se: StructuredEvolution,
    time_grid,
    include_trace_distance: bool = True,
    metadata: dict | None = None,
) -> WitnessResult:
    """Witness distance along a time grid for one fixed evolution.

    Also records the trace distance between the reduced evolved states
    as a diagnostic (the quantity used by trace-distance-based
    detection schemes).
    """
    m = _check_state_pair(rho, rho_deph)
    times = np.asarray(time_grid, dtype=float).reshape(-1)
    hs_vals = np.empty(times.size)
    td_vals = np.empty(times.size) if include_trace_distance else None
    for i, t in enumerate(times):
        u = se.evolve(t)
        udag = dagger(u)
        hs_vals[i] = hs_norm(partial_trace_env(u @ m @ udag, rho.d_s, rho.d_e))
        if td_vals is not None:
            red = partial_trace_env(u @ rho.rho @ udag, rho.d_s, rho.d_e)
            red_deph = partial_trace_env(u @ rho_deph.rho @ udag, rho.d_s, rho.d_e)
            td_vals[i] = trace_distance(red, red_deph)
    return WitnessResult(times, hs_vals, td_vals, dict(metadata or {}))


# ---------------------------------------------------------------------------
# twirling channel


def twirl_constants(a_op, b_op) -> TwirlConstants:
    """Analytic coefficients of the Haar-twirled two-sided channel.

    The Haar average of U^dagger A U X U^dagger B U equals
    a Tr(X) I + b X with a and b fixed by d, Tr(BA), Tr(A) and Tr(B).
    Satisfies a d + b = Tr(BA) / d; the identity pair gives (0, 1).
    """
    a_op = as_square(a_op, "a_op")
    b_op = as_square(b_op, "b_op")
    d = a_op.shape[0]
    if b_op.shape[0] != d:
        raise ValueError("operator dimensions differ")
    if d < 2:
        raise ValueError("twirl constants are undefined at dimension 1")
    tr_ba = complex(np.trace(b_op @ a_op))
    tr_a = complex(np.trace(a_op))
    tr_b = complex(np.trace(b_op))
    denom = d * (d**2 - 1)
    a = (d * tr_ba - tr_a * tr_b) / denom
    b = (d * tr_a * tr_b - tr_ba) / denom
    return TwirlConstants(a, b)


def twirl_mc(
    a_op,
    b_op,
    x,
    n_samples: int,
    rng: RngHandle,
    workers: int = 1,
    return_stderr: bool = False,
):
    """Monte Carlo estimate of the twirled channel applied to X.

    Converges entrywise to a Tr(X) I + b X with the analytic constants.
    With ``return_stderr`` the entrywise standard-error matrix is
    returned alongside the mean.
    """
    a_op = as_square(a_op, "a_op")
    b_op = as_square(b_op, "b_op")
    x = as_square(x, "x")
    d = a_op.shape[0]
    if b_op.shape[0] != d or x.shape[0] != d:
        raise ValueError("operator dimensions differ")

    def sample_fn(handle: RngHandle, count: int) -> np.ndarray:
        u = haar_unitary(d, handle, size=count)
        udag = dagger(u)
        left = udag @ a_op @ u
        right = udag @ b_op @ u
        return left @ x @ right

    mean, stderr = _mc_matrix(sample_fn, n_samples, rng, workers)
    return (mean, stderr) if return_stderr else mean


def maximally_entangled_ket(d: int) -> np.ndarray:
    """(1/sqrt d) sum_w |w> x |w> on the doubled space."""
    omega = np.zeros(d * d, dtype=complex)
    omega[:: d + 1] = 1.0 / math.sqrt(d)
    return omega


def choi_isotropic_check(
    a_op, b_op, n_samples: int, rng: RngHandle, workers: int = 1
) -> ChoiCheckResult:
    """Residual of the sampled Choi matrix against its isotropic form.

    The twirled channel is estimated on the full operator basis
    |w><w'| (one shared unitary stream), assembled into the Choi matrix,
    and compared with a I / d + b |Omega><Omega|. The aggregate Monte
    Carlo error is the root sum of squared entrywise standard errors.
    """
    a_op = as_square(a_op, "a_op")
    b_op = as_square(b_op, "b_op")
    d = a_op.shape[0]
    if b_op.shape[0] != d:
        raise ValueError("operator dimensions differ")

    def sample_fn(handle: RngHandle, count: int) -> np.ndarray:
        u = haar_unitary(d, handle, size=count)
        udag = dagger(u)
        left = udag @ a_op @ u
        right = udag @ b_op @ u
        # channel output on |w><w'| is (left column w) outer (right row w'),
        # so the per-sample Choi matrix is a transposed tensor of the pair
        choi = np.einsum("nio,npj->niojp", left, right) / d
        return choi.reshape(count, d * d, d * d)

    mean, stderr = _mc_matrix(sample_fn, n_samples, rng, workers)
    consts = twirl_constants(a_op, b_op)
    omega = maximally_entangled_ket(d)
    analytic = consts.a * np.eye(d * d, dtype=complex) / d + consts.b * np.outer(
        omega, omega.conj()
    )
    residual = float(hs_norm(mean - analytic))
    aggregate = float(math.sqrt(float((stderr**2).sum())))
    return ChoiCheckResult(residual, aggregate, consts, n_samples)


def trace_distance(a, b) -> float:
    """Half the sum of absolute eigenvalues of the Hermitian difference."""
    a = require_hermitian(a, "a")
    b = require_hermitian(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    vals = eig_hermitian(a - b).eigenvalues
    return 0.5 * float(np.abs(vals).sum())
