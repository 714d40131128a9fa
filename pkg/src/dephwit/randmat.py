"""Random-matrix sampling.

Ginibre matrices, Haar-distributed unitaries via phase-corrected QR,
eigenvalue spectra with Poisson or GUE level statistics, structured
time evolutions W exp(-iDt) W^dagger, and the normalized Fourier
transform of the level density.

All randomness flows through :class:`RngHandle`, a seeded counter-based
Philox stream with hierarchical derivation. Normal variates use the
Marsaglia polar method on top of the raw uniform stream, so a handle's
output is pinned entirely by (seed, spawn key).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_square, dagger, require_unitary

PHILOX_ALGORITHM = "philox4x64"
ENSEMBLE_KINDS = ("poisson", "gue", "explicit")


@dataclass
class RngHandle:
    """Deterministic PRNG stream identified by a 64-bit seed and a spawn key.

    Identical (seed, spawn_key, algorithm) triples reproduce identical
    sample sequences bit for bit. ``derive`` returns statistically
    independent child streams, used to pin Monte Carlo results regardless
    of how work is scheduled across workers.
    """

    seed: int
    spawn_key: tuple[int, ...] = ()
    algorithm: str = PHILOX_ALGORITHM
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.algorithm != PHILOX_ALGORITHM:
            raise ValueError(f"unsupported PRNG algorithm: {self.algorithm!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit nonnegative integer")
        self.seed = int(self.seed)
        self.spawn_key = tuple(int(k) for k in self.spawn_key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def derive(self, *indices: int) -> "RngHandle":
        """Independent child stream addressed by the given indices."""
        return RngHandle(self.seed, self.spawn_key + tuple(int(i) for i in indices))

    def uniform(self, shape=None) -> np.ndarray:
        """Uniform doubles in [0, 1)."""
        return self._gen.random(shape)

    def normals(self, shape) -> np.ndarray:
        """Standard normal variates via the vectorized Marsaglia polar method."""
        n = int(np.prod(shape))
        out = np.empty(n)
        have = 0
        while have < n:
            pairs = (n - have + 1) // 2
            m = int(pairs / 0.78) + 8  # acceptance rate is pi/4
            u = 2.0 * self._gen.random((m, 2)) - 1.0
            ssq = u[:, 0] ** 2 + u[:, 1] ** 2
            keep = (ssq > 0.0) & (ssq < 1.0)
            u = u[keep]
            ssq = ssq[keep]
            factor = np.sqrt(-2.0 * np.log(ssq) / ssq)
            draw = (u * factor[:, None]).reshape(-1)
            take = min(draw.size, n - have)
            out[have : have + take] = draw[:take]
            have += take
        return out.reshape(shape)

    def integers(self, low: int, high: int, shape=None):
        return self._gen.integers(low, high, size=shape)


def ginibre(d: int, rng: RngHandle, size: int | None = None) -> np.ndarray:
    """Complex Ginibre matrix: real and imaginary parts iid standard normal.

    With this convention E|entry|^2 = 2; the scale drops out of every
    downstream use (QR phases, normalized GUE spectra, normalized states).
    ``size`` stacks that many draws along a leading axis. A sized call
    consumes the stream differently from repeated unsized calls.
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    shape = (d, d) if size is None else (int(size), d, d)
    re = rng.normals(shape)
    im = rng.normals(shape)
    return re + 1j * im


def haar_unitary(d: int, rng: RngHandle, size: int | None = None) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix.

    Each column of Q is divided by the phase of the matching diagonal
    entry of R; plain QR alone is not Haar-distributed.
    """
    g = ginibre(d, rng, size=size)
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    mag = np.abs(diag)
    phase = np.where(mag > 0.0, diag / np.where(mag > 0.0, mag, 1.0), 1.0)
    return q / phase[..., None, :]


@dataclass(frozen=True)
class SpectrumEnsemble:
    """Rule for generating real spectra with prescribed level statistics.

    kind:
      poisson   iid exponential spacings (regular level statistics)
      gue       eigenvalues of a symmetrized Ginibre matrix, rescaled to
                unit mean spacing over the middle 80% of levels
                (chaotic, level-repelling statistics)
      explicit  a fixed list of levels
    ``mean_spacing`` rescales poisson/gue output.
    """

    kind: str
    dim: int
    mean_spacing: float = 1.0
    explicit_levels: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind: {self.kind!r}")
        if self.dim < 1:
            raise ValueError("ensemble dimension must be at least 1")
        if not (self.mean_spacing > 0.0):
            raise ValueError("mean_spacing must be positive")
        if self.kind == "explicit":
            if self.explicit_levels is None:
                raise ValueError("explicit ensemble requires explicit_levels")
            levels = np.asarray(self.explicit_levels, dtype=float)
            if levels.shape != (self.dim,):
                raise ValueError(
                    f"explicit_levels must have length {self.dim}, got {levels.shape}"
                )
            object.__setattr__(self, "explicit_levels", np.sort(levels))


def _rescale_bulk(levels: np.ndarray, mean_spacing: float) -> np.ndarray:
    # unit mean spacing measured over the middle 80% of each sorted spectrum
    d = levels.shape[-1]
    if d < 2:
        return levels
    lo = int(math.floor(0.1 * d))
    hi = int(math.ceil(0.9 * d))
    if hi - lo < 2:
        lo, hi = 0, d
    bulk = np.diff(levels[..., lo:hi], axis=-1).mean(axis=-1)
    return levels * (mean_spacing / bulk)[..., None]


def sample_spectrum(
    ensemble: SpectrumEnsemble, rng: RngHandle, size: int | None = None
) -> np.ndarray:
    """Draw one spectrum (or a stack of ``size``), sorted ascending."""
    d = ensemble.dim
    shape = (d,) if size is None else (int(size), d)
    if ensemble.kind == "explicit":
        levels = np.asarray(ensemble.explicit_levels, dtype=float)
        return levels.copy() if size is None else np.broadcast_to(levels, shape).copy()
    if ensemble.kind == "poisson":
        u = rng.uniform(shape)
        spacings = -ensemble.mean_spacing * np.log1p(-u)
        return np.cumsum(spacings, axis=-1)
    g = ginibre(d, rng, size=size)
    h = 0.5 * (g + dagger(g))
    levels = np.linalg.eigvalsh(h)
    return _rescale_bulk(levels, ensemble.mean_spacing)


@dataclass(frozen=True)
class StructuredEvolution:
    """Unitary evolution with fixed random eigenvectors and levels.

    ``evolve(t)`` returns W diag(exp(-i E_j t)) W^dagger (hbar = 1).
    """

    eigvecs: np.ndarray
    levels: np.ndarray

    def __post_init__(self) -> None:
        w = require_unitary(self.eigvecs, "eigvecs")
        levels = np.asarray(self.levels, dtype=float)
        if levels.shape != (w.shape[0],):
            raise ValueError("levels length must match eigvecs dimension")
        object.__setattr__(self, "eigvecs", w)
        object.__setattr__(self, "levels", levels)

    def evolve(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * float(t) * self.levels)
        w = self.eigvecs
        return (w * phases) @ dagger(w)


def structured_evolution(ensemble: SpectrumEnsemble, rng: RngHandle) -> StructuredEvolution:
    """Draw Haar eigenvectors, then a spectrum from the ensemble."""
    w = haar_unitary(ensemble.dim, rng)
    levels = sample_spectrum(ensemble, rng)
    return StructuredEvolution(eigvecs=w, levels=levels)


def evolve(se: StructuredEvolution, t: float) -> np.ndarray:
    return se.evolve(t)


def level_transform_f(levels, t: float) -> complex:
    """Normalized Fourier transform of the level density, (1/d) sum exp(-i E_j t).

    Equals 1 at t = 0 and is bounded by 1 in modulus.
    """
    levels = np.asarray(levels, dtype=float)
    if levels.ndim != 1 or levels.size == 0:
        raise ValueError("levels must be a nonempty 1-d array")
    return complex(np.mean(np.exp(-1j * float(t) * levels)))
