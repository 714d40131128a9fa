"""Local-dephasing witness simulations for nonclassical correlations in
bipartite quantum states.

The package provides dense complex linear algebra, bipartite state
construction, the local dephasing map and its Hilbert-Schmidt discord
measure, random-matrix sampling (Haar unitaries, Poisson/GUE spectra),
Monte Carlo estimators for Haar-averaged witness distances and the
twirling channel, and a reproducible seeded CLI.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .linalg import (
    HermitianEigensystem,
    conj_by_unitary,
    dagger,
    eig_hermitian,
    hs_inner,
    hs_norm,
    partial_trace_env,
    partial_trace_sys,
    tensor,
)
from .states import (
    BipartiteState,
    SchmidtDecomposition,
    classical_state,
    concurrence_pure,
    from_pure,
    purity,
    random_mixed,
    random_pure,
    schmidt,
)
from .dephasing import (
    DephasingBasis,
    dephase_local,
    dephase_total,
    discord_delta,
    eigenbasis_of_marginal,
    is_classical,
)
from .randmat import (
    RngHandle,
    SpectrumEnsemble,
    StructuredEvolution,
    evolve,
    ginibre,
    haar_unitary,
    level_transform_f,
    sample_spectrum,
    structured_evolution,
)
from .witness import (
    ChoiCheckResult,
    McEstimate,
    TwirlConstants,
    WitnessResult,
    choi_isotropic_check,
    haar_average_distance_sq,
    haar_witness_prefactor_sq,
    pure_state_rms_prefactor,
    structured_average_distance,
    theorem_mc_check,
    theorem_rhs,
    trace_distance,
    twirl_constants,
    twirl_mc,
    witness_distance,
    witness_trajectory,
)

__all__ = [
    "__version__",
    "HermitianEigensystem",
    "conj_by_unitary",
    "dagger",
    "eig_hermitian",
    "hs_inner",
    "hs_norm",
    "partial_trace_env",
    "partial_trace_sys",
    "tensor",
    "BipartiteState",
    "SchmidtDecomposition",
    "classical_state",
    "concurrence_pure",
    "from_pure",
    "purity",
    "random_mixed",
    "random_pure",
    "schmidt",
    "DephasingBasis",
    "dephase_local",
    "dephase_total",
    "discord_delta",
    "eigenbasis_of_marginal",
    "is_classical",
    "RngHandle",
    "SpectrumEnsemble",
    "StructuredEvolution",
    "evolve",
    "ginibre",
    "haar_unitary",
    "level_transform_f",
    "sample_spectrum",
    "structured_evolution",
    "ChoiCheckResult",
    "McEstimate",
    "TwirlConstants",
    "WitnessResult",
    "choi_isotropic_check",
    "haar_average_distance_sq",
    "haar_witness_prefactor_sq",
    "pure_state_rms_prefactor",
    "structured_average_distance",
    "theorem_mc_check",
    "theorem_rhs",
    "trace_distance",
    "twirl_constants",
    "twirl_mc",
    "witness_distance",
    "witness_trajectory",
]
