"""Command-line driver for reproducible witness experiments.

Usage: ``dephwit <command> --config <path> [--seed N] [--output PATH]
[--format csv|json]``. Every run is pinned by its seed: the master seed
spawns fixed substreams for state generation, operator draws, and the
Monte Carlo chunks, so identical configs produce byte-identical output
files for any worker count. Wall-clock timing goes to stderr only.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import COMMANDS, ConfigError, ExperimentConfig, parse_config
from .dephasing import CLASSICALITY_TOL, dephase_total, eigenbasis_of_marginal
from .linalg import dagger, hs_norm
from .randmat import RngHandle, SpectrumEnsemble, ginibre, structured_evolution
from .states import BipartiteState, classical_state, from_pure, purity, random_mixed
from .witness import (
    choi_isotropic_check,
    haar_average_distance_sq,
    haar_witness_prefactor_sq,
    structured_average_distance,
    theorem_mc_check,
    twirl_constants,
    twirl_mc,
    witness_trajectory,
)

WORKERS_ENV = "DEPHWIT_WORKERS"

# fixed substream layout under the master seed
_STATE_STREAM = 0
_OPERATOR_STREAM = 1
_MC_STREAM = 2


@dataclass(frozen=True)
class RunRecord:
    """Completed run: config echo, versioned results, timing.

    The serialized output contains only the deterministic fields; the
    wall-clock duration stays in memory (and on stderr) so repeated runs
    of one config are byte-identical.
    """

    command: str
    config: dict
    version: str
    seed: int
    results: dict | list
    duration_s: float

    def to_output_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "version": self.version,
            "seed": self.seed,
            "results": self.results,
        }


def _effective_workers(config: ExperimentConfig) -> int:
    if config.workers is not None:
        return config.workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}")
        if value < 1:
            raise ValueError(f"{WORKERS_ENV} must be at least 1, got {value}")
        return value
    return 1


def _build_state(config: ExperimentConfig, rng: RngHandle) -> BipartiteState:
    if config.pure is not None:
        return from_pure(config.pure, config.d_s, config.d_e)
    if config.probabilities is not None:
        return classical_state(config.probabilities)
    return random_mixed(config.d_s, config.d_e, config.random_rank, rng)


def _build_ensemble(config: ExperimentConfig) -> SpectrumEnsemble:
    return SpectrumEnsemble(
        kind=config.ensemble_kind,
        dim=config.d_s * config.d_e,
        mean_spacing=config.mean_spacing,
        explicit_levels=config.explicit_levels,
    )


def _time_grid(config: ExperimentConfig) -> np.ndarray:
    return np.linspace(config.time_start, config.time_stop, config.time_steps)


def _dephased_pair(config: ExperimentConfig, rng: RngHandle):
    state = _build_state(config, rng)
    basis = eigenbasis_of_marginal(state)
    if basis.degenerate:
        print(
            "warning: reduced system state has a degenerate spectrum; "
            "the dephasing basis follows the deterministic tie-broken convention",
            file=sys.stderr,
        )
    return state, dephase_total(state, basis), basis


def _safe_z(mean: float, std_error: float, reference: float) -> float:
    if std_error == 0.0:
        return 0.0
    return (mean - reference) / std_error


def _run_discord(config: ExperimentConfig, master: RngHandle, workers: int):
    state, deph, basis = _dephased_pair(config, master.derive(_STATE_STREAM))
    delta = float(hs_norm(state.rho - deph.rho))
    return {
        "delta": delta,
        "delta_sq": delta**2,
        "purity": purity(state),
        "purity_dephased": purity(deph),
        "classical": int(delta <= CLASSICALITY_TOL),
        "degenerate_marginal": int(basis.degenerate),
    }


def _run_witness_trajectory(config: ExperimentConfig, master: RngHandle, workers: int):
    state, deph, _ = _dephased_pair(config, master.derive(_STATE_STREAM))
    se = structured_evolution(_build_ensemble(config), master.derive(_OPERATOR_STREAM))
    traj = witness_trajectory(state, deph, se, _time_grid(config))
    return [
        {
            "t": float(t),
            "hs_distance": float(h),
            "trace_distance": float(td),
        }
        for t, h, td in zip(traj.time_grid, traj.hs_distance, traj.trace_distance)
    ]


def _run_haar_average(config: ExperimentConfig, master: RngHandle, workers: int):
    state, deph, _ = _dephased_pair(config, master.derive(_STATE_STREAM))
    delta = float(hs_norm(state.rho - deph.rho))
    est = haar_average_distance_sq(
        state, deph, config.n_samples, master.derive(_MC_STREAM), workers=workers
    )
    rms, rms_err = est.rms()
    predicted_sq = haar_witness_prefactor_sq(config.d_s, config.d_e) * delta**2
    return {
        "mean_sq": est.mean,
        "std_error": est.std_error,
        "rms": rms,
        "rms_std_error": rms_err,
        "delta": delta,
        "predicted_mean_sq": predicted_sq,
        "predicted_rms": math.sqrt(predicted_sq),
        "z_score": _safe_z(est.mean, est.std_error, predicted_sq),
        "n_samples": est.n_samples,
    }


def _run_theorem_check(config: ExperimentConfig, master: RngHandle, workers: int):
    d = config.d_s * config.d_e
    g = ginibre(d, master.derive(_OPERATOR_STREAM))
    m = 0.5 * (g + dagger(g))
    est, rhs = theorem_mc_check(
        m, config.d_s, config.d_e, config.n_samples, master.derive(_MC_STREAM), workers=workers
    )
    return {
        "mc_mean": est.mean,
        "mc_std_error": est.std_error,
        "rhs": rhs,
        "z_score": _safe_z(est.mean, est.std_error, rhs),
        "n_samples": est.n_samples,
    }


def _run_lemma_check(config: ExperimentConfig, master: RngHandle, workers: int):
    d = config.d_s * config.d_e
    ops = master.derive(_OPERATOR_STREAM)
    a_op = ginibre(d, ops)
    b_op = ginibre(d, ops)
    x = ginibre(d, ops)
    consts = twirl_constants(a_op, b_op)
    mean, stderr = twirl_mc(
        a_op, b_op, x, config.n_samples, master.derive(_MC_STREAM),
        workers=workers, return_stderr=True,
    )
    exact = consts.a * np.trace(x) * np.eye(d) + consts.b * x
    deviation = np.abs(mean - exact)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(stderr > 0.0, deviation / stderr, 0.0)
    return {
        "a_real": consts.a.real,
        "a_imag": consts.a.imag,
        "b_real": consts.b.real,
        "b_imag": consts.b.imag,
        "max_abs_error": float(deviation.max()),
        "max_z_score": float(z.max()),
        "n_samples": config.n_samples,
    }


def _run_choi_check(config: ExperimentConfig, master: RngHandle, workers: int):
    d = config.d_s * config.d_e
    ops = master.derive(_OPERATOR_STREAM)
    a_op = ginibre(d, ops)
    b_op = ginibre(d, ops)
    result = choi_isotropic_check(
        a_op, b_op, config.n_samples, master.derive(_MC_STREAM), workers=workers
    )
    ratio = result.residual / result.mc_error if result.mc_error > 0.0 else 0.0
    return {
        "residual": result.residual,
        "mc_error": result.mc_error,
        "error_ratio": ratio,
        "a_real": result.constants.a.real,
        "a_imag": result.constants.a.imag,
        "b_real": result.constants.b.real,
        "b_imag": result.constants.b.imag,
        "n_samples": result.n_samples,
    }


def _run_structured_average(config: ExperimentConfig, master: RngHandle, workers: int):
    state, deph, _ = _dephased_pair(config, master.derive(_STATE_STREAM))
    delta = float(hs_norm(state.rho - deph.rho))
    ensemble = _build_ensemble(config)
    mc = master.derive(_MC_STREAM)
    redraw = config.spectrum_mode == "annealed"
    rows = []
    for i, t in enumerate(_time_grid(config)):
        est = structured_average_distance(
            state, deph, ensemble, float(t), config.n_samples, mc.derive(i),
            workers=workers, redraw_spectrum=redraw,
        )
        rms, rms_err = est.rms()
        rows.append(
            {
                "t": float(t),
                "mean_sq": est.mean,
                "std_error": est.std_error,
                "rms": rms,
                "rms_std_error": rms_err,
                "delta": delta,
                "ratio_to_delta": rms / delta if delta > 0.0 else 0.0,
            }
        )
    return rows


_RUNNERS = {
    "discord": _run_discord,
    "witness-trajectory": _run_witness_trajectory,
    "haar-average": _run_haar_average,
    "theorem-check": _run_theorem_check,
    "lemma-check": _run_lemma_check,
    "choi-check": _run_choi_check,
    "structured-average": _run_structured_average,
}


def run(config: ExperimentConfig) -> RunRecord:
    """Execute one validated config and return the completed record."""
    workers = _effective_workers(config)
    started = time.perf_counter()
    master = RngHandle(config.seed)
    results = _RUNNERS[config.command](config, master, workers)
    duration = time.perf_counter() - started
    return RunRecord(
        command=config.command,
        config=config.to_dict(),
        version=__version__,
        seed=config.seed,
        results=results,
        duration_s=duration,
    )


# ---------------------------------------------------------------------------
# serialization


def _format_number(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def render_csv(results: dict | list) -> str:
    """Tabular form: key,value rows for scalar payloads, a header plus one
    row per entry for trajectory payloads. Floats carry 17 significant
    digits so they round-trip exactly."""
    lines = []
    if isinstance(results, dict):
        lines.append("key,value")
        for key, value in results.items():
            lines.append(f"{key},{_format_number(value)}")
    else:
        keys = list(results[0].keys())
        lines.append(",".join(keys))
        for row in results:
            lines.append(",".join(_format_number(row[k]) for k in keys))
    return "\n".join(lines) + "\n"


def render_json(record: RunRecord) -> str:
    return json.dumps(record.to_output_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_output(record: RunRecord, path: str, fmt: str) -> None:
    text = render_json(record) if fmt == "json" else render_csv(record.results)
    Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dephwit",
        description="Seeded witness experiments for nonclassical bipartite correlations.",
    )
    parser.add_argument("--version", action="version", version=f"dephwit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="path to a key = value config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--output", help="override the output path")
        p.add_argument("--format", choices=("csv", "json"), help="override the output format")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        config = parse_config(text, command=args.command)
    except ConfigError as exc:
        for message in exc.errors:
            print(f"config error: {message}", file=sys.stderr)
        return 2
    config = config.with_overrides(seed=args.seed, output=args.output, format=args.format)
    if config.output is None:
        print("config error: output: required (set the key or pass --output)", file=sys.stderr)
        return 2
    try:
        record = run(config)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_output(record, config.output, config.format)
    print(
        f"{config.command}: wrote {config.output} in {record.duration_s:.3f}s "
        f"(seed {config.seed})",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
