"""Reproducible Monte Carlo campaigns over the spiked ground-state solvers.

A campaign is described by an :class:`ExperimentConfig` (JSON-serializable,
schema-versioned).  Each trial derives its own seed from the master seed and
the trial index, draws a sample, solves the finite-n problem, evaluates the
fluctuation statistics at the theoretical dual point and computes the
second-order residual.  Results are persisted as a CSV table (fixed column
order, floats at 17 significant digits) plus a JSON mirror carrying the
aggregate summary and a theory sidecar, so a campaign re-run is byte-identical
apart from wall times.

Trials are independent; with ``parallelism > 1`` they run in worker processes
and the output is ordered by trial index, independent of scheduling.  A trial
that raises a numerical error becomes a ``valid=false`` row instead of
aborting the campaign, and trials slower than ten times the median of the
first five are likewise marked invalid (a guard against pathological
bisection brackets, not a precise watchdog).
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Literal, Sequence

import numpy as np

from .fluctuation_lab import (
    FluctuationSample,
    aggregate,
    compute_statistics,
    residual_ball,
    residual_sphere,
)
from .reduction_solver import solve_ball, solve_sphere
from .rmt_core import PoleError, sample_spectral_model
from .theory_engine import (
    FluctuationParams,
    InapplicableRegimeError,
    LeadingOrder,
    RadialSpec,
    SpikeSpec,
    fluct_params_ball,
    fluct_params_sphere,
    maximize_ball_theory,
    maximize_sphere_theory,
)

__all__ = [
    "CSV_COLUMNS",
    "ExperimentConfig",
    "SCHEMA_VERSION",
    "TrialRecord",
    "derive_seed",
    "emit",
    "load_config",
    "parse_campaign_csv",
    "parse_campaign_json",
    "run_experiment",
    "save_config",
    "theory_sidecar",
]

SCHEMA_VERSION = 1

#: exact persisted column order
CSV_COLUMNS = [
    "trial_index",
    "derived_seed",
    "n",
    "value",
    "alpha_star",
    "r_star",
    "l_star",
    "U_N",
    "Uprime_N",
    "Lambda_N",
    "W_N",
    "Wprime_N",
    "X_N",
    "Y_N",
    "residual",
    "valid",
    "wall_time_ms",
]

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def derive_seed(master: int, trial_index: int) -> int:
    """Stateless 64-bit seed for one trial: splitmix64 of master + index step.

    The mixing finalizer is bijective on 64-bit words, so for a fixed master
    the map ``trial_index -> seed`` is injective (indices are spaced by an
    odd constant, and odd multiples are invertible mod 2^64).
    """
    z = (int(master) + (trial_index + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


@dataclass
class ExperimentConfig:
    """Declarative description of a Monte Carlo campaign.

    Only closed-form profile specs (monomial spikes, TAP radial term) are
    allowed here: they serialize losslessly and reconstruct in worker
    processes.  ``parallelism`` may be overridden at run time by the
    ``SKLAB_THREADS`` environment variable.
    """

    model: Literal["sphere", "ball"]
    n: int
    trials: int
    master_seed: int
    beta: float
    spike: SpikeSpec
    radial: RadialSpec | None = None
    output_path: str | None = None
    output_format: Literal["csv", "json"] = "csv"
    parallelism: int = 1
    sampling_mode: Literal["invariance", "rotate"] = "invariance"

    def __post_init__(self) -> None:
        if self.model not in ("sphere", "ball"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.spike.kind != "monomial":
            raise ValueError("campaign configs support monomial spikes only")
        if self.model == "ball":
            if self.radial is None:
                raise ValueError("ball campaigns need a radial profile")
            if self.radial.kind != "tap":
                raise ValueError("campaign configs support the tap radial profile only")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")
        if self.sampling_mode not in ("invariance", "rotate"):
            raise ValueError(f"unknown sampling mode {self.sampling_mode!r}")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "model": self.model,
            "n": self.n,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "beta": self.beta,
            "spike": self.spike.to_dict(),
            "radial": self.radial.to_dict() if self.radial is not None else None,
            "output_path": self.output_path,
            "output_format": self.output_format,
            "parallelism": self.parallelism,
            "sampling_mode": self.sampling_mode,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported config schema version {version!r} (expected {SCHEMA_VERSION})"
            )
        spike_d = data["spike"]
        if spike_d.get("kind") != "monomial":
            raise ValueError("campaign configs support monomial spikes only")
        radial_d = data.get("radial")
        if radial_d is not None and radial_d.get("kind") != "tap":
            raise ValueError("campaign configs support the tap radial profile only")
        return cls(
            model=data["model"],
            n=int(data["n"]),
            trials=int(data["trials"]),
            master_seed=int(data["master_seed"]),
            beta=float(data["beta"]),
            spike=SpikeSpec.monomial(spike_d["h"], spike_d["k"]),
            radial=RadialSpec.tap(radial_d["beta"]) if radial_d is not None else None,
            output_path=data.get("output_path"),
            output_format=data.get("output_format", "csv"),
            parallelism=int(data.get("parallelism", 1)),
            sampling_mode=data.get("sampling_mode", "invariance"),
        )


def save_config(config: ExperimentConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


@dataclass
class TrialRecord:
    """One persisted campaign row; field order matches ``CSV_COLUMNS``."""

    trial_index: int
    derived_seed: int
    n: int
    value: float | None
    alpha_star: float | None
    r_star: float | None
    l_star: float | None
    U_N: float | None
    Uprime_N: float | None
    Lambda_N: float | None
    W_N: float | None
    Wprime_N: float | None
    X_N: float | None
    Y_N: float | None
    residual: float | None
    valid: bool
    wall_time_ms: float


def theory_sidecar(config: ExperimentConfig) -> dict:
    """Limit theory of a campaign: leading order plus fluctuation constants.

    ``fluctuation`` is None with an explanatory ``reason`` whenever the
    second-order description does not apply (zero overlap, flat curvature);
    the campaign then emits empty residual columns.
    """
    if config.model == "sphere":
        leading = maximize_sphere_theory(config.spike, config.beta)
    else:
        leading = maximize_ball_theory(config.spike, config.radial, config.beta)
    sidecar: dict = {
        "schema_version": SCHEMA_VERSION,
        "model": config.model,
        "beta": config.beta,
        "spike": config.spike.to_dict(),
        "radial": config.radial.to_dict() if config.radial is not None else None,
        "leading": {
            "alpha_hat": leading.alpha_hat,
            "l_hat": leading.l_hat,
            "z_hat": leading.z_hat,
            "value": leading.value,
            "multiplicity": leading.multiplicity,
            "r_hat": leading.r_hat,
            "applicable": leading.applicable,
            "reason": leading.reason,
        },
        "fluctuation": None,
        "reason": None,
    }
    try:
        if config.model == "sphere":
            params = fluct_params_sphere(config.spike, config.beta, leading)
        else:
            params = fluct_params_ball(config.spike, config.radial, config.beta, leading)
    except InapplicableRegimeError as err:
        sidecar["reason"] = str(err)
        return sidecar
    sidecar["fluctuation"] = {
        "kappa": params.kappa,
        "G": params.G.tolist(),
        "G_resid": params.G_resid.tolist(),
        "w": params.w.tolist(),
        "h_ll": params.h_ll,
        "var_U": params.var_U,
        "var_Uprime": params.var_Uprime,
        "cov_UUprime": params.cov_UUprime,
        "lambda_mean": params.lambda_mean,
        "lambda_var": params.lambda_var,
        "Sigma": params.Sigma.tolist(),
    }
    return sidecar


def _rebuild_theory(
    sidecar: dict,
) -> tuple[LeadingOrder, FluctuationParams | None]:
    lead_d = sidecar["leading"]
    leading = LeadingOrder(
        alpha_hat=lead_d["alpha_hat"],
        l_hat=lead_d["l_hat"],
        z_hat=lead_d["z_hat"],
        value=lead_d["value"],
        multiplicity=lead_d["multiplicity"],
        r_hat=lead_d["r_hat"],
        applicable=lead_d["applicable"],
        reason=lead_d["reason"],
    )
    fl = sidecar["fluctuation"]
    if fl is None:
        return leading, None
    params = FluctuationParams(
        kappa=fl["kappa"],
        G=np.array(fl["G"]),
        var_U=fl["var_U"],
        var_Uprime=fl["var_Uprime"],
        cov_UUprime=fl["cov_UUprime"],
        lambda_mean=fl["lambda_mean"],
        lambda_var=fl["lambda_var"],
        Sigma=np.array(fl["Sigma"]),
        w=np.array(fl["w"]),
        h_ll=fl["h_ll"],
        G_resid=np.array(fl["G_resid"]),
    )
    return leading, params


def _single_thread_env() -> None:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, "1")


def _run_trial(
    config_d: dict, sidecar: dict, trial_index: int
) -> tuple[TrialRecord, FluctuationSample | None]:
    """Execute one trial; never raises (failures become invalid rows)."""
    config = ExperimentConfig.from_dict(config_d)
    seed = derive_seed(config.master_seed, trial_index)
    start = time.perf_counter()

    def elapsed_ms() -> float:
        return (time.perf_counter() - start) * 1e3

    def invalid() -> TrialRecord:
        return TrialRecord(
            trial_index, seed, config.n, *([None] * 12), False, elapsed_ms()
        )

    try:
        sample = sample_spectral_model(config.n, seed=seed, mode=config.sampling_mode)
        if config.model == "sphere":
            sol = solve_sphere(sample, config.beta, config.spike)
            r_star = None
        else:
            lo, hi = config.radial.domain
            sol = solve_ball(
                sample,
                config.beta,
                config.spike,
                config.radial,
                (lo + 1e-9, hi - 1e-9),  # the tap endpoints are open
            )
            r_star = sol.r_star
    except Exception:
        return invalid(), None

    leading, params = _rebuild_theory(sidecar)
    stats = residual = None
    valid = True
    if leading.applicable:
        try:
            stats = compute_statistics(sample, leading.l_hat)
            stats.seed = seed
        except PoleError:
            valid = False
        except Exception:
            return invalid(), None
        if stats is not None and params is not None:
            res_fn = residual_sphere if config.model == "sphere" else residual_ball
            residual = res_fn(sol.value, stats, leading, params)
            stats.residual = residual

    record = TrialRecord(
        trial_index=trial_index,
        derived_seed=seed,
        n=config.n,
        value=sol.value,
        alpha_star=sol.alpha_star,
        r_star=r_star,
        l_star=sol.l_star,
        U_N=stats.U if stats else None,
        Uprime_N=stats.Uprime if stats else None,
        Lambda_N=stats.Lambda if stats else None,
        W_N=stats.W if stats else None,
        Wprime_N=stats.Wprime if stats else None,
        X_N=stats.X if stats else None,
        Y_N=stats.Y if stats else None,
        residual=residual,
        valid=valid,
        wall_time_ms=elapsed_ms(),
    )
    return record, stats


def run_experiment(
    config: ExperimentConfig,
) -> tuple[list[TrialRecord], dict, dict]:
    """Run a campaign and return ``(records, summary, theory sidecar)``.

    Records are ordered by trial index regardless of scheduling.  The summary
    holds the aggregate moments/KS distances of the valid trials (when at
    least two exist), the valid/invalid counts, and the median absolute
    residual.  With ``config.output_path`` set the results are also persisted
    via :func:`emit`.
    """
    sidecar = theory_sidecar(config)
    config_d = config.to_dict()
    workers = int(os.environ.get("SKLAB_THREADS", config.parallelism))

    results: dict[int, tuple[TrialRecord, FluctuationSample | None]] = {}
    pilot = min(config.trials, 5)
    for i in range(pilot):
        results[i] = _run_trial(config_d, sidecar, i)
    rest = range(pilot, config.trials)
    if workers > 1 and len(rest) > 0:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_single_thread_env
        ) as pool:
            futures = {i: pool.submit(_run_trial, config_d, sidecar, i) for i in rest}
            for i, fut in futures.items():
                results[i] = fut.result()
    else:
        for i in rest:
            results[i] = _run_trial(config_d, sidecar, i)

    records = [results[i][0] for i in range(config.trials)]
    samples = [results[i][1] for i in range(config.trials)]

    if config.trials > 5:
        # soft per-trial timeout: ten times the pilot median
        limit = 10.0 * float(np.median([records[i].wall_time_ms for i in range(5)]))
        for rec in records[5:]:
            if rec.wall_time_ms > limit:
                rec.valid = False

    _, params = _rebuild_theory(sidecar)
    usable = [
        s
        for rec, s in zip(records, samples)
        if rec.valid and s is not None
    ]
    summary: dict = {
        "valid_count": sum(1 for r in records if r.valid),
        "invalid_count": sum(1 for r in records if not r.valid),
    }
    if len(usable) >= 2:
        summary.update(aggregate(usable, params))
    else:
        summary["reason"] = "fewer than 2 valid trials with statistics"
    residuals = [r.residual for r in records if r.valid and r.residual is not None]
    if residuals:
        summary["median_abs_residual"] = float(np.median(np.abs(residuals)))
    elif sidecar["reason"] is not None:
        summary["residual_reason"] = sidecar["reason"]

    if config.output_path is not None:
        emit(records, summary, sidecar, config.output_path, config.output_format)
    return records, summary, sidecar


# ---------------------------------------------------------------------------
# Persistence


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % value


def emit(
    records: Sequence[TrialRecord],
    summary: dict,
    sidecar: dict,
    base_path: str,
    output_format: Literal["csv", "json"] = "csv",
) -> list[str]:
    """Persist a campaign under ``base_path`` (extension added per format).

    ``csv`` writes the record table ((columns exactly ``CSV_COLUMNS``, floats
    as %.17g, empty fields for missing optionals) plus a ``.summary.json``
    with the aggregate and the theory sidecar; ``json`` writes one document
    with records, summary and theory.  On an I/O failure a ``.partial``
    marker is left next to the output so truncated campaigns are detectable.
    """
    if not records:
        raise ValueError("nothing to emit: no records")
    written: list[str] = []
    try:
        if output_format == "csv":
            csv_path = base_path + ".csv"
            with open(csv_path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(CSV_COLUMNS)
                for rec in records:
                    writer.writerow([_fmt(getattr(rec, col)) for col in CSV_COLUMNS])
            written.append(csv_path)
            meta_path = base_path + ".summary.json"
            with open(meta_path, "w", encoding="utf-8") as fh:
                json.dump({"summary": summary, "theory": sidecar}, fh, indent=2)
                fh.write("\n")
            written.append(meta_path)
        elif output_format == "json":
            json_path = base_path + ".json"
            doc = {
                "schema_version": SCHEMA_VERSION,
                "records": [asdict(rec) for rec in records],
                "summary": summary,
                "theory": sidecar,
            }
            with open(json_path, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2)
                fh.write("\n")
            written.append(json_path)
        else:
            raise ValueError(f"unknown output format {output_format!r}")
    except OSError:
        try:
            with open(base_path + ".partial", "w", encoding="utf-8") as fh:
                fh.write("incomplete campaign output\n")
        except OSError:
            pass
        raise
    return written


_FLOAT_COLUMNS = {
    f.name
    for f in fields(TrialRecord)
    if f.name not in ("trial_index", "derived_seed", "n", "valid")
}


def parse_campaign_csv(path: str) -> list[TrialRecord]:
    """Read back an emitted CSV; exact inverse of :func:`emit` for csv."""
    out: list[TrialRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected columns: {reader.fieldnames}")
        for row in reader:
            kwargs = {}
            for col in CSV_COLUMNS:
                raw = row[col]
                if col in ("trial_index", "derived_seed", "n"):
                    kwargs[col] = int(raw)
                elif col == "valid":
                    kwargs[col] = raw == "true"
                else:
                    kwargs[col] = float(raw) if raw != "" else None
            out.append(TrialRecord(**kwargs))
    return out


def parse_campaign_json(path: str) -> tuple[list[TrialRecord], dict, dict]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported campaign schema {doc.get('schema_version')!r}")
    records = [TrialRecord(**rec) for rec in doc["records"]]
    return records, doc["summary"], doc["theory"]
