"""Replicated simulations and statistical verdicts on the model's limit laws.

Replica ``r`` always uses ``derive_stream(seed, r)``, so results do not
depend on the number of workers or on completion order.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import metrics, theory
from .engine import Mode, ModelParams, run
from .metrics import SnapshotStats
from .sampler import derive_stream
from .theory import Regime, TheoryTable

DISTRIBUTION_MAX_ERROR = 0.01
TRIANGLE_RATE_MAX_DEVIATION = 0.005
LOCAL_CLUSTERING_EPS = 0.005
LOCAL_CLUSTERING_MIN_FRACTION = 0.95
SLOPE_TOLERANCE = 0.05
SUPER_SLOPE_TOLERANCE = 0.07
FLATNESS_RANGE = (0.6, 1.7)


def default_time_grid(lo_exp: float = 3.0, hi_exp: float = 6.0, per_decade: int = 2) -> list[int]:
    """Geometric grid ``10^lo, 10^(lo+1/per_decade), ..., 10^hi`` rounded to integers."""
    n = int(round((hi_exp - lo_exp) * per_decade)) + 1
    return [int(round(10**x)) for x in np.linspace(lo_exp, hi_exp, n)]


class ParamsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(ge=0.0, le=1.0)
    delta: float = Field(gt=-1.0)
    mode: Mode = Mode.EDGE_CHOICE
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _two_stage_needs_zero_delta(self):
        if self.mode is Mode.TWO_STAGE and self.delta != 0.0:
            raise ValueError("two_stage mode requires delta = 0")
        return self

    def model_params(self) -> ModelParams:
        return ModelParams(self.alpha, self.delta, self.mode, self.seed)


class ExperimentConfig(BaseModel):
    """Experiment description; the JSON config file has exactly these fields."""

    model_config = ConfigDict(extra="forbid")

    params: ParamsConfig
    replicas: int = Field(ge=1)
    time_grid: list[int] = Field(default_factory=default_time_grid, min_length=1)
    l_range: tuple[int, int] = (1, 20)
    output_dir: str = "report"
    workers: int = Field(default=1, ge=1)

    @field_validator("time_grid")
    @classmethod
    def _sorted_grid(cls, grid: list[int]) -> list[int]:
        if any(t < 0 for t in grid):
            raise ValueError("time_grid entries must be non-negative")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("time_grid must be strictly increasing")
        return grid

    @field_validator("l_range")
    @classmethod
    def _valid_l_range(cls, r: tuple[int, int]) -> tuple[int, int]:
        if r[0] < 1 or r[1] < r[0]:
            raise ValueError("l_range must satisfy 1 <= lo <= hi")
        return r

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.model_validate(json.load(fh))


@dataclass
class ReplicaMatrix:
    """``stats[r][k]`` is replica ``r`` observed at ``times[k]``."""

    times: list[int]
    stats: list[list[SnapshotStats]]

    @property
    def replicas(self) -> int:
        return len(self.stats)

    def at(self, t: int) -> list[SnapshotStats]:
        k = self.times.index(t)
        return [row[k] for row in self.stats]

    def final(self) -> list[SnapshotStats]:
        return self.at(self.times[-1])

    def mean(self, observable: str, t: int) -> float:
        return float(np.mean([getattr(s, observable) for s in self.at(t)]))


def _run_replica(params: ModelParams, replica: int, grid: list[int]) -> list[SnapshotStats]:
    rows: list[SnapshotStats] = []
    run(params, grid[-1], grid, observer=lambda g: rows.append(metrics.snapshot_stats(g)),
        rng=derive_stream(params.seed, replica))
    return rows


def run_replicas(config: ExperimentConfig) -> ReplicaMatrix:
    params = config.params.model_params()
    grid = list(config.time_grid)
    indices = range(config.replicas)
    if config.workers > 1 and config.replicas > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_run_replica, [params] * config.replicas, indices,
                                 [grid] * config.replicas))
    else:
        rows = [_run_replica(params, r, grid) for r in indices]
    return ReplicaMatrix(grid, rows)


# --- verdict computations -----------------------------------------------------

@dataclass
class DistributionResult:
    t: int
    errors: dict[int, float]
    max_error: float


def degree_distribution_test(final: list[SnapshotStats], table: TheoryTable,
                             l_range: tuple[int, int] = (1, 20), law=None) -> DistributionResult:
    """Replica mean of ``N(l;t)/t`` against the limit law over ``l_range``.

    ``law`` overrides the reference values (a callable of ``l``); by default
    ``table.p`` is used.
    """
    t = final[0].t
    lo, hi = l_range
    errors = {}
    for ell in range(lo, hi + 1):
        emp = float(np.mean([s.degree_hist.get(ell, 0) / t for s in final]))
        ref = float(law(ell)) if law is not None else table.p_of(ell)
        errors[ell] = abs(emp - ref)
    return DistributionResult(t, errors, max(errors.values()))


def local_clustering_test(final: list[SnapshotStats], table: TheoryTable,
                          eps: float = LOCAL_CLUSTERING_EPS) -> float:
    """Fraction of replicas whose average local clustering reaches ``alpha p(2) - eps``."""
    bound = table.alpha * table.p_of(2) - eps
    return float(np.mean([s.c1 >= bound for s in final]))


@dataclass
class TriangleRateResult:
    deviations: list[float]
    mean_deviation: float


def triangle_rate_test(final: list[SnapshotStats], alpha: float) -> TriangleRateResult:
    dev = [abs(s.triangles / s.t - alpha) for s in final]
    return TriangleRateResult(dev, float(np.mean(dev)))


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float
    points: list[tuple[float, float]]
    profile: list[float] = field(default_factory=list)

    @property
    def flatness(self) -> float:
        """max/min of the log-corrected profile (critical-regime check)."""
        return max(self.profile) / min(self.profile)


OBSERVABLES = {"c2_mean": "c2", "triples_mean": "triples"}


def scaling_fit(matrix: ReplicaMatrix, observable: str, grid: list[int] | None = None) -> ScalingFit:
    """OLS slope of ``log(mean over replicas)`` against ``log t``.

    ``profile`` holds ``mean * ln t`` for ``c2_mean`` and ``mean / (t ln t)``
    for ``triples_mean``.
    """
    attr = OBSERVABLES[observable]
    grid = [t for t in (grid or matrix.times) if t > 1]
    if len(grid) < 4 or grid[-1] < 100 * grid[0]:
        raise ValueError("scaling fits need at least 4 grid points spanning 2 decades")
    means = [matrix.mean(attr, t) for t in grid]
    if min(means) <= 0:
        raise ValueError(f"non-positive mean {attr}; log fit impossible")
    slope, intercept, r2 = theory.loglog_slope(grid, means)
    if attr == "c2":
        profile = [m * math.log(t) for m, t in zip(means, grid)]
    else:
        profile = [m / (t * math.log(t)) for m, t in zip(means, grid)]
    points = [(math.log(t), math.log(m)) for t, m in zip(grid, means)]
    return ScalingFit(slope, intercept, r2, points, profile)


@dataclass
class Verdict:
    name: str
    passed: bool
    measured: float
    expected: float | list[float] | None
    tolerance: float | None
    detail: dict = field(default_factory=dict)


def _within(name, measured, expected, tol, **detail) -> Verdict:
    return Verdict(name, bool(abs(measured - expected) < tol), measured, expected, tol, detail)


def _scaling_verdicts(matrix: ReplicaMatrix, table: TheoryTable) -> list[Verdict]:
    grid = [t for t in matrix.times if t > 1]
    if len(grid) < 4 or grid[-1] < 100 * grid[0]:
        return []
    regime = table.regime
    pred = theory.predicted_scalings(table.alpha, table.delta)
    tol = SUPER_SLOPE_TOLERANCE if regime is Regime.SUPER else SLOPE_TOLERANCE
    observables = ["triples_mean"] + (["c2_mean"] if table.alpha > 0 else [])
    out = []
    for obs in observables:
        fit = scaling_fit(matrix, obs, grid)
        key = "c2" if obs == "c2_mean" else "triples"
        detail = {"slope": fit.slope, "r_squared": fit.r_squared, "profile": fit.profile,
                  "law": pred[key].law, "regime": regime.value}
        if regime is Regime.CRITICAL:
            lo, hi = FLATNESS_RANGE
            out.append(Verdict(f"{key}_scaling", lo <= fit.flatness <= hi, fit.flatness,
                               [lo, hi], None, detail))
        else:
            out.append(_within(f"{key}_scaling", fit.slope, pred[key].exponent, tol, **detail))
    return out


def evaluate(config: ExperimentConfig, matrix: ReplicaMatrix) -> list[Verdict]:
    p = config.params
    table = theory.degree_law(p.alpha, p.delta, max(config.l_range[1], 2))
    final = matrix.final()
    verdicts: list[Verdict] = []
    if final[0].t > 0:
        rate = triangle_rate_test(final, p.alpha)
        verdicts.append(Verdict("triangle_rate", rate.mean_deviation < TRIANGLE_RATE_MAX_DEVIATION,
                                rate.mean_deviation, 0.0, TRIANGLE_RATE_MAX_DEVIATION,
                                {"t": final[0].t}))
        dist = degree_distribution_test(final, table, config.l_range)
        verdicts.append(Verdict("degree_distribution", dist.max_error < DISTRIBUTION_MAX_ERROR,
                                dist.max_error, 0.0, DISTRIBUTION_MAX_ERROR,
                                {"t": dist.t, "errors": {str(k): v for k, v in dist.errors.items()}}))
        frac = local_clustering_test(final, table)
        verdicts.append(Verdict("local_clustering", frac >= LOCAL_CLUSTERING_MIN_FRACTION, frac,
                                LOCAL_CLUSTERING_MIN_FRACTION, None,
                                {"bound": table.alpha * table.p_of(2), "eps": LOCAL_CLUSTERING_EPS}))
    verdicts.extend(_scaling_verdicts(matrix, table))
    return verdicts


# --- report -------------------------------------------------------------------

def write_report(output_dir, config: ExperimentConfig | None = None,
                 matrix: ReplicaMatrix | None = None,
                 verdicts: list[Verdict] | None = None) -> Path:
    """Write ``stats.csv``, ``deghist_<t>.csv`` and ``verdict.json``; returns the verdict path.

    Everything except the ``generated_at`` field is a pure function of the
    inputs, so reruns overwrite files with identical bytes.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    verdicts = verdicts or []
    if matrix is not None:
        lines = ["replica," + ",".join(metrics.STATS_COLUMNS)]
        for r, row in enumerate(matrix.stats):
            for s in row:
                lines.append(f"{r}," + ",".join(metrics._fmt(getattr(s, c)) for c in metrics.STATS_COLUMNS))
        (out / "stats.csv").write_text("\n".join(lines) + "\n")
        for k, t in enumerate(matrix.times):
            body = ["replica,l,count"]
            for r, row in enumerate(matrix.stats):
                body += [f"{r},{ell},{c}" for ell, c in sorted(row[k].degree_hist.items())]
            (out / f"deghist_{t}.csv").write_text("\n".join(body) + "\n")
    report = {
        "config": config.model_dump(mode="json") if config is not None else None,
        "passed": all(v.passed for v in verdicts),
        "tests": [asdict(v) for v in verdicts],
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    path = out / "verdict.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return path


def run_experiment(config: ExperimentConfig) -> tuple[ReplicaMatrix, list[Verdict], Path]:
    matrix = run_replicas(config)
    verdicts = evaluate(config, matrix)
    path = write_report(config.output_dir, config, matrix, verdicts)
    return matrix, verdicts, path


def workers_from_env(default: int = 1) -> int:
    raw = os.environ.get("TRIADGRAPH_WORKERS")
    return int(raw) if raw else default
