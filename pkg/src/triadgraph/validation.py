"""Oracle suites: fast-path vs brute-force statistics, sampler goodness of fit,
and agreement of the two triangle-step constructions at ``delta = 0``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import stats as sps

from . import metrics
from .engine import GrowthGraph, Mode, ModelParams, _advance, run
from .sampler import derive_stream, pa_draw_counts, pa_probabilities

SIGNIFICANCE = 1e-3

# (alpha, delta) per regime: Sub, Critical, Super, plus the alpha extremes
DEFAULT_GRID = ((0.3, 2.0), (0.5, 0.0), (0.1, -0.9), (0.0, 0.5), (1.0, 1.0))

SAMPLER_DELTAS = (-0.9, -0.5, 0.0, 1.0, 5.0)

# small growth graphs (0-indexed edge lists), at most six vertices
FIXED_GRAPHS = {
    "initial": [(0, 1)],
    "path": [(0, 1), (0, 2)],
    "triangle_pendant": [(0, 1), (0, 2), (1, 2), (0, 3)],
    "six_vertices": [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4), (2, 5)],
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


def differential_check(alpha: float, delta: float, t: int, seeds: int) -> CheckResult:
    """Incremental statistics equal brute-force recomputation on ``seeds`` runs."""
    failures = []
    for seed in range(seeds):
        g = run(ModelParams(alpha, delta, seed=seed), t)
        fast = metrics.snapshot_stats(g, joint=True)
        oracle = metrics.brute_force_stats(g)
        bad = metrics.stats_mismatches(fast, oracle)
        if fast.joint_hist != oracle.joint_hist:
            bad.append("joint_hist")
        if g.alpha_steps != oracle.triangles:
            bad.append("alpha_steps")
        if bad:
            failures.append({"seed": seed, "fields": bad})
    return CheckResult(f"differential alpha={alpha} delta={delta}", not failures,
                       {"t": t, "seeds": seeds, "failures": failures[:10]})


def chi_square_pvalue(counts, probabilities) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    expected = np.asarray(probabilities, dtype=np.float64) * counts.sum()
    if len(counts) < 2:
        return 1.0
    return float(sps.chisquare(counts, expected).pvalue)


def sampler_check(name: str, edges, delta: float, draws: int, seed: int,
                  method: str = "default") -> CheckResult:
    g = GrowthGraph.from_edges(ModelParams(0.0, 0.0), edges)
    counts = pa_draw_counts(g.degrees, g.endpoints, delta, derive_stream(seed), draws, method)
    probs = pa_probabilities(g.degrees, g.num_edges, delta)
    pval = chi_square_pvalue(counts, probs)
    return CheckResult(f"sampler {method} {name} delta={delta}", pval > SIGNIFICANCE,
                       {"pvalue": pval, "draws": draws})


def sampler_suite(draws: int = 1_000_000, seed: int = 2024) -> list[CheckResult]:
    out = []
    for i, (name, edges) in enumerate(FIXED_GRAPHS.items()):
        for j, delta in enumerate(SAMPLER_DELTAS):
            for method in ("default", "rejection"):
                out.append(sampler_check(name, edges, delta, draws, seed + 100 * i + 10 * j, method))
    return out


@numba.njit(cache=True)
def _one_step_outcomes(degrees, endpoints, tri_count, deg_count, head, nxt, ctr,
                       alpha, delta, two_stage, rng, trials):
    n = ctr[0] + 2
    counts = np.zeros((n + 1) * (n + 1), dtype=np.int64)
    log = np.zeros((1, 3), dtype=np.int64)
    for _ in range(trials):
        d, e, tc, dc = degrees.copy(), endpoints.copy(), tri_count.copy(), deg_count.copy()
        h, nx, c = head.copy(), nxt.copy(), ctr.copy()
        _advance(d, e, tc, dc, h, nx, c, 1, alpha, delta, two_stage, rng, log)
        u, w = log[0, 1], log[0, 2]
        if w >= 0 and w < u:
            u, w = w, u
        counts[(u + 1) * (n + 1) + (w + 1)] += 1
    return counts


def one_step_outcomes(g: GrowthGraph, rng, trials: int) -> np.ndarray:
    """Counts of single-step attachment outcomes from the fixed state ``g``.

    Bin ``(u+1)*(n+1) + (w+1)`` holds the outcome "joined to ``u`` and ``w``"
    (``w = -1`` for a single edge, ``u < w`` otherwise).
    """
    g.reserve(1)
    return _one_step_outcomes(g._degrees, g._endpoints, g._tri_count, g._deg_count,
                              g._head, g._nxt, g._ctr, g.params.alpha, g.params.delta,
                              g.params.mode is Mode.TWO_STAGE, rng, trials)


def construction_equivalence(name: str, edges, alpha: float, trials: int, seed: int) -> CheckResult:
    """Chi-square homogeneity of edge-choice vs two-stage one-step outcomes."""
    tables = []
    for k, mode in enumerate((Mode.EDGE_CHOICE, Mode.TWO_STAGE)):
        g = GrowthGraph.from_edges(ModelParams(alpha, 0.0, mode), edges)
        tables.append(one_step_outcomes(g, derive_stream(seed, k), trials))
    table = np.array(tables)
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        pval = 1.0
    else:
        pval = float(sps.chi2_contingency(table).pvalue)
    return CheckResult(f"two-stage equivalence {name} alpha={alpha}", pval > SIGNIFICANCE,
                       {"pvalue": pval, "trials": trials, "bins": int(table.shape[1])})


EQUIVALENCE_GRAPHS = ("path", "triangle_pendant", "six_vertices")


def run_validation(t: int, seeds: int, grid=DEFAULT_GRID, draws: int = 1_000_000,
                   trials: int = 100_000) -> list[CheckResult]:
    if t + 2 > metrics.BRUTE_FORCE_MAX_VERTICES:
        raise metrics.OracleSizeError(
            f"--t {t} exceeds the brute-force limit of {metrics.BRUTE_FORCE_MAX_VERTICES - 2} steps"
        )
    results = [differential_check(a, d, t, seeds) for a, d in grid]
    results += sampler_suite(draws)
    results += [construction_equivalence(name, FIXED_GRAPHS[name], 0.5, trials, 7 + k)
                for k, name in enumerate(EQUIVALENCE_GRAPHS)]
    return results
