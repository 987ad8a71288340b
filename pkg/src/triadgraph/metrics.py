"""Degree statistics and clustering coefficients of a growth graph.

The fast path reads the counters the engine maintains (degree histogram,
sum of squared degrees, per-vertex triangle counts) and never walks the edge
list.  :func:`brute_force_stats` recomputes the same quantities from an
adjacency-set view and serves as the differential oracle.
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field, fields
from itertools import combinations

import numba
import numpy as np

from .engine import GrowthGraph, Mode, ModelParams

BRUTE_FORCE_MAX_VERTICES = 10_000

STATS_COLUMNS = ("t", "num_edges", "triangles", "triples", "c1", "c2")


class UndefinedMetricError(ValueError):
    """Global clustering of a graph without connected triples."""


class GraphFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class OracleSizeError(ValueError):
    """Graph too large for the brute-force recomputation."""


@dataclass
class SnapshotStats:
    t: int
    num_edges: int
    degree_hist: dict[int, int]
    triangles: int
    triples: int
    c1: float
    c2: float
    joint_hist: dict[tuple[int, int], int] | None = field(default=None, compare=False)

    @property
    def num_vertices(self) -> int:
        return self.t + 2

    def row(self) -> dict:
        return {name: getattr(self, name) for name in STATS_COLUMNS}


def degree_histogram(g: GrowthGraph) -> dict[int, int]:
    counts = g.degree_counts
    nz = np.flatnonzero(counts)
    return {int(ell): int(counts[ell]) for ell in nz}


def local_clustering(g: GrowthGraph, v: int) -> float:
    d = int(g.degrees[v])
    if d < 2:
        return 0.0
    return int(g.tri_count[v]) / (d * (d - 1) / 2)


def c1_average_local(g: GrowthGraph) -> float:
    d = g.degrees.astype(np.float64)
    tri = g.tri_count.astype(np.float64)
    pairs = d * (d - 1) / 2
    local = np.divide(tri, pairs, out=np.zeros_like(tri), where=d >= 2)
    return float(local.sum() / g.num_vertices)


def connected_triples(g: GrowthGraph) -> int:
    """``sum_v C(d_v, 2)``, read off the running sum of squared degrees."""
    return g.sum_degree_squares // 2 - g.num_edges


def c2_global(g: GrowthGraph) -> float:
    triples = connected_triples(g)
    if triples == 0:
        raise UndefinedMetricError("global clustering is undefined without connected triples")
    return 3 * g.alpha_steps / triples


def joint_degree_histogram(g: GrowthGraph) -> dict[tuple[int, int], int]:
    """Edge degree pairs, each edge counted as both ``(l, m)`` and ``(m, l)``."""
    d = g.degrees.astype(np.int64)
    e = g.edges
    a, b = d[e[:, 0]], d[e[:, 1]]
    pairs = np.concatenate([np.stack([a, b], 1), np.stack([b, a], 1)])
    keys, counts = np.unique(pairs, axis=0, return_counts=True)
    return {(int(l), int(m)): int(c) for (l, m), c in zip(keys, counts)}


def snapshot_stats(g: GrowthGraph, joint: bool = False) -> SnapshotStats:
    triples = connected_triples(g)
    return SnapshotStats(
        t=g.num_steps,
        num_edges=g.num_edges,
        degree_hist=degree_histogram(g),
        triangles=g.alpha_steps,
        triples=triples,
        c1=c1_average_local(g),
        c2=3 * g.alpha_steps / triples if triples else math.nan,
        joint_hist=joint_degree_histogram(g) if joint else None,
    )


def brute_force_stats(g: GrowthGraph) -> SnapshotStats:
    """Recompute every observable from the edge list alone."""
    n = g.num_vertices
    if n > BRUTE_FORCE_MAX_VERTICES:
        raise OracleSizeError(
            f"brute force is limited to {BRUTE_FORCE_MAX_VERTICES} vertices, graph has {n}"
        )
    edge_list = [(int(u), int(w)) for u, w in g.edges]
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, w in edge_list:
        adj[u].add(w)
        adj[w].add(u)
    deg = [len(nb) for nb in adj]

    # each triangle is seen once from each of its three edges
    triangles = sum(len(adj[u] & adj[w]) for u, w in edge_list) // 3

    hist: dict[int, int] = {}
    for d in deg:
        hist[d] = hist.get(d, 0) + 1
    triples = sum(count * ell * (ell - 1) // 2 for ell, count in hist.items())

    local_sum = 0.0
    for v in range(n):
        if deg[v] < 2:
            continue
        links = sum(1 for a, b in combinations(adj[v], 2) if b in adj[a])
        local_sum += links / (deg[v] * (deg[v] - 1) / 2)

    joint: dict[tuple[int, int], int] = {}
    for u, w in edge_list:
        for key in ((deg[u], deg[w]), (deg[w], deg[u])):
            joint[key] = joint.get(key, 0) + 1

    return SnapshotStats(
        t=n - 2,
        num_edges=len(edge_list),
        degree_hist=dict(sorted(hist.items())),
        triangles=triangles,
        triples=triples,
        c1=local_sum / n,
        c2=3 * triangles / triples if triples else math.nan,
        joint_hist=joint,
    )


def stats_mismatches(fast: SnapshotStats, oracle: SnapshotStats, rel_tol: float = 1e-12) -> list[str]:
    """Names of fields on which two snapshots disagree (integers exactly)."""
    bad = []
    for f in fields(SnapshotStats):
        a, b = getattr(fast, f.name), getattr(oracle, f.name)
        if f.name == "joint_hist" and (a is None or b is None):
            continue
        if isinstance(a, float) or isinstance(b, float):
            if math.isnan(a) and math.isnan(b):
                continue
            if not math.isclose(a, b, rel_tol=rel_tol, abs_tol=rel_tol):
                bad.append(f.name)
        elif a != b:
            bad.append(f.name)
    return bad


# --- exact triangle counting for imported graphs ------------------------------

@numba.njit(cache=True)
def _triangle_counts(n, us, ws):
    deg = np.zeros(n, dtype=np.int64)
    for i in range(us.shape[0]):
        deg[us[i]] += 1
        deg[ws[i]] += 1
    # orient each edge towards the endpoint of higher (degree, id) rank
    out_deg = np.zeros(n, dtype=np.int64)
    for i in range(us.shape[0]):
        a, b = us[i], ws[i]
        if deg[a] > deg[b] or (deg[a] == deg[b] and a > b):
            a, b = b, a
        out_deg[a] += 1
    start = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        start[v + 1] = start[v] + out_deg[v]
    fill = start[:-1].copy()
    out = np.empty(us.shape[0], dtype=np.int64)
    for i in range(us.shape[0]):
        a, b = us[i], ws[i]
        if deg[a] > deg[b] or (deg[a] == deg[b] and a > b):
            a, b = b, a
        out[fill[a]] = b
        fill[a] += 1
    tri = np.zeros(n, dtype=np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    for u in range(n):
        for k in range(start[u], start[u + 1]):
            mark[out[k]] = u
        for k in range(start[u], start[u + 1]):
            w = out[k]
            for j in range(start[w], start[w + 1]):
                x = out[j]
                if mark[x] == u:
                    tri[u] += 1
                    tri[w] += 1
                    tri[x] += 1
    return tri


def triangle_counts(num_vertices: int, edges) -> np.ndarray:
    """Exact number of triangles through each vertex."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return _triangle_counts(num_vertices, np.ascontiguousarray(e[:, 0]), np.ascontiguousarray(e[:, 1]))


# --- text import --------------------------------------------------------------

_HEADER = re.compile(
    r"^#\s*alpha=(?P<alpha>\S+)\s+delta=(?P<delta>\S+)\s+mode=(?P<mode>\S+)"
    r"\s+seed=(?P<seed>\d+)\s+steps=(?P<steps>\d+)\s*$"
)


def import_graph(text: str) -> GrowthGraph:
    """Parse the text export format back into a :class:`GrowthGraph`."""
    params = steps = None
    edges: list[tuple[int, int]] = []
    linenos: list[int] = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m is None or params is not None:
                raise GraphFormatError(f"unknown header {line!r}", lineno)
            try:
                params = ModelParams(float(m["alpha"]), float(m["delta"]), Mode(m["mode"]), int(m["seed"]))
            except ValueError as exc:
                raise GraphFormatError(str(exc), lineno) from None
            steps = int(m["steps"])
            continue
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise GraphFormatError(f"expected '<u> <w>', got {line!r}", lineno)
        u, w = int(parts[0]), int(parts[1])
        if u < 1 or w < 1:
            raise GraphFormatError("vertex ids are 1-indexed", lineno)
        if u == w:
            raise GraphFormatError(f"self-loop on vertex {u}", lineno)
        edges.append((u - 1, w - 1))
        linenos.append(lineno)
    if params is None:
        raise GraphFormatError("missing '# alpha=... steps=...' header")
    if not edges:
        raise GraphFormatError("graph has no edges")

    arr = np.asarray(edges, dtype=np.int64)
    n = steps + 2
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keys = lo * n + hi
    _, first, counts = np.unique(keys, return_index=True, return_counts=True)
    if (counts > 1).any():
        dup_key = keys[first[np.argmax(counts > 1)]]
        second = np.flatnonzero(keys == dup_key)[1]
        raise GraphFormatError(f"duplicate edge {lo[second] + 1} {hi[second] + 1}", linenos[second])
    present = np.zeros(max(n, int(hi.max()) + 1), dtype=bool)
    present[arr.ravel()] = True
    if len(present) != n or not present.all():
        raise GraphFormatError(
            f"vertex ids must be exactly 1..{n} (steps={steps}); "
            f"found {int(present.sum())} distinct ids up to {len(present)}"
        )
    return GrowthGraph.from_edges(params, arr, triangle_counts(n, arr))


def read_graph(path) -> GrowthGraph:
    with open(path, encoding="ascii") as fh:
        return import_graph(fh.read())


# --- CSV rendering ------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def stats_csv(rows: list[SnapshotStats]) -> str:
    lines = [",".join(STATS_COLUMNS)]
    lines += [",".join(_fmt(getattr(s, c)) for c in STATS_COLUMNS) for s in rows]
    return "\n".join(lines) + "\n"


def degree_hist_csv(hist: dict[int, int]) -> str:
    return "l,count\n" + "".join(f"{ell},{c}\n" for ell, c in sorted(hist.items()))


def joint_hist_csv(joint: dict[tuple[int, int], int]) -> str:
    return "l,m,count\n" + "".join(f"{l},{m},{c}\n" for (l, m), c in sorted(joint.items()))
