"""Growth process for preferential attachment with triangles.

Vertices are indexed ``0..n-1`` in creation order (index ``i`` is the
``(i+1)``-th vertex); the text export is 1-indexed.  Edges are stored only in
the flat ``endpoints`` array: edge ``i`` occupies slots ``2i`` (older vertex)
and ``2i+1`` (newer vertex), so a uniform slot is a degree-biased vertex and
``edges`` is a reshaped view of the same memory.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numba
import numpy as np

from .sampler import RandomStream, derive_stream, sample_pa_vertex

PA_STEP = 0
TRIANGLE_STEP = 1

# counters layout
_T, _E, _TRI, _SQ = 0, 1, 2, 3


class Mode(str, enum.Enum):
    EDGE_CHOICE = "edge_choice"
    TWO_STAGE = "two_stage"


class ParameterError(ValueError):
    """Model parameters outside their valid domain."""


class GraphAllocationError(MemoryError):
    """The graph arrays for the requested size could not be allocated."""


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    delta: float
    mode: Mode = Mode.EDGE_CHOICE
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        alpha, delta = float(self.alpha), float(self.delta)
        if not 0.0 <= alpha <= 1.0 or math.isnan(alpha):
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not delta > -1.0 or not math.isfinite(delta):
            raise ParameterError(f"delta must be a finite number > -1, got {self.delta}")
        if self.mode is Mode.TWO_STAGE and delta != 0.0:
            raise ParameterError("two_stage mode requires delta = 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class StepRecord:
    step_type: int
    targets: tuple[int, ...]

    @property
    def is_triangle(self) -> bool:
        return self.step_type == TRIANGLE_STEP


@numba.njit(cache=True, inline="always")
def _bump_degree(v, degrees, deg_count, ctr):
    d = degrees[v]
    deg_count[d] -= 1
    deg_count[d + 1] += 1
    ctr[_SQ] += 2 * d + 1
    degrees[v] = d + 1


@numba.njit(cache=True, inline="always")
def _add_edge(old, new, degrees, endpoints, deg_count, head, nxt, ctr):
    slot = 2 * ctr[_E]
    endpoints[slot] = old
    endpoints[slot + 1] = new
    if head.shape[0] > 0:
        nxt[slot] = head[old]
        head[old] = slot
        nxt[slot + 1] = head[new]
        head[new] = slot + 1
    ctr[_E] += 1
    _bump_degree(old, degrees, deg_count, ctr)
    _bump_degree(new, degrees, deg_count, ctr)


@numba.njit(cache=True)
def _advance(degrees, endpoints, tri_count, deg_count, head, nxt, ctr,
             num_steps, alpha, delta, two_stage, rng, log):
    """Apply ``num_steps`` growth steps in place; optionally fill ``log``."""
    logging = log.shape[0] > 0
    for i in range(num_steps):
        new = ctr[_T] + 2
        deg_count[0] += 1
        num_edges = ctr[_E]
        triangle = False
        if two_stage:
            u = endpoints[rng.integers(0, 2 * num_edges)]
            w = -1
            if rng.random() < alpha:
                # walk u's incidence list to a uniformly chosen neighbour
                j = rng.integers(0, degrees[u])
                s = head[u]
                for _ in range(j):
                    s = nxt[s]
                w = endpoints[s ^ 1]
                triangle = True
        elif rng.random() < alpha:
            e = rng.integers(0, num_edges)
            u = endpoints[2 * e]
            w = endpoints[2 * e + 1]
            triangle = True
        else:
            u = sample_pa_vertex(degrees, endpoints, new, num_edges, delta, rng)
            w = -1

        _add_edge(u, new, degrees, endpoints, deg_count, head, nxt, ctr)
        if triangle:
            _add_edge(w, new, degrees, endpoints, deg_count, head, nxt, ctr)
            tri_count[u] += 1
            tri_count[w] += 1
            tri_count[new] += 1
            ctr[_TRI] += 1
        ctr[_T] += 1
        if logging:
            log[i, 0] = TRIANGLE_STEP if triangle else PA_STEP
            log[i, 1] = u
            log[i, 2] = w


def _index_dtype(num_steps: int):
    # endpoint slots reach 2 * (2t + 1)
    return np.int32 if 4 * num_steps + 2 < np.iinfo(np.int32).max else np.int64


class GrowthGraph:
    """Append-only state of one growing graph.

    Array attributes are views of length ``num_vertices`` / ``2*num_edges``
    into preallocated buffers; treat them as read-only.
    """

    def __init__(self, params: ModelParams, capacity: int = 16):
        self.params = params
        self._incidence = params.mode is Mode.TWO_STAGE
        self._ctr = np.zeros(4, dtype=np.int64)
        self._alloc(max(int(capacity), 1))
        # G(0): one edge between the two initial vertices
        self._degrees[:2] = 1
        self._endpoints[:2] = (0, 1)
        self._deg_count[1] = 2
        self._ctr[_E] = 1
        self._ctr[_SQ] = 2
        if self._incidence:
            self._head[:2] = (0, 1)

    def _alloc(self, capacity: int):
        dtype = _index_dtype(capacity)
        n_cap = capacity + 2
        slot_cap = 2 * (2 * capacity + 1)
        try:
            degrees = np.zeros(n_cap, dtype=dtype)
            endpoints = np.zeros(slot_cap, dtype=dtype)
            tri_count = np.zeros(n_cap, dtype=dtype)
            deg_count = np.zeros(n_cap + 1, dtype=np.int64)
            if self._incidence:
                head = np.full(n_cap, -1, dtype=dtype)
                nxt = np.full(slot_cap, -1, dtype=dtype)
            else:
                head = np.zeros(0, dtype=dtype)
                nxt = np.zeros(0, dtype=dtype)
        except MemoryError as exc:
            raise GraphAllocationError(
                f"cannot allocate graph arrays for {capacity} steps"
            ) from exc
        if hasattr(self, "_degrees"):
            n, s = self.num_vertices, 2 * self.num_edges
            degrees[:n] = self._degrees[:n]
            endpoints[:s] = self._endpoints[:s]
            tri_count[:n] = self._tri_count[:n]
            deg_count[: len(self._deg_count)] = self._deg_count
            if self._incidence:
                head[:n] = self._head[:n]
                nxt[:s] = self._nxt[:s]
        self._degrees, self._endpoints, self._tri_count = degrees, endpoints, tri_count
        self._deg_count, self._head, self._nxt = deg_count, head, nxt
        self.capacity = capacity

    def _fits(self, more_steps: int) -> bool:
        return (self.num_steps + more_steps <= self.capacity
                and self.num_edges + 2 * more_steps <= 2 * self.capacity + 1)

    def reserve(self, more_steps: int):
        """Make room for ``more_steps`` further steps without reallocating."""
        if not self._fits(more_steps):
            extra = max(0, self.num_edges - 2 * self.num_steps - 1)
            self._alloc(self.num_steps + more_steps + (extra + 1) // 2)

    # --- read views -------------------------------------------------------

    @property
    def num_steps(self) -> int:
        return int(self._ctr[_T])

    @property
    def num_vertices(self) -> int:
        return int(self._ctr[_T]) + 2

    @property
    def num_edges(self) -> int:
        return int(self._ctr[_E])

    @property
    def alpha_steps(self) -> int:
        return int(self._ctr[_TRI])

    @property
    def sum_degree_squares(self) -> int:
        return int(self._ctr[_SQ])

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees[: self.num_vertices]

    @property
    def endpoints(self) -> np.ndarray:
        return self._endpoints[: 2 * self.num_edges]

    @property
    def edges(self) -> np.ndarray:
        return self.endpoints.reshape(-1, 2)

    @property
    def tri_count(self) -> np.ndarray:
        return self._tri_count[: self.num_vertices]

    @property
    def degree_counts(self) -> np.ndarray:
        """Dense ``N(l)`` array indexed by degree, up to the maximum degree."""
        top = int(np.flatnonzero(self._deg_count)[-1]) if self.num_vertices else 0
        return self._deg_count[: top + 1]

    # --- mutation ---------------------------------------------------------

    def advance(self, num_steps: int, rng: RandomStream, record: bool = False):
        """Apply ``num_steps`` steps; returns an ``(num_steps, 3)`` log if asked."""
        if num_steps <= 0:
            return np.zeros((0, 3), dtype=np.int64) if record else None
        if not self._fits(num_steps):
            self.reserve(max(num_steps, self.capacity))
        log = np.zeros((num_steps if record else 0, 3), dtype=np.int64)
        _advance(self._degrees, self._endpoints, self._tri_count, self._deg_count,
                 self._head, self._nxt, self._ctr, num_steps,
                 self.params.alpha, self.params.delta, self._incidence, rng, log)
        return log if record else None

    def copy(self) -> "GrowthGraph":
        other = GrowthGraph.__new__(GrowthGraph)
        other.params = self.params
        other._incidence = self._incidence
        other.capacity = self.capacity
        other._ctr = self._ctr.copy()
        for name in ("_degrees", "_endpoints", "_tri_count", "_deg_count", "_head", "_nxt"):
            setattr(other, name, getattr(self, name).copy())
        return other

    @classmethod
    def from_edges(cls, params: ModelParams, edges: Sequence[tuple[int, int]],
                   tri_count: Iterable[int] | None = None) -> "GrowthGraph":
        """Static graph from 0-indexed edges, e.g. a fixture or an imported file.

        ``tri_count`` defaults to zero per vertex; callers that need exact
        triangle counts compute them (see ``metrics.triangle_counts``).
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(edges) == 0:
            raise ValueError("a growth graph has at least one edge")
        n = int(edges.max()) + 1
        if n < 2:
            raise ValueError("a growth graph has at least two vertices")
        g = cls(params, capacity=max(n - 2, len(edges) // 2) + 16)
        g._degrees[:] = 0
        g._deg_count[:] = 0
        if g._incidence:
            g._head[:] = -1
            g._nxt[:] = -1
        g._endpoints[: 2 * len(edges)] = edges.ravel()
        degrees = np.bincount(edges.ravel(), minlength=n)
        g._degrees[:n] = degrees
        np.add.at(g._deg_count, degrees, 1)
        if g._incidence:
            for slot, v in enumerate(edges.ravel()):
                g._nxt[slot] = g._head[v]
                g._head[v] = slot
        tri = np.zeros(n, dtype=np.int64) if tri_count is None else np.asarray(list(tri_count))
        g._tri_count[:n] = tri
        g._ctr[:] = (n - 2, len(edges), int(tri.sum()) // 3, int((degrees.astype(np.int64) ** 2).sum()))
        return g


def new_graph(params: ModelParams) -> GrowthGraph:
    return GrowthGraph(params)


def step(g: GrowthGraph, rng: RandomStream) -> StepRecord:
    """One growth step, using the construction selected by ``g.params.mode``."""
    kind, u, w = g.advance(1, rng, record=True)[0]
    targets = (int(u),) if kind == PA_STEP else (int(u), int(w))
    return StepRecord(int(kind), targets)


def step_two_stage(g: GrowthGraph, rng: RandomStream) -> StepRecord:
    if g.params.mode is not Mode.TWO_STAGE:
        raise ParameterError("step_two_stage needs a graph in two_stage mode")
    return step(g, rng)


@dataclass
class RunResult:
    graph: GrowthGraph
    steps: np.ndarray | None = field(default=None, repr=False)


def run(params: ModelParams, t_final: int,
        snapshot_times: Sequence[int] = (),
        observer: Callable[[GrowthGraph], None] | None = None,
        rng: RandomStream | None = None,
        record_steps: bool = False) -> GrowthGraph | RunResult:
    """Grow G(t_final), calling ``observer(graph)`` at each snapshot time.

    The stream defaults to ``derive_stream(params.seed, 0)``.  With
    ``record_steps`` a :class:`RunResult` carrying the ``(t, 3)`` step log
    (type, first target, second target or -1) is returned instead of the bare
    graph.
    """
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    times = sorted(set(int(s) for s in snapshot_times))
    if times and (times[0] < 0 or times[-1] > t_final):
        raise ValueError(f"snapshot times must lie in [0, {t_final}]")
    if rng is None:
        rng = derive_stream(params.seed, 0)
    g = GrowthGraph(params, capacity=max(t_final, 1))
    logs = []
    for s in times:
        logs.append(g.advance(s - g.num_steps, rng, record=record_steps))
        if observer is not None:
            observer(g)
    logs.append(g.advance(t_final - g.num_steps, rng, record=record_steps))
    if record_steps:
        return RunResult(g, np.concatenate(logs))
    return g


# --- text export --------------------------------------------------------------

@numba.njit(cache=True)
def _format_pairs(flat, start, stop):
    """ASCII ``"<u+1> <w+1>\\n"`` lines for edges ``start..stop-1``."""
    buf = np.empty((stop - start) * 42, dtype=np.uint8)
    digits = np.empty(20, dtype=np.uint8)
    pos = 0
    for e in range(start, stop):
        for side in range(2):
            x = flat[2 * e + side] + 1
            k = 0
            while True:
                digits[k] = 48 + x % 10
                x //= 10
                k += 1
                if x == 0:
                    break
            for j in range(k - 1, -1, -1):
                buf[pos] = digits[j]
                pos += 1
            buf[pos] = 32 if side == 0 else 10
            pos += 1
    return buf[:pos]


def export_header(g: GrowthGraph) -> str:
    p = g.params
    return (f"# alpha={p.alpha!r} delta={p.delta!r} mode={p.mode.value} "
            f"seed={p.seed} steps={g.num_steps}\n")


def write_graph(g: GrowthGraph, out, chunk: int = 1 << 20) -> None:
    """Write ``g`` in the text export format to a path or binary file object."""
    if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
        with open(out, "wb") as fh:
            write_graph(g, fh, chunk)
        return
    out.write(export_header(g).encode())
    flat = g.endpoints
    for start in range(0, g.num_edges, chunk):
        out.write(_format_pairs(flat, start, min(start + chunk, g.num_edges)).tobytes())


def export_graph(g: GrowthGraph) -> str:
    flat = g.endpoints
    return export_header(g) + _format_pairs(flat, 0, g.num_edges).tobytes().decode()
