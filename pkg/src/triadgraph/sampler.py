"""Exact-distribution random primitives for the growth process.

All draws go through a :class:`numpy.random.Generator` backed by PCG64
(128-bit state).  The jitted functions below accept that generator directly;
numba advances the same underlying bit generator, so Python-side and
kernel-side draws share one stream.

Bounded integer draws use ``Generator.integers``, which numpy (and numba's
port of it) implements with Lemire's rejection method, so there is no modulo
bias.
"""

from __future__ import annotations

import numba
import numpy as np

RandomStream = np.random.Generator

_MASK64 = (1 << 64) - 1


def derive_stream(base_seed: int, replica_index: int = 0) -> RandomStream:
    """Return the random stream for replica ``replica_index`` of ``base_seed``.

    The mapping is ``SeedSequence(entropy=base_seed, spawn_key=(replica_index,))``
    feeding a PCG64 bit generator.  SeedSequence hashes entropy and spawn key
    through its documented 32-bit-word mixing function into the 128-bit PCG64
    state and increment, so neighbouring replica indices give unrelated
    streams, and the result does not depend on how many streams were derived
    before.
    """
    if base_seed < 0 or base_seed > _MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {base_seed}")
    if replica_index < 0:
        raise ValueError(f"replica index must be non-negative, got {replica_index}")
    seq = np.random.SeedSequence(entropy=base_seed, spawn_key=(replica_index,))
    return np.random.Generator(np.random.PCG64(seq))


@numba.njit(cache=True)
def sample_uniform_edge(num_edges, rng):
    """Index of an edge drawn uniformly from ``0..num_edges-1``."""
    if num_edges < 1:
        raise ValueError("cannot sample an edge from an empty edge set")
    return rng.integers(0, num_edges)


@numba.njit(cache=True)
def sample_pa_vertex(degrees, endpoints, num_vertices, num_edges, delta, rng):
    """Draw vertex ``u`` with probability ``(d(u) + delta) / (2|E| + delta*n)``.

    For ``delta >= 0`` the law is a mixture: with probability
    ``2|E| / (2|E| + delta*n)`` a uniform slot of ``endpoints`` (degree-biased),
    otherwise a uniform vertex.  For ``-1 < delta < 0`` a uniform endpoint is
    proposed and accepted with probability ``(d(u) + delta) / d(u)``.
    """
    two_e = 2 * num_edges
    if delta >= 0.0:
        total = two_e + delta * num_vertices
        if rng.random() * total < two_e:
            return endpoints[rng.integers(0, two_e)]
        return rng.integers(0, num_vertices)
    while True:
        u = endpoints[rng.integers(0, two_e)]
        d = degrees[u]
        if rng.random() * d < d + delta:
            return u


@numba.njit(cache=True)
def sample_pa_vertex_rejection(degrees, endpoints, num_edges, delta, rng):
    """Rejection form of :func:`sample_pa_vertex`, valid for every ``delta > -1``.

    Proposes a uniform endpoint (law proportional to ``d``) and accepts with
    probability ``(d + delta) / (d * max(1, 1 + delta))``; the envelope holds
    because every vertex has degree at least 1.  Returns ``(vertex, trials)``.
    """
    two_e = 2 * num_edges
    scale = 1.0 + delta if delta > 0.0 else 1.0
    trials = 0
    while True:
        trials += 1
        u = endpoints[rng.integers(0, two_e)]
        d = degrees[u]
        if rng.random() * d * scale < d + delta:
            return u, trials


@numba.njit(cache=True)
def _pa_draw_counts(degrees, endpoints, num_vertices, num_edges, delta, rng, draws):
    counts = np.zeros(num_vertices, dtype=np.int64)
    for _ in range(draws):
        counts[sample_pa_vertex(degrees, endpoints, num_vertices, num_edges, delta, rng)] += 1
    return counts


@numba.njit(cache=True)
def _pa_rejection_draw_counts(degrees, endpoints, num_vertices, num_edges, delta, rng, draws):
    counts = np.zeros(num_vertices, dtype=np.int64)
    trials = 0
    for _ in range(draws):
        u, k = sample_pa_vertex_rejection(degrees, endpoints, num_edges, delta, rng)
        counts[u] += 1
        trials += k
    return counts, trials


@numba.njit(cache=True)
def _edge_draw_counts(num_edges, rng, draws):
    counts = np.zeros(num_edges, dtype=np.int64)
    for _ in range(draws):
        counts[sample_uniform_edge(num_edges, rng)] += 1
    return counts


def pa_draw_counts(degrees, endpoints, delta: float, rng: RandomStream, draws: int,
                   method: str = "default") -> np.ndarray:
    """Histogram of ``draws`` preferential-attachment draws, one bin per vertex.

    ``method`` is ``"default"`` (the mixture / rejection split used by the
    engine) or ``"rejection"`` (the envelope sampler, any ``delta``).
    """
    degrees = np.ascontiguousarray(degrees)
    endpoints = np.ascontiguousarray(endpoints)
    n = len(degrees)
    m = len(endpoints) // 2
    if method == "default":
        return _pa_draw_counts(degrees, endpoints, n, m, float(delta), rng, draws)
    if method == "rejection":
        return _pa_rejection_draw_counts(degrees, endpoints, n, m, float(delta), rng, draws)[0]
    raise ValueError(f"unknown sampling method {method!r}")


def mean_rejection_trials(degrees, endpoints, delta: float, rng: RandomStream, draws: int) -> float:
    degrees = np.ascontiguousarray(degrees)
    endpoints = np.ascontiguousarray(endpoints)
    _, trials = _pa_rejection_draw_counts(
        degrees, endpoints, len(degrees), len(endpoints) // 2, float(delta), rng, draws
    )
    return trials / draws


def edge_draw_counts(num_edges: int, rng: RandomStream, draws: int) -> np.ndarray:
    return _edge_draw_counts(num_edges, rng, draws)


def pa_probabilities(degrees, num_edges: int, delta: float) -> np.ndarray:
    """Exact target law ``(d + delta) / (2|E| + delta*n)`` as a float array."""
    d = np.asarray(degrees, dtype=np.float64)
    return (d + delta) / (2 * num_edges + delta * len(d))
