"""Random k-uniform hypergraphs: sampling, 2-core peeling, text format.

Vertices are 1-based.  Edges are strictly increasing k-tuples and the
*order* of the edge list is meaningful: it is the order in which the
stochastic process consumes columns, and every sampler returns a uniformly
random order together with the uniformly random edge set.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _rng
from .errors import BudgetError, ParameterError

# The G(n,p) sampler compares one uniform word per possible edge against a
# rational threshold, which is distributionally exact.  Past this many
# possible edges it falls back to numpy's float-parameter binomial for the
# edge *count* (the relative error of that fallback, ~1e-16 on p, is far
# below anything observable at desk scale).
_EXACT_BINOMIAL_LIMIT = 1 << 26

# Sampling m > C(n,k)/2 distinct edges materialises the complement, which
# needs the full rank range in memory.
_DENSE_ENUMERATION_LIMIT = 1 << 24

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Hypergraph:
    """A k-uniform hypergraph on vertex set {1, ..., n} with ordered edges."""

    n: int
    k: int
    edges: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise ParameterError(f"vertex count must be >= 0, got {self.n}")
        if self.k < 2:
            raise ParameterError(f"uniformity must be >= 2, got {self.k}")
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        seen = set()
        for e in self.edges:
            if len(e) != self.k:
                raise ParameterError(f"edge {e} does not have {self.k} vertices")
            if any(e[i] >= e[i + 1] for i in range(len(e) - 1)):
                raise ParameterError(f"edge {e} is not strictly increasing")
            if e[0] < 1 or e[-1] > self.n:
                raise ParameterError(f"edge {e} leaves the vertex range [1, {self.n}]")
            if e in seen:
                raise ParameterError(f"duplicate edge {e}")
            seen.add(e)

    @property
    def m(self) -> int:
        return len(self.edges)


def degree_profile(h: Hypergraph) -> dict[int, int]:
    """Exact vertex -> incidence count, zero-degree vertices included."""
    deg = {v: 0 for v in range(1, h.n + 1)}
    for e in h.edges:
        for v in e:
            deg[v] += 1
    return deg


def _check_nk(n, k):
    if k < 2:
        raise ParameterError(f"uniformity must be >= 2, got {k}")
    if n < k:
        raise ParameterError(f"need n >= k, got n={n}, k={k}")


def _as_probability(p) -> Fraction:
    try:
        frac = Fraction(p)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParameterError(f"cannot read {p!r} as a probability") from exc
    if not 0 <= frac <= 1:
        raise ParameterError(f"probability {frac} outside [0, 1]")
    return frac


def unrank_colex(rank, k):
    """The k-subset of {0, 1, ...} with colexicographic rank `rank`."""
    out = []
    for i in range(k, 0, -1):
        # largest c with C(c, i) <= rank, by doubling + bisection
        lo, hi = i - 1, max(i, 1)
        while math.comb(hi, i) <= rank:
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if math.comb(mid, i) <= rank:
                lo = mid
            else:
                hi = mid
        out.append(lo)
        rank -= math.comb(lo, i)
    out.reverse()
    return out


def rank_colex(subset) -> int:
    """Colexicographic rank of a strictly increasing 0-based k-subset."""
    return sum(math.comb(c, i + 1) for i, c in enumerate(subset))


def _binomial_count(rng, total, p: Fraction) -> int:
    a, b = p.numerator, p.denominator
    if a == 0:
        return 0
    if a == b:
        return total
    if total <= _EXACT_BINOMIAL_LIMIT and b <= _MASK64:
        count = 0
        left = total
        while left:
            size = min(left, 1 << 20)
            draws = rng.integers(0, b, size=size, dtype=np.uint64)
            count += int((draws < a).sum())
            left -= size
        return count
    return int(rng.binomial(total, float(p)))


def _sample_distinct_ranks(rng, total, m):
    """m distinct uniform ranks from range(total), in uniform random order."""
    if m == 0:
        return []
    if 2 * m <= total:
        # Sequential rejection gives a uniform subset in uniform order.
        seen = set()
        out = []
        while len(out) < m:
            r = _rng.randbelow(rng, total)
            if r not in seen:
                seen.add(r)
                out.append(r)
        return out
    if total > _DENSE_ENUMERATION_LIMIT:
        raise BudgetError(
            f"sampling {m} of {total} edges would materialise the whole edge "
            f"range; that exceeds the dense-sampling limit {_DENSE_ENUMERATION_LIMIT}"
        )
    # Dense regime: reject the complement, then shuffle what is kept.
    drop = set()
    while len(drop) < total - m:
        drop.add(_rng.randbelow(rng, total))
    kept = [r for r in range(total) if r not in drop]
    return _rng.shuffled(rng, kept)


def sample_gnm(n, k, m, seed, trial_id=0) -> Hypergraph:
    """Uniformly random hypergraph with exactly m edges.

    The edge list order is itself uniformly random: the prefix of length j
    is distributed as a sample with exactly j edges, which is what the
    stochastic process consumes.
    """
    _check_nk(n, k)
    total = math.comb(n, k)
    if not 0 <= m <= total:
        raise ParameterError(f"edge count {m} outside [0, C({n},{k})={total}]")
    rng = _rng.stream(seed, trial_id)
    ranks = _sample_distinct_ranks(rng, total, m)
    edges = tuple(tuple(v + 1 for v in unrank_colex(r, k)) for r in ranks)
    return Hypergraph(n, k, edges)


def sample_gnp(n, k, p, seed, trial_id=0) -> Hypergraph:
    """Each of the C(n,k) possible edges kept independently with probability p.

    p is handled as an exact rational; the included edges appear in
    uniformly random order.
    """
    _check_nk(n, k)
    frac = _as_probability(p)
    rng = _rng.stream(seed, trial_id)
    total = math.comb(n, k)
    m = _binomial_count(rng, total, frac)
    ranks = _sample_distinct_ranks(rng, total, m)
    edges = tuple(tuple(v + 1 for v in unrank_colex(r, k)) for r in ranks)
    return Hypergraph(n, k, edges)


@dataclass(frozen=True)
class RandomSpec:
    """How to draw one hypergraph: edge probability ("p") or exact edge
    count ("m"), plus the (seed, trial_id) pair that fully determines the
    sample."""

    kind: str
    value: object
    seed: int
    trial_id: int = 0

    def __post_init__(self):
        if self.kind not in ("p", "m"):
            raise ParameterError(f"kind must be 'p' or 'm', got {self.kind!r}")
        if self.kind == "p":
            object.__setattr__(self, "value", _as_probability(self.value))
        else:
            object.__setattr__(self, "value", int(self.value))
        if self.trial_id < 0:
            raise ParameterError("trial_id must be non-negative")

    def sample(self, n, k) -> Hypergraph:
        if self.kind == "p":
            return sample_gnp(n, k, self.value, self.seed, self.trial_id)
        return sample_gnm(n, k, self.value, self.seed, self.trial_id)


def two_core(h: Hypergraph) -> tuple[Hypergraph, int]:
    """Iteratively delete vertices lying in fewer than two edges.

    Deleting a degree-1 vertex removes its edge as well and leaves the
    cokernel of the incidence matrix untouched; deleting a degree-0 vertex
    drops one free factor.  Returns the (relabelled) maximal sub-hypergraph
    in which every surviving vertex has degree >= 2, together with the
    count of vertices that had degree zero at deletion time.

    The deletion schedule is lowest-vertex-first for byte-identical
    results; the core itself is schedule-independent.
    """
    degree = [0] * (h.n + 1)
    incident = [[] for _ in range(h.n + 1)]
    for j, e in enumerate(h.edges):
        for v in e:
            degree[v] += 1
            incident[v].append(j)
    edge_alive = [True] * h.m
    vertex_alive = [False] + [True] * h.n
    heap = [v for v in range(1, h.n + 1) if degree[v] < 2]
    heapq.heapify(heap)
    isolated = 0
    while heap:
        v = heapq.heappop(heap)
        if not vertex_alive[v] or degree[v] >= 2:
            continue
        vertex_alive[v] = False
        if degree[v] == 0:
            isolated += 1
            continue
        j = next(i for i in incident[v] if edge_alive[i])
        edge_alive[j] = False
        for u in h.edges[j]:
            degree[u] -= 1
            if u != v and vertex_alive[u] and degree[u] < 2:
                heapq.heappush(heap, u)
    kept = [v for v in range(1, h.n + 1) if vertex_alive[v]]
    relabel = {v: i + 1 for i, v in enumerate(kept)}
    core_edges = tuple(
        tuple(relabel[u] for u in h.edges[j])
        for j in range(h.m)
        if edge_alive[j]
    )
    return Hypergraph(len(kept), h.k, core_edges), isolated


def to_text(h: Hypergraph) -> str:
    """Serialise: header "n k m", then one edge per line in process order."""
    lines = [f"{h.n} {h.k} {h.m}"]
    lines.extend(" ".join(map(str, e)) for e in h.edges)
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Hypergraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParameterError("empty hypergraph text")
    header = lines[0].split()
    if len(header) != 3:
        raise ParameterError(f"bad header {lines[0]!r}, expected 'n k m'")
    try:
        n, k, m = (int(x) for x in header)
    except ValueError as exc:
        raise ParameterError(f"bad header {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise ParameterError(f"header promises {m} edges, found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        try:
            edges.append(tuple(int(x) for x in ln.split()))
        except ValueError as exc:
            raise ParameterError(f"bad edge line {ln!r}") from exc
    return Hypergraph(n, k, tuple(edges))
