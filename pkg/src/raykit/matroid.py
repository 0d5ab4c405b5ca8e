"""Cycle-matroid rank for rayed graphs, axiom checks, minors, disposability.

Rank of an edge subset f is |V| minus the number of ray-free components of
(V, f), isolated vertices included. A component is ray-free iff none of its
vertices carries a ray. On ray-free graphs this is the classical graphic
rank; on rayed graphs rank(emptyset) equals the number of ray-carrying
vertices, and the classical cardinality bound holds for the shifted value
rank(f) - rank(emptyset).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Optional

from .graphs import (
    RayedGraph,
    components,
    edge_subgraph,
    has_cycle,
    ray_free_component_count,
    simple_cycles,
    span,
)


class RankOracle:
    """Memoizing rank oracle for one rayed graph.

    Cached values are immutable once computed; the cache is a bounded LRU
    keyed on sorted edge-id tuples, safe for concurrent readers.
    """

    def __init__(self, graph: RayedGraph, max_cache: int = 1_000_000):
        self.graph = graph
        self.ground_set = frozenset(graph.edge_ids)
        self._rank_of = lru_cache(maxsize=max_cache)(self._compute)

    def _compute(self, key: tuple[str, ...]) -> int:
        return len(self.graph.vertices) - ray_free_component_count(self.graph, key)

    def rank(self, f: Iterable[str]) -> int:
        key = tuple(sorted(set(f)))
        unknown = set(key) - self.ground_set
        if unknown:
            raise ValueError(f"unknown edge ids: {sorted(unknown)}")
        return self._rank_of(key)

    def full_rank(self) -> int:
        return self.rank(self.ground_set)

    def cache_info(self):
        return self._rank_of.cache_info()


@dataclass
class AxiomReport:
    """Outcome of verify_rank_axioms. `ok` iff all violation lists are empty."""

    edge_count: int
    exhaustive: bool
    pairs_checked: int
    cardinality_violations: list = field(default_factory=list)
    monotonicity_violations: list = field(default_factory=list)
    submodularity_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (
            self.cardinality_violations
            or self.monotonicity_violations
            or self.submodularity_violations
        )


_PAIR_EXHAUSTIVE_LIMIT = 10  # all 4^m subset pairs up to here
_SUBSET_EXHAUSTIVE_LIMIT = 14  # all subsets with local-axiom checks up to here
_SAMPLE_COUNT = 10_000


def _subset_rank_table(g: RayedGraph, edge_ids: list[str]) -> list[int]:
    """rank over every subset of edge_ids, indexed by bitmask.

    Component labels are built incrementally mask by mask; a component is
    ray-free iff none of its vertices carries a ray.
    """
    n = len(g.vertices)
    vidx = {v: i for i, v in enumerate(g.vertices)}
    rayed = [False] * n
    for at in g.rays.values():
        rayed[vidx[at]] = True
    ends = [(vidx[g.endpoints(e)[0]], vidx[g.endpoints(e)[1]]) for e in edge_ids]

    base_labels = tuple(range(n))
    labels: list[Optional[tuple]] = [None] * (1 << len(edge_ids))
    labels[0] = base_labels
    ranks = [0] * (1 << len(edge_ids))

    def rank_from(lab: tuple) -> int:
        ray_free = set(lab)
        for i, l in enumerate(lab):
            if rayed[i]:
                ray_free.discard(l)
        return n - len(ray_free)

    ranks[0] = rank_from(base_labels)
    for mask in range(1, 1 << len(edge_ids)):
        low = mask & (-mask)
        bit = low.bit_length() - 1
        prev = labels[mask ^ low]
        u, v = ends[bit]
        lu, lv = prev[u], prev[v]
        if lu == lv:
            lab = prev
        else:
            keep, drop = (lu, lv) if lu < lv else (lv, lu)
            lab = tuple(keep if x == drop else x for x in prev)
        labels[mask] = lab
        ranks[mask] = rank_from(lab)
    return ranks


def verify_rank_axioms(
    oracle: RankOracle,
    exhaustive_limit: int = _SUBSET_EXHAUSTIVE_LIMIT,
    samples: int = _SAMPLE_COUNT,
    seed: int = 0,
) -> AxiomReport:
    """Check the rank axioms and report violations.

    Cardinality is checked in the ray-normalized form
    rank(empty) <= rank(f) <= |f| + rank(empty), which is the classical bound
    0 <= rank(f) <= |f| on ray-free graphs. Monotonicity and submodularity
    are checked literally. Up to 10 edges every subset pair is checked; up to
    `exhaustive_limit` every subset is checked with the equivalent one- and
    two-element local forms; beyond that, `samples` random pairs.
    """
    g = oracle.graph
    edge_ids = sorted(oracle.ground_set)
    m = len(edge_ids)
    base = oracle.rank(())
    report = AxiomReport(edge_count=m, exhaustive=m <= exhaustive_limit, pairs_checked=0)

    def name(mask: int) -> list[str]:
        return [edge_ids[i] for i in range(m) if mask >> i & 1]

    if m <= exhaustive_limit:
        ranks = _subset_rank_table(g, edge_ids)
        # spot consistency with the memoized oracle
        assert ranks[0] == base and ranks[(1 << m) - 1] == oracle.rank(oracle.ground_set)
        for mask in range(1 << m):
            r = ranks[mask]
            if not (base <= r <= mask.bit_count() + base):
                report.cardinality_violations.append((name(mask), r, base))

    if m <= _PAIR_EXHAUSTIVE_LIMIT:
        total = 1 << m
        checked = 0
        for x in range(total):
            rx = ranks[x]
            for y in range(total):
                ry = ranks[y]
                if x & ~y == 0 and rx > ry:
                    report.monotonicity_violations.append((name(x), name(y), rx, ry))
                if rx + ry < ranks[x | y] + ranks[x & y]:
                    report.submodularity_violations.append((name(x), name(y)))
            checked += total
        report.pairs_checked = checked
    elif m <= exhaustive_limit:
        # Local forms, equivalent to the full pair axioms for set functions:
        # monotone iff r(f) <= r(f+e); submodular iff
        # r(f+e) + r(f+e') >= r(f+e+e') + r(f).
        checked = 0
        singles = [1 << i for i in range(m)]
        for f in range(1 << m):
            rf = ranks[f]
            free = [b for b in singles if not f & b]
            for b in free:
                checked += 1
                if rf > ranks[f | b]:
                    report.monotonicity_violations.append((name(f), name(f | b)))
            for i in range(len(free)):
                for j in range(i + 1, len(free)):
                    checked += 1
                    b, b2 = free[i], free[j]
                    if ranks[f | b] + ranks[f | b2] < ranks[f | b | b2] + rf:
                        report.submodularity_violations.append((name(f), name(f | b | b2)))
        report.pairs_checked = checked
    else:
        rng = random.Random(seed)
        for _ in range(samples):
            x = frozenset(e for e in edge_ids if rng.random() < 0.5)
            y = frozenset(e for e in edge_ids if rng.random() < 0.5)
            report.pairs_checked += 1
            for f in (x, y):
                r = oracle.rank(f)
                if not (base <= r <= len(f) + base):
                    report.cardinality_violations.append((sorted(f), r, base))
            rx, ry = oracle.rank(x), oracle.rank(y)
            if x <= y and rx > ry:
                report.monotonicity_violations.append((sorted(x), sorted(y), rx, ry))
            rxy = oracle.rank(x | y)
            if rx > rxy:
                report.monotonicity_violations.append((sorted(x), sorted(x | y), rx, rxy))
            if rx + ry < rxy + oracle.rank(x & y):
                report.submodularity_violations.append((sorted(x), sorted(y)))
    return report


def is_tame(g: RayedGraph, f: Iterable[str]) -> bool:
    """Every component of (V, f) carries at most two rays."""
    rays = list(g.rays.values())
    if len(rays) <= 2:
        return True
    for comp in components(g, f):
        if sum(1 for at in rays if at in comp) > 2:
            return False
    return True


def is_independent(oracle: RankOracle, f: Iterable[str]) -> bool:
    """Independent iff acyclic and tame.

    On ray-free graphs this coincides with rank(f) = |f|; on rayed graphs the
    rank identity is not asserted (see package docs).
    """
    fs = frozenset(f)
    unknown = fs - oracle.ground_set
    if unknown:
        raise ValueError(f"unknown edge ids: {sorted(unknown)}")
    return not has_cycle(oracle.graph, fs) and is_tame(oracle.graph, fs)


def _interior_ray_free_paths(
    g: RayedGraph, a: str, b: str, cap: int = 256
) -> list[frozenset]:
    """Simple a-b paths whose interior vertices carry no rays, as edge sets."""
    from .graphs import _all_simple_paths

    bad = set(g.rays.values()) - {a, b}
    return [frozenset(p) for p in _all_simple_paths(g, a, b, bad, set(g.edge_ids), cap=cap)]


def minimal_nontame_sets(g: RayedGraph) -> list[frozenset]:
    """Minimal acyclic edge sets with three rays in one component (tripods).

    Case analysis on the offending component's tree: a vertex carrying three
    rays makes the empty set non-tame already; a vertex with two rays needs
    only a ray-free-interior path to any other rayed vertex; otherwise the
    tree has exactly three one-ray leaves, so it is a path through a middle
    ray or a Y with a ray-free hub. Interior rays always yield a smaller
    dependent subset, so minimal sets have none.
    """
    counts: dict[str, int] = {}
    for at in g.rays.values():
        counts[at] = counts.get(at, 0) + 1
    if any(c >= 3 for c in counts.values()):
        return [frozenset()]
    if len(g.rays) < 3:
        return []

    out: set = set()
    doubles = sorted(v for v, c in counts.items() if c == 2)
    singles = sorted(v for v, c in counts.items() if c == 1)

    for x in doubles:
        for y in sorted(set(counts) - {x}):
            out.update(_interior_ray_free_paths(g, x, y))

    for x, y, z in combinations(singles, 3):
        for a, mid, b in ((x, y, z), (y, x, z), (x, z, y)):
            for p1 in _interior_ray_free_paths(g, a, mid):
                for p2 in _interior_ray_free_paths(g, mid, b):
                    t = p1 | p2
                    if not has_cycle(g, t):
                        out.add(t)
        for h in g.vertices:
            if h in counts:
                continue
            for p1 in _interior_ray_free_paths(g, x, h):
                for p2 in _interior_ray_free_paths(g, y, h):
                    if has_cycle(g, p1 | p2):
                        continue
                    for p3 in _interior_ray_free_paths(g, z, h):
                        t = p1 | p2 | p3
                        if not has_cycle(g, t):
                            out.add(t)
    return sorted(out, key=lambda s: (len(s), tuple(sorted(s))))


def circuits(oracle: RankOracle) -> tuple[frozenset, ...]:
    """Minimal dependent sets: simple cycles and tripods, each filtered
    against the other (a cycle through a tripod is not minimal). Sorted by
    size then ids.
    """
    g = oracle.graph
    candidates = set(simple_cycles(g)) | set(minimal_nontame_sets(g))
    out = [s for s in candidates if not any(o < s for o in candidates)]
    return tuple(sorted(out, key=lambda s: (len(s), tuple(sorted(s)))))


@dataclass(frozen=True)
class Minor:
    """Delete/contract minor with an acyclic normalized contract set."""

    base: RayedGraph
    deleted: frozenset
    contracted: frozenset
    quotient: RayedGraph
    vertex_projection: dict


def minor(g: RayedGraph, delete: Iterable[str], contract: Iterable[str]) -> Minor:
    """Delete `delete`, contract `contract` (normalized to a spanning forest
    of each contracted component; displaced edges join the deleted set).
    """
    d = set(delete)
    c = set(contract)
    if d & c:
        raise ValueError(f"delete and contract overlap: {sorted(d & c)}")
    unknown = (d | c) - set(g.edge_ids)
    if unknown:
        raise ValueError(f"unknown edge ids: {sorted(unknown)}")

    # spanning forest of the contract set
    parent = {v: v for v in g.vertices}

    def find(a: str) -> str:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    forest = set()
    for eid in sorted(c):
        u, v = g.endpoints(eid)
        ru, rv = find(u), find(v)
        if ru == rv:
            d.add(eid)
        else:
            parent[max(ru, rv)] = min(ru, rv)
            forest.add(eid)
    c = forest

    classes: dict[str, list[str]] = {}
    for v in g.vertices:
        classes.setdefault(find(v), []).append(v)
    projection = {v: find(v) for v in g.vertices}

    q_vertices = sorted(classes)
    q_edges = {}
    for eid, (u, v) in g.edges.items():
        if eid in d or eid in c:
            continue
        q_edges[eid] = (projection[u], projection[v])
    q_rays = {rid: projection[at] for rid, at in g.rays.items()}
    quotient = RayedGraph(q_vertices, q_edges, q_rays)
    return Minor(g, frozenset(d), frozenset(c), quotient, projection)


def disposable_edges(oracle: RankOracle, f: Iterable[str]) -> frozenset:
    """Edges e of f with rank(E) = rank(E minus e), E the oracle's ground set."""
    fs = frozenset(f)
    unknown = fs - oracle.ground_set
    if unknown:
        raise ValueError(f"unknown edge ids: {sorted(unknown)}")
    full = oracle.rank(oracle.ground_set)
    return frozenset(
        e for e in fs if oracle.rank(oracle.ground_set - {e}) == full
    )


def is_superfluous_analog(oracle: RankOracle, f: Iterable[str]) -> bool:
    """True iff every singleton of f is disposable."""
    fs = frozenset(f)
    return disposable_edges(oracle, fs) == fs


def standalone_oracle(g: RayedGraph, f: Iterable[str]) -> RankOracle:
    """Oracle for the subgraph (span(f), f) with its rays, used to evaluate
    forest properties of f as a graph in its own right."""
    return RankOracle(edge_subgraph(g, f, keep_rays=True))
