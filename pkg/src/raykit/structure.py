"""Trifurcations, Voronoi cells over trifurcation seeds, and banana
decompositions with their quotient graphs.

Sides of a connected edge set A are the components left in A's ambient
component after deleting A's edges; span vertices stay behind, possibly
isolated. Adding edges to a connected set refines the remaining partition,
so the number of ray-carrying sides never drops: furcation order is upward
closed along connected supersets. Boundary vertices of an edge set are span
vertices touching an outside edge or carrying a ray; a banana is a connected
edge set with exactly two of them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .graphs import (
    RayedGraph,
    bfs_distances,
    component_edges,
    component_of,
    components,
    delete_vertices,
    is_connected_edge_set,
    is_weakly_n_connected,
    span,
    vertex_disjoint_paths,
)


def sides(g: RayedGraph, a: Iterable[str]) -> tuple[frozenset, ...]:
    """Components of the ambient component of `a` after deleting a's edges."""
    aset = frozenset(a)
    unknown = aset - set(g.edge_ids)
    if unknown:
        raise ValueError(f"unknown edge ids: {sorted(unknown)}")
    if not aset:
        raise ValueError("edge set must be nonempty")
    if not is_connected_edge_set(g, aset):
        raise ValueError("edge set must be connected")
    ambient = component_of(g, min(span(g, aset)))
    remaining = component_edges(g, ambient) - aset
    return tuple(c for c in components(g, remaining) if c <= ambient)


def ray_side_count(g: RayedGraph, a: Iterable[str]) -> int:
    rayed = set(g.rays.values())
    return sum(1 for s in sides(g, a) if s & rayed)


def is_n_furcation(g: RayedGraph, a: Iterable[str], n: int) -> bool:
    """True iff at least n sides of `a` carry a ray."""
    if n <= 0:
        return True
    return ray_side_count(g, a) >= n


def _order_key(order_index: dict, s: frozenset) -> tuple:
    return tuple(sorted(order_index[e] for e in s))


def _least_trifurcation_in_region(
    g: RayedGraph, region: frozenset, order_index: dict
) -> Optional[frozenset]:
    """Smallest-by-(size, ordering) trifurcation among subsets of `region`.

    `region` is the connected edge set of one free component. Furcation
    order is upward closed, so a trifurcation exists inside iff the whole
    region is one; the level search then terminates.
    """
    if not region or not is_n_furcation(g, region, 3):
        return None
    touching: dict[str, set] = {}
    for e in region:
        for v in g.endpoints(e):
            touching.setdefault(v, set()).add(e)
    level = sorted((frozenset([e]) for e in region), key=lambda s: _order_key(order_index, s))
    seen = set(level)
    while level:
        for s in level:
            if is_n_furcation(g, s, 3):
                return s
        nxt = set()
        for s in level:
            for v in span(g, s):
                for e in touching[v]:
                    if e not in s:
                        grown = s | {e}
                        if grown not in seen:
                            seen.add(grown)
                            nxt.add(grown)
        level = sorted(nxt, key=lambda s: _order_key(order_index, s))
    return None


def maximal_disjoint_trifurcations(
    g: RayedGraph, ordering: Optional[Sequence[str]] = None
) -> list[frozenset]:
    """Greedy inclusion-maximal family of pairwise vertex-disjoint
    trifurcations, preferring small sets early in `ordering` (edge ids;
    unlisted edges come last in sorted order). Returns [] with a warning
    when no component carries three rays.
    """
    rayed = list(g.rays.values())
    if not any(sum(1 for at in rayed if at in c) >= 3 for c in components(g)):
        warnings.warn("no trifurcation exists: every component has fewer than three rays")
        return []
    listed = list(ordering or [])
    order_index = {e: i for i, e in enumerate(listed)}
    for e in sorted(g.edge_ids):
        order_index.setdefault(e, len(order_index))

    chosen: list[frozenset] = []
    used: set = set()
    while True:
        free = delete_vertices(g, used)
        best = None
        for comp in components(free):
            region = component_edges(free, comp)
            t = _least_trifurcation_in_region(g, region, order_index)
            if t is not None and (
                best is None
                or (len(t), _order_key(order_index, t)) < (len(best), _order_key(order_index, best))
            ):
                best = t
        if best is None:
            return chosen
        chosen.append(best)
        used |= span(g, best)


@dataclass(frozen=True)
class CellPartition:
    """Voronoi cells over trifurcation seeds and the quotient multigraph.

    Quotient vertices are cell ids; every edge joining two cells keeps its
    id, and rays move to the cell of their attachment vertex.
    """

    graph: RayedGraph
    cells: dict
    seeds: dict
    quotient: RayedGraph

    def cell_of(self, v: str) -> str:
        for cid, vs in self.cells.items():
            if v in vs:
                return cid
        raise ValueError(f"vertex {v!r} not in any cell")


def voronoi_cells(
    g: RayedGraph,
    seeds: Sequence[Iterable[str]],
    priorities: Optional[Sequence[int]] = None,
) -> CellPartition:
    """Assign each vertex to the highest-priority nearest seed.

    Seeds are pairwise vertex-disjoint trifurcations; cell ids are c0, c1,
    ... in seed order, and ties go to the smallest priority value (defaults
    to seed position). Cells come out connected with each induced edge set a
    trifurcation; both are asserted.
    """
    seed_sets = [frozenset(s) for s in seeds]
    if not seed_sets:
        raise ValueError("at least one seed required")
    for i, s in enumerate(seed_sets):
        if not is_n_furcation(g, s, 3):
            raise ValueError(f"seed {i} is not a trifurcation")
    spans = [span(g, s) for s in seed_sets]
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            if spans[i] & spans[j]:
                raise ValueError(f"seeds {i} and {j} share vertices")
    prio = list(priorities) if priorities is not None else list(range(len(seed_sets)))
    if len(prio) != len(seed_sets):
        raise ValueError("one priority per seed")

    dists = [bfs_distances(g, sp) for sp in spans]
    assign: dict[str, int] = {}
    for v in g.vertices:
        best = min(
            ((d[v], prio[i], i) for i, d in enumerate(dists) if v in d),
            default=None,
        )
        if best is None:
            raise ValueError(f"vertex {v!r} unreachable from every seed")
        assign[v] = best[2]

    cells = {f"c{i}": frozenset(v for v, k in assign.items() if k == i) for i in range(len(seed_sets))}
    cells = {cid: vs for cid, vs in cells.items() if vs}
    seed_map = {f"c{i}": seed_sets[i] for i in range(len(seed_sets)) if f"c{i}" in cells}

    for cid, vs in cells.items():
        induced = frozenset(
            e for e in g.edge_ids if g.endpoints(e)[0] in vs and g.endpoints(e)[1] in vs
        )
        if not induced or not is_connected_edge_set(g, induced) or span(g, induced) != vs:
            raise RuntimeError(f"cell {cid} is not connected: bad seeds or priorities")
        if not is_n_furcation(g, induced, 3):
            raise RuntimeError(f"cell {cid} induces a non-trifurcation edge set")

    cell_of = {v: cid for cid, vs in cells.items() for v in vs}
    q_edges = {}
    for e in g.edge_ids:
        u, v = g.endpoints(e)
        if cell_of[u] != cell_of[v]:
            q_edges[e] = (cell_of[u], cell_of[v])
    q_rays = {rid: cell_of[at] for rid, at in g.rays.items()}
    quotient = RayedGraph(sorted(cells), q_edges, q_rays)
    return CellPartition(graph=g, cells=cells, seeds=seed_map, quotient=quotient)


@dataclass(frozen=True)
class BananaDecomposition:
    """Partition of the edges into maximal bananas plus the quotient.

    Quotient vertices are banana boundary vertices, one edge per banana
    between its boundary pair, rays carried over (interior vertices can
    never hold rays, so none are lost).
    """

    graph: RayedGraph
    bananas: dict
    boundaries: dict
    quotient: RayedGraph

    def banana_of(self, e: str) -> str:
        for bid, edges in self.bananas.items():
            if e in edges:
                return bid
        raise ValueError(f"edge {e!r} not in any banana")


def boundary_vertices(g: RayedGraph, subset: Iterable[str]) -> frozenset:
    """Span vertices incident to an outside edge or carrying a ray."""
    sub = set(subset)
    out = set()
    for v in span(g, sub):
        if g.ray_count_at(v) > 0 or any(e not in sub for e in g.incident(v)):
            out.add(v)
    return frozenset(out)


def enumerate_maximal_bananas(g: RayedGraph) -> BananaDecomposition:
    """Partition E into maximal bananas and build the quotient.

    Requires a loop-free, weakly 2-connected graph whose components all
    carry at least three rays. For each vertex pair {x, y} the largest
    banana with that boundary is the direct x-y edges together with the
    ray-free components of g - {x, y} (weak 2-connectivity attaches each of
    those to both x and y); each edge's maximal banana is the largest
    candidate containing it.
    """
    rayed = set(g.rays.values())
    for comp in components(g):
        if sum(1 for at in g.rays.values() if at in comp) < 3:
            raise ValueError("every component must carry at least three rays")
    if any(g.is_loop(e) for e in g.edge_ids):
        raise ValueError("loops are not supported")
    if not is_weakly_n_connected(g, 2):
        raise ValueError("graph must be weakly 2-connected")

    verts = list(g.vertices)
    candidates: dict[frozenset, tuple[str, str]] = {}
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            x, y = verts[i], verts[j]
            cand = {e for e in g.incident(x) if g.other_end(e, x) == y}
            h = delete_vertices(g, [x, y])
            for comp in components(h):
                if comp & rayed:
                    continue
                inner = {e for e in g.edge_ids if set(g.endpoints(e)) & comp}
                if inner:
                    cand |= inner
            if cand:
                candidates[frozenset(cand)] = (x, y)

    by_edge: dict[str, list[frozenset]] = {e: [] for e in g.edge_ids}
    for c in candidates:
        for e in c:
            by_edge[e].append(c)
    chosen: dict[frozenset, tuple[str, str]] = {}
    for e in sorted(g.edge_ids):
        best = max(by_edge[e], key=len)
        # Lemma 4.6/4.7 analog: the largest candidate through e contains all
        # others, so maximal bananas are well defined and edge-disjoint.
        for other in by_edge[e]:
            if not other <= best:
                raise RuntimeError(f"ambiguous maximal banana at edge {e!r}")
        chosen[best] = candidates[best]

    for b, bd in chosen.items():
        if boundary_vertices(g, b) != frozenset(bd):
            raise RuntimeError(f"banana boundary mismatch at {sorted(bd)}")
    total = sum(len(b) for b in chosen)
    if total != len(g.edge_ids):
        raise RuntimeError("bananas do not partition the edge set")

    ordered = sorted(chosen, key=lambda b: (candidates[b], tuple(sorted(b))))
    bananas = {f"b{i}": b for i, b in enumerate(ordered)}
    boundaries = {f"b{i}": candidates[b] for i, b in enumerate(ordered)}

    q_vertices = sorted({v for bd in boundaries.values() for v in bd})
    q_edges = {bid: boundaries[bid] for bid in bananas}
    q_rays = {rid: at for rid, at in g.rays.items() if at in set(q_vertices)}
    quotient = RayedGraph(q_vertices, q_edges, q_rays)
    return BananaDecomposition(graph=g, bananas=bananas, boundaries=boundaries, quotient=quotient)


def check_ban_weakly_3_connected(d: BananaDecomposition) -> bool:
    """Theorem conformance: the banana quotient is weakly 3-connected."""
    return is_weakly_n_connected(d.quotient, 3)


def path_through_edge_in_banana(d: BananaDecomposition, banana_id: str, edge_id: str) -> list[str]:
    """Simple boundary-to-boundary path inside the banana through edge_id.

    Built from two internally disjoint paths in an auxiliary graph where
    edge_id is subdivided and an extra vertex is joined to both boundary
    vertices; existence is guaranteed for valid decompositions.
    """
    g = d.graph
    edges = d.bananas[banana_id]
    if edge_id not in edges:
        raise ValueError(f"edge {edge_id!r} not in banana {banana_id!r}")
    x, y = d.boundaries[banana_id]

    mid, hub = "mid::aux", "hub::aux"
    while mid in g.vertices:
        mid += "+"
    while hub in g.vertices:
        hub += "+"
    u, v = g.endpoints(edge_id)
    aux_edges = {e: g.endpoints(e) for e in edges if e != edge_id}
    aux_edges["half1::aux"] = (u, mid)
    aux_edges["half2::aux"] = (mid, v)
    aux_edges["tox::aux"] = (x, hub)
    aux_edges["toy::aux"] = (y, hub)
    aux = RayedGraph(set(span(g, edges)) | {mid, hub}, aux_edges, {})

    paths = vertex_disjoint_paths(aux, mid, hub, 2)
    if paths is None:
        raise RuntimeError("no through-path: invalid banana decomposition")

    def to_boundary(p: list[str]) -> tuple[str, list[str]]:
        # strip the hub edge, translate halves back to edge_id
        last = p[-1]
        end = "x" if last == "tox::aux" else "y"
        body = [edge_id if e in ("half1::aux", "half2::aux") else e for e in p[:-1]]
        return end, body

    (end_a, body_a), (end_b, body_b) = to_boundary(paths[0]), to_boundary(paths[1])
    if end_a == end_b:
        raise RuntimeError("degenerate through-path: invalid banana decomposition")
    first = body_a if end_a == "x" else body_b
    second = body_b if end_a == "x" else body_a
    out = list(reversed(first)) + second
    # the two halves of edge_id collapse into one traversal
    dedup = [e for i, e in enumerate(out) if i == 0 or out[i - 1] != e]
    return dedup
