"""Finite multigraphs with ray markers.

A ray marker stands for one end of an infinite graph that was truncated to a
finite one. Rays attach to vertices; they are not edges and never participate
in cycles, edge bijections, or rank ground sets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional


def _check_id(kind: str, value: object) -> str:
    if not isinstance(value, str) or not value:
        raise ValueError(f"{kind} id must be a nonempty string, got {value!r}")
    return value


class RayedGraph:
    """Immutable finite multigraph plus rays.

    Vertices, edges and rays are identified by opaque nonempty strings.
    Loops and parallel edges are allowed. Endpoint pairs are unordered.
    A plain multigraph is a RayedGraph with no rays.
    """

    __slots__ = ("_vertices", "_edges", "_rays", "_incident", "_hash")

    def __init__(
        self,
        vertices: Iterable[str],
        edges: Mapping[str, tuple[str, str]],
        rays: Optional[Mapping[str, str]] = None,
    ):
        vs = sorted({_check_id("vertex", v) for v in vertices})
        vset = set(vs)
        es = {}
        for eid in sorted(edges):
            u, v = edges[eid]
            _check_id("edge", eid)
            if u not in vset or v not in vset:
                raise ValueError(f"edge {eid!r} endpoint missing from vertex set")
            es[eid] = (u, v) if u <= v else (v, u)
        rs = {}
        for rid in sorted(rays or {}):
            at = (rays or {})[rid]
            _check_id("ray", rid)
            if at not in vset:
                raise ValueError(f"ray {rid!r} attached to missing vertex {at!r}")
            rs[rid] = at
        self._vertices = tuple(vs)
        self._edges = es
        self._rays = rs
        inc: dict[str, list[str]] = {v: [] for v in vs}
        for eid, (u, v) in es.items():
            inc[u].append(eid)
            if v != u:
                inc[v].append(eid)
        self._incident = {v: tuple(sorted(ids)) for v, ids in inc.items()}
        self._hash: Optional[int] = None

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(self._edges)

    @property
    def edges(self) -> dict[str, tuple[str, str]]:
        return dict(self._edges)

    @property
    def rays(self) -> dict[str, str]:
        return dict(self._rays)

    def endpoints(self, eid: str) -> tuple[str, str]:
        return self._edges[eid]

    def has_vertex(self, v: str) -> bool:
        return v in self._incident

    def has_edge(self, eid: str) -> bool:
        return eid in self._edges

    def incident(self, v: str) -> tuple[str, ...]:
        """Edge ids at v, sorted. A loop appears once."""
        return self._incident[v]

    def degree(self, v: str) -> int:
        """Loops count twice."""
        d = 0
        for eid in self._incident[v]:
            u, w = self._edges[eid]
            d += 2 if u == w else 1
        return d

    def rays_at(self, v: str) -> tuple[str, ...]:
        return tuple(rid for rid, at in self._rays.items() if at == v)

    def ray_count_at(self, v: str) -> int:
        return sum(1 for at in self._rays.values() if at == v)

    def is_loop(self, eid: str) -> bool:
        u, v = self._edges[eid]
        return u == v

    def other_end(self, eid: str, v: str) -> str:
        u, w = self._edges[eid]
        if v == u:
            return w
        if v == w:
            return u
        raise ValueError(f"vertex {v!r} is not an endpoint of edge {eid!r}")

    def replace(
        self,
        vertices: Optional[Iterable[str]] = None,
        edges: Optional[Mapping[str, tuple[str, str]]] = None,
        rays: Optional[Mapping[str, str]] = None,
    ) -> "RayedGraph":
        return RayedGraph(
            self._vertices if vertices is None else vertices,
            self._edges if edges is None else edges,
            self._rays if rays is None else rays,
        )

    def __eq__(self, other: object):
        if not isinstance(other, RayedGraph):
            return NotImplemented
        return (
            self._vertices == other._vertices
            and self._edges == other._edges
            and self._rays == other._rays
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(
                (
                    self._vertices,
                    tuple(sorted(self._edges.items())),
                    tuple(sorted(self._rays.items())),
                )
            )
        return self._hash

    def __repr__(self) -> str:
        return (
            f"RayedGraph(|V|={len(self._vertices)}, |E|={len(self._edges)}, "
            f"|rays|={len(self._rays)})"
        )


# A plain multigraph is a RayedGraph with an empty ray map.
Multigraph = RayedGraph


def multigraph(vertices: Iterable[str], edges: Mapping[str, tuple[str, str]]) -> RayedGraph:
    return RayedGraph(vertices, edges, {})


@dataclass(frozen=True, order=True)
class Wedge:
    """Two distinct edges sharing the center vertex.

    x and y are the far endpoints of left and right; for a loop the far
    endpoint is the center itself. Canonical form has left < right.
    """

    left: str
    center: str
    right: str
    x: str
    y: str


def components(g: RayedGraph, edge_subset: Optional[Iterable[str]] = None) -> tuple[frozenset, ...]:
    """Vertex sets of the components of (V, edge_subset), sorted by least vertex.

    Every vertex of g appears in exactly one component; isolated vertices
    form singletons. Default subset is all edges.
    """
    ids = g.edge_ids if edge_subset is None else sorted(set(edge_subset))
    parent = {v: v for v in g.vertices}

    def find(a: str) -> str:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for eid in ids:
        u, v = g.endpoints(eid)
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    buckets: dict[str, set] = {}
    for v in g.vertices:
        buckets.setdefault(find(v), set()).add(v)
    return tuple(frozenset(buckets[r]) for r in sorted(buckets))


def component_of(g: RayedGraph, v: str, edge_subset: Optional[Iterable[str]] = None) -> frozenset:
    for comp in components(g, edge_subset):
        if v in comp:
            return comp
    raise ValueError(f"vertex {v!r} not in graph")


def component_edges(
    g: RayedGraph, comp: frozenset, edge_subset: Optional[Iterable[str]] = None
) -> frozenset:
    ids = g.edge_ids if edge_subset is None else edge_subset
    return frozenset(eid for eid in ids if g.endpoints(eid)[0] in comp)


def component_rays(g: RayedGraph, comp: frozenset) -> tuple[str, ...]:
    return tuple(sorted(rid for rid, at in g.rays.items() if at in comp))


def ray_free_component_count(g: RayedGraph, edge_subset: Optional[Iterable[str]] = None) -> int:
    rayed = set(g.rays.values())
    return sum(1 for comp in components(g, edge_subset) if not (comp & rayed))


def end_count(g: RayedGraph) -> int:
    """One ray marker stands for exactly one end."""
    return len(g.rays)


def component_end_counts(g: RayedGraph) -> dict[frozenset, int]:
    rays = list(g.rays.values())
    return {comp: sum(1 for at in rays if at in comp) for comp in components(g)}


def induced_subgraph(g: RayedGraph, vertex_set: Iterable[str]) -> RayedGraph:
    """Subgraph on the given vertices with all edges and rays inside."""
    vs = set(vertex_set)
    edges = {eid: uv for eid, uv in g.edges.items() if uv[0] in vs and uv[1] in vs}
    rays = {rid: at for rid, at in g.rays.items() if at in vs}
    return RayedGraph(vs, edges, rays)


def edge_subgraph(g: RayedGraph, edge_subset: Iterable[str], keep_rays: bool = True) -> RayedGraph:
    """Graph made of the given edges, their endpoints, and the rays at those endpoints."""
    es = {eid: g.endpoints(eid) for eid in edge_subset}
    vs = {v for uv in es.values() for v in uv}
    rays = {rid: at for rid, at in g.rays.items() if at in vs} if keep_rays else {}
    return RayedGraph(vs, es, rays)


def delete_vertices(g: RayedGraph, doomed: Iterable[str]) -> RayedGraph:
    """Remove vertices together with their incident edges and attached rays."""
    dead = set(doomed)
    vs = [v for v in g.vertices if v not in dead]
    es = {eid: uv for eid, uv in g.edges.items() if uv[0] not in dead and uv[1] not in dead}
    rays = {rid: at for rid, at in g.rays.items() if at not in dead}
    return RayedGraph(vs, es, rays)


def span(g: RayedGraph, edge_subset: Iterable[str]) -> frozenset:
    return frozenset(v for eid in edge_subset for v in g.endpoints(eid))


def is_connected_edge_set(g: RayedGraph, edge_subset: Iterable[str]) -> bool:
    """True iff the edges form one connected nonempty subgraph (on their span)."""
    ids = sorted(set(edge_subset))
    if not ids:
        return False
    sp = span(g, ids)
    touched = [c for c in components(g, ids) if c & sp]
    return len(touched) == 1


def has_cycle(g: RayedGraph, edge_subset: Optional[Iterable[str]] = None) -> bool:
    """True iff the subgraph contains a cycle. Loops and parallel pairs count."""
    ids = g.edge_ids if edge_subset is None else sorted(set(edge_subset))
    parent = {v: v for v in g.vertices}

    def find(a: str) -> str:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for eid in ids:
        u, v = g.endpoints(eid)
        ru, rv = find(u), find(v)
        if ru == rv:
            return True
        parent[max(ru, rv)] = min(ru, rv)
    return False


def is_weakly_n_connected(g: RayedGraph, n: int) -> bool:
    """No removal of fewer than n vertices leaves a ray-free component.

    Rays at removed vertices disappear with them. Rejects graphs that already
    have a ray-free component, where the notion degenerates.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rayed = set(g.rays.values())
    for comp in components(g):
        if not comp & rayed:
            raise ValueError("weak connectivity requires every component to carry a ray")
    for k in range(1, n):
        for cut in combinations(g.vertices, k):
            h = delete_vertices(g, cut)
            hr = set(h.rays.values())
            for comp in components(h):
                if not comp & hr:
                    return False
    return True


def is_strongly_n_connected(g: RayedGraph, n: int) -> bool:
    """Classical vertex n-connectivity: |V| > n, connected, no cut set of size < n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if len(g.vertices) <= n:
        return False
    if len(components(g)) != 1:
        return False
    for k in range(1, n):
        for cut in combinations(g.vertices, k):
            h = delete_vertices(g, cut)
            if h.vertices and len(components(h)) != 1:
                return False
    return True


def wedges(g: RayedGraph) -> tuple[Wedge, ...]:
    """All wedges: unordered pairs of distinct edges sharing a vertex."""
    out = []
    for z in g.vertices:
        ids = g.incident(z)
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                a, b = ids[i], ids[j]
                out.append(Wedge(a, z, b, g.other_end(a, z), g.other_end(b, z)))
    return tuple(sorted(out))


def bfs_distances(
    g: RayedGraph, sources: Iterable[str], edge_subset: Optional[Iterable[str]] = None
) -> dict[str, int]:
    """Hop distances from the source set; unreachable vertices are absent."""
    allowed = set(g.edge_ids if edge_subset is None else edge_subset)
    dist: dict[str, int] = {}
    q: deque = deque()
    for s in sorted(set(sources)):
        dist[s] = 0
        q.append(s)
    while q:
        v = q.popleft()
        for eid in g.incident(v):
            if eid not in allowed:
                continue
            w = g.other_end(eid, v)
            if w not in dist:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def shortest_path(
    g: RayedGraph,
    u: str,
    v: str,
    edge_subset: Optional[Iterable[str]] = None,
    forbidden_vertices: Iterable[str] = (),
) -> Optional[list[str]]:
    """Edge ids of a shortest u-v walk avoiding forbidden interior vertices."""
    bad = set(forbidden_vertices) - {u, v}
    allowed = set(g.edge_ids if edge_subset is None else edge_subset)
    if u == v:
        return []
    prev: dict[str, tuple[str, str]] = {}
    seen = {u}
    q = deque([u])
    while q:
        a = q.popleft()
        if a == v:
            break
        for eid in g.incident(a):
            if eid not in allowed:
                continue
            b = g.other_end(eid, a)
            if b in seen or b in bad:
                continue
            seen.add(b)
            prev[b] = (a, eid)
            q.append(b)
    if v not in seen:
        return None
    path = []
    cur = v
    while cur != u:
        a, eid = prev[cur]
        path.append(eid)
        cur = a
    return list(reversed(path))


def _all_simple_paths(g, x, y, bad, allowed, cap=5000) -> list[list[str]]:
    out: list[list[str]] = []

    def walk(v, path_edges, seen_vertices):
        if len(out) >= cap:
            return
        if v == y:
            out.append(list(path_edges))
            return
        for eid in g.incident(v):
            if eid not in allowed or eid in path_edges:
                continue
            w = g.other_end(eid, v)
            if w in bad or w in seen_vertices:
                continue
            path_edges.append(eid)
            if w == y:
                out.append(list(path_edges))
            else:
                seen_vertices.add(w)
                walk(w, path_edges, seen_vertices)
                seen_vertices.discard(w)
            path_edges.pop()

    walk(x, [], {x})
    return out


def vertex_disjoint_paths(
    g: RayedGraph,
    x: str,
    y: str,
    k: int = 2,
    forbidden_vertices: Iterable[str] = (),
    edge_subset: Optional[Iterable[str]] = None,
) -> Optional[list[list[str]]]:
    """k internally vertex-disjoint x-y paths as edge-id lists, or None.

    Exact search: enumerate simple paths shortest-first and backtrack over
    disjoint k-subsets. Paths are also edge-disjoint, so parallel x-y edges
    yield distinct one-edge paths. Deterministic.
    """
    if x == y:
        raise ValueError("endpoints must differ")
    bad = set(forbidden_vertices) - {x, y}
    allowed = set(g.edge_ids if edge_subset is None else edge_subset)
    paths = _all_simple_paths(g, x, y, bad, allowed)
    paths.sort(key=lambda p: (len(p), p))

    def interior(p: list[str]) -> frozenset:
        s: set = set()
        for eid in p:
            s |= set(g.endpoints(eid))
        return frozenset(s - {x, y})

    metas = [(p, interior(p)) for p in paths]

    def pick(idx: int, chosen: list, used_v: frozenset, used_e: frozenset) -> Optional[list]:
        if len(chosen) == k:
            return chosen
        if idx >= len(metas):
            return None
        p, inter = metas[idx]
        if not (inter & used_v) and not (set(p) & used_e):
            got = pick(idx + 1, chosen + [p], used_v | inter, used_e | frozenset(p))
            if got is not None:
                return got
        return pick(idx + 1, chosen, used_v, used_e)

    return pick(0, [], frozenset(), frozenset())


def simple_cycles(
    g: RayedGraph,
    edge_subset: Optional[Iterable[str]] = None,
    cap: int = 10**6,
) -> tuple[frozenset, ...]:
    """Edge sets of all simple cycles, sorted. Loops are cycles of length 1,
    parallel pairs cycles of length 2. Raises RuntimeError past `cap` cycles.
    """
    allowed = sorted(set(g.edge_ids if edge_subset is None else edge_subset))
    allowed_set = set(allowed)
    found: set = set()

    for eid in allowed:
        if g.is_loop(eid):
            found.add(frozenset([eid]))

    # Cycles through at least two vertices: DFS closed walks anchored at their
    # least vertex, interior vertices distinct and greater than the anchor.
    by_vertex: dict[str, list[tuple[str, str]]] = {}
    for eid in allowed:
        u, v = g.endpoints(eid)
        if u == v:
            continue
        by_vertex.setdefault(u, []).append((eid, v))
        by_vertex.setdefault(v, []).append((eid, u))
    for v in by_vertex:
        by_vertex[v].sort()

    def extend(anchor: str, current: str, path_edges: list, seen: set):
        if len(found) > cap:
            raise RuntimeError(f"cycle enumeration exceeded cap of {cap}")
        for eid, nxt in by_vertex.get(current, ()):
            if eid in path_edges:
                continue
            if nxt == anchor:
                if len(path_edges) >= 1:
                    found.add(frozenset(path_edges + [eid]))
                continue
            if nxt in seen or nxt < anchor:
                continue
            path_edges.append(eid)
            seen.add(nxt)
            extend(anchor, nxt, path_edges, seen)
            seen.discard(nxt)
            path_edges.pop()

    for anchor in sorted(by_vertex):
        extend(anchor, anchor, [], {anchor})

    loops = {c for c in found if len(c) == 1 and g.is_loop(next(iter(c)))}
    found = {c for c in found if c in loops or len(c) >= 2}
    assert all(c <= allowed_set for c in found)
    return tuple(sorted(found, key=lambda c: (len(c), tuple(sorted(c)))))


def edge_respecting_isomorphism(
    g1: RayedGraph, g2: RayedGraph, edge_map: Mapping[str, str]
) -> Optional[dict[str, str]]:
    """Vertex bijection carrying endpoints(e) to endpoints(edge_map[e]) for
    every edge and matching ray multiplicities at every vertex. None if
    impossible. Backtracking, highest degree first.
    """
    if set(edge_map) != set(g1.edge_ids) or set(edge_map.values()) != set(g2.edge_ids):
        return None
    if len(set(edge_map.values())) != len(edge_map):
        return None
    if len(g1.vertices) != len(g2.vertices) or len(g1.rays) != len(g2.rays):
        return None

    def signature(g: RayedGraph, v: str) -> tuple[int, int]:
        return (g.degree(v), g.ray_count_at(v))

    sig2: dict[tuple[int, int], list[str]] = {}
    for v in g2.vertices:
        sig2.setdefault(signature(g2, v), []).append(v)

    order = sorted(g1.vertices, key=lambda v: (-g1.degree(v), v))
    assign: dict[str, str] = {}
    used: set = set()

    def consistent(v: str, w: str) -> bool:
        for eid in g1.incident(v):
            img = edge_map[eid]
            a, b = g2.endpoints(img)
            if g1.is_loop(eid) != g2.is_loop(img):
                return False
            if w not in (a, b):
                return False
            u = g1.other_end(eid, v)
            if u in assign:
                other = b if w == a else a
                if not g1.is_loop(eid) and assign[u] != other:
                    return False
        return True

    def backtrack(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for w in sig2.get(signature(g1, v), []):
            if w in used or not consistent(v, w):
                continue
            assign[v] = w
            used.add(w)
            if backtrack(i + 1):
                return True
            del assign[v]
            used.discard(w)
        return False

    if backtrack(0):
        return dict(assign)
    return None
