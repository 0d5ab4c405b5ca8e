"""Weak isomorphisms: cycle- and tameness-preserving edge bijections.

Verification runs two independent checks (cycles, tameness of edge
subsets) and additionally reports whether subset ranks agree. The verdict
is the conjunction of the first two; rank agreement is reported but never
asserted, because two-ended fixtures admit genuine weak isomorphisms that
change the rank of individual subsets.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Union

from . import serialize
from .graphs import (
    RayedGraph,
    Wedge,
    component_edges,
    component_rays,
    components,
    induced_subgraph,
    is_connected_edge_set,
    is_strongly_n_connected,
    is_weakly_n_connected,
    simple_cycles,
)
from .matroid import minimal_nontame_sets


@dataclass(frozen=True)
class EdgeBijection:
    """Total bijection between the edge-id sets of two rayed graphs.

    Rays are never part of the mapping; only edges travel.
    """

    source: RayedGraph
    target: RayedGraph
    mapping: dict

    def __post_init__(self):
        keys = set(self.mapping)
        vals = set(self.mapping.values())
        if keys != set(self.source.edge_ids):
            raise ValueError("mapping keys must be exactly the source edge ids")
        if len(vals) != len(self.mapping) or vals != set(self.target.edge_ids):
            raise ValueError("mapping must be a bijection onto the target edge ids")

    def __getitem__(self, eid: str) -> str:
        return self.mapping[eid]

    def image(self, edges) -> frozenset:
        return frozenset(self.mapping[e] for e in edges)

    def preimage(self, edges) -> frozenset:
        inv = {v: k for k, v in self.mapping.items()}
        return frozenset(inv[e] for e in edges)

    def invert(self) -> "EdgeBijection":
        return EdgeBijection(
            self.target, self.source, {v: k for k, v in self.mapping.items()}
        )

    def then(self, nxt: "EdgeBijection") -> "EdgeBijection":
        """Composition source -> self.target = nxt.source -> nxt.target."""
        if self.target != nxt.source:
            raise ValueError("composition needs matching middle graph")
        return EdgeBijection(
            self.source, nxt.target, {e: nxt.mapping[t] for e, t in self.mapping.items()}
        )

    def to_json(self) -> str:
        return serialize.dumps_map(self.mapping)


def identity_bijection(g: RayedGraph) -> EdgeBijection:
    return EdgeBijection(g, g, {e: e for e in g.edge_ids})


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one preservation check.

    `witness` is a source-side edge set demonstrating the failure (for the
    reverse direction of the cycle check it is the preimage of the
    offending target cycle). `exhaustive` records whether every relevant
    object was examined or only a structured family.
    """

    ok: bool
    witness: Optional[frozenset]
    exhaustive: bool

    def __bool__(self) -> bool:
        return self.ok


def _is_simple_cycle(g: RayedGraph, edges: frozenset) -> bool:
    if not edges:
        return False
    deg: dict[str, int] = {}
    for e in edges:
        u, v = g.endpoints(e)
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    if any(d != 2 for d in deg.values()):
        return False
    return is_connected_edge_set(g, edges)


def _cycle_key(c: frozenset):
    return (len(c), tuple(sorted(c)))


def _fundamental_cycles(g: RayedGraph, edge_order: list[str]) -> list[frozenset]:
    """Chord cycles over the forest grown in `edge_order`."""
    parent: dict[str, str] = {v: v for v in g.vertices}

    def find(a: str) -> str:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    forest: list[str] = []
    chords: list[str] = []
    for e in edge_order:
        u, v = g.endpoints(e)
        ru, rv = find(u), find(v)
        if ru == rv:
            chords.append(e)
        else:
            parent[ru] = rv
            forest.append(e)
    out = []
    from .graphs import shortest_path

    for e in chords:
        u, v = g.endpoints(e)
        if u == v:
            out.append(frozenset([e]))
            continue
        path = shortest_path(g, u, v, edge_subset=forest)
        out.append(frozenset(path) | {e})
    return out


def check_cycle_preserving(
    phi: EdgeBijection, cap: int = 10**6, samples: int = 200, seed: int = 0
) -> CheckResult:
    """Every simple cycle must map to a simple cycle, in both directions.

    Past `cap` enumerated cycles on either side the check degrades to
    cycle-basis images plus `samples` randomized fundamental cycles and
    marks itself non-exhaustive.
    """
    try:
        c1 = simple_cycles(phi.source, cap=cap)
        c2 = simple_cycles(phi.target, cap=cap)
    except RuntimeError:
        return _sampled_cycle_check(phi, samples, seed)
    set2 = set(c2)
    for c in sorted(c1, key=_cycle_key):
        if phi.image(c) not in set2:
            return CheckResult(False, c, True)
    set1 = set(c1)
    for c in sorted(c2, key=_cycle_key):
        pre = phi.preimage(c)
        if pre not in set1:
            return CheckResult(False, pre, True)
    return CheckResult(True, None, True)


def _sampled_cycle_check(phi: EdgeBijection, samples: int, seed: int) -> CheckResult:
    rng = random.Random(seed)

    def batch(g: RayedGraph) -> list[frozenset]:
        base = sorted(g.edge_ids)
        found = {c for c in _fundamental_cycles(g, base)}
        for _ in range(samples):
            order = list(base)
            rng.shuffle(order)
            found.update(_fundamental_cycles(g, order))
        return sorted(found, key=_cycle_key)

    for c in batch(phi.source):
        if not _is_simple_cycle(phi.target, phi.image(c)):
            return CheckResult(False, c, False)
    for c in batch(phi.target):
        pre = phi.preimage(c)
        if not _is_simple_cycle(phi.source, pre):
            return CheckResult(False, pre, False)
    return CheckResult(True, None, False)


class _PartitionTracker:
    """Rollback union-find over one graph's vertices.

    Tracks how many current components carry three or more rays (`bad`,
    zero iff the chosen edge set is tame) and how many carry none
    (`rayfree`, giving rank = |V| - rayfree).
    """

    def __init__(self, g: RayedGraph):
        self.idx = {v: i for i, v in enumerate(g.vertices)}
        n = len(g.vertices)
        self.n = n
        self.parent = list(range(n))
        self.size = [1] * n
        self.rays = [0] * n
        for at in g.rays.values():
            self.rays[self.idx[at]] += 1
        self.bad = sum(1 for r in self.rays if r >= 3)
        self.rayfree = sum(1 for r in self.rays if r == 0)
        self.trail: list = []

    def find(self, i: int) -> int:
        # no path compression: unions must be undoable
        while self.parent[i] != i:
            i = self.parent[i]
        return i

    def union(self, u: int, v: int) -> None:
        a, b = self.find(u), self.find(v)
        if a == b:
            self.trail.append(None)
            return
        if self.size[a] < self.size[b]:
            a, b = b, a
        ra, rb = self.rays[a], self.rays[b]
        dbad = (1 if ra + rb >= 3 else 0) - (1 if ra >= 3 else 0) - (1 if rb >= 3 else 0)
        drf = (1 if ra + rb == 0 else 0) - (1 if ra == 0 else 0) - (1 if rb == 0 else 0)
        self.trail.append((a, b, ra, dbad, drf))
        self.parent[b] = a
        self.size[a] += self.size[b]
        self.rays[a] = ra + rb
        self.bad += dbad
        self.rayfree += drf

    def undo(self) -> None:
        rec = self.trail.pop()
        if rec is None:
            return
        a, b, ra, dbad, drf = rec
        self.parent[b] = b
        self.size[a] -= self.size[b]
        self.rays[a] = ra
        self.bad -= dbad
        self.rayfree -= drf

    @property
    def tame(self) -> bool:
        return self.bad == 0

    @property
    def rank(self) -> int:
        return self.n - self.rayfree

    def probe(self, end_pairs) -> tuple[bool, int]:
        """Tameness and rank of one subset, leaving the tracker clean."""
        for u, v in end_pairs:
            self.union(u, v)
        out = (self.tame, self.rank)
        for _ in end_pairs:
            self.undo()
        return out


def _exhaustive_sweep(
    phi: EdgeBijection, want_tame: bool = True, want_rank: bool = True
) -> tuple[Optional[frozenset], Optional[frozenset]]:
    """First tameness and rank mismatches over all 2^m subsets.

    Branches include-first, so subsets are visited in decreasing inclusion
    order and the reported witness is the largest offender (the full edge
    set when that one already disagrees).
    """
    src, tgt = phi.source, phi.target
    edges = sorted(src.edge_ids)
    t1, t2 = _PartitionTracker(src), _PartitionTracker(tgt)
    ends1 = [tuple(t1.idx[v] for v in src.endpoints(e)) for e in edges]
    ends2 = [tuple(t2.idx[v] for v in tgt.endpoints(phi.mapping[e])) for e in edges]
    chosen: list[str] = []
    tame_wit: list = [None if want_tame else ()]
    rank_wit: list = [None if want_rank else ()]

    def rec(i: int) -> None:
        if tame_wit[0] is not None and rank_wit[0] is not None:
            return
        if i == len(edges):
            if tame_wit[0] is None and t1.tame != t2.tame:
                tame_wit[0] = frozenset(chosen)
            if rank_wit[0] is None and t1.rank != t2.rank:
                rank_wit[0] = frozenset(chosen)
            return
        t1.union(*ends1[i])
        t2.union(*ends2[i])
        chosen.append(edges[i])
        rec(i + 1)
        chosen.pop()
        t1.undo()
        t2.undo()
        rec(i + 1)

    rec(0)
    tw = tame_wit[0] if want_tame else None
    rw = rank_wit[0] if want_rank else None
    return (None if tw == () else tw, None if rw == () else rw)


def _connected_subsets(g: RayedGraph, max_size: int) -> list[frozenset]:
    """All connected edge sets of at most `max_size` edges, each once.

    Reverse search rooted at each set's least edge: a popped candidate is
    excluded from the rest of its subtree, so no subset is ever revisited
    and no global dedupe table is needed.
    """
    edges = sorted(g.edge_ids)
    pos = {e: i for i, e in enumerate(edges)}
    at_vertex: dict[str, list] = {}
    for e in edges:
        for v in g.endpoints(e):
            at_vertex.setdefault(v, []).append(e)
    adjacency: dict[str, set] = {e: set() for e in edges}
    for group in at_vertex.values():
        for e in group:
            adjacency[e].update(group)
    for e in edges:
        adjacency[e].discard(e)

    out: list[frozenset] = []
    sub: list[str] = []

    def rec(ext: list[str], nbhd: set, root: int) -> None:
        out.append(frozenset(sub))
        if len(sub) == max_size:
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            fresh = [u for u in adjacency[w] if pos[u] > root and u not in nbhd]
            sub.append(w)
            nbhd.update(fresh)
            rec(ext + fresh, nbhd, root)
            sub.pop()
            nbhd.difference_update(fresh)

    for i, start in enumerate(edges):
        ext0 = [u for u in adjacency[start] if pos[u] > i]
        sub = [start]
        rec(ext0, set(ext0) | {start}, i)
    return out


def _structured_family(
    g: RayedGraph, connected_limit: int, union_limit: int, samples: int, seed: int
) -> list[frozenset]:
    """Subset family used when 2^m is out of reach, largest first."""
    fam: set[frozenset] = {frozenset(), frozenset(g.edge_ids)}
    comp_sets = [component_edges(g, c) for c in components(g)]
    comp_sets = [c for c in comp_sets if c]
    for k in range(1, min(union_limit, len(comp_sets)) + 1):
        for combo in combinations(comp_sets, k):
            fam.add(frozenset().union(*combo))
    fam.update(_connected_subsets(g, connected_limit))
    rng = random.Random(seed)
    edges = sorted(g.edge_ids)
    for _ in range(samples):
        fam.add(frozenset(e for e in edges if rng.random() < 0.5))
    return sorted(fam, key=lambda s: (-len(s), tuple(sorted(s))))


def _family_sweep(
    phi: EdgeBijection,
    connected_limit: int,
    union_limit: int,
    samples: int,
    seed: int,
    want_rank: bool,
) -> tuple[Optional[frozenset], Optional[frozenset]]:
    src, tgt = phi.source, phi.target
    t1, t2 = _PartitionTracker(src), _PartitionTracker(tgt)
    inv = {v: k for k, v in phi.mapping.items()}
    ends1 = {e: (t1.idx[u], t1.idx[v]) for e, (u, v) in src.edges.items()}
    ends2 = {e: (t2.idx[u], t2.idx[v]) for e, (u, v) in tgt.edges.items()}
    fwd = phi.mapping

    tame_wit: Optional[frozenset] = None
    rank_wit: Optional[frozenset] = None
    done = [False]

    def note(mismatch_edges, reversed_side: bool) -> None:
        nonlocal tame_wit, rank_wit
        witness = (
            frozenset(inv[e] for e in mismatch_edges)
            if reversed_side
            else frozenset(mismatch_edges)
        )
        if tame_wit is None and t1.tame != t2.tame:
            tame_wit = witness
        if want_rank and rank_wit is None and t1.rank != t2.rank:
            rank_wit = witness
        done[0] = tame_wit is not None and (rank_wit is not None or not want_rank)

    def compare(edges, reversed_side: bool) -> None:
        if done[0]:
            return
        here, there = (ends2, ends1) if reversed_side else (ends1, ends2)
        trans = inv if reversed_side else fwd
        ta, tb = (t2, t1) if reversed_side else (t1, t2)
        n = 0
        for e in edges:
            ta.union(*here[e])
            tb.union(*there[trans[e]])
            n += 1
        if t1.tame != t2.tame or (want_rank and t1.rank != t2.rank):
            note(edges, reversed_side)
        for _ in range(n):
            ta.undo()
            tb.undo()

    def sweep_connected(g: RayedGraph, reversed_side: bool) -> None:
        # walk the reverse-search tree of connected subsets, keeping both
        # trackers in sync: one union per node instead of one probe per set
        here, there = (ends2, ends1) if reversed_side else (ends1, ends2)
        trans = inv if reversed_side else fwd
        ta, tb = (t2, t1) if reversed_side else (t1, t2)
        edges = sorted(g.edge_ids)
        pos = {e: i for i, e in enumerate(edges)}
        at_vertex: dict[str, list] = {}
        for e in edges:
            for v in g.endpoints(e):
                at_vertex.setdefault(v, []).append(e)
        adjacency: dict[str, set] = {e: set() for e in edges}
        for group in at_vertex.values():
            for e in group:
                adjacency[e].update(group)
        for e in edges:
            adjacency[e].discard(e)

        sub: list[str] = []

        def add(e: str) -> None:
            ta.union(*here[e])
            tb.union(*there[trans[e]])
            sub.append(e)

        def drop() -> None:
            ta.undo()
            tb.undo()
            sub.pop()

        def rec(ext: list[str], nbhd: set, root: int) -> None:
            if done[0]:
                return
            if t1.tame != t2.tame or (want_rank and t1.rank != t2.rank):
                note(sub, reversed_side)
            if len(sub) == connected_limit:
                return
            ext = list(ext)
            while ext and not done[0]:
                w = ext.pop()
                fresh = [u for u in adjacency[w] if pos[u] > root and u not in nbhd]
                add(w)
                nbhd.update(fresh)
                rec(ext + fresh, nbhd, root)
                nbhd.difference_update(fresh)
                drop()

        for i, start in enumerate(edges):
            if done[0]:
                return
            ext0 = [u for u in adjacency[start] if pos[u] > i]
            add(start)
            rec(ext0, set(ext0) | {start}, i)
            drop()

    rng = random.Random(seed)
    for g, reversed_side in ((src, False), (tgt, True)):
        compare([], reversed_side)
        compare(sorted(g.edge_ids), reversed_side)
        comp_sets = [sorted(component_edges(g, c)) for c in components(g)]
        comp_sets = [c for c in comp_sets if c]
        for k in range(1, min(union_limit, len(comp_sets)) + 1):
            for combo in combinations(comp_sets, k):
                compare([e for part in combo for e in part], reversed_side)
        sweep_connected(g, reversed_side)
        base = sorted(g.edge_ids)
        for _ in range(samples):
            compare([e for e in base if rng.random() < 0.5], reversed_side)
        if done[0]:
            break
    return tame_wit, rank_wit


def check_tameness_preserving(
    phi: EdgeBijection,
    exhaustive_limit: int = 20,
    connected_limit: int = 8,
    union_limit: int = 3,
    samples: int = 10000,
    seed: int = 0,
) -> CheckResult:
    """Tameness of every subset must agree with its image's.

    Exhaustive over all subsets up to `exhaustive_limit` edges; beyond
    that, a structured family (connected sets up to `connected_limit`,
    unions of up to `union_limit` components, the empty and full sets, and
    `samples` seeded random subsets) is checked on both sides.
    """
    if len(phi.mapping) <= exhaustive_limit:
        tw, _ = _exhaustive_sweep(phi, want_tame=True, want_rank=False)
        return CheckResult(tw is None, tw, True)
    tw, _ = _family_sweep(phi, connected_limit, union_limit, samples, seed, want_rank=False)
    return CheckResult(tw is None, tw, False)


@dataclass(frozen=True)
class WeakIsoReport:
    """Verdict plus per-check detail for one edge bijection.

    The verdict is cycle_preserving and tameness_preserving. Rank
    agreement over the same subset family is reported alongside;
    `rank_matches_verdict` records whether the two notions coincided on
    this instance (they provably do on ray-free graphs, but two-ended
    rayed graphs admit weak isomorphisms that move subset ranks).
    """

    cycle_preserving: bool
    cycle_counterexample: Optional[frozenset]
    tameness_preserving: bool
    tameness_counterexample: Optional[frozenset]
    rank_preserving: bool
    rank_counterexample: Optional[frozenset]
    verdict: bool
    exhaustive: bool

    @property
    def rank_matches_verdict(self) -> bool:
        return self.rank_preserving == self.verdict


def check_weak_isomorphism(
    phi: EdgeBijection,
    exhaustive_limit: int = 20,
    connected_limit: int = 8,
    union_limit: int = 3,
    samples: int = 10000,
    seed: int = 0,
) -> WeakIsoReport:
    cyc = check_cycle_preserving(phi)
    if len(phi.mapping) <= exhaustive_limit:
        tw, rw = _exhaustive_sweep(phi)
        subsets_exhaustive = True
    else:
        tw, rw = _family_sweep(phi, connected_limit, union_limit, samples, seed, want_rank=True)
        subsets_exhaustive = False
    tame_ok = tw is None
    return WeakIsoReport(
        cycle_preserving=cyc.ok,
        cycle_counterexample=cyc.witness,
        tameness_preserving=tame_ok,
        tameness_counterexample=tw,
        rank_preserving=rw is None,
        rank_counterexample=rw,
        verdict=cyc.ok and tame_ok,
        exhaustive=cyc.exhaustive and subsets_exhaustive,
    )


def search_weak_isomorphisms(
    g1: RayedGraph, g2: RayedGraph, limit: Optional[int] = None
) -> list[EdgeBijection]:
    """All weak isomorphisms g1 -> g2, lexicographic in the source edges.

    Complete backtracking: candidates are filtered by per-edge profiles
    over the two set families every weak isomorphism preserves bijectively
    (simple cycles and minimal non-tame sets), and partial assignments are
    rejected as soon as a fully-assigned member maps outside its family.
    A full assignment passing those checks maps each family onto its
    counterpart, which is exactly cycle preservation plus tameness
    preservation of every subset, so no final re-verification is needed.
    """
    e1, e2 = sorted(g1.edge_ids), sorted(g2.edge_ids)
    if len(e1) != len(e2):
        return []
    cycles1, cycles2 = list(simple_cycles(g1)), list(simple_cycles(g2))
    trip1, trip2 = minimal_nontame_sets(g1), minimal_nontame_sets(g2)
    if sorted(map(len, cycles1)) != sorted(map(len, cycles2)):
        return []
    if sorted(map(len, trip1)) != sorted(map(len, trip2)):
        return []

    members1 = [("cycle", c) for c in cycles1] + [("tripod", t) for t in trip1]
    targets = {"cycle": set(cycles2), "tripod": set(trip2)}

    def profiles(edges, family):
        prof = {e: [] for e in edges}
        for kind, s in family:
            for e in s:
                prof[e].append((kind, len(s)))
        return {e: tuple(sorted(p)) for e, p in prof.items()}

    prof1 = profiles(e1, members1)
    prof2 = profiles(e2, [("cycle", c) for c in cycles2] + [("tripod", t) for t in trip2])
    if Counter(prof1.values()) != Counter(prof2.values()):
        return []
    by_profile: dict[tuple, list] = {}
    for t in e2:
        by_profile.setdefault(prof2[t], []).append(t)
    candidates = {e: by_profile.get(prof1[e], []) for e in e1}

    member_ids: dict[str, list] = {e: [] for e in e1}
    for idx, (_, s) in enumerate(members1):
        for e in s:
            member_ids[e].append(idx)
    remaining = [len(s) for _, s in members1]

    assigned: dict[str, str] = {}
    used: set = set()
    results: list[EdgeBijection] = []

    def rec(i: int) -> None:
        if limit is not None and len(results) >= limit:
            return
        if i == len(e1):
            results.append(EdgeBijection(g1, g2, dict(assigned)))
            return
        e = e1[i]
        for t in candidates[e]:
            if t in used:
                continue
            assigned[e] = t
            used.add(t)
            ok = True
            completed = 0
            for ci in member_ids[e]:
                remaining[ci] -= 1
                completed += 1
                if remaining[ci] == 0 and ok:
                    kind, s = members1[ci]
                    if frozenset(assigned[x] for x in s) not in targets[kind]:
                        ok = False
            if ok:
                rec(i + 1)
            for ci in member_ids[e][:completed]:
                remaining[ci] += 1
            del assigned[e]
            used.discard(t)

    rec(0)
    return results


@dataclass(frozen=True)
class WedgeImage:
    """Where a wedge's two edges land: still a wedge iff they share a vertex."""

    wedge: bool
    left: str
    right: str
    shared: tuple


def wedge_image(phi: EdgeBijection, w: Wedge) -> WedgeImage:
    src, tgt = phi.source, phi.target
    if not (src.has_edge(w.left) and src.has_edge(w.right)):
        raise ValueError("wedge edges must belong to the source graph")
    if w.center not in src.endpoints(w.left) or w.center not in src.endpoints(w.right):
        raise ValueError("not a wedge of the source graph")
    el, er = phi.mapping[w.left], phi.mapping[w.right]
    shared = tuple(sorted(set(tgt.endpoints(el)) & set(tgt.endpoints(er))))
    return WedgeImage(bool(shared), el, er, shared)


@dataclass(frozen=True)
class ExtractionFailure:
    """First vertex whose star image rules out any induced vertex map."""

    vertex: str
    star: tuple
    image: tuple
    reason: str


def extract_induced_isomorphism(
    phi: EdgeBijection,
) -> Union[dict, ExtractionFailure]:
    """Vertex map psi with phi(e) spanned by the psi-images, or a failure.

    Works on stars (edge sets at a vertex), so parallel edges are safe:
    each star's image must again lie on a common vertex, and the common
    vertices are stitched together by backtracking when parallel classes
    leave two choices. Requires minimum degree 2 in the source, where a
    ray counts toward the degree: a rayed pendant vertex is not a leaf of
    the object it models.
    """
    src, tgt = phi.source, phi.target
    for v in src.vertices:
        if src.degree(v) + src.ray_count_at(v) < 2:
            raise ValueError(f"vertex {v!r} has degree below 2, rays included")
    cands: dict[str, list] = {}
    for v in src.vertices:
        star = src.incident(v)
        common: Optional[set] = None
        for e in star:
            pts = set(tgt.endpoints(phi.mapping[e]))
            common = pts if common is None else common & pts
        if not common:
            return ExtractionFailure(
                v,
                star,
                tuple(phi.mapping[e] for e in star),
                "star image is not a star: the image edges share no vertex",
            )
        cands[v] = sorted(common)

    verts = sorted(src.vertices)
    assignment: dict[str, str] = {}
    taken: set = set()
    deepest = [0]

    def consistent(v: str) -> bool:
        for e in src.incident(v):
            a, b = src.endpoints(e)
            if a in assignment and b in assignment:
                want = tuple(sorted((assignment[a], assignment[b])))
                if want != tgt.endpoints(phi.mapping[e]):
                    return False
        return True

    def rec(k: int) -> Optional[dict]:
        if k == len(verts):
            return dict(assignment)
        deepest[0] = max(deepest[0], k)
        v = verts[k]
        for w in cands[v]:
            if w in taken:
                continue
            assignment[v] = w
            taken.add(w)
            if consistent(v):
                got = rec(k + 1)
                if got is not None:
                    return got
            del assignment[v]
            taken.discard(w)
        return None

    psi = rec(0)
    if psi is None:
        v = verts[deepest[0]]
        return ExtractionFailure(
            v,
            src.incident(v),
            tuple(phi.mapping[e] for e in src.incident(v)),
            "star images collide: no injective endpoint assignment exists",
        )
    return psi


@dataclass(frozen=True)
class ClauseReport:
    status: str  # "pass" | "fail" | "skipped"
    reason: Optional[str] = None
    violations: tuple = ()


@dataclass(frozen=True)
class DiagnosticsReport:
    """Theorem-conformance checks on a verified weak isomorphism."""

    weak_iso: bool
    clauses: dict

    @property
    def ok(self) -> bool:
        return self.weak_iso and all(c.status != "fail" for c in self.clauses.values())


def _connectivity_hypothesis(g: RayedGraph, label: str) -> Optional[str]:
    """Components with <= 2 rays must be strongly 2-connected, the rest
    weakly 2-connected; returns a reason string when violated."""
    for comp in components(g):
        nrays = len(component_rays(g, comp))
        sub = induced_subgraph(g, comp)
        if nrays <= 2:
            if not is_strongly_n_connected(sub, 2):
                return f"{label}: a component with {nrays} ray(s) is not strongly 2-connected"
        else:
            if not is_weakly_n_connected(sub, 2):
                return f"{label}: a component with {nrays} rays is not weakly 2-connected"
    return None


def preservation_diagnostics(phi: EdgeBijection) -> DiagnosticsReport:
    """Check that components, end counts, and maximal bananas correspond.

    Each clause is gated by its own hypotheses; a failed gate yields a
    skipped clause with the reason, never an exception. Violations are
    expected to stay empty whenever the gates pass.
    """
    report = check_weak_isomorphism(phi)
    if not report.verdict:
        sk = ClauseReport("skipped", "edge bijection is not a weak isomorphism")
        return DiagnosticsReport(False, {"components": sk, "ends": sk, "bananas": sk})

    src, tgt = phi.source, phi.target
    clauses: dict[str, ClauseReport] = {}

    reason = _connectivity_hypothesis(src, "source") or _connectivity_hypothesis(
        tgt, "target"
    )
    matching: Optional[dict] = None
    if reason is not None:
        clauses["components"] = ClauseReport("skipped", reason)
        clauses["ends"] = ClauseReport("skipped", reason)
    else:
        tgt_comps = list(components(tgt))
        comp_of = {
            e: i for i, c in enumerate(tgt_comps) for e in component_edges(tgt, c)
        }
        violations = []
        matching = {}
        src_comps = [c for c in components(src) if component_edges(src, c)]
        for c in src_comps:
            ce = component_edges(src, c)
            hit = {comp_of[phi.mapping[e]] for e in ce}
            if len(hit) > 1:
                violations.append(ce)
            else:
                matching[c] = tgt_comps[next(iter(hit))]
        if violations:
            clauses["components"] = ClauseReport(
                "fail", violations=tuple(sorted(violations, key=sorted))
            )
            clauses["ends"] = ClauseReport(
                "skipped", "component matching is not well defined"
            )
        else:
            clauses["components"] = ClauseReport("pass")
            bad_ends = []
            for c, tc in matching.items():
                if len(component_rays(src, c)) != len(component_rays(tgt, tc)):
                    bad_ends.append(component_edges(src, c))
            clauses["ends"] = (
                ClauseReport("fail", violations=tuple(sorted(bad_ends, key=sorted)))
                if bad_ends
                else ClauseReport("pass")
            )

    from .structure import enumerate_maximal_bananas

    try:
        d1 = enumerate_maximal_bananas(src)
        d2 = enumerate_maximal_bananas(tgt)
    except ValueError as exc:
        clauses["bananas"] = ClauseReport("skipped", str(exc))
        return DiagnosticsReport(True, clauses)

    tgt_banana_of = {e: bid for bid, es in d2.bananas.items() for e in es}
    offenders = []
    for bid in sorted(d1.bananas):
        es = d1.bananas[bid]
        img = phi.image(es)
        hit = {tgt_banana_of[e] for e in img}
        if len(hit) != 1 or d2.bananas[next(iter(hit))] != img:
            offenders.append(bid)
    clauses["bananas"] = (
        ClauseReport("fail", violations=tuple(offenders))
        if offenders
        else ClauseReport("pass")
    )
    return DiagnosticsReport(True, clauses)
