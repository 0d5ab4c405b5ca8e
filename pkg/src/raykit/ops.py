"""Replayable graph surgeries and the edge bijections they induce.

Six operation kinds, in three inverse pairs plus two twist forms:

* FiniteSplit / FiniteJoin detach or attach a ray-free component at a cut
  vertex (the cut vertex is duplicated on split, identified on join).
* TwoEndedSplit / TwoEndedJoin cut a 2-ray component at a set of vertices
  along its spine, or assemble finite pieces back into one. The join also
  accepts a "closure" orientation that glues the last piece back onto the
  first; that models a periodic quotient of a 2-ended component, at the
  price of one wrap-around cycle that exists only in the finite model.
* FiniteTwist swaps the attachments of a ray-free side at a cut pair.
  SimultaneousTwist applies several non-interfering twist records at once;
  a record is either a FiniteTwist or a TwoEndedTwist, which twists all
  edges from the pair toward one named end.

Operations never touch edge identities: every apply returns a graph with
the same edge-id set, so a sequence of operations induces the identity
edge bijection from the initial to the final graph. What changes is where
edges attach, which vertices exist, and hence which subsets form cycles.

Splits, joins, and finite twists preserve the rank of every edge subset.
The 2-ended forms do not: cutting a 2-ray component changes the count of
ray-free components by more than the vertex count compensates, and a
TwoEndedTwist can merge two rayed subgraph components. Both effects are
visible to rank but not to cycles or tameness, so sequences verify as
weak isomorphisms either way (closure wrap-around cycles excepted).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

from .graphs import (
    RayedGraph,
    component_of,
    component_rays,
    components,
    span,
)
from .weakiso import EdgeBijection, WeakIsoReport, check_weak_isomorphism


class OpValidationError(ValueError):
    """Raised when an operation is applied to a graph it is not valid on."""

    def __init__(self, op, violations: list[str]):
        self.op = op
        self.violations = list(violations)
        name = type(op).__name__
        super().__init__(f"{name}: " + "; ".join(self.violations))


def _sorted_pair(pair) -> tuple[str, str]:
    a, b = pair
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class FiniteSplit:
    """Detach the ray-free side `side` from the cut vertex `vertex`.

    The cut vertex is duplicated; the duplicate (named `copy`, or the
    first free "<vertex>.<i>" when omitted) goes with the detached side.
    """

    vertex: str
    side: frozenset
    copy: Optional[str] = None

    kind = "FiniteSplit"

    def __post_init__(self):
        object.__setattr__(self, "side", frozenset(self.side))


@dataclass(frozen=True)
class FiniteJoin:
    """Identify `absorbed` (in a ray-free component) with `vertex`."""

    vertex: str
    absorbed: str

    kind = "FiniteJoin"


@dataclass(frozen=True)
class TwoEndedSplit:
    """Cut the component of `component` at every vertex in `cuts`.

    On a 2-ray component every cut vertex must separate the two ends; the
    pieces between consecutive cuts become ray-free components and the two
    extremes keep one ray each. On a ray-free component the cuts must lie
    on a common circle (the periodic model); every cut is duplicated and
    the circle falls apart into its arcs.
    """

    component: str
    cuts: frozenset

    kind = "TwoEndedSplit"

    def __post_init__(self):
        object.__setattr__(self, "cuts", frozenset(self.cuts))


@dataclass(frozen=True)
class TwoEndedJoin:
    """Chain finite pieces into one component, entry glued onto exit.

    `pieces` is an ordered tuple of (entry, exit) vertex pairs, one per
    piece; piece i+1's entry is identified with piece i's exit (the exit
    name survives). With orientation "line" the first entry and last exit
    must carry the single ray of their pieces and all interior pieces are
    ray-free; with "closure" all pieces are ray-free and the last exit is
    also glued to the first entry.
    """

    pieces: tuple
    orientation: str = "line"

    kind = "TwoEndedJoin"

    def __post_init__(self):
        object.__setattr__(
            self, "pieces", tuple((e, x) for e, x in self.pieces)
        )


@dataclass(frozen=True)
class FiniteTwist:
    """Swap the attachments of the ray-free side `side` at the cut pair.

    Edges from pair[0] into the side re-attach to pair[1] and vice versa.
    `lx`/`ly` optionally pin the two re-attachment lists; when given they
    must match the lists derived from `side`.
    """

    pair: tuple
    side: frozenset
    lx: Optional[tuple] = None
    ly: Optional[tuple] = None

    kind = "FiniteTwist"

    def __post_init__(self):
        object.__setattr__(self, "pair", _sorted_pair(self.pair))
        object.__setattr__(self, "side", frozenset(self.side))
        if self.lx is not None:
            object.__setattr__(self, "lx", tuple(sorted(self.lx)))
        if self.ly is not None:
            object.__setattr__(self, "ly", tuple(sorted(self.ly)))


@dataclass(frozen=True)
class TwoEndedTwist:
    """Twist record for one cut pair of a 2-ended component.

    All edges from the pair toward the end named by `toward` (a ray id,
    or a vertex id naming an arc of a periodic-model circle) swap their
    pair endpoint. Only meaningful inside a SimultaneousTwist.
    """

    pair: tuple
    toward: str

    kind = "TwoEndedTwist"

    def __post_init__(self):
        object.__setattr__(self, "pair", _sorted_pair(self.pair))


@dataclass(frozen=True)
class SimultaneousTwist:
    """Apply several twist records with pairwise disjoint cut pairs at once.

    Re-attachment lists for every record are computed against the input
    graph before any edge moves, which is what makes the batch simultaneous
    rather than sequential; for valid (disjoint, non-crossing) records the
    two notions coincide.
    """

    records: tuple

    kind = "SimultaneousTwist"

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))


WhitneyOp = Union[FiniteSplit, FiniteJoin, TwoEndedSplit, TwoEndedJoin,
                  FiniteTwist, SimultaneousTwist]


def _fresh_vertex(base: str, taken) -> str:
    i = 1
    while f"{base}.{i}" in taken:
        i += 1
    return f"{base}.{i}"


def _side_edges(g: RayedGraph, block: frozenset) -> frozenset:
    # all edges with at least one endpoint inside the block
    out = set()
    for v in block:
        out.update(g.incident(v))
    return frozenset(out)


def _cut_components(g: RayedGraph, removed) -> list[frozenset]:
    removed = set(removed)
    comp = component_of(g, next(iter(removed)))
    keep = comp - removed
    if not keep:
        return []
    sub_edges = {
        e: ends
        for e, ends in g.edges.items()
        if ends[0] in keep and ends[1] in keep
    }
    sub = RayedGraph(keep, sub_edges, {r: v for r, v in g.rays.items() if v in keep})
    return list(components(sub))


def _rayed(g: RayedGraph, block) -> bool:
    return any(v in block for v in g.rays.values())


def _touches(g: RayedGraph, block, v: str) -> bool:
    return any(g.other_end(e, v) in block for e in g.incident(v) if not g.is_loop(e))


def _direct_edges(g: RayedGraph, x: str, y: str) -> list[str]:
    return [e for e in g.incident(x) if set(g.endpoints(e)) == {x, y}]


# ---------------------------------------------------------------- validate


def validate(op: WhitneyOp, g: RayedGraph) -> list[str]:
    """Violated precondition clauses, each named individually; [] means ok."""
    checker = _VALIDATORS.get(type(op))
    if checker is None:
        return [f"unknown operation kind {type(op).__name__!r}"]
    return checker(op, g)


def _validate_finite_split(op: FiniteSplit, g: RayedGraph) -> list[str]:
    out = []
    if not g.has_vertex(op.vertex):
        return [f"no vertex {op.vertex!r}"]
    if not op.side:
        return ["empty split-off side"]
    unknown = [e for e in sorted(op.side) if not g.has_edge(e)]
    if unknown:
        return [f"unknown edges {unknown}"]
    block = span(g, op.side) - {op.vertex}
    if not block:
        return ["side has no vertices besides the cut vertex"]
    pieces = _cut_components(g, {op.vertex})
    if len(pieces) < 2:
        out.append(f"{op.vertex!r} is not a cut vertex")
    if block not in pieces:
        out.append("side is not a full component of the cut")
    elif op.side != _side_edges(g, block):
        out.append("side does not carry every edge meeting its vertices")
    if _rayed(g, block):
        out.append("split-off side is not ray-free")
    if op.copy is not None and g.has_vertex(op.copy):
        out.append(f"copy name {op.copy!r} already in use")
    return out


def _validate_finite_join(op: FiniteJoin, g: RayedGraph) -> list[str]:
    out = []
    for v in (op.vertex, op.absorbed):
        if not g.has_vertex(v):
            return [f"no vertex {v!r}"]
    if op.vertex == op.absorbed:
        return ["join vertices coincide"]
    comp = component_of(g, op.absorbed)
    if op.vertex in comp:
        out.append("vertices share a component, joining would create cycles")
    if _rayed(g, comp):
        out.append("absorbed component is not ray-free")
    return out


def _two_ended_mode(g: RayedGraph, comp: frozenset):
    rays = component_rays(g, comp)
    if len(rays) == 2:
        return "open"
    if len(rays) == 0:
        return "periodic"
    return None


def _validate_two_ended_split(op: TwoEndedSplit, g: RayedGraph) -> list[str]:
    if not g.has_vertex(op.component):
        return [f"no vertex {op.component!r}"]
    comp = component_of(g, op.component)
    out = []
    if not op.cuts:
        return ["empty cut set"]
    stray = [v for v in sorted(op.cuts) if v not in comp]
    if stray:
        return [f"cut vertices {stray} outside the component"]
    mode = _two_ended_mode(g, comp)
    if mode is None:
        return ["component must carry exactly two rays, or none (periodic model)"]
    if mode == "open":
        for x in sorted(op.cuts):
            rayful = [c for c in _cut_components(g, {x}) if _rayed(g, c)]
            if len(rayful) != 2:
                out.append(f"cut vertex {x!r} does not separate the two ends")
    else:
        if len(op.cuts) < 2:
            return ["periodic model needs at least two cut vertices"]
        cuts = sorted(op.cuts)
        for i, x in enumerate(cuts):
            for y in cuts[i + 1:]:
                direct = _direct_edges(g, x, y)
                if len(direct) > 1:
                    out.append(f"parallel edges between cuts {x!r} and {y!r}")
                    continue
                arcs = [
                    c
                    for c in _cut_components(g, {x, y})
                    if _touches(g, c, x) and _touches(g, c, y)
                ]
                if len(arcs) + len(direct) != 2:
                    out.append(f"cuts {x!r} and {y!r} do not leave exactly two arcs")
    return out


def _validate_two_ended_join(op: TwoEndedJoin, g: RayedGraph) -> list[str]:
    if op.orientation not in ("line", "closure"):
        return [f"unknown orientation {op.orientation!r}"]
    if len(op.pieces) < 2:
        return ["need at least two pieces"]
    out = []
    comps = []
    for i, (entry, exit_) in enumerate(op.pieces):
        for v in (entry, exit_):
            if not g.has_vertex(v):
                return [f"no vertex {v!r}"]
        if entry == exit_:
            out.append(f"piece {i} entry and exit coincide")
            comps.append(component_of(g, entry))
            continue
        comp = component_of(g, entry)
        if exit_ not in comp:
            out.append(f"piece {i} entry and exit lie in different components")
        comps.append(comp)
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            if comps[i] == comps[j]:
                out.append(f"pieces {i} and {j} share a component")
    k = len(op.pieces)
    for i, comp in enumerate(comps):
        rays_here = component_rays(g, comp)
        if op.orientation == "closure" or 0 < i < k - 1:
            if rays_here:
                out.append(f"piece {i} must be ray-free")
        elif i == 0:
            want = op.pieces[0][0]
            if len(rays_here) != 1 or g.rays[rays_here[0]] != want:
                out.append("first piece needs exactly one ray, at its entry")
        else:
            want = op.pieces[-1][1]
            if len(rays_here) != 1 or g.rays[rays_here[0]] != want:
                out.append("last piece needs exactly one ray, at its exit")
    return out


def _twist_lists(g: RayedGraph, pair, block) -> tuple[tuple, tuple]:
    x, y = pair
    lx = tuple(sorted(e for e in g.incident(x) if g.other_end(e, x) in block))
    ly = tuple(sorted(e for e in g.incident(y) if g.other_end(e, y) in block))
    return lx, ly


def _validate_finite_twist(op: FiniteTwist, g: RayedGraph) -> list[str]:
    x, y = op.pair
    for v in (x, y):
        if not g.has_vertex(v):
            return [f"no vertex {v!r}"]
    if x == y:
        return ["cut pair vertices coincide"]
    if y not in component_of(g, x):
        return ["cut pair spans two components"]
    out = []
    pieces = _cut_components(g, {x, y})
    if len(pieces) < 2:
        out.append(f"{{{x!r}, {y!r}}} is not a cut pair")
    unknown = [e for e in sorted(op.side) if not g.has_edge(e)]
    if unknown:
        return out + [f"unknown edges {unknown}"]
    block = span(g, op.side) - {x, y}
    if not block or block not in pieces:
        out.append("side is not a full component of the cut")
        return out
    if op.side != _side_edges(g, block):
        out.append("side does not carry every edge meeting its vertices")
    if _rayed(g, block):
        out.append("twisted side is not ray-free")
    lx, ly = _twist_lists(g, op.pair, block)
    if op.lx is not None and op.lx != lx:
        out.append("re-attachment list for the first vertex does not match the side")
    if op.ly is not None and op.ly != ly:
        out.append("re-attachment list for the second vertex does not match the side")
    return out


def _two_ended_twist_block(op: TwoEndedTwist, g: RayedGraph):
    """The vertex set whose pair edges swap, or a violation string.

    A ray anchored at a pair vertex sits on the boundary of the cut: it
    counts as separated from the other end, and twisting toward it moves
    nothing (the empty block).
    """
    x, y = op.pair
    comp = component_of(g, x)
    mode = _two_ended_mode(g, comp)
    pieces = _cut_components(g, {x, y})
    if mode == "open":
        if op.toward not in g.rays:
            return f"toward {op.toward!r} is not a ray of an open component"
        anchor = g.rays[op.toward]
        if anchor not in comp:
            return f"ray {op.toward!r} lives in a different component"
        sides = {}
        for rid in component_rays(g, comp):
            at = g.rays[rid]
            sides[rid] = None if at in (x, y) else next(c for c in pieces if at in c)
        r1, r2 = sorted(sides)
        if sides[r1] is not None and sides[r1] == sides[r2]:
            return f"pair {op.pair!r} does not separate the two ends"
        block = sides[op.toward]
        return frozenset() if block is None else block
    if mode == "periodic":
        if not g.has_vertex(op.toward):
            return f"toward {op.toward!r} names neither a ray nor a vertex"
        if op.toward in (x, y) or op.toward not in comp:
            return f"toward {op.toward!r} does not pick an arc of the circle"
        arcs = [c for c in pieces if _touches(g, c, x) and _touches(g, c, y)]
        if len(arcs) != 2:
            return f"pair {op.pair!r} does not leave exactly two arcs"
        for c in arcs:
            if op.toward in c:
                return c
        return f"toward {op.toward!r} does not pick an arc of the circle"
    return "component must carry exactly two rays, or none (periodic model)"


def _validate_simultaneous_twist(op: SimultaneousTwist, g: RayedGraph) -> list[str]:
    if not op.records:
        return ["no twist records"]
    out = []
    seen: set = set()
    blocks = []
    for i, rec in enumerate(op.records):
        if isinstance(rec, FiniteTwist):
            errs = _validate_finite_twist(rec, g)
            out.extend(f"record {i}: {e}" for e in errs)
            blocks.append(
                span(g, rec.side) - set(rec.pair) if not errs else frozenset()
            )
        elif isinstance(rec, TwoEndedTwist):
            x, y = rec.pair
            if not (g.has_vertex(x) and g.has_vertex(y)) or x == y:
                out.append(f"record {i}: bad cut pair {rec.pair!r}")
                blocks.append(frozenset())
                continue
            if y not in component_of(g, x):
                out.append(f"record {i}: cut pair spans two components")
                blocks.append(frozenset())
                continue
            block = _two_ended_twist_block(rec, g)
            if isinstance(block, str):
                out.append(f"record {i}: {block}")
                blocks.append(frozenset())
            else:
                blocks.append(block)
        else:
            out.append(f"record {i}: not a twist record: {type(rec).__name__}")
            blocks.append(frozenset())
    pair_vertices = [set(rec.pair) for rec in op.records]
    for i, pv in enumerate(pair_vertices):
        if seen & pv:
            out.append(f"record {i}: cut pairs are not pairwise disjoint")
        seen |= pv
    for i, rec in enumerate(op.records):
        if isinstance(rec, FiniteTwist):
            others = seen - set(rec.pair)
            if blocks[i] & others:
                out.append(f"record {i}: twisted side contains another cut vertex")
    # non-crossing: no pair may separate the two vertices of another pair
    for i, rec in enumerate(op.records):
        if not isinstance(rec, TwoEndedTwist):
            continue
        x, y = rec.pair
        if not (g.has_vertex(x) and g.has_vertex(y)) or x == y:
            continue
        for j, other in enumerate(op.records):
            if j <= i or not isinstance(other, TwoEndedTwist):
                continue
            if not g.has_vertex(other.pair[0]):
                continue
            if other.pair[0] not in component_of(g, x):
                continue
            for c in _cut_components(g, {x, y}):
                if sum(1 for v in other.pair if v in c) == 1:
                    out.append(f"records {i} and {j}: crossing cut pairs")
                    break
    return out


_VALIDATORS = {
    FiniteSplit: _validate_finite_split,
    FiniteJoin: _validate_finite_join,
    TwoEndedSplit: _validate_two_ended_split,
    TwoEndedJoin: _validate_two_ended_join,
    FiniteTwist: _validate_finite_twist,
    SimultaneousTwist: _validate_simultaneous_twist,
}


# ------------------------------------------------------------------- apply


def apply(op: WhitneyOp, g: RayedGraph) -> tuple[RayedGraph, dict[str, str]]:
    """The transformed graph plus the (identity) edge map.

    Raises OpValidationError when validate(op, g) reports violations.
    """
    violations = validate(op, g)
    if violations:
        raise OpValidationError(op, violations)
    g2 = _APPLIERS[type(op)](op, g)
    return g2, {e: e for e in g.edge_ids}


def _reattach(edges: dict, moves: dict) -> dict:
    # moves: eid -> {old endpoint: new endpoint}
    out = dict(edges)
    for eid, swap in moves.items():
        u, v = out[eid]
        out[eid] = (swap.get(u, u), swap.get(v, v))
    return out


def _apply_finite_split(op: FiniteSplit, g: RayedGraph) -> RayedGraph:
    block = span(g, op.side) - {op.vertex}
    copy = op.copy or _fresh_vertex(op.vertex, set(g.vertices))
    moves = {}
    for e in g.incident(op.vertex):
        if e in op.side:
            moves[e] = {op.vertex: copy}
    return RayedGraph(
        list(g.vertices) + [copy], _reattach(g.edges, moves), g.rays
    )


def _apply_finite_join(op: FiniteJoin, g: RayedGraph) -> RayedGraph:
    moves = {e: {op.absorbed: op.vertex} for e in g.incident(op.absorbed)}
    verts = [v for v in g.vertices if v != op.absorbed]
    return RayedGraph(verts, _reattach(g.edges, moves), g.rays)


def _open_cut_order(g: RayedGraph, comp: frozenset, cuts) -> tuple[list[str], str, str]:
    """Cut vertices ordered from the lesser ray, plus the two ray anchors."""
    rays = sorted(component_rays(g, comp))
    left_anchor = g.rays[rays[0]]
    right_anchor = g.rays[rays[1]]

    def left_part(x):
        for c in _cut_components(g, {x}):
            if _rayed(g, c) and left_anchor in c:
                return c
        return frozenset()

    parts = {x: left_part(x) for x in cuts}
    # x precedes y exactly when x sits on y's left side
    ordered = sorted(cuts, key=lambda x: (len(parts[x]), x))
    for i in range(len(ordered) - 1):
        assert ordered[i] in parts[ordered[i + 1]], "cuts are not nested"
    return ordered, left_anchor, right_anchor


def _apply_split_edges(g: RayedGraph, ordered, move_edges) -> RayedGraph:
    taken = set(g.vertices)
    moves: dict = {}
    copies = {}
    for x in ordered:
        copy = _fresh_vertex(x, taken)
        taken.add(copy)
        copies[x] = copy
        for e in move_edges[x]:
            moves.setdefault(e, {})[x] = copy
    return RayedGraph(
        list(g.vertices) + [copies[x] for x in ordered],
        _reattach(g.edges, moves),
        g.rays,
    )


def _apply_two_ended_split(op: TwoEndedSplit, g: RayedGraph) -> RayedGraph:
    comp = component_of(g, op.component)
    move_edges = {}
    if _two_ended_mode(g, comp) == "open":
        ordered, _, right_anchor = _open_cut_order(g, comp, op.cuts)
        for x in ordered:
            right = next(c for c in _cut_components(g, {x}) if right_anchor in c)
            move_edges[x] = frozenset(
                e
                for e in g.incident(x)
                if not g.is_loop(e) and g.other_end(e, x) in right
            )
        return _apply_split_edges(g, ordered, move_edges)
    ordered = _circle_order(g, comp, op.cuts)
    for i, x in enumerate(ordered):
        nxt = ordered[(i + 1) % len(ordered)]
        move_edges[x] = _arc_edges(g, x, nxt, ordered)
    return _apply_split_edges(g, ordered, move_edges)


def _circle_order(g: RayedGraph, comp: frozenset, cuts) -> list[str]:
    """Cut vertices in circle order, from the least cut toward its lesser
    neighbor."""
    cuts = set(cuts)
    if len(cuts) == 2:
        return sorted(cuts)
    touch = []
    for s in _cut_components(g, cuts):
        touch.append({y for y in cuts if _touches(g, s, y)})

    def neighbors(x):
        found = {g.other_end(e, x) for e in g.incident(x)} & cuts - {x}
        for t in touch:
            if x in t and len(t) == 2:
                found |= t - {x}
        return sorted(found)

    start = min(cuts)
    order = [start]
    prev = None
    current = start
    while True:
        nxt = [v for v in neighbors(current) if v != prev][0]
        if nxt == start:
            break
        order.append(nxt)
        prev, current = current, nxt
    return order


def _arc_edges(g: RayedGraph, x: str, nxt: str, ordered) -> frozenset:
    """Edges at x belonging to the circle arc running from x to nxt.

    An arc is either a component of the cut at {x, nxt} or a bare edge
    between them. With only two cuts both arcs run between the same pair;
    the first cut in circle order takes the first slot and the second cut
    the other, so no arc is claimed twice.
    """
    others = set(ordered) - {x, nxt}
    arcs = sorted(
        (
            c
            for c in _cut_components(g, {x, nxt})
            if not (c & others) and _touches(g, c, x) and _touches(g, c, nxt)
        ),
        key=min,
    )
    slots = [
        frozenset(
            e
            for e in g.incident(x)
            if not g.is_loop(e) and g.other_end(e, x) in c
        )
        for c in arcs
    ]
    slots += [frozenset({e}) for e in _direct_edges(g, x, nxt)]
    if len(ordered) == 2 and x == ordered[1]:
        slots = slots[1:]
    return slots[0] if slots else frozenset()


def _apply_two_ended_join(op: TwoEndedJoin, g: RayedGraph) -> RayedGraph:
    joints = [
        (op.pieces[i][1], op.pieces[i + 1][0]) for i in range(len(op.pieces) - 1)
    ]
    if op.orientation == "closure":
        joints.append((op.pieces[-1][1], op.pieces[0][0]))
    edges = dict(g.edges)
    doomed = set()
    for keep, absorb in joints:
        moves = {
            e: {absorb: keep} for e, ends in edges.items() if absorb in ends
        }
        edges = _reattach(edges, moves)
        doomed.add(absorb)
    verts = [v for v in g.vertices if v not in doomed]
    return RayedGraph(verts, edges, g.rays)


def _apply_finite_twist(op: FiniteTwist, g: RayedGraph) -> RayedGraph:
    x, y = op.pair
    block = span(g, op.side) - {x, y}
    lx, ly = _twist_lists(g, op.pair, block)
    moves = {}
    for e in lx:
        moves[e] = {x: y}
    for e in ly:
        moves.setdefault(e, {})[y] = x
    return g.replace(edges=_reattach(g.edges, moves))


def _apply_simultaneous_twist(op: SimultaneousTwist, g: RayedGraph) -> RayedGraph:
    moves: dict = {}
    for rec in op.records:
        x, y = rec.pair
        if isinstance(rec, FiniteTwist):
            block = span(g, rec.side) - {x, y}
        else:
            block = _two_ended_twist_block(rec, g)
        for e in g.incident(x):
            if not g.is_loop(e) and g.other_end(e, x) in block:
                moves.setdefault(e, {})[x] = y
        for e in g.incident(y):
            if not g.is_loop(e) and g.other_end(e, y) in block:
                moves.setdefault(e, {})[y] = x
    return g.replace(edges=_reattach(g.edges, moves))


_APPLIERS = {
    FiniteSplit: _apply_finite_split,
    FiniteJoin: _apply_finite_join,
    TwoEndedSplit: _apply_two_ended_split,
    TwoEndedJoin: _apply_two_ended_join,
    FiniteTwist: _apply_finite_twist,
    SimultaneousTwist: _apply_simultaneous_twist,
}


# ------------------------------------------------------------------ invert


def invert(op: WhitneyOp, g: Optional[RayedGraph] = None) -> WhitneyOp:
    """The operation undoing `op`.

    Twists are involutions and need no context. A split knows its join when
    the copy name is pinned; the remaining kinds need `g`, the graph the
    operation was applied to, to reconstruct their parameters.
    """
    if isinstance(op, (FiniteTwist, SimultaneousTwist)):
        return op
    if isinstance(op, FiniteSplit):
        copy = op.copy
        if copy is None:
            if g is None:
                raise ValueError(
                    "inverting an unpinned FiniteSplit needs the graph it was applied to"
                )
            copy = _fresh_vertex(op.vertex, set(g.vertices))
        return FiniteJoin(vertex=op.vertex, absorbed=copy)
    if isinstance(op, FiniteJoin):
        if g is None:
            raise ValueError("inverting a FiniteJoin needs the graph it was applied to")
        comp = component_of(g, op.absorbed)
        return FiniteSplit(
            vertex=op.vertex, side=_side_edges(g, comp), copy=op.absorbed
        )
    if isinstance(op, TwoEndedJoin):
        exits = [x for _, x in op.pieces]
        if op.orientation == "line":
            cuts = frozenset(exits[:-1])
        else:
            cuts = frozenset(exits)
        return TwoEndedSplit(component=exits[0], cuts=cuts)
    if isinstance(op, TwoEndedSplit):
        if g is None:
            raise ValueError(
                "inverting a TwoEndedSplit needs the graph it was applied to"
            )
        comp = component_of(g, op.component)
        taken = set(g.vertices)
        mode = _two_ended_mode(g, comp)
        if mode == "open":
            ordered, left_anchor, right_anchor = _open_cut_order(g, comp, op.cuts)
        else:
            ordered = _circle_order(g, comp, op.cuts)
        copies = {}
        for x in ordered:
            copies[x] = _fresh_vertex(x, taken)
            taken.add(copies[x])
        if mode == "open":
            chain = [(left_anchor, ordered[0])]
            for i in range(1, len(ordered)):
                chain.append((copies[ordered[i - 1]], ordered[i]))
            chain.append((copies[ordered[-1]], right_anchor))
            return TwoEndedJoin(pieces=tuple(chain), orientation="line")
        chain = [
            (copies[x], ordered[(i + 1) % len(ordered)])
            for i, x in enumerate(ordered)
        ]
        return TwoEndedJoin(pieces=tuple(chain), orientation="closure")
    raise ValueError(f"cannot invert {type(op).__name__}")


# --------------------------------------------------------------- sequences


@dataclass(frozen=True)
class OpSequence:
    """A replayed run of operations with its intermediate graphs.

    graphs[i] is the graph before ops[i]; graphs[-1] is the result. The
    induced edge bijection is the identity on ids, since operations only
    re-attach endpoints. `alterations` counts, per edge, how many ops moved
    at least one of its endpoints.
    """

    ops: tuple
    graphs: tuple
    alterations: dict = field(compare=False)

    @property
    def initial(self) -> RayedGraph:
        return self.graphs[0]

    @property
    def final(self) -> RayedGraph:
        return self.graphs[-1]

    @property
    def induced(self) -> EdgeBijection:
        return EdgeBijection(
            self.initial, self.final, {e: e for e in self.initial.edge_ids}
        )


def apply_sequence(g: RayedGraph, ops) -> OpSequence:
    """Validate and apply each op in turn; fail naming the offending index."""
    graphs = [g]
    alterations = {e: 0 for e in g.edge_ids}
    current = g
    for i, op in enumerate(ops):
        violations = validate(op, current)
        if violations:
            raise OpValidationError(op, [f"op {i}: {v}" for v in violations])
        nxt, _ = apply(op, current)
        for e in current.edge_ids:
            if current.endpoints(e) != nxt.endpoints(e):
                alterations[e] += 1
        graphs.append(nxt)
        current = nxt
    return OpSequence(ops=tuple(ops), graphs=tuple(graphs), alterations=alterations)


def compose(seq: OpSequence) -> EdgeBijection:
    return seq.induced


def check_sequence_weak_iso(seq: OpSequence) -> WeakIsoReport:
    return check_weak_isomorphism(seq.induced)


def invert_sequence(seq: OpSequence) -> OpSequence:
    """Replay the inverses against seq.final.

    A chain of splits is undone by the matching joins in the original
    order; anything else is undone step by step in reverse order.
    """
    inverses = [invert(op, seq.graphs[i]) for i, op in enumerate(seq.ops)]
    if all(isinstance(op, FiniteSplit) for op in seq.ops):
        order = inverses
    else:
        order = list(reversed(inverses))
    return apply_sequence(seq.final, order)


def apply_batch(g: RayedGraph, ops) -> OpSequence:
    """Disjoint same-kind ops as one step: sequential in sorted order."""
    ops = list(ops)
    if not ops:
        return apply_sequence(g, [])
    kinds = {type(op) for op in ops}
    if len(kinds) > 1:
        raise OpValidationError(ops[0], ["batch mixes operation kinds"])
    supports = []
    for op in ops:
        violations = validate(op, g)
        if violations:
            raise OpValidationError(op, violations)
        supports.append(_support(op, g))
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            if supports[i] & supports[j]:
                raise OpValidationError(
                    ops[j], ["batch operations overlap, apply them as a sequence"]
                )
    return apply_sequence(g, sorted(ops, key=_batch_key))


def _support(op: WhitneyOp, g: RayedGraph) -> frozenset:
    if isinstance(op, FiniteSplit):
        return span(g, op.side) | {op.vertex}
    if isinstance(op, FiniteJoin):
        return component_of(g, op.absorbed) | {op.vertex}
    if isinstance(op, FiniteTwist):
        return span(g, op.side) | set(op.pair)
    if isinstance(op, TwoEndedSplit):
        return component_of(g, op.component)
    if isinstance(op, TwoEndedJoin):
        out: set = set()
        for entry, _ in op.pieces:
            out |= component_of(g, entry)
        return frozenset(out)
    if isinstance(op, SimultaneousTwist):
        out = set()
        for rec in op.records:
            out |= set(rec.pair)
            if isinstance(rec, FiniteTwist):
                out |= span(g, rec.side)
            else:
                block = _two_ended_twist_block(rec, g)
                if not isinstance(block, str):
                    out |= block
        return frozenset(out)
    return frozenset()


def _batch_key(op: WhitneyOp):
    if isinstance(op, FiniteSplit):
        return (op.vertex, sorted(op.side))
    if isinstance(op, FiniteJoin):
        return (op.vertex, op.absorbed)
    if isinstance(op, FiniteTwist):
        return (op.pair, sorted(op.side))
    if isinstance(op, TwoEndedSplit):
        return (op.component, sorted(op.cuts))
    if isinstance(op, TwoEndedJoin):
        return (op.pieces,)
    return tuple(sorted(rec.pair for rec in op.records))


# -------------------------------------------------------------------- json


def op_to_dict(op) -> dict:
    if isinstance(op, FiniteSplit):
        out = {"kind": op.kind, "vertex": op.vertex, "side": sorted(op.side)}
        if op.copy is not None:
            out["copy"] = op.copy
        return out
    if isinstance(op, FiniteJoin):
        return {"kind": op.kind, "vertex": op.vertex, "absorbed": op.absorbed}
    if isinstance(op, TwoEndedSplit):
        return {"kind": op.kind, "component": op.component, "cuts": sorted(op.cuts)}
    if isinstance(op, TwoEndedJoin):
        return {
            "kind": op.kind,
            "orientation": op.orientation,
            "pieces": [[e, x] for e, x in op.pieces],
        }
    if isinstance(op, FiniteTwist):
        out = {"kind": op.kind, "pair": list(op.pair), "side": sorted(op.side)}
        if op.lx is not None:
            out["lx"] = list(op.lx)
        if op.ly is not None:
            out["ly"] = list(op.ly)
        return out
    if isinstance(op, TwoEndedTwist):
        return {"kind": op.kind, "pair": list(op.pair), "toward": op.toward}
    if isinstance(op, SimultaneousTwist):
        return {"kind": op.kind, "records": [op_to_dict(r) for r in op.records]}
    raise ValueError(f"not an operation: {op!r}")


def op_from_dict(data: dict):
    kind = data.get("kind")
    if kind == "FiniteSplit":
        return FiniteSplit(
            vertex=data["vertex"],
            side=frozenset(data["side"]),
            copy=data.get("copy"),
        )
    if kind == "FiniteJoin":
        return FiniteJoin(vertex=data["vertex"], absorbed=data["absorbed"])
    if kind == "TwoEndedSplit":
        return TwoEndedSplit(component=data["component"], cuts=frozenset(data["cuts"]))
    if kind == "TwoEndedJoin":
        return TwoEndedJoin(
            pieces=tuple((e, x) for e, x in data["pieces"]),
            orientation=data.get("orientation", "line"),
        )
    if kind == "FiniteTwist":
        return FiniteTwist(
            pair=tuple(data["pair"]),
            side=frozenset(data["side"]),
            lx=tuple(data["lx"]) if "lx" in data else None,
            ly=tuple(data["ly"]) if "ly" in data else None,
        )
    if kind == "TwoEndedTwist":
        return TwoEndedTwist(pair=tuple(data["pair"]), toward=data["toward"])
    if kind == "SimultaneousTwist":
        return SimultaneousTwist(
            records=tuple(op_from_dict(r) for r in data["records"])
        )
    raise ValueError(f"unknown operation kind {kind!r}")


def ops_to_json(ops) -> str:
    return json.dumps({"ops": [op_to_dict(op) for op in ops]}, indent=2, sort_keys=True) + "\n"


def ops_from_json(text: str) -> list:
    data = json.loads(text)
    return [op_from_dict(d) for d in data["ops"]]
