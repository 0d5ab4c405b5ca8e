"""Curated graph fixtures.

Every fixture is built by a deterministic, parameter-free function so the
checked-in JSON files under fixtures/ can be regenerated bit-exactly.
Ray markers follow the one-ray-one-end convention throughout.
"""

from __future__ import annotations

from .graphs import RayedGraph
from . import serialize


def triangle() -> RayedGraph:
    return RayedGraph(
        ["v0", "v1", "v2"],
        {"a": ("v0", "v1"), "b": ("v1", "v2"), "c": ("v0", "v2")},
    )


def path3() -> RayedGraph:
    """Path with three edges; the acyclic partner of the triangle."""
    return RayedGraph(
        ["p0", "p1", "p2", "p3"],
        {"a": ("p0", "p1"), "b": ("p1", "p2"), "c": ("p2", "p3")},
    )


def digon() -> RayedGraph:
    return RayedGraph(["u", "v"], {"a": ("u", "v"), "b": ("u", "v")})


def triple_link() -> RayedGraph:
    return RayedGraph(
        ["u", "v"],
        {"a": ("u", "v"), "b": ("u", "v"), "c": ("u", "v")},
    )


def square() -> RayedGraph:
    return RayedGraph(
        ["v0", "v1", "v2", "v3"],
        {"a": ("v0", "v1"), "b": ("v1", "v2"), "c": ("v2", "v3"), "d": ("v0", "v3")},
    )


def k4() -> RayedGraph:
    vs = ["v0", "v1", "v2", "v3"]
    edges = {}
    for i in range(4):
        for j in range(i + 1, 4):
            edges[f"e{i}{j}"] = (vs[i], vs[j])
    return RayedGraph(vs, edges)


def k5() -> RayedGraph:
    vs = [f"v{i}" for i in range(5)]
    edges = {}
    for i in range(5):
        for j in range(i + 1, 5):
            edges[f"e{i}{j}"] = (vs[i], vs[j])
    return RayedGraph(vs, edges)


def prism() -> RayedGraph:
    """Triangular prism: two triangles joined by a matching."""
    vs = ["a0", "a1", "a2", "b0", "b1", "b2"]
    edges = {
        "ta0": ("a0", "a1"),
        "ta1": ("a1", "a2"),
        "ta2": ("a0", "a2"),
        "tb0": ("b0", "b1"),
        "tb1": ("b1", "b2"),
        "tb2": ("b0", "b2"),
        "m0": ("a0", "b0"),
        "m1": ("a1", "b1"),
        "m2": ("a2", "b2"),
    }
    return RayedGraph(vs, edges)


def wheel5() -> RayedGraph:
    """Wheel on a 5-cycle plus hub."""
    vs = ["hub"] + [f"r{i}" for i in range(5)]
    edges = {}
    for i in range(5):
        edges[f"rim{i}"] = (f"r{i}", f"r{(i + 1) % 5}")
        edges[f"spoke{i}"] = ("hub", f"r{i}")
    return RayedGraph(vs, edges)


def octahedron() -> RayedGraph:
    """K_{2,2,2}: three pairs of antipodal vertices."""
    vs = [f"v{i}" for i in range(6)]
    antipode = {0: 1, 1: 0, 2: 3, 3: 2, 4: 5, 5: 4}
    edges = {}
    for i in range(6):
        for j in range(i + 1, 6):
            if antipode[i] != j:
                edges[f"e{i}{j}"] = (vs[i], vs[j])
    return RayedGraph(vs, edges)


def theta() -> RayedGraph:
    """Two hubs joined by three internally disjoint length-2 paths."""
    vs = ["x", "y", "m0", "m1", "m2"]
    edges = {}
    for i in range(3):
        edges[f"a{i}"] = ("x", f"m{i}")
        edges[f"b{i}"] = (f"m{i}", "y")
    return RayedGraph(vs, edges)


def theta_rays() -> RayedGraph:
    g = theta()
    return g.replace(rays={"rx": "x", "ry": "y"})


def lollipop() -> RayedGraph:
    """Triangle hung on a rayed pendant path; the hub v2 is a cut vertex."""
    return RayedGraph(
        ["v0", "v1", "v2", "u0", "u1"],
        {
            "a": ("v0", "v1"),
            "b": ("v1", "v2"),
            "c": ("v0", "v2"),
            "p0": ("v2", "u0"),
            "p1": ("u0", "u1"),
        },
        rays={"end": "u1"},
    )


def bi_line() -> RayedGraph:
    """Five-edge path with a ray at each end: the finite model of a line."""
    vs = [f"v{i}" for i in range(6)]
    edges = {f"e{i}": (f"v{i}", f"v{i+1}") for i in range(5)}
    return RayedGraph(vs, edges, rays={"left": "v0", "right": "v5"})


def tripod() -> RayedGraph:
    """Three legs from a hub, one ray per leaf: minimal 3-ended fixture."""
    return RayedGraph(
        ["h", "l0", "l1", "l2"],
        {"a": ("h", "l0"), "b": ("h", "l1"), "c": ("h", "l2")},
        rays={"r0": "l0", "r1": "l1", "r2": "l2"},
    )


def path_2rays() -> RayedGraph:
    return RayedGraph(
        ["p0", "p1", "p2", "p3"],
        {"a": ("p0", "p1"), "b": ("p1", "p2"), "c": ("p2", "p3")},
        rays={"left": "p0", "right": "p3"},
    )


def star_2rays() -> RayedGraph:
    """Three-edge star with two rayed leaves; rank-differs from path_2rays."""
    return RayedGraph(
        ["h", "l0", "l1", "l2"],
        {"a": ("h", "l0"), "b": ("h", "l1"), "c": ("h", "l2")},
        rays={"r0": "l0", "r1": "l1"},
    )


def _tree3(depth: int) -> tuple[list[str], dict[str, tuple[str, str]], list[str]]:
    # Labels: root "t"; children append 0..2 at the root, 0..1 below.
    vs = ["t"]
    edges: dict[str, tuple[str, str]] = {}
    frontier = ["t"]
    for level in range(depth):
        nxt = []
        width = 3 if level == 0 else 2
        for parent in frontier:
            for k in range(width):
                child = (parent + str(k)) if parent != "t" else f"t{k}"
                vs.append(child)
                edges["e" + (child[1:] if child.startswith("t") else child)] = (
                    parent,
                    child,
                )
                nxt.append(child)
        frontier = nxt
    return vs, edges, frontier


def tree3_depth2() -> RayedGraph:
    vs, edges, leaves = _tree3(2)
    rays = {"ray" + leaf[1:]: leaf for leaf in leaves}
    return RayedGraph(vs, edges, rays=rays)


def tree3_depth3() -> RayedGraph:
    vs, edges, leaves = _tree3(3)
    rays = {"ray" + leaf[1:]: leaf for leaf in leaves}
    return RayedGraph(vs, edges, rays=rays)


def _subdivide_all(g: RayedGraph) -> RayedGraph:
    vs = list(g.vertices)
    edges: dict[str, tuple[str, str]] = {}
    for eid in g.edge_ids:
        u, v = g.endpoints(eid)
        mid = "s" + eid
        vs.append(mid)
        edges[eid + "a"] = (u, mid)
        edges[eid + "b"] = (mid, v)
    return RayedGraph(vs, edges, rays=dict(g.rays))


def tree3_depth2_subdivided() -> RayedGraph:
    return _subdivide_all(tree3_depth2())


def tree3_depth3_subdivided() -> RayedGraph:
    return _subdivide_all(tree3_depth3())


_LADDER_RUNGS = 4


def _ladder(switch_even: bool) -> RayedGraph:
    n = _LADDER_RUNGS
    vs = [f"t{i}" for i in range(n)] + [f"b{i}" for i in range(n)]
    edges: dict[str, tuple[str, str]] = {}
    for i in range(n):
        edges[f"R{i}"] = (f"t{i}", f"b{i}")
    for i in range(n - 1):
        edges[f"T{i}"] = (f"t{i}", f"t{i+1}")
        edges[f"B{i}"] = (f"b{i}", f"b{i+1}")
        if switch_even and i % 2 == 0:
            edges[f"D{i}"] = (f"b{i}", f"t{i+1}")
        else:
            edges[f"D{i}"] = (f"t{i}", f"b{i+1}")
    return RayedGraph(vs, edges, rays={"left": "t0", "right": f"t{n-1}"})


def ladder_a() -> RayedGraph:
    """Braced ladder, one ray per end, every square braced the same way."""
    return _ladder(switch_even=False)


def ladder_b() -> RayedGraph:
    """Same ladder with the brace switched in every second square."""
    return _ladder(switch_even=True)


def ladder_map() -> dict[str, str]:
    """Edge bijection ladder_a -> ladder_b: rails swap in switched squares."""
    m = {eid: eid for eid in ladder_a().edge_ids}
    for i in range(_LADDER_RUNGS - 1):
        if i % 2 == 0:
            m[f"T{i}"] = f"B{i}"
            m[f"B{i}"] = f"T{i}"
    return m


def bowtie() -> RayedGraph:
    """Two triangles sharing a hub, rays on the four outer vertices."""
    return RayedGraph(
        ["v", "p", "q", "r", "s"],
        {
            "ap": ("v", "p"),
            "aq": ("v", "q"),
            "apq": ("p", "q"),
            "br": ("v", "r"),
            "bs": ("v", "s"),
            "brs": ("r", "s"),
        },
        rays={"rp": "p", "rq": "q", "rr": "r", "rs": "s"},
    )


def bowtie_split() -> RayedGraph:
    """The bowtie split at its hub into two disjoint 2-ray triangles."""
    return RayedGraph(
        ["v1", "v2", "p", "q", "r", "s"],
        {
            "ap": ("v1", "p"),
            "aq": ("v1", "q"),
            "apq": ("p", "q"),
            "br": ("v2", "r"),
            "bs": ("v2", "s"),
            "brs": ("r", "s"),
        },
        rays={"rp": "p", "rq": "q", "rr": "r", "rs": "s"},
    )


def bowtie_map() -> dict[str, str]:
    return {eid: eid for eid in bowtie().edge_ids}


_RING_SKELETON = [
    ("A", "B"),
    ("B", "C"),
    ("C", "A"),
    ("A", "LA"),
    ("LA", "RA"),
    ("RA", "A"),
    ("B", "LB"),
    ("LB", "RB"),
    ("RB", "B"),
    ("C", "LC"),
    ("LC", "RC"),
    ("RC", "C"),
]


def gadget_ring() -> RayedGraph:
    """Triangle of triangles with every edge replaced by a square bridge.

    Each bridge contributes four interior vertices and eight edges; the six
    outer corners carry rays. The maximal bananas are exactly the bridges.
    """
    vs = ["A", "B", "C", "LA", "RA", "LB", "RB", "LC", "RC"]
    edges: dict[str, tuple[str, str]] = {}
    for p, q in _RING_SKELETON:
        tag = f"{p}{q}"
        for c in "abcd":
            vs.append(f"{tag}.{c}")
        edges[f"{tag}.pa"] = (p, f"{tag}.a")
        edges[f"{tag}.pb"] = (p, f"{tag}.b")
        edges[f"{tag}.qc"] = (q, f"{tag}.c")
        edges[f"{tag}.qd"] = (q, f"{tag}.d")
        edges[f"{tag}.ac"] = (f"{tag}.a", f"{tag}.c")
        edges[f"{tag}.cd"] = (f"{tag}.c", f"{tag}.d")
        edges[f"{tag}.db"] = (f"{tag}.d", f"{tag}.b")
        edges[f"{tag}.ba"] = (f"{tag}.b", f"{tag}.a")
    rays = {f"ray{v}": v for v in ["LA", "RA", "LB", "RB", "LC", "RC"]}
    return RayedGraph(vs, edges, rays=rays)


def ring_skeleton() -> RayedGraph:
    """What gadget_ring's banana quotient should look like."""
    vs = ["A", "B", "C", "LA", "RA", "LB", "RB", "LC", "RC"]
    edges = {f"{p}{q}": (p, q) for p, q in _RING_SKELETON}
    rays = {f"ray{v}": v for v in ["LA", "RA", "LB", "RB", "LC", "RC"]}
    return RayedGraph(vs, edges, rays=rays)


def antenna_triangle() -> RayedGraph:
    """Triangle whose corners each carry two rayed pendant edges.

    Finite stand-in for the free product of a 3-cycle with a line: each
    corner's star is a trifurcation, and the Voronoi quotient over the
    pendant-pair seeds is again a triangle (so not acyclic).
    """
    vs = ["A", "B", "C", "LA", "RA", "LB", "RB", "LC", "RC"]
    edges = {f"{p}{q}": (p, q) for p, q in [("A", "B"), ("B", "C"), ("C", "A")]}
    for c in ["A", "B", "C"]:
        edges[f"{c}L{c}"] = (c, f"L{c}")
        edges[f"{c}R{c}"] = (c, f"R{c}")
    rays = {f"ray{v}": v for v in ["LA", "RA", "LB", "RB", "LC", "RC"]}
    return RayedGraph(vs, edges, rays=rays)


def hung_square() -> RayedGraph:
    """Square with a diagonal hung on a 2-ray line at the cut pair {x, y}.

    Twisting the pendant side {u, w} mirrors the diagonal from x to y. The
    pair also separates the two ends, so the same pair supports a twist in
    either mode.
    """
    return RayedGraph(
        ["vl", "p", "x", "y", "q", "vr", "u", "w"],
        {
            "l0": ("vl", "p"),
            "l1": ("p", "x"),
            "l2": ("x", "y"),
            "l3": ("y", "q"),
            "l4": ("q", "vr"),
            "sq_xu": ("x", "u"),
            "sq_uw": ("u", "w"),
            "sq_wy": ("w", "y"),
            "diag": ("x", "w"),
        },
        rays={"left": "vl", "right": "vr"},
    )


def pendant_line() -> RayedGraph:
    """2-ray line with four pendant gadgets: edge, triangle, rhombus, K4.

    Each attachment vertex a1..a4 is a cut vertex with a ray-free pendant
    side, so splitting at all four roots works as a single batch and leaves
    the bare line plus four detached components.
    """
    vs = ["vl", "a1", "a2", "a3", "a4", "vr"]
    edges: dict[str, tuple[str, str]] = {
        "l0": ("vl", "a1"),
        "l1": ("a1", "a2"),
        "l2": ("a2", "a3"),
        "l3": ("a3", "a4"),
        "l4": ("a4", "vr"),
    }
    vs += ["e1"]
    edges["ped"] = ("a1", "e1")
    vs += ["t1", "t2"]
    edges["tri0"] = ("a2", "t1")
    edges["tri1"] = ("t1", "t2")
    edges["tri2"] = ("a2", "t2")
    vs += ["r1", "r2", "r3"]
    edges["rh0"] = ("a3", "r1")
    edges["rh1"] = ("r1", "r2")
    edges["rh2"] = ("r2", "r3")
    edges["rh3"] = ("a3", "r3")
    vs += ["k1", "k2", "k3"]
    edges["k01"] = ("a4", "k1")
    edges["k02"] = ("a4", "k2")
    edges["k03"] = ("a4", "k3")
    edges["k12"] = ("k1", "k2")
    edges["k13"] = ("k1", "k3")
    edges["k23"] = ("k2", "k3")
    return RayedGraph(vs, edges, rays={"left": "vl", "right": "vr"})


def bifurcation_gadget() -> RayedGraph:
    """Two-ended gadget whose wedge (x,z,y) endpoints share a cycle avoiding z.

    One end behind z, the other behind w; removing the wedge center z leaves
    the 4-cycle x-u-y-v, so both wedge endpoints stay on a common cycle.
    """
    return RayedGraph(
        ["u", "v", "w", "x", "y", "z"],
        {
            "zx": ("z", "x"),
            "zy": ("z", "y"),
            "xu": ("x", "u"),
            "uy": ("u", "y"),
            "xv": ("x", "v"),
            "vy": ("v", "y"),
            "uw": ("u", "w"),
            "vw": ("v", "w"),
        },
        rays={"behind_z": "z", "behind_w": "w"},
    )


GRAPHS = {
    "triangle": triangle,
    "path3": path3,
    "digon": digon,
    "triple_link": triple_link,
    "square": square,
    "k4": k4,
    "k5": k5,
    "prism": prism,
    "wheel5": wheel5,
    "octahedron": octahedron,
    "theta": theta,
    "theta_rays": theta_rays,
    "lollipop": lollipop,
    "bi_line": bi_line,
    "tripod": tripod,
    "path_2rays": path_2rays,
    "star_2rays": star_2rays,
    "tree3_depth2": tree3_depth2,
    "tree3_depth3": tree3_depth3,
    "tree3_depth2_subdivided": tree3_depth2_subdivided,
    "tree3_depth3_subdivided": tree3_depth3_subdivided,
    "ladder_a": ladder_a,
    "ladder_b": ladder_b,
    "bowtie": bowtie,
    "bowtie_split": bowtie_split,
    "gadget_ring": gadget_ring,
    "ring_skeleton": ring_skeleton,
    "antenna_triangle": antenna_triangle,
    "bifurcation_gadget": bifurcation_gadget,
    "hung_square": hung_square,
    "pendant_line": pendant_line,
}

MAPS = {
    "ladder_map": ladder_map,
    "bowtie_map": bowtie_map,
}


def build(name: str) -> RayedGraph:
    try:
        return GRAPHS[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}") from None


def emit_all(directory: str) -> list[str]:
    """Write every fixture JSON file; returns the paths written."""
    import os

    os.makedirs(directory, exist_ok=True)
    written = []
    for name in sorted(GRAPHS):
        path = os.path.join(directory, name + ".json")
        serialize.save(GRAPHS[name](), path)
        written.append(path)
    for name in sorted(MAPS):
        path = os.path.join(directory, name + ".json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(serialize.dumps_map(MAPS[name]()))
        written.append(path)
    return written
