"""Weak isomorphism checks, search, extraction, and diagnostics."""

import random
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raykit import fixtures, serialize
from raykit.graphs import RayedGraph, wedges
from raykit.matroid import RankOracle
from raykit.weakiso import (
    EdgeBijection,
    ExtractionFailure,
    check_cycle_preserving,
    check_tameness_preserving,
    check_weak_isomorphism,
    extract_induced_isomorphism,
    identity_bijection,
    preservation_diagnostics,
    search_weak_isomorphisms,
    wedge_image,
)

from .oracles import (
    brute_weak_isomorphisms,
    edge_maps_from_vertex_maps,
    graph_automorphisms,
    random_connected_graph,
    random_rayed_graph,
)


def ladder_bijection():
    return EdgeBijection(
        fixtures.build("ladder_a"),
        fixtures.build("ladder_b"),
        fixtures.MAPS["ladder_map"](),
    )


def bowtie_bijection():
    return EdgeBijection(
        fixtures.build("bowtie"),
        fixtures.build("bowtie_split"),
        fixtures.MAPS["bowtie_map"](),
    )


def test_bijection_validation():
    tri = fixtures.build("triangle")
    sq = fixtures.build("square")
    with pytest.raises(ValueError):
        EdgeBijection(tri, sq, {e: e for e in tri.edge_ids})  # not onto
    with pytest.raises(ValueError):
        EdgeBijection(tri, tri, {"ab": "ab"})  # partial
    m = {e: e for e in tri.edge_ids}
    m[sorted(m)[0]] = sorted(m)[1]  # collide two values
    with pytest.raises(ValueError):
        EdgeBijection(tri, tri, m)


def test_bijection_roundtrips():
    phi = ladder_bijection()
    assert phi.invert().invert().mapping == phi.mapping
    composed = phi.then(phi.invert())
    assert composed.mapping == identity_bijection(phi.source).mapping
    again = serialize.loads_map(phi.to_json())
    assert again == phi.mapping


def test_composition_requires_matching_middle():
    phi = ladder_bijection()
    with pytest.raises(ValueError):
        phi.then(phi)


@pytest.mark.parametrize(
    "name", [n for n in sorted(fixtures.GRAPHS) if n != "gadget_ring"]
)
def test_identity_is_a_weak_isomorphism(name):
    g = fixtures.build(name)
    rep = check_weak_isomorphism(identity_bijection(g))
    assert rep.verdict
    assert rep.rank_preserving
    assert rep.rank_matches_verdict


def test_identity_on_the_banana_ring_family_mode():
    g = fixtures.build("gadget_ring")
    rep = check_weak_isomorphism(identity_bijection(g))
    assert rep.verdict and rep.rank_preserving
    assert not rep.exhaustive  # 96 edges: structured family only


def test_any_permutation_of_one_cycle_preserves_cycles():
    sq = fixtures.build("square")
    ids = sorted(sq.edge_ids)
    rng = random.Random(7)
    for _ in range(6):
        perm = list(ids)
        rng.shuffle(perm)
        phi = EdgeBijection(sq, sq, dict(zip(ids, perm)))
        assert check_cycle_preserving(phi).ok


def test_triangle_to_path_fails_with_the_triangle_as_witness():
    tri = fixtures.build("triangle")
    p3 = fixtures.build("path3")
    phi = EdgeBijection(tri, p3, dict(zip(sorted(tri.edge_ids), sorted(p3.edge_ids))))
    res = check_cycle_preserving(phi)
    assert not res.ok
    assert res.witness == frozenset(tri.edge_ids)


def test_cycle_check_degrades_past_the_cap():
    k4 = fixtures.build("k4")
    res = check_cycle_preserving(identity_bijection(k4), cap=3)
    assert res.ok and not res.exhaustive
    tri = fixtures.build("triangle")
    p3 = fixtures.build("path3")
    phi = EdgeBijection(tri, p3, dict(zip(sorted(tri.edge_ids), sorted(p3.edge_ids))))
    res = check_cycle_preserving(phi, cap=0)
    assert not res.ok and not res.exhaustive


def test_ray_free_graphs_are_always_tame():
    k4 = fixtures.build("k4")
    for phi in search_weak_isomorphisms(k4, k4, limit=5):
        res = check_tameness_preserving(phi)
        assert res.ok and res.exhaustive


def test_split_bijection_fails_tameness_on_the_full_edge_set():
    res = check_tameness_preserving(bowtie_bijection())
    assert not res.ok
    assert res.witness == frozenset(fixtures.build("bowtie").edge_ids)


def test_ladder_bijection_is_a_weak_isomorphism():
    rep = check_weak_isomorphism(ladder_bijection())
    assert rep.verdict and rep.exhaustive
    assert rep.cycle_preserving and rep.tameness_preserving


def test_ladder_bijection_moves_subset_ranks():
    # a weak isomorphism between two-ended graphs need not preserve the
    # rank of individual subsets; the report discloses the disagreement
    phi = ladder_bijection()
    rep = check_weak_isomorphism(phi)
    assert rep.verdict
    assert not rep.rank_preserving
    assert not rep.rank_matches_verdict
    wit = rep.rank_counterexample
    r1 = RankOracle(phi.source).rank(wit)
    r2 = RankOracle(phi.target).rank(phi.image(wit))
    assert r1 != r2
    # the top rail is an explicit small example of the same break
    rails = frozenset(["T0", "T1", "T2"])
    assert RankOracle(phi.source).rank(rails) != RankOracle(phi.target).rank(
        phi.image(rails)
    )


def test_split_bijection_report():
    rep = check_weak_isomorphism(bowtie_bijection())
    assert rep.cycle_preserving
    assert not rep.tameness_preserving
    assert not rep.verdict
    assert rep.tameness_counterexample == frozenset(fixtures.build("bowtie").edge_ids)


def test_family_mode_catches_a_three_ray_vertex():
    g = fixtures.build("tree3_depth3_subdivided")
    extra = RayedGraph(
        list(g.vertices) + ["w"], g.edges, dict(g.rays, rw1="w", rw2="w", rw3="w")
    )
    rep = check_weak_isomorphism(EdgeBijection(extra, g, {e: e for e in g.edge_ids}))
    assert not rep.verdict
    assert rep.tameness_counterexample == frozenset()


def test_family_mode_full_set_witness():
    # bowtie plus rayless padding pushes past the exhaustive limit; the
    # full edge set must still surface as the witness
    def padded(base_name):
        base = fixtures.build(base_name)
        verts = list(base.vertices)
        edges = dict(base.edges)
        for i in range(15):
            verts += [f"x{i}", f"y{i}"]
            edges[f"pad{i}"] = (f"x{i}", f"y{i}")
        return RayedGraph(verts, edges, base.rays)

    src = padded("bowtie")
    tgt = padded("bowtie_split")
    phi = EdgeBijection(src, tgt, {e: e for e in src.edge_ids})
    rep = check_weak_isomorphism(phi)
    assert not rep.exhaustive
    assert rep.cycle_preserving
    assert not rep.tameness_preserving
    assert rep.tameness_counterexample == frozenset(src.edge_ids)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_identity_verdict_on_random_graphs(seed):
    g = random_rayed_graph(random.Random(seed), max_vertices=7, max_edges=10)
    rep = check_weak_isomorphism(identity_bijection(g))
    assert rep.verdict and rep.rank_preserving


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_search_matches_brute_oracle(seed):
    g = random_rayed_graph(random.Random(seed), max_vertices=5, max_edges=6)
    got = {tuple(sorted(p.mapping.items())) for p in search_weak_isomorphisms(g, g)}
    want = {tuple(sorted(m.items())) for m in brute_weak_isomorphisms(g, g)}
    assert got == want


@pytest.mark.parametrize(
    "name", ["bowtie", "theta_rays", "tripod", "star_2rays", "digon", "triple_link"]
)
def test_search_matches_brute_oracle_on_fixtures(name):
    g = fixtures.build(name)
    got = {tuple(sorted(p.mapping.items())) for p in search_weak_isomorphisms(g, g)}
    want = {tuple(sorted(m.items())) for m in brute_weak_isomorphisms(g, g)}
    assert got == want


def test_k4_search_finds_exactly_the_24_automorphisms():
    k4 = fixtures.build("k4")
    res = search_weak_isomorphisms(k4, k4)
    assert len(res) == 24
    induced = edge_maps_from_vertex_maps(k4, graph_automorphisms(k4))
    assert {tuple(sorted(p.mapping.items())) for p in res} == {
        tuple(sorted(m.items())) for m in induced
    }


def test_square_search_finds_all_24_permutations():
    sq = fixtures.build("square")
    res = search_weak_isomorphisms(sq, sq)
    assert len(res) == 24
    assert len(search_weak_isomorphisms(fixtures.build("triangle"), fixtures.build("path3"))) == 0


def test_search_limit_returns_a_stable_prefix():
    k4 = fixtures.build("k4")
    full = search_weak_isomorphisms(k4, k4)
    part = search_weak_isomorphisms(k4, k4, limit=5)
    assert [p.mapping for p in part] == [p.mapping for p in full[:5]]


@pytest.mark.parametrize("name", ["k5", "prism", "wheel5", "tree3_depth2"])
def test_rigidity_search_equals_automorphism_induced_maps(name):
    g = fixtures.build(name)
    res = search_weak_isomorphisms(g, g)
    induced = edge_maps_from_vertex_maps(g, graph_automorphisms(g))
    assert {tuple(sorted(p.mapping.items())) for p in res} == {
        tuple(sorted(m.items())) for m in induced
    }


def test_weak_isos_compose_and_invert():
    g = fixtures.build("theta_rays")
    res = search_weak_isomorphisms(g, g, limit=6)
    assert res
    for phi in res:
        assert check_weak_isomorphism(phi.invert()).verdict
    combined = res[1].then(res[2].invert())
    assert check_weak_isomorphism(combined).verdict


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_rank_agreement_equals_verdict_on_ray_free_graphs(seed):
    rng = random.Random(seed)
    g = random_connected_graph(rng, rng.randint(2, 5), rng.randint(2, 6))
    ids = sorted(g.edge_ids)
    maps = (
        [dict(zip(ids, p)) for p in permutations(ids)]
        if len(ids) <= 4
        else [dict(zip(ids, rng.sample(ids, len(ids)))) for _ in range(30)]
    )
    for m in maps:
        rep = check_weak_isomorphism(EdgeBijection(g, g, m))
        assert rep.rank_matches_verdict


def test_wedge_images_under_identity_stay_wedges():
    k4 = fixtures.build("k4")
    phi = identity_bijection(k4)
    for w in wedges(k4):
        img = wedge_image(phi, w)
        assert img.wedge and w.center in img.shared


def test_all_wedges_stay_wedges_under_searched_weak_isos():
    k4 = fixtures.build("k4")
    for phi in search_weak_isomorphisms(k4, k4):
        assert all(wedge_image(phi, w).wedge for w in wedges(k4))


def test_adjacent_transposition_breaks_a_wedge():
    sq = fixtures.build("square")
    ids = sorted(sq.edge_ids)
    m = {e: e for e in ids}
    # swap two edges meeting at a vertex; some wedge then maps to an
    # opposite (disjoint) pair
    a, b = ids[0], ids[1]
    m[a], m[b] = m[b], m[a]
    phi = EdgeBijection(sq, sq, m)
    assert any(not wedge_image(phi, w).wedge for w in wedges(sq))


def test_wedge_image_rejects_foreign_wedges():
    sq = fixtures.build("square")
    tri = fixtures.build("triangle")
    w = wedges(tri)[0]
    with pytest.raises(ValueError):
        wedge_image(identity_bijection(sq), w)


def test_extract_identity_gives_identity():
    k4 = fixtures.build("k4")
    psi = extract_induced_isomorphism(identity_bijection(k4))
    assert psi == {v: v for v in k4.vertices}


def test_extract_recovers_the_square_rotation():
    sq = fixtures.build("square")
    ids = sorted(sq.edge_ids)
    rot = dict(zip(ids, ids[1:] + ids[:1]))
    psi = extract_induced_isomorphism(EdgeBijection(sq, sq, rot))
    assert isinstance(psi, dict)
    for e in ids:
        u, v = sq.endpoints(e)
        assert tuple(sorted((psi[u], psi[v]))) == sq.endpoints(rot[e])


def test_extract_on_searched_maps_agrees_with_automorphisms():
    k4 = fixtures.build("k4")
    auts = graph_automorphisms(k4)
    for phi in search_weak_isomorphisms(k4, k4):
        psi = extract_induced_isomorphism(phi)
        assert psi in auts
        for e in k4.edge_ids:
            u, v = k4.endpoints(e)
            assert tuple(sorted((psi[u], psi[v]))) == k4.endpoints(phi[e])


def test_extract_counts_rays_toward_the_degree_gate():
    g = fixtures.build("tree3_depth2")
    phi = search_weak_isomorphisms(g, g, limit=3)[-1]
    psi = extract_induced_isomorphism(phi)
    assert isinstance(psi, dict)
    for e in g.edge_ids:
        u, v = g.endpoints(e)
        assert tuple(sorted((psi[u], psi[v]))) == g.endpoints(phi[e])


def test_extract_rejects_bare_leaves():
    p3 = fixtures.build("path3")
    with pytest.raises(ValueError):
        extract_induced_isomorphism(identity_bijection(p3))


def test_extract_failure_pinpoints_a_vertex():
    sq = fixtures.build("square")
    ids = sorted(sq.edge_ids)
    m = {e: e for e in ids}
    m[ids[0]], m[ids[1]] = m[ids[1]], m[ids[0]]
    out = extract_induced_isomorphism(EdgeBijection(sq, sq, m))
    assert isinstance(out, ExtractionFailure)
    assert out.vertex in sq.vertices
    assert out.reason


def test_ladder_diagnostics_pass_with_bananas_gated():
    diag = preservation_diagnostics(ladder_bijection())
    assert diag.weak_iso and diag.ok
    assert diag.clauses["components"].status == "pass"
    assert diag.clauses["ends"].status == "pass"
    assert diag.clauses["bananas"].status == "skipped"
    assert diag.clauses["bananas"].reason


def test_identity_diagnostics_all_pass_on_a_banana_fixture():
    g = fixtures.build("antenna_triangle")
    diag = preservation_diagnostics(identity_bijection(g))
    assert diag.ok
    assert all(c.status == "pass" for c in diag.clauses.values())


def test_diagnostics_skip_everything_for_non_weak_isos():
    diag = preservation_diagnostics(bowtie_bijection())
    assert not diag.weak_iso and not diag.ok
    assert all(c.status == "skipped" for c in diag.clauses.values())


def test_diagnostics_gate_explains_why_components_can_shatter():
    # a weak isomorphism may scatter one acyclic ray-free component over
    # three, exactly because such graphs fail the strong-connectivity gate
    p3 = fixtures.build("path3")
    tgt = RayedGraph(
        ["a0", "a1", "b0", "b1", "c0", "c1"],
        {"p": ("a0", "a1"), "q": ("b0", "b1"), "r": ("c0", "c1")},
    )
    phi = EdgeBijection(p3, tgt, dict(zip(sorted(p3.edge_ids), ["p", "q", "r"])))
    rep = check_weak_isomorphism(phi)
    assert rep.verdict
    diag = preservation_diagnostics(phi)
    assert diag.clauses["components"].status == "skipped"
    assert "strongly 2-connected" in diag.clauses["components"].reason


def test_search_is_deterministic():
    g = fixtures.build("theta_rays")
    a = [p.mapping for p in search_weak_isomorphisms(g, g)]
    b = [p.mapping for p in search_weak_isomorphisms(g, g)]
    assert a == b
