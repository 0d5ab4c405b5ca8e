"""Surgery operations: validation, mechanics, inversion, induced bijections."""

from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from raykit import fixtures
from raykit.graphs import RayedGraph, components, has_cycle
from raykit.matroid import RankOracle
from raykit.ops import (
    FiniteJoin,
    FiniteSplit,
    FiniteTwist,
    OpValidationError,
    SimultaneousTwist,
    TwoEndedJoin,
    TwoEndedSplit,
    TwoEndedTwist,
    apply,
    apply_batch,
    apply_sequence,
    check_sequence_weak_iso,
    compose,
    invert,
    invert_sequence,
    op_from_dict,
    op_to_dict,
    ops_from_json,
    ops_to_json,
    validate,
)
from raykit.weakiso import EdgeBijection, extract_induced_isomorphism

from .oracles import random_rayed_graph


def subset_ranks_agree(g1, g2, exhaustive_up_to=14, samples=200, seed=0):
    """Same rank for every common edge subset (sampled above the cutoff)."""
    assert set(g1.edge_ids) == set(g2.edge_ids)
    r1, r2 = RankOracle(g1), RankOracle(g2)
    ids = sorted(g1.edge_ids)
    if len(ids) <= exhaustive_up_to:
        pool = (
            frozenset(c)
            for k in range(len(ids) + 1)
            for c in combinations(ids, k)
        )
    else:
        import random

        rng = random.Random(seed)
        pool = [frozenset(ids), frozenset()]
        pool += [
            frozenset(e for e in ids if rng.random() < 0.5) for _ in range(samples)
        ]
    return all(r1.rank(f) == r2.rank(f) for f in pool)


def hexagon():
    return RayedGraph(
        [f"c{i}" for i in range(6)],
        {f"e{i}": (f"c{i}", f"c{(i + 1) % 6}") for i in range(6)},
    )


def rayed_path(n):
    """Path v0..v(n-1) with one ray at each end."""
    return RayedGraph(
        [f"v{i}" for i in range(n)],
        {f"e{i}": (f"v{i}", f"v{i + 1}") for i in range(n - 1)},
        rays={"left": "v0", "right": f"v{n - 1}"},
    )


LADDER_TWIST = SimultaneousTwist(
    records=(
        TwoEndedTwist(pair=("t0", "b0"), toward="right"),
        TwoEndedTwist(pair=("t1", "b1"), toward="left"),
        TwoEndedTwist(pair=("t2", "b2"), toward="right"),
        TwoEndedTwist(pair=("t3", "b3"), toward="left"),
    )
)


# ------------------------------------------------------------ finite split


def test_lollipop_hub_split_detaches_triangle():
    g = fixtures.lollipop()
    op = FiniteSplit(vertex="v2", side={"a", "b", "c"})
    assert validate(op, g) == []
    g2, emap = apply(op, g)
    assert emap == {e: e for e in g.edge_ids}
    comps = [sorted(c) for c in components(g2)]
    assert ["v0", "v1", "v2.1"] in comps
    assert ["u0", "u1", "v2"] in comps
    assert g2.rays == g.rays


def test_split_copy_name_can_be_pinned():
    g = fixtures.lollipop()
    g2, _ = apply(FiniteSplit(vertex="v2", side={"a", "b", "c"}, copy="hub"), g)
    assert g2.has_vertex("hub")
    assert not g2.has_vertex("v2.1")


def test_split_rejects_non_cut_vertex():
    g = fixtures.lollipop()
    errs = validate(FiniteSplit(vertex="v0", side={"a", "c"}), g)
    assert any("not a cut vertex" in e for e in errs)


def test_split_rejects_partial_side():
    g = fixtures.lollipop()
    errs = validate(FiniteSplit(vertex="v2", side={"a", "b"}), g)
    assert errs == ["side does not carry every edge meeting its vertices"]


def test_split_rejects_rayed_side():
    g = fixtures.lollipop()
    errs = validate(FiniteSplit(vertex="v2", side={"p0", "p1"}), g)
    assert errs == ["split-off side is not ray-free"]


def test_split_rejects_taken_copy_name():
    g = fixtures.lollipop()
    errs = validate(FiniteSplit(vertex="v2", side={"a", "b", "c"}, copy="u0"), g)
    assert any("already in use" in e for e in errs)


def test_split_rejects_unknown_edges_and_empty_side():
    g = fixtures.lollipop()
    assert validate(FiniteSplit(vertex="v2", side={"zz"}), g) == [
        "unknown edges ['zz']"
    ]
    assert validate(FiniteSplit(vertex="v2", side=frozenset()), g) == [
        "empty split-off side"
    ]


def test_apply_raises_with_violation_list():
    g = fixtures.lollipop()
    with pytest.raises(OpValidationError) as exc:
        apply(FiniteSplit(vertex="v0", side={"a", "c"}), g)
    assert any("not a cut vertex" in v for v in exc.value.violations)


def test_split_then_join_restores_exactly():
    g = fixtures.lollipop()
    op = FiniteSplit(vertex="v2", side={"a", "b", "c"})
    g2, _ = apply(op, g)
    back = invert(op, g)
    assert back == FiniteJoin(vertex="v2", absorbed="v2.1")
    g3, _ = apply(back, g2)
    assert g3 == g


# ------------------------------------------------------------- finite join


def test_join_rejects_shared_component():
    g = fixtures.lollipop()
    errs = validate(FiniteJoin(vertex="v0", absorbed="v1"), g)
    assert any("share a component" in e for e in errs)


def test_join_rejects_rayed_component():
    g = RayedGraph(
        ["a", "u", "v"], {"e": ("u", "v")}, rays={"r": "u"}
    )
    errs = validate(FiniteJoin(vertex="a", absorbed="v"), g)
    assert errs == ["absorbed component is not ray-free"]


def test_join_absorbs_loops_and_parallels():
    g = RayedGraph(
        ["a", "u", "v"],
        {"l": ("u", "u"), "m1": ("u", "v"), "m2": ("u", "v")},
    )
    g2, _ = apply(FiniteJoin(vertex="a", absorbed="u"), g)
    assert g2.endpoints("l") == ("a", "a")
    assert g2.endpoints("m1") == ("a", "v")
    assert not g2.has_vertex("u")


def test_inverting_a_join_needs_the_graph():
    op = FiniteJoin(vertex="a", absorbed="u")
    with pytest.raises(ValueError, match="needs the graph"):
        invert(op)


def test_join_inverts_to_the_exact_split():
    g = RayedGraph(["a", "b", "u", "v"], {"e": ("u", "v"), "f": ("a", "b")})
    op = FiniteJoin(vertex="a", absorbed="u")
    back = invert(op, g)
    assert back == FiniteSplit(vertex="a", side=frozenset({"e"}), copy="u")
    g2, _ = apply(op, g)
    g3, _ = apply(back, g2)
    assert g3 == g


# ------------------------------------------------------------ finite twist


def test_hung_square_twist_mirrors_the_diagonal():
    g = fixtures.hung_square()
    op = FiniteTwist(pair=("x", "y"), side={"sq_xu", "sq_uw", "sq_wy", "diag"})
    assert validate(op, g) == []
    g2, _ = apply(op, g)
    expected = g.replace(
        edges={
            **g.edges,
            "sq_xu": ("y", "u"),
            "sq_wy": ("x", "w"),
            "diag": ("y", "w"),
        }
    )
    assert g2 == expected


def test_twist_is_an_involution():
    g = fixtures.hung_square()
    op = FiniteTwist(pair=("x", "y"), side={"sq_xu", "sq_uw", "sq_wy", "diag"})
    assert invert(op) == op
    g2, _ = apply(op, g)
    g3, _ = apply(op, g2)
    assert g3 == g


def test_twist_checks_pinned_attachment_lists():
    g = fixtures.hung_square()
    side = {"sq_xu", "sq_uw", "sq_wy", "diag"}
    good = FiniteTwist(pair=("x", "y"), side=side, lx=("diag", "sq_xu"), ly=("sq_wy",))
    assert validate(good, g) == []
    bad = FiniteTwist(pair=("x", "y"), side=side, lx=("sq_xu",), ly=("sq_wy",))
    errs = validate(bad, g)
    assert any("does not match the side" in e for e in errs)


def test_twist_rejects_non_cut_pair():
    g = fixtures.square()
    errs = validate(FiniteTwist(pair=("v0", "v1"), side={"b", "c", "d"}), g)
    assert errs == ["{'v0', 'v1'} is not a cut pair"]


def test_square_twist_across_opposite_corners():
    g = fixtures.square()
    op = FiniteTwist(pair=("v0", "v2"), side={"a", "b"})
    assert validate(op, g) == []
    g2, _ = apply(op, g)
    assert g2.endpoints("a") == ("v1", "v2")
    assert g2.endpoints("b") == ("v0", "v1")
    assert subset_ranks_agree(g, g2)


def test_twist_rejects_rayed_side():
    g = fixtures.hung_square()
    errs = validate(FiniteTwist(pair=("p", "q"), side={"l0"}), g)
    assert "twisted side is not ray-free" in errs


def test_one_sided_pendant_block_twist_is_allowed():
    # the block touches only one pair vertex; the twist just carries it over
    g = RayedGraph(
        ["a", "x", "y", "b", "d", "d2"],
        {
            "e0": ("a", "x"), "e1": ("x", "y"), "e2": ("y", "b"),
            "p0": ("x", "d"), "p1": ("d", "d2"),
        },
        rays={"left": "a", "right": "b"},
    )
    op = FiniteTwist(pair=("x", "y"), side={"p0", "p1"})
    assert validate(op, g) == []
    g2, _ = apply(op, g)
    assert g2.endpoints("p0") == ("d", "y")
    assert subset_ranks_agree(g, g2)
    g3, _ = apply(op, g2)
    assert g3 == g


# --------------------------------------------------------- two-ended split


def test_line_split_cuts_into_pieces():
    g = fixtures.bi_line()
    op = TwoEndedSplit(component="v0", cuts={"v1", "v3"})
    assert validate(op, g) == []
    g2, _ = apply(op, g)
    comps = [sorted(c) for c in components(g2)]
    assert comps == [
        ["v0", "v1"],
        ["v1.1", "v2", "v3"],
        ["v3.1", "v4", "v5"],
    ]


def test_line_split_join_round_trip():
    g = fixtures.bi_line()
    op = TwoEndedSplit(component="v0", cuts={"v1", "v3"})
    g2, _ = apply(op, g)
    back = invert(op, g)
    assert back == TwoEndedJoin(
        pieces=(("v0", "v1"), ("v1.1", "v3"), ("v3.1", "v5")), orientation="line"
    )
    assert validate(back, g2) == []
    g3, _ = apply(back, g2)
    assert g3 == g


def test_split_rejects_cut_at_ray_anchor():
    g = fixtures.bi_line()
    errs = validate(TwoEndedSplit(component="v0", cuts={"v0"}), g)
    assert any("does not separate the two ends" in e for e in errs)


def test_split_rejects_one_ray_component():
    g = fixtures.lollipop()
    errs = validate(TwoEndedSplit(component="v0", cuts={"v2"}), g)
    assert errs == ["component must carry exactly two rays, or none (periodic model)"]


def test_decoration_at_cut_stays_with_the_original_vertex():
    g = RayedGraph(
        ["v0", "v1", "v2", "v3", "p"],
        {
            "e0": ("v0", "v1"), "e1": ("v1", "v2"), "e2": ("v2", "v3"),
            "pd": ("v1", "p"),
        },
        rays={"left": "v0", "right": "v3"},
    )
    op = TwoEndedSplit(component="v0", cuts={"v1"})
    assert validate(op, g) == []
    g2, _ = apply(op, g)
    assert g2.endpoints("pd") == ("p", "v1")
    assert g2.endpoints("e1") == ("v1.1", "v2")
    g3, _ = apply(invert(op, g), g2)
    assert g3 == g


def test_loop_at_cut_stays_put():
    g = RayedGraph(
        ["v0", "v1", "v2"],
        {"e0": ("v0", "v1"), "e1": ("v1", "v2"), "lp": ("v1", "v1")},
        rays={"left": "v0", "right": "v2"},
    )
    g2, _ = apply(TwoEndedSplit(component="v0", cuts={"v1"}), g)
    assert g2.endpoints("lp") == ("v1", "v1")
    assert g2.endpoints("e1") == ("v1.1", "v2")


def test_closure_split_breaks_the_wrap_cycle():
    # the wrap-around circle exists only in the periodic finite model;
    # cutting it is the one surgery that changes the cycle family
    g = hexagon()
    op = TwoEndedSplit(component="c0", cuts={"c0", "c2", "c4"})
    assert validate(op, g) == []
    seq = apply_sequence(g, [op])
    assert has_cycle(g, g.edge_ids)
    assert not has_cycle(seq.final, seq.final.edge_ids)
    report = check_sequence_weak_iso(seq)
    assert not report.verdict
    assert report.cycle_counterexample == frozenset(g.edge_ids)


def test_closure_round_trips():
    g = hexagon()
    for cuts in ({"c0", "c2", "c4"}, {"c0", "c3"}, {"c1", "c2"}):
        op = TwoEndedSplit(component="c0", cuts=cuts)
        assert validate(op, g) == []
        g2, _ = apply(op, g)
        assert len(components(g2)) == len(cuts)
        back = invert(op, g)
        assert back.orientation == "closure"
        g3, _ = apply(back, g2)
        assert g3 == g


def test_closure_rejects_chords():
    g = hexagon().replace(edges={**hexagon().edges, "chord": ("c0", "c3")})
    errs = validate(TwoEndedSplit(component="c0", cuts={"c1", "c4"}), g)
    assert any("exactly two arcs" in e for e in errs)


def test_closure_rejects_parallel_cut_edges():
    g = fixtures.digon()
    errs = validate(TwoEndedSplit(component="u", cuts={"u", "v"}), g)
    assert any("parallel edges between cuts" in e for e in errs)


# ---------------------------------------------------------- two-ended join


def test_join_needs_at_least_two_pieces():
    g = fixtures.bi_line()
    errs = validate(TwoEndedJoin(pieces=(("v0", "v1"),)), g)
    assert errs == ["need at least two pieces"]


def test_join_rejects_pieces_in_one_component():
    g = fixtures.bi_line()
    errs = validate(TwoEndedJoin(pieces=(("v0", "v1"), ("v2", "v3"))), g)
    assert any("share a component" in e for e in errs)


def test_line_join_wants_rays_at_the_extremes():
    g = fixtures.bi_line()
    g2, _ = apply(TwoEndedSplit(component="v0", cuts={"v1", "v3"}), g)
    swapped = TwoEndedJoin(
        pieces=(("v1", "v0"), ("v1.1", "v3"), ("v3.1", "v5"))
    )
    errs = validate(swapped, g2)
    assert any("exactly one ray, at its entry" in e for e in errs)


def test_join_invert_needs_no_graph():
    op = TwoEndedJoin(pieces=(("v0", "v1"), ("v1.1", "v3"), ("v3.1", "v5")))
    back = invert(op)
    assert back == TwoEndedSplit(component="v1", cuts=frozenset({"v1", "v3"}))
    closure = TwoEndedJoin(
        pieces=(("c0.1", "c2"), ("c2.1", "c4"), ("c4.1", "c0")),
        orientation="closure",
    )
    assert invert(closure) == TwoEndedSplit(
        component="c2", cuts=frozenset({"c0", "c2", "c4"})
    )


# ------------------------------------------------------ simultaneous twist


def test_ladder_twist_realizes_the_ladder_bijection():
    ga = fixtures.ladder_a()
    gb = fixtures.ladder_b()
    lmap = fixtures.ladder_map()
    assert validate(LADDER_TWIST, ga) == []
    seq = apply_sequence(ga, [LADDER_TWIST])
    bij = seq.induced.then(EdgeBijection(seq.final, gb, lmap))
    assert bij.mapping == lmap
    phi = extract_induced_isomorphism(EdgeBijection(seq.final, gb, lmap))
    assert phi == {v: v for v in gb.vertices}
    report = check_sequence_weak_iso(seq)
    assert report.verdict
    assert not report.rank_preserving


def test_boundary_ray_record_is_a_no_op():
    # a ray anchored at a pair vertex is its own side of the cut: twisting
    # toward it moves nothing
    ga = fixtures.ladder_a()
    op = SimultaneousTwist(records=(TwoEndedTwist(pair=("t0", "b0"), toward="left"),))
    assert validate(op, ga) == []
    g2, _ = apply(op, ga)
    assert g2 == ga


def test_two_ended_record_moves_edges_toward_the_named_end():
    g = fixtures.hung_square()
    op = SimultaneousTwist(records=(TwoEndedTwist(pair=("x", "y"), toward="right"),))
    assert validate(op, g) == []
    g2, _ = apply(op, g)
    assert g2.endpoints("l3") == ("q", "x")
    assert g2.endpoints("sq_xu") == ("u", "x")  # pendant block is neither end
    assert g2.endpoints("l2") == ("x", "y")


def test_record_toward_an_unseparated_end_is_rejected():
    g = fixtures.hung_square()
    op = SimultaneousTwist(records=(TwoEndedTwist(pair=("u", "w"), toward="right"),))
    errs = validate(op, g)
    assert any("does not separate the two ends" in e for e in errs)


def test_overlapping_pairs_rejected():
    g = rayed_path(6)
    op = SimultaneousTwist(
        records=(
            TwoEndedTwist(pair=("v1", "v3"), toward="right"),
            TwoEndedTwist(pair=("v3", "v5"), toward="right"),
        )
    )
    errs = validate(op, g)
    assert any("not pairwise disjoint" in e for e in errs)


def test_crossing_pairs_rejected():
    g = rayed_path(6)
    op = SimultaneousTwist(
        records=(
            TwoEndedTwist(pair=("v1", "v3"), toward="right"),
            TwoEndedTwist(pair=("v2", "v4"), toward="right"),
        )
    )
    errs = validate(op, g)
    assert any("crossing cut pairs" in e for e in errs)


def test_finite_record_side_must_avoid_other_pairs():
    g = fixtures.hung_square()
    op = SimultaneousTwist(
        records=(
            FiniteTwist(
                pair=("p", "q"),
                side={"l1", "l2", "l3", "sq_xu", "sq_uw", "sq_wy", "diag"},
            ),
            FiniteTwist(pair=("x", "y"), side={"sq_xu", "sq_uw", "sq_wy", "diag"}),
        )
    )
    errs = validate(op, g)
    assert any("contains another cut vertex" in e for e in errs)


def test_adjacent_facing_records_rewrite_both_endpoints():
    # two pairs on a path facing each other: the middle edge swaps at both
    # ends in the same step
    g = rayed_path(8)
    op = SimultaneousTwist(
        records=(
            TwoEndedTwist(pair=("v1", "v3"), toward="right"),
            TwoEndedTwist(pair=("v4", "v6"), toward="left"),
        )
    )
    assert validate(op, g) == []
    g2, _ = apply(op, g)
    assert g2.endpoints("e3") == ("v1", "v6")
    g3, _ = apply(op, g2)
    assert g3 == g


# ---------------------------------------------------------------- sequences


def test_empty_sequence_is_the_identity():
    g = fixtures.lollipop()
    seq = apply_sequence(g, [])
    assert seq.final == g
    assert compose(seq).mapping == {e: e for e in g.edge_ids}
    assert check_sequence_weak_iso(seq).verdict


def test_sequence_failure_names_the_failing_index():
    g = fixtures.lollipop()
    op = FiniteSplit(vertex="v2", side={"a", "b", "c"})
    with pytest.raises(OpValidationError) as exc:
        apply_sequence(g, [op, op])
    assert any(v.startswith("op 1:") for v in exc.value.violations)


def test_pendant_gadget_batch_split():
    g = fixtures.pendant_line()
    ops = [
        FiniteSplit(vertex="a1", side={"ped"}),
        FiniteSplit(vertex="a2", side={"tri0", "tri1", "tri2"}),
        FiniteSplit(vertex="a3", side={"rh0", "rh1", "rh2", "rh3"}),
        FiniteSplit(vertex="a4", side={"k01", "k02", "k03", "k12", "k13", "k23"}),
    ]
    seq = apply_batch(g, ops)
    comps = [sorted(c) for c in components(seq.final)]
    assert sorted(len(c) for c in comps) == [2, 3, 4, 4, 6]
    assert ["a1", "a2", "a3", "a4", "vl", "vr"] in comps
    report = check_sequence_weak_iso(seq)
    assert report.verdict
    assert report.rank_preserving


def test_split_chain_inverts_with_joins_in_original_order():
    g = RayedGraph(
        ["vl", "c", "vr", "d0", "d1", "d00", "d01"],
        {
            "l0": ("vl", "c"), "l1": ("c", "vr"),
            "t0": ("c", "d0"), "t1": ("c", "d1"),
            "t00": ("d0", "d00"), "t01": ("d0", "d01"),
        },
        rays={"left": "vl", "right": "vr"},
    )
    chain = [
        FiniteSplit(vertex="c", side={"t0", "t00", "t01"}),
        FiniteSplit(vertex="d0", side={"t00"}),
        FiniteSplit(vertex="d0", side={"t01"}),
    ]
    seq = apply_sequence(g, chain)
    assert [sorted(c) for c in components(seq.final)] == [
        ["c", "d1", "vl", "vr"],
        ["c.1", "d0"],
        ["d0.1", "d00"],
        ["d0.2", "d01"],
    ]
    back = invert_sequence(seq)
    assert list(back.ops) == [
        FiniteJoin(vertex="c", absorbed="c.1"),
        FiniteJoin(vertex="d0", absorbed="d0.1"),
        FiniteJoin(vertex="d0", absorbed="d0.2"),
    ]
    assert back.final == g


def test_mixed_sequence_inverts_in_reverse():
    g = fixtures.pendant_line()
    seq = apply_sequence(
        g,
        [
            FiniteSplit(vertex="a1", side={"ped"}),
            FiniteTwist(pair=("a2", "t1"), side={"tri1", "tri2"}),
        ],
    )
    back = invert_sequence(seq)
    assert [type(op).__name__ for op in back.ops] == ["FiniteTwist", "FiniteJoin"]
    assert back.final == g


def test_alterations_count_endpoint_changes():
    g = fixtures.pendant_line()
    ops = [
        FiniteSplit(vertex="a1", side={"ped"}),
        FiniteSplit(vertex="a2", side={"tri0", "tri1", "tri2"}),
    ]
    seq = apply_sequence(g, ops)
    assert seq.alterations["ped"] == 1
    assert seq.alterations["tri1"] == 0  # interior edge never moves
    assert seq.alterations["l0"] == 0
    twist = FiniteTwist(pair=("a2", "t1"), side={"tri1", "tri2"})
    wiggle = apply_sequence(g, [twist, twist, twist, twist])
    assert wiggle.alterations["tri2"] == 4
    assert wiggle.final == g


def test_batch_equals_sorted_sequence():
    g = fixtures.pendant_line()
    ops = [
        FiniteSplit(vertex="a3", side={"rh0", "rh1", "rh2", "rh3"}),
        FiniteSplit(vertex="a1", side={"ped"}),
    ]
    batch = apply_batch(g, ops)
    assert batch.ops == (ops[1], ops[0])
    assert batch.final == apply_sequence(g, [ops[1], ops[0]]).final


def test_batch_rejects_mixed_kinds():
    g = fixtures.pendant_line()
    with pytest.raises(OpValidationError, match="mixes operation kinds"):
        apply_batch(
            g,
            [
                FiniteSplit(vertex="a1", side={"ped"}),
                FiniteTwist(pair=("a2", "t1"), side={"tri1", "tri2"}),
            ],
        )


def test_batch_rejects_overlapping_supports():
    g = fixtures.pendant_line()
    op = FiniteSplit(vertex="a1", side={"ped"})
    with pytest.raises(OpValidationError, match="overlap"):
        apply_batch(g, [op, op])


def test_bowtie_batch_split_is_rejected():
    # both hub sides carry rays, so neither can be detached
    g = fixtures.bowtie()
    with pytest.raises(OpValidationError) as exc:
        apply_batch(
            g,
            [
                FiniteSplit(vertex="v", side={"ap", "aq", "apq"}),
                FiniteSplit(vertex="v", side={"br", "bs", "brs"}),
            ],
        )
    assert "split-off side is not ray-free" in exc.value.violations


# ------------------------------------------------------------ rank effects


@pytest.mark.parametrize(
    "name,op",
    [
        ("lollipop", FiniteSplit(vertex="v2", side=frozenset({"a", "b", "c"}))),
        (
            "hung_square",
            FiniteTwist(
                pair=("x", "y"), side=frozenset({"sq_xu", "sq_uw", "sq_wy", "diag"})
            ),
        ),
        ("bi_line", FiniteTwist(pair=("v1", "v3"), side=frozenset({"e1", "e2"}))),
        ("square", FiniteTwist(pair=("v0", "v2"), side=frozenset({"a", "b"}))),
    ],
)
def test_finite_surgeries_preserve_every_subset_rank(name, op):
    g = fixtures.GRAPHS[name]()
    g2, _ = apply(op, g)
    assert subset_ranks_agree(g, g2)


def test_two_ended_split_changes_the_full_rank():
    g = fixtures.bi_line()
    g2, _ = apply(TwoEndedSplit(component="v0", cuts={"v1", "v3"}), g)
    full = frozenset(g.edge_ids)
    assert RankOracle(g).rank(full) == 6
    assert RankOracle(g2).rank(full) == 7


def test_two_ended_record_changes_a_subset_rank():
    g = fixtures.hung_square()
    op = SimultaneousTwist(records=(TwoEndedTwist(pair=("x", "y"), toward="right"),))
    g2, _ = apply(op, g)
    f = frozenset({"l0", "l1", "l3", "l4"})
    assert RankOracle(g).rank(f) == 6
    assert RankOracle(g2).rank(f) == 5
    report = check_sequence_weak_iso(apply_sequence(g, [op]))
    assert report.verdict
    assert not report.rank_preserving


def test_split_and_join_cancel_rank_effects():
    g = fixtures.bi_line()
    op = TwoEndedSplit(component="v0", cuts={"v1", "v3"})
    seq = apply_sequence(g, [op, invert(op, g)])
    report = check_sequence_weak_iso(seq)
    assert report.verdict
    assert report.rank_preserving
    assert seq.final == g


# -------------------------------------------------------------------- json


@pytest.mark.parametrize(
    "op",
    [
        FiniteSplit(vertex="v2", side=frozenset({"a", "b"})),
        FiniteSplit(vertex="v2", side=frozenset({"a"}), copy="w"),
        FiniteJoin(vertex="v2", absorbed="v2.1"),
        TwoEndedSplit(component="v0", cuts=frozenset({"v1", "v3"})),
        TwoEndedJoin(pieces=(("v0", "v1"), ("v1.1", "v5"))),
        TwoEndedJoin(pieces=(("a.1", "b"), ("b.1", "a")), orientation="closure"),
        FiniteTwist(pair=("x", "y"), side=frozenset({"e"})),
        FiniteTwist(pair=("x", "y"), side=frozenset({"e"}), lx=("e",), ly=()),
        SimultaneousTwist(
            records=(
                TwoEndedTwist(pair=("t0", "b0"), toward="right"),
                FiniteTwist(pair=("x", "y"), side=frozenset({"e"})),
            )
        ),
    ],
)
def test_op_json_round_trip(op):
    assert op_from_dict(op_to_dict(op)) == op


def test_ops_json_round_trip_and_shape():
    ops = [
        FiniteSplit(vertex="v2", side=frozenset({"a", "b", "c"})),
        FiniteTwist(pair=("x", "y"), side=frozenset({"e"})),
    ]
    text = ops_to_json(ops)
    assert text.endswith("\n")
    assert ops_from_json(text) == ops


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="unknown operation kind"):
        op_from_dict({"kind": "Nonsense"})


# -------------------------------------------------------------- properties


def _valid_finite_twists(g):
    from raykit.graphs import component_of

    verts = sorted(g.vertices)
    for i, x in enumerate(verts):
        for y in verts[i + 1:]:
            if y not in component_of(g, x):
                continue
            keep = set(g.vertices) - {x, y}
            if not keep:
                continue
            sub = RayedGraph(
                keep,
                {e: ends for e, ends in g.edges.items() if set(ends) <= keep},
            )
            for comp in components(sub):
                side = frozenset(e for v in comp for e in g.incident(v))
                op = FiniteTwist(pair=(x, y), side=side)
                if validate(op, g) == []:
                    yield op


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_random_twists_preserve_ranks_and_involute(seed):
    import random

    g = random_rayed_graph(random.Random(seed), max_vertices=6, max_edges=9)
    found = 0
    for op in _valid_finite_twists(g):
        g2, _ = apply(op, g)
        assert subset_ranks_agree(g, g2, exhaustive_up_to=9)
        g3, _ = apply(op, g2)
        assert g3 == g
        assert check_sequence_weak_iso(apply_sequence(g, [op])).verdict
        found += 1
        if found >= 3:
            break


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_random_splits_restore_exactly(seed):
    import random

    from raykit.graphs import component_of

    g = random_rayed_graph(random.Random(seed), max_vertices=7, max_edges=10)
    rayed_at = set(g.rays.values())
    for v in sorted(g.vertices):
        keep = component_of(g, v) - {v}
        if not keep:
            continue
        sub = RayedGraph(
            keep,
            {e: ends for e, ends in g.edges.items() if set(ends) <= keep},
        )
        for comp in components(sub):
            if comp & rayed_at:
                continue
            side = frozenset(e for u in comp for e in g.incident(u))
            op = FiniteSplit(vertex=v, side=side)
            if validate(op, g):
                continue
            g2, _ = apply(op, g)
            assert set(g2.edge_ids) == set(g.edge_ids)
            assert subset_ranks_agree(g, g2, exhaustive_up_to=10)
            g3, _ = apply(invert(op, g), g2)
            assert g3 == g
            return
