"""Tree building, cycle breaking, and repair versus offline oracles."""

import math
import random

import treecast as tc
from treecast.algorithms import (apply_update, build_mst, build_st,
                                 repair_delete, repair_insert, repair_weight,
                                 run_cycle_breaking)
from treecast.experiments import is_spanning_forest, kruskal
from treecast.graphs import cut_edges, marked_components, tree_of


def rand_graph(rng, n, m, u=None):
    u = u or 4 * n
    nodes = tuple(range(1, n + 1))
    edges = {}
    cap = n * (n - 1) // 2
    while len(edges) < min(m, cap):
        a, b = rng.sample(range(1, n + 1), 2)
        e = (min(a, b), max(a, b))
        if e not in edges:
            edges[e] = rng.randint(1, u)
    return tc.Graph(nodes, edges, u)


def cycle_graph(k, u=9):
    nodes = tuple(range(1, k + 1))
    edges = {(i, i + 1): 1 for i in range(1, k)}
    edges[(1, k)] = 1
    return tc.Graph(nodes, edges, u), set(edges)


def forest_ok(g, marks):
    comps = marked_components(g, marks)
    return len(marks) + len(comps) == g.n and all(
        (min(a, b), max(a, b)) in g.edges for (a, b) in marks)


# --- minimum spanning trees --------------------------------------------------

def test_build_mst_triangle():
    g = tc.Graph((1, 2, 3), {(1, 2): 5, (2, 3): 1, (1, 3): 2}, 9)
    out, rep = build_mst(g, tc.SimConfig(seed=0))
    assert out.marks == frozenset({(2, 3), (1, 3)})
    assert out.marks == kruskal(g).forest
    assert rep.messages > 0


def test_build_mst_degenerate_sizes():
    g1 = tc.Graph((1,), {}, 3)
    out, rep = build_mst(g1, tc.SimConfig(seed=0))
    assert out.marks == frozenset() and rep.messages == 0
    g2 = tc.Graph((1, 2), {(1, 2): 2}, 3)
    out, _ = build_mst(g2, tc.SimConfig(seed=0))
    assert out.marks == frozenset({(1, 2)})


def test_build_mst_matches_kruskal_on_random_graphs():
    rng = random.Random(101)
    for i in range(18):
        n = rng.randint(6, 20)
        g = rand_graph(rng, n, rng.randint(n - 4, 3 * n))
        out, _ = build_mst(g, tc.SimConfig(seed=i))
        assert out.marks == kruskal(g).forest


def test_build_mst_handles_disconnected_graphs():
    rng = random.Random(103)
    for i in range(6):
        # two islands with no edges between them
        e1 = rand_graph(rng, 7, 12)
        edges = dict(e1.edges)
        for (a, b), w in rand_graph(rng, 7, 12).edges.items():
            edges[(a + 7, b + 7)] = w
        g = tc.Graph(tuple(range(1, 15)), edges, 28)
        out, _ = build_mst(g, tc.SimConfig(seed=i))
        assert out.marks == kruskal(g).forest
        assert len(marked_components(g, out.marks)) == kruskal(g).components
        assert len(marked_components(g, out.marks)) >= 2


def test_fast_forward_preserves_marks_and_counts():
    rng = random.Random(107)
    for i in range(4):
        g = rand_graph(rng, 10, 18)
        slow, srep = build_mst(g, tc.SimConfig(seed=i), fast_forward=False)
        fast, frep = build_mst(g, tc.SimConfig(seed=i), fast_forward=True)
        assert slow.marks == fast.marks
        assert (srep.messages, srep.bits) == (frep.messages, frep.bits)


def test_build_mst_async_policies_agree_with_oracle():
    rng = random.Random(109)
    for delay in ("uniform:3", "lifo"):
        g = rand_graph(rng, 12, 24)
        cfg = tc.SimConfig(seed=7, mode="async", delay=delay)
        out, _ = build_mst(g, cfg)
        assert out.marks == kruskal(g).forest


# --- unweighted spanning trees -----------------------------------------------

def test_build_st_spans_every_component():
    rng = random.Random(113)
    for i in range(18):
        n = rng.randint(6, 20)
        g = rand_graph(rng, n, rng.randint(n - 4, 3 * n))
        out, _ = build_st(g, tc.SimConfig(seed=i))
        assert is_spanning_forest(g, out.marks)
        assert forest_ok(g, out.marks)


def test_build_st_async_spans():
    rng = random.Random(127)
    g = rand_graph(rng, 12, 26)
    cfg = tc.SimConfig(seed=3, mode="async", delay="lifo")
    out, _ = build_st(g, cfg)
    assert is_spanning_forest(g, out.marks)


# --- cycle breaking ----------------------------------------------------------

def test_cycle_stage_breaks_at_expected_rate():
    trials = 400
    for k, p in ((3, 0.75), (4, 0.875), (5, 0.9375)):
        g, marks = cycle_graph(k)
        broke = 0
        for seed in range(trials):
            final, rep = run_cycle_breaking(g, tc.SimConfig(seed=seed),
                                            marks=marks)
            broke += bool(rep.outcome["broke_first"])
            assert forest_ok(g, final)          # never leaves a cycle behind
        rate = broke / trials
        band = 3 * math.sqrt(p * (1 - p) / trials)
        assert p - band <= rate <= p + band, (k, rate)


def test_cycle_stage_spares_pendant_branches():
    g, cyc = cycle_graph(5)
    edges = dict(g.edges)
    edges[(2, 6)] = 1
    edges[(6, 7)] = 1
    g = tc.Graph(tuple(range(1, 8)), edges, 9)
    pendants = {(2, 6), (6, 7)}
    for seed in range(30):
        final, _ = run_cycle_breaking(g, tc.SimConfig(seed=seed),
                                      marks=cyc | pendants)
        assert pendants <= final
        assert forest_ok(g, final)


def test_cycle_stage_leaves_trees_alone():
    rng = random.Random(131)
    for seed in range(10):
        g = rand_graph(rng, 10, 18)
        marks = kruskal(g).forest
        final, rep = run_cycle_breaking(g, tc.SimConfig(seed=seed),
                                        marks=marks)
        assert final == marks
        assert not rep.outcome["broke_first"]


# --- impromptu repairs -------------------------------------------------------

def test_delete_unmarked_edge_is_silent():
    g = tc.Graph((1, 2, 3), {(1, 2): 1, (2, 3): 2, (1, 3): 5}, 9)
    g = g.with_marks(kruskal(g).forest)
    out, rep = repair_delete(g, 1, 3, "mst", tc.SimConfig(seed=0))
    assert rep.messages == 0
    assert (1, 3) not in out.edges
    assert out.marks == g.marks


def test_delete_marked_edge_finds_the_replacement():
    g = tc.Graph((1, 2, 3), {(1, 2): 1, (2, 3): 2, (1, 3): 5}, 9)
    g = g.with_marks(kruskal(g).forest)
    out, rep = repair_delete(g, 1, 2, "mst", tc.SimConfig(seed=0))
    want = kruskal(tc.Graph((1, 2, 3), {(2, 3): 2, (1, 3): 5}, 9)).forest
    assert out.marks == want
    assert rep.messages > 0


def test_delete_bridge_splits_cleanly():
    g = tc.Graph((1, 2, 3, 4), {(1, 2): 1, (2, 3): 2, (3, 4): 1}, 9)
    g = g.with_marks(kruskal(g).forest)
    out, _ = repair_delete(g, 2, 3, "mst", tc.SimConfig(seed=1))
    assert out.marks == frozenset({(1, 2), (3, 4)})
    assert len(marked_components(out, out.marks)) == 2


def test_insert_joins_or_swaps_for_mst():
    rng = random.Random(137)
    for i in range(15):
        g = rand_graph(rng, 12, 18)
        g = g.with_marks(kruskal(g).forest)
        missing = [(a, b) for a in range(1, 13) for b in range(a + 1, 13)
                   if (a, b) not in g.edges]
        u, v = rng.choice(missing)
        w = rng.randint(1, g.u)
        tu = len(tree_of(g, u).members)
        tv = len(tree_of(g, v).members)
        out, rep = repair_insert(g, u, v, w, "mst", tc.SimConfig(seed=i))
        assert out.marks == kruskal(out).forest
        assert rep.messages <= 3 * max(tu, tv)


def test_insert_into_same_st_component_changes_nothing():
    g = tc.Graph((1, 2, 3), {(1, 2): 1, (2, 3): 1}, 9)
    g = g.with_marks({(1, 2), (2, 3)})
    out, rep = repair_insert(g, 1, 3, 4, "st", tc.SimConfig(seed=0))
    assert out.marks == g.marks
    assert (1, 3) in out.edges


def test_insert_joins_st_components():
    g = tc.Graph((1, 2, 3, 4), {(1, 2): 1, (3, 4): 1}, 9)
    g = g.with_marks({(1, 2), (3, 4)})
    out, _ = repair_insert(g, 2, 3, 5, "st", tc.SimConfig(seed=0))
    assert out.marks == frozenset({(1, 2), (3, 4), (2, 3)})
    assert is_spanning_forest(out)


def test_weight_changes_keep_the_mst_minimum():
    rng = random.Random(139)
    for i in range(15):
        g = rand_graph(rng, 10, 16)
        g = g.with_marks(kruskal(g).forest)
        (a, b) = rng.choice(sorted(g.edges))
        w = rng.randint(1, g.u)
        out, rep = repair_weight(g, a, b, w, "mst", tc.SimConfig(seed=i))
        assert out.aug_of(a, b) >> out.en_bits == w
        assert out.marks == kruskal(out).forest
        # same weight twice: nothing to do
        again, rep2 = repair_weight(out, a, b, w, "mst", tc.SimConfig(seed=i))
        assert again.marks == out.marks and rep2.messages == 0


def test_weight_changes_are_noops_for_st():
    g = tc.Graph((1, 2, 3), {(1, 2): 1, (2, 3): 2, (1, 3): 5}, 9)
    g = g.with_marks({(1, 2), (2, 3)})
    out, rep = repair_weight(g, 1, 3, 2, "st", tc.SimConfig(seed=0))
    assert out.marks == g.marks
    assert rep.messages == 0


def test_apply_update_dispatches_like_direct_calls():
    g = tc.Graph((1, 2, 3), {(1, 2): 1, (2, 3): 2, (1, 3): 5}, 9)
    g = g.with_marks(kruskal(g).forest)
    ev = tc.UpdateEvent("delete", 1, 2)
    via_ev, _ = apply_update(g, ev, "mst", tc.SimConfig(seed=4))
    direct, _ = repair_delete(g, 1, 2, "mst", tc.SimConfig(seed=4))
    assert via_ev.marks == direct.marks
    ev = tc.UpdateEvent("insert", 1, 4, 3)
    g2 = tc.Graph((1, 2, 3, 4), {(1, 2): 1, (2, 3): 2}, 9,
                  ).with_marks({(1, 2), (2, 3)})
    out, _ = apply_update(g2, ev, "mst", tc.SimConfig(seed=4))
    assert (1, 4) in out.edges and (1, 4) in out.marks


def churn(rng, g, variant, cfg_of, events=30):
    for i in range(events):
        kind = rng.choice(("delete", "insert", "weight"))
        if kind == "delete" and g.edges:
            (a, b) = rng.choice(sorted(g.edges))
            ev = tc.UpdateEvent("delete", a, b)
        elif kind == "insert":
            free = [(a, b) for a in range(1, g.n + 1)
                    for b in range(a + 1, g.n + 1) if (a, b) not in g.edges]
            if not free:
                continue
            (a, b) = rng.choice(free)
            ev = tc.UpdateEvent("insert", a, b, rng.randint(1, g.u))
        else:
            if not g.edges:
                continue
            (a, b) = rng.choice(sorted(g.edges))
            ev = tc.UpdateEvent("weight", a, b, rng.randint(1, g.u))
        g, _ = apply_update(g, ev, variant, cfg_of(i))
        if variant == "mst":
            assert g.marks == kruskal(g).forest, (i, ev)
        else:
            assert is_spanning_forest(g), (i, ev)
    return g


def test_churn_keeps_mst_exact_across_schedulers():
    rng = random.Random(149)
    plans = [lambda i: tc.SimConfig(seed=i),
             lambda i: tc.SimConfig(seed=i, mode="async", delay="uniform:5"),
             lambda i: tc.SimConfig(seed=i, mode="async", delay="lifo")]
    for cfg_of in plans:
        g = rand_graph(rng, 14, 26)
        g, _ = build_mst(g, tc.SimConfig(seed=0))
        churn(rng, g, "mst", cfg_of)


def test_churn_keeps_st_spanning():
    rng = random.Random(151)
    g = rand_graph(rng, 14, 26)
    g, _ = build_st(g, tc.SimConfig(seed=0))
    churn(rng, g, "st", lambda i: tc.SimConfig(seed=i))
