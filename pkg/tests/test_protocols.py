"""Tree protocols versus locally-computed oracles."""

import math
import random

import pytest

import treecast as tc
from treecast.graphs import cut_edges, tree_of
from treecast.protocols import AggregationSpec


def rand_marked(rng, n=12, m=26, u=25, span=None):
    """Random graph plus a partial spanning forest; returns (g, marks, root)."""
    nodes = tuple(range(1, n + 1))
    edges = {}
    while len(edges) < m:
        a, b = rng.sample(range(1, n + 1), 2)
        e = (min(a, b), max(a, b))
        if e not in edges:
            edges[e] = rng.randint(1, u)
    g = tc.Graph(nodes, edges, u)
    parent = {v: v for v in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    marks = set()
    pool = list(edges)
    rng.shuffle(pool)
    target = rng.randint(0, n - 2) if span is None else span
    for (a, b) in pool:
        if len(marks) >= target:
            break
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            marks.add((a, b))
    return g, marks, rng.randint(1, n)


def graph_hash_word(g):
    return next(w for w in tc.SUPPORTED_HASH_WORDS if w >= g.en_bits)


def en_of(g, a, b):
    return tc.edge_number(min(a, b), max(a, b), g.id_bits)


def parity_oracle(g, t, h, j, k):
    bit = 0
    for (a, b) in cut_edges(g, t, j, k):
        bit ^= h.bit(en_of(g, a, b))
    return bit


def vector_oracle(g, t, h, j, k, fanout):
    step = max(1, -(-(k - j) // fanout))
    vec = 0
    for (a, b) in cut_edges(g, t, j, k):
        if h.bit(en_of(g, a, b)):
            i = (g.aug_of(a, b) - j) // step
            vec ^= 1 << min(i, fanout - 1)
    return vec


def fingerprint_oracle(g, t, j, k, p, alpha):
    up = down = 1
    for (a, b) in g.edges:
        if j <= g.aug_of(a, b) <= k:
            en = en_of(g, a, b)
            lo, hi = min(a, b), max(a, b)
            if lo in t.members:
                up = up * (alpha - en) % p
            if hi in t.members:
                down = down * (alpha - en) % p
    return up, down


def center_leader(members, marks):
    """Iterated leaf pruning of the marked tree; higher id wins a tie."""
    adj = {v: set() for v in members}
    for (a, b) in marks:
        if a in adj and b in adj:
            adj[a].add(b)
            adj[b].add(a)
    alive = set(members)
    while len(alive) > 2:
        leaves = [v for v in alive if len(adj[v]) <= 1]
        for v in leaves:
            alive.discard(v)
            for nb in adj[v]:
                adj[nb].discard(v)
            adj[v].clear()
    return max(alive)


# --- aggregation sweep -------------------------------------------------------

def test_broadcast_and_echo_sum_and_count():
    rng = random.Random(11)
    sum_spec = AggregationSpec(lambda node: node.id, lambda a, b: a + b, "idsum")
    cnt_spec = AggregationSpec(lambda node: 1, lambda a, b: a + b, "count")
    for _ in range(10):
        g, marks, root = rand_marked(rng)
        members = tree_of(g, root, marks).members
        total, rep = tc.broadcast_and_echo(g, root, sum_spec, marks=marks)
        assert total == sum(members)
        assert rep.messages == 2 * (len(members) - 1)
        cnt, _ = tc.broadcast_and_echo(g, root, cnt_spec, marks=marks)
        assert cnt == len(members)


def test_broadcast_and_echo_singleton_is_free():
    g = tc.Graph((1, 2), {(1, 2): 4}, 9)
    val, rep = tc.broadcast_and_echo(
        g, 1, AggregationSpec(lambda node: node.id * 7, lambda a, b: a + b))
    assert val == 7 and rep.messages == 0


# --- leader election ---------------------------------------------------------

def test_elect_leader_known_small_trees():
    path3 = tc.Graph((1, 2, 3), {(1, 2): 1, (2, 3): 1}, 5)
    assert tc.elect_leader(path3, 1, marks={(1, 2), (2, 3)})[0] == 2
    path4 = tc.Graph((1, 2, 3, 4), {(1, 2): 1, (2, 3): 1, (3, 4): 1}, 5)
    marks4 = {(1, 2), (2, 3), (3, 4)}
    assert tc.elect_leader(path4, 4, marks=marks4)[0] == 3
    star = tc.Graph((1, 2, 3, 4, 5),
                    {(1, k): 1 for k in (2, 3, 4, 5)}, 5)
    assert tc.elect_leader(star, 3, marks={(1, k) for k in (2, 3, 4, 5)})[0] == 1
    # no marks at all: everyone leads their own singleton
    lid, rep = tc.elect_leader(path3, 2)
    assert lid == 2 and rep.messages == 0


def test_elect_leader_matches_center_oracle():
    rng = random.Random(23)
    for _ in range(30):
        g, marks, root = rand_marked(rng, n=14, m=30)
        members = tree_of(g, root, marks).members
        lid, rep = tc.elect_leader(g, root, marks=marks)
        assert lid == center_leader(members, marks)
        assert rep.messages <= 2 * g.n


def test_elect_leader_async_agrees_on_some_member():
    rng = random.Random(5)
    for delay in ("uniform:3", "lifo"):
        g, marks, root = rand_marked(rng, n=12, span=9)
        members = tree_of(g, root, marks).members
        cfg = tc.SimConfig(seed=2, mode="async", delay=delay)
        lid, rep = tc.elect_leader(g, root, cfg, marks=marks)
        assert lid in members
        got = {v: rep.outcome["leaders"][v] for v in members}
        assert set(got.values()) == {lid}


# --- parity probes -----------------------------------------------------------

def test_test_out_matches_local_parity():
    rng = random.Random(31)
    for _ in range(25):
        g, marks, root = rand_marked(rng)
        t = tree_of(g, root, marks)
        h = tc.OddHash.draw(rng, graph_hash_word(g))
        j = rng.randint(0, g.max_aug_bound() // 2)
        k = rng.randint(j, g.max_aug_bound())
        bit, rep = tc.test_out(g, root, h, j, k, marks=marks)
        assert bit == parity_oracle(g, t, h, j, k)
        assert rep.messages == 2 * (len(t.members) - 1)


def test_test_out_parallel_vector_per_subrange():
    rng = random.Random(37)
    fanout = 5
    cfg = tc.SimConfig(seed=1, fanout=fanout)
    for _ in range(25):
        g, marks, root = rand_marked(rng)
        t = tree_of(g, root, marks)
        h = tc.OddHash.draw(rng, graph_hash_word(g))
        j = rng.randint(0, g.max_aug_bound() // 3)
        k = rng.randint(j, g.max_aug_bound())
        vec, _ = tc.test_out_parallel(g, root, h, j, k, cfg, marks=marks)
        assert vec == vector_oracle(g, t, h, j, k, fanout)


def test_test_out_rejects_foreign_hash_word():
    g = tc.Graph((1, 2, 3), {(1, 2): 1, (2, 3): 2}, 5)
    wrong = next(w for w in tc.SUPPORTED_HASH_WORDS if w != graph_hash_word(g))
    h = tc.OddHash.draw(random.Random(0), wrong)
    with pytest.raises(tc.CapacityError):
        tc.test_out(g, 1, h)


def test_test_out_detects_single_cut_edge_often_enough():
    # one edge in range: parity is 1 exactly when the drawn hash maps it to 1,
    # which happens with probability >= 1/8
    g = tc.Graph((1, 2, 3), {(1, 2): 1, (2, 3): 2, (1, 3): 3}, 5)
    marks = {(1, 2)}
    t = tree_of(g, 1, marks)
    aug = g.aug_of(2, 3)
    rng = random.Random(43)
    hits = 0
    trials = 400
    for _ in range(trials):
        h = tc.OddHash.draw(rng, graph_hash_word(g))
        bit, _ = tc.test_out(g, 1, h, aug, aug, marks=marks)
        assert bit == parity_oracle(g, t, h, aug, aug)
        hits += bit
    mean = trials / 8
    assert hits >= mean - 3 * math.sqrt(mean * 7 / 8)


# --- fingerprint probes ------------------------------------------------------

def test_hp_probe_matches_local_products():
    # dynamic-modulus probes ship p in-band, so small graphs need a wider
    # message allowance than the default four words
    cfg = tc.SimConfig(seed=0, fixed_prime=False, c_msg=8)
    rng = random.Random(53)
    for _ in range(15):
        g, marks, root = rand_marked(rng)
        t = tree_of(g, root, marks)
        p = tc.next_prime(rng.randint(10 ** 4, 10 ** 5))
        alpha = rng.randrange(p)
        j = rng.randint(0, g.max_aug_bound() // 2)
        k = rng.randint(j, g.max_aug_bound())
        pair, _ = tc.hp_probe(g, root, j, k, p, alpha, cfg, marks=marks)
        assert pair == fingerprint_oracle(g, t, j, k, p, alpha)


def test_hp_test_out_empty_cut_never_fires():
    # fully marked spanning tree of a connected component: the cut is empty
    # and the up/down products agree identically, whatever alpha is drawn
    rng = random.Random(59)
    for seed in range(12):
        g, _, _ = rand_marked(rng, n=10, m=20)
        marks = set()
        seen = {1}
        stack = [1]
        while stack:
            v = stack.pop()
            for nb in sorted(g.adj[v]):
                if nb not in seen:
                    seen.add(nb)
                    marks.add((min(v, nb), max(v, nb)))
                    stack.append(nb)
        t = tree_of(g, 1, marks)
        assert not cut_edges(g, t)
        bit, _ = tc.hp_test_out(g, 1, config=tc.SimConfig(seed=seed),
                                marks=marks)
        assert bit == 0


def test_hp_test_out_sees_nonempty_cuts():
    rng = random.Random(61)
    done = 0
    while done < 20:
        g, marks, root = rand_marked(rng)
        t = tree_of(g, root, marks)
        if not cut_edges(g, t):
            continue
        done += 1
        bit, rep = tc.hp_test_out(g, root, config=tc.SimConfig(seed=done),
                                  marks=marks)
        assert bit == 1
        assert rep.messages == 2 * (len(t.members) - 1)


def test_hp_test_out_dynamic_prime_adds_one_sweep():
    g = tc.Graph((1, 2, 3), {(1, 2): 1, (2, 3): 2, (1, 3): 3}, 5)
    marks = {(1, 2)}                        # fragment {1,2}; two cut edges
    cfg = tc.SimConfig(seed=0, fixed_prime=False, c_msg=8)
    bit, rep = tc.hp_test_out(g, 1, config=cfg, marks=marks)
    assert bit == 1
    assert rep.messages == 4 * (2 - 1)      # stats sweep + fingerprint sweep


# --- cut search --------------------------------------------------------------

def min_cut_aug(g, t):
    cut = cut_edges(g, t)
    return min(g.aug_of(a, b) for (a, b) in cut) if cut else None


def test_find_min_matches_oracle():
    rng = random.Random(67)
    nonempty = 0
    for i in range(60):
        g, marks, root = rand_marked(rng, n=14, m=32)
        t = tree_of(g, root, marks)
        want = min_cut_aug(g, t)
        got, _ = tc.find_min(g, root, config=tc.SimConfig(seed=i), marks=marks)
        assert got == want
        nonempty += want is not None
    assert nonempty > 30


def test_find_min_empty_cut_is_none():
    g = tc.Graph((1, 2, 3, 4), {(1, 2): 3, (3, 4): 1}, 5)
    got, _ = tc.find_min(g, 1, config=tc.SimConfig(seed=9), marks={(1, 2)})
    assert got is None


def test_find_min_capped_is_correct_when_it_answers():
    rng = random.Random(71)
    hits = trials = 0
    for i in range(60):
        g, marks, root = rand_marked(rng, n=14, m=32)
        t = tree_of(g, root, marks)
        want = min_cut_aug(g, t)
        if want is None:
            continue
        trials += 1
        got, _ = tc.find_min(g, root, capped=True,
                             config=tc.SimConfig(seed=i), marks=marks)
        if got is not None:
            assert got == want
            hits += 1
    assert trials >= 25 and hits >= trials // 2


def test_find_any_returns_genuine_cut_edges():
    rng = random.Random(73)
    for i in range(60):
        g, marks, root = rand_marked(rng, n=14, m=32)
        t = tree_of(g, root, marks)
        cut_ens = {en_of(g, a, b) for (a, b) in cut_edges(g, t)}
        got, _ = tc.find_any(g, root, config=tc.SimConfig(seed=i), marks=marks)
        if cut_ens:
            assert got in cut_ens
        else:
            assert got is None
    capped_hits = 0
    for i in range(40):
        g, marks, root = rand_marked(rng, n=14, m=32)
        t = tree_of(g, root, marks)
        cut_ens = {en_of(g, a, b) for (a, b) in cut_edges(g, t)}
        got, _ = tc.find_any(g, root, capped=True,
                             config=tc.SimConfig(seed=i), marks=marks)
        if got is not None:
            assert got in cut_ens
            capped_hits += 1
    assert capped_hits > 0


# --- scheduling independence -------------------------------------------------

def test_results_and_counts_survive_delivery_policy():
    rng = random.Random(79)
    plans = [("sync", None), ("async", "uniform:1"),
             ("async", "uniform:7"), ("async", "lifo")]
    for i in range(6):
        g, marks, root = rand_marked(rng, n=12, m=26)
        t = tree_of(g, root, marks)
        h = tc.OddHash.draw(rng, graph_hash_word(g))
        runs = []
        for mode, delay in plans:
            cfg = tc.SimConfig(seed=100 + i, mode=mode,
                               **({"delay": delay} if delay else {}))
            vec, vrep = tc.test_out_parallel(g, root, h, config=cfg,
                                             marks=marks)
            mn, mrep = tc.find_min(g, root, config=cfg, marks=marks)
            runs.append((vec, vrep.messages, mn, mrep.messages))
        assert len(set(runs)) == 1
        assert runs[0][2] == min_cut_aug(g, t)
