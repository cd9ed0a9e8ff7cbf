"""Tree protocols: broadcast-and-echo sweeps, leader election, cut probes.

All protocols here operate on a maintained tree (a maximal marked component)
and are built from one primitive: a root fans a query down the tree, every
member answers with a local contribution, and answers are combined on the way
back up (2(|T|-1) messages per sweep).  On top of that:

* elect_leader -- leaf-initiated echo waves meeting at one or two tree
  medians; of two medians the higher ID wins.  ~2|T| messages.
* test_out / test_out_parallel -- parity of a random (1/8)-odd hash over the
  edges leaving the tree inside an augmented-weight interval; internal edges
  are counted at both endpoints and cancel.  The parallel form splits [j,k]
  into `fanout` sub-ranges and reports one parity bit per sub-range.
* hp_test_out -- zero-false-positive emptiness test: compare multiset
  fingerprints of edges seen from the smaller vs the larger endpoint; equal
  multisets always agree, unequal ones collide for at most deg(P) of the p
  possible evaluation points.
* find_min -- interval narrowing over the augmented-weight axis driven by
  test_out_parallel, each narrowing step verified by two fingerprint probes
  (below-interval and in-interval).  Standard mode runs until its count
  bound; capped mode uses the tighter bound suitable for per-phase use.
* find_any -- pairwise-independent hashing of leaving edge numbers; the
  lowest prefix-parity bit that is odd isolates a single edge with constant
  probability, the XOR of edge numbers under that threshold recovers it, and
  a deterministic endpoint count (saturating at 2) confirms it.

Root-side protocol logic is written as generators that yield sweep requests;
node-side state is a single small dict entry per sweep, dropped when the
echo passes through, so repairs leave every node's protocol state empty.

Message kinds and field widths (TAG = 5 bits on every message; id/en/aug =
id_bits / en_bits / aug_bits of the run; fp = modulus width; see
`prepare_layout`):

    elect_echo ()                     TAG
    leader     (leader_id)            TAG+id
    stats_q    ()                     TAG         -> stats_r (maxaug,maxen,sumdeg)
    hash_bc    (a,t,j,k)              TAG+2w+2aug -> parity  (bit vector)
    alpha_bc   (alpha,j,k[,p])        TAG+fp+2aug -> fprint  (up,down)
    pih_bc     (a,b,log2 r[,p])       TAG+2fp+6   -> prefix  (bit vector)
    minbit     (i)                    TAG+6       -> xor     (edge number)
    cand       (edge number)          TAG+en      -> endsum  (0/1/2)
    result     (has,adopt,en)         TAG+2+en    flood, stop/cleanup/adopt
    add_edge   ()                     TAG         mark request across a cut edge
    swap       (flag,en)              TAG+1+en    flood, replace en by new edge
    path_q     (target_id)            TAG+id      -> path_r  (found, path max)
    exclude    ()                     TAG         cycle-break pick
    agg_q/agg_r (custom aggregation)  TAG+word
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from .graphs import Graph
from .runtime import RunReport, SimConfig, Simulation
from .sketches import (M61, SUPPORTED_HASH_WORDS, CapacityError, OddHash,
                       choose_prime, next_prime)

TAG_BITS = 5

(K_ELECT_ECHO, K_LEADER,
 K_STATS_DOWN, K_STATS_UP,
 K_HASH_DOWN, K_PARITY_UP,
 K_ALPHA_DOWN, K_FPRINT_UP,
 K_PIH_DOWN, K_PREFIX_UP,
 K_MIN_DOWN, K_XOR_UP,
 K_CAND_DOWN, K_SUM_UP,
 K_RESULT, K_ADD_EDGE, K_EXCLUDE, K_DROP,
 K_PATHQ_DOWN, K_PATH_UP, K_SWAP,
 K_AGG_DOWN, K_AGG_UP) = range(23)

_PENDING = object()


def prepare_layout(sim: Simulation) -> None:
    """Fix the per-run message layout and register every kind's width."""
    g = sim.graph
    cfg = sim.config
    dom = g.max_aug_bound()
    if cfg.fixed_prime:
        sim.p_fp = M61
        dom = max(dom, M61)
    else:
        sim.p_fp = None
    sim.word = max(1, (g.n + dom).bit_length())
    sim.w_max = cfg.c_msg * sim.word
    eb, ib, ab = g.en_bits, g.id_bits, g.aug_bits
    whash = next((w for w in SUPPORTED_HASH_WORDS if w >= eb), None)
    if whash is None:
        raise CapacityError(f"edge numbers need {eb} bits, no hash word fits")
    sim.whash = whash
    sim.maxaug_bound = g.max_aug_bound()
    nk = cfg.n_known or max(1, g.n)
    sim.nk = nk
    # sub-range fanout tracks the model word Theta(lg n), not the physical
    # layout word (which the fixed 61-bit modulus inflates at small n and
    # which would flatten the interval-narrowing depth across graph sizes)
    sim.fanout = cfg.fanout or max(3, math.ceil(math.log2(max(2, nk)) / 2))
    if cfg.fixed_prime:
        fpb = phb = 61
    else:
        fpb = max(1, (nk ** (cfg.c + 3) + (1 << eb)).bit_length() + 1)
        phb = eb + 1
    sim.fp_bits = fpb
    degb = max(1, (nk * nk).bit_length())
    extra = 0 if cfg.fixed_prime else fpb
    extra_ph = 0 if cfg.fixed_prime else phb
    for kind, name, bits in (
            (K_ELECT_ECHO, "elect_echo", TAG_BITS),
            (K_LEADER, "leader", TAG_BITS + ib),
            (K_STATS_DOWN, "stats_q", TAG_BITS),
            (K_STATS_UP, "stats_r", TAG_BITS + ab + eb + degb),
            (K_HASH_DOWN, "hash_bc", TAG_BITS + 2 * whash + 2 * ab),
            (K_PARITY_UP, "parity", TAG_BITS + sim.fanout),
            (K_ALPHA_DOWN, "alpha_bc", TAG_BITS + fpb + 2 * ab + extra),
            (K_FPRINT_UP, "fprint", TAG_BITS + 2 * fpb),
            (K_PIH_DOWN, "pih_bc", TAG_BITS + 2 * phb + 6 + extra_ph),
            (K_PREFIX_UP, "prefix", TAG_BITS + 1),
            (K_MIN_DOWN, "minbit", TAG_BITS + 6),
            (K_XOR_UP, "xor", TAG_BITS + eb),
            (K_CAND_DOWN, "cand", TAG_BITS + eb),
            (K_SUM_UP, "endsum", TAG_BITS + 2),
            (K_RESULT, "result", TAG_BITS + 3 + eb),
            (K_ADD_EDGE, "add_edge", TAG_BITS),
            (K_EXCLUDE, "exclude", TAG_BITS),
            (K_DROP, "drop", TAG_BITS),
            (K_PATHQ_DOWN, "path_q", TAG_BITS + ib),
            (K_PATH_UP, "path_r", TAG_BITS + 1 + ab),
            (K_SWAP, "swap", TAG_BITS + 2 * eb),
            (K_AGG_DOWN, "agg_q", TAG_BITS + sim.word),
            (K_AGG_UP, "agg_r", TAG_BITS + sim.word),
    ):
        sim.register_kind(kind, name, bits)
    sim.flood_dedup = getattr(sim.protocol, "flood_dedup", False)
    sim.defer_adopt = getattr(sim.protocol, "defer_adopt", False)
    sim.sleep_on_empty = getattr(sim.protocol, "sleep_on_empty", False)
    sim.exclude_fresh_only = getattr(sim.protocol, "exclude_fresh_only", False)
    sim.agg_spec = getattr(sim.protocol, "agg_spec", None)


# --- local contributions and combiners --------------------------------------

def _c_stats(sim, node, payload):
    ma = me = 0
    for nb, en, aug in node.edge_info:
        if aug > ma:
            ma = aug
        if en > me:
            me = en
    return (ma, me, len(node.edge_info))


def _comb_stats(sim, node, src, entry, val):
    a = entry[2]
    return (a[0] if a[0] > val[0] else val[0],
            a[1] if a[1] > val[1] else val[1],
            a[2] + val[2])


def _c_parity(sim, node, payload):
    a, t, j, k = payload
    mask = (1 << sim.whash) - 1
    wf = sim.fanout
    s = -(-(k - j) // wf)
    if s < 1:
        s = 1
    vec = 0
    for nb, en, aug in node.edge_info:
        if j <= aug <= k and (a * en) & mask <= t:
            i = (aug - j) // s
            vec ^= 1 << (i if i < wf else wf - 1)
    return vec


def _comb_xor(sim, node, src, entry, val):
    return entry[2] ^ val


def _c_fprint(sim, node, payload):
    alpha, j, k = payload[0], payload[1], payload[2]
    p = payload[3] if len(payload) > 3 else sim.p_fp
    up = down = 1
    nid = node.id
    for nb, en, aug in node.edge_info:
        if j <= aug <= k:
            if nid < nb:
                up = up * (alpha - en) % p
            else:
                down = down * (alpha - en) % p
    return (up, down)


def _comb_fprint(sim, node, src, entry, val):
    pl = entry[3]
    p = pl[3] if len(pl) > 3 else sim.p_fp
    a = entry[2]
    return (a[0] * val[0] % p, a[1] * val[1] % p)


def _c_prefix(sim, node, payload):
    a, b, rexp = payload[0], payload[1], payload[2]
    ph = payload[3] if len(payload) > 3 else sim.p_fp
    node.st["pih"] = (a, b, rexp, ph)
    rm = (1 << rexp) - 1
    full = rm
    vec = 0
    for nb, en, aug in node.edge_info:
        v = ((a * en + b) % ph) & rm
        start = v.bit_length() - 1 if v else 0
        vec ^= full & ~((1 << start) - 1)
    return vec


def _b_prefix(sim, node):
    return TAG_BITS + node.st["pih"][2]


def _c_xor(sim, node, payload):
    a, b, rexp, ph = node.st["pih"]
    rm = (1 << rexp) - 1
    thr = 1 << (payload[0] + 1)
    x = 0
    for nb, en, aug in node.edge_info:
        if ((a * en + b) % ph) & rm < thr:
            x ^= en
    return x


def _c_cand(sim, node, payload):
    return 1 if payload[0] in node.en_set else 0


def _comb_sum(sim, node, src, entry, val):
    s = entry[2] + val
    return s if s < 2 else 2


def _c_path(sim, node, payload):
    return (1, 0) if node.id == payload[0] else (0, 0)


def _comb_path(sim, node, src, entry, val):
    if val[0]:
        m = val[1]
        a2 = node.aug_by[src]
        return (1, m if m > a2 else a2)
    return entry[2]


def _c_agg(sim, node, payload):
    return sim.agg_spec.local(node)


def _comb_agg(sim, node, src, entry, val):
    return sim.agg_spec.combine(entry[2], val)


# sweep table: down kind -> (up kind, contribute, combine, up-bits override)
_SWEEPS = {
    K_STATS_DOWN: (K_STATS_UP, _c_stats, _comb_stats, None),
    K_HASH_DOWN: (K_PARITY_UP, _c_parity, _comb_xor, None),
    K_ALPHA_DOWN: (K_FPRINT_UP, _c_fprint, _comb_fprint, None),
    K_PIH_DOWN: (K_PREFIX_UP, _c_prefix, _comb_xor, _b_prefix),
    K_MIN_DOWN: (K_XOR_UP, _c_xor, _comb_xor, None),
    K_CAND_DOWN: (K_SUM_UP, _c_cand, _comb_sum, None),
    K_PATHQ_DOWN: (K_PATH_UP, _c_path, _comb_path, None),
    K_AGG_DOWN: (K_AGG_UP, _c_agg, _comb_agg, None),
}


# --- sweep engine ------------------------------------------------------------

def _drive(sim, node, value):
    """Advance a root's driver generator until it blocks on a sweep."""
    gen = node.st["drv"]
    while True:
        try:
            kind, payload = gen.send(value)
        except StopIteration as stop:
            del node.st["drv"]
            sim.outcome.setdefault("results", {})[node.id] = stop.value
            return
        value = _root_sweep(sim, node, kind, payload)
        if value is _PENDING:
            return


def _root_sweep(sim, node, kind, payload):
    contribute = _SWEEPS[kind][1]
    acc = contribute(sim, node, payload)
    kids = 0
    nid = node.id
    for nb in node.tree_nbrs():
        sim.send(nid, nb, kind, payload)
        kids += 1
    if kids == 0:
        return acc
    node.st["sw"] = [None, kids, acc, payload]
    return _PENDING


def _make_down(kind, kind_up, contribute, upbits):
    def handler(sim, node, src, payload):
        acc = contribute(sim, node, payload)
        kids = 0
        nid = node.id
        for nb in node.tree_nbrs():
            if nb != src:
                sim.send(nid, nb, kind, payload)
                kids += 1
        if kids == 0:
            sim.send(nid, src, kind_up, acc,
                     upbits(sim, node) if upbits else None)
        else:
            node.st["sw"] = [src, kids, acc, payload]
    return handler


def _make_up(kind_up, combine, upbits):
    def handler(sim, node, src, val):
        entry = node.st["sw"]
        entry[2] = combine(sim, node, src, entry, val)
        entry[1] -= 1
        if entry[1] == 0:
            parent, acc = entry[0], entry[2]
            del node.st["sw"]
            if parent is None:
                _drive(sim, node, acc)
            else:
                sim.send(node.id, parent, kind_up, acc,
                         upbits(sim, node) if upbits else None)
    return handler


# --- floods ------------------------------------------------------------------

def _decode_edge(sim, en):
    ib = sim.graph.id_bits
    return en >> ib, en & ((1 << ib) - 1)


def _result_apply(sim, node, payload):
    node.st.pop("pih", None)
    has, adopt, en, empty = payload
    if not has:
        if empty and sim.sleep_on_empty:
            # a certified-empty cut means the fragment spans its whole
            # component and (phases always start cycle-free) is a tree:
            # nothing can ever reach it again, so it stops paying for
            # barriers.  A merely failed capped attempt (empty=0) retries
            # next phase as usual.
            node.asleep = True
        return
    if adopt:
        a, b = _decode_edge(sim, en)
        nid = node.id
        if nid == a or nid == b:
            other = b if nid == a else a
            if other in node.nbrs and other not in node.marked:
                if sim.defer_adopt:
                    # constructions apply all adoptions at a phase barrier so
                    # trees stay static while other fragments' probes run
                    node.st["adopt"] = other
                else:
                    node.marked.add(other)
                    sim.send(nid, other, K_ADD_EDGE, ())


def _t_adopt(sim, node, data):
    other = node.st.pop("adopt", None)
    if other is not None and other not in node.marked:
        node.marked.add(other)
        node.st.setdefault("fresh", set()).add(other)
        sim.send(node.id, other, K_ADD_EDGE, ())


def _swap_apply(sim, node, payload):
    en_old, en_new = payload
    nid = node.id
    a, b = _decode_edge(sim, en_new)
    if nid == a or nid == b:
        node.marked.add(b if nid == a else a)
    a, b = _decode_edge(sim, en_old)
    if nid == a or nid == b:
        node.marked.discard(b if nid == a else a)


def _h_result(sim, node, src, payload):
    if sim.flood_dedup:
        if "res" in node.st:
            return
        node.st["res"] = 1
    nid = node.id
    for nb in node.tree_nbrs():
        if nb != src:
            sim.send(nid, nb, K_RESULT, payload)
    _result_apply(sim, node, payload)


def _h_swap(sim, node, src, payload):
    # the new edge joins the tree mid-flood; never forward across it, or the
    # flood laps the fresh cycle
    nid = node.id
    a, b = _decode_edge(sim, payload[1])
    for nb in node.tree_nbrs():
        if nb != src and {nid, nb} != {a, b}:
            sim.send(nid, nb, K_SWAP, payload)
    _swap_apply(sim, node, payload)


def _root_flood(sim, node, kind, payload):
    """Start a flood at a driver's root: forward first, then apply locally."""
    if sim.flood_dedup and kind == K_RESULT:
        node.st["res"] = 1
    nid = node.id
    for nb in node.tree_nbrs():
        sim.send(nid, nb, kind, payload)
    if kind == K_RESULT:
        _result_apply(sim, node, payload)
    elif kind == K_SWAP:
        _swap_apply(sim, node, payload)


def _h_add_edge(sim, node, src, payload):
    node.marked.add(src)
    if sim.defer_adopt:
        # constructions remember this phase's adoptions: the cycle stage may
        # only exclude those, never settled tree edges
        node.st.setdefault("fresh", set()).add(src)


# --- leader election ---------------------------------------------------------

def _announce(node):
    # cycle-detection stages only need the echo pattern (a node is on a
    # cycle exactly when two neighbours stay silent); announcing the leader
    # there would cost a component-wide flood per stage for information
    # nobody uses
    return not node.st.get("stage", "").startswith("cyc")


def _leader_known(sim, node, lid):
    sim.protocol.on_leader(sim, node, lid)


def _send_last_echo(sim, node):
    el = node.st.get("el")
    if el is None or el[1] is not None or el[2] is not None:
        return
    heard = el[0]
    if len(heard) != len(node.marked) - 1:
        return
    for nb in node.tree_nbrs():
        if nb not in heard:
            el[1] = nb
            sim.send(node.id, nb, K_ELECT_ECHO, ())
            break


def _queue_echo(sim, node):
    # A round's deliveries arrive one at a time, but the echo decision must
    # reflect the whole round (an echo that arrives together with the
    # (td-1)-th one makes this node the sole median, not a relay), so in
    # synchronous mode the echo goes out at the next round's edge.
    if sim.config.mode == "sync":
        sim.schedule_timer(sim.clock + 1, node.id, "el_echo")
    else:
        _send_last_echo(sim, node)


def _t_el_echo(sim, node, data):
    _send_last_echo(sim, node)


def _elect_begin(sim, node):
    node.st["el"] = el = [set(), None, None]
    td = len(node.marked)
    if td == 0:
        el[2] = node.id
        _leader_known(sim, node, node.id)
    elif td == 1:
        _queue_echo(sim, node)


def _h_elect_echo(sim, node, src, payload):
    el = node.st["el"]
    heard = el[0]
    heard.add(src)
    td = len(node.marked)
    if el[1] is not None:
        if src == el[1]:
            # both medians echoed to each other; higher ID leads
            lid = node.id if node.id > src else src
            el[2] = lid
            nid = node.id
            if _announce(node):
                for nb in node.tree_nbrs():
                    if nb != src:
                        sim.send(nid, nb, K_LEADER, (lid,))
            _leader_known(sim, node, lid)
        return
    nh = len(heard)
    if nh == td:
        el[2] = node.id
        nid = node.id
        if _announce(node):
            for nb in node.tree_nbrs():
                sim.send(nid, nb, K_LEADER, (node.id,))
        _leader_known(sim, node, node.id)
    elif nh == td - 1:
        _queue_echo(sim, node)


def _h_leader(sim, node, src, payload):
    lid = payload[0]
    node.st["el"][2] = lid
    nid = node.id
    for nb in node.tree_nbrs():
        if nb != src:
            sim.send(nid, nb, K_LEADER, payload)
    _leader_known(sim, node, lid)


def _h_exclude(sim, node, src, payload):
    node.st.setdefault("exc_in", set()).add(src)


def _h_drop(sim, node, src, payload):
    node.marked.discard(src)


HANDLERS = {
    K_ELECT_ECHO: _h_elect_echo,
    K_LEADER: _h_leader,
    K_RESULT: _h_result,
    K_SWAP: _h_swap,
    K_ADD_EDGE: _h_add_edge,
    K_EXCLUDE: _h_exclude,
    K_DROP: _h_drop,
}
for _kd, (_ku, _cf, _cb, _ub) in _SWEEPS.items():
    HANDLERS[_kd] = _make_down(_kd, _ku, _cf, _ub)
    HANDLERS[_ku] = _make_up(_ku, _cb, _ub)


# --- root drivers ------------------------------------------------------------

@dataclass
class FindState:
    """Root-side narrowing state of a find_min execution."""
    j: int
    k: int
    count: int
    cap: int
    result: Optional[int]


def _hp_sub(sim, node, j, k, p):
    """One fingerprint probe over [j, k]; empty intervals answer 0 locally."""
    if j > k:
        return 0
    alpha = node.rng.randrange(p)
    if sim.config.fixed_prime:
        payload = (alpha, j, k)
    else:
        payload = (alpha, j, k, p)
    up, down = yield (K_ALPHA_DOWN, payload)
    return 1 if up != down else 0


def _pick_prime(sim, node, maxen, sumdeg, eps_inv):
    if sim.config.fixed_prime:
        return M61
    return choose_prime(maxen, max(1, sumdeg), eps_inv, sim.fp_bits)


def _find_min_gen(sim, node, capped, adopt):
    cfg = sim.config
    maxaug, maxen, sumdeg = yield (K_STATS_DOWN, ())
    if maxen == 0:
        # no incident edges at all -- certainly maximal
        _root_flood(sim, node, K_RESULT, (0, adopt, 0, 1))
        return None
    eps_inv = sim.nk ** (cfg.c + 1)
    p = _pick_prime(sim, node, maxen, sumdeg, eps_inv)
    wf = sim.fanout
    whash = sim.whash
    q = 1.0 / cfg.q_inv
    lgw = math.log2(wf)
    lgmw = math.log2(max(2, maxaug))
    if capped:
        cap = math.ceil((2 * cfg.c / q) * lgmw / lgw)
    else:
        cap = math.ceil((cfg.c / q) * math.log2(max(2, sim.nk))
                        + (cfg.c / q) * lgmw / lgw)
    j, k = 1, maxaug
    count = 0
    result = None
    empty = 0
    rng = node.rng
    while count < cap:
        count += 1
        a = 2 * rng.randrange(1 << (whash - 1)) + 1
        t = rng.randint(1, 1 << whash)
        vec = yield (K_HASH_DOWN, (a, t, j, k))
        if vec:
            s = -(-(k - j) // wf)
            if s < 1:
                s = 1
            i = (vec & -vec).bit_length() - 1
            jlo = j + i * s
            # the last sub-range absorbs the residual up to k, mirroring the
            # index clamp applied on the contribution side
            klo = k if i == wf - 1 else min(j + (i + 1) * s - 1, k)
        else:
            jlo, klo = j, k
        low = yield from _hp_sub(sim, node, 1, jlo - 1, p)
        if low == 1:
            continue    # something lighter exists below the candidate range
        high = yield from _hp_sub(sim, node, jlo, klo, p)
        if high == 0:
            empty = 1   # both probes empty: the cut is empty w.h.p.
            break
        if jlo == klo:
            result = jlo
            break
        if vec:
            if klo - jlo >= k - j:
                raise AssertionError("narrowing did not shrink the interval")
            j, k = jlo, klo
    en = (result & ((1 << sim.graph.en_bits) - 1)) if result is not None else 0
    _root_flood(sim, node, K_RESULT,
                (1 if result is not None else 0, adopt, en, empty))
    sim.outcome.setdefault("find_state", {})[node.id] = FindState(
        j=j, k=k, count=count, cap=cap, result=result)
    return result


def _find_any_gen(sim, node, capped, adopt):
    cfg = sim.config
    maxaug, maxen, sumdeg = yield (K_STATS_DOWN, ())
    if maxen == 0:
        _root_flood(sim, node, K_RESULT, (0, adopt, 0, 1))
        return None
    eps_inv = 2 * sim.nk ** cfg.c
    p = _pick_prime(sim, node, maxen, sumdeg, eps_inv)
    gate = yield from _hp_sub(sim, node, 1, sim.maxaug_bound, p)
    if gate == 0:
        # the high-probability emptiness gate certifies maximality
        _root_flood(sim, node, K_RESULT, (0, adopt, 0, 1))
        return None
    rexp = (4 * sumdeg).bit_length()
    ph = M61 if cfg.fixed_prime else next_prime(maxen)
    cap = 1 if capped else math.ceil(16 * math.log(eps_inv))
    attempts = 0
    result = None
    rng = node.rng
    while attempts < cap:
        attempts += 1
        a = rng.randrange(1, ph)
        b = rng.randrange(ph)
        if cfg.fixed_prime:
            payload = (a, b, rexp)
        else:
            payload = (a, b, rexp, ph)
        vec = yield (K_PIH_DOWN, payload)
        if vec == 0:
            continue
        minbit = (vec & -vec).bit_length() - 1
        w = yield (K_MIN_DOWN, (minbit,))
        if w == 0:
            continue
        ends = yield (K_CAND_DOWN, (w,))
        if ends == 1:
            result = w
            break
    _root_flood(sim, node, K_RESULT, (1 if result is not None else 0, adopt,
                                      result if result is not None else 0, 0))
    sim.outcome.setdefault("find_attempts", {})[node.id] = attempts
    return result


def _insert_gen(sim, node, target, aug_new, variant, adopt):
    """Path probe for a new / re-weighted edge (node, target)."""
    found, pathmax = yield (K_PATHQ_DOWN, (target,))
    if not found:
        node.marked.add(target)
        sim.send(node.id, target, K_ADD_EDGE, ())
        return ("joined", None)
    if variant == "mst" and pathmax > aug_new:
        mask = (1 << sim.graph.en_bits) - 1
        en_old = pathmax & mask
        _root_flood(sim, node, K_SWAP, (en_old, aug_new & mask))
        return ("swapped", en_old)
    return ("kept", None)


# --- protocol objects and public entry points --------------------------------

@dataclass(frozen=True)
class AggregationSpec:
    """A custom broadcast-and-echo: per-node value, associative combiner."""
    local: Callable
    combine: Callable
    name: str = "agg"


ELECTION_TIMERS = {"el_echo": _t_el_echo, "adopt": _t_adopt}


class BaseProtocol:
    handlers = HANDLERS
    timer_handlers: dict = ELECTION_TIMERS
    flood_dedup = False
    defer_adopt = False
    sleep_on_empty = False
    agg_spec: Optional[AggregationSpec] = None

    def prepare(self, sim):
        prepare_layout(sim)

    def start(self, sim):
        pass

    def on_leader(self, sim, node, lid):
        pass


class _ProbeProtocol(BaseProtocol):
    """Run one driver generator at a fixed root."""

    def __init__(self, root, factory, agg_spec=None):
        self.root = root
        self.factory = factory
        self.agg_spec = agg_spec

    def start(self, sim):
        node = sim.nodes[self.root]
        node.st["drv"] = self.factory(sim, node)
        _drive(sim, node, None)


class _ElectProtocol(BaseProtocol):
    """Every node starts the election; leaders are recorded per component."""

    def start(self, sim):
        for nid in sim.graph.nodes:
            _elect_begin(sim, sim.nodes[nid])

    def on_leader(self, sim, node, lid):
        sim.outcome.setdefault("leaders", {})[node.id] = lid


def _probe_run(graph, root, factory, config, marks, agg_spec=None
               ) -> Tuple[object, RunReport]:
    proto = _ProbeProtocol(root, factory, agg_spec)
    sim = Simulation(graph, proto, config, marks)
    sim.start()
    sim.run()
    rep = sim.report()
    return rep.outcome.get("results", {}).get(root), rep


def broadcast_and_echo(graph: Graph, root: int, spec: AggregationSpec,
                       config: Optional[SimConfig] = None, marks=None
                       ) -> Tuple[int, RunReport]:
    """Aggregate spec.local over the tree of `root` (one sweep)."""
    def factory(sim, node):
        val = yield (K_AGG_DOWN, ())
        return val
    return _probe_run(graph, root, factory, config, marks, agg_spec=spec)


def elect_leader(graph: Graph, member: int,
                 config: Optional[SimConfig] = None, marks=None
                 ) -> Tuple[Optional[int], RunReport]:
    """Leader of the tree containing `member` (all components elect)."""
    sim = Simulation(graph, _ElectProtocol(), config, marks)
    sim.start()
    sim.run()
    rep = sim.report()
    return rep.outcome.get("leaders", {}).get(member), rep


def test_out(graph: Graph, root: int, h: OddHash, j: int = 1,
             k: Optional[int] = None, config: Optional[SimConfig] = None,
             marks=None) -> Tuple[int, RunReport]:
    """Parity of h over the cut edges with augmented weight in [j, k]."""
    vec, rep = test_out_parallel(graph, root, h, j, k, config, marks)
    return (bin(vec).count("1") & 1 if vec is not None else None), rep


def test_out_parallel(graph: Graph, root: int, h: OddHash, j: int = 1,
                      k: Optional[int] = None,
                      config: Optional[SimConfig] = None, marks=None
                      ) -> Tuple[int, RunReport]:
    """Per-sub-range parities of h over the cut, as a fanout-wide vector."""
    if k is None:
        k = graph.max_aug_bound()

    def factory(sim, node):
        if h.w != sim.whash:
            raise CapacityError(
                f"hash word {h.w} does not match layout word {sim.whash}")
        vec = yield (K_HASH_DOWN, (h.a, h.t, j, k))
        return vec
    return _probe_run(graph, root, factory, config, marks)


def hp_test_out(graph: Graph, root: int, j: int = 1, k: Optional[int] = None,
                config: Optional[SimConfig] = None, marks=None
                ) -> Tuple[int, RunReport]:
    """1 iff the up/down fingerprints over cut candidates in [j,k] differ."""
    if k is None:
        k = graph.max_aug_bound()

    def factory(sim, node):
        cfg = sim.config
        if cfg.fixed_prime:
            p = M61
        else:
            _, maxen, sumdeg = yield (K_STATS_DOWN, ())
            p = choose_prime(max(1, maxen), max(1, sumdeg),
                             sim.nk ** (cfg.c + 1), sim.fp_bits)
        bit = yield from _hp_sub(sim, node, j, k, p)
        return bit
    return _probe_run(graph, root, factory, config, marks)


def hp_probe(graph: Graph, root: int, j: int, k: int, p: int, alpha: int,
             config: Optional[SimConfig] = None, marks=None
             ) -> Tuple[Tuple[int, int], RunReport]:
    """One fingerprint sweep with a forced (p, alpha); returns (up, down)."""
    config = config or SimConfig(fixed_prime=False)
    if config.fixed_prime:
        raise CapacityError("hp_probe requires dynamic-modulus configuration")

    def factory(sim, node):
        if j > k:
            return (1, 1)
        pair = yield (K_ALPHA_DOWN, (alpha, j, k, p))
        return pair
    return _probe_run(graph, root, factory, config, marks)


def find_min(graph: Graph, root: int, capped: bool = False,
             config: Optional[SimConfig] = None, marks=None
             ) -> Tuple[Optional[int], RunReport]:
    """Augmented weight of the lightest edge leaving the tree of root."""
    def factory(sim, node):
        return _find_min_gen(sim, node, capped, adopt=0)
    return _probe_run(graph, root, factory, config, marks)


def find_any(graph: Graph, root: int, capped: bool = False,
             config: Optional[SimConfig] = None, marks=None
             ) -> Tuple[Optional[int], RunReport]:
    """Edge number of some edge leaving the tree of root, or None."""
    def factory(sim, node):
        return _find_any_gen(sim, node, capped, adopt=0)
    return _probe_run(graph, root, factory, config, marks)
