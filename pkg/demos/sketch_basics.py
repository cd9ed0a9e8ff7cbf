"""Tour of the two sketch primitives: parity probes and fingerprints.

A node holding a set of edge numbers can answer "is my set empty?" with a
single hashed bit, and two nodes can compare whole edge multisets by
exchanging one field element each.  This script shows both on a triangle.
"""

import random

import treecast as tc


def main():
    rng = random.Random(7)

    # --- parity probes -----------------------------------------------------
    # bit(x) XOR-ed over a non-empty set comes out 1 at least 1/8 of the time
    print("parity probes over the set {3, 14, 15} (w=8):")
    ones = 0
    draws = 2000
    for _ in range(draws):
        h = tc.OddHash.draw(rng, 8)
        ones += h.bit(3) ^ h.bit(14) ^ h.bit(15)
    print(f"  {ones}/{draws} draws saw odd parity "
          f"({ones / draws:.3f}, guaranteed >= 0.125)")

    # --- fingerprints ------------------------------------------------------
    # marked path 1-2 inside a triangle; the unmarked edges (2,3) and (1,3)
    # cross the fragment boundary, so the two endpoint views must differ
    g = tc.Graph((1, 2, 3), {(1, 2): 1, (2, 3): 2, (1, 3): 3}, 5)
    marks = {(1, 2)}
    members = {1, 2}
    p = 101

    def en(a, b):
        return tc.edge_number(min(a, b), max(a, b), g.id_bits) % p

    up = [en(a, b) for (a, b) in sorted(g.edges) if min(a, b) in members]
    down = [en(a, b) for (a, b) in sorted(g.edges) if max(a, b) in members]
    print(f"\nfingerprints over the fragment {{1, 2}} (p={p}):")
    print(f"  smaller-endpoint view: {sorted(up)}")
    print(f"  larger-endpoint view:  {sorted(down)}")
    differ = sum(tc.fingerprint_eval(p, a, up) != tc.fingerprint_eval(p, a, down)
                 for a in range(p))
    print(f"  views disagree at {differ}/{p} evaluation points "
          "(non-zero means the boundary is non-empty)")

    # a fully spanned graph has an empty boundary: views always agree
    members = {1, 2, 3}
    up = [en(a, b) for (a, b) in sorted(g.edges) if min(a, b) in members]
    down = [en(a, b) for (a, b) in sorted(g.edges) if max(a, b) in members]
    same = all(tc.fingerprint_eval(p, a, up) == tc.fingerprint_eval(p, a, down)
               for a in range(p))
    print(f"  spanning-tree views agree everywhere: {same}")


if __name__ == "__main__":
    main()
