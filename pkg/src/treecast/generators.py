"""Random test networks with sparse identifiers.

Node IDs are a random injection into [1, n^2] so that identifier width
(and thus edge-number width) behaves the way the protocols size it, rather
than the dense 1..n special case.  Weights are uniform on [1, u].  All
randomness comes from a numpy generator seeded from (seed, model) so a
(model, n, m, u, seed) tuple always yields the same graph.
"""

from __future__ import annotations

import math
from typing import Dict, Tuple

import numpy as np

from .graphs import Graph

MODELS = ("random-tree-plus", "erdos-renyi", "grid", "complete")


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0x7FFFFFFF, tag])


def _ids(rng: np.random.Generator, n: int) -> Tuple[int, ...]:
    space = max(n * n, n)
    picked = rng.choice(space, size=n, replace=False)
    return tuple(int(x) + 1 for x in picked)


def _weights(rng: np.random.Generator, m: int, u: int):
    return [int(w) for w in rng.integers(1, u + 1, size=m)]


def _finish(ids, index_edges, weights, u) -> Graph:
    edges = {}
    for (i, j), w in zip(index_edges, weights):
        a, b = ids[i], ids[j]
        if a > b:
            a, b = b, a
        edges[(a, b)] = w
    return Graph(ids, edges, u)


def random_tree_plus(n: int, m: int, u: int, seed: int = 0) -> Graph:
    """A random attachment tree plus m-(n-1) extra edges; always connected."""
    if n < 1:
        raise ValueError("need at least one node")
    cap = n * (n - 1) // 2
    m = max(n - 1, min(m, cap))
    rng = _rng(seed, 1)
    ids = _ids(rng, n)
    pairs = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        pairs.add((j, i))
    while len(pairs) < m:
        i = int(rng.integers(0, n))
        j = int(rng.integers(0, n))
        if i == j:
            continue
        if i > j:
            i, j = j, i
        pairs.add((i, j))
    ordered = sorted(pairs)
    return _finish(ids, ordered, _weights(rng, len(ordered), u), u)


def erdos_renyi(n: int, m: int, u: int, seed: int = 0) -> Graph:
    """m uniformly random distinct pairs; connectivity not guaranteed."""
    if n < 1:
        raise ValueError("need at least one node")
    cap = n * (n - 1) // 2
    m = min(m, cap)
    rng = _rng(seed, 2)
    ids = _ids(rng, n)
    pairs = set()
    while len(pairs) < m:
        i = int(rng.integers(0, n))
        j = int(rng.integers(0, n))
        if i == j:
            continue
        if i > j:
            i, j = j, i
        pairs.add((i, j))
    ordered = sorted(pairs)
    return _finish(ids, ordered, _weights(rng, len(ordered), u), u)


def grid(n: int, u: int, seed: int = 0) -> Graph:
    """An r x c grid with r the largest divisor of n at most sqrt(n)."""
    if n < 1:
        raise ValueError("need at least one node")
    r = 1
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            r = d
    c = n // r
    rng = _rng(seed, 3)
    ids = _ids(rng, n)
    pairs = []
    for row in range(r):
        for col in range(c):
            i = row * c + col
            if col + 1 < c:
                pairs.append((i, i + 1))
            if row + 1 < r:
                pairs.append((i, i + c))
    return _finish(ids, pairs, _weights(rng, len(pairs), u), u)


def complete(n: int, u: int, seed: int = 0) -> Graph:
    rng = _rng(seed, 4)
    ids = _ids(rng, n)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return _finish(ids, pairs, _weights(rng, len(pairs), u), u)


def generate(model: str, n: int, m: int, u: int, seed: int = 0) -> Graph:
    if model == "random-tree-plus":
        return random_tree_plus(n, m, u, seed)
    if model == "erdos-renyi":
        return erdos_renyi(n, m, u, seed)
    if model == "grid":
        return grid(n, u, seed)
    if model == "complete":
        return complete(n, u, seed)
    raise ValueError(f"unknown model {model!r}; pick one of {MODELS}")
