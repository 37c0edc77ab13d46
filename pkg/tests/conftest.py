"""Shared fixtures and independent oracle implementations.

The oracles here deliberately use different algorithms than the package
(matrix transitive closure instead of BFS, etc.) so agreement is
meaningful.
"""

from __future__ import annotations

import numpy as np
import pytest

from pcosync.graph import Digraph, build_digraph


@pytest.fixture
def four_node_chain_with_back_edge() -> Digraph:
    """4 vertices, edges {(1,2),(2,3),(3,2),(3,4)}: unique root 1, depth 3."""
    return build_digraph(4, [(1, 2), (2, 3), (3, 2), (3, 4)])


def oracle_reachable(g: Digraph) -> np.ndarray:
    """Boolean reachability matrix via repeated squaring of the adjacency
    matrix (vertices 0-indexed in the matrix, self-reachability included).
    """
    n = g.n
    a = np.eye(n, dtype=bool)
    for u, v in g.edges:
        a[u - 1, v - 1] = True
    # n doublings reach any path length
    for _ in range(max(1, n.bit_length())):
        a = a | (a @ a)
    return a


def oracle_roots(g: Digraph) -> set[int]:
    reach = oracle_reachable(g)
    return {i + 1 for i in range(g.n) if reach[i].all()}


def oracle_distances(g: Digraph, source: int) -> dict[int, int]:
    """Shortest-path hop counts by Bellman-Ford-style relaxation."""
    inf = float("inf")
    dist = {v: inf for v in g.vertices}
    dist[source] = 0
    for _ in range(g.n):
        changed = False
        for u, v in g.edges:
            if dist[u] + 1 < dist[v]:
                dist[v] = dist[u] + 1
                changed = True
        if not changed:
            break
    return {v: int(d) for v, d in dist.items() if d < inf}
