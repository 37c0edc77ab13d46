"""Simple directed graphs (1-indexed, no self-arcs) with the generators and
root/depth machinery the synchronization analysis is built on.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ValidationError

Edge = tuple[int, int]


@dataclass(frozen=True)
class Digraph:
    """A simple digraph on vertices 1..n.

    Edges are ordered pairs (i, j) meaning an arc from i to j.  Self-arcs
    and duplicates are rejected; use :func:`build_digraph` to clean raw
    edge lists first.
    """

    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError(f"vertex count must be >= 1, got {self.n}")
        seen: set[Edge] = set()
        for e in self.edges:
            u, v = e
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise ValidationError(f"edge {e} out of range 1..{self.n}")
            if u == v:
                raise ValidationError(f"self-arc {e} not allowed")
            if e in seen:
                raise ValidationError(f"duplicate edge {e}")
            seen.add(e)
        # canonical order makes equal graphs compare equal
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))

    @cached_property
    def _out(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for u, v in self.edges:
            adj[u].append(v)
        return {v: tuple(sorted(ns)) for v, ns in adj.items()}

    @cached_property
    def _in(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for u, v in self.edges:
            adj[v].append(u)
        return {v: tuple(sorted(ns)) for v, ns in adj.items()}

    def out_neighbors(self, v: int) -> tuple[int, ...]:
        return self._out[v]

    def in_neighbors(self, v: int) -> tuple[int, ...]:
        return self._in[v]

    def out_degree(self, v: int) -> int:
        return len(self._out[v])

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)


@dataclass(frozen=True)
class DepthPartition:
    """Breadth-first layering of a digraph from one root.

    layers[q] holds the vertices at shortest-path distance q from the
    root; q_star is the largest nonempty depth.
    """

    root: int
    layers: tuple[frozenset[int], ...]
    q_star: int

    def __post_init__(self) -> None:
        if self.layers[0] != frozenset({self.root}):
            raise ValidationError("layer 0 must be exactly the root")
        if self.q_star != len(self.layers) - 1:
            raise ValidationError("q_star inconsistent with layer count")
        union: set[int] = set()
        for layer in self.layers:
            if not layer or union & layer:
                raise ValidationError("layers must be nonempty and disjoint")
            union |= layer

    def depth_of(self, v: int) -> int:
        for q, layer in enumerate(self.layers):
            if v in layer:
                return q
        raise ValidationError(f"vertex {v} not reachable from root {self.root}")

    def union_through(self, q: int) -> frozenset[int]:
        """All vertices at depth <= q."""
        out: set[int] = set()
        for layer in self.layers[: q + 1]:
            out |= layer
        return frozenset(out)


def build_digraph(n: int, edge_list: Iterable[Edge]) -> Digraph:
    """Validate a raw edge list into a Digraph.

    Duplicate edges are removed with a warning; out-of-range vertices and
    self-arcs raise ValidationError.
    """
    cleaned: list[Edge] = []
    seen: set[Edge] = set()
    dupes = 0
    for e in edge_list:
        u, v = int(e[0]), int(e[1])
        if e not in seen:
            seen.add((u, v))
            cleaned.append((u, v))
        else:
            dupes += 1
    if dupes:
        warnings.warn(f"removed {dupes} duplicate edge(s)", stacklevel=2)
    return Digraph(n=int(n), edges=tuple(cleaned))


def generate(
    kind: str,
    n: int,
    *,
    d: Optional[int] = None,
    extra_edge_prob: float = 0.0,
    seed: Optional[int] = None,
) -> Digraph:
    """Construct a named topology on n vertices.

    kind is one of complete | path | cycle | d_regular | random_rooted.
    d_regular connects vertex i to ((i+j) mod n)+1 for j=0..d-1, so cycle
    is the 1-regular and complete the (n-1)-regular instance.  path uses
    edges (i, i+1).  random_rooted grows a random spanning arborescence
    from vertex 1 and then adds every remaining candidate edge
    independently with probability extra_edge_prob.
    """
    if n < 1:
        raise ValidationError(f"vertex count must be >= 1, got {n}")
    if kind == "complete":
        if n == 1:
            return Digraph(1, ())
        return _d_regular(n, n - 1)
    if kind == "cycle":
        return _d_regular(n, 1)
    if kind == "d_regular":
        if d is None:
            raise ValidationError("d_regular requires d")
        return _d_regular(n, d)
    if kind == "path":
        return Digraph(n, tuple((i, i + 1) for i in range(1, n)))
    if kind == "random_rooted":
        return _random_rooted(n, extra_edge_prob, seed)
    raise ValidationError(f"unknown graph kind {kind!r}")


def _d_regular(n: int, d: int) -> Digraph:
    if not 1 <= d < n:
        raise ValidationError(f"d_regular needs 1 <= d < n, got d={d}, n={n}")
    edges = [(i, (i + j) % n + 1) for i in range(1, n + 1) for j in range(d)]
    return Digraph(n, tuple(edges))


def _random_rooted(n: int, extra_edge_prob: float, seed: Optional[int]) -> Digraph:
    if not 0.0 <= extra_edge_prob <= 1.0:
        raise ValidationError("extra_edge_prob must be in [0,1]")
    rng = np.random.default_rng(seed)
    edges: set[Edge] = set()
    for v in range(2, n + 1):
        parent = int(rng.integers(1, v))  # uniform over already-attached 1..v-1
        edges.add((parent, v))
    for u in range(1, n + 1):
        for w in range(1, n + 1):
            if u != w and (u, w) not in edges and rng.random() < extra_edge_prob:
                edges.add((u, w))
    return Digraph(n, tuple(edges))


def _reachable_from(g: Digraph, source: int) -> set[int]:
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.out_neighbors(u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def roots(g: Digraph) -> set[int]:
    """Vertices from which every vertex of g is reachable (may be empty)."""
    all_vertices = set(g.vertices)
    return {v for v in g.vertices if _reachable_from(g, v) == all_vertices}


def depth_partition(g: Digraph, root: int) -> DepthPartition:
    """Layer g by shortest-path distance from root.

    root must actually be a root of g, so the layers always cover every
    vertex.
    """
    if root not in roots(g):
        raise ValidationError(f"vertex {root} is not a root of the digraph")
    depth = {root: 0}
    frontier = [root]
    layers: list[frozenset[int]] = [frozenset({root})]
    while frontier:
        nxt: set[int] = set()
        for u in frontier:
            for v in g.out_neighbors(u):
                if v not in depth:
                    depth[v] = depth[u] + 1
                    nxt.add(v)
        if nxt:
            layers.append(frozenset(nxt))
        frontier = sorted(nxt)
    return DepthPartition(root=root, layers=tuple(layers), q_star=len(layers) - 1)


def graph_depth(g: Digraph) -> int:
    """Maximum over all roots of that root's deepest layer index."""
    rs = roots(g)
    if not rs:
        raise ValidationError("digraph has no root")
    return max(depth_partition(g, r).q_star for r in rs)


def read_edge_list(path: str) -> Digraph:
    """Parse the edge-list text format.

    First meaningful line is `n <N>`, then one `u v` pair per line.
    `#` starts a comment; blank lines are skipped.
    """
    n: Optional[int] = None
    edges: list[Edge] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 2 or parts[0] != "n":
                    raise ValidationError(
                        f"{path}:{lineno}: expected header 'n <N>', got {raw.strip()!r}"
                    )
                n = int(parts[1])
                continue
            if len(parts) != 2:
                raise ValidationError(
                    f"{path}:{lineno}: expected 'u v', got {raw.strip()!r}"
                )
            edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        raise ValidationError(f"{path}: missing 'n <N>' header")
    return build_digraph(n, edges)


def write_edge_list(g: Digraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n {g.n}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def parse_graph_spec(spec: str, *, seed: Optional[int] = None) -> Digraph:
    """Parse the CLI mini-language for graphs.

    Accepted forms: complete:N, path:N, cycle:N, d_regular:N:D,
    random_rooted:N:PROB, and file:PATH for the edge-list format.
    """
    parts = spec.split(":")
    kind = parts[0]
    if kind == "file":
        if len(parts) < 2:
            raise ValidationError("file: needs a path")
        return read_edge_list(spec.split(":", 1)[1])
    try:
        if kind in ("complete", "path", "cycle"):
            if len(parts) != 2:
                raise ValidationError(f"{kind}: needs exactly one size argument")
            return generate(kind, int(parts[1]))
        if kind == "d_regular":
            if len(parts) != 3:
                raise ValidationError("d_regular:N:D needs two arguments")
            return generate(kind, int(parts[1]), d=int(parts[2]))
        if kind == "random_rooted":
            if len(parts) != 3:
                raise ValidationError("random_rooted:N:PROB needs two arguments")
            return generate(kind, int(parts[1]), extra_edge_prob=float(parts[2]), seed=seed)
    except ValueError as exc:
        raise ValidationError(f"bad graph spec {spec!r}: {exc}") from exc
    raise ValidationError(f"unknown graph spec {spec!r}")
