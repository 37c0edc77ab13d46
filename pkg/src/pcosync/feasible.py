"""Feasible subgraphs of a digraph, their binary-mask encoding, the induced
probability measure, and synchronization-string construction and search.

A feasible subgraph keeps, for each vertex, either all of its out-edges or
none of them.  Restricting attention to vertices that have at least one
out-edge (the active set, in ascending id order) makes the map
mask <-> feasible subgraph a bijection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ValidationError
from .graph import DepthPartition, Digraph

Probs = Union[float, Sequence[float]]


@dataclass(frozen=True)
class TriggerMask:
    """Bit v_i per active vertex: 1 keeps all of that vertex's out-edges."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        for b in self.bits:
            if b not in (0, 1):
                raise ValidationError(f"mask bits must be 0/1, got {b!r}")

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def ones(self) -> int:
        return sum(self.bits)

    def to_string(self) -> str:
        return "".join(str(b) for b in self.bits)

    @classmethod
    def from_string(cls, s: str) -> "TriggerMask":
        if not all(c in "01" for c in s):
            raise ValidationError(f"mask string must be 0/1 characters, got {s!r}")
        return cls(tuple(int(c) for c in s))


@dataclass(frozen=True)
class GraphSequence:
    """Finite ordered list of masks, optionally cycled forever."""

    masks: tuple[TriggerMask, ...]
    repeat: bool = False

    def __post_init__(self) -> None:
        lengths = {len(m) for m in self.masks}
        if len(lengths) > 1:
            raise ValidationError(f"masks must share one length, got {sorted(lengths)}")

    def __len__(self) -> int:
        return len(self.masks)

    def mask_at(self, k: int) -> Optional[TriggerMask]:
        """Mask for the k-th jump (0-based), or None when exhausted."""
        if self.repeat and self.masks:
            return self.masks[k % len(self.masks)]
        if 0 <= k < len(self.masks):
            return self.masks[k]
        return None


@dataclass(frozen=True)
class SyncString:
    """The layer-by-layer mask string for one root, with its lengths."""

    sequence: GraphSequence
    ell_star: int
    l_star: int
    q_star: int
    root: int


def active_vertices(g: Digraph) -> list[int]:
    """Ascending list of vertices with out-degree >= 1; len is N*."""
    return [v for v in g.vertices if g.out_degree(v) >= 1]


def subgraph_from_mask(g: Digraph, m: TriggerMask) -> Digraph:
    """Feasible subgraph keeping all out-edges of each selected vertex."""
    act = active_vertices(g)
    if len(m) != len(act):
        raise ValidationError(
            f"mask length {len(m)} != active vertex count {len(act)}"
        )
    keep = {v for v, bit in zip(act, m.bits) if bit}
    edges = tuple(e for e in g.edges if e[0] in keep)
    return Digraph(g.n, edges)


def mask_from_subgraph(g: Digraph, sub: Digraph) -> TriggerMask:
    """Inverse of subgraph_from_mask; rejects non-feasible subgraphs."""
    if sub.n != g.n:
        raise ValidationError("vertex counts differ")
    sub_edges = set(sub.edges)
    if not sub_edges <= set(g.edges):
        raise ValidationError("subgraph has edges not in the parent digraph")
    bits: list[int] = []
    for v in active_vertices(g):
        mine = set((v, w) for w in g.out_neighbors(v))
        present = len(mine & sub_edges)
        if present == len(mine):
            bits.append(1)
        elif present == 0:
            bits.append(0)
        else:
            raise ValidationError(
                f"vertex {v} keeps only some of its out-edges; not feasible"
            )
    return TriggerMask(tuple(bits))


def _as_prob_array(probs: Probs, nstar: int, *, allow_boundary: bool) -> np.ndarray:
    arr = np.asarray(probs, dtype=float)
    if arr.ndim == 0:
        arr = np.full(nstar, float(arr))
    if arr.shape != (nstar,):
        raise ValidationError(f"need {nstar} probabilities, got shape {arr.shape}")
    lo_ok = (arr >= 0.0) if allow_boundary else (arr > 0.0)
    hi_ok = (arr <= 1.0) if allow_boundary else (arr < 1.0)
    if not (lo_ok & hi_ok).all():
        span = "[0,1]" if allow_boundary else "(0,1)"
        raise ValidationError(f"probabilities must lie in {span}")
    return arr


def mask_probability(m: TriggerMask, probs: Probs) -> float:
    """Probability of drawing mask m from independent per-vertex Bernoullis.

    probs may be a scalar (homogeneous) or one value per active vertex;
    each must lie strictly inside (0,1).
    """
    arr = _as_prob_array(probs, len(m), allow_boundary=False)
    out = 1.0
    for p, bit in zip(arr, m.bits):
        out *= p if bit else 1.0 - p
    return out


def sample_mask(
    probs: Probs, rng: np.random.Generator, nstar: Optional[int] = None
) -> TriggerMask:
    """One independent Bernoulli draw per active vertex.

    Scalar probs needs an explicit nstar.  Boundary values 0 and 1 are
    accepted here (useful in tests) even though simulation configs reject
    them.
    """
    if nstar is None:
        arr = np.asarray(probs, dtype=float)
        if arr.ndim == 0:
            raise ValidationError("scalar probs requires nstar")
        nstar = arr.shape[0]
    arr = _as_prob_array(probs, nstar, allow_boundary=True)
    draws = rng.random(nstar) < arr
    return TriggerMask(tuple(int(b) for b in draws))


def enumerate_masks(g: Digraph) -> list[TriggerMask]:
    """All 2^{N*} masks in lexicographic order; guarded at N* <= 20."""
    nstar = len(active_vertices(g))
    if nstar > 20:
        raise ValidationError(f"N*={nstar} too large to enumerate (limit 20)")
    out = []
    for code in range(2**nstar):
        bits = tuple((code >> (nstar - 1 - i)) & 1 for i in range(nstar))
        out.append(TriggerMask(bits))
    return out


def layer_graph(g: Digraph, part: DepthPartition, q: int) -> TriggerMask:
    """Mask selecting exactly the depth-q vertices that have out-edges."""
    if not 0 <= q <= part.q_star:
        raise ValidationError(f"layer index {q} outside 0..{part.q_star}")
    layer = part.layers[q]
    return TriggerMask(tuple(1 if v in layer else 0 for v in active_vertices(g)))


def sync_string(g: Digraph, root: int, r: Probs) -> SyncString:
    """Build the synchronization string for one root.

    The string repeats the depth-q layer mask ell_star times for each
    q = 0..q*-1, where ell_star = N(floor(1/r_min)+1) and r_min is the
    smallest comparison threshold.  Total length is l_star = ell_star * q*.
    """
    from .graph import depth_partition, roots  # local to avoid cycle at import

    if root not in roots(g):
        raise ValidationError(f"vertex {root} is not a root")
    rarr = np.asarray(r, dtype=float)
    if rarr.ndim == 0:
        rarr = np.full(g.n, float(rarr))
    if rarr.shape != (g.n,):
        raise ValidationError(f"need {g.n} thresholds, got shape {rarr.shape}")
    if not ((rarr > 0.0) & (rarr < 1.0)).all():
        raise ValidationError("thresholds must lie in (0,1)")
    part = depth_partition(g, root)
    r_min = float(rarr.min())
    ell_star = g.n * (math.floor(1.0 / r_min) + 1)
    masks: list[TriggerMask] = []
    for q in range(part.q_star):
        masks.extend([layer_graph(g, part, q)] * ell_star)
    return SyncString(
        sequence=GraphSequence(tuple(masks)),
        ell_star=ell_star,
        l_star=ell_star * part.q_star,
        q_star=part.q_star,
        root=root,
    )


def find_string(prefix: GraphSequence, zeta: GraphSequence) -> Optional[int]:
    """Smallest 1-based index where zeta occurs contiguously in prefix.

    Returns None if there is no occurrence.
    """
    if prefix.masks and zeta.masks and len(prefix.masks[0]) != len(zeta.masks[0]):
        raise ValidationError("mask lengths differ between sequences")
    if not zeta.masks:
        return 1
    if len(zeta.masks) > len(prefix.masks):
        return None
    alphabet: dict[TriggerMask, int] = {}
    for m in list(prefix.masks) + list(zeta.masks):
        if m not in alphabet:
            alphabet[m] = len(alphabet)
    if len(alphabet) <= 255:
        hay = bytes(alphabet[m] for m in prefix.masks)
        needle = bytes(alphabet[m] for m in zeta.masks)
        pos = hay.find(needle)
        return pos + 1 if pos >= 0 else None
    for start in range(len(prefix.masks) - len(zeta.masks) + 1):
        if prefix.masks[start : start + len(zeta.masks)] == zeta.masks:
            return start + 1
    return None


def read_mask_file(path: str) -> GraphSequence:
    """Parse the mask file format: one 0/1 string per line, `#` comments."""
    masks: list[TriggerMask] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                masks.append(TriggerMask.from_string(line))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return GraphSequence(tuple(masks))


def write_mask_file(seq: GraphSequence, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for m in seq.masks:
            fh.write(m.to_string() + "\n")
