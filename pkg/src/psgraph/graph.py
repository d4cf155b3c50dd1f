"""Graph container, shift operators, and subgraph/distance primitives.

Vertices are dense integer ids ``0..n-1``. Optional string labels carry the
external names used by the file formats; all computation is id based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .validation import ValidationError


@dataclass(frozen=True)
class Graph:
    """Weighted graph over vertices ``0..n-1``.

    Attributes
    ----------
    n : int
        Vertex count.
    directed : bool
        Whether edges are oriented.
    edges : tuple of (src, dst, weight)
        Canonical edge list: duplicates collapsed, sorted by endpoints; for
        undirected graphs each edge is stored once with ``src <= dst``.
    labels : tuple of str, optional
        External vertex names, aligned with vertex ids.
    """

    n: int
    directed: bool
    edges: tuple[tuple[int, int, float], ...]
    labels: tuple[str, ...] | None = None

    def label_of(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def id_of(self, label: str) -> int:
        if self.labels is None:
            try:
                v = int(label)
            except ValueError:
                raise ValidationError(f"unknown vertex label {label!r}") from None
            if not 0 <= v < self.n:
                raise ValidationError(f"unknown vertex label {label!r}")
            return v
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown vertex label {label!r}") from None


def build_graph(n, edges, directed=False, labels=None, allow_self_loops=False):
    """Validate and canonicalize a graph.

    Duplicate edges are collapsed by summing their weights. For undirected
    graphs, (u, v) and (v, u) name the same edge.
    """
    n = int(n)
    if n < 0:
        raise ValidationError("vertex count must be nonnegative")
    if labels is None:
        labels = tuple(str(i) for i in range(n))
    else:
        labels = tuple(str(x) for x in labels)
        if len(labels) != n:
            raise ValidationError(f"{len(labels)} labels for {n} vertices")
        if len(set(labels)) != n:
            raise ValidationError("vertex labels must be unique")
    acc: dict[tuple[int, int], float] = {}
    for edge in edges:
        src, dst, weight = edge
        src, dst = int(src), int(dst)
        if not (0 <= src < n and 0 <= dst < n):
            raise ValidationError(f"edge ({src}, {dst}) endpoint out of range for n={n}")
        weight = float(weight)
        if not math.isfinite(weight) or weight < 0:
            raise ValidationError(f"edge ({src}, {dst}) has invalid weight {weight}")
        if src == dst and not allow_self_loops:
            raise ValidationError(f"self-loop on vertex {src} not allowed")
        key = (src, dst) if directed else (min(src, dst), max(src, dst))
        acc[key] = acc.get(key, 0.0) + weight
    canon = tuple((s, d, w) for (s, d), w in sorted(acc.items()))
    return Graph(n=n, directed=bool(directed), edges=canon, labels=labels)


def adjacency(g: Graph) -> np.ndarray:
    """Dense adjacency matrix; entry (i, j) is the weight of edge i -> j."""
    a = np.zeros((g.n, g.n))
    for src, dst, weight in g.edges:
        a[src, dst] = weight
        if not g.directed and src != dst:
            a[dst, src] = weight
    return a


def directed_laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian (D_out + D_in - A - A^T) / 2.

    Symmetric and positive semi-definite for any orientation; reduces to the
    ordinary D - A for undirected graphs.
    """
    a = adjacency(g)
    d_out = np.diag(a.sum(axis=1))
    d_in = np.diag(a.sum(axis=0))
    return 0.5 * (d_out + d_in - a - a.T)


def undirected_neighbors(g: Graph) -> list[list[int]]:
    """Sorted neighbor lists on the undirected skeleton (self-loops dropped)."""
    nbrs: list[set[int]] = [set() for _ in range(g.n)]
    for src, dst, _ in g.edges:
        if src != dst:
            nbrs[src].add(dst)
            nbrs[dst].add(src)
    return [sorted(s) for s in nbrs]


def induced_subgraph(g: Graph, s) -> tuple[Graph, tuple[int, ...]]:
    """Subgraph over vertex set ``s``, relabeled to 0..|s|-1.

    Returns the subgraph and the mapping new id -> original id (ascending
    original ids). Keeps exactly the edges with both endpoints in ``s``.
    """
    members = sorted(set(int(v) for v in s))
    if not members:
        raise ValidationError("induced subgraph needs a nonempty vertex set")
    if members[0] < 0 or members[-1] >= g.n:
        raise ValidationError(f"vertex id out of range for n={g.n}")
    index = {v: i for i, v in enumerate(members)}
    edges = [
        (index[src], index[dst], w)
        for src, dst, w in g.edges
        if src in index and dst in index
    ]
    labels = tuple(g.labels[v] for v in members) if g.labels is not None else None
    sub = build_graph(len(members), edges, directed=g.directed, labels=labels,
                      allow_self_loops=True)
    return sub, tuple(members)


def weakly_connected_components(g: Graph) -> list[tuple[int, ...]]:
    """Partition of vertices into weak components, ordered by smallest member."""
    if g.n == 0:
        return []
    rows = [src for src, _, _ in g.edges]
    cols = [dst for _, dst, _ in g.edges]
    m = sparse.coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(g.n, g.n))
    _, labels = csgraph.connected_components(m, directed=False)
    groups: dict[int, list[int]] = {}
    for v, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(v)
    comps = [tuple(sorted(vs)) for vs in groups.values()]
    return sorted(comps, key=lambda c: c[0])


def set_distance(g: Graph, s1, s2) -> float:
    """Minimum hop distance between two vertex sets on the undirected skeleton.

    0 when the sets intersect; ``math.inf`` when no path connects them.
    """
    a = set(int(v) for v in s1)
    b = set(int(v) for v in s2)
    if not a or not b:
        raise ValidationError("set_distance needs nonempty vertex sets")
    for v in a | b:
        if not 0 <= v < g.n:
            raise ValidationError(f"vertex id {v} out of range for n={g.n}")
    if a & b:
        return 0
    nbrs = undirected_neighbors(g)
    seen = set(a)
    frontier = a
    dist = 0
    while frontier:
        dist += 1
        nxt = set()
        for v in frontier:
            for w in nbrs[v]:
                if w not in seen:
                    seen.add(w)
                    nxt.add(w)
        if nxt & b:
            return dist
        frontier = nxt
    return math.inf


def erdos_renyi(n, p, seed) -> Graph:
    """Undirected simple random graph; each pair kept with probability ``p``."""
    n = int(n)
    if n < 0:
        raise ValidationError("vertex count must be nonnegative")
    if not 0 <= p <= 1:
        raise ValidationError(f"edge probability {p} outside [0, 1]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    edges = [(int(i), int(j), 1.0) for i, j in zip(iu[keep], ju[keep])]
    return build_graph(n, edges, directed=False)
