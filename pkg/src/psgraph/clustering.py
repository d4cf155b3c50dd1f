"""Greedy merging of active components into stationary connected subgraphs.

Starting from the active components, the closest admissible pair (hop
distance < 2, not previously rejected) is repeatedly considered: the union
becomes one cluster when the subprocess on it is stationary enough, i.e. the
stationarity ratio of the sliced covariance against the induced subgraph's
own spectrum meets the threshold (for lagged variants, at every lag).
Merging stops at the target cluster count or when no admissible pair is
left. A final pass resolves overlaps so the clusters partition the covered
vertices into disjoint connected subgraphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .active_components import (
    ActiveComponent,
    extract_active_components,
    filter_min_size,
)
from .graph import (
    Graph,
    adjacency,
    directed_laplacian,
    induced_subgraph,
    set_distance,
    weakly_connected_components,
)
from .spectral import SHIFT_ADJACENCY, SHIFT_DIRECTED_LAPLACIAN, eigendecompose
from .stationarity import CovarianceEstimate, sample_covariance, stationarity_ratio
from .validation import ValidationError, check_square, check_time_series


@dataclass(frozen=True)
class Cluster:
    """A cluster with its stationarity ratio at the last evaluation."""

    id: int
    vertices: tuple[int, ...]
    gamma: float
    lags_checked: int = 1


@dataclass(frozen=True)
class MergeEvent:
    """One audit-log row: an initial cluster, a merge, or a rejection."""

    action: str  # "init" | "merge" | "reject"
    left: int | None
    right: int | None
    distance: float | None
    gamma: float
    new_id: int | None


@dataclass(frozen=True)
class ClusterSet:
    """Result of the merge loop.

    ``distances`` is aligned with ``clusters`` (single-linkage maintained);
    ``no_merge`` holds the rejected live pairs; ``log`` records every
    initialization, merge, and rejection in order.
    """

    clusters: tuple[Cluster, ...]
    distances: np.ndarray
    no_merge: frozenset[frozenset[int]]
    log: tuple[MergeEvent, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class Partition:
    """Disjoint, connected clusters plus the vertices left unassigned."""

    assignment: dict[int, int]
    clusters: tuple[Cluster, ...]
    unassigned: tuple[int, ...]


def ac_distance_matrix(g: Graph, acs) -> np.ndarray:
    """Pairwise set distances between active components (inf when unreachable)."""
    if not acs:
        raise ValidationError("need at least one active component")
    k = len(acs)
    d = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            d[i, j] = d[j, i] = set_distance(g, acs[i].vertices, acs[j].vertices)
    return d


def shift_matrix(sub: Graph, shift: str) -> np.ndarray:
    if shift == SHIFT_DIRECTED_LAPLACIAN:
        return directed_laplacian(sub)
    if shift == SHIFT_ADJACENCY:
        if sub.directed:
            raise ValidationError("adjacency shift requires an undirected graph")
        return adjacency(sub)
    raise ValidationError(f"unknown shift kind {shift!r}")


def subgraph_gamma(g: Graph, covariances, vertices,
                   shift: str = SHIFT_DIRECTED_LAPLACIAN) -> tuple[float, tuple[float, ...]]:
    """Stationarity ratios of the subprocess on a vertex set, one per lag.

    The shift is the induced subgraph's own operator; each covariance is
    sliced to the (sorted) vertex set. An identically zero slice is treated
    as trivially diagonal (gamma 1). Returns (min over lags, per-lag tuple).
    """
    members = sorted(set(int(v) for v in vertices))
    sub, _ = induced_subgraph(g, members)
    basis = eigendecompose(shift_matrix(sub, shift), shift_kind=shift)
    ix = np.ix_(members, members)
    gammas = []
    for cov in covariances:
        mat = cov.matrix if isinstance(cov, CovarianceEstimate) else np.asarray(cov)
        sliced = mat[ix]
        if not np.any(sliced):
            gammas.append(1.0)
        else:
            gammas.append(stationarity_ratio(basis, sliced))
    return min(gammas), tuple(gammas)


def _as_cov_list(cov, n: int, max_lag: int) -> list[CovarianceEstimate]:
    covs = list(cov) if isinstance(cov, (list, tuple)) else [cov]
    if len(covs) != max_lag + 1:
        raise ValidationError(
            f"need {max_lag + 1} covariance matrices for max_lag={max_lag}, "
            f"got {len(covs)}")
    out = []
    for k, c in enumerate(covs):
        mat = c.matrix if isinstance(c, CovarianceEstimate) else np.asarray(c, float)
        check_square(mat, n=n, name=f"covariance lag {k}")
        out.append(c if isinstance(c, CovarianceEstimate)
                   else CovarianceEstimate(matrix=mat, lag=k))
    return out


def cluster_active_components(g: Graph, cov, acs, gamma_th: float = 0.9,
                              theta: int = 150, max_lag: int = 0,
                              shift: str = SHIFT_DIRECTED_LAPLACIAN) -> ClusterSet:
    """Merge active components into stationary connected subgraphs.

    Parameters
    ----------
    g : Graph
    cov : CovarianceEstimate or sequence of them
        Full-graph covariance; for ``max_lag=q`` a sequence for lags 0..q.
    acs : list of ActiveComponent
        Seed clusters.
    gamma_th : float
        Merge acceptance threshold on the stationarity ratio, in (0, 1].
    theta : int
        Target cluster count; merging stops at or below it.
    max_lag : int
        Highest covariance lag whose ratio must clear the threshold.
    shift : str
        Shift operator for per-candidate spectra ("directed-laplacian" or
        "adjacency").
    """
    if not acs:
        raise ValidationError("need at least one active component")
    if not 0 < gamma_th <= 1:
        raise ValidationError(f"gamma threshold {gamma_th} outside (0, 1]")
    if int(theta) < 1:
        raise ValidationError("target cluster count must be at least 1")
    if int(max_lag) < 0:
        raise ValidationError("max_lag must be nonnegative")
    covs = _as_cov_list(cov, g.n, int(max_lag))

    capacity = 2 * len(acs)
    dist = np.full((capacity, capacity), math.inf)
    vertices: dict[int, tuple[int, ...]] = {}
    info: dict[int, Cluster] = {}
    log: list[MergeEvent] = []
    live: list[int] = []
    for cid, ac in enumerate(acs):
        verts = tuple(sorted(set(ac.vertices)))
        if not verts:
            raise ValidationError("active component with empty vertex set")
        gmin, _ = subgraph_gamma(g, covs, verts, shift)
        vertices[cid] = verts
        info[cid] = Cluster(cid, verts, gmin, len(covs))
        live.append(cid)
        log.append(MergeEvent("init", None, None, None, gmin, cid))
    seed = ac_distance_matrix(g, acs)
    dist[: len(acs), : len(acs)] = seed
    next_id = len(acs)
    no_merge: set[frozenset[int]] = set()

    while len(live) > int(theta):
        best = None
        for ai in range(len(live)):
            for bi in range(ai + 1, len(live)):
                i, j = live[ai], live[bi]
                d = dist[i, j]
                if d < 2 and frozenset((i, j)) not in no_merge:
                    key = (d, i, j)
                    if best is None or key < best:
                        best = key
        if best is None:
            break
        d, i, j = best
        union = tuple(sorted(set(vertices[i]) | set(vertices[j])))
        gmin, _ = subgraph_gamma(g, covs, union, shift)
        if gmin >= gamma_th:
            new_id = next_id
            next_id += 1
            for k in live:
                if k in (i, j):
                    continue
                nd = min(dist[i, k], dist[j, k])
                dist[new_id, k] = dist[k, new_id] = nd
            live = [k for k in live if k not in (i, j)]
            live.append(new_id)
            no_merge = {p for p in no_merge if i not in p and j not in p}
            vertices[new_id] = union
            info[new_id] = Cluster(new_id, union, gmin, len(covs))
            log.append(MergeEvent("merge", i, j, float(d), gmin, new_id))
        else:
            no_merge.add(frozenset((i, j)))
            log.append(MergeEvent("reject", i, j, float(d), gmin, None))

    final = tuple(info[k] for k in sorted(live))
    order = [c.id for c in final]
    distances = dist[np.ix_(order, order)].copy()
    np.fill_diagonal(distances, 0.0)
    return ClusterSet(clusters=final, distances=distances,
                      no_merge=frozenset(no_merge), log=tuple(log))


def finalize_partition(g: Graph, cs: ClusterSet) -> Partition:
    """Resolve overlaps into a disjoint partition of the covered vertices.

    A vertex in several clusters goes to the one with the highest gamma
    (ties: larger cluster, then smaller id). Clusters disconnected by the
    removals are split into connected pieces; pieces keep the parent's
    gamma and receive fresh ids. Uncovered vertices are reported.
    """
    ranked = sorted(cs.clusters, key=lambda c: (-c.gamma, -len(c.vertices), c.id))
    owner: dict[int, Cluster] = {}
    for cluster in ranked:
        for v in cluster.vertices:
            if v not in owner:
                owner[v] = cluster
    kept: dict[int, list[int]] = {}
    for v, cluster in owner.items():
        kept.setdefault(cluster.id, []).append(v)

    by_id = {c.id: c for c in cs.clusters}
    next_id = max(by_id) + 1 if by_id else 0
    final: list[Cluster] = []
    assignment: dict[int, int] = {}
    for cid in sorted(kept):
        parent = by_id[cid]
        members = sorted(kept[cid])
        sub, mapping = induced_subgraph(g, members)
        pieces = weakly_connected_components(sub)
        for piece in pieces:
            verts = tuple(sorted(mapping[v] for v in piece))
            if len(pieces) == 1:
                new = Cluster(cid, verts, parent.gamma, parent.lags_checked)
            else:
                new = Cluster(next_id, verts, parent.gamma, parent.lags_checked)
                next_id += 1
            final.append(new)
            for v in verts:
                assignment[v] = new.id
    unassigned = tuple(v for v in range(g.n) if v not in assignment)
    return Partition(assignment=assignment, clusters=tuple(final),
                     unassigned=unassigned)


class StationarySubgraphClustering(ClusterMixin, BaseEstimator):
    """Cluster graph vertices into stationary connected subgraphs.

    Rows of X are vertices (samples), columns are time steps. Fitting
    extracts active components from the thresholded activity, then greedily
    merges them under the stationarity-ratio gate, and finally resolves
    overlaps into a disjoint partition.

    Parameters
    ----------
    graph : Graph
        Host graph; X rows index its vertices.
    alpha : float, default=1.7
        Activity threshold for component extraction.
    min_ac_size : int, default=1
        Discard smaller active components before merging.
    gamma_th : float, default=0.9
        Stationarity-ratio acceptance threshold.
    theta : int, default=150
        Target cluster count.
    max_lag : int, default=0
        Check lagged covariances 0..max_lag against the threshold.
    shift : str, default="directed-laplacian"
        Shift operator for per-candidate spectra.

    Attributes
    ----------
    components_ : list of ActiveComponent
    cluster_set_ : ClusterSet
    partition_ : Partition
    labels_ : ndarray of shape (n_vertices,)
        Compact cluster indices; -1 for unassigned vertices.
    """

    def __init__(self, graph=None, alpha=1.7, min_ac_size=1, gamma_th=0.9,
                 theta=150, max_lag=0, shift=SHIFT_DIRECTED_LAPLACIAN):
        self.graph = graph
        self.alpha = alpha
        self.min_ac_size = min_ac_size
        self.gamma_th = gamma_th
        self.theta = theta
        self.max_lag = max_lag
        self.shift = shift

    def fit(self, X, y=None, components=None):
        if self.graph is None:
            raise ValidationError("a graph is required")
        X = check_time_series(X, n_vertices=self.graph.n, name="X")
        if components is None:
            components = filter_min_size(
                extract_active_components(self.graph, X, self.alpha),
                self.min_ac_size)
        if not components:
            raise ValidationError("no active components to cluster")
        covs = [sample_covariance(X, lag) for lag in range(self.max_lag + 1)]
        self.components_ = list(components)
        self.cluster_set_ = cluster_active_components(
            self.graph, covs, components, gamma_th=self.gamma_th,
            theta=self.theta, max_lag=self.max_lag, shift=self.shift)
        self.partition_ = finalize_partition(self.graph, self.cluster_set_)
        labels = np.full(self.graph.n, -1, dtype=int)
        for idx, cluster in enumerate(self.partition_.clusters):
            for v in cluster.vertices:
                labels[v] = idx
        self.labels_ = labels
        return self

    def fit_predict(self, X, y=None, **kwargs):
        return self.fit(X, **kwargs).labels_

    def __sklearn_is_fitted__(self):
        return hasattr(self, "labels_")

    def get_partition(self):
        check_is_fitted(self)
        return self.partition_
