"""Density-based clustering (DBSCAN) on 3D points."""

from __future__ import annotations

from typing import List, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree


def dbscan_cluster(points: np.ndarray, epsilon: float, min_points: int
                   ) -> Tuple[List[np.ndarray], np.ndarray]:
    """Cluster ``points`` (N, 3); returns (clusters, noise) as index arrays.

    A point is core when at least ``min_points`` points (itself included) lie
    within ``epsilon``. Clusters are numbered by their lowest core index. A
    border point reachable from several clusters joins the one with the lowest
    id, which is the cluster a sequential scan in index order reaches first.
    """
    if epsilon <= 0 or min_points <= 0:
        raise ValueError("epsilon and min_points must be positive")
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n == 0:
        return [], np.zeros(0, dtype=np.int64)

    pairs = cKDTree(pts).query_pairs(epsilon, output_type="ndarray")
    i, j = (pairs[:, 0], pairs[:, 1]) if len(pairs) else (np.zeros(0, int), np.zeros(0, int))
    degree = np.bincount(np.concatenate((i, j)), minlength=n) + 1
    core = degree >= min_points
    if not core.any():
        return [], np.arange(n)

    both = core[i] & core[j]
    graph = coo_matrix((np.ones(both.sum()), (i[both], j[both])), shape=(n, n))
    n_comp, comp = connected_components(graph, directed=False)

    # number components by their smallest core index
    core_idx = np.flatnonzero(core)
    min_core = np.full(n_comp, n)
    np.minimum.at(min_core, comp[core_idx], core_idx)
    core_comps = np.flatnonzero(min_core < n)
    order = core_comps[np.argsort(min_core[core_comps])]
    comp_to_label = np.full(n_comp, -1, dtype=np.int64)
    comp_to_label[order] = np.arange(len(order))
    labels = np.full(n, -1, dtype=np.int64)
    labels[core_idx] = comp_to_label[comp[core_idx]]

    # border points: lowest adjacent cluster label
    src = np.concatenate((i, j))
    dst = np.concatenate((j, i))
    m = core[src] & ~core[dst]
    if m.any():
        b, lbl = dst[m], labels[src[m]]
        best = np.full(n, np.iinfo(np.int64).max)
        np.minimum.at(best, b, lbl)
        hit = best < np.iinfo(np.int64).max
        labels[hit] = best[hit]

    clusters = [np.flatnonzero(labels == k) for k in range(len(order))]
    return clusters, np.flatnonzero(labels < 0)
