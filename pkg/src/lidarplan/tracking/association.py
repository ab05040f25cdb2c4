"""Global nearest neighbour data association."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass
class Association:
    matches: List[Tuple[int, int]] = field(default_factory=list)
    unmatched_tracks: List[int] = field(default_factory=list)
    unmatched_detections: List[int] = field(default_factory=list)

    def __iter__(self):
        return iter((self.matches, self.unmatched_tracks, self.unmatched_detections))


def distance_matrix(track_xy, det_xy) -> np.ndarray:
    a = np.asarray(track_xy, dtype=float).reshape(-1, 2)
    b = np.asarray(det_xy, dtype=float).reshape(-1, 2)
    return np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])


def assign(cost: np.ndarray, gate: float) -> Association:
    """Optimal one-to-one assignment with gating.

    Among all assignments that only use pairs with ``cost <= gate``, pick the
    one with the most pairs and, among those, the lowest total cost.
    """
    cost = np.asarray(cost, dtype=float)
    n_t, n_d = cost.shape
    if n_t == 0 or n_d == 0:
        return Association([], list(range(n_t)), list(range(n_d)))
    allowed = cost <= gate
    # big-M larger than any achievable sum of admissible costs
    big = 1.0 + float(np.abs(cost[allowed]).sum()) if allowed.any() else 1.0
    c = np.where(allowed, cost, big)
    rows, cols = linear_sum_assignment(c)
    matches = [(int(r), int(k)) for r, k in zip(rows, cols) if allowed[r, k]]
    mt = {r for r, _ in matches}
    md = {k for _, k in matches}
    return Association(
        sorted(matches),
        [i for i in range(n_t) if i not in mt],
        [j for j in range(n_d) if j not in md],
    )


def _centres(items) -> np.ndarray:
    out = []
    for it in items:
        if hasattr(it, "center"):
            out.append(it.center)
        elif hasattr(it, "x"):
            out.append(np.asarray(it.x)[:2])
        else:
            out.append(it)
    return np.asarray(out, dtype=float).reshape(-1, 2)


def gnn_associate(tracks, detections, gate: float) -> Association:
    """Associate predicted track centres with detection centres (same frame).

    Items may be ``(x, y)`` pairs, objects with a ``center`` or tracks whose
    state vector ``x`` starts with the position.
    """
    return assign(distance_matrix(_centres(tracks), _centres(detections)), gate)
