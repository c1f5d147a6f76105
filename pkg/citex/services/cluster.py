"""
Correlation distances and complete-linkage clustering of journals.
"""
import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from citex.core.exceptions import ConstantRowError, InvalidParameterError
from citex.models.corpus import ExchangeTotals
from citex.models.network import Dendrogram, DistanceMatrix, Merge

logger = logging.getLogger(__name__)


def correlation_distance(T: ExchangeTotals) -> DistanceMatrix:
    """
    d_ij = 1 - Pearson correlation of rows i and j of the exchange totals.

    Whole rows are correlated, diagonal entries included.
    """
    totals = np.asarray(T.totals, dtype=np.float64)
    spread = totals.std(axis=1)
    for k in np.flatnonzero(spread == 0):
        raise ConstantRowError(T.labels[k])

    d = 1.0 - np.corrcoef(totals)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(labels=T.labels, d=np.clip(d, 0.0, 2.0))


def _orient(first: List[int], second: List[int], d: np.ndarray) -> List[int]:
    """Join two leaf sequences, flipping either so the boundary leaves are closest."""
    options = [
        (first, second),
        (first, second[::-1]),
        (first[::-1], second),
        (first[::-1], second[::-1]),
    ]
    best = min(range(4), key=lambda k: (d[options[k][0][-1], options[k][1][0]], k))
    a, b = options[best]
    return a + b


def complete_linkage(D: DistanceMatrix) -> Dendrogram:
    """
    Agglomerative clustering where cluster distance is the largest pairwise distance.

    Ties go to the lexicographically smallest pair of cluster slots, a
    slot being the smallest leaf index in the cluster.
    """
    n = D.n
    d = np.asarray(D.d, dtype=np.float64)
    work = d.copy()
    np.fill_diagonal(work, np.inf)
    active = np.ones(n, dtype=bool)

    slot_id = list(range(n))
    slot_size = [1] * n
    slot_leaves: Dict[int, List[int]] = {k: [k] for k in range(n)}
    merges: List[Merge] = []

    for step in range(n - 1):
        masked = np.where(np.triu(np.ones((n, n), dtype=bool), k=1), work, np.inf)
        flat = int(np.argmin(masked))
        i, j = divmod(flat, n)
        height = float(masked[i, j])

        left, right = sorted((slot_id[i], slot_id[j]))
        size = slot_size[i] + slot_size[j]
        merges.append(Merge(left=left, right=right, height=height, size=size))

        merged = np.maximum(work[i], work[j])
        work[i, :] = merged
        work[:, i] = merged
        work[i, i] = np.inf
        work[j, :] = np.inf
        work[:, j] = np.inf
        active[j] = False

        slot_leaves[i] = _orient(slot_leaves[i], slot_leaves.pop(j), d)
        slot_id[i] = n + step
        slot_size[i] = size

    leaf_order = slot_leaves[int(np.flatnonzero(active)[0])] if n else []
    logger.debug(f"Complete linkage: {n - 1} merges, top height {merges[-1].height if merges else 0.0:.4f}")
    return Dendrogram(labels=tuple(D.labels), merges=tuple(merges), leaf_order=tuple(leaf_order))


def cut(dend: Dendrogram, h: float) -> List[List[str]]:
    """
    Clusters formed by the merges strictly below height h.

    Returns:
        Clusters as lists of journal labels, ordered by their first journal
    """
    if h < 0:
        raise InvalidParameterError(f"cut height must be >= 0, got {h}")
    n = dend.n
    parent = list(range(n))

    def find(k: int) -> int:
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for merge in dend.merges:
        if merge.height >= h:
            break
        left = dend.members(merge.left)[0]
        right = dend.members(merge.right)[0]
        parent[find(right)] = find(left)

    groups: Dict[int, List[int]] = {}
    for k in range(n):
        groups.setdefault(find(k), []).append(k)
    ordered = sorted(groups.values(), key=lambda members: members[0])
    return [[dend.labels[k] for k in members] for members in ordered]


def cluster_assignments(partition: Sequence[Sequence[str]]) -> List[Tuple[str, int]]:
    """Flatten a partition into (journal, cluster number) rows, clusters numbered from 1."""
    rows = []
    for number, members in enumerate(partition, start=1):
        rows.extend((journal, number) for journal in members)
    return rows
