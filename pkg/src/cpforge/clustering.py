"""K-means exploration of the sampled feature space.

Clustering serves one purpose here: find a handful of segments that
between them cover the structure of the dataset, so annotation can
start from representatives instead of random picks.  Features are
standardized, k is chosen by silhouette over a small range, and each
cluster is represented by its medoid (a real segment, not a synthetic
mean) because representatives must be displayable to an annotator.

Determinism contract: identical (X, k, seed) gives identical output.
All ties break toward the lowest index (points, clusters, candidate k).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import KTooLarge, ParseError, SingleCluster
from .rng import Rng

STD_FLOOR = 1e-9
MAX_ITER = 100
DEFAULT_K_RANGE = (4, 12)


@dataclass(frozen=True)
class Standardization:
    """Per-feature affine map to zero mean / unit variance.

    Constant features (std 0) map to exactly 0 via the floor rather
    than blowing up; inverting restores the constant.
    """

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardization":
        return cls(mean=X.mean(axis=0), std=X.std(axis=0))

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / np.maximum(self.std, STD_FLOOR)

    def invert(self, Z: np.ndarray) -> np.ndarray:
        return Z * np.maximum(self.std, STD_FLOOR) + self.mean


@dataclass(frozen=True)
class ClusterResult:
    k: int
    assignments: np.ndarray  # row index (= dataset id) -> cluster
    centroids: np.ndarray  # k x dims, standardized space
    medoid_ids: tuple[int, ...]
    silhouette: float


def _pairwise_sq(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, |X| x |C|, clamped at zero."""
    sq_x = (X**2).sum(axis=1)[:, None]
    sq_c = (C**2).sum(axis=1)[None, :]
    return np.maximum(sq_x - 2.0 * (X @ C.T) + sq_c, 0.0)


def _farthest_point_init(X: np.ndarray, k: int, rng: Rng) -> np.ndarray:
    """Greedy farthest-point seeding: random first center, then argmax
    of min-distance to the chosen set (first index wins ties)."""
    n = len(X)
    chosen = [rng.randint(0, n - 1)]
    min_d = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        idx = int(np.argmax(min_d))
        chosen.append(idx)
        min_d = np.minimum(min_d, ((X - X[idx]) ** 2).sum(axis=1))
    return X[chosen].copy()


def kmeans(X: np.ndarray, k: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm; stops on stable assignments or MAX_ITER.

    An empty cluster is repaired by stealing the point currently
    farthest from its own centroid.
    """
    X = np.asarray(X, dtype=float)
    n = len(X)
    if k < 1 or k > n:
        raise KTooLarge(f"k={k} outside [1, {n}]")
    if np.isnan(X).any():
        raise ValueError("NaN in feature matrix")
    centroids = _farthest_point_init(X, k, Rng(seed))
    assignments = np.full(n, -1, dtype=int)
    for _ in range(MAX_ITER):
        d2 = _pairwise_sq(X, centroids)
        new_assignments = d2.argmin(axis=1)  # argmin takes the lowest cluster on ties
        for j in range(k):
            if not (new_assignments == j).any():
                own = d2[np.arange(n), new_assignments].copy()
                counts = np.bincount(new_assignments, minlength=k)
                own[counts[new_assignments] <= 1] = -1.0  # never empty another cluster
                new_assignments[int(np.argmax(own))] = j
        if (new_assignments == assignments).all():
            break
        assignments = new_assignments
        for j in range(k):
            centroids[j] = X[assignments == j].mean(axis=0)
    return assignments, centroids


def inertia(X: np.ndarray, assignments: np.ndarray, centroids: np.ndarray) -> float:
    return float(((X - centroids[assignments]) ** 2).sum())


def silhouette(X: np.ndarray, assignments: np.ndarray, chunk: int = 1024) -> float:
    """Mean silhouette score; singleton-cluster points contribute 0, and
    a point with a == b == 0 (exact duplicates everywhere) scores 0.

    Distances are accumulated per cluster through a one-hot matmul in
    row chunks, so memory stays at O(chunk * n).
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(assignments)
    uniq = np.unique(labels)
    if len(uniq) < 2:
        raise SingleCluster("silhouette needs at least 2 clusters")
    remap = {int(j): i for i, j in enumerate(uniq)}
    compact = np.array([remap[int(j)] for j in labels])
    k = len(uniq)
    n = len(X)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), compact] = 1.0
    sizes = onehot.sum(axis=0)

    sq = (X**2).sum(axis=1)
    scores = np.zeros(n)
    for start in range(0, n, chunk):
        rows = slice(start, min(start + chunk, n))
        d = np.sqrt(
            np.maximum(sq[rows][:, None] - 2.0 * X[rows] @ X.T + sq[None, :], 0.0)
        )
        cluster_sums = d @ onehot  # chunk x k: summed distance to each cluster
        own = compact[rows]
        m = rows.stop - rows.start
        a = cluster_sums[np.arange(m), own] / np.maximum(sizes[own] - 1, 1)
        means = cluster_sums / sizes[None, :]
        means[np.arange(m), own] = np.inf
        b = means.min(axis=1)
        denom = np.maximum(a, b)
        s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
        s[sizes[own] == 1] = 0.0
        scores[rows] = s
    return float(scores.mean())


def select_k(
    X: np.ndarray,
    k_range: tuple[int, int] = DEFAULT_K_RANGE,
    seed: int = 0,
) -> ClusterResult:
    """Run kmeans across k_range and keep the best silhouette (smaller k
    wins exact ties)."""
    lo, hi = k_range
    best = None
    for k in range(lo, hi + 1):
        assignments, centroids = kmeans(X, k, seed)
        if len(np.unique(assignments)) < 2:
            continue
        score = silhouette(X, assignments)
        if best is None or score > best.silhouette:
            best = ClusterResult(
                k=k,
                assignments=assignments,
                centroids=centroids,
                medoid_ids=medoids(X, assignments),
                silhouette=score,
            )
    if best is None:
        raise SingleCluster("no k in range produced 2+ clusters")
    return best


def medoids(X: np.ndarray, assignments: np.ndarray) -> tuple[int, ...]:
    """Per cluster, the member minimizing summed distance to its cluster
    (lowest index on ties), ordered by cluster label."""
    X = np.asarray(X, dtype=float)
    out = []
    for j in sorted(int(v) for v in np.unique(assignments)):
        idx = np.flatnonzero(assignments == j)
        member = X[idx]
        sums = np.zeros(len(idx))
        for start in range(0, len(idx), 1024):
            rows = slice(start, min(start + 1024, len(idx)))
            sums[rows] = np.sqrt(_pairwise_sq(member[rows], member)).sum(axis=1)
        out.append(int(idx[int(np.argmin(sums))]))
    return tuple(out)


def representatives(result: ClusterResult, X: np.ndarray) -> tuple[int, ...]:
    """Recompute the medoid ids of a clustering (sanity surface; matches
    result.medoid_ids for results produced here)."""
    return medoids(X, result.assignments)


def cluster_sizes(result: ClusterResult) -> list[int]:
    return [int((result.assignments == j).sum()) for j in range(result.k)]


def write_cluster_report(result: ClusterResult, path) -> None:
    obj = {
        "k": result.k,
        "silhouette": result.silhouette,
        "medoid_ids": list(result.medoid_ids),
        "sizes": cluster_sizes(result),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def read_cluster_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.loads(fh.read())
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad cluster report: {exc}") from exc
    for key in ("k", "silhouette", "medoid_ids", "sizes"):
        if key not in obj:
            raise ParseError(f"cluster report missing field {key!r}")
    return obj
