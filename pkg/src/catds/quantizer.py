"""K-means codebook training and frame-to-cluster assignment.

The codebook defines the pseudo-phone alphabet: each feature frame maps to
the index of its nearest centroid under squared Euclidean distance.
"""

from __future__ import annotations

import struct

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_matrix

_CATK_MAGIC = b"CATK"
_CATK_VERSION = 1
# magic, version u16, k u32, dim u32, seed i64, inertia f64; payload k x dim f64
_CATK_HEADER = struct.Struct("<4sHIIqd")

_CHUNK = 8192


def subsample_frames(frames, cap: int, seed: int) -> np.ndarray:
    """Keep at most `cap` rows: identity if small enough, else a uniform
    sample without replacement in original row order, deterministic per seed."""
    frames = np.asarray(frames)
    if frames.ndim != 2:
        raise ValueError(f"frames must be 2-D, got shape {frames.shape}")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    n = frames.shape[0]
    if n <= cap:
        return frames
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=cap, replace=False))
    return frames[idx]


def _sq_distances(frames: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # ||x - c||^2 expanded; clamped at 0 against rounding
    d2 = (
        np.sum(frames * frames, axis=1)[:, None]
        - 2.0 * (frames @ centroids.T)
        + np.sum(centroids * centroids, axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def assign(centroids, frames) -> np.ndarray:
    """Index of the nearest centroid per frame; ties go to the lowest index."""
    centroids = check_matrix(centroids, "centroids")
    frames = check_matrix(frames, "frames")
    if frames.shape[1] != centroids.shape[1]:
        raise ValueError(
            f"frame dim {frames.shape[1]} != codebook dim {centroids.shape[1]}"
        )
    ids = np.empty(frames.shape[0], dtype=np.int64)
    for start in range(0, frames.shape[0], _CHUNK):
        chunk = frames[start : start + _CHUNK]
        ids[start : start + chunk.shape[0]] = np.argmin(_sq_distances(chunk, centroids), axis=1)
    return ids


def _assignment_pass(frames: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, float]:
    labels = np.empty(frames.shape[0], dtype=np.int64)
    objective = 0.0
    for start in range(0, frames.shape[0], _CHUNK):
        chunk = frames[start : start + _CHUNK]
        d2 = _sq_distances(chunk, centroids)
        part = np.argmin(d2, axis=1)
        labels[start : start + chunk.shape[0]] = part
        objective += float(d2[np.arange(chunk.shape[0]), part].sum())
    return labels, objective


def _kmeans_pp_init(frames: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = frames.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = np.sum((frames - frames[chosen[0]]) ** 2, axis=1)
    taken = {int(chosen[0])}
    for j in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # all remaining points coincide with chosen centroids
            idx = next(i for i in range(n) if i not in taken)
        chosen[j] = idx
        taken.add(idx)
        d2 = np.minimum(d2, np.sum((frames - frames[idx]) ** 2, axis=1))
    return frames[chosen].copy()


class FrameQuantizer(BaseEstimator):
    """Lloyd's k-means with k-means++ seeding, written for reproducibility.

    Given one seed the whole trajectory is deterministic: initialization,
    assignment tie-breaks (lowest centroid index), centroid updates
    (per-cluster sums accumulated in index order), and empty-cluster
    reseeding (the point farthest from the empty cluster's stale centroid).

    Fitted attributes: centroids_ (k x dim float64), dim_, inertia_,
    n_iter_, objective_log_ (objective after each assignment pass).
    """

    def __init__(self, n_clusters: int = 500, seed: int = 0, max_iters: int = 100,
                 rel_tol: float = 1e-6, frame_cap: int | None = None):
        self.n_clusters = n_clusters
        self.seed = seed
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.frame_cap = frame_cap

    def fit(self, frames, y=None):
        k = int(self.n_clusters)
        if k < 1:
            raise ValueError("n_clusters must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        X = check_matrix(frames, "frames")
        if self.frame_cap is not None:
            if self.frame_cap < k:
                raise ValueError(
                    f"frame_cap={self.frame_cap} is smaller than n_clusters={k}"
                )
            X = subsample_frames(X, self.frame_cap, self.seed)
        if X.shape[0] < k:
            raise ValueError(f"need at least {k} frames, got {X.shape[0]}")

        rng = np.random.default_rng(self.seed)
        centroids = _kmeans_pp_init(X, k, rng)
        log: list[float] = []
        prev = None
        labels = None
        for _ in range(int(self.max_iters)):
            labels, objective = _assignment_pass(X, centroids)
            log.append(objective)
            if prev is not None:
                rel = (prev - objective) / prev if prev > 0 else 0.0
                if rel < self.rel_tol:
                    break
            prev = objective
            centroids = self._update_centroids(X, labels, centroids, k)

        self.centroids_ = centroids
        self.dim_ = int(X.shape[1])
        self.inertia_ = log[-1]
        self.n_iter_ = len(log)
        self.objective_log_ = log
        self._check_distinct_centroids()
        return self

    @staticmethod
    def _update_centroids(X, labels, centroids, k) -> np.ndarray:
        counts = np.bincount(labels, minlength=k).astype(np.float64)
        sums = np.empty((k, X.shape[1]), dtype=np.float64)
        for j in range(X.shape[1]):
            sums[:, j] = np.bincount(labels, weights=X[:, j], minlength=k)
        new = centroids.copy()
        nonempty = counts > 0
        new[nonempty] = sums[nonempty] / counts[nonempty, None]
        used: set[int] = set()
        for c in np.nonzero(~nonempty)[0]:
            d2 = np.sum((X - centroids[c]) ** 2, axis=1)
            if used:
                d2[list(used)] = -1.0
            farthest = int(np.argmax(d2))
            new[c] = X[farthest]
            used.add(farthest)
        return new

    def _check_distinct_centroids(self) -> None:
        c = self.centroids_
        if np.unique(c, axis=0).shape[0] != c.shape[0]:
            raise ValueError(
                "duplicate centroids after training: frames contain fewer than"
                f" {self.n_clusters} distinct rows"
            )

    def _require_fitted(self) -> None:
        if not hasattr(self, "centroids_"):
            raise NotFittedError("FrameQuantizer is not fitted; call fit first")

    def predict(self, frames) -> np.ndarray:
        self._require_fitted()
        return assign(self.centroids_, frames)

    def fit_predict(self, frames, y=None) -> np.ndarray:
        return self.fit(frames).predict(frames)


def save_codebook(path, quantizer: FrameQuantizer) -> None:
    """Persist a fitted quantizer as CATK: header then k x dim f64 centroids."""
    quantizer._require_fitted()
    c = np.ascontiguousarray(quantizer.centroids_, dtype="<f8")
    k, dim = c.shape
    with open(path, "wb") as fh:
        fh.write(
            _CATK_HEADER.pack(
                _CATK_MAGIC, _CATK_VERSION, k, dim, int(quantizer.seed), float(quantizer.inertia_)
            )
        )
        fh.write(c.tobytes())


def load_codebook(path) -> FrameQuantizer:
    """Load a CATK codebook back into a fitted FrameQuantizer."""
    with open(path, "rb") as fh:
        header = fh.read(_CATK_HEADER.size)
        if len(header) < _CATK_HEADER.size:
            raise ValueError(f"{path}: truncated CATK header")
        magic, version, k, dim, seed, inertia = _CATK_HEADER.unpack(header)
        if magic != _CATK_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {_CATK_MAGIC!r}")
        if version != _CATK_VERSION:
            raise ValueError(f"{path}: unsupported CATK version {version}")
        payload = fh.read()
    expected = k * dim * 8
    if len(payload) != expected:
        raise ValueError(f"{path}: payload has {len(payload)} bytes, header implies {expected}")
    centroids = np.frombuffer(payload, dtype="<f8").reshape(k, dim)
    quantizer = FrameQuantizer(n_clusters=k, seed=seed)
    quantizer.centroids_ = np.array(centroids, dtype=np.float64)
    quantizer.dim_ = dim
    quantizer.inertia_ = inertia
    quantizer.n_iter_ = 0
    quantizer.objective_log_ = []
    return quantizer
