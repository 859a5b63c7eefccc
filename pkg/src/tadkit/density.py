"""Cluster structure of a window's filtered embeddings and the
high-density extension of the window from the unfiltered pool.

Per window: sweep KMeans over a grid of k, pick the elbow, compute each
cluster's high-density radius (the smallest member-distance order
statistic covering a strict majority of the cluster), then pull in every
unfiltered sample that lands inside some high-density ball.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import CurveTooShort, DimError, EmptyWindow, InsufficientSamples
from .hashing import mix

DEFAULT_K_GRID = (5, 10, 15, 20, 25, 30, 40, 50)

_CONVERGENCE_SHIFT = 1e-6
_MAX_ITERS = 300


@dataclass
class ClusterModel:
    """Fitted KMeans centers plus per-cluster high-density radii."""

    k: int
    centers: np.ndarray  # (k, d)
    seed: int
    inertia: float
    assignments: np.ndarray | None = None  # member index -> cluster
    radii: np.ndarray | None = None
    inertia_sweep: list[tuple[int, float]] = field(default_factory=list)
    empty_cluster_warnings: list[int] = field(default_factory=list)
    inertia_history: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "dim": self.dim,
            "seed": self.seed,
            "inertia": self.inertia,
            "centers": self.centers.tolist(),
            "radii": None if self.radii is None else self.radii.tolist(),
            "inertia_sweep": [[int(k), float(i)] for k, i in self.inertia_sweep],
            "empty_cluster_warnings": self.empty_cluster_warnings,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ClusterModel":
        model = cls(
            k=int(doc["k"]),
            centers=np.asarray(doc["centers"], dtype=np.float64),
            seed=int(doc["seed"]),
            inertia=float(doc["inertia"]),
            inertia_sweep=[(int(k), float(i)) for k, i in doc.get("inertia_sweep", [])],
            empty_cluster_warnings=list(doc.get("empty_cluster_warnings", [])),
        )
        if doc.get("radii") is not None:
            model.radii = np.asarray(doc["radii"], dtype=np.float64)
        return model

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, sort_keys=True)

    @classmethod
    def load(cls, path) -> "ClusterModel":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))

    def validate_sweep_monotone(self) -> bool:
        """Inertia decreases with k after collapsing exact duplicates."""
        vals = [i for _, i in self.inertia_sweep]
        dedup = [v for j, v in enumerate(vals) if j == 0 or v != vals[j - 1]]
        return all(a > b for a, b in zip(dedup, dedup[1:]))


def _sq_dists(vectors: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(n, k) squared Euclidean distances via the expanded product form."""
    d2 = (
        np.sum(vectors**2, axis=1)[:, None]
        + np.sum(centers**2, axis=1)[None, :]
        - 2.0 * (vectors @ centers.T)
    )
    return np.maximum(d2, 0.0, out=d2)


def _plusplus_init(vectors: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(vectors)
    centers = np.empty((k, vectors.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = vectors[first]
    d2 = np.sum((vectors - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all points coincide with chosen centers; any pick works
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[i] = vectors[idx]
        d2 = np.minimum(d2, np.sum((vectors - centers[i]) ** 2, axis=1))
    return centers


def kmeans_fit(vectors: np.ndarray, k: int, seed: int) -> ClusterModel:
    """Lloyd's algorithm with seeded k-means++ init on Euclidean distance.

    Deterministic given the seed. Empty clusters are repaired by reseeding
    from the point farthest from its assigned center, and the repair is
    recorded on the model. Inertia never increases across iterations.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    n = len(vectors)
    if n < k:
        raise InsufficientSamples(f"{n} samples for k={k}")
    rng = np.random.default_rng(seed & (2**63 - 1))
    centers = _plusplus_init(vectors, k, rng)

    warnings: list[int] = []
    history: list[float] = []
    assign = np.zeros(n, dtype=np.int64)
    for _ in range(_MAX_ITERS):
        d2 = _sq_dists(vectors, centers)
        assign = np.argmin(d2, axis=1)
        point_d2 = d2[np.arange(n), assign]
        history.append(float(point_d2.sum()))

        new_centers = centers.copy()
        empties = [c for c in range(k) if not np.any(assign == c)]
        if empties:
            # reseed each empty cluster from successive farthest points
            order = np.argsort(-point_d2)
            for slot, c in enumerate(empties):
                new_centers[c] = vectors[order[slot % n]]
                warnings.append(c)
        for c in range(k):
            members = vectors[assign == c]
            if len(members):
                new_centers[c] = members.mean(axis=0)
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        if shift < _CONVERGENCE_SHIFT:
            break

    d2 = _sq_dists(vectors, centers)
    assign = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), assign].sum())
    history.append(inertia)
    return ClusterModel(
        k=k,
        centers=centers,
        seed=seed,
        inertia=inertia,
        assignments=assign,
        empty_cluster_warnings=sorted(set(warnings)),
        inertia_history=history,
    )


def sweep_k(
    vectors: np.ndarray, k_candidates: Sequence[int] = DEFAULT_K_GRID, seed: int = 0
) -> list[tuple[int, float]]:
    """Inertia curve over ascending candidate k, one seeded fit each."""
    ks = list(k_candidates)
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("k_candidates must be strictly ascending")
    if ks and max(ks) > len(vectors):
        raise InsufficientSamples(f"max k {max(ks)} exceeds {len(vectors)} samples")
    return [(k, kmeans_fit(vectors, k, mix(seed, f"k={k}")).inertia) for k in ks]


def select_elbow(curve: Sequence[tuple[int, float]]) -> int:
    """Knee of the inertia curve by maximum chord distance.

    Both axes are normalized to [0,1], so the choice is invariant to
    affine rescaling of inertia. Ties (including perfectly collinear
    curves) resolve toward the smallest k.
    """
    if len(curve) < 2:
        raise CurveTooShort(f"{len(curve)} points")
    ks = np.asarray([float(k) for k, _ in curve])
    ys = np.asarray([float(i) for _, i in curve])
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("curve k values must be strictly ascending")

    x = (ks - ks[0]) / (ks[-1] - ks[0])
    span = ys.max() - ys.min()
    if span == 0.0:
        return int(curve[0][0])
    y = (ys - ys.min()) / span
    # distance from each point to the chord between first and last points
    x0, y0, x1, y1 = x[0], y[0], x[-1], y[-1]
    chord = np.hypot(x1 - x0, y1 - y0)
    dist = np.abs((y1 - y0) * x - (x1 - x0) * y + x1 * y0 - y1 * x0) / chord
    best = dist.max()
    for i, d in enumerate(dist):
        if d >= best - 1e-12:
            return int(curve[i][0])
    return int(curve[0][0])  # unreachable


def high_density_radii(model: ClusterModel, vectors: np.ndarray) -> np.ndarray:
    """Per-cluster radius covering a strict majority (>50%) of members.

    With sorted member distances d_1 <= ... <= d_m the radius is d_j for
    the smallest j with j/m > 1/2. Singletons get radius 0; an empty
    cluster gets radius 0 plus a warning flag on the model.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if model.assignments is None or len(model.assignments) != len(vectors):
        raise ValueError("model assignments do not cover these vectors")
    radii = np.zeros(model.k, dtype=np.float64)
    for c in range(model.k):
        members = vectors[model.assignments == c]
        m = len(members)
        if m == 0:
            if c not in model.empty_cluster_warnings:
                model.empty_cluster_warnings.append(c)
            continue
        if m == 1:
            continue
        dists = np.sort(np.linalg.norm(members - model.centers[c], axis=1))
        j = int(np.floor(m / 2))  # smallest 1-based j with j/m > 0.5 is floor(m/2)+1
        radii[c] = dists[j]
    model.radii = radii
    return radii


def extend_window(
    model: ClusterModel,
    unfiltered_vectors: np.ndarray,
    unfiltered_ids: Sequence[str],
) -> list[str]:
    """Ids of unfiltered samples inside any cluster's high-density ball.

    Membership is judged against the nearest center only, with an
    inclusive boundary; queries go through a KD-tree over centers, which
    returns exactly the exhaustive nearest-center answer.
    """
    if model.radii is None:
        raise ValueError("model has no radii; run high_density_radii first")
    vectors = np.asarray(unfiltered_vectors, dtype=np.float64)
    if len(vectors) != len(unfiltered_ids):
        raise ValueError("vectors and ids length mismatch")
    if len(vectors) == 0:
        return []
    if vectors.shape[1] != model.dim:
        raise DimError(f"vectors dim {vectors.shape[1]} != model dim {model.dim}")
    tree = cKDTree(model.centers)
    dist, nearest = tree.query(vectors, k=1)
    inside = dist <= model.radii[nearest]
    return sorted(str(unfiltered_ids[i]) for i in np.flatnonzero(inside))


@dataclass
class DensityReport:
    """Extension accounting for one window (masked vs unmasked pipelines)."""

    window_id: str
    filtered_count: int
    extended_count: int
    baseline_extended_count: int | None = None  # masking disabled

    @property
    def extension_pct(self) -> float:
        return 100.0 * self.extended_count / self.filtered_count

    @property
    def lift_pct(self) -> float | None:
        if not self.baseline_extended_count:
            return None  # undefined when the unmasked baseline is empty
        return (
            100.0
            * (self.extended_count - self.baseline_extended_count)
            / self.baseline_extended_count
        )

    def to_json(self) -> dict:
        return {
            "window_id": self.window_id,
            "filtered_count": self.filtered_count,
            "extended_count": self.extended_count,
            "baseline_extended_count": self.baseline_extended_count,
            "extension_pct": self.extension_pct,
            "lift_pct": self.lift_pct,
        }


def extension_metrics(
    window_id: str,
    filtered_count: int,
    extended_count: int,
    baseline_extended_count: int | None = None,
) -> DensityReport:
    if filtered_count <= 0:
        raise EmptyWindow(f"window {window_id} has no filtered records")
    return DensityReport(window_id, filtered_count, extended_count, baseline_extended_count)
