"""Partition a record stream into time windows.

Fixed mode cuts calendar months. Adaptive mode walks the stream day by
day, fits the prior day's cluster/density model, and opens a new window
whenever the fraction of the current day's vectors falling inside the
prior day's high-density balls drops below a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from typing import Callable, Iterable, Sequence

import numpy as np

from .density import ClusterModel, high_density_radii, kmeans_fit, select_elbow, sweep_k
from .errors import DimError, EmptyDayError
from .hashing import mix
from .records import DocumentRecord

DEFAULT_MIN_FIT_SAMPLES = 50
DEFAULT_DAY_K_GRID = (2, 3, 5, 8)


@dataclass(frozen=True)
class WindowSpec:
    mode: str = "fixed"  # "fixed" (monthly) or "adaptive"
    overlap_threshold: float = 0.5
    min_fit_samples: int = DEFAULT_MIN_FIT_SAMPLES
    day_k_grid: tuple[int, ...] = DEFAULT_DAY_K_GRID

    def __post_init__(self):
        if self.mode not in ("fixed", "adaptive"):
            raise ValueError(f"unknown window mode {self.mode!r}")
        # 0 is allowed and means "never split" (overlap is never below 0)
        if self.mode == "adaptive" and not (0.0 <= self.overlap_threshold < 1.0):
            raise ValueError("overlap_threshold must lie in [0,1)")


@dataclass
class Window:
    """A half-open [start, end) snapshot of the stream."""

    window_id: str
    start: datetime
    end: datetime
    filtered_ids: list[str] = field(default_factory=list)
    unfiltered_ids: list[str] = field(default_factory=list)
    extended_ids: list[str] = field(default_factory=list)
    model_ref: str | None = None
    parent_embedder: str | None = None

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError("window start must precede end")

    @property
    def record_count(self) -> int:
        return len(self.filtered_ids) + len(self.unfiltered_ids)


def _month_bounds(year: int, month: int) -> tuple[datetime, datetime]:
    start = datetime(year, month, 1, tzinfo=timezone.utc)
    if month == 12:
        end = datetime(year + 1, 1, 1, tzinfo=timezone.utc)
    else:
        end = datetime(year, month + 1, 1, tzinfo=timezone.utc)
    return start, end


def assign_fixed_windows(
    records: Sequence[DocumentRecord],
    spec: WindowSpec,
    filtered_ids: set[str] | None = None,
) -> list[Window]:
    """One window per UTC calendar month containing at least one record.

    Every record lands in exactly one window. When ``filtered_ids`` is
    given, each window's ids are split accordingly; otherwise all ids go
    to the filtered side.
    """
    if spec.mode != "fixed":
        raise ValueError("assign_fixed_windows requires a fixed-mode spec")
    buckets: dict[tuple[int, int], list[DocumentRecord]] = {}
    for rec in records:
        ts = rec.timestamp.astimezone(timezone.utc)
        buckets.setdefault((ts.year, ts.month), []).append(rec)

    windows = []
    for (year, month) in sorted(buckets):
        start, end = _month_bounds(year, month)
        win = Window(window_id=f"{year:04d}-{month:02d}", start=start, end=end)
        for rec in buckets[(year, month)]:
            if filtered_ids is None or rec.id in filtered_ids:
                win.filtered_ids.append(rec.id)
            else:
                win.unfiltered_ids.append(rec.id)
        windows.append(win)
    return windows


def relevance_overlap(day_vectors: np.ndarray, prior_model: ClusterModel) -> float:
    """Fraction of day vectors inside their nearest center's density ball."""
    vectors = np.asarray(day_vectors, dtype=np.float64)
    if vectors.ndim != 2 or len(vectors) == 0:
        raise EmptyDayError("day has no vectors")
    if vectors.shape[1] != prior_model.dim:
        raise DimError(f"day dim {vectors.shape[1]} != model dim {prior_model.dim}")
    if prior_model.radii is None:
        raise ValueError("prior model has no high-density radii")
    d2 = (
        np.sum(vectors**2, axis=1)[:, None]
        + np.sum(prior_model.centers**2, axis=1)[None, :]
        - 2.0 * (vectors @ prior_model.centers.T)
    )
    np.maximum(d2, 0.0, out=d2)
    nearest = np.argmin(d2, axis=1)
    dist = np.sqrt(d2[np.arange(len(vectors)), nearest])
    inside = dist <= prior_model.radii[nearest]
    return float(inside.sum() / len(vectors))


def group_by_day(records: Iterable[DocumentRecord]) -> list[tuple[date, list[DocumentRecord]]]:
    days: dict[date, list[DocumentRecord]] = {}
    for rec in records:
        days.setdefault(rec.timestamp.astimezone(timezone.utc).date(), []).append(rec)
    return sorted(days.items())


def _fit_day_model(vectors: np.ndarray, grid: Sequence[int], seed: int) -> ClusterModel:
    candidates = [k for k in grid if k <= len(vectors)]
    if len(candidates) >= 2:
        curve = sweep_k(vectors, candidates, seed)
        k = select_elbow(curve)
    elif candidates:
        k = candidates[0]
    else:
        k = 1
    model = kmeans_fit(vectors, k, mix(seed, f"fit-k={k}"))
    high_density_radii(model, vectors)
    return model


def compute_day_overlaps(
    days: Sequence[tuple[date, Sequence[DocumentRecord]]],
    spec: WindowSpec,
    embed: Callable[[Sequence[str]], np.ndarray],
    seed: int = 0,
    fit_ids: set[str] | None = None,
) -> list[float | None]:
    """Relevance of each day against the prior day's density model.

    Entry i corresponds to days[i] (entry 0 is None). A None entry means
    the pair was skipped because either side had fewer than
    ``min_fit_samples`` records to fit or test on. ``fit_ids`` restricts
    the modeled subset (normally the keyword-filtered ids).
    """

    def subset(records: Sequence[DocumentRecord]) -> list[DocumentRecord]:
        if fit_ids is None:
            return list(records)
        return [r for r in records if r.id in fit_ids]

    overlaps: list[float | None] = [None]
    for i in range(1, len(days)):
        prior_day, prior_records = days[i - 1]
        _, cur_records = days[i]
        prior_subset = subset(prior_records)
        cur_subset = subset(cur_records)
        if len(prior_subset) < spec.min_fit_samples or len(cur_subset) < spec.min_fit_samples:
            overlaps.append(None)
            continue
        prior_vecs = embed([r.text for r in prior_subset])
        model = _fit_day_model(prior_vecs, spec.day_k_grid, mix(seed, f"day={prior_day}"))
        cur_vecs = embed([r.text for r in cur_subset])
        overlaps.append(relevance_overlap(cur_vecs, model))
    return overlaps


def detect_adaptive_windows(
    days: Sequence[tuple[date, Sequence[DocumentRecord]]],
    spec: WindowSpec,
    embed: Callable[[Sequence[str]], np.ndarray],
    seed: int = 0,
    filtered_ids: set[str] | None = None,
) -> list[Window]:
    """Open a new window whenever day-over-day relevance falls below the
    threshold. Days too thin to test merge into the current window."""
    if spec.mode != "adaptive":
        raise ValueError("detect_adaptive_windows requires an adaptive-mode spec")
    if not days:
        return []
    overlaps = compute_day_overlaps(days, spec, embed, seed, fit_ids=filtered_ids)

    groups: list[list[int]] = [[0]]
    for i in range(1, len(days)):
        ov = overlaps[i]
        if ov is not None and ov < spec.overlap_threshold:
            groups.append([i])
        else:
            groups[-1].append(i)

    windows = []
    for w, idxs in enumerate(groups):
        first_day = days[idxs[0]][0]
        last_day = days[idxs[-1]][0]
        start = datetime.combine(first_day, time(0), tzinfo=timezone.utc)
        end = datetime.combine(last_day + timedelta(days=1), time(0), tzinfo=timezone.utc)
        win = Window(window_id=f"adaptive-{w:04d}", start=start, end=end)
        for i in idxs:
            for rec in days[i][1]:
                if filtered_ids is None or rec.id in filtered_ids:
                    win.filtered_ids.append(rec.id)
                else:
                    win.unfiltered_ids.append(rec.id)
        windows.append(win)
    return windows
