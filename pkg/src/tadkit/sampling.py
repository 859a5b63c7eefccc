"""Distribution-representative oracle sampling and annotation handling.

A window's oracle candidates spread across clusters proportionally to
cluster size, and across each cluster's distance-to-center spectrum via
equal-count bins, so the labeled subset mirrors where the window's mass
actually sits. Labels are accepted only on full annotator agreement.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Sequence

import numpy as np

from .density import ClusterModel
from .errors import ConflictError, LabelError, StoreError
from .hashing import mix
from .records import DocumentRecord, format_rfc3339, parse_rfc3339

LABELS = ("fake", "real")
DEFAULT_CANDIDATE_COUNT = 500
DEFAULT_ORACLE_TARGET = 400
DEFAULT_ANNOTATORS = 5


@dataclass
class OracleSelection:
    window_id: str
    candidate_ids: list[str]
    bin_plan: dict[int, tuple[int, list[float]]]  # cluster -> (bins, lower edges)
    seed: int
    selected_all: bool = False  # window smaller than the candidate budget

    def to_json(self) -> dict:
        return {
            "window_id": self.window_id,
            "candidate_ids": self.candidate_ids,
            "bin_plan": {
                str(c): {"bins": b, "edges": edges} for c, (b, edges) in self.bin_plan.items()
            },
            "seed": self.seed,
            "selected_all": self.selected_all,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def _allocate_bins(sizes: dict[int, int], total: int) -> dict[int, int]:
    """Largest-remainder proportional allocation with a floor of one bin
    per non-empty cluster (when the budget allows) and capacity caps."""
    clusters = sorted(c for c, m in sizes.items() if m > 0)
    n_total = sum(sizes[c] for c in clusters)
    quota = {c: total * sizes[c] / n_total for c in clusters}
    alloc = {c: int(np.floor(quota[c])) for c in clusters}
    leftover = total - sum(alloc.values())
    by_remainder = sorted(
        clusters, key=lambda c: (-(quota[c] - alloc[c]), -sizes[c], c)
    )
    for c in by_remainder[:leftover]:
        alloc[c] += 1

    if total >= len(clusters):
        while any(alloc[c] == 0 for c in clusters):
            needy = min(c for c in clusters if alloc[c] == 0)
            donor = max(clusters, key=lambda c: (alloc[c], sizes[c], -c))
            alloc[donor] -= 1
            alloc[needy] += 1

    # short clusters contribute everything; excess goes to the largest
    # cluster that still has capacity
    while True:
        over = [c for c in clusters if alloc[c] > sizes[c]]
        if not over:
            break
        c = over[0]
        excess = alloc[c] - sizes[c]
        alloc[c] = sizes[c]
        spare = [d for d in clusters if alloc[d] < sizes[d]]
        if not spare:
            break
        recipient = max(spare, key=lambda d: (sizes[d], -d))
        alloc[recipient] += min(excess, sizes[recipient] - alloc[recipient])
    return alloc


def select_representatives(
    window_id: str,
    ids: Sequence[str],
    vectors: np.ndarray,
    model: ClusterModel,
    candidate_count: int = DEFAULT_CANDIDATE_COUNT,
    seed: int = 0,
) -> OracleSelection:
    """Pick the oracle candidate set for one window.

    Pool members are assigned to their nearest center; each cluster gets a
    share of the budget, its members are sorted by distance and cut into
    equal-count bins, and each bin contributes the member closest to its
    median distance (ties to the smaller id). Deterministic throughout.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if len(ids) != len(vectors):
        raise ValueError("ids and vectors length mismatch")
    if len(ids) == 0:
        raise ValueError("empty selection pool")

    if candidate_count >= len(ids):
        return OracleSelection(
            window_id=window_id,
            candidate_ids=sorted(str(i) for i in ids),
            bin_plan={},
            seed=seed,
            selected_all=True,
        )

    d2 = (
        np.sum(vectors**2, axis=1)[:, None]
        + np.sum(model.centers**2, axis=1)[None, :]
        - 2.0 * (vectors @ model.centers.T)
    )
    np.maximum(d2, 0.0, out=d2)
    assign = np.argmin(d2, axis=1)
    dist = np.sqrt(d2[np.arange(len(ids)), assign])

    sizes = {c: int(np.sum(assign == c)) for c in range(model.k)}
    alloc = _allocate_bins(sizes, candidate_count)

    chosen: list[str] = []
    bin_plan: dict[int, tuple[int, list[float]]] = {}
    for c in sorted(alloc):
        n_bins = alloc[c]
        if n_bins == 0:
            continue
        member_idx = np.flatnonzero(assign == c)
        order = sorted(member_idx, key=lambda i: (dist[i], str(ids[i])))
        parts = np.array_split(np.asarray(order), n_bins)
        edges = []
        for part in parts:
            part = list(part)
            edges.append(float(dist[part[0]]))
            med = float(np.median([dist[i] for i in part]))
            rep = min(part, key=lambda i: (abs(dist[i] - med), str(ids[i])))
            chosen.append(str(ids[rep]))
        bin_plan[c] = (n_bins, edges)

    return OracleSelection(
        window_id=window_id, candidate_ids=chosen, bin_plan=bin_plan, seed=seed
    )


# ---------------------------------------------------------------------------
# Annotation round trip
# ---------------------------------------------------------------------------

EXPORT_COLUMNS = ("record_id", "text", "likes", "shares", "retweets", "deleted")
IMPORT_COLUMNS = EXPORT_COLUMNS + ("annotator_id", "label", "annotated_at")


def export_annotation_batch(
    selection: OracleSelection, records_by_id: dict[str, DocumentRecord], fh
) -> int:
    """Write the annotation task CSV (RFC 4180) for a selection."""
    writer = csv.writer(fh)
    writer.writerow(EXPORT_COLUMNS)
    for rid in selection.candidate_ids:
        rec = records_by_id.get(rid)
        if rec is None:
            raise StoreError(f"record {rid} not in store")
        writer.writerow(
            [rec.id, rec.text, rec.likes, rec.shares, rec.retweets, str(rec.deleted).lower()]
        )
    return len(selection.candidate_ids)


@dataclass(frozen=True)
class AnnotationRecord:
    record_id: str
    annotator_id: str
    label: str
    annotated_at: datetime

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}")


def import_annotations(files: Iterable) -> list[AnnotationRecord]:
    """Parse annotator CSVs, deduplicating (record, annotator) pairs.

    The latest annotated_at wins; identical duplicates collapse; the same
    timestamp with disagreeing labels is a conflict.
    """
    best: dict[tuple[str, str], AnnotationRecord] = {}
    for fh in files:
        reader = csv.DictReader(fh)
        for row_no, row in enumerate(reader, start=2):
            label = (row.get("label") or "").strip()
            if label not in LABELS:
                raise LabelError(row_no, label)
            ann = AnnotationRecord(
                record_id=row["record_id"],
                annotator_id=row["annotator_id"],
                label=label,
                annotated_at=parse_rfc3339(row["annotated_at"]),
            )
            key = (ann.record_id, ann.annotator_id)
            prev = best.get(key)
            if prev is None or ann.annotated_at > prev.annotated_at:
                best[key] = ann
            elif ann.annotated_at == prev.annotated_at and ann.label != prev.label:
                raise ConflictError(
                    f"{key} has conflicting labels at {format_rfc3339(ann.annotated_at)}"
                )
    return [best[k] for k in sorted(best)]


@dataclass
class AgreementReport:
    accepted_ids: list[str]
    rejected_ids: list[str]
    incomplete_ids: list[str]
    final_oracle_ids: list[str]
    class_counts: dict[str, int]
    labels: dict[str, str] = field(default_factory=dict)  # final id -> unanimous label
    short: bool = False  # fewer accepted than target

    def to_json(self) -> dict:
        return {
            "accepted_ids": self.accepted_ids,
            "rejected_ids": self.rejected_ids,
            "incomplete_ids": self.incomplete_ids,
            "final_oracle_ids": self.final_oracle_ids,
            "class_counts": self.class_counts,
            "labels": self.labels,
            "short": self.short,
        }


def resolve_agreement(
    annotations: Sequence[AnnotationRecord],
    target: int = DEFAULT_ORACLE_TARGET,
    balance: bool = False,
    seed: int = 0,
    annotators: int = DEFAULT_ANNOTATORS,
) -> AgreementReport:
    """Keep candidates with unanimous labels, then cut to the target size.

    Candidates without exactly ``annotators`` annotations are flagged
    incomplete and excluded. With ``balance`` the cut draws evenly per
    class (seeded), topping up from the larger class when one falls short.
    """
    by_record: dict[str, list[AnnotationRecord]] = {}
    for ann in annotations:
        by_record.setdefault(ann.record_id, []).append(ann)

    accepted: dict[str, str] = {}
    rejected: list[str] = []
    incomplete: list[str] = []
    for rid in sorted(by_record):
        anns = by_record[rid]
        if len(anns) != annotators:
            incomplete.append(rid)
            continue
        labels = {a.label for a in anns}
        if len(labels) == 1:
            accepted[rid] = anns[0].label
        else:
            rejected.append(rid)

    accepted_ids = sorted(accepted)
    rng = np.random.default_rng(mix(seed, "resolve-agreement") & (2**63 - 1))

    def draw(pool: list[str], count: int) -> list[str]:
        if count >= len(pool):
            return list(pool)
        picked = rng.choice(len(pool), size=count, replace=False)
        return [pool[i] for i in sorted(picked)]

    if balance:
        per_class = {lab: sorted(r for r, l in accepted.items() if l == lab) for lab in LABELS}
        half = target // 2
        take = {lab: min(half, len(per_class[lab])) for lab in LABELS}
        shortfall = target - sum(take.values())
        if shortfall > 0:
            larger = max(LABELS, key=lambda lab: (len(per_class[lab]) - take[lab], lab))
            take[larger] = min(len(per_class[larger]), take[larger] + shortfall)
        final = []
        for lab in LABELS:
            final.extend(draw(per_class[lab], take[lab]))
    else:
        final = draw(accepted_ids, target)

    final = sorted(final)
    counts = {lab: sum(1 for r in final if accepted[r] == lab) for lab in LABELS}
    return AgreementReport(
        accepted_ids=accepted_ids,
        rejected_ids=rejected,
        incomplete_ids=incomplete,
        final_oracle_ids=final,
        class_counts=counts,
        labels={r: accepted[r] for r in final},
        short=len(accepted_ids) < target,
    )
