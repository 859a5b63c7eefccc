import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tadkit.density import ClusterModel
from tadkit.errors import ConflictError, LabelError, StoreError
from tadkit.sampling import (
    AnnotationRecord,
    OracleSelection,
    export_annotation_batch,
    import_annotations,
    resolve_agreement,
    select_representatives,
)

from conftest import make_record


def _model(centers):
    centers = np.asarray(centers, dtype=np.float64)
    return ClusterModel(k=len(centers), centers=centers, seed=0, inertia=0.0)


def test_ladder_quartile_medians():
    # 100 members at distances 0..99 from the single center; 4 equal-count
    # bins of 25 have median distances 12, 37, 62, 87
    ids = [f"m{i:03d}" for i in range(100)]
    vectors = np.array([[float(i)] for i in range(100)])
    sel = select_representatives("w", ids, vectors, _model([[0.0]]), candidate_count=4, seed=0)
    assert sel.candidate_ids == ["m012", "m037", "m062", "m087"]
    assert sel.bin_plan[0][0] == 4


def test_proportional_allocation_largest_remainder():
    ids = [f"a{i}" for i in range(300)] + [f"b{i}" for i in range(100)]
    vectors = np.vstack(
        [np.random.default_rng(1).normal(0, 0.1, size=(300, 1)),
         100.0 + np.random.default_rng(2).normal(0, 0.1, size=(100, 1))]
    )
    sel = select_representatives("w", ids, vectors, _model([[0.0], [100.0]]),
                                 candidate_count=4, seed=0)
    assert sel.bin_plan[0][0] == 3
    assert sel.bin_plan[1][0] == 1
    assert len(sel.candidate_ids) == 4


def test_small_window_selects_all_flagged():
    ids = ["a", "b", "c"]
    vectors = np.zeros((3, 2))
    sel = select_representatives("w", ids, vectors, _model([[0.0, 0.0]]),
                                 candidate_count=500, seed=0)
    assert sel.selected_all is True
    assert sel.candidate_ids == ["a", "b", "c"]


def test_every_nonempty_cluster_represented():
    rng = np.random.default_rng(9)
    centers = np.array([[0.0], [50.0], [100.0], [150.0]])
    sizes = [200, 5, 40, 2]
    ids, rows = [], []
    for c, n in enumerate(sizes):
        for i in range(n):
            ids.append(f"c{c}-{i}")
            rows.append([centers[c, 0] + rng.normal(0, 0.5)])
    sel = select_representatives("w", ids, np.array(rows), _model(centers),
                                 candidate_count=10, seed=0)
    got_clusters = {rid.split("-")[0] for rid in sel.candidate_ids}
    assert got_clusters == {"c0", "c1", "c2", "c3"}
    assert len(sel.candidate_ids) == 10


def test_selection_deterministic_bytes():
    rng = np.random.default_rng(4)
    ids = [f"r{i}" for i in range(80)]
    vectors = rng.normal(size=(80, 3))
    model = _model(rng.normal(size=(3, 3)))
    a = select_representatives("w", ids, vectors, model, candidate_count=20, seed=5)
    b = select_representatives("w", ids, vectors, model, candidate_count=20, seed=5)
    assert a.dumps() == b.dumps()


# --- export / import ---------------------------------------------------------


def _selection(ids):
    return OracleSelection(window_id="w", candidate_ids=list(ids), bin_plan={}, seed=0)


def test_export_shape_and_quoting():
    records = {
        "a": make_record("a", 'contains,comma and "quotes"', likes=3),
        "b": make_record("b", "newline\nin text", deleted=True),
    }
    buf = io.StringIO()
    n = export_annotation_batch(_selection(["a", "b"]), records, buf)
    assert n == 2
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["record_id", "text", "likes", "shares", "retweets", "deleted"]
    assert rows[1][1] == 'contains,comma and "quotes"'
    assert rows[2][1] == "newline\nin text"
    assert rows[2][5] == "true"


def test_export_missing_record():
    with pytest.raises(StoreError):
        export_annotation_batch(_selection(["ghost"]), {}, io.StringIO())


def _annotator_file(rows):
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["record_id", "annotator_id", "label", "annotated_at"])
    writer.writerows(rows)
    buf.seek(0)
    return buf


def test_import_dedup_keeps_latest():
    f = _annotator_file(
        [
            ["r1", "ann1", "fake", "2021-01-01T00:00:00Z"],
            ["r1", "ann1", "real", "2021-01-02T00:00:00Z"],
        ]
    )
    anns = import_annotations([f])
    assert len(anns) == 1 and anns[0].label == "real"


def test_import_unknown_label():
    f = _annotator_file([["r1", "ann1", "maybe", "2021-01-01T00:00:00Z"]])
    with pytest.raises(LabelError):
        import_annotations([f])


def test_import_same_timestamp_conflict():
    f = _annotator_file(
        [
            ["r1", "ann1", "fake", "2021-01-01T00:00:00Z"],
            ["r1", "ann1", "real", "2021-01-01T00:00:00Z"],
        ]
    )
    with pytest.raises(ConflictError):
        import_annotations([f])


def test_import_identical_duplicate_collapses():
    f = _annotator_file(
        [
            ["r1", "ann1", "fake", "2021-01-01T00:00:00Z"],
            ["r1", "ann1", "fake", "2021-01-01T00:00:00Z"],
        ]
    )
    assert len(import_annotations([f])) == 1


@given(
    st.lists(
        st.text(
            alphabet=st.characters(blacklist_characters="\x00\r", blacklist_categories=("Cs",)),
            max_size=40,
        ),
        min_size=1,
        max_size=8,
    )
)
@settings(max_examples=60)
def test_round_trip_lossless_on_ids_and_labels(texts):
    records = {f"id{i}": make_record(f"id{i}", t) for i, t in enumerate(texts)}
    buf = io.StringIO()
    export_annotation_batch(_selection(sorted(records)), records, buf)
    # annotator returns the file with their labels appended
    reader = csv.DictReader(io.StringIO(buf.getvalue()))
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["record_id", "annotator_id", "label", "annotated_at"])
    labels = {}
    for i, row in enumerate(reader):
        label = "fake" if i % 2 == 0 else "real"
        labels[row["record_id"]] = label
        writer.writerow([row["record_id"], "ann1", label, "2021-01-01T00:00:00Z"])
    out.seek(0)
    anns = import_annotations([out])
    assert {a.record_id: a.label for a in anns} == labels


# --- agreement ----------------------------------------------------------------


def _ann(rid, annotator, label):
    return AnnotationRecord(rid, annotator, label, make_record("x", "x").timestamp)


def _five(rid, labels):
    return [_ann(rid, f"ann{i}", lab) for i, lab in enumerate(labels)]


def test_unanimous_accepted_disagreement_rejected():
    anns = _five("u", ["fake"] * 5) + _five("d", ["fake"] * 4 + ["real"])
    report = resolve_agreement(anns, target=10)
    assert report.accepted_ids == ["u"]
    assert report.rejected_ids == ["d"]
    assert report.labels == {"u": "fake"}


def test_incomplete_excluded():
    anns = _five("u", ["real"] * 5) + [_ann("partial", "ann0", "fake")]
    report = resolve_agreement(anns, target=10)
    assert report.incomplete_ids == ["partial"]
    assert report.accepted_ids == ["u"]


def test_balanced_cut_230_200():
    anns = []
    for i in range(230):
        anns += _five(f"f{i:03d}", ["fake"] * 5)
    for i in range(200):
        anns += _five(f"r{i:03d}", ["real"] * 5)
    report = resolve_agreement(anns, target=400, balance=True, seed=3)
    assert report.class_counts == {"fake": 200, "real": 200}
    assert len(report.final_oracle_ids) == 400
    assert set(report.final_oracle_ids) <= set(report.accepted_ids)


def test_balanced_topup_from_larger_class():
    anns = []
    for i in range(150):
        anns += _five(f"f{i:03d}", ["fake"] * 5)
    for i in range(400):
        anns += _five(f"r{i:03d}", ["real"] * 5)
    report = resolve_agreement(anns, target=400, balance=True, seed=3)
    assert report.class_counts == {"fake": 150, "real": 250}


def test_short_flagged_when_under_target():
    anns = []
    for i in range(30):
        anns += _five(f"f{i:03d}", ["fake"] * 5)
    report = resolve_agreement(anns, target=400)
    assert report.short is True
    assert report.final_oracle_ids == report.accepted_ids


def test_resolution_deterministic():
    anns = []
    for i in range(50):
        anns += _five(f"f{i:03d}", ["fake"] * 5)
    for i in range(50):
        anns += _five(f"r{i:03d}", ["real"] * 5)
    a = resolve_agreement(anns, target=60, balance=True, seed=9)
    b = resolve_agreement(anns, target=60, balance=True, seed=9)
    assert a.final_oracle_ids == b.final_oracle_ids
    c = resolve_agreement(anns, target=60, balance=True, seed=10)
    assert a.final_oracle_ids != c.final_oracle_ids  # seed matters
