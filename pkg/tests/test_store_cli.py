import csv
import io
import json
import os
from pathlib import Path

import numpy as np
import pytest

from tadkit import cli
from tadkit.errors import StoreLockedError
from tadkit.store import WindowStore, atomic_write_json
from tadkit.windowing import Window

from conftest import make_record


# --- store ------------------------------------------------------------------


def _window(wid="2020-01", filtered=("a",), unfiltered=("b",)):
    return Window(
        window_id=wid,
        start=make_record("x", "x", ts="2020-01-01T00:00:00Z").timestamp,
        end=make_record("x", "x", ts="2020-02-01T00:00:00Z").timestamp,
        filtered_ids=list(filtered),
        unfiltered_ids=list(unfiltered),
    )


def test_manifest_counts_match_lists(tmp_path):
    store = WindowStore.create(tmp_path / "s")
    records = [make_record("a", "covid"), make_record("b", "plain")]
    store.put_window(_window(), records)
    manifest = store.get_manifest("2020-01")
    assert manifest["counts"] == {"filtered": 1, "unfiltered": 1, "extended": 0}
    assert len(store.get_records("2020-01")) == 2
    assert store.window_ids() == ["2020-01"]


def test_lock_is_exclusive(tmp_path):
    store = WindowStore.create(tmp_path / "s")
    with store.lock():
        with pytest.raises(StoreLockedError):
            with store.lock():
                pass
    with store.lock():  # released after exit
        pass


def test_crash_during_write_leaves_old_manifest(tmp_path, monkeypatch):
    store = WindowStore.create(tmp_path / "s")
    store.put_window(_window(), [make_record("a", "covid"), make_record("b", "plain")])
    before = (store.window_dir("2020-01") / "manifest.json").read_bytes()

    def explode(src, dst):
        raise RuntimeError("killed mid-write")

    monkeypatch.setattr("tadkit.store.os.replace", explode)
    manifest = store.get_manifest("2020-01")
    manifest["extended_ids"] = ["b"]
    with pytest.raises(RuntimeError):
        store.put_manifest("2020-01", manifest)
    monkeypatch.undo()

    after = (store.window_dir("2020-01") / "manifest.json").read_bytes()
    assert after == before  # old content intact
    leftovers = list(store.window_dir("2020-01").glob("*.tmp-*"))
    assert leftovers == []  # no half-written temp files


def test_atomic_json_is_canonical(tmp_path):
    path = tmp_path / "x.json"
    atomic_write_json(path, {"b": 1, "a": [2, 3]})
    assert path.read_text() == '{"a":[2,3],"b":1}\n'


# --- CLI pipeline --------------------------------------------------------------


FAKE_TEXTS = [
    "COVID vaccine hoax spreading fast",
    "the plandemic is a bioweapon they said",
    "5g towers cause the virus",
    "new covid variant in quarantine zone",
    "masks and n95 do nothing claims post",
    "lockdown forever says leaked memo",
]
PLAIN_TEXTS = [
    "lovely weather in the park today",
    "my cat knocked over a plant",
    "great pasta recipe with fresh herbs",
    "the game went to overtime last night",
    "morning run along the river",
    "new phone charge lasts for ages",
]


def _write_stream(path, n_per_month=40):
    lines = []
    i = 0
    for month, day0 in (("2020-01", 10), ("2020-02", 5)):
        for j in range(n_per_month):
            text = (FAKE_TEXTS if j % 2 == 0 else PLAIN_TEXTS)[(j // 2) % 6]
            lines.append(
                json.dumps(
                    {
                        "id": f"t{i:04d}",
                        "timestamp": f"{month}-{day0 + j % 20:02d}T12:00:00Z",
                        "text": text,
                        "likes": j % 7,
                        "shares": j % 5,
                        "retweets": j % 3,
                    }
                )
            )
            i += 1
    lines.append("garbage line")
    path.write_text("\n".join(lines) + "\n")
    return i


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out.strip()
    return code, json.loads(out) if out else None


@pytest.fixture()
def pipeline_store(tmp_path, capsys):
    stream = tmp_path / "stream.jsonl"
    _write_stream(stream)
    store = tmp_path / "store"
    code, summary = run_cli(
        capsys, "ingest", "--store", str(store), "--input", str(stream), "--seed", "11"
    )
    assert code == 0 and summary["rejected"] == 1
    code, summary = run_cli(capsys, "window", "--store", str(store), "--seed", "11")
    assert code == 0 and summary["windows"] == ["2020-01", "2020-02"]
    code, summary = run_cli(
        capsys, "extend", "--store", str(store), "--dim", "64",
        "--k-grid", "2", "3", "--seed", "11",
    )
    assert code == 0
    return store


def test_pipeline_end_to_end(pipeline_store, tmp_path, capsys):
    store = WindowStore(pipeline_store)
    manifest = store.get_manifest("2020-01")
    assert manifest["counts"]["filtered"] == 20
    assert (store.window_dir("2020-01") / "model.json").exists()
    assert (store.window_dir("2020-01") / "vectors.bin").exists()
    assignments = json.loads(
        (store.window_dir("2020-01") / "assignments.json").read_text()
    )
    assert set(assignments) == set(manifest["filtered_ids"])
    density = store.read_report("2020-01", "density")
    assert density["filtered_count"] == 20
    assert "extension_pct" in density

    # oracle round trip on window 2020-01
    out_csv = tmp_path / "batch.csv"
    code, summary = run_cli(
        capsys, "oracle", "export", "--store", str(pipeline_store),
        "--window", "2020-01", "--count", "10", "--out", str(out_csv), "--seed", "11",
    )
    assert code == 0 and summary["candidates"] == 10

    with open(out_csv, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    ann_files = []
    for a in range(5):
        p = tmp_path / f"ann{a}.csv"
        with open(p, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["record_id", "annotator_id", "label", "annotated_at"])
            for r in rows:
                label = "fake" if int(r["record_id"][1:]) % 2 == 0 else "real"
                w.writerow([r["record_id"], f"ann{a}", label, "2021-01-01T00:00:00Z"])
        ann_files.append(str(p))
    code, summary = run_cli(
        capsys, "oracle", "import", "--store", str(pipeline_store),
        "--window", "2020-01", *ann_files,
    )
    assert code == 0 and summary["annotations"] == 50
    code, summary = run_cli(
        capsys, "oracle", "resolve", "--store", str(pipeline_store),
        "--window", "2020-01", "--target", "8", "--balance", "--seed", "11",
    )
    assert code == 0 and summary["accepted"] == 10 and summary["final"] == 8

    code, summary = run_cli(
        capsys, "label", "--store", str(pipeline_store),
        "--window", "2020-01", "--method", "em",
    )
    assert code == 0
    labels_file = store.window_dir("2020-01") / "labels.jsonl"
    assert labels_file.exists()
    assert (store.window_dir("2020-01") / "votes.csv").exists()

    code, summary = run_cli(capsys, "report", "--store", str(pipeline_store))
    assert code == 0 and summary["windows"] == 2
    assert (Path(pipeline_store) / "reports" / "windows.csv").exists()


def test_rerun_is_skipped_noop(pipeline_store, tmp_path, capsys):
    stream = tmp_path / "stream.jsonl"
    code, summary = run_cli(
        capsys, "ingest", "--store", str(pipeline_store), "--input", str(stream),
        "--seed", "11",
    )
    assert code == 0 and summary.get("skipped") is True
    code, summary = run_cli(capsys, "window", "--store", str(pipeline_store), "--seed", "11")
    assert code == 0 and summary.get("skipped") is True
    code, summary = run_cli(
        capsys, "extend", "--store", str(pipeline_store), "--dim", "64",
        "--k-grid", "2", "3", "--seed", "11",
    )
    assert code == 0 and summary.get("skipped") is True


def test_missing_store_is_user_error(tmp_path, capsys):
    code = cli.main(["report", "--store", str(tmp_path / "nope")])
    assert code == 1


def test_unknown_command_exits_one(capsys):
    assert cli.main(["frobnicate"]) == 1
    assert cli.main([]) == 1


def test_simulate_and_evaluate(tmp_path, capsys):
    sim = tmp_path / "sim"
    code, summary = run_cli(
        capsys, "simulate", "--out", str(sim), "--windows", "4",
        "--samples", "200", "--rho", "0.6", "--seed", "9",
    )
    assert code == 0 and summary["windows"] == 4
    assert (sim / "windows" / "sim-00.jsonl").exists()

    out_csv = tmp_path / "eval.csv"
    code, summary = run_cli(
        capsys, "evaluate", "--stream", str(sim), "--scheme", "fast",
        "--out", str(out_csv), "--seed", "9",
    )
    assert code == 0 and len(summary["accuracies"]) == 4
    with open(out_csv, newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 4 and rows[0]["scheme"] == "fast"


def test_evaluate_cross_corpus(tmp_path, capsys):
    from tadkit.refresh import make_synthetic_corpus

    for name, seed in (("alpha", 5), ("beta", 6)):
        corpus = make_synthetic_corpus(name, seed=seed, n_train=150, n_test=80)
        d = tmp_path / name
        d.mkdir()
        for which, recs, labels in (
            ("train", corpus.train_records, corpus.train_labels),
            ("test", corpus.test_records, corpus.test_labels),
        ):
            with open(d / f"{which}.jsonl", "w") as f:
                for r in recs:
                    doc = r.to_json()
                    doc["label"] = labels[r.id]
                    f.write(json.dumps(doc) + "\n")
    code, summary = run_cli(
        capsys, "evaluate",
        "--corpora", f"alpha={tmp_path/'alpha'}", f"beta={tmp_path/'beta'}",
        "--seed", "4",
    )
    assert code == 0
    assert summary["same"]["alpha"] > summary["cross"]["alpha"]


def test_pipeline_determinism_smoke(tmp_path, capsys):
    stream = tmp_path / "stream.jsonl"
    _write_stream(stream)

    def run(store):
        assert cli.main(["ingest", "--store", str(store), "--input", str(stream),
                         "--seed", "11"]) == 0
        assert cli.main(["window", "--store", str(store), "--seed", "11"]) == 0
        assert cli.main(["extend", "--store", str(store), "--dim", "64",
                         "--k-grid", "2", "3", "--seed", "11"]) == 0
        capsys.readouterr()

    run(tmp_path / "s1")
    run(tmp_path / "s2")
    for rel in (
        "windows/2020-01/manifest.json",
        "windows/2020-01/model.json",
        "windows/2020-01/vectors.bin",
        "windows/2020-02/manifest.json",
    ):
        a = (tmp_path / "s1" / rel).read_bytes()
        b = (tmp_path / "s2" / rel).read_bytes()
        assert a == b, rel
