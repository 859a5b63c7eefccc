"""Command-line pipeline driver.

Subcommands: ingest, window, extend, oracle (export|import|resolve),
label, simulate, evaluate, report. Each prints one machine-readable JSON
summary on success. Exit codes: 0 success, 1 user error, 2 internal
error. Re-running a store-mutating subcommand with unchanged inputs and
seeds is a no-op (signature check), so pipelines are safely resumable.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import density, refresh, sampling, weaklabel
from .config import DEFAULT_ROOT_SEED, PipelineConfig
from .embedding import (
    EmbedderDescriptor,
    MaskPolicy,
    derive_window_embedder,
    embed_texts,
    read_vectors,
    write_vectors,
)
from .errors import EmptyWindow, TadError
from .hashing import mix
from .keywords import FilterConfig, default_filter_config, filter_stream, refilter
from .records import RejectedLine, parse_rfc3339, parse_record, read_jsonl
from .store import WindowStore
from .windowing import (
    DEFAULT_DAY_K_GRID,
    WindowSpec,
    assign_fixed_windows,
    detect_adaptive_windows,
    group_by_day,
)


def _sig(*parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, (bytes, bytearray)):
            h.update(part)
        else:
            h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return h.hexdigest()[:24]


def _file_sig(path) -> str:
    return _sig(Path(path).read_bytes())


def _load_filter_config(path: str | None) -> FilterConfig:
    return default_filter_config() if path is None else FilterConfig.load(path)


def _mask_policy(filter_config: FilterConfig, enabled: bool) -> MaskPolicy:
    stems = sorted({stem for spec in filter_config.specs for stem in spec.stems})
    return MaskPolicy(enabled=enabled, stems=tuple(stems)) if enabled else MaskPolicy()


def _store(args) -> WindowStore:
    return WindowStore(args.store)


# ---------------------------------------------------------------------------
# Subcommand handlers (each returns the JSON summary dict)
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> dict:
    fcfg = _load_filter_config(args.filter_config)
    store = WindowStore.create(args.store, config_version=fcfg.version)
    signature = _sig("ingest", _file_sig(args.input), fcfg.version, args.seed)
    if store.get_op("ingest") == signature:
        return {"command": "ingest", "skipped": True}

    records, rejects = [], []
    with open(args.input, encoding="utf-8") as f:
        for item in read_jsonl(f):
            if isinstance(item, RejectedLine):
                rejects.append(json.dumps(item.to_json(), ensure_ascii=False))
            else:
                records.append(item)
    seen = set()
    for rec in records:
        if rec.id in seen:
            raise TadError(f"duplicate record id {rec.id!r}")
        seen.add(rec.id)

    with store.lock():
        filtered, unfiltered = filter_stream(records, fcfg)
        store.put_staging(
            records, {"filtered_ids": filtered, "unfiltered_ids": unfiltered}
        )
        if rejects:
            store.append_rejects(rejects)
        store.set_op("ingest", signature)
    return {
        "command": "ingest",
        "records": len(records),
        "filtered": len(filtered),
        "unfiltered": len(unfiltered),
        "rejected": len(rejects),
    }


def cmd_window(args) -> dict:
    store = _store(args)
    records, partition = store.get_staging()
    signature = _sig(
        "window", args.mode, args.overlap_threshold, args.seed,
        ",".join(map(str, args.day_k_grid)),
        len(records), len(partition["filtered_ids"]),
    )
    if store.get_op("window") == signature:
        return {"command": "window", "skipped": True, "windows": store.window_ids()}

    filtered = set(partition["filtered_ids"])
    if args.mode == "fixed":
        spec = WindowSpec(mode="fixed")
        windows = assign_fixed_windows(records, spec, filtered)
    else:
        spec = WindowSpec(
            mode="adaptive",
            overlap_threshold=args.overlap_threshold,
            min_fit_samples=args.min_fit_samples,
            day_k_grid=tuple(args.day_k_grid),
        )
        fcfg = _load_filter_config(args.filter_config)
        desc = EmbedderDescriptor(
            dim=args.dim, seed=mix(args.seed, "adaptive-embedder"),
            mask_policy=_mask_policy(fcfg, enabled=not args.no_mask),
        )
        windows = detect_adaptive_windows(
            group_by_day(records), spec, lambda texts: embed_texts(texts, desc),
            seed=mix(args.seed, "adaptive"), filtered_ids=filtered,
        )

    by_id = {rec.id: rec for rec in records}
    with store.lock():
        for win in windows:
            member_ids = win.filtered_ids + win.unfiltered_ids
            store.put_window(win, [by_id[rid] for rid in member_ids])
        store.set_op("window", signature)
    return {
        "command": "window",
        "mode": args.mode,
        "windows": [w.window_id for w in windows],
        "counts": {w.window_id: w.record_count for w in windows},
    }


def _extend_one(store, wid, fcfg, desc_masked, desc_plain, k_grid):
    manifest = store.get_manifest(wid)
    records = {rec.id: rec for rec in store.get_records(wid)}
    filtered_ids = manifest["filtered_ids"]
    unfiltered_ids = manifest["unfiltered_ids"]
    if not filtered_ids:
        raise EmptyWindow(f"window {wid} has no filtered records")

    results = {}
    for tag, desc in (("masked", desc_masked), ("baseline", desc_plain)):
        f_vecs = embed_texts([records[r].text for r in filtered_ids], desc)
        candidates = [k for k in k_grid if k <= len(filtered_ids)]
        if len(candidates) >= 2:
            curve = density.sweep_k(f_vecs, candidates, mix(desc.seed, f"sweep-{wid}"))
            k = density.select_elbow(curve)
        else:
            curve = []
            k = candidates[0] if candidates else 1
        model = density.kmeans_fit(f_vecs, k, mix(desc.seed, f"fit-{wid}-k={k}"))
        model.inertia_sweep = curve
        density.high_density_radii(model, f_vecs)
        if unfiltered_ids:
            u_vecs = embed_texts([records[r].text for r in unfiltered_ids], desc)
            extended = density.extend_window(model, u_vecs, unfiltered_ids)
        else:
            u_vecs = np.zeros((0, desc.dim), dtype=np.float32)
            extended = []
        results[tag] = (model, extended, f_vecs, u_vecs)

    model, extended, f_vecs, u_vecs = results["masked"]
    base_model, base_extended, _, _ = results["baseline"]
    write_vectors(store.window_dir(wid) / "vectors.bin", np.vstack([f_vecs, u_vecs]))
    model.save(store.window_dir(wid) / "model.json")
    base_model.save(store.window_dir(wid) / "model_baseline.json")
    from .store import atomic_write_json

    assignments = {rid: int(c) for rid, c in zip(filtered_ids, model.assignments)}
    atomic_write_json(store.window_dir(wid) / "assignments.json", assignments)

    manifest["extended_ids"] = extended
    manifest["model_ref"] = "model.json"
    manifest["parent_embedder"] = desc_masked.to_json()
    store.put_manifest(wid, manifest)

    report = density.extension_metrics(wid, len(filtered_ids), len(extended), len(base_extended))
    payload = report.to_json()
    payload["k"] = model.k
    payload["baseline_k"] = base_model.k
    store.write_report(wid, "density", payload)
    return payload


def cmd_extend(args) -> dict:
    store = _store(args)
    fcfg = _load_filter_config(args.filter_config)
    wids = [args.window] if args.window else store.window_ids()
    if not wids:
        raise TadError("store has no windows; run `tad window` first")
    signature = _sig("extend", ",".join(wids), args.dim, ",".join(map(str, args.k_grid)),
                     args.seed, int(not args.no_mask))
    if store.get_op("extend") == signature:
        return {"command": "extend", "skipped": True}

    summaries = {}
    with store.lock():
        desc_masked = EmbedderDescriptor(
            dim=args.dim, seed=mix(args.seed, "embedder"),
            mask_policy=_mask_policy(fcfg, enabled=not args.no_mask),
        )
        desc_plain = EmbedderDescriptor(dim=args.dim, seed=mix(args.seed, "embedder"))
        lineage: dict[str, EmbedderDescriptor] = {}
        for wid in sorted(wids):
            summaries[wid] = _extend_one(store, wid, fcfg, desc_masked, desc_plain,
                                         tuple(args.k_grid))
            desc_masked = derive_window_embedder(desc_masked, wid, lineage)
            desc_plain = derive_window_embedder(desc_plain, wid)
        store.set_op("extend", signature)
    return {"command": "extend", "windows": summaries}


def _window_pool(store, wid):
    """(ids, vectors) for the oracle pool: filtered + extended members."""
    manifest = store.get_manifest(wid)
    order = manifest["filtered_ids"] + manifest["unfiltered_ids"]
    row_of = {rid: i for i, rid in enumerate(order)}
    vectors = read_vectors(store.window_dir(wid) / "vectors.bin")
    pool_ids = manifest["filtered_ids"] + manifest["extended_ids"]
    rows = np.array([row_of[rid] for rid in pool_ids], dtype=np.int64)
    return manifest, pool_ids, vectors[rows]


def cmd_oracle_export(args) -> dict:
    store = _store(args)
    wid = args.window
    manifest, pool_ids, pool_vecs = _window_pool(store, wid)
    model = density.ClusterModel.load(store.window_dir(wid) / "model.json")
    selection = sampling.select_representatives(
        wid, pool_ids, pool_vecs, model, candidate_count=args.count,
        seed=mix(args.seed, f"oracle-{wid}"),
    )
    store.write_report(wid, "oracle_selection", selection.to_json())
    records = {rec.id: rec for rec in store.get_records(wid)}
    out = Path(args.out)
    with open(out, "w", encoding="utf-8", newline="") as f:
        n = sampling.export_annotation_batch(selection, records, f)
    return {
        "command": "oracle-export", "window": wid, "candidates": n,
        "selected_all": selection.selected_all, "out": str(out),
    }


def cmd_oracle_import(args) -> dict:
    store = _store(args)
    handles = [open(p, encoding="utf-8", newline="") for p in args.files]
    try:
        annotations = sampling.import_annotations(handles)
    finally:
        for h in handles:
            h.close()
    payload = [
        {
            "record_id": a.record_id,
            "annotator_id": a.annotator_id,
            "label": a.label,
            "annotated_at": a.annotated_at.strftime("%Y-%m-%dT%H:%M:%SZ"),
        }
        for a in annotations
    ]
    store.write_report(args.window, "annotations", payload)
    return {"command": "oracle-import", "window": args.window, "annotations": len(payload)}


def cmd_oracle_resolve(args) -> dict:
    store = _store(args)
    rows = store.read_report(args.window, "annotations")
    annotations = [
        sampling.AnnotationRecord(
            record_id=r["record_id"], annotator_id=r["annotator_id"],
            label=r["label"], annotated_at=parse_rfc3339(r["annotated_at"]),
        )
        for r in rows
    ]
    report = sampling.resolve_agreement(
        annotations, target=args.target, balance=args.balance,
        seed=mix(args.seed, f"resolve-{args.window}"),
    )
    store.write_report(args.window, "agreement", report.to_json())
    return {
        "command": "oracle-resolve", "window": args.window,
        "accepted": len(report.accepted_ids), "rejected": len(report.rejected_ids),
        "final": len(report.final_oracle_ids), "class_counts": report.class_counts,
        "short": report.short,
    }


def cmd_label(args) -> dict:
    store = _store(args)
    wid = args.window
    manifest = store.get_manifest(wid)
    records = {rec.id: rec for rec in store.get_records(wid)}
    target_ids = manifest["filtered_ids"] + manifest["extended_ids"]
    rows = []
    for rid in target_ids:
        votes = weaklabel.lexicon_experts(records[rid].text)
        rows.append((rid, "lf-swear", weaklabel.VOTE_NAMES[votes.swear]))
        rows.append((rid, "lf-pronoun", weaklabel.VOTE_NAMES[votes.pronoun]))
        rows.append((rid, "lf-adverb", weaklabel.VOTE_NAMES[votes.adverb]))
    matrix = weaklabel.ExpertLabelMatrix.from_rows(rows)

    votes_path = store.window_dir(wid) / "votes.csv"
    with open(votes_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["record_id", "expert_id", "vote"])
        writer.writerows(matrix.to_rows())

    oracle_labels = {}
    try:
        agreement = store.read_report(wid, "agreement")
        oracle_labels = agreement.get("labels", {})
    except TadError:
        pass
    labels = weaklabel.aggregate(matrix, args.method, oracle_labels=oracle_labels)
    store.write_labels(wid, [l.to_json() for l in labels])
    counts = {}
    for l in labels:
        counts[l.label] = counts.get(l.label, 0) + 1
    return {"command": "label", "window": wid, "method": args.method, "labels": counts}


def cmd_refilter(args) -> dict:
    store = _store(args)
    fcfg = _load_filter_config(args.filter_config)
    with store.lock():
        report = refilter(store, fcfg)
    return {
        "command": "refilter", "new_version": report.new_version,
        "moved": report.total_moved,
        "moves": {w: len(ids) for w, ids in report.moves.items()},
    }


def cmd_simulate(args) -> dict:
    config = refresh.DriftStreamConfig(
        windows=args.windows, samples_per_window=args.samples,
        novel_fraction=args.rho, rotation_period=args.rotation_period,
        seed=args.seed,
    )
    stream = refresh.generate_drift_stream(config)
    out = Path(args.out)
    (out / "windows").mkdir(parents=True, exist_ok=True)
    cfg_doc = dict(config.__dict__)
    (out / "config.json").write_text(json.dumps(cfg_doc, sort_keys=True, indent=1))
    for win in stream:
        with open(out / "windows" / f"{win.window_id}.jsonl", "w", encoding="utf-8") as f:
            for rec in win.records:
                doc = rec.to_json()
                doc["label"] = win.labels[rec.id]
                f.write(json.dumps(doc, sort_keys=True) + "\n")
    return {
        "command": "simulate", "out": str(out), "windows": len(stream),
        "samples_per_window": config.samples_per_window,
        "config_hash": config.config_hash(),
    }


def load_labeled_windows(stream_dir) -> list[refresh.DriftWindow]:
    stream_dir = Path(stream_dir)
    windows = []
    for path in sorted((stream_dir / "windows").glob("*.jsonl")):
        records, labels = [], {}
        with open(path, encoding="utf-8") as f:
            for line in f:
                doc = json.loads(line)
                label = doc.pop("label")
                rec = parse_record(json.dumps(doc))
                records.append(rec)
                labels[rec.id] = label
        windows.append(refresh.DriftWindow(path.stem, records, labels))
    return windows


def _load_corpus(name: str, corpus_dir) -> refresh.Corpus:
    def half(which):
        records, labels = [], {}
        with open(Path(corpus_dir) / f"{which}.jsonl", encoding="utf-8") as f:
            for line in f:
                doc = json.loads(line)
                label = doc.pop("label")
                rec = parse_record(json.dumps(doc))
                records.append(rec)
                labels[rec.id] = label
        return records, labels

    train_records, train_labels = half("train")
    test_records, test_labels = half("test")
    return refresh.Corpus(name, train_records, train_labels, test_records, test_labels)


def cmd_evaluate(args) -> dict:
    if args.corpora:
        corpora = []
        for spec in args.corpora:
            name, _, path = spec.partition("=")
            if not path:
                raise TadError(f"--corpora expects name=dir, got {spec!r}")
            corpora.append(_load_corpus(name, path))
        groups = json.loads(args.groups) if args.groups else None
        result = refresh.cross_corpus_eval(corpora, groups, kind=args.kind, seed=args.seed)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as f:
                writer = csv.DictWriter(f, fieldnames=["train", "test", "accuracy"])
                writer.writeheader()
                writer.writerows(result.to_csv_rows())
        return {
            "command": "evaluate", "mode": "cross-corpus",
            "same": result.same, "cross": result.cross, "similar": result.similar,
        }

    stream = load_labeled_windows(args.stream)
    schemes = {
        "static": refresh.UpdateScheme.static(),
        "slow": refresh.UpdateScheme.slow(),
        "fast": refresh.UpdateScheme.fast(),
        "ceiling": refresh.UpdateScheme.ceiling(),
    }
    if args.scheme not in schemes:
        raise TadError(f"unknown scheme {args.scheme!r}")
    config_hash = ""
    cfg_path = Path(args.stream) / "config.json"
    if cfg_path.exists():
        config_hash = _sig(cfg_path.read_bytes())
    report = refresh.apply_scheme(
        stream, schemes[args.scheme], kind=args.kind, seed=args.seed,
        config_hash=config_hash,
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=[
                "scheme", "window_index", "window_id", "accuracy", "n_eval",
                "seed", "config_hash",
            ])
            writer.writeheader()
            writer.writerows(report.to_rows())
    return {
        "command": "evaluate", "mode": "scheme", "scheme": args.scheme,
        "kind": args.kind, "accuracies": report.accuracies,
        "mean_accuracy": report.mean_accuracy(),
    }


def cmd_report(args) -> dict:
    store = _store(args)
    rows = []
    for wid in store.window_ids():
        manifest = store.get_manifest(wid)
        row = {
            "window_id": wid,
            "filtered": manifest["counts"]["filtered"],
            "unfiltered": manifest["counts"]["unfiltered"],
            "extended": manifest["counts"]["extended"],
            "extension_pct": None,
            "lift_pct": None,
        }
        try:
            dens = store.read_report(wid, "density")
            row["extension_pct"] = dens["extension_pct"]
            row["lift_pct"] = dens["lift_pct"]
        except TadError:
            pass
        rows.append(row)
    out = Path(args.store) / "reports"
    out.mkdir(exist_ok=True)
    with open(out / "windows.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()) if rows else ["window_id"])
        writer.writeheader()
        writer.writerows(rows)
    return {"command": "report", "windows": len(rows), "out": str(out / "windows.csv")}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tad", description="drift-aware dataset pipeline"
    )
    parser.add_argument("--config", help="pipeline config JSON (flag defaults)")
    sub = parser.add_subparsers(dest="command")
    store_default = os.environ.get("TAD_STORE", "tad-store")

    def add_store(p):
        p.add_argument("--store", default=store_default)
        p.add_argument("--seed", type=int, default=DEFAULT_ROOT_SEED)

    p = sub.add_parser("ingest", help="parse and keyword-filter a JSONL stream")
    add_store(p)
    p.add_argument("--input", required=True)
    p.add_argument("--filter-config", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("window", help="partition staged records into windows")
    add_store(p)
    p.add_argument("--mode", choices=["fixed", "adaptive"], default="fixed")
    p.add_argument("--overlap-threshold", type=float, default=0.5)
    p.add_argument("--min-fit-samples", type=int, default=50)
    p.add_argument("--day-k-grid", type=int, nargs="+",
                   default=list(DEFAULT_DAY_K_GRID))
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--no-mask", action="store_true")
    p.add_argument("--filter-config", default=None)
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("extend", help="embed, cluster, and extend windows")
    add_store(p)
    p.add_argument("--window", default=None)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--k-grid", type=int, nargs="+", default=list(density.DEFAULT_K_GRID))
    p.add_argument("--no-mask", action="store_true")
    p.add_argument("--filter-config", default=None)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("refilter", help="re-apply an updated filter config to all windows")
    add_store(p)
    p.add_argument("--filter-config", required=True)
    p.set_defaults(func=cmd_refilter)

    oracle = sub.add_parser("oracle", help="oracle sampling workflows")
    osub = oracle.add_subparsers(dest="oracle_command")

    p = osub.add_parser("export", help="select candidates and write the annotation CSV")
    add_store(p)
    p.add_argument("--window", required=True)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_oracle_export)

    p = osub.add_parser("import", help="ingest annotator CSVs")
    add_store(p)
    p.add_argument("--window", required=True)
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_oracle_import)

    p = osub.add_parser("resolve", help="full-agreement filter and balanced cut")
    add_store(p)
    p.add_argument("--window", required=True)
    p.add_argument("--target", type=int, default=400)
    p.add_argument("--balance", action="store_true")
    p.set_defaults(func=cmd_oracle_resolve)

    p = sub.add_parser("label", help="expert votes and aggregation for a window")
    add_store(p)
    p.add_argument("--window", required=True)
    p.add_argument("--method", choices=["majority", "weighted", "em"], default="em")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("simulate", help="generate a synthetic drifting stream")
    p.add_argument("--out", required=True)
    p.add_argument("--windows", type=int, default=10)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--rho", type=float, default=0.6)
    p.add_argument("--rotation-period", type=int, default=1)
    p.add_argument("--seed", type=int, default=DEFAULT_ROOT_SEED)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="run update schemes or cross-corpus eval")
    p.add_argument("--stream", help="directory written by `tad simulate`")
    p.add_argument("--scheme", default="static")
    p.add_argument("--kind", choices=list(refresh.KINDS), default=refresh.KIND_TEXT)
    p.add_argument("--corpora", nargs="*", help="name=dir pairs for cross-corpus mode")
    p.add_argument("--groups", help="JSON similarity groups {name: [names]}")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_ROOT_SEED)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="collate per-window reports to CSV")
    add_store(p)
    p.set_defaults(func=cmd_report)

    return parser


def _apply_config_defaults(args) -> None:
    """A --config file provides flag defaults; explicitly passed flags win
    (detected by comparing against the built-in defaults)."""
    if not getattr(args, "config", None):
        return
    cfg = PipelineConfig.load(args.config)
    builtin = {
        "store": os.environ.get("TAD_STORE", "tad-store"),
        "seed": DEFAULT_ROOT_SEED,
        "dim": 256,
        "k_grid": list(density.DEFAULT_K_GRID),
        "filter_config": None,
        "mode": "fixed",
        "overlap_threshold": 0.5,
        "min_fit_samples": 50,
        "method": "em",
        "count": 500,
        "target": 400,
    }
    from_config = {
        "store": cfg.store,
        "seed": cfg.seed,
        "dim": cfg.embed_dim,
        "k_grid": list(cfg.k_grid),
        "filter_config": cfg.filter_config,
        "mode": cfg.window_mode,
        "overlap_threshold": cfg.overlap_threshold,
        "min_fit_samples": cfg.min_fit_samples,
        "method": cfg.aggregation,
        "count": cfg.candidate_count,
        "target": cfg.oracle_target,
    }
    for attr, default in builtin.items():
        if hasattr(args, attr) and getattr(args, attr) == default:
            setattr(args, attr, from_config[attr])


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse prints usage itself
        return 0 if e.code in (0, None) else 1
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        _apply_config_defaults(args)
    except (OSError, ValueError) as e:
        print(json.dumps({"error": str(e), "kind": type(e).__name__}), file=sys.stderr)
        return 1
    try:
        summary = args.func(args)
    except TadError as e:
        print(json.dumps({"error": str(e), "kind": type(e).__name__}), file=sys.stderr)
        return 1
    except Exception as e:  # internal error
        print(json.dumps({"error": str(e), "kind": type(e).__name__}), file=sys.stderr)
        return 2
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
