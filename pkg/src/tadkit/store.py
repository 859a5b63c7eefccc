"""Content-addressed on-disk window store.

Layout::

    root/
      index.json                  # window order, config version, op signatures
      rejects.jsonl               # quarantined unparseable lines
      staging/records.jsonl       # ingested records awaiting windowing
      staging/partition.json
      windows/<wid>/manifest.json
      windows/<wid>/records.jsonl
      windows/<wid>/vectors.bin   (+ vectors_baseline.bin)
      windows/<wid>/model.json    (+ model_baseline.json)
      windows/<wid>/labels.jsonl
      windows/<wid>/reports/*.json

Every mutation writes a temp file in the target directory and renames it
into place, so a killed process never leaves a half-written file; readers
ignore ``*.tmp-*`` names. One writer at a time, enforced by a lock file.
"""

from __future__ import annotations

import json
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Sequence

from .errors import StoreError, StoreLockedError
from .records import DocumentRecord, dump_records, load_records
from .windowing import Window

_INDEX = "index.json"
_LOCK = ".lock"


def atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def atomic_write_json(path: Path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


class WindowStore:
    def __init__(self, root):
        self.root = Path(root)
        if not (self.root / _INDEX).exists():
            raise StoreError(f"no store at {self.root}")

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    def create(cls, root, config_version: int = 1) -> "WindowStore":
        rootp = Path(root)
        rootp.mkdir(parents=True, exist_ok=True)
        if not (rootp / _INDEX).exists():
            atomic_write_json(
                rootp / _INDEX,
                {"windows": [], "config_version": config_version, "ops": {}},
            )
        return cls(rootp)

    @contextmanager
    def lock(self):
        path = self.root / _LOCK
        try:
            fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreLockedError(f"store {self.root} is locked") from None
        try:
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            yield self
        finally:
            path.unlink(missing_ok=True)

    # -- index -------------------------------------------------------------

    def _index(self) -> dict:
        return json.loads((self.root / _INDEX).read_text("utf-8"))

    def _put_index(self, index: dict) -> None:
        atomic_write_json(self.root / _INDEX, index)

    @property
    def config_version(self) -> int:
        return self._index()["config_version"]

    def set_config_version(self, version: int) -> None:
        index = self._index()
        index["config_version"] = version
        self._put_index(index)

    def window_ids(self) -> list[str]:
        return list(self._index()["windows"])

    def get_op(self, key: str) -> str | None:
        return self._index()["ops"].get(key)

    def set_op(self, key: str, signature: str) -> None:
        index = self._index()
        index["ops"][key] = signature
        self._put_index(index)

    # -- staging -----------------------------------------------------------

    def put_staging(self, records: Sequence[DocumentRecord], partition: dict) -> None:
        staging = self.root / "staging"
        staging.mkdir(exist_ok=True)
        tmp = staging / f"records.jsonl.tmp-{os.getpid()}"
        try:
            with open(tmp, "w", encoding="utf-8") as f:
                dump_records(records, f)
            os.replace(tmp, staging / "records.jsonl")
        finally:
            if tmp.exists():
                tmp.unlink()
        atomic_write_json(staging / "partition.json", partition)

    def get_staging(self) -> tuple[list[DocumentRecord], dict]:
        staging = self.root / "staging"
        if not (staging / "records.jsonl").exists():
            raise StoreError("nothing staged; run ingest first")
        records = load_records(staging / "records.jsonl")
        partition = json.loads((staging / "partition.json").read_text("utf-8"))
        return records, partition

    def append_rejects(self, lines: Iterable[str]) -> None:
        with open(self.root / "rejects.jsonl", "a", encoding="utf-8") as f:
            for line in lines:
                f.write(line + "\n")

    # -- windows -----------------------------------------------------------

    def window_dir(self, window_id: str) -> Path:
        return self.root / "windows" / window_id

    def put_window(self, window: Window, records: Sequence[DocumentRecord]) -> None:
        wdir = self.window_dir(window.window_id)
        (wdir / "reports").mkdir(parents=True, exist_ok=True)
        tmp = wdir / f"records.jsonl.tmp-{os.getpid()}"
        try:
            with open(tmp, "w", encoding="utf-8") as f:
                dump_records(records, f)
            os.replace(tmp, wdir / "records.jsonl")
        finally:
            if tmp.exists():
                tmp.unlink()
        self.put_manifest(window.window_id, manifest_from_window(window, self.config_version))
        index = self._index()
        if window.window_id not in index["windows"]:
            index["windows"].append(window.window_id)
            index["windows"].sort()
            self._put_index(index)

    def get_manifest(self, window_id: str) -> dict:
        path = self.window_dir(window_id) / "manifest.json"
        if not path.exists():
            raise StoreError(f"window {window_id} not in store")
        return json.loads(path.read_text("utf-8"))

    def put_manifest(self, window_id: str, manifest: dict) -> None:
        manifest["counts"] = {
            "filtered": len(manifest["filtered_ids"]),
            "unfiltered": len(manifest["unfiltered_ids"]),
            "extended": len(manifest["extended_ids"]),
        }
        wdir = self.window_dir(window_id)
        wdir.mkdir(parents=True, exist_ok=True)
        atomic_write_json(wdir / "manifest.json", manifest)

    def get_records(self, window_id: str) -> list[DocumentRecord]:
        path = self.window_dir(window_id) / "records.jsonl"
        if not path.exists():
            raise StoreError(f"window {window_id} has no records file")
        return load_records(path)

    def write_report(self, window_id: str, name: str, payload) -> None:
        rdir = self.window_dir(window_id) / "reports"
        rdir.mkdir(parents=True, exist_ok=True)
        atomic_write_json(rdir / f"{name}.json", payload)

    def read_report(self, window_id: str, name: str):
        path = self.window_dir(window_id) / "reports" / f"{name}.json"
        if not path.exists():
            raise StoreError(f"window {window_id} has no report {name!r}")
        return json.loads(path.read_text("utf-8"))

    def write_labels(self, window_id: str, rows: Sequence[dict]) -> None:
        wdir = self.window_dir(window_id)
        tmp = wdir / f"labels.jsonl.tmp-{os.getpid()}"
        try:
            with open(tmp, "w", encoding="utf-8") as f:
                for row in rows:
                    f.write(json.dumps(row, sort_keys=True, separators=(",", ":")) + "\n")
            os.replace(tmp, wdir / "labels.jsonl")
        finally:
            if tmp.exists():
                tmp.unlink()


def manifest_from_window(window: Window, config_version: int) -> dict:
    from .records import format_rfc3339

    return {
        "window_id": window.window_id,
        "start": format_rfc3339(window.start),
        "end": format_rfc3339(window.end),
        "filtered_ids": list(window.filtered_ids),
        "unfiltered_ids": list(window.unfiltered_ids),
        "extended_ids": list(window.extended_ids),
        "model_ref": window.model_ref,
        "parent_embedder": window.parent_embedder,
        "config_version": config_version,
    }
