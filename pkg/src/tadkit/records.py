"""Timestamped document records and JSONL stream parsing.

One record per line; records that fail to parse are quarantined to a
reject file rather than dropped, so no post can silently vanish from a
window.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Iterator, TextIO

from .errors import ParseError, SchemaError

_COUNT_FIELDS = ("likes", "shares", "retweets")


def parse_rfc3339(value: str) -> datetime:
    """Parse an RFC 3339 timestamp to an aware UTC datetime.

    Accepts 'Z' and numeric offsets; a missing offset is read as UTC.
    """
    if not isinstance(value, str):
        raise ValueError("timestamp must be a string")
    s = value.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_rfc3339(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class DocumentRecord:
    """One timestamped post plus the social metadata shown to annotators."""

    id: str
    timestamp: datetime
    text: str
    lang: str | None = None
    likes: int = 0
    shares: int = 0
    retweets: int = 0
    deleted: bool = False
    source_url: str | None = None

    def to_json(self) -> dict:
        doc = {
            "id": self.id,
            "timestamp": format_rfc3339(self.timestamp),
            "text": self.text,
            "likes": self.likes,
            "shares": self.shares,
            "retweets": self.retweets,
            "deleted": self.deleted,
        }
        if self.lang is not None:
            doc["lang"] = self.lang
        if self.source_url is not None:
            doc["source_url"] = self.source_url
        return doc


def parse_record(line: str, line_no: int = 0) -> DocumentRecord:
    """Parse one JSONL line into a DocumentRecord.

    Raises ParseError for malformed JSON and SchemaError for a missing or
    invalid required field (id, timestamp, text) or negative counts.
    """
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(line_no, f"malformed JSON: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ParseError(line_no, "line is not a JSON object")

    for key in ("id", "timestamp", "text"):
        if key not in doc:
            raise SchemaError(key, "missing")
    rid = doc["id"]
    if not isinstance(rid, str) or not rid:
        raise SchemaError("id", "must be a non-empty string")
    try:
        ts = parse_rfc3339(doc["timestamp"])
    except (ValueError, TypeError) as e:
        raise SchemaError("timestamp", f"not RFC 3339: {e}") from e
    text = doc["text"]
    if not isinstance(text, str):
        raise SchemaError("text", "must be a string")

    counts = {}
    for key in _COUNT_FIELDS:
        val = doc.get(key, 0)
        if not isinstance(val, int) or isinstance(val, bool) or val < 0:
            raise SchemaError(key, "must be a non-negative integer")
        counts[key] = val

    lang = doc.get("lang")
    if lang is not None and not isinstance(lang, str):
        raise SchemaError("lang", "must be a string")

    return DocumentRecord(
        id=rid,
        timestamp=ts,
        text=text,
        lang=lang,
        deleted=bool(doc.get("deleted", False)),
        source_url=doc.get("source_url"),
        **counts,
    )


@dataclass
class RejectedLine:
    line_no: int
    reason: str
    raw: str

    def to_json(self) -> dict:
        return {"line_no": self.line_no, "reason": self.reason, "raw": self.raw}


def read_jsonl(lines: Iterable[str]) -> Iterator[DocumentRecord | RejectedLine]:
    """Parse a JSONL stream, yielding records and quarantined rejects."""
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield parse_record(line, line_no)
        except (ParseError, SchemaError) as e:
            yield RejectedLine(line_no, str(e), line.rstrip("\n"))


def load_records(path, reject_sink: TextIO | None = None) -> list[DocumentRecord]:
    """Read records from a JSONL file, writing rejects to ``reject_sink``."""
    records = []
    with open(path, encoding="utf-8") as f:
        for item in read_jsonl(f):
            if isinstance(item, RejectedLine):
                if reject_sink is not None:
                    reject_sink.write(json.dumps(item.to_json(), ensure_ascii=False) + "\n")
            else:
                records.append(item)
    return records


def dump_records(records: Iterable[DocumentRecord], fh: TextIO) -> int:
    n = 0
    for rec in records:
        fh.write(json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=True) + "\n")
        n += 1
    return n
