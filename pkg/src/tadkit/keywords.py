"""Updatable keyword filters with prefix matching on normalized tokens.

A spec matches when any token of the normalized text starts with its base
stem or one of its variations, so "COVID", "covid-19" and "COVID19" are
all captured by the single stem ``covid``. Filters carry a version; when
a config is updated, earlier windows are re-matched so late-added stems
recover early posts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from importlib import resources
from typing import Sequence

from .errors import VersionError
from .records import DocumentRecord, parse_rfc3339
from .textnorm import default_confusables, load_confusables, tokenize


@dataclass(frozen=True)
class KeywordSpec:
    """A prefix stem plus variations, e.g. base "quarantin"."""

    base: str
    variations: tuple[str, ...] = ()
    languages: tuple[str, ...] = ()  # provenance metadata, not a match gate
    added_at: datetime | None = None

    def __post_init__(self):
        for stem in (self.base, *self.variations):
            if not stem or stem != stem.lower() or any(c.isspace() for c in stem):
                raise ValueError(f"stem {stem!r} must be non-empty lowercase without whitespace")

    @property
    def stems(self) -> tuple[str, ...]:
        return (self.base, *self.variations)


@dataclass
class FilterConfig:
    specs: list[KeywordSpec]
    confusables: dict[str, str] = field(default_factory=default_confusables)
    version: int = 1

    @classmethod
    def from_json(cls, doc: dict, base_dir=None) -> "FilterConfig":
        specs = [
            KeywordSpec(
                base=s["base"],
                variations=tuple(s.get("variations", ())),
                languages=tuple(s.get("languages", ())),
                added_at=parse_rfc3339(s["added_at"]) if s.get("added_at") else None,
            )
            for s in doc["specs"]
        ]
        conf_ref = doc.get("confusables")
        if conf_ref is None or conf_ref == "confusables_v1.json":
            table = default_confusables()
        else:
            path = conf_ref if base_dir is None else f"{base_dir}/{conf_ref}"
            table = load_confusables(path)
        return cls(specs=specs, confusables=table, version=int(doc.get("version", 1)))

    @classmethod
    def load(cls, path) -> "FilterConfig":
        import os

        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
        return cls.from_json(doc, base_dir=os.path.dirname(os.path.abspath(path)))


_DEFAULT_CONFIG: FilterConfig | None = None


def default_filter_config() -> FilterConfig:
    """The shipped initial-collection stem set (with es/fr translations)."""
    global _DEFAULT_CONFIG
    if _DEFAULT_CONFIG is None:
        raw = resources.files("tadkit.data").joinpath("keywords_default.json").read_text("utf-8")
        _DEFAULT_CONFIG = FilterConfig.from_json(json.loads(raw))
    return _DEFAULT_CONFIG


def match_keywords(text: str, config: FilterConfig) -> list[str]:
    """Base keywords whose stems prefix any normalized token of ``text``.

    Deduplicated, ordered by the position of each spec's first matching
    token (ties keep config order).
    """
    tokens = tokenize(text, config.confusables)
    hits: list[tuple[int, int, str]] = []
    for spec_idx, spec in enumerate(config.specs):
        for tok_idx, tok in enumerate(tokens):
            if tok.text.startswith(spec.stems):
                hits.append((tok_idx, spec_idx, spec.base))
                break
    hits.sort()
    out: list[str] = []
    for _, _, base in hits:
        if base not in out:
            out.append(base)
    return out


def filter_stream(
    records: Sequence[DocumentRecord], config: FilterConfig
) -> tuple[list[str], list[str]]:
    """Partition record ids into (filtered, unfiltered) by keyword match.

    Output order follows input position on both sides.
    """
    filtered, unfiltered = [], []
    for rec in records:
        if match_keywords(rec.text, config):
            filtered.append(rec.id)
        else:
            unfiltered.append(rec.id)
    return filtered, unfiltered


@dataclass
class RefilterReport:
    """Per-window ids moved from unfiltered to filtered by a config update."""

    new_version: int
    moves: dict[str, list[str]]

    @property
    def total_moved(self) -> int:
        return sum(len(v) for v in self.moves.values())


def refilter(store, new_config: FilterConfig) -> RefilterReport:
    """Re-match every window's unfiltered pool against a newer config.

    Newly matching records move into the filtered set; filters only grow
    the filtered side, never shrink it. Guarded by the stored config
    version so re-running a version is rejected rather than repeated.
    """
    current = store.config_version
    if new_config.version <= current:
        raise VersionError(
            f"config version {new_config.version} is not newer than stored {current}"
        )
    moves: dict[str, list[str]] = {}
    for wid in store.window_ids():
        manifest = store.get_manifest(wid)
        unfiltered = manifest["unfiltered_ids"]
        if not unfiltered:
            moves[wid] = []
            continue
        by_id = {rec.id: rec for rec in store.get_records(wid)}
        moved = [rid for rid in unfiltered if match_keywords(by_id[rid].text, new_config)]
        if moved:
            moved_set = set(moved)
            manifest["filtered_ids"] = manifest["filtered_ids"] + moved
            manifest["unfiltered_ids"] = [r for r in unfiltered if r not in moved_set]
            # promoted records are filtered now, no longer extension members
            manifest["extended_ids"] = [
                r for r in manifest["extended_ids"] if r not in moved_set
            ]
            store.put_manifest(wid, manifest)
        moves[wid] = moved
    store.set_config_version(new_config.version)
    return RefilterReport(new_version=new_config.version, moves=moves)
