"""Pipeline configuration with a canonical, hashable serialization.

All run-level knobs live here so one JSON file plus one root seed
reproduces a pipeline end to end; every subcommand derives its own seeds
by name from the root.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

from .density import DEFAULT_K_GRID

DEFAULT_ROOT_SEED = 20200125


@dataclass
class PipelineConfig:
    store: str = "tad-store"
    filter_config: str | None = None  # path; None = shipped default stems
    window_mode: str = "fixed"
    overlap_threshold: float = 0.5
    min_fit_samples: int = 50
    embed_dim: int = 256
    mask: bool = True
    k_grid: tuple[int, ...] = DEFAULT_K_GRID
    candidate_count: int = 500
    oracle_target: int = 400
    balance: bool = True
    aggregation: str = "em"
    seed: int = DEFAULT_ROOT_SEED

    def canonical_json(self) -> str:
        doc = asdict(self)
        doc["k_grid"] = list(self.k_grid)
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()[:16]

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
        known = {f_.name for f_ in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "k_grid" in doc:
            doc["k_grid"] = tuple(doc["k_grid"])
        return cls(**doc)
