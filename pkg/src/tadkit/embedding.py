"""Text embedders behind one contract: deterministic hashed n-grams for
offline runs, or a remote encoder service speaking the embedding wire
protocol. Both apply whole-token semantic masking of keyword stems first,
so the feature space is not dominated by the very stems that selected the
training data.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import requests

from .errors import DimError, LineageError, ProtocolError, RemoteError
from .hashing import MASK64, mix, splitmix64_np
from .textnorm import default_confusables, normalize_text, tokenize

NGRAM_SIZES = (3, 4, 5)

_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)
_SEPARATOR = np.uint32(0xFFFFFFFF)  # not a valid codepoint
_BOUND_L = "\x01"  # word-boundary sentinels framing each piece
_BOUND_R = "\x02"


@dataclass(frozen=True)
class MaskPolicy:
    enabled: bool = False
    mask_token: str = "[MASK]"
    stems: tuple[str, ...] = ()

    def __post_init__(self):
        if self.enabled:
            if not self.stems:
                raise ValueError("enabled mask policy needs at least one stem")
            for stem in self.stems:
                if not stem or stem != stem.lower():
                    raise ValueError(f"mask stem {stem!r} must be non-empty lowercase")

    def to_json(self) -> dict:
        return {
            "enabled": self.enabled,
            "mask_token": self.mask_token,
            "stems": list(self.stems),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MaskPolicy":
        return cls(
            enabled=bool(doc.get("enabled", False)),
            mask_token=doc.get("mask_token", "[MASK]"),
            stems=tuple(doc.get("stems", ())),
        )


def apply_semantic_mask(
    text: str, policy: MaskPolicy, confusables: dict[str, str] | None = None
) -> str:
    """Replace every token whose normalized form starts with a policy stem.

    Whole-token replacement: the token's span in the original string is
    spliced out for ``mask_token``; all separators are preserved verbatim.
    """
    if not policy.enabled:
        return text
    table = default_confusables() if confusables is None else confusables
    out = []
    cursor = 0
    for tok in tokenize(text, table):
        if tok.text.startswith(policy.stems):
            out.append(text[cursor : tok.start])
            out.append(policy.mask_token)
            cursor = tok.end
    out.append(text[cursor:])
    return "".join(out)


@dataclass(frozen=True)
class EmbedderDescriptor:
    """Which embedder to use, plus the lineage of window warm-starts."""

    kind: str = "hashed-ngram"  # or "remote"
    dim: int = 256
    seed: int = 0
    endpoint: str | None = None
    mask_policy: MaskPolicy = field(default_factory=MaskPolicy)
    parent: str | None = None

    def __post_init__(self):
        if self.kind not in ("hashed-ngram", "remote"):
            raise ValueError(f"unknown embedder kind {self.kind!r}")
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.kind == "remote" and not self.endpoint:
            raise ValueError("remote embedder needs an endpoint")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "seed": self.seed,
            "endpoint": self.endpoint,
            "mask_policy": self.mask_policy.to_json(),
            "parent": self.parent,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "EmbedderDescriptor":
        return cls(
            kind=doc.get("kind", "hashed-ngram"),
            dim=int(doc["dim"]),
            seed=int(doc.get("seed", 0)),
            endpoint=doc.get("endpoint"),
            mask_policy=MaskPolicy.from_json(doc.get("mask_policy", {})),
            parent=doc.get("parent"),
        )


def descriptor_hash(desc: EmbedderDescriptor) -> str:
    blob = json.dumps(desc.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def lineage_chain(desc: EmbedderDescriptor, registry: dict[str, EmbedderDescriptor]) -> list[str]:
    """Walk parent hashes back to the root; raises on a revisited ancestor."""
    chain = [descriptor_hash(desc)]
    seen = set(chain)
    cur = desc
    while cur.parent is not None:
        if cur.parent in seen:
            raise LineageError(f"lineage revisits descriptor {cur.parent[:12]}")
        chain.append(cur.parent)
        seen.add(cur.parent)
        nxt = registry.get(cur.parent)
        if nxt is None:
            break  # chain leaves the known registry; acyclic so far
        cur = nxt
    return chain


def derive_window_embedder(
    prior: EmbedderDescriptor,
    window_id: str,
    registry: dict[str, EmbedderDescriptor] | None = None,
) -> EmbedderDescriptor:
    """Descriptor for the next window, warm-started from ``prior``.

    Hashed-ngram seeds evolve deterministically with the window id; remote
    descriptors only record the parent hash (checkpoint derivation is the
    service's concern). Pure: same inputs give an identical descriptor.
    """
    registry = {} if registry is None else registry
    lineage_chain(prior, registry)
    parent = descriptor_hash(prior)
    if prior.kind == "hashed-ngram":
        child = replace(prior, seed=mix(prior.seed, window_id), parent=parent)
    else:
        child = replace(prior, parent=parent)
    registry[parent] = prior
    return child


# ---------------------------------------------------------------------------
# Hashed n-gram embedder
# ---------------------------------------------------------------------------


def _piece_codepoints(text: str) -> np.ndarray:
    """Codepoints of the normalized text with each whitespace-delimited
    piece framed by boundary sentinels and pieces joined by a separator.

    Grams never cross the separator, so the gram bag is a union of
    per-word gram bags: word order cannot change the embedding.
    """
    sep = np.array([_SEPARATOR], dtype=np.uint32)
    arrs = []
    for piece in text.split():
        framed = _BOUND_L + piece + _BOUND_R
        arrs.append(np.frombuffer(framed.encode("utf-32-le"), dtype=np.uint32))
        arrs.append(sep)
    if not arrs:
        return np.zeros(0, dtype=np.uint32)
    return np.concatenate(arrs)


def _accumulate_grams(cps: np.ndarray, seed: int, dim: int, counts: np.ndarray) -> None:
    """Add signed bucket counts for all 3-5 grams of one codepoint array,
    skipping grams that span a separator."""
    seed64 = np.uint64(seed & MASK64)
    is_sep = cps == _SEPARATOR
    for n in NGRAM_SIZES:
        m = len(cps) - n + 1
        if m <= 0:
            continue
        valid = np.ones(m, dtype=bool)
        for k in range(n):
            valid &= ~is_sep[k : k + m]
        if not valid.any():
            continue
        h = np.full(m, _FNV_OFFSET, dtype=np.uint64)
        for k in range(n):
            h = (h ^ cps[k : k + m].astype(np.uint64)) * _FNV_PRIME
        h = splitmix64_np(h[valid] ^ seed64)
        signs = 1 - 2 * (h & np.uint64(1)).astype(np.int64)
        buckets = ((h >> np.uint64(1)) % np.uint64(dim)).astype(np.int64)
        np.add.at(counts, buckets, signs)


def _normalize_rows(counts: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(counts.astype(np.float64), axis=-1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return (counts / safe).astype(np.float32)


def embed_hashed_ngram(text: str, desc: EmbedderDescriptor) -> np.ndarray:
    """Deterministic unit-norm embedding from seeded, signed hashing of
    per-word character 3-5 grams (words framed by boundary sentinels).

    Empty and whitespace-only texts embed to the reserved zero vector.
    """
    if desc.kind != "hashed-ngram":
        raise ValueError("descriptor is not hashed-ngram")
    masked = apply_semantic_mask(text, desc.mask_policy)
    norm = normalize_text(masked)
    counts = np.zeros(desc.dim, dtype=np.int64)
    _accumulate_grams(_piece_codepoints(norm), desc.seed, desc.dim, counts)
    return _normalize_rows(counts)


def embed_batch_hashed(texts: Sequence[str], desc: EmbedderDescriptor) -> np.ndarray:
    """Batch form of ``embed_hashed_ngram``; rows are bit-identical to the
    single-text path because accumulation happens in integers."""
    if desc.kind != "hashed-ngram":
        raise ValueError("descriptor is not hashed-ngram")
    n_docs = len(texts)
    out_counts = np.zeros((n_docs, desc.dim), dtype=np.int64)
    if n_docs == 0:
        return out_counts.astype(np.float32)

    pieces = []
    starts = np.zeros(n_docs + 1, dtype=np.int64)
    for i, text in enumerate(texts):
        masked = apply_semantic_mask(text, desc.mask_policy)
        cps = _piece_codepoints(normalize_text(masked))
        pieces.append(cps)
        pieces.append(np.array([_SEPARATOR], dtype=np.uint32))
        starts[i + 1] = starts[i] + len(cps) + 1
    blob = np.concatenate(pieces)

    seed64 = np.uint64(desc.seed & MASK64)
    flat = out_counts.reshape(-1)
    is_sep = blob == _SEPARATOR
    for n in NGRAM_SIZES:
        m = len(blob) - n + 1
        if m <= 0:
            continue
        valid = np.ones(m, dtype=bool)
        for k in range(n):
            valid &= ~is_sep[k : k + m]
        if not valid.any():
            continue
        h = np.full(m, _FNV_OFFSET, dtype=np.uint64)
        for k in range(n):
            h = (h ^ blob[k : k + m].astype(np.uint64)) * _FNV_PRIME
        h = splitmix64_np(h[valid] ^ seed64)
        signs = 1 - 2 * (h & np.uint64(1)).astype(np.int64)
        buckets = ((h >> np.uint64(1)) % np.uint64(desc.dim)).astype(np.int64)
        doc_idx = np.searchsorted(starts, np.flatnonzero(valid), side="right") - 1
        np.add.at(flat, doc_idx * desc.dim + buckets, signs)
    return _normalize_rows(out_counts)


# ---------------------------------------------------------------------------
# Remote embedder client
# ---------------------------------------------------------------------------


def remote_info(endpoint: str, *, timeout: float = 10.0) -> dict:
    try:
        resp = requests.get(endpoint.rstrip("/") + "/info", timeout=timeout)
        resp.raise_for_status()
        return resp.json()
    except requests.RequestException as e:
        raise RemoteError(f"info request failed: {e}") from e


def embed_remote(
    texts: Sequence[str],
    desc: EmbedderDescriptor,
    *,
    max_retries: int = 3,
    backoff: float = 0.25,
    timeout: float = 30.0,
    session=None,
) -> np.ndarray:
    """Embed a batch via the wire protocol, L2-normalizing client-side.

    Transport failures are retried with exponential backoff up to
    ``max_retries``; contract violations (wrong dim or row count) raise
    ProtocolError immediately.
    """
    if desc.kind != "remote":
        raise ValueError("descriptor is not remote")
    texts = list(texts)
    if not texts:
        return np.zeros((0, desc.dim), dtype=np.float32)
    body = {
        "texts": texts,
        "mask_stems": list(desc.mask_policy.stems) if desc.mask_policy.enabled else None,
    }
    post = (session or requests).post
    url = desc.endpoint.rstrip("/") + "/embed"
    last_exc: Exception | None = None
    for attempt in range(max_retries + 1):
        try:
            resp = post(url, json=body, timeout=timeout)
        except requests.RequestException as e:
            last_exc = e
            if attempt < max_retries:
                time.sleep(backoff * (2**attempt))
            continue
        if resp.status_code >= 500:
            last_exc = RemoteError(f"server error {resp.status_code}")
            if attempt < max_retries:
                time.sleep(backoff * (2**attempt))
            continue
        if resp.status_code != 200:
            raise ProtocolError(f"embed returned HTTP {resp.status_code}")
        payload = resp.json()
        if payload.get("dim") != desc.dim:
            raise ProtocolError(f"dim {payload.get('dim')} != descriptor dim {desc.dim}")
        vectors = payload.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProtocolError(
                f"got {len(vectors) if isinstance(vectors, list) else '?'} vectors "
                f"for {len(texts)} texts"
            )
        arr = np.asarray(vectors, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != desc.dim:
            raise ProtocolError("vector rows do not match dim")
        return _normalize_rows(arr)
    raise RemoteError(f"embed failed after {max_retries + 1} attempts: {last_exc}")


def embed_texts(texts: Sequence[str], desc: EmbedderDescriptor, **kwargs) -> np.ndarray:
    """Dispatch a batch to the descriptor's embedder."""
    if desc.kind == "hashed-ngram":
        return embed_batch_hashed(texts, desc)
    return embed_remote(texts, desc, **kwargs)


# ---------------------------------------------------------------------------
# Vector store file: "TADV" header + float32 rows
# ---------------------------------------------------------------------------

_MAGIC = b"TADV"
_HEADER = struct.Struct("<4sHIQ")
_FORMAT_VERSION = 1


def write_vectors(path, vectors: np.ndarray) -> None:
    arr = np.ascontiguousarray(vectors, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError("vectors must be a 2-D array")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(_MAGIC, _FORMAT_VERSION, arr.shape[1], arr.shape[0]))
        f.write(arr.tobytes())


def read_vectors(path) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        magic, version, dim, count = _HEADER.unpack(header)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        if version != _FORMAT_VERSION:
            raise ValueError(f"unsupported vector file version {version}")
        data = np.frombuffer(f.read(), dtype="<f4")
    if data.size != dim * count:
        raise DimError(f"expected {dim * count} floats, found {data.size}")
    return data.reshape(count, dim).copy()
