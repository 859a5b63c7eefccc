"""Shared fixtures and synthetic-stream builders."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from tadkit.keywords import default_filter_config
from tadkit.records import DocumentRecord


@pytest.fixture(scope="session")
def filter_config():
    return default_filter_config()


def make_record(rid, text, ts="2020-01-25T00:00:00Z", **kwargs):
    from tadkit.records import parse_rfc3339

    return DocumentRecord(id=rid, timestamp=parse_rfc3339(ts), text=text, **kwargs)


def make_token_pool(rng: np.random.Generator, count: int, length: int = 8) -> list[str]:
    letters = "abcdefghijklmnopqrstuvwxyz"
    return [
        "".join(letters[i] for i in rng.integers(0, 26, size=length)) for _ in range(count)
    ]


def make_viral_day(rng, day: int, texts: list[str], n: int = 150) -> list[DocumentRecord]:
    """A retweet-heavy day: n samples drawn with repetition from a small
    set of distinct texts."""
    base = datetime(2020, 3, 1, tzinfo=timezone.utc) + timedelta(days=day)
    return [
        DocumentRecord(
            id=f"d{day:02d}-{i:03d}",
            timestamp=base + timedelta(seconds=i),
            text=texts[rng.integers(0, len(texts))],
        )
        for i in range(n)
    ]


def make_viral_texts(rng, n_texts: int, vocab: list[str], tokens: int = 12) -> list[str]:
    return [
        " ".join(vocab[rng.integers(0, len(vocab))] for _ in range(tokens))
        for _ in range(n_texts)
    ]
