"""Normalization-robust text preparation: lowercasing, homoglyph folding,
and tokenization that keeps intra-word hyphens and apostrophes.

Obfuscated posts swap ASCII letters for visually identical Unicode
codepoints to slip past keyword filters; ``normalize_text`` folds the
shipped look-alike table back to ASCII so prefix matching sees through it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

_TOKEN_JOINERS = {"-", "'"}


def load_confusables(path=None) -> dict[str, str]:
    """Load a confusables table (codepoint-hex -> ASCII replacement).

    Defaults to the shipped table. Keys must be fixed points of
    ``str.lower`` and values lowercase ASCII, so normalization stays
    idempotent.
    """
    if path is None:
        raw = resources.files("tadkit.data").joinpath("confusables_v1.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as f:
            raw = f.read()
    doc = json.loads(raw)
    table = {}
    for hexcp, repl in doc["map"].items():
        ch = chr(int(hexcp, 16))
        if ch != ch.lower():
            raise ValueError(f"confusable key {hexcp} is not lowercase-stable")
        if not repl.isascii() or repl != repl.lower():
            raise ValueError(f"replacement for {hexcp} is not lowercase ASCII")
        table[ch] = repl
    if any(v in table for v in table.values()):
        raise ValueError("confusables table maps onto its own keys")
    return table


_DEFAULT_TABLE: dict[str, str] | None = None


def default_confusables() -> dict[str, str]:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = load_confusables()
    return _DEFAULT_TABLE


_DEFAULT_TRANS: dict[int, str] | None = None


def _trans(table: dict[str, str]) -> dict[int, str]:
    global _DEFAULT_TRANS
    if table is _DEFAULT_TABLE:
        if _DEFAULT_TRANS is None:
            _DEFAULT_TRANS = {ord(k): v for k, v in table.items()}
        return _DEFAULT_TRANS
    return {ord(k): v for k, v in table.items()}


def normalize_text(text: str, confusables: dict[str, str] | None = None) -> str:
    """Lowercase, then fold confusable codepoints to ASCII. Idempotent."""
    table = default_confusables() if confusables is None else confusables
    return text.lower().translate(_trans(table))


@dataclass(frozen=True)
class Token:
    """A normalized token plus its span in the original string."""

    text: str
    start: int
    end: int


def _is_token_char(ch: str) -> bool:
    return ch.isalnum() or ch in _TOKEN_JOINERS


def tokenize(text: str, confusables: dict[str, str] | None = None) -> list[Token]:
    """Tokens of the normalized text, split on whitespace and punctuation
    but keeping intra-token ``-``/``'``, with spans into the original.

    Tokenization happens over the normalized character stream, so e.g. a
    fullwidth hyphen joins tokens just like ``-`` and a confusable letter
    counts as its ASCII target. Joiner-only edges are stripped.
    """
    table = default_confusables() if confusables is None else confusables
    # normalized characters paired with the original index they came from
    # (lowercasing may expand one codepoint to several)
    chars: list[tuple[str, int]] = []
    for idx, orig in enumerate(text):
        for ch in orig.lower():
            for mapped in table.get(ch, ch):
                chars.append((mapped, idx))

    tokens: list[Token] = []
    buf: list[str] = []
    spans: list[int] = []
    for ch, idx in chars:
        if _is_token_char(ch):
            buf.append(ch)
            spans.append(idx)
        elif buf:
            tok = _finish(buf, spans)
            if tok is not None:
                tokens.append(tok)
            buf, spans = [], []
    if buf:
        tok = _finish(buf, spans)
        if tok is not None:
            tokens.append(tok)
    return tokens


def _finish(buf: list[str], spans: list[int]) -> Token | None:
    # Strip joiner-only edges so "'covid'" and "--x--" token cleanly.
    lo, hi = 0, len(buf)
    while lo < hi and buf[lo] in _TOKEN_JOINERS:
        lo += 1
    while hi > lo and buf[hi - 1] in _TOKEN_JOINERS:
        hi -= 1
    if lo >= hi:
        return None
    return Token("".join(buf[lo:hi]), spans[lo], spans[hi - 1] + 1)
