"""Whole-token keyword masking applied server-side before encoding.

Tokens are judged on their normalized form (lowercased, homoglyph
look-alikes folded to ASCII via the shipped table); a token whose
normalized form starts with any requested stem is replaced wholesale by
the mask token, with all separators preserved byte for byte.
"""

from __future__ import annotations

import json
from importlib import resources

_TOKEN_JOINERS = {"-", "'"}

_TABLE: dict[str, str] | None = None


def _confusables() -> dict[str, str]:
    global _TABLE
    if _TABLE is None:
        raw = resources.files("tad_sidecar.data").joinpath("confusables_v1.json").read_text("utf-8")
        _TABLE = {chr(int(cp, 16)): repl for cp, repl in json.loads(raw)["map"].items()}
    return _TABLE


def _token_spans(text: str) -> list[tuple[str, int, int]]:
    """(normalized token, start, end) over the original string."""
    table = _confusables()
    chars: list[tuple[str, int]] = []
    for idx, orig in enumerate(text):
        for ch in orig.lower():
            for mapped in table.get(ch, ch):
                chars.append((mapped, idx))

    out: list[tuple[str, int, int]] = []
    buf: list[str] = []
    spans: list[int] = []

    def flush():
        lo, hi = 0, len(buf)
        while lo < hi and buf[lo] in _TOKEN_JOINERS:
            lo += 1
        while hi > lo and buf[hi - 1] in _TOKEN_JOINERS:
            hi -= 1
        if lo < hi:
            out.append(("".join(buf[lo:hi]), spans[lo], spans[hi - 1] + 1))

    for ch, idx in chars:
        if ch.isalnum() or ch in _TOKEN_JOINERS:
            buf.append(ch)
            spans.append(idx)
        elif buf:
            flush()
            buf, spans = [], []
    if buf:
        flush()
    return out


def mask_text(text: str, stems: list[str], mask_token: str = "[MASK]") -> str:
    if not stems:
        return text
    stems_t = tuple(s.lower() for s in stems)
    pieces = []
    cursor = 0
    for tok, start, end in _token_spans(text):
        if tok.startswith(stems_t):
            pieces.append(text[cursor:start])
            pieces.append(mask_token)
            cursor = end
    pieces.append(text[cursor:])
    return "".join(pieces)
