"""Run collapse of cluster-id sequences and their textual rendering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_int_sequence

# 500 contiguous printable single-codepoint characters for text export
EXPORT_BASE = 0x4E00


@dataclass
class SymbolSeq:
    """A clip's run-collapsed symbol sequence over the codebook alphabet."""

    clip_id: str
    symbols: np.ndarray

    def __post_init__(self):
        self.symbols = check_int_sequence(self.symbols, "symbols")


def collapse_runs(ids) -> np.ndarray:
    """Collapse each maximal run of equal ids to a single symbol."""
    arr = check_int_sequence(ids, "ids")
    if arr.size == 0:
        return arr
    keep = np.empty(arr.shape[0], dtype=bool)
    keep[0] = True
    np.not_equal(arr[1:], arr[:-1], out=keep[1:])
    return arr[keep]


def dump_text(symbols, alphabet_size: int = 500) -> str:
    """Render symbols as text, symbol i -> chr(EXPORT_BASE + i)."""
    arr = check_int_sequence(symbols, "symbols")
    if arr.size and (arr.min() < 0 or arr.max() >= alphabet_size):
        raise ValueError(f"symbol out of range [0, {alphabet_size})")
    return "".join(chr(EXPORT_BASE + int(s)) for s in arr)


def parse_text(text: str, alphabet_size: int = 500) -> np.ndarray:
    """Inverse of dump_text."""
    symbols = np.fromiter((ord(ch) - EXPORT_BASE for ch in text), dtype=np.int64, count=len(text))
    if symbols.size and (symbols.min() < 0 or symbols.max() >= alphabet_size):
        raise ValueError(f"character out of range for alphabet size {alphabet_size}")
    return symbols
