"""Pairwise-merge subword tokenizer over collapsed symbol sequences.

Token ids 0..alphabet_size-1 are the base symbols; the i-th learned merge
creates token id alphabet_size + i. Training merges the most frequent
adjacent pair until the vocabulary reaches vocab_size or no pair occurs at
least min_pair_count times; ties prefer the pair whose (left, right)
base-symbol decompositions compare lexicographically smaller.
"""

from __future__ import annotations

import json
import warnings

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_int_sequence

_SEP = np.int64(-1)
_KEY_SHIFT = np.int64(32)


class VocabularyExhaustedWarning(UserWarning):
    """Training stopped early: no remaining pair reaches min_pair_count."""


def _as_symbol_array(seq) -> np.ndarray:
    if hasattr(seq, "symbols"):
        seq = seq.symbols
    return check_int_sequence(seq, "symbols")


class SubwordTokenizer(BaseEstimator):
    """Deterministic merge-based tokenizer.

    Fitted attributes: merges_ (ordered list of (left_id, right_id)),
    decompositions_ (token id -> tuple of base symbols), n_tokens_,
    vocab_exhausted_ (True when the corpus could not support vocab_size).
    """

    def __init__(self, vocab_size: int = 10000, alphabet_size: int = 500,
                 min_pair_count: int = 2):
        self.vocab_size = vocab_size
        self.alphabet_size = alphabet_size
        self.min_pair_count = min_pair_count

    # -- training ---------------------------------------------------------

    def fit(self, corpus, y=None):
        alphabet = int(self.alphabet_size)
        if alphabet < 1:
            raise ValueError("alphabet_size must be >= 1")
        if self.vocab_size < alphabet:
            raise ValueError(
                f"vocab_size={self.vocab_size} is smaller than alphabet_size={alphabet}"
            )
        seqs = [_as_symbol_array(s) for s in corpus]
        if not seqs:
            raise ValueError("empty corpus")
        for s in seqs:
            if s.size and (s.min() < 0 or s.max() >= alphabet):
                raise ValueError(f"symbol out of range [0, {alphabet})")

        merges: list[tuple[int, int]] = []
        decomp: list[tuple[int, ...]] = [(i,) for i in range(alphabet)]

        parts = []
        for s in seqs:
            if parts:
                parts.append(np.array([_SEP], dtype=np.int64))
            parts.append(s)
        arr = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)

        while alphabet + len(merges) < self.vocab_size:
            best = self._best_pair(arr, decomp)
            if best is None:
                warnings.warn(
                    f"corpus supports only {alphabet + len(merges)} tokens,"
                    f" requested vocab_size={self.vocab_size}",
                    VocabularyExhaustedWarning,
                    stacklevel=2,
                )
                break
            left, right = best
            new_id = alphabet + len(merges)
            merges.append((left, right))
            decomp.append(decomp[left] + decomp[right])
            arr = self._apply_merge(arr, left, right, new_id)

        self.merges_ = merges
        self.decompositions_ = decomp
        self.n_tokens_ = alphabet + len(merges)
        self.vocab_exhausted_ = self.n_tokens_ < self.vocab_size
        self._rank_ = {pair: i for i, pair in enumerate(merges)}
        return self

    def _best_pair(self, arr: np.ndarray, decomp) -> tuple[int, int] | None:
        if arr.shape[0] < 2:
            return None
        left, right = arr[:-1], arr[1:]
        valid = (left >= 0) & (right >= 0)
        if not valid.any():
            return None
        keys = (left[valid] << _KEY_SHIFT) | right[valid]
        uniq, counts = np.unique(keys, return_counts=True)
        top = counts.max()
        if top < self.min_pair_count:
            return None
        candidates = uniq[counts == top]
        pairs = [(int(k >> _KEY_SHIFT), int(k & 0xFFFFFFFF)) for k in candidates]
        return min(pairs, key=lambda pr: (decomp[pr[0]], decomp[pr[1]]))

    @staticmethod
    def _apply_merge(arr: np.ndarray, left: int, right: int, new_id: int) -> np.ndarray:
        matches = np.nonzero((arr[:-1] == left) & (arr[1:] == right))[0]
        kept: list[int] = []
        last = -2
        for pos in matches:
            # overlapping self-pairs resolve left to right
            if pos == last + 1:
                continue
            kept.append(int(pos))
            last = int(pos)
        if not kept:
            return arr
        kept_arr = np.array(kept, dtype=np.int64)
        arr = arr.copy()
        arr[kept_arr] = new_id
        return np.delete(arr, kept_arr + 1)

    # -- encoding / decoding ----------------------------------------------

    def _require_fitted(self) -> None:
        if not hasattr(self, "merges_"):
            raise NotFittedError("SubwordTokenizer is not fitted; call fit first")

    def encode(self, seq) -> np.ndarray:
        """Apply the learned merges in order wherever applicable (merge replay)."""
        self._require_fitted()
        symbols = _as_symbol_array(seq)
        if symbols.size and (symbols.min() < 0 or symbols.max() >= self.alphabet_size):
            raise ValueError(f"unknown symbol outside [0, {self.alphabet_size})")
        toks = symbols.tolist()
        rank = self._rank_
        while len(toks) > 1:
            # the lowest-rank applicable merge is always the next replay step:
            # merging never re-creates a pair of previously existing tokens
            best = None
            for i in range(len(toks) - 1):
                r = rank.get((toks[i], toks[i + 1]))
                if r is not None and (best is None or r < best):
                    best = r
            if best is None:
                break
            left, right = self.merges_[best]
            new_id = self.alphabet_size + best
            out: list[int] = []
            i = 0
            while i < len(toks):
                if i + 1 < len(toks) and toks[i] == left and toks[i + 1] == right:
                    out.append(new_id)
                    i += 2
                else:
                    out.append(toks[i])
                    i += 1
            toks = out
        return np.array(toks, dtype=np.int64)

    def decode(self, tokens) -> np.ndarray:
        """Concatenate each token's base-symbol decomposition."""
        self._require_fitted()
        ids = check_int_sequence(tokens, "tokens")
        if ids.size and (ids.min() < 0 or ids.max() >= self.n_tokens_):
            raise ValueError(f"token id out of range [0, {self.n_tokens_})")
        out: list[int] = []
        for t in ids:
            out.extend(self.decompositions_[int(t)])
        return np.array(out, dtype=np.int64)

    def transform(self, corpus) -> list[np.ndarray]:
        return [self.encode(s) for s in corpus]

    # -- persistence --------------------------------------------------------

    def save(self, path) -> None:
        self._require_fitted()
        merges = [
            {
                "left_id": left,
                "right_id": right,
                "left": list(self.decompositions_[left]),
                "right": list(self.decompositions_[right]),
            }
            for left, right in self.merges_
        ]
        obj = {
            "format": "catds-subword",
            "version": 1,
            "alphabet_size": int(self.alphabet_size),
            "vocab_size": int(self.vocab_size),
            "min_pair_count": int(self.min_pair_count),
            "vocab_exhausted": bool(self.vocab_exhausted_),
            "merges": merges,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SubwordTokenizer":
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        if not isinstance(obj, dict) or obj.get("format") != "catds-subword":
            raise ValueError(f"{path}: not a tokenizer model file")
        if obj.get("version") != 1:
            raise ValueError(f"{path}: unsupported model version {obj.get('version')}")
        model = cls(
            vocab_size=int(obj["vocab_size"]),
            alphabet_size=int(obj["alphabet_size"]),
            min_pair_count=int(obj["min_pair_count"]),
        )
        alphabet = model.alphabet_size
        decomp: list[tuple[int, ...]] = [(i,) for i in range(alphabet)]
        merges: list[tuple[int, int]] = []
        for i, m in enumerate(obj["merges"]):
            left, right = int(m["left_id"]), int(m["right_id"])
            limit = alphabet + i
            if not (0 <= left < limit and 0 <= right < limit):
                raise ValueError(f"{path}: merge {i} references undefined token")
            if decomp[left] != tuple(m["left"]) or decomp[right] != tuple(m["right"]):
                raise ValueError(f"{path}: merge {i} decomposition mismatch")
            merges.append((left, right))
            decomp.append(decomp[left] + decomp[right])
        model.merges_ = merges
        model.decompositions_ = decomp
        model.n_tokens_ = alphabet + len(merges)
        model.vocab_exhausted_ = bool(obj.get("vocab_exhausted", False))
        model._rank_ = {pair: i for i, pair in enumerate(merges)}
        return model
