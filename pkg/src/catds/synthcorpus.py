"""Synthetic symbol corpora from parameterized Markov sources.

These generators stand in for real speech so the pipeline and the CATDS
ranking behavior are testable end to end: clips enter at the symbol stage
(bypassing k-means) or, via emit_features, at the feature stage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .symbolizer import SymbolSeq

_ROW_SUM_TOL = 1e-9


@dataclass
class LanguageSpec:
    """A Markov symbol source: transition matrix, initial distribution,
    uniform length bounds, and a base seed (clip i uses seed + i)."""

    alphabet_size: int
    transition: np.ndarray
    initial: np.ndarray
    length_min: int
    length_max: int
    seed: int

    def __post_init__(self):
        m = int(self.alphabet_size)
        if m < 1:
            raise ValueError("alphabet_size must be >= 1")
        self.transition = np.asarray(self.transition, dtype=np.float64)
        self.initial = np.asarray(self.initial, dtype=np.float64)
        if self.transition.shape != (m, m):
            raise ValueError(f"transition must be {m}x{m}, got {self.transition.shape}")
        if self.initial.shape != (m,):
            raise ValueError(f"initial must have length {m}")
        if np.any(self.transition < 0) or np.any(self.initial < 0):
            raise ValueError("probabilities must be nonnegative")
        row_sums = self.transition.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > _ROW_SUM_TOL):
            raise ValueError("transition rows must sum to 1")
        if abs(self.initial.sum() - 1.0) > _ROW_SUM_TOL:
            raise ValueError("initial distribution must sum to 1")
        if not 1 <= self.length_min <= self.length_max:
            raise ValueError("need 1 <= length_min <= length_max")

    def to_dict(self) -> dict:
        return {
            "alphabet_size": int(self.alphabet_size),
            "transition": self.transition.tolist(),
            "initial": self.initial.tolist(),
            "length_min": int(self.length_min),
            "length_max": int(self.length_max),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "LanguageSpec":
        return cls(
            alphabet_size=int(obj["alphabet_size"]),
            transition=obj["transition"],
            initial=obj["initial"],
            length_min=int(obj["length_min"]),
            length_max=int(obj["length_max"]),
            seed=int(obj["seed"]),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "LanguageSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def uniform_spec(alphabet_size: int, length_min: int, length_max: int, seed: int) -> LanguageSpec:
    """Convenience: uniform initial and transition distributions."""
    m = alphabet_size
    return LanguageSpec(
        alphabet_size=m,
        transition=np.full((m, m), 1.0 / m),
        initial=np.full(m, 1.0 / m),
        length_min=length_min,
        length_max=length_max,
        seed=seed,
    )


def _sample_chain(spec: LanguageSpec, rng: np.random.Generator) -> np.ndarray:
    length = int(rng.integers(spec.length_min, spec.length_max, endpoint=True))
    cumulative = np.cumsum(spec.transition, axis=1)
    out = np.empty(length, dtype=np.int64)
    u = rng.random(length)
    state = int(np.searchsorted(np.cumsum(spec.initial), u[0], side="right"))
    state = min(state, spec.alphabet_size - 1)
    out[0] = state
    for i in range(1, length):
        state = int(np.searchsorted(cumulative[state], u[i], side="right"))
        state = min(state, spec.alphabet_size - 1)
        out[i] = state
    return out


def generate_corpus(spec: LanguageSpec, n_clips: int, id_prefix: str = "clip_") -> list[SymbolSeq]:
    """n_clips Markov sequences; clip i is drawn with seed spec.seed + i, so
    the corpus is deterministic and clips are independent of each other."""
    if n_clips < 0:
        raise ValueError("n_clips must be nonnegative")
    corpus = []
    for i in range(n_clips):
        rng = np.random.default_rng(spec.seed + i)
        corpus.append(SymbolSeq(clip_id=f"{id_prefix}{i:06d}", symbols=_sample_chain(spec, rng)))
    return corpus


LABEL_TARGET = "target"
LABEL_DISTRACTOR = "distractor"


def make_mixture(target_spec: LanguageSpec, distractor_spec: LanguageSpec,
                 n_target_like: int, n_distractor: int) -> list[tuple[SymbolSeq, str]]:
    """Labeled evaluation corpus: target-like clips followed by distractors."""
    if target_spec.alphabet_size != distractor_spec.alphabet_size:
        raise ValueError(
            f"alphabet mismatch: {target_spec.alphabet_size} vs {distractor_spec.alphabet_size}"
        )
    labeled = [(seq, LABEL_TARGET) for seq in generate_corpus(target_spec, n_target_like, "t")]
    labeled += [(seq, LABEL_DISTRACTOR) for seq in generate_corpus(distractor_spec, n_distractor, "d")]
    return labeled


def precision_at_k(ranked_labels, k: int, positive: str = LABEL_TARGET) -> float:
    """Fraction of the first k ranked labels equal to `positive`."""
    if k < 1 or k > len(ranked_labels):
        raise ValueError(f"k must be in [1, {len(ranked_labels)}]")
    return sum(1 for lbl in ranked_labels[:k] if lbl == positive) / k


def make_centroids(alphabet_size: int, dim: int, seed: int, spread: float = 10.0) -> np.ndarray:
    """Well-separated synthetic cluster centers for feature emission."""
    rng = np.random.default_rng(seed)
    return rng.normal(scale=spread, size=(alphabet_size, dim))


def emit_features(seq: SymbolSeq, centroids: np.ndarray, noise_std: float,
                  seed: int, max_run: int = 2) -> np.ndarray:
    """Expand a symbol sequence into noisy frames around per-symbol centroids.

    Each symbol emits 1..max_run consecutive frames so that downstream run
    collapse is exercised; frames are centroid + Gaussian noise.
    """
    centroids = np.asarray(centroids, dtype=np.float64)
    if centroids.ndim != 2:
        raise ValueError("centroids must be 2-D")
    if seq.symbols.size and seq.symbols.max() >= centroids.shape[0]:
        raise ValueError("symbol out of range for the given centroids")
    rng = np.random.default_rng(seed)
    if seq.symbols.size == 0:
        return np.empty((0, centroids.shape[1]), dtype=np.float32)
    runs = rng.integers(1, max_run, size=seq.symbols.size, endpoint=True)
    expanded = np.repeat(seq.symbols, runs)
    frames = centroids[expanded] + rng.normal(scale=noise_std, size=(expanded.size, centroids.shape[1]))
    return frames.astype(np.float32)
