"""Token frequency vectors, raw cosine similarity, and the length-scaled
CATDS score.

The raw similarity S of a donor clip is the cosine between its token
frequency vector and the aggregated target reference vector. Because S
drifts upward with a clip's token count p, a quadratic baseline
q = a p^2 + b p + c is fitted over the donor corpus and each clip is
reported as CATDS = S / q.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_int_sequence, check_vector
from .corpusio import ScoreRecord


class EmptyClipWarning(UserWarning):
    """A clip with an empty token sequence was excluded from scoring."""


def build_frequency_vector(token_seqs, vocab_size: int) -> np.ndarray:
    """Count token occurrences across one or more sequences into a V-vector."""
    if vocab_size < 1:
        raise ValueError("vocab_size must be >= 1")
    try:
        arr = np.asarray(token_seqs, dtype=np.int64)
    except (ValueError, TypeError):
        arr = None
    if arr is not None and arr.ndim == 1:
        seqs = [arr]
    elif arr is not None and arr.ndim == 2:
        seqs = list(arr)
    else:
        seqs = [check_int_sequence(s, "token sequence") for s in token_seqs]
    counts = np.zeros(vocab_size, dtype=np.int64)
    for s in seqs:
        if s.size == 0:
            continue
        if s.min() < 0 or s.max() >= vocab_size:
            raise ValueError(f"token id out of range [0, {vocab_size})")
        counts += np.bincount(s, minlength=vocab_size)
    return counts


def cosine_similarity(x, y) -> float:
    """(x . y) / (||x|| ||y||), clamped into [-1, 1] against rounding."""
    xv = check_vector(x, "x")
    yv = check_vector(y, "y")
    if xv.shape[0] != yv.shape[0]:
        raise ValueError(f"dimension mismatch: {xv.shape[0]} vs {yv.shape[0]}")
    nx = float(np.linalg.norm(xv))
    ny = float(np.linalg.norm(yv))
    if nx == 0.0 or ny == 0.0:
        raise ValueError("cosine similarity undefined for a zero vector")
    value = float(np.dot(xv, yv)) / (nx * ny)
    return min(1.0, max(-1.0, value))


class LengthScaler(BaseEstimator, RegressorMixin):
    """Quadratic baseline q(p) fitted by least squares on standardized p.

    The fit solves the 3x3 normal equations exactly on z = (p - p_mean)/p_std
    and reports coefficients back in raw-p space (a_, b_, c_). With fewer
    than 3 distinct p values the model degenerates to the constant
    fallback q = mean(S).

    Fitted attributes: a_, b_, c_ (raw-p coefficients), p_mean_, p_std_,
    coef_z_ (standardized-space coefficients), fallback_q_ (None unless
    degenerate), is_fallback_.
    """

    def __init__(self, epsilon: float = 1e-6):
        self.epsilon = epsilon

    def fit(self, p, S):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        p = check_vector(p, "p")
        S = check_vector(S, "S")
        if p.shape[0] != S.shape[0]:
            raise ValueError("p and S must have equal length")
        if p.shape[0] == 0:
            raise ValueError("cannot fit a length scaler on empty input")

        if np.unique(p).shape[0] < 3:
            self.p_mean_ = float(p.mean())
            self.p_std_ = 0.0
            self.coef_z_ = None
            self.a_ = self.b_ = 0.0
            self.c_ = float(S.mean())
            self.fallback_q_ = float(S.mean())
            self.is_fallback_ = True
            return self

        mean = float(p.mean())
        std = float(p.std())
        z = (p - mean) / std
        design = np.column_stack([np.ones_like(z), z, z * z])
        gram = design.T @ design
        rhs = design.T @ S
        c0, b1, a2 = np.linalg.solve(gram, rhs)

        self.p_mean_ = mean
        self.p_std_ = std
        self.coef_z_ = (float(a2), float(b1), float(c0))
        self.a_ = float(a2 / std**2)
        self.b_ = float(b1 / std - 2.0 * a2 * mean / std**2)
        self.c_ = float(c0 - b1 * mean / std + a2 * mean**2 / std**2)
        self.fallback_q_ = None
        self.is_fallback_ = False
        return self

    def _require_fitted(self) -> None:
        if not hasattr(self, "is_fallback_"):
            raise NotFittedError("LengthScaler is not fitted; call fit first")

    def predict(self, p) -> np.ndarray:
        self._require_fitted()
        p = check_vector(np.atleast_1d(np.asarray(p, dtype=np.float64)), "p")
        if self.is_fallback_:
            return np.full(p.shape[0], self.fallback_q_)
        a2, b1, c0 = self.coef_z_
        z = (p - self.p_mean_) / self.p_std_
        return (a2 * z + b1) * z + c0

    def predict_one(self, p) -> float:
        return float(self.predict(np.array([p], dtype=np.float64))[0])


def catds_score(S: float, model: LengthScaler, p) -> tuple[float, bool]:
    """CATDS = S / max(q(p), epsilon); the flag reports that clamping fired."""
    if not np.isfinite(S):
        raise ValueError("S must be finite")
    q = model.predict_one(p)
    clamped = q < model.epsilon
    return S / max(q, model.epsilon), clamped


@dataclass
class ScoreResult:
    records: list[ScoreRecord]
    skipped_clip_ids: list[str]
    scaler: LengthScaler


def score_corpus(target_ref, donor_tokens, epsilon: float = 1e-6) -> ScoreResult:
    """Score every donor clip against the target reference vector.

    donor_tokens is a (clip_id, token sequence) iterable as read by
    corpusio.read_token_file. Clips with empty token sequences are excluded
    from both the fit and the ranking, with a warning. The scaler is fitted
    once over this corpus, on (p, S) pairs gathered in clip-id order.
    """
    ref = np.asarray(target_ref)
    vocab_size = int(ref.shape[0])
    items = [(clip_id, check_int_sequence(seq, f"tokens of {clip_id!r}")) for clip_id, seq in donor_tokens]
    if not items:
        raise ValueError("empty donor corpus")

    raw: dict[str, tuple[int, float]] = {}
    skipped: list[str] = []
    for clip_id, seq in items:
        if seq.size == 0:
            warnings.warn(
                f"clip {clip_id!r} has no tokens; excluded from scoring",
                EmptyClipWarning,
                stacklevel=2,
            )
            skipped.append(clip_id)
            continue
        vec = build_frequency_vector(seq, vocab_size)
        raw[clip_id] = (int(seq.size), cosine_similarity(ref, vec))
    if not raw:
        raise ValueError("no clips with tokens to score")

    fit_order = sorted(raw)
    ps = np.array([raw[c][0] for c in fit_order], dtype=np.float64)
    ss = np.array([raw[c][1] for c in fit_order], dtype=np.float64)
    scaler = LengthScaler(epsilon=epsilon).fit(ps, ss)

    records = []
    for clip_id, seq in items:
        if clip_id in raw:
            p, s = raw[clip_id]
            value, clamped = catds_score(s, scaler, p)
            records.append(
                ScoreRecord(
                    clip_id=clip_id,
                    token_count=p,
                    raw_similarity=s,
                    fitted_q=scaler.predict_one(p),
                    catds=value,
                    clamped=clamped,
                )
            )
    return ScoreResult(records=records, skipped_clip_ids=skipped, scaler=scaler)
