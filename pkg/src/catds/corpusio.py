"""Persistent data formats and donor-clip assembly.

Everything durable that the pipeline touches goes through this module:
JSON-lines clip manifests, CATF feature matrices, token/symbol text files,
score tables, and frequency-vector files.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_matrix

_CATF_MAGIC = b"CATF"
_CATF_VERSION = 1
_CATF_HEADER = struct.Struct("<4sHIQ")

MANIFEST_FIELDS = ("clip_id", "feature_path", "duration_s", "language", "source_sample_ids")


class OversizedSampleWarning(UserWarning):
    """A sample longer than the clip cap was kept as a clip of its own."""


@dataclass(frozen=True)
class ClipEntry:
    clip_id: str
    feature_path: str
    duration_s: float
    language: str
    source_sample_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.clip_id:
            raise ValueError("clip_id must be a nonempty string")
        if not (self.duration_s >= 0 and math.isfinite(self.duration_s)):
            raise ValueError(f"clip {self.clip_id!r}: duration_s must be finite and >= 0")
        object.__setattr__(self, "source_sample_ids", tuple(self.source_sample_ids))

    def to_dict(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "feature_path": self.feature_path,
            "duration_s": self.duration_s,
            "language": self.language,
            "source_sample_ids": list(self.source_sample_ids),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ClipEntry":
        missing = [k for k in MANIFEST_FIELDS if k not in obj]
        if missing:
            raise ValueError(f"missing manifest fields: {', '.join(missing)}")
        return cls(
            clip_id=str(obj["clip_id"]),
            feature_path=str(obj["feature_path"]),
            duration_s=float(obj["duration_s"]),
            language=str(obj["language"]),
            source_sample_ids=tuple(str(s) for s in obj["source_sample_ids"]),
        )


@dataclass
class ClipManifest:
    """Ordered clip records; order is meaningful and preserved by all IO."""

    entries: list[ClipEntry] = field(default_factory=list)

    def __post_init__(self):
        self.entries = list(self.entries)
        seen = set()
        for e in self.entries:
            if e.clip_id in seen:
                raise ValueError(f"duplicate clip_id {e.clip_id!r}")
            seen.add(e.clip_id)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> ClipEntry:
        return self.entries[i]

    def clip_ids(self) -> list[str]:
        return [e.clip_id for e in self.entries]

    def by_id(self) -> dict[str, ClipEntry]:
        return {e.clip_id: e for e in self.entries}

    def total_duration(self) -> float:
        return math.fsum(e.duration_s for e in self.entries)


def read_manifest(path) -> ClipManifest:
    """Read a JSON-lines manifest; errors name the offending line."""
    entries: list[ClipEntry] = []
    seen: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("expected a JSON object")
                entry = ClipEntry.from_dict(obj)
            except (json.JSONDecodeError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}: malformed manifest line {lineno}: {exc}") from exc
            if entry.clip_id in seen:
                raise ValueError(
                    f"{path}: duplicate clip_id {entry.clip_id!r} on line {lineno}"
                    f" (first seen on line {seen[entry.clip_id]})"
                )
            seen[entry.clip_id] = lineno
            entries.append(entry)
    return ClipManifest(entries)


def write_manifest(path, manifest: ClipManifest) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in manifest:
            fh.write(json.dumps(e.to_dict(), ensure_ascii=False))
            fh.write("\n")


def write_feature_file(path, matrix) -> None:
    """Write a frame matrix as CATF: magic, version u16, dim u32, n_frames u64, f32 payload."""
    arr = check_matrix(matrix, "matrix", dtype=np.float32)
    n_frames, dim = arr.shape
    if dim < 1:
        raise ValueError("feature dim must be >= 1")
    with open(path, "wb") as fh:
        fh.write(_CATF_HEADER.pack(_CATF_MAGIC, _CATF_VERSION, dim, n_frames))
        fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def read_feature_file(path) -> np.ndarray:
    """Read a CATF file back into an n_frames x dim float32 matrix."""
    with open(path, "rb") as fh:
        header = fh.read(_CATF_HEADER.size)
        if len(header) < _CATF_HEADER.size:
            raise ValueError(f"{path}: truncated CATF header")
        magic, version, dim, n_frames = _CATF_HEADER.unpack(header)
        if magic != _CATF_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {_CATF_MAGIC!r}")
        if version != _CATF_VERSION:
            raise ValueError(f"{path}: unsupported CATF version {version}")
        if dim < 1:
            raise ValueError(f"{path}: invalid dim {dim}")
        payload = fh.read()
    expected = dim * n_frames * 4
    if len(payload) != expected:
        raise ValueError(
            f"{path}: payload has {len(payload)} bytes, header implies {expected}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(n_frames, dim)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{path}: non-finite feature values")
    return np.array(arr, dtype=np.float32)


def write_token_file(path, items) -> None:
    """Write token/symbol sequences as text lines "clip_id\\tt1 t2 t3 ..."."""
    with open(path, "w", encoding="utf-8") as fh:
        for clip_id, ids in items:
            if "\t" in clip_id or "\n" in clip_id:
                raise ValueError(f"clip_id {clip_id!r} contains tab or newline")
            fh.write(clip_id)
            fh.write("\t")
            fh.write(" ".join(str(int(t)) for t in ids))
            fh.write("\n")


def read_token_file(path) -> list[tuple[str, list[int]]]:
    """Read a token/symbol text file, preserving clip order."""
    out: list[tuple[str, list[int]]] = []
    seen: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise ValueError(f"{path}: malformed token line {lineno}")
            clip_id, rest = parts
            if clip_id in seen:
                raise ValueError(
                    f"{path}: duplicate clip_id {clip_id!r} on line {lineno}"
                    f" (first seen on line {seen[clip_id]})"
                )
            seen[clip_id] = lineno
            try:
                ids = [int(tok) for tok in rest.split()]
            except ValueError as exc:
                raise ValueError(f"{path}: non-integer token on line {lineno}") from exc
            if any(t < 0 for t in ids):
                raise ValueError(f"{path}: negative token id on line {lineno}")
            out.append((clip_id, ids))
    return out


@dataclass(frozen=True)
class ScoreRecord:
    clip_id: str
    token_count: int
    raw_similarity: float
    fitted_q: float
    catds: float
    clamped: bool


_SCORE_HEADER = "clip_id\ttoken_count\traw_similarity\tfitted_q\tcatds\tclamped"


def write_score_table(path, records) -> None:
    """Write score records as TSV; floats use shortest round-trip rendering."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_SCORE_HEADER + "\n")
        for r in records:
            fh.write(
                f"{r.clip_id}\t{r.token_count}\t{r.raw_similarity!r}\t"
                f"{r.fitted_q!r}\t{r.catds!r}\t{int(r.clamped)}\n"
            )


def read_score_table(path) -> list[ScoreRecord]:
    records: list[ScoreRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != _SCORE_HEADER:
            raise ValueError(f"{path}: unexpected score table header")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                raise ValueError(f"{path}: malformed score line {lineno}")
            try:
                records.append(
                    ScoreRecord(
                        clip_id=parts[0],
                        token_count=int(parts[1]),
                        raw_similarity=float(parts[2]),
                        fitted_q=float(parts[3]),
                        catds=float(parts[4]),
                        clamped=bool(int(parts[5])),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}: malformed score line {lineno}: {exc}") from exc
    return records


def write_frequency_vector(path, counts) -> None:
    """Persist a token frequency vector as sparse JSON keyed by token id."""
    arr = np.asarray(counts)
    if arr.ndim != 1:
        raise ValueError("frequency vector must be 1-D")
    if np.any(arr < 0):
        raise ValueError("frequency vector must be nonnegative")
    nonzero = {str(int(i)): int(arr[i]) for i in np.nonzero(arr)[0]}
    obj = {"format": "catds-freq-vector", "vocab_size": int(arr.shape[0]), "counts": nonzero}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True)
        fh.write("\n")


def read_frequency_vector(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict) or obj.get("format") != "catds-freq-vector":
        raise ValueError(f"{path}: not a frequency vector file")
    vocab_size = int(obj["vocab_size"])
    if vocab_size < 1:
        raise ValueError(f"{path}: invalid vocab_size {vocab_size}")
    vec = np.zeros(vocab_size, dtype=np.int64)
    for key, value in obj["counts"].items():
        idx = int(key)
        if not 0 <= idx < vocab_size:
            raise ValueError(f"{path}: token id {idx} out of range for V={vocab_size}")
        if int(value) < 0:
            raise ValueError(f"{path}: negative count for token {idx}")
        vec[idx] = int(value)
    return vec


def assemble_clips(samples: ClipManifest, max_duration_s: float, clip_prefix: str = "clip_") -> ClipManifest:
    """Greedy first-fit concatenation of samples into clips of bounded duration.

    Samples are taken in manifest order; a sample joins the current clip while
    the running duration stays within the cap, otherwise it starts a new clip.
    A single sample longer than the cap becomes a clip of its own and raises
    OversizedSampleWarning rather than being dropped.
    """
    if not max_duration_s > 0:
        raise ValueError("max_duration_s must be positive")
    groups: list[list[ClipEntry]] = []
    current: list[ClipEntry] = []
    current_total = 0.0
    for sample in samples:
        if sample.duration_s > max_duration_s:
            warnings.warn(
                f"sample {sample.clip_id!r} ({sample.duration_s:.3f}s) exceeds the"
                f" {max_duration_s:.3f}s cap; kept as its own clip",
                OversizedSampleWarning,
                stacklevel=2,
            )
            if current:
                groups.append(current)
                current, current_total = [], 0.0
            groups.append([sample])
            continue
        if current and current_total + sample.duration_s > max_duration_s:
            groups.append(current)
            current, current_total = [], 0.0
        current.append(sample)
        current_total += sample.duration_s
    if current:
        groups.append(current)

    entries = []
    for i, group in enumerate(groups):
        entries.append(
            ClipEntry(
                clip_id=f"{clip_prefix}{i:06d}",
                feature_path="",
                duration_s=math.fsum(s.duration_s for s in group),
                language=group[0].language,
                source_sample_ids=tuple(s.clip_id for s in group),
            )
        )
    return ClipManifest(entries)
