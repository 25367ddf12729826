"""Subset selection strategies over scored donor manifests.

Four strategies produce training subsets of prescribed sizes: uniform
random sampling, language-identification rank sorting, CATDS sorting, and
unscaled (raw cosine) sorting. All orderings break ties by clip_id so that
every manifest is reproducible across runs and platforms.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpusio import ClipManifest, ScoreRecord, write_manifest

STRATEGY_RANDOM = "random"
STRATEGY_LID = "lid"
STRATEGY_CATDS = "catds"
STRATEGY_CATDS_UNSCALED = "catds_unscaled"
STRATEGY_SHARED = "shared"

DEFAULT_RANDOM_SEEDS = (1, 2, 3)


class UnscoredClipWarning(UserWarning):
    """Manifest clips without score records were left out of the ranking."""


@dataclass(frozen=True)
class LidRecord:
    clip_id: str
    rank: int
    prob: float

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"clip {self.clip_id!r}: LID rank must be >= 1")
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"clip {self.clip_id!r}: LID prob must be in [0, 1]")


_LID_HEADER = "clip_id\trank\tprob"


def read_lid_table(path) -> list[LidRecord]:
    """Read an external LID TSV (clip_id, rank, prob); a header row is optional."""
    records: list[LidRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or (lineno == 1 and line == _LID_HEADER):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}: malformed LID line {lineno}")
            try:
                records.append(LidRecord(parts[0], int(parts[1]), float(parts[2])))
            except ValueError as exc:
                raise ValueError(f"{path}: malformed LID line {lineno}: {exc}") from exc
    return records


def write_lid_table(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_LID_HEADER + "\n")
        for r in records:
            fh.write(f"{r.clip_id}\t{r.rank}\t{r.prob!r}\n")


def subset_sizes(n_total: int, delta_n: int, k_max: int) -> list[int]:
    """The subset schedule [n_total - k*delta_n for k in 0..k_max]."""
    if n_total < 0 or delta_n < 0 or k_max < 0:
        raise ValueError("n_total, delta_n and k_max must be nonnegative")
    if n_total - k_max * delta_n < 0:
        raise ValueError(
            f"schedule underflows: {n_total} - {k_max}*{delta_n} < 0"
        )
    return [n_total - k * delta_n for k in range(k_max + 1)]


def select_random(manifest: ClipManifest, size: int, seed: int) -> ClipManifest:
    """Uniform sample without replacement, returned in original manifest order."""
    if size < 0:
        raise ValueError("size must be nonnegative")
    if size > len(manifest):
        raise ValueError(f"size {size} exceeds manifest size {len(manifest)}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(manifest), size=size, replace=False))
    return ClipManifest([manifest[int(i)] for i in idx])


def select_by_lid(manifest: ClipManifest, lid_table, size: int) -> ClipManifest:
    """First `size` clips sorted by LID rank ascending, then prob descending,
    then clip_id ascending."""
    if size < 0:
        raise ValueError("size must be nonnegative")
    by_id = {r.clip_id: r for r in lid_table}
    missing = [e.clip_id for e in manifest if e.clip_id not in by_id]
    if missing:
        raise ValueError(f"missing LID score for clip {missing[0]!r}")
    if size > len(manifest):
        raise ValueError(f"size {size} exceeds manifest size {len(manifest)}")
    ordered = sorted(
        manifest,
        key=lambda e: (by_id[e.clip_id].rank, -by_id[e.clip_id].prob, e.clip_id),
    )
    return ClipManifest(ordered[:size])


def select_by_catds(manifest: ClipManifest, scores, size: int, scaled: bool = True) -> ClipManifest:
    """First `size` clips by descending score (catds when scaled, raw
    similarity when not), ties by clip_id ascending.

    Clips without a score record (for example excluded as empty at scoring
    time) are dropped from the ranking with a warning.
    """
    if size < 0:
        raise ValueError("size must be nonnegative")
    by_id: dict[str, ScoreRecord] = {r.clip_id: r for r in scores}
    scored = [e for e in manifest if e.clip_id in by_id]
    unscored = len(manifest) - len(scored)
    if unscored:
        warnings.warn(
            f"{unscored} manifest clip(s) have no score record and were skipped",
            UnscoredClipWarning,
            stacklevel=2,
        )
    if size > len(scored):
        raise ValueError(f"size {size} exceeds number of scored clips {len(scored)}")

    def key(entry):
        record = by_id[entry.clip_id]
        value = record.catds if scaled else record.raw_similarity
        return (-value, entry.clip_id)

    ordered = sorted(scored, key=key)
    return ClipManifest(ordered[:size])


@dataclass(frozen=True)
class GridConfig:
    """One dataset configuration of the selection experiment grid."""

    strategy: str
    size: int
    seed: int | None = None

    def filename(self, language: str) -> str:
        suffix = f"_seed{self.seed}" if self.seed is not None else ""
        return f"{language}_{self.strategy}_{self.size}{suffix}.jsonl"


def plan_grid(n_total: int = 20000, delta_n: int = 4000, k_max: int = 5,
              random_seeds=DEFAULT_RANDOM_SEEDS) -> list[GridConfig]:
    """Enumerate the experiment grid: the shared full and empty sets plus,
    for each intermediate size, one subset per random seed and one per
    ranked strategy. Defaults give 2 + 4*(3+3) = 26 configurations."""
    sizes = subset_sizes(n_total, delta_n, k_max)
    if len(sizes) < 2:
        raise ValueError("grid needs k_max >= 1 for a full and an empty set")
    configs = [GridConfig(STRATEGY_SHARED, sizes[0]), GridConfig(STRATEGY_SHARED, sizes[-1])]
    for size in sizes[1:-1]:
        for seed in random_seeds:
            configs.append(GridConfig(STRATEGY_RANDOM, size, seed=seed))
        configs.append(GridConfig(STRATEGY_LID, size))
        configs.append(GridConfig(STRATEGY_CATDS, size))
        configs.append(GridConfig(STRATEGY_CATDS_UNSCALED, size))
    return configs


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def materialize_grid(manifest: ClipManifest, out_dir, language: str,
                     scores=None, lid_table=None,
                     n_total: int | None = None, delta_n: int = 4000, k_max: int = 5,
                     random_seeds=DEFAULT_RANDOM_SEEDS,
                     provenance: dict | None = None) -> list[Path]:
    """Write every grid manifest plus a provenance sidecar per file."""
    if n_total is None:
        n_total = len(manifest)
    configs = plan_grid(n_total, delta_n, k_max, random_seeds)
    needs_scores = any(c.strategy in (STRATEGY_CATDS, STRATEGY_CATDS_UNSCALED) for c in configs)
    needs_lid = any(c.strategy == STRATEGY_LID for c in configs)
    if needs_scores and scores is None:
        raise ValueError("grid includes CATDS strategies but no scores were given")
    if needs_lid and lid_table is None:
        raise ValueError("grid includes LID strategy but no LID table was given")
    # reject a bad plan before any file is written so a failed call
    # never leaves a partial grid behind
    for config in configs:
        if config.strategy == STRATEGY_SHARED and config.size not in (0, len(manifest)):
            raise ValueError(
                f"shared configuration of size {config.size} must be the"
                f" full ({len(manifest)}) or empty set"
            )

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for config in configs:
        if config.strategy == STRATEGY_SHARED:
            subset = manifest if config.size else ClipManifest([])
        elif config.strategy == STRATEGY_RANDOM:
            subset = select_random(manifest, config.size, config.seed)
        elif config.strategy == STRATEGY_LID:
            subset = select_by_lid(manifest, lid_table, config.size)
        elif config.strategy == STRATEGY_CATDS:
            subset = select_by_catds(manifest, scores, config.size, scaled=True)
        else:
            subset = select_by_catds(manifest, scores, config.size, scaled=False)
        path = out_dir / config.filename(language)
        write_manifest(path, subset)
        meta = {
            "strategy": config.strategy,
            "size": config.size,
            "seed": config.seed,
            "language": language,
        }
        if provenance:
            meta.update(provenance)
        with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, sort_keys=True)
            fh.write("\n")
        written.append(path)
    return written
