"""Command line: manifest of audio files -> directory of CATF files.

Reads a clip manifest whose feature_path column points at source WAV
files, writes one CATF file per clip, and emits an updated manifest
whose feature_path points at the features instead.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from catds import ClipManifest, read_manifest, write_manifest

from .extract import ExtractConfig, Extractor


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catds-extract",
        description="Extract encoder features for every clip in a manifest.")
    parser.add_argument("--manifest", required=True,
                        help="input manifest; feature_path holds the audio path")
    parser.add_argument("--out-dir", required=True,
                        help="directory for the CATF files")
    parser.add_argument("--manifest-out", required=True,
                        help="where to write the updated manifest")
    parser.add_argument("--model", required=True,
                        help="encoder checkpoint directory or identifier")
    parser.add_argument("--layer", type=int, default=12)
    parser.add_argument("--dim", type=int, default=1024)
    parser.add_argument("--sample-rate", type=int, default=16000)
    parser.add_argument("--batch-size", type=int, default=8,
                        help="clips decoded and held in memory at once")
    return parser


def run(args) -> int:
    manifest = read_manifest(args.manifest)
    manifest_dir = Path(args.manifest).resolve().parent
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_out = Path(args.manifest_out)
    manifest_out.parent.mkdir(parents=True, exist_ok=True)

    config = ExtractConfig(model=args.model, layer=args.layer,
                           expected_dim=args.dim, sample_rate=args.sample_rate,
                           batch_size=args.batch_size)
    extractor = Extractor(config)

    updated = []
    entries = manifest.entries
    for start in range(0, len(entries), config.batch_size):
        chunk = entries[start:start + config.batch_size]
        for entry in chunk:
            audio = Path(entry.feature_path)
            if not audio.is_absolute():
                audio = manifest_dir / audio
            out_path = out_dir / f"{entry.clip_id}.catf"
            extractor.extract_file(audio, out_path)
            rel = os.path.relpath(out_path.resolve(),
                                  start=manifest_out.resolve().parent)
            updated.append(dataclasses.replace(entry, feature_path=rel))

    write_manifest(manifest_out, ClipManifest(updated))
    print(f"extracted {len(updated)} clips -> {out_dir}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
