"""Command-line entry point orchestrating the pipeline.

Subcommands: train-quantizer, tokenize, train-tokenizer, encode, score,
select, report, synth. Every subcommand accepts --config pointing at a JSON
file whose keys mirror the long option names (underscored); explicit flags
take precedence over config values, which take precedence over defaults.

Exit codes: 0 success, 1 I/O or validation failure, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import corpusio, quantizer, scorer, selector, statsreport, subword, symbolizer, synthcorpus

_SUBPARSERS: dict[str, argparse.ArgumentParser] = {}


class _UsageError(Exception):
    def __init__(self, command: str, message: str):
        super().__init__(message)
        self.command = command


def _resolve(args: argparse.Namespace, defaults: dict, required: tuple[str, ...] = ()) -> SimpleNamespace:
    """Merge flag values, --config JSON values, and defaults (in that order)."""
    config = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ValueError(f"{args.config}: config must be a JSON object")
        unknown = set(config) - set(defaults)
        if unknown:
            raise ValueError(f"{args.config}: unknown config keys: {', '.join(sorted(unknown))}")
    merged = {}
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is None:
            value = config.get(key, default)
        merged[key] = value
    for key in required:
        if merged[key] is None:
            raise _UsageError(args.command, f"missing --{key.replace('_', '-')} (or config key {key!r})")
    return SimpleNamespace(**merged)


def _parallel_map(fn, items, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _feature_path(entry: corpusio.ClipEntry, manifest_path) -> str:
    if not entry.feature_path:
        raise ValueError(f"clip {entry.clip_id!r} has no feature_path")
    if os.path.isabs(entry.feature_path):
        return entry.feature_path
    return str(Path(manifest_path).parent / entry.feature_path)


# -- subcommands ------------------------------------------------------------

def _cmd_train_quantizer(args) -> int:
    opts = _resolve(args, {
        "manifest": None, "out": None, "k": 500, "seed": 0,
        "max_iters": 100, "rel_tol": 1e-6, "frame_cap": None, "threads": 1,
    }, required=("manifest", "out"))
    manifest = corpusio.read_manifest(opts.manifest)
    if len(manifest) == 0:
        raise ValueError(f"{opts.manifest}: empty manifest")
    matrices = _parallel_map(
        lambda e: corpusio.read_feature_file(_feature_path(e, opts.manifest)),
        manifest, int(opts.threads),
    )
    frames = np.vstack(matrices)
    model = quantizer.FrameQuantizer(
        n_clusters=int(opts.k), seed=int(opts.seed), max_iters=int(opts.max_iters),
        rel_tol=float(opts.rel_tol),
        frame_cap=None if opts.frame_cap is None else int(opts.frame_cap),
    ).fit(frames)
    quantizer.save_codebook(opts.out, model)
    print(f"trained codebook: k={model.n_clusters} dim={model.dim_} "
          f"inertia={model.inertia_:.6g} iters={model.n_iter_}")
    return 0


def _cmd_tokenize(args) -> int:
    opts = _resolve(args, {
        "manifest": None, "codebook": None, "out": None, "threads": 1,
    }, required=("manifest", "codebook", "out"))
    manifest = corpusio.read_manifest(opts.manifest)
    model = quantizer.load_codebook(opts.codebook)

    def one(entry):
        frames = corpusio.read_feature_file(_feature_path(entry, opts.manifest))
        return entry.clip_id, symbolizer.collapse_runs(model.predict(frames))

    items = _parallel_map(one, manifest, int(opts.threads))
    corpusio.write_token_file(opts.out, items)
    print(f"tokenized {len(items)} clips -> {opts.out}")
    return 0


def _cmd_train_tokenizer(args) -> int:
    opts = _resolve(args, {
        "symbols": None, "out": None, "vocab_size": 10000,
        "alphabet_size": 500, "min_pair_count": 2,
    }, required=("symbols", "out"))
    corpus = [seq for _, seq in corpusio.read_token_file(opts.symbols)]
    model = subword.SubwordTokenizer(
        vocab_size=int(opts.vocab_size), alphabet_size=int(opts.alphabet_size),
        min_pair_count=int(opts.min_pair_count),
    ).fit(corpus)
    model.save(opts.out)
    print(f"trained tokenizer: {model.n_tokens_} tokens "
          f"({len(model.merges_)} merges) -> {opts.out}")
    return 0


def _cmd_encode(args) -> int:
    opts = _resolve(args, {
        "symbols": None, "model": None, "out": None, "save_ref": None, "threads": 1,
    }, required=("symbols", "model", "out"))
    model = subword.SubwordTokenizer.load(opts.model)
    items = corpusio.read_token_file(opts.symbols)
    encoded = _parallel_map(lambda item: (item[0], model.encode(item[1])), items, int(opts.threads))
    corpusio.write_token_file(opts.out, encoded)
    if opts.save_ref:
        ref = scorer.build_frequency_vector([seq for _, seq in encoded], model.n_tokens_)
        corpusio.write_frequency_vector(opts.save_ref, ref)
    print(f"encoded {len(encoded)} clips -> {opts.out}")
    return 0


def _cmd_score(args) -> int:
    opts = _resolve(args, {
        "target_ref": None, "tokens": None, "out": None, "epsilon": 1e-6, "threads": 1,
    }, required=("target_ref", "tokens", "out"))
    ref = corpusio.read_frequency_vector(opts.target_ref)
    donor = corpusio.read_token_file(opts.tokens)
    result = scorer.score_corpus(ref, donor, epsilon=float(opts.epsilon))
    corpusio.write_score_table(opts.out, result.records)
    for clip_id in result.skipped_clip_ids:
        print(f"warning: clip {clip_id!r} had no tokens and was not scored", file=sys.stderr)
    print(f"scored {len(result.records)} clips -> {opts.out}")
    return 0


_STRATEGY_FLAGS = {
    "random": selector.STRATEGY_RANDOM,
    "lid": selector.STRATEGY_LID,
    "catds": selector.STRATEGY_CATDS,
    "catds-unscaled": selector.STRATEGY_CATDS_UNSCALED,
}


def _cmd_select(args) -> int:
    opts = _resolve(args, {
        "manifest": None, "strategy": None, "out": None, "out_dir": None,
        "size": None, "seed": None, "scores": None, "lid": None,
        "language": None, "n_total": None, "delta_n": 4000, "k_max": 5,
        "random_seeds": "1,2,3", "threads": 1,
    }, required=("manifest", "strategy"))
    manifest = corpusio.read_manifest(opts.manifest)

    provenance = {}
    scores = lid_table = None
    if opts.scores:
        scores = corpusio.read_score_table(opts.scores)
        provenance["score_table_sha256"] = selector.file_sha256(opts.scores)
    if opts.lid:
        lid_table = selector.read_lid_table(opts.lid)
        provenance["lid_table_sha256"] = selector.file_sha256(opts.lid)

    if opts.strategy == "grid":
        for key in ("out_dir", "language", "scores", "lid"):
            if getattr(opts, key) is None:
                raise _UsageError(args.command, f"--strategy grid requires --{key.replace('_', '-')}")
        seeds = tuple(int(s) for s in str(opts.random_seeds).split(",") if s != "")
        written = selector.materialize_grid(
            manifest, opts.out_dir, opts.language, scores=scores, lid_table=lid_table,
            n_total=None if opts.n_total is None else int(opts.n_total),
            delta_n=int(opts.delta_n), k_max=int(opts.k_max),
            random_seeds=seeds, provenance=provenance,
        )
        print(f"wrote {len(written)} subset manifests -> {opts.out_dir}")
        return 0

    if opts.strategy not in _STRATEGY_FLAGS:
        raise _UsageError(args.command, f"unknown strategy {opts.strategy!r}")
    strategy = _STRATEGY_FLAGS[opts.strategy]
    if opts.size is None or opts.out is None:
        raise _UsageError(args.command, "single-subset selection requires --size and --out")
    size = int(opts.size)

    if strategy == selector.STRATEGY_RANDOM:
        if opts.seed is None:
            raise _UsageError(args.command, "--strategy random requires --seed")
        subset = selector.select_random(manifest, size, int(opts.seed))
    elif strategy == selector.STRATEGY_LID:
        if lid_table is None:
            raise _UsageError(args.command, "--strategy lid requires --lid")
        subset = selector.select_by_lid(manifest, lid_table, size)
    else:
        if scores is None:
            raise _UsageError(args.command, f"--strategy {opts.strategy} requires --scores")
        subset = selector.select_by_catds(
            manifest, scores, size, scaled=strategy == selector.STRATEGY_CATDS
        )

    corpusio.write_manifest(opts.out, subset)
    meta = {"strategy": strategy, "size": size,
            "seed": None if opts.seed is None else int(opts.seed), **provenance}
    with open(str(opts.out) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True)
        fh.write("\n")
    print(f"selected {len(subset)} clips -> {opts.out}")
    return 0


def _cmd_report(args) -> int:
    opts = _resolve(args, {
        "results": None, "out": None, "scores": None, "scatter_prefix": None,
        "baseline": "random", "threads": 1,
    })
    if opts.results is None and opts.scores is None:
        raise _UsageError(args.command, "need --results and/or --scores")
    if opts.results is not None:
        rows = statsreport.read_results_table(opts.results)
        text = statsreport.build_report(rows, baseline=opts.baseline)
        if opts.out:
            with open(opts.out, "w", encoding="utf-8") as fh:
                fh.write(text)
            print(f"wrote report -> {opts.out}")
        else:
            sys.stdout.write(text)
    if opts.scores is not None:
        if opts.scatter_prefix is None:
            raise _UsageError(args.command, "--scores requires --scatter-prefix")
        records = corpusio.read_score_table(opts.scores)
        for scaled, tag in ((False, "raw"), (True, "catds")):
            path = f"{opts.scatter_prefix}_{tag}.tsv"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(statsreport.export_scatter(records, scaled=scaled))
            print(f"wrote scatter -> {path}")
    return 0


def _cmd_synth(args) -> int:
    opts = _resolve(args, {
        "spec": None, "out": None, "n_clips": None, "prefix": "clip_",
        "manifest_out": None, "language": "synth",
        "distractor_spec": None, "n_target": None, "n_distractor": None, "labels_out": None,
        "emit_features": None, "feature_dim": 8, "noise_std": 0.05,
        "centroid_seed": 0, "max_run": 2, "threads": 1,
    }, required=("spec", "out"))
    spec = synthcorpus.LanguageSpec.load(opts.spec)

    if opts.distractor_spec is not None:
        if opts.n_target is None or opts.n_distractor is None:
            raise _UsageError(args.command, "mixture mode requires --n-target and --n-distractor")
        distractor = synthcorpus.LanguageSpec.load(opts.distractor_spec)
        labeled = synthcorpus.make_mixture(spec, distractor, int(opts.n_target), int(opts.n_distractor))
        corpus = [seq for seq, _ in labeled]
        if opts.labels_out:
            with open(opts.labels_out, "w", encoding="utf-8") as fh:
                fh.write("clip_id\tlabel\n")
                for seq, label in labeled:
                    fh.write(f"{seq.clip_id}\t{label}\n")
    else:
        if opts.n_clips is None:
            raise _UsageError(args.command, "missing --n-clips")
        corpus = synthcorpus.generate_corpus(spec, int(opts.n_clips), id_prefix=opts.prefix)

    corpusio.write_token_file(opts.out, [(seq.clip_id, seq.symbols) for seq in corpus])

    feature_dir = None
    if opts.emit_features:
        feature_dir = Path(opts.emit_features)
        feature_dir.mkdir(parents=True, exist_ok=True)
        centroids = synthcorpus.make_centroids(
            spec.alphabet_size, int(opts.feature_dim), int(opts.centroid_seed)
        )
        for i, seq in enumerate(corpus):
            frames = synthcorpus.emit_features(
                seq, centroids, float(opts.noise_std), seed=spec.seed + 10_000_019 + i,
                max_run=int(opts.max_run),
            )
            corpusio.write_feature_file(feature_dir / f"{seq.clip_id}.catf", frames)

    if opts.manifest_out:
        manifest_dir = Path(opts.manifest_out).parent
        entries = []
        for seq in corpus:
            path = ""
            if feature_dir is not None:
                path = os.path.relpath(feature_dir / f"{seq.clip_id}.catf", manifest_dir)
            entries.append(corpusio.ClipEntry(
                clip_id=seq.clip_id, feature_path=path,
                duration_s=round(seq.symbols.size * 0.02, 6),
                language=opts.language, source_sample_ids=(),
            ))
        corpusio.write_manifest(opts.manifest_out, corpusio.ClipManifest(entries))

    print(f"generated {len(corpus)} clips -> {opts.out}")
    return 0


# -- parser ------------------------------------------------------------------

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file with defaults for this subcommand")
    sub.add_argument("--threads", type=int, default=None,
                     help="parallelism bound; results never depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catds",
        description="Token-distribution similarity scoring and subset selection for donor speech corpora.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("train-quantizer", help="train a k-means codebook on CATF features")
    sub.add_argument("--manifest")
    sub.add_argument("--out")
    sub.add_argument("--k", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--max-iters", type=int, dest="max_iters")
    sub.add_argument("--rel-tol", type=float, dest="rel_tol")
    sub.add_argument("--frame-cap", type=int, dest="frame_cap")
    _add_common(sub)
    sub.set_defaults(func=_cmd_train_quantizer)
    _SUBPARSERS["train-quantizer"] = sub

    sub = commands.add_parser("tokenize", help="assign cluster ids and collapse runs into symbol files")
    sub.add_argument("--manifest")
    sub.add_argument("--codebook")
    sub.add_argument("--out")
    _add_common(sub)
    sub.set_defaults(func=_cmd_tokenize)
    _SUBPARSERS["tokenize"] = sub

    sub = commands.add_parser("train-tokenizer", help="train the subword tokenizer on a symbol file")
    sub.add_argument("--symbols")
    sub.add_argument("--out")
    sub.add_argument("--vocab-size", type=int, dest="vocab_size")
    sub.add_argument("--alphabet-size", type=int, dest="alphabet_size")
    sub.add_argument("--min-pair-count", type=int, dest="min_pair_count")
    _add_common(sub)
    sub.set_defaults(func=_cmd_train_tokenizer)
    _SUBPARSERS["train-tokenizer"] = sub

    sub = commands.add_parser("encode", help="encode symbol files into acoustic tokens")
    sub.add_argument("--symbols")
    sub.add_argument("--model")
    sub.add_argument("--out")
    sub.add_argument("--save-ref", dest="save_ref",
                     help="also write the corpus frequency vector (target reference)")
    _add_common(sub)
    sub.set_defaults(func=_cmd_encode)
    _SUBPARSERS["encode"] = sub

    sub = commands.add_parser("score", help="score donor clips against a target reference vector")
    sub.add_argument("--target-ref", dest="target_ref")
    sub.add_argument("--tokens")
    sub.add_argument("--out")
    sub.add_argument("--epsilon", type=float)
    _add_common(sub)
    sub.set_defaults(func=_cmd_score)
    _SUBPARSERS["score"] = sub

    sub = commands.add_parser("select", help="emit subset manifests under a selection strategy")
    sub.add_argument("--manifest")
    sub.add_argument("--strategy", choices=[*_STRATEGY_FLAGS, "grid"])
    sub.add_argument("--size", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--scores")
    sub.add_argument("--lid")
    sub.add_argument("--out")
    sub.add_argument("--out-dir", dest="out_dir")
    sub.add_argument("--language")
    sub.add_argument("--n-total", type=int, dest="n_total")
    sub.add_argument("--delta-n", type=int, dest="delta_n")
    sub.add_argument("--k-max", type=int, dest="k_max")
    sub.add_argument("--random-seeds", dest="random_seeds")
    _add_common(sub)
    sub.set_defaults(func=_cmd_select)
    _SUBPARSERS["select"] = sub

    sub = commands.add_parser("report", help="summaries, significance tests, and scatter exports")
    sub.add_argument("--results")
    sub.add_argument("--out")
    sub.add_argument("--baseline")
    sub.add_argument("--scores")
    sub.add_argument("--scatter-prefix", dest="scatter_prefix")
    _add_common(sub)
    sub.set_defaults(func=_cmd_report)
    _SUBPARSERS["report"] = sub

    sub = commands.add_parser("synth", help="generate synthetic symbol corpora (and optional features)")
    sub.add_argument("--spec")
    sub.add_argument("--out")
    sub.add_argument("--n-clips", type=int, dest="n_clips")
    sub.add_argument("--prefix")
    sub.add_argument("--manifest-out", dest="manifest_out")
    sub.add_argument("--language")
    sub.add_argument("--distractor-spec", dest="distractor_spec")
    sub.add_argument("--n-target", type=int, dest="n_target")
    sub.add_argument("--n-distractor", type=int, dest="n_distractor")
    sub.add_argument("--labels-out", dest="labels_out")
    sub.add_argument("--emit-features", dest="emit_features")
    sub.add_argument("--feature-dim", type=int, dest="feature_dim")
    sub.add_argument("--noise-std", type=float, dest="noise_std")
    sub.add_argument("--centroid-seed", type=int, dest="centroid_seed")
    sub.add_argument("--max-run", type=int, dest="max_run")
    _add_common(sub)
    sub.set_defaults(func=_cmd_synth)
    _SUBPARSERS["synth"] = sub

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        sub = _SUBPARSERS.get(exc.command)
        if sub is not None:
            sub.print_usage(sys.stderr)
        print(f"{parser.prog} {exc.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
