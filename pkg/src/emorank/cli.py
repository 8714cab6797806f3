"""Command line interface.

Subcommands cover the full pipeline: synthesize a demo corpus, index a
corpus tree, extract utterance features, train and apply intensity
rankers, and evaluate converted speech.  Exit codes: 0 success, 1
validation error (bad flags, malformed or inconsistent inputs), 2 I/O
error (unreadable or unwritable files).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import Config, load_config
from .conv_metrics import contour_report, write_contour_csv
from .dsp import load_wav
from .emo_eval import clustering_ratio, read_embeddings_csv
from .errors import EmorankError, EmptyInputError, InvalidParamsError, MissingFileError, ParseError
from .features import (
    N_FEATURES,
    extract_feature_vector,
    feature_index_map,
    read_features_csv,
    write_features_csv,
)
from .manifest import EMOTIONS, parse_manifest, scan_tree, write_manifest
from .ranker import build_pairs, load_model, save_model, score, train_ranker
from .synthcorpus import DEFAULT_EMOTION, DEFAULT_PAIRS, DEFAULT_SEED, generate_mini_corpus

PAIRS_TSV_COLUMNS = ("converted_wav", "reference_wav")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits 1 on usage errors, matching validation."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _resolve_out(config: Config, out) -> Path:
    path = Path(out)
    return path if path.is_absolute() else Path(config.out_dir) / path


def _write_json(payload: dict, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _pool_map(fn, items, jobs: int) -> list:
    if jobs == 0:
        jobs = os.cpu_count() or 1
    if jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _cmd_extract_features(args) -> int:
    config = load_config(args.config, jobs=args.jobs)
    if args.describe_features:
        payload = {"n_features": N_FEATURES, "features": feature_index_map()}
        if args.out:
            _write_json(payload, _resolve_out(config, args.out))
        else:
            print(json.dumps(payload, indent=2))
        return 0
    if not args.manifest or not args.out:
        raise InvalidParamsError("--manifest and --out are required to extract features")
    manifest = parse_manifest(args.manifest)

    def work(entry):
        return extract_feature_vector(load_wav(entry.wav_path), entry.utt_id,
                                      **config.lld_kwargs())

    vectors = _pool_map(work, list(manifest), config.jobs)
    out = _resolve_out(config, args.out)
    write_features_csv(vectors, out)
    print(f"wrote {len(vectors)} feature rows to {out}")
    return 0


def _cmd_train_ranker(args) -> int:
    config = load_config(args.config, ranker_c=args.c, n_similar=args.n_similar,
                         seed=args.seed)
    if args.emotion not in EMOTIONS or args.emotion == "neutral":
        raise InvalidParamsError(
            f"--emotion must be a non-neutral member of {EMOTIONS}, got {args.emotion!r}"
        )
    manifest = parse_manifest(args.manifest)
    rows = manifest.select(split="train", emotions=("neutral", args.emotion))
    if not rows:
        raise InvalidParamsError("manifest has no train-split rows for this emotion")
    by_id = {v.provenance: v for v in read_features_csv(args.features)}
    missing = [e.utt_id for e in rows if e.utt_id not in by_id]
    if missing:
        raise InvalidParamsError(
            f"{len(missing)} train utterances missing from features CSV, "
            f"first: {missing[0]!r}"
        )
    features = np.stack([by_id[e.utt_id].values for e in rows])
    labels = ["neutral" if e.emotion == "neutral" else "emotional" for e in rows]
    pairs = build_pairs(features, labels,
                        n_similar=config.n_similar or None, seed=config.seed)
    model = train_ranker(pairs, c=config.ranker_c, emotion=args.emotion)
    out = _resolve_out(config, args.out)
    save_model(model, out)
    report = model.solver_report
    print(f"trained {args.emotion} ranker on {len(rows)} utterances "
          f"({pairs.ordered.shape[0]} ordered, {pairs.similar.shape[0]} similar pairs), "
          f"{report['iterations']} iterations, objective {report['final_objective']:.6g}; "
          f"wrote {out}")
    return 0


def _cmd_score_intensity(args) -> int:
    config = load_config(args.config)
    model = load_model(args.model)
    vectors = read_features_csv(args.features)
    out = _resolve_out(config, args.out)
    with open(out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("utt_id,intensity\n")
        for vec in vectors:
            handle.write(f"{vec.provenance},{repr(score(model, vec.values))}\n")
    print(f"wrote {len(vectors)} intensity scores to {out}")
    return 0


def _cmd_eval_clustering(args) -> int:
    config = load_config(args.config)
    embedding_set = read_embeddings_csv(args.embeddings)
    report = clustering_ratio(embedding_set)
    payload = {
        "generated_at": _timestamp(),
        "class_names": list(embedding_set.class_names),
        "centroids": [[float(v) for v in row] for row in report.centroids],
        "dist_inter": report.dist_inter,
        "dist_intra": report.dist_intra,
        "ratio": report.ratio,
    }
    out = _resolve_out(config, args.out)
    _write_json(payload, out)
    print(f"clustering ratio {report.ratio:.6g}; wrote {out}")
    return 0


def _read_pairs_tsv(path) -> list:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or tuple(lines[0].split("\t")) != PAIRS_TSV_COLUMNS:
        raise ParseError(f"{path}:1: header must be {chr(9).join(PAIRS_TSV_COLUMNS)!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 fields, got {len(fields)}")
        resolved = []
        for name in fields:
            candidate = Path(name)
            if not candidate.is_absolute():
                candidate = path.parent / candidate
            if not candidate.is_file():
                raise MissingFileError(f"{path}:{lineno}: wav file not found: {candidate}")
            resolved.append(candidate)
        rows.append((fields[0], fields[1], resolved[0], resolved[1]))
    if not rows:
        raise EmptyInputError(f"{path}: no conversion pairs listed")
    return rows


def _cmd_eval_conversion(args) -> int:
    config = load_config(args.config, mcep_order=args.mcep_order,
                         ddur_mode=args.ddur_mode, jobs=args.jobs)
    rows = _read_pairs_tsv(args.pairs)

    def work(row):
        conv_name, ref_name, conv_path, ref_path = row
        report = contour_report(load_wav(conv_path), load_wav(ref_path),
                                mcep_order=config.mcep_order,
                                ddur_mode=config.ddur_mode,
                                **config.pitch_kwargs())
        return {
            "converted": conv_name,
            "reference": ref_name,
            "mcd_db": report.mcd_db,
            "ddur_s": report.ddur_s,
            "n_aligned_frames": report.n_aligned_frames,
        }

    results = _pool_map(work, rows, config.jobs)
    payload = {
        "generated_at": _timestamp(),
        "pairs": results,
        "summary": {
            "n_pairs": len(results),
            "mean_mcd_db": float(np.mean([r["mcd_db"] for r in results])),
            "mean_ddur_s": float(np.mean([r["ddur_s"] for r in results])),
        },
    }
    out = _resolve_out(config, args.out)
    _write_json(payload, out)
    print(f"evaluated {len(results)} pairs, "
          f"mean MCD {payload['summary']['mean_mcd_db']:.3f} dB; wrote {out}")
    return 0


def _cmd_contours(args) -> int:
    config = load_config(args.config, mcep_order=args.mcep_order,
                         ddur_mode=args.ddur_mode)
    report = contour_report(load_wav(args.converted), load_wav(args.reference),
                            mcep_order=config.mcep_order,
                            ddur_mode=config.ddur_mode,
                            **config.pitch_kwargs())
    out = _resolve_out(config, args.out)
    write_contour_csv(report, out)
    print(f"MCD {report.mcd_db:.3f} dB, DDUR {report.ddur_s:.3f} s, "
          f"{report.n_aligned_frames} aligned frames; wrote {out}")
    return 0


def _cmd_make_manifest(args) -> int:
    config = load_config(args.config)
    entries = scan_tree(args.root, split=args.split)
    out = _resolve_out(config, args.out)
    write_manifest(entries, out)
    print(f"indexed {len(entries)} utterances into {out}")
    return 0


def _cmd_synth_corpus(args) -> int:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    manifest_path = generate_mini_corpus(args.out_dir, n_pairs=args.pairs,
                                         emotion=args.emotion, seed=seed)
    print(f"wrote {2 * args.pairs} utterances and {manifest_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="emorank",
                     description="Emotion intensity ranking and conversion evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract-features",
                       help="compute utterance feature vectors for a manifest")
    p.add_argument("--manifest", help="corpus manifest TSV")
    p.add_argument("--out", help="output CSV (or JSON with --describe-features)")
    p.add_argument("--describe-features", action="store_true",
                   help="emit the feature index map as JSON and exit")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--jobs", type=int, help="worker threads, 0 = CPU count")
    p.set_defaults(handler=_cmd_extract_features)

    p = sub.add_parser("train-ranker", help="fit an intensity ranker for one emotion")
    p.add_argument("--features", required=True, help="feature CSV from extract-features")
    p.add_argument("--manifest", required=True, help="corpus manifest TSV")
    p.add_argument("--emotion", required=True, help="target emotion class")
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--c", type=float, help="objective trade-off constant")
    p.add_argument("--n-similar", dest="n_similar", type=int,
                   help="similar-pair count, 0 = half the ordered pairs")
    p.add_argument("--seed", type=int, help="pair sampling seed")
    p.add_argument("--config", help="key = value config file")
    p.set_defaults(handler=_cmd_train_ranker)

    p = sub.add_parser("score-intensity", help="score feature rows with a trained model")
    p.add_argument("--model", required=True, help="model JSON from train-ranker")
    p.add_argument("--features", required=True, help="feature CSV to score")
    p.add_argument("--out", required=True, help="output CSV utt_id,intensity")
    p.add_argument("--config", help="key = value config file")
    p.set_defaults(handler=_cmd_score_intensity)

    p = sub.add_parser("eval-clustering", help="embedding-space separation report")
    p.add_argument("--embeddings", required=True, help="CSV id,label,d0..dN")
    p.add_argument("--out", required=True, help="output report JSON")
    p.add_argument("--config", help="key = value config file")
    p.set_defaults(handler=_cmd_eval_clustering)

    p = sub.add_parser("eval-conversion", help="MCD and duration metrics for wav pairs")
    p.add_argument("--pairs", required=True, help="TSV converted_wav,reference_wav")
    p.add_argument("--out", required=True, help="output report JSON")
    p.add_argument("--mcep-order", dest="mcep_order", type=int, help="cepstral order")
    p.add_argument("--ddur-mode", dest="ddur_mode", choices=["voiced", "span"],
                   help="duration definition")
    p.add_argument("--jobs", type=int, help="worker threads, 0 = CPU count")
    p.add_argument("--config", help="key = value config file")
    p.set_defaults(handler=_cmd_eval_conversion)

    p = sub.add_parser("contours", help="aligned F0/energy contour CSV for one pair")
    p.add_argument("--converted", required=True, help="converted wav")
    p.add_argument("--reference", required=True, help="reference wav")
    p.add_argument("--out", required=True, help="output contour CSV")
    p.add_argument("--mcep-order", dest="mcep_order", type=int, help="cepstral order")
    p.add_argument("--ddur-mode", dest="ddur_mode", choices=["voiced", "span"],
                   help="duration definition")
    p.add_argument("--config", help="key = value config file")
    p.set_defaults(handler=_cmd_contours)

    p = sub.add_parser("make-manifest", help="index a speaker/emotion/*.wav tree")
    p.add_argument("--root", required=True, help="corpus root directory")
    p.add_argument("--out", required=True, help="output manifest TSV")
    p.add_argument("--split", default="train", choices=["train", "eval", "reference"],
                   help="split label for all rows")
    p.add_argument("--config", help="key = value config file")
    p.set_defaults(handler=_cmd_make_manifest)

    p = sub.add_parser("synth-corpus", help="write the bundled synthetic demo corpus")
    p.add_argument("--out-dir", dest="out_dir", required=True, help="output directory")
    p.add_argument("--pairs", type=int, default=DEFAULT_PAIRS,
                   help="neutral/emotional utterance pairs to synthesize")
    p.add_argument("--emotion", default=DEFAULT_EMOTION, help="emotional class label")
    p.add_argument("--seed", type=int, help="synthesis seed")
    p.set_defaults(handler=_cmd_synth_corpus)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except EmorankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
