"""Command-line entry point: ``spatialqa {caption,qa,score,synth,loss-check}``.

Settings resolve as flags > environment (``SPATIALQA_*``) > JSON config
file (``--config`` or ``SPATIALQA_CONFIG``) > defaults. The rephrase API
key is read from ``SPATIALQA_API_KEY`` only.

Exit codes: 0 success, 1 validation or scoring errors, 2 fatal I/O.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .captioner import attach_rephrasings, caption_instances
from .ingest import parse_annotation_file, segment_into_clips, write_annotation_file
from .instances import extract_instances
from .loss_checks import format_results, run_loss_checks
from .loss_ref import LossConfig
from .qa_generator import LEFT_POSITIVE, RIGHT_POSITIVE, QaOptions, generate_clip_qa
from .rephrase import ChatCompletionClient
from .scene_model import AnnotationError, ClassVocabulary, StaticTolerances
from .scoring import ScoringInputError, score_dataset
from .synth import synth_corpus

log = logging.getLogger("spatialqa")

EXIT_OK, EXIT_INVALID, EXIT_FATAL = 0, 1, 2
ENV_PREFIX = "SPATIALQA_"

# name -> (type, default)
SETTINGS = {
    "vocab": (str, None),
    "tol_az": (float, 5.0),
    "tol_el": (float, 5.0),
    "tol_dist": (float, 10.0),
    "azimuth_convention": (str, LEFT_POSITIVE),
    "offline": (bool, False),
    "endpoint": (str, None),
    "model": (str, "gpt-4"),
    "seed": (int, 0),
    "jobs": (int, 1),
    "out": (str, "."),
}


@dataclass(frozen=True)
class PipelineConfig:
    vocab: ClassVocabulary
    tol: StaticTolerances
    azimuth_convention: str
    offline: bool
    endpoint: Optional[str]
    model: str
    seed: int
    jobs: int
    out: Path
    balance_type1: bool = False

    def client(self):
        if self.offline or not self.endpoint:
            return None
        return ChatCompletionClient(self.endpoint, self.model)


def _coerce(kind, value):
    if kind is bool and isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return kind(value)


def resolve_settings(args: argparse.Namespace, environ=None) -> dict:
    environ = os.environ if environ is None else environ
    config_path = getattr(args, "config", None) or environ.get(ENV_PREFIX + "CONFIG")
    file_values = {}
    if config_path:
        file_values = json.loads(Path(config_path).read_text(encoding="utf-8"))
        if "api_key" in file_values:
            raise ValueError("the API key may only be supplied through the environment")
    resolved = {}
    for name, (kind, default) in SETTINGS.items():
        flag = getattr(args, name, None)
        env = environ.get(ENV_PREFIX + name.upper())
        if flag is not None and flag is not False:
            resolved[name] = flag
        elif env is not None:
            resolved[name] = _coerce(kind, env)
        elif name in file_values:
            resolved[name] = _coerce(kind, file_values[name])
        else:
            resolved[name] = default
    return resolved


def build_config(args: argparse.Namespace, environ=None) -> PipelineConfig:
    s = resolve_settings(args, environ)
    vocab = ClassVocabulary.load(s["vocab"]) if s["vocab"] else ClassVocabulary.default()
    if s["azimuth_convention"] not in (LEFT_POSITIVE, RIGHT_POSITIVE):
        raise ValueError(f"unknown azimuth convention {s['azimuth_convention']!r}")
    return PipelineConfig(
        vocab=vocab,
        tol=StaticTolerances(s["tol_az"], s["tol_el"], s["tol_dist"]),
        azimuth_convention=s["azimuth_convention"],
        offline=bool(s["offline"]),
        endpoint=s["endpoint"],
        model=s["model"],
        seed=int(s["seed"]),
        jobs=max(1, int(s["jobs"])),
        out=Path(s["out"]),
        balance_type1=bool(getattr(args, "balance_type1", False)),
    )


def write_jsonl_atomic(path: Path, records) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for rec in records:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------------------
# Per-recording workers (module level so they pickle for --jobs)

def _caption_recording(path: Path, cfg: PipelineConfig):
    rec = parse_annotation_file(path, cfg.vocab)
    clips = segment_into_clips(rec)
    records, n_instances = [], 0
    for clip in clips:
        caps = caption_instances(extract_instances(clip, cfg.tol), cfg.vocab)
        caps = attach_rephrasings(caps, cfg.client())
        n_instances += len(caps)
        records.extend(c.to_record(cfg.vocab) for c in caps)
    return records, len(clips), n_instances


def _qa_recording(path: Path, cfg: PipelineConfig):
    rec = parse_annotation_file(path, cfg.vocab)
    options = QaOptions(cfg.azimuth_convention, cfg.seed, cfg.balance_type1, cfg.client())
    records = []
    for clip in segment_into_clips(rec):
        for item in generate_clip_qa(clip, cfg.vocab, cfg.tol, options):
            records.append(item.to_record(cfg.vocab))
    return records


def _run_guarded(fn, path, cfg):
    try:
        return path, fn(path, cfg), None
    except (AnnotationError, OSError, UnicodeDecodeError) as exc:
        return path, None, exc


def _map_recordings(fn, paths, cfg):
    if cfg.jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            yield from pool.map(_run_guarded, [fn] * len(paths), paths, [cfg] * len(paths))
    else:
        for p in paths:
            yield _run_guarded(fn, p, cfg)


def _input_files(input_dir: Path) -> list[Path]:
    if not input_dir.is_dir():
        raise FileNotFoundError(f"input directory not found: {input_dir}")
    return sorted(input_dir.glob("*.csv"))


def cmd_caption(args, cfg: PipelineConfig) -> int:
    paths = _input_files(Path(args.input))
    if not paths:
        log.warning("no *.csv files in %s", args.input)
    written, failures = [], 0
    n_clips = n_instances = 0
    for path, result, exc in _map_recordings(_caption_recording, paths, cfg):
        if exc is not None:
            print(f"error: {exc}", file=sys.stderr)
            failures += 1
            if not args.keep_going:
                for p in written:
                    p.unlink(missing_ok=True)
                return EXIT_INVALID
            continue
        records, c, i = result
        out_path = cfg.out / f"{path.stem}.captions.jsonl"
        write_jsonl_atomic(out_path, records)
        written.append(out_path)
        n_clips += c
        n_instances += i
    print(f"captioned {len(written)} recordings: {n_clips} clips, {n_instances} instances, {failures} failures")
    return EXIT_INVALID if failures else EXIT_OK


def cmd_qa(args, cfg: PipelineConfig) -> int:
    paths = _input_files(Path(args.input))
    if not paths:
        log.warning("no *.csv files in %s", args.input)
    records, failures = [], 0
    for _, result, exc in _map_recordings(_qa_recording, paths, cfg):
        if exc is not None:
            print(f"error: {exc}", file=sys.stderr)
            failures += 1
            if not args.keep_going:
                return EXIT_INVALID
            continue
        records.extend(result)
    out_path = cfg.out / args.output_name
    write_jsonl_atomic(out_path, records)
    counts = Counter(r["type"] for r in records)
    summary = " ".join(f"{t}={counts.get(t, 0)}" for t in ("I", "II", "III", "IV", "V"))
    print(f"wrote {len(records)} QA items to {out_path}: {summary}, {failures} failures")
    return EXIT_INVALID if failures else EXIT_OK


def cmd_score(args, cfg: PipelineConfig) -> int:
    report = score_dataset(args.gt, args.pred, averaging="macro" if args.macro else "micro")
    print(report.render_table(args.model_name))
    if args.report:
        path = Path(args.report)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_synth(args, cfg: PipelineConfig) -> int:
    corpus = synth_corpus(cfg.seed, args.recordings, args.clips, n_classes=cfg.vocab.N)
    cfg.out.mkdir(parents=True, exist_ok=True)
    n_rows = 0
    for rec_id, rows in corpus.items():
        write_annotation_file(cfg.out / f"{rec_id}.csv", rows)
        n_rows += len(rows)
    print(f"wrote {len(corpus)} recordings, {n_rows} annotation rows to {cfg.out}")
    return EXIT_OK


def cmd_loss_check(args, cfg: PipelineConfig) -> int:
    loss_cfg = LossConfig(margin=args.delta)
    results = run_loss_checks(cfg.seed, args.trials, loss_cfg, n_classes=cfg.vocab.N)
    print(format_results(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="JSON config file")
    shared.add_argument("--vocab", help="class vocabulary file (index,label per line)")
    shared.add_argument("--tol-az", dest="tol_az", type=float, help="static azimuth tolerance, degrees")
    shared.add_argument("--tol-el", dest="tol_el", type=float, help="static elevation tolerance, degrees")
    shared.add_argument("--tol-dist", dest="tol_dist", type=float, help="static distance tolerance, cm")
    shared.add_argument("--azimuth-convention", dest="azimuth_convention",
                        choices=(LEFT_POSITIVE, RIGHT_POSITIVE))
    shared.add_argument("--offline", action="store_true", default=None, help="never call a remote rephraser")
    shared.add_argument("--endpoint", help="chat-completion URL for rephrasing")
    shared.add_argument("--model", help="model name sent to the rephrase endpoint")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--jobs", type=int, help="worker processes")
    shared.add_argument("--out", help="output directory")
    shared.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="spatialqa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("caption", parents=[shared], help="write per-instance captions")
    p.add_argument("input", help="directory of annotation CSVs")
    p.add_argument("--keep-going", action="store_true")
    p.set_defaults(func=cmd_caption)

    p = sub.add_parser("qa", parents=[shared], help="write the QA dataset")
    p.add_argument("input", help="directory of annotation CSVs")
    p.add_argument("--keep-going", action="store_true")
    p.add_argument("--balance-type1", action="store_true")
    p.add_argument("--output-name", default="qa.jsonl")
    p.set_defaults(func=cmd_qa)

    p = sub.add_parser("score", parents=[shared], help="score predictions against a QA dataset")
    p.add_argument("gt")
    p.add_argument("pred")
    p.add_argument("--report", help="write the structured report (JSON) here")
    p.add_argument("--macro", action="store_true", help="macro-average P/R/F1 over question types")
    p.add_argument("--model-name", default="submission")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("synth", parents=[shared], help="write synthetic annotation CSVs")
    p.add_argument("--recordings", type=int, default=4)
    p.add_argument("--clips", type=int, default=6, help="clips per recording")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("loss-check", parents=[shared], help="run loss invariants and gradient checks")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--delta", type=float, default=0.3, help="ranking margin")
    p.set_defaults(func=cmd_loss_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = build_config(args)
        return args.func(args, cfg)
    except (OSError, ScoringInputError, json.JSONDecodeError) as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except (AnnotationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
