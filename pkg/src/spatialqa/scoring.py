"""Detection metrics (precision/recall/F1) and the modified mean reciprocal rank.

Ground truth is a QA dataset file (one JSON record per line, as written
by the ``qa`` command). Predictions are JSON lines of the form::

    {"question_id": "...", "answer": "yes"}
    {"question_id": "...", "answer": ["footsteps", "music"]}

Classes are compared by label.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Sequence

from .qa_generator import CLASS_RANKING, CLASS_SET, QTYPES, YES_NO, Answer

SPATIAL_EXTREMES = frozenset({"leftmost", "rightmost", "topmost", "bottommost", "nearest", "farthest"})


class ScoringError(ValueError):
    """A single item could not be scored (reported, then excluded)."""


class ScoringInputError(RuntimeError):
    """Unreadable or malformed input file."""


def score_detection(gt: Answer, pred: Answer) -> tuple[int, int, int]:
    """Return ``(tp, fp, fn)`` for one question."""
    if (gt.kind == YES_NO) != (pred.kind == YES_NO):
        raise ScoringError(f"answer kind mismatch: expected {gt.kind}, got {pred.kind}")
    if gt.kind == YES_NO:
        said_yes = pred.yes_no is True
        if gt.yes_no:
            return (1, 0, 0) if said_yes else (0, 0, 1)
        return (0, 1, 0) if said_yes else (0, 0, 0)
    truth, guess = set(gt.classes), set(pred.classes)
    return len(truth & guess), len(guess - truth), len(truth - guess)


def mrr_mod(gt_order: Sequence[Hashable], pred_order: Sequence[Hashable]) -> float:
    """Rank-displacement reward averaged over the ground-truth classes.

    A class at 1-based rank ``r`` in ``gt_order`` and ``r_hat`` in
    ``pred_order`` scores ``1 / (1 + |r_hat - r|)``; a class missing from
    the prediction scores 0. Extra predicted classes only shift ranks.
    """
    if not gt_order:
        raise ValueError("ground-truth ordering must be non-empty")
    for name, seq in (("ground-truth", gt_order), ("predicted", pred_order)):
        if len(set(seq)) != len(seq):
            raise ValueError(f"duplicate class in {name} ordering")
    pred_rank = {c: r for r, c in enumerate(pred_order, start=1)}
    total = 0.0
    for r, c in enumerate(gt_order, start=1):
        if c in pred_rank:
            total += 1.0 / (1.0 + abs(pred_rank[c] - r))
    return total / len(gt_order)


@dataclass
class DetectionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    n: int = 0

    def add(self, tp: int, fp: int, fn: int) -> None:
        self.tp += tp
        self.fp += fp
        self.fn += fn
        self.n += 1

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def to_dict(self) -> dict:
        return {
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "n": self.n,
        }


@dataclass
class MeanAccumulator:
    total: float = 0.0
    n: int = 0

    def add(self, value: float) -> None:
        self.total += value
        self.n += 1

    @property
    def mean(self) -> float:
        return self.total / self.n if self.n else 0.0


@dataclass
class ScoreReport:
    precision: float
    recall: float
    f1: float
    spatial_mrr_mod: float
    temporal_mrr_mod: float
    per_type: dict[str, DetectionCounts]
    per_subtype_mrr: dict[str, MeanAccumulator]
    n_questions: int
    n_spatial: int
    n_temporal: int
    n_missing: int = 0
    averaging: str = "micro"
    unknown_ids: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors and not self.unknown_ids

    def to_dict(self) -> dict:
        return {
            "averaging": self.averaging,
            "overall": {
                "precision": self.precision, "recall": self.recall, "f1": self.f1,
                "spatial_mrr_mod": self.spatial_mrr_mod, "temporal_mrr_mod": self.temporal_mrr_mod,
            },
            "counts": {
                "questions": self.n_questions, "spatial": self.n_spatial,
                "temporal": self.n_temporal, "missing_predictions": self.n_missing,
            },
            "per_type": {t: c.to_dict() for t, c in self.per_type.items()},
            "per_subtype_mrr_mod": {k: {"mrr_mod": a.mean, "n": a.n} for k, a in self.per_subtype_mrr.items()},
            "unknown_question_ids": list(self.unknown_ids),
            "errors": list(self.errors),
        }

    def render_table(self, model: str = "submission") -> str:
        header = ("Model", "Precision", "Recall", "F1", "Spatial MRR_mod", "Temporal MRR_mod")
        row = (model, *(f"{v:.2f}" for v in (
            self.precision, self.recall, self.f1, self.spatial_mrr_mod, self.temporal_mrr_mod)))
        widths = [max(len(h), len(r)) for h, r in zip(header, row)]
        fmt = " | ".join(f"{{:>{w}}}" for w in widths)
        lines = [fmt.format(*header), "-+-".join("-" * w for w in widths), fmt.format(*row)]
        if self.unknown_ids or self.errors:
            lines.append("")
            lines.append("Warnings:")
            lines.extend(f"  unknown question_id: {q}" for q in self.unknown_ids)
            lines.extend(f"  {e}" for e in self.errors)
        return "\n".join(lines)


def _read_jsonl(path) -> list[dict]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScoringInputError(f"cannot read {path}: {exc}") from exc
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ScoringInputError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict) or "question_id" not in rec:
            raise ScoringInputError(f"{path}:{lineno}: record without question_id")
        records.append(rec)
    return records


def load_ground_truth(path) -> dict[str, dict]:
    items = {}
    for rec in _read_jsonl(path):
        items[rec["question_id"]] = {
            "type": rec["type"],
            "subtype": rec["subtype"],
            "answer": Answer.from_record(rec["answer"]),
        }
    return items


def parse_prediction(value, gt: Answer) -> Answer:
    """Interpret a raw prediction value in the shape of ``gt``."""
    if isinstance(value, dict):
        value = value.get("value")
    if value is None:
        return _empty_like(gt)
    if isinstance(value, (str, bool)):
        try:
            return Answer.from_record({"kind": YES_NO, "value": value})
        except ValueError as exc:
            raise ScoringError(str(exc)) from None
    if isinstance(value, list):
        kind = gt.kind if gt.kind != YES_NO else CLASS_SET
        try:
            return Answer(kind, classes=tuple(value))
        except (ValueError, TypeError) as exc:
            raise ScoringError(str(exc)) from None
    raise ScoringError(f"unsupported prediction value {value!r}")


def _empty_like(gt: Answer) -> Answer:
    if gt.kind == YES_NO:
        return Answer(YES_NO, yes_no=None)
    return Answer(gt.kind, classes=())


def is_spatial(qtype: str, subtype: str) -> bool:
    return qtype == "IV" or (qtype == "III" and subtype in SPATIAL_EXTREMES)


def score_items(gt_items: dict[str, dict], predictions: dict[str, object], averaging: str = "micro",
                unknown_ids=(), errors=()) -> ScoreReport:
    if averaging not in ("micro", "macro"):
        raise ValueError("averaging must be 'micro' or 'macro'")
    overall = DetectionCounts()
    per_type = {t: DetectionCounts() for t in QTYPES}
    spatial, temporal = MeanAccumulator(), MeanAccumulator()
    per_subtype: dict[str, MeanAccumulator] = defaultdict(MeanAccumulator)
    errors = list(errors)
    n_missing = 0

    for qid in sorted(gt_items):
        item = gt_items[qid]
        gt = item["answer"]
        if qid in predictions:
            try:
                pred = parse_prediction(predictions[qid], gt)
                counts = score_detection(gt, pred)
            except ScoringError as exc:
                errors.append(f"{qid}: {exc}")
                continue
        else:
            n_missing += 1
            pred = _empty_like(gt)
            counts = score_detection(gt, pred)
        overall.add(*counts)
        per_type[item["type"]].add(*counts)

        if gt.kind == CLASS_RANKING and gt.classes:
            value = mrr_mod(gt.classes, pred.classes)
            if is_spatial(item["type"], item["subtype"]):
                spatial.add(value)
            elif item["type"] == "V":
                temporal.add(value)
            per_subtype[f"{item['type']}:{item['subtype']}"].add(value)

    per_type = {t: c for t, c in per_type.items() if c.n}
    if averaging == "micro":
        p, r, f = overall.precision, overall.recall, overall.f1
    else:
        groups = list(per_type.values()) or [DetectionCounts()]
        p = sum(c.precision for c in groups) / len(groups)
        r = sum(c.recall for c in groups) / len(groups)
        f = sum(c.f1 for c in groups) / len(groups)
    return ScoreReport(
        precision=p, recall=r, f1=f,
        spatial_mrr_mod=spatial.mean, temporal_mrr_mod=temporal.mean,
        per_type=per_type, per_subtype_mrr=dict(sorted(per_subtype.items())),
        n_questions=len(gt_items), n_spatial=spatial.n, n_temporal=temporal.n,
        n_missing=n_missing, averaging=averaging,
        unknown_ids=list(unknown_ids), errors=errors,
    )


def score_dataset(gt_file, pred_file, averaging: str = "micro") -> ScoreReport:
    gt_items = load_ground_truth(gt_file)
    predictions: dict[str, object] = {}
    unknown, errors = [], []
    for rec in _read_jsonl(pred_file):
        qid = rec["question_id"]
        if qid not in gt_items:
            unknown.append(qid)
        elif qid in predictions:
            errors.append(f"{qid}: duplicate prediction ignored")
        else:
            predictions[qid] = rec.get("answer")
    return score_items(gt_items, predictions, averaging, unknown, errors)
