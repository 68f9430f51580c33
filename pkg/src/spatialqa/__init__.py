"""Spatial audio QA dataset forge: captions, QA pairs, metrics and a loss reference."""
from .scene_model import (
    ClassVocabulary,
    Clip,
    EventInstance,
    FrameAnnotation,
    StaticTolerances,
    TrajectoryStat,
)
from .ingest import RecordingAnnotations, parse_annotation_file, segment_into_clips
from .instances import extract_instances, summarize_trajectory
from .captioner import InstanceCaption, render_clip_captions, render_instance_caption, rephrase
from .qa_generator import Answer, QaItem, QaOptions, first_appearances, generate_clip_qa
from .scoring import ScoreReport, mrr_mod, score_dataset, score_detection
from .loss_ref import (
    LossConfig,
    OrderingTarget,
    bce_loss,
    composite_loss,
    encode_ideal_scores,
    grad_check,
    l1_loss,
    ranking_loss,
)

__version__ = "0.1.0"

__all__ = [
    "ClassVocabulary",
    "Clip",
    "EventInstance",
    "FrameAnnotation",
    "StaticTolerances",
    "TrajectoryStat",
    "RecordingAnnotations",
    "parse_annotation_file",
    "segment_into_clips",
    "extract_instances",
    "summarize_trajectory",
    "InstanceCaption",
    "render_clip_captions",
    "render_instance_caption",
    "rephrase",
    "Answer",
    "QaItem",
    "QaOptions",
    "first_appearances",
    "generate_clip_qa",
    "ScoreReport",
    "mrr_mod",
    "score_dataset",
    "score_detection",
    "LossConfig",
    "OrderingTarget",
    "bce_loss",
    "composite_loss",
    "encode_ideal_scores",
    "grad_check",
    "l1_loss",
    "ranking_loss",
]
