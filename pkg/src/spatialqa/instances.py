"""Group clip frames into contiguous event instances and summarize their trajectories."""
from __future__ import annotations

from collections import defaultdict
from typing import Sequence

from .scene_model import (
    Clip,
    EventInstance,
    FrameAnnotation,
    StaticTolerances,
    TimedValue,
    TrajectoryStat,
    frame_to_seconds,
)

__all__ = ["StaticTolerances", "extract_instances", "split_runs", "summarize_trajectory"]


def split_runs(frames: Sequence[FrameAnnotation]) -> list[list[FrameAnnotation]]:
    """Split frame-sorted annotations into maximal runs of consecutive frames."""
    runs: list[list[FrameAnnotation]] = []
    for fa in frames:
        if runs and fa.frame == runs[-1][-1].frame + 1:
            runs[-1].append(fa)
        else:
            runs.append([fa])
    return runs


def _dimension_stat(frames, values, tolerance) -> TrajectoryStat:
    times = [fa.time_s for fa in frames]
    # list.index returns the first occurrence, which is the tie-break we want
    i_min = values.index(min(values))
    i_max = values.index(max(values))
    return TrajectoryStat(
        initial=TimedValue(values[0], times[0]),
        final=TimedValue(values[-1], times[-1]),
        min=TimedValue(values[i_min], times[i_min]),
        max=TimedValue(values[i_max], times[i_max]),
        is_static=(values[i_max] - values[i_min]) <= tolerance,
        mean=sum(values) / len(values),
    )


def summarize_trajectory(frames: Sequence[FrameAnnotation], tol: StaticTolerances = StaticTolerances()):
    """Return ``(azimuth, elevation, distance, is_moving)`` for one instance.

    ``frames`` must be non-empty, sorted, contiguous and share one
    (class, source) pair.
    """
    if not frames:
        raise ValueError("cannot summarize an empty instance")
    az = _dimension_stat(frames, [fa.azimuth_deg for fa in frames], tol.azimuth_deg)
    el = _dimension_stat(frames, [fa.elevation_deg for fa in frames], tol.elevation_deg)
    dist = _dimension_stat(frames, [fa.distance_cm for fa in frames], tol.distance_cm)
    is_moving = not (az.is_static and el.is_static and dist.is_static)
    return az, el, dist, is_moving


def extract_instances(clip: Clip, tol: StaticTolerances = StaticTolerances()) -> list[EventInstance]:
    """Instances of every (source, class) pair, ordered by source, class, onset."""
    groups: dict[tuple[int, int], list[FrameAnnotation]] = defaultdict(list)
    for fa in clip.frames:
        groups[(fa.source_id, fa.class_idx)].append(fa)

    out = []
    for (source_id, class_idx) in sorted(groups):
        frames = sorted(groups[(source_id, class_idx)], key=lambda fa: fa.frame)
        for k, run in enumerate(split_runs(frames)):
            az, el, dist, _ = summarize_trajectory(run, tol)
            out.append(
                EventInstance(
                    clip_id=clip.clip_id,
                    class_idx=class_idx,
                    source_id=source_id,
                    instance_idx=k,
                    onset_s=frame_to_seconds(run[0].frame),
                    offset_s=frame_to_seconds(run[-1].frame),
                    azimuth=az,
                    elevation=el,
                    distance=dist,
                    frame_indices=tuple(fa.frame for fa in run),
                )
            )
    return out
