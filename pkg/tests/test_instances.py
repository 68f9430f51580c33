
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_clip
from spatialqa.instances import extract_instances, summarize_trajectory
from spatialqa.scene_model import FrameAnnotation, StaticTolerances


def test_worked_example_instance_times():
    clip = make_clip([(f, 1, 2, -70, -46, 97) for f in range(2, 15)])
    (inst,) = extract_instances(clip)
    assert (inst.onset_s, inst.offset_s) == (0.2, 1.4)
    assert inst.frame_indices == tuple(range(2, 15))


def _runs_oracle(frames):
    """Brute-force contiguity scan: a frame starts a run iff frame - 1 is absent."""
    present = set(frames)
    starts = [f for f in sorted(present) if f - 1 not in present]
    runs = []
    for s in starts:
        run = [s]
        while run[-1] + 1 in present:
            run.append(run[-1] + 1)
        runs.append(run)
    return runs


def test_gap_splits_instances():
    frames = [0, 1, 2, 3, 4, 7, 8, 9]
    clip = make_clip([(f, 0, 0, 0, 0, 100) for f in frames])
    insts = extract_instances(clip)
    assert [list(i.frame_indices) for i in insts] == _runs_oracle(frames) == [[0, 1, 2, 3, 4], [7, 8, 9]]
    assert [i.instance_idx for i in insts] == [0, 1]


def test_empty_clip():
    assert extract_instances(make_clip([])) == []


def test_worked_example_trajectory():
    az = [-70, -70, -72, -75, -78, -80, -83, -86, -88, -90, -93, -95, -95]
    frames = [FrameAnnotation(f, 1, 2, a, -46, 97) for f, a in zip(range(2, 15), az)]
    az_stat, el_stat, dist_stat, moving = summarize_trajectory(frames, StaticTolerances())
    assert (az_stat.initial.value, az_stat.initial.time_s) == (-70, 0.2)
    assert (az_stat.final.value, az_stat.final.time_s) == (-95, 1.4)
    assert (az_stat.max.value, az_stat.max.time_s) == (-70, 0.2)  # first occurrence
    assert (az_stat.min.value, az_stat.min.time_s) == (-95, 1.3)
    assert not az_stat.is_static
    assert el_stat.is_static and el_stat.approx == -46
    assert dist_stat.is_static and dist_stat.approx == 97
    assert moving


def test_constant_trajectory_is_static():
    frames = [FrameAnnotation(f, 0, 0, 30, 10, 200) for f in range(5)]
    for stat in summarize_trajectory(frames)[:3]:
        assert stat.is_static
        assert stat.min.value == stat.max.value == stat.initial.value == stat.final.value
    assert summarize_trajectory(frames)[3] is False


@pytest.mark.parametrize("tol, static", [(5, True), (4, False)])
def test_static_tolerance_boundary(tol, static):
    frames = [FrameAnnotation(f, 0, 0, a, 0, 0) for f, a in enumerate([0, 3, -2])]
    az = summarize_trajectory(frames, StaticTolerances(azimuth_deg=tol))[0]
    assert (max(0, 3, -2) - min(0, 3, -2) <= tol) is static
    assert az.is_static is static


def test_empty_frames_rejected():
    with pytest.raises(ValueError):
        summarize_trajectory([])


def test_output_ordered_by_source_class_onset():
    rows = [(10, 3, 1, 0, 0, 50), (0, 5, 1, 0, 0, 50), (4, 0, 0, 0, 0, 50), (1, 0, 0, 0, 0, 50)]
    keys = [(i.source_id, i.class_idx, i.onset_s) for i in extract_instances(make_clip(rows))]
    assert keys == sorted(keys)
    assert len(keys) == 4


clip_rows = st.lists(
    st.tuples(
        st.integers(0, 99), st.integers(0, 2), st.integers(0, 2),
        st.integers(-180, 179), st.integers(-90, 90), st.integers(0, 500),
    ),
    max_size=120,
    unique_by=lambda r: r[:3],
)


@given(clip_rows, st.randoms())
@settings(max_examples=80)
def test_instance_properties(rows, rnd):
    clip = make_clip(rows)
    insts = extract_instances(clip)

    covered = sorted((f, i.class_idx, i.source_id) for i in insts for f in i.frame_indices)
    assert covered == sorted(r[:3] for r in rows)

    for inst in insts:
        fr = inst.frame_indices
        assert inst.onset_s == round(min(fr) * 0.1, 1) and inst.offset_s == round(max(fr) * 0.1, 1)
        for stat in (inst.azimuth, inst.elevation, inst.distance):
            assert stat.min.value <= stat.initial.value <= stat.max.value
            assert stat.min.value <= stat.final.value <= stat.max.value
            assert inst.onset_s <= stat.min.time_s <= inst.offset_s
            assert inst.onset_s <= stat.max.time_s <= inst.offset_s

    shuffled = list(rows)
    rnd.shuffle(shuffled)
    assert extract_instances(make_clip(shuffled)) == insts
