import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spatialqa.loss_checks import check_gradients, run_loss_checks
from spatialqa.loss_ref import (
    KinkProximityError,
    L1Objective,
    LossConfig,
    OrderingObjective,
    RankingObjective,
    bce_loss,
    composite_loss,
    encode_ideal_scores,
    grad_check,
    ideal_ranking_loss,
    l1_loss,
    ranking_loss,
    ranking_loss_grad,
)


def _ranking_oracle(p, order, N, delta):
    """Plain double loop over the hinge definition."""
    active = list(order)
    inactive = [c for c in range(N) if c not in active]
    total = 0.0
    for a in active:
        for b in inactive:
            total += max(0.0, delta - (p[a] - p[b]))
    for i in range(len(active)):
        for j in range(i + 1, len(active)):
            total += max(0.0, delta - (p[active[i]] - p[active[j]]))
    return total


@pytest.mark.parametrize(
    "order, N, expected",
    [([2], 3, [0, 0, 1]), ([0, 1], 3, [1, 0.5, 0]), ([0, 1, 2, 3], 4, [1, 0.75, 0.5, 0.25])],
)
def test_ideal_encoding(order, N, expected):
    t = encode_ideal_scores(order, N)
    assert t.ideal.tolist() == expected
    assert t.M == len(order) and t.N == N


def test_encoding_rejects_bad_orders():
    with pytest.raises(ValueError):
        encode_ideal_scores([0, 0], 3)
    with pytest.raises(ValueError):
        encode_ideal_scores([3], 3)


def test_ranking_hand_cases():
    t = encode_ideal_scores([0], 3)
    assert ranking_loss([0.8, 0.1, 0.0], t) == pytest.approx(0.0, abs=1e-12)
    assert ranking_loss([0.4, 0.2, 0.3], t) == pytest.approx(0.3, abs=1e-12)
    two = encode_ideal_scores([0, 1], 3)
    assert ranking_loss(two.ideal, two) == pytest.approx(0.0, abs=1e-12)


def test_l1_hand_cases():
    assert l1_loss([0.8, 0.1, 0.0], encode_ideal_scores([0], 3)) == pytest.approx(0.3, abs=1e-12)
    assert l1_loss([0, 0, 0], encode_ideal_scores([0, 1], 3)) == pytest.approx(1.5, abs=1e-12)


def test_bce_values():
    assert bce_loss([0.5], [1]) == pytest.approx(math.log(2), abs=1e-12)
    assert bce_loss([0.0], [1]) == pytest.approx(-math.log(1e-7), abs=1e-9)
    assert bce_loss([1.0, 0.0], [1, 0]) < 1e-6
    assert math.isfinite(bce_loss([1.0], [0]))
    assert bce_loss([], []) == 0.0


def test_zero_margin_at_ideal_is_zero():
    cfg = LossConfig(margin=0.0)
    for M in range(14):
        t = encode_ideal_scores(list(range(M)), 13)
        assert ranking_loss(t.ideal, t, cfg) == 0.0


def test_ideal_scores_small_orders_exhaustive():
    count = 0
    for M in range(4):
        for order in itertools.permutations(range(13), M):
            t = encode_ideal_scores(order, 13)
            assert ranking_loss(t.ideal, t) <= 1e-12
            count += 1
    assert count == 1 + 13 + 156 + 1716


def test_ideal_scores_closed_form():
    assert ideal_ranking_loss(4, 13) == pytest.approx(0.6, abs=1e-12)
    for M in range(4, 14):
        t = encode_ideal_scores(list(range(M))[::-1], 13)
        assert ranking_loss(t.ideal, t) == pytest.approx(ideal_ranking_loss(M, 13), abs=1e-12)
        assert ranking_loss(t.ideal, t) == pytest.approx(_ranking_oracle(t.ideal, t.active, 13, 0.3), abs=1e-12)


scores = st.lists(st.floats(0, 1), min_size=6, max_size=6)
orders6 = st.permutations(range(6)).flatmap(lambda perm: st.integers(0, 6).map(lambda m: perm[:m]))


@given(scores, orders6, st.floats(0, 1))
def test_ranking_matches_loop_oracle(p, order, delta):
    t = encode_ideal_scores(order, 6)
    cfg = LossConfig(margin=delta)
    assert ranking_loss(p, t, cfg) == pytest.approx(_ranking_oracle(p, order, 6, delta), abs=1e-9)
    assert ranking_loss(p, t, cfg) >= 0 and l1_loss(p, t) >= 0


@given(scores, orders6, st.permutations(range(6)))
def test_relabelling_equivariance(p, order, perm):
    t = encode_ideal_scores(order, 6)
    moved = encode_ideal_scores([perm[c] for c in order], 6)
    q = np.empty(6)
    q[list(perm)] = p
    assert ranking_loss(q, moved) == pytest.approx(ranking_loss(p, t), abs=1e-12)
    assert l1_loss(q, moved) == pytest.approx(l1_loss(p, t), abs=1e-12)


@given(scores, scores, orders6, st.floats(0, 1))
def test_l1_convex(p, q, order, s):
    t = encode_ideal_scores(order, 6)
    p, q = np.array(p), np.array(q)
    assert l1_loss(s * p + (1 - s) * q, t) <= s * l1_loss(p, t) + (1 - s) * l1_loss(q, t) + 1e-12


def test_composite_is_sum_and_separable():
    t = encode_ideal_scores([2, 0], 4)
    p, q = np.array([0.2, 0.1, 0.9, 0.0]), np.array([0.6, 0.6, 0.2, 0.1])
    bce_in = ([0.7, 0.2], [1, 0])
    br = composite_loss(bce_in, (p, t), (q, t))
    assert br.total == pytest.approx(bce_loss(*bce_in) + ranking_loss(p, t) + l1_loss(p, t)
                                     + ranking_loss(q, t) + l1_loss(q, t), abs=1e-12)
    # changing the temporal head leaves the spatial terms untouched
    other = composite_loss(bce_in, (p, t), (np.zeros(4), t))
    assert (other.bce, other.spatial_rank, other.spatial_l1) == (br.bce, br.spatial_rank, br.spatial_l1)
    only_bce = composite_loss(bce_in)
    assert only_bce.total == only_bce.bce


def test_flat_region_has_zero_derivative():
    t = encode_ideal_scores([0], 3)
    obj = RankingObjective(t)
    p = np.array([0.9, 0.1, 0.05])
    analytic, estimate = grad_check(obj, p, np.array([0.3, -0.2, 0.5]))
    assert analytic == 0.0 and abs(estimate) < 1e-9


def test_l1_directional_derivative_sign():
    t = encode_ideal_scores([0], 2)
    analytic, estimate = grad_check(L1Objective(t), [0.5, 0.2], [0.0, 1.0])
    assert analytic == 1.0 and estimate == pytest.approx(1.0, rel=1e-6)


def test_gradient_rejected_near_kink():
    t = encode_ideal_scores([0], 2)
    with pytest.raises(KinkProximityError):
        grad_check(RankingObjective(t), [0.3 + 1e-7, 0.0], [1.0, 0.0])


def test_combined_objective_gradient():
    rng = np.random.default_rng(3)
    t = encode_ideal_scores([4, 1, 2], 6)
    obj = OrderingObjective(t)
    for _ in range(50):
        p = rng.uniform(size=6)
        if obj.kink_distance(p) < 1e-3:
            continue
        a, e = grad_check(obj, p, rng.normal(size=6))
        assert a == pytest.approx(e, rel=1e-6, abs=1e-9)


def test_gradient_checks_pass_and_detect_a_broken_derivative():
    assert all(r.passed for r in check_gradients(seed=11, trials=200))
    broken = lambda obj, p: 1.01 * obj.grad(p)  # noqa: E731
    assert not all(r.passed for r in check_gradients(seed=11, trials=200, grad_override=broken))


def test_run_loss_checks_all_pass():
    results = run_loss_checks(seed=0, trials=100)
    assert results and all(r.passed for r in results), [r for r in results if not r.passed]


def test_ranking_grad_counts_violations():
    t = encode_ideal_scores([0], 3)
    g = ranking_loss_grad([0.4, 0.2, 0.3], t)
    assert g.tolist() == [-2.0, 1.0, 1.0]


def test_config_validation():
    with pytest.raises(ValueError):
        LossConfig(margin=-0.1)
    with pytest.raises(ValueError):
        LossConfig(bce_clamp=0.0)
