"""Reference implementation of the composite QA training objective.

The objective is an unweighted sum of

* binary cross-entropy over class-presence and yes/no outputs,
* per ordering head (spatial, temporal): a pairwise margin ranking loss
  plus an L1 regression toward ideal ordering scores.

Ordering scores ``p`` live in [0, 1]; 0 marks an inactive class and a
larger value means an earlier position in the queried order. Everything
here is forward-only numpy plus hand-written piecewise-linear
(sub)gradients used by :func:`grad_check`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class KinkProximityError(ValueError):
    """Finite differences are meaningless this close to a non-smooth point."""


@dataclass(frozen=True)
class LossConfig:
    margin: float = 0.3
    bce_clamp: float = 1e-7

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        if not 0 < self.bce_clamp < 0.5:
            raise ValueError("bce_clamp must lie in (0, 0.5)")


@dataclass(frozen=True)
class OrderingScores:
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1:
            raise ValueError("ordering scores must be a vector")
        if np.any((p < 0) | (p > 1)):
            raise ValueError("ordering scores must lie in [0, 1]")
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class OrderingTarget:
    """Ground-truth ordering: active classes in order, the inactive rest, ideal scores."""

    active: tuple[int, ...]
    inactive: tuple[int, ...]
    ideal: np.ndarray

    @property
    def N(self) -> int:
        return len(self.ideal)

    @property
    def M(self) -> int:
        return len(self.active)


def encode_ideal_scores(order: Sequence[int], N: int) -> OrderingTarget:
    """Equally spaced ideal scores: the m-th of M active classes gets (M - m + 1) / M."""
    order = tuple(int(c) for c in order)
    if len(set(order)) != len(order):
        raise ValueError("ordering contains duplicate classes")
    if any(not 0 <= c < N for c in order):
        raise ValueError(f"class index outside 0..{N - 1}")
    M = len(order)
    ideal = np.zeros(N)
    for m, c in enumerate(order, start=1):
        ideal[c] = (M - m + 1) / M
    inactive = tuple(c for c in range(N) if c not in set(order))
    return OrderingTarget(order, inactive, ideal)


def _as_vector(p) -> np.ndarray:
    if isinstance(p, OrderingScores):
        return p.p
    return np.asarray(p, dtype=float)


def _ordered_pairs(target: OrderingTarget) -> tuple[np.ndarray, np.ndarray]:
    """(higher, lower) index pairs that carry a hinge term."""
    A = np.asarray(target.active, dtype=int)
    B = np.asarray(target.inactive, dtype=int)
    hi_ab, lo_ab = np.repeat(A, len(B)), np.tile(B, len(A))
    i, j = np.triu_indices(len(A), k=1)
    return np.concatenate([hi_ab, A[i]]), np.concatenate([lo_ab, A[j]])


def _pairs_cached(target: OrderingTarget):
    # frozen dataclass holding an ndarray is unhashable, so memoise on the instance
    pairs = target.__dict__.get("_pairs")
    if pairs is None:
        pairs = _ordered_pairs(target)
        object.__setattr__(target, "_pairs", pairs)
    return pairs


def ranking_margins(p, target: OrderingTarget, cfg: LossConfig = LossConfig()) -> np.ndarray:
    """``delta - (p_hi - p_lo)`` for every hinge pair."""
    p = _as_vector(p)
    hi, lo = _pairs_cached(target)
    return cfg.margin - (p[hi] - p[lo])


def ranking_loss(p, target: OrderingTarget, cfg: LossConfig = LossConfig()) -> float:
    return float(np.maximum(0.0, ranking_margins(p, target, cfg)).sum())


def ranking_loss_grad(p, target: OrderingTarget, cfg: LossConfig = LossConfig()) -> np.ndarray:
    p = _as_vector(p)
    hi, lo = _pairs_cached(target)
    violated = ranking_margins(p, target, cfg) > 0
    grad = np.zeros_like(p)
    np.add.at(grad, hi[violated], -1.0)
    np.add.at(grad, lo[violated], 1.0)
    return grad


def l1_loss(p, target: OrderingTarget) -> float:
    return float(np.abs(target.ideal - _as_vector(p)).sum())


def l1_loss_grad(p, target: OrderingTarget) -> np.ndarray:
    return np.sign(_as_vector(p) - target.ideal)


def bce_loss(q, y, cfg: LossConfig = LossConfig()) -> float:
    """Mean binary cross-entropy with probabilities clamped to [eps, 1 - eps]."""
    q = np.clip(np.asarray(q, dtype=float), cfg.bce_clamp, 1.0 - cfg.bce_clamp)
    y = np.asarray(y, dtype=float)
    if q.shape != y.shape:
        raise ValueError("probabilities and labels must have the same shape")
    if q.size == 0:
        return 0.0
    return float(np.mean(-(y * np.log(q) + (1.0 - y) * np.log1p(-q))))


def ideal_ranking_loss(M: int, N: int, margin: float = 0.3) -> float:
    """Closed-form ranking loss of the ideal encoding itself.

    Active class m scores (M - m + 1) / M, so the k-th lowest active score
    is k / M and two actives d positions apart differ by d / M.
    """
    if M == 0:
        return 0.0
    vs_inactive = (N - M) * sum(max(0.0, margin - k / M) for k in range(1, M + 1))
    among_active = sum((M - d) * max(0.0, margin - d / M) for d in range(1, M))
    return vs_inactive + among_active


@dataclass(frozen=True)
class LossBreakdown:
    bce: float
    spatial_rank: float
    spatial_l1: float
    temporal_rank: float
    temporal_l1: float

    @property
    def spatial(self) -> float:
        return self.spatial_rank + self.spatial_l1

    @property
    def temporal(self) -> float:
        return self.temporal_rank + self.temporal_l1

    @property
    def total(self) -> float:
        return self.bce + self.spatial_rank + self.spatial_l1 + self.temporal_rank + self.temporal_l1

    def terms(self) -> dict[str, float]:
        return {
            "bce": self.bce, "spatial_rank": self.spatial_rank, "spatial_l1": self.spatial_l1,
            "temporal_rank": self.temporal_rank, "temporal_l1": self.temporal_l1,
        }


def composite_loss(
    bce_inputs: tuple,
    spatial: Optional[tuple] = None,
    temporal: Optional[tuple] = None,
    cfg: LossConfig = LossConfig(),
) -> LossBreakdown:
    """Total loss with its per-term breakdown.

    ``bce_inputs`` is ``(q, y)``; ``spatial``/``temporal`` are
    ``(p, target)`` pairs, or ``None`` when the question type does not
    use that ordering head.
    """
    terms = {"bce": bce_loss(*bce_inputs, cfg=cfg)}
    for name, head in (("spatial", spatial), ("temporal", temporal)):
        if head is None:
            terms[f"{name}_rank"] = terms[f"{name}_l1"] = 0.0
        else:
            p, target = head
            terms[f"{name}_rank"] = ranking_loss(p, target, cfg)
            terms[f"{name}_l1"] = l1_loss(p, target)
    return LossBreakdown(**terms)


# ---------------------------------------------------------------------------
# Objectives with analytic derivatives, for finite-difference checking

@dataclass(frozen=True)
class RankingObjective:
    target: OrderingTarget
    cfg: LossConfig = LossConfig()

    def __call__(self, p) -> float:
        return ranking_loss(p, self.target, self.cfg)

    def grad(self, p) -> np.ndarray:
        return ranking_loss_grad(p, self.target, self.cfg)

    def kink_distance(self, p) -> float:
        margins = ranking_margins(p, self.target, self.cfg)
        return float(np.min(np.abs(margins))) if margins.size else np.inf


@dataclass(frozen=True)
class L1Objective:
    target: OrderingTarget

    def __call__(self, p) -> float:
        return l1_loss(p, self.target)

    def grad(self, p) -> np.ndarray:
        return l1_loss_grad(p, self.target)

    def kink_distance(self, p) -> float:
        return float(np.min(np.abs(_as_vector(p) - self.target.ideal)))


@dataclass(frozen=True)
class OrderingObjective:
    """Ranking plus L1 for one ordering head."""

    target: OrderingTarget
    cfg: LossConfig = LossConfig()

    def __call__(self, p) -> float:
        return ranking_loss(p, self.target, self.cfg) + l1_loss(p, self.target)

    def grad(self, p) -> np.ndarray:
        return ranking_loss_grad(p, self.target, self.cfg) + l1_loss_grad(p, self.target)

    def kink_distance(self, p) -> float:
        return min(RankingObjective(self.target, self.cfg).kink_distance(p),
                   L1Objective(self.target).kink_distance(p))


def grad_check(loss_fn, point, direction, h: float = 1e-5, grad_fn=None) -> tuple[float, float]:
    """Analytic directional derivative and its central-difference estimate.

    ``loss_fn`` must expose ``grad`` (unless ``grad_fn`` is given) and
    ``kink_distance``. Points within ``10 h`` of a kink, scaled by the
    direction's largest component, are rejected.
    """
    p = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    scale = max(1.0, float(np.max(np.abs(d)))) if d.size else 1.0
    gap = loss_fn.kink_distance(p)
    if gap <= 10 * h * scale:
        raise KinkProximityError(f"point is {gap:.3g} from a kink; need more than {10 * h * scale:.3g}")
    grad = (grad_fn or loss_fn.grad)(p)
    analytic = float(grad @ d)
    estimate = (loss_fn(p + h * d) - loss_fn(p - h * d)) / (2 * h)
    return analytic, float(estimate)


def derivatives_agree(analytic: float, estimate: float, rtol: float = 1e-6, atol: float = 1e-9) -> bool:
    if analytic == 0.0:
        return abs(estimate) <= atol
    return abs(analytic - estimate) <= rtol * abs(analytic)
