"""Seeded invariant and gradient checks for the loss reference."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .loss_ref import (
    L1Objective,
    LossConfig,
    RankingObjective,
    composite_loss,
    derivatives_agree,
    encode_ideal_scores,
    grad_check,
    ideal_ranking_loss,
    l1_loss,
    ranking_loss,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def random_target(rng: np.random.Generator, n_classes: int):
    M = int(rng.integers(0, n_classes + 1))
    return encode_ideal_scores(rng.permutation(n_classes)[:M].tolist(), n_classes)


def kink_free_point(objective, rng, n_classes: int, h: float = 1e-5, max_tries: int = 1000):
    """Uniform random scores at least 100 h away from every kink."""
    for _ in range(max_tries):
        p = rng.uniform(0.0, 1.0, size=n_classes)
        if objective.kink_distance(p) > 100 * h:
            return p
    raise RuntimeError("could not find a kink-free point")


def check_gradients(
    seed: int,
    trials: int,
    cfg: LossConfig = LossConfig(),
    n_classes: int = 13,
    grad_override: Optional[Callable] = None,
) -> list[CheckResult]:
    """Directional derivatives of the ranking and L1 losses vs central differences.

    ``grad_override(objective, p)`` replaces the analytic gradient; it
    exists so a deliberately broken derivative can be shown to fail.
    """
    rng = np.random.default_rng(seed)
    results = []
    for label, make in (("ranking", lambda t: RankingObjective(t, cfg)), ("l1", L1Objective)):
        worst, failures = 0.0, 0
        for _ in range(trials):
            obj = make(random_target(rng, n_classes))
            p = kink_free_point(obj, rng, n_classes)
            d = rng.normal(size=n_classes)
            d /= np.max(np.abs(d))
            grad_fn = None if grad_override is None else (lambda x, o=obj: grad_override(o, x))
            analytic, estimate = grad_check(obj, p, d, grad_fn=grad_fn)
            if not derivatives_agree(analytic, estimate):
                failures += 1
            if analytic != 0.0:
                worst = max(worst, abs(analytic - estimate) / abs(analytic))
        results.append(CheckResult(
            f"gradient[{label}] x{trials}", failures == 0,
            f"failures={failures} max_rel_err={worst:.2e}",
        ))
    return results


def check_closed_forms(cfg: LossConfig = LossConfig(), n_classes: int = 13) -> list[CheckResult]:
    results = []
    t = encode_ideal_scores([0], 3)
    default = cfg.margin == 0.3
    if default:
        cases = [
            ("ranking p=[.8,.1,0]", ranking_loss([0.8, 0.1, 0.0], t, cfg), 0.0),
            ("ranking p=[.4,.2,.3]", ranking_loss([0.4, 0.2, 0.3], t, cfg), 0.3),
            ("l1 p=[.8,.1,0]", l1_loss([0.8, 0.1, 0.0], t), 0.3),
            ("l1 p=0 vs [1,.5,0]", l1_loss([0, 0, 0], encode_ideal_scores([0, 1], 3)), 1.5),
        ]
        for name, got, want in cases:
            results.append(CheckResult(f"closed form {name}", abs(got - want) <= 1e-12, f"{got!r} vs {want!r}"))

    worst = 0.0
    for M in range(n_classes + 1):
        for order in itertools.islice(itertools.permutations(range(n_classes), M), 200):
            target = encode_ideal_scores(order, n_classes)
            got = ranking_loss(target.ideal, target, cfg)
            worst = max(worst, abs(got - ideal_ranking_loss(M, n_classes, cfg.margin)))
    results.append(CheckResult("ideal scores match closed form", worst <= 1e-12, f"max_abs_err={worst:.2e}"))
    return results


def check_properties(seed: int, trials: int, cfg: LossConfig = LossConfig(), n_classes: int = 13) -> list[CheckResult]:
    rng = np.random.default_rng(seed + 1)
    convex_ok = perm_ok = sum_ok = True
    for _ in range(trials):
        target = random_target(rng, n_classes)
        p, q = rng.uniform(size=n_classes), rng.uniform(size=n_classes)
        s = rng.uniform()
        lhs = l1_loss(s * p + (1 - s) * q, target)
        if lhs > s * l1_loss(p, target) + (1 - s) * l1_loss(q, target) + 1e-12:
            convex_ok = False

        perm = rng.permutation(n_classes)  # class c is relabelled perm[c]
        relabelled = encode_ideal_scores([int(perm[c]) for c in target.active], n_classes)
        p_rel = np.empty_like(p)
        p_rel[perm] = p
        for f in (lambda x, t: ranking_loss(x, t, cfg), l1_loss):
            if abs(f(p, target) - f(p_rel, relabelled)) > 1e-12:
                perm_ok = False

        y = rng.integers(0, 2, size=n_classes + 2)
        br = composite_loss((rng.uniform(size=n_classes + 2), y), (p, target), (q, target), cfg)
        if br.total != sum(br.terms().values()) or min(br.terms().values()) < 0:
            sum_ok = False
    return [
        CheckResult("l1 convexity", convex_ok),
        CheckResult("permutation equivariance", perm_ok),
        CheckResult("composite breakdown sums to total", sum_ok),
    ]


def run_loss_checks(
    seed: int = 0,
    trials: int = 1000,
    cfg: LossConfig = LossConfig(),
    n_classes: int = 13,
    grad_override: Optional[Callable] = None,
) -> list[CheckResult]:
    return (
        check_closed_forms(cfg, n_classes)
        + check_properties(seed, trials, cfg, n_classes)
        + check_gradients(seed, trials, cfg, n_classes, grad_override)
    )


def format_results(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  result  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.detail}")
    return "\n".join(lines)
