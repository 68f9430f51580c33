"""Inspect the ordering losses on a tiny four-class example."""
import numpy as np

from spatialqa import LossConfig, composite_loss, encode_ideal_scores, grad_check, l1_loss, ranking_loss
from spatialqa.loss_ref import OrderingObjective, ideal_ranking_loss

# Class 2 sounds first, then class 0; classes 1 and 3 are silent.
target = encode_ideal_scores([2, 0], 4)
print("ideal scores:", target.ideal)

for name, p in [("ideal", target.ideal),
                ("swapped", np.array([1.0, 0.0, 0.5, 0.0])),
                ("all zero", np.zeros(4))]:
    print(f"{name:>9}: ranking={ranking_loss(p, target):.3f}  l1={l1_loss(p, target):.3f}")

# Even the ideal scores pay a ranking penalty once neighbours sit closer than the margin.
print("\nranking loss of ideal scores, N=13:")
for M in range(1, 8):
    print(f"  M={M}: {ideal_ranking_loss(M, 13):.3f}")

total = composite_loss(([0.9, 0.2], [1, 0]), spatial=(target.ideal, target), temporal=(np.zeros(4), target))
print("\ncomposite breakdown:", {k: round(v, 4) for k, v in total.terms().items()}, "total", round(total.total, 4))

rng = np.random.default_rng(0)
obj = OrderingObjective(target, LossConfig())
p = rng.uniform(size=4)
analytic, estimate = grad_check(obj, p, rng.normal(size=4))
print(f"\ndirectional derivative: analytic {analytic:.6f} vs central difference {estimate:.6f}")
