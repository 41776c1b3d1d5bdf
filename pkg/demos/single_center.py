"""
One center, three ways
======================

With k = 1 the choice is which single arriving point to keep. Keeping the
first arrival works when the order is random. Keeping a pre-drawn position
works in any order but needs n. Guess-and-double needs neither, at the
price of a logarithmic number of centers.
"""

import numpy as np

from onlinekm import (
    SQUARED_EUCLIDEAN,
    AlgorithmSpec,
    Dataset,
    Rng,
    StreamOrder,
    compute_baseline,
    run_trial,
    uniform_permutation,
)

rng = np.random.default_rng(0)
data = Dataset(rng.normal(size=(150, 2)))
baseline = compute_baseline(data, 1, SQUARED_EUCLIDEAN)
print(f"opt_1 = {baseline.cost:.2f} ({baseline.kind.value})")

# Random arrival order: the first point is a uniformly random data point.
for name, params in (("first_point", {}), ("random_index", {}), ("doubling", {"c": 2.0})):
    ratios, counts = [], []
    for trial in range(300):
        order = uniform_permutation(data.n, Rng(1, trial).child(0))
        r = run_trial(data, order, AlgorithmSpec(name, params), SQUARED_EUCLIDEAN, Rng(1, trial).child(1), baseline=baseline)
        ratios.append(r.ratio)
        counts.append(r.centers_taken)
    print(f"{name:>12}: median ratio {np.median(ratios):.2f}, 90th pct {np.percentile(ratios, 90):.2f}, "
          f"centers {min(counts)}..{max(counts)}")

# An adversarial order: a lone outlier arrives first. Keeping the first
# arrival is then the worst possible choice; a pre-drawn position is not fooled.
outlier = Dataset(np.vstack([[[100.0, 100.0]], rng.normal(size=(99, 2))]))
given = StreamOrder.as_given(outlier.n)
opt = compute_baseline(outlier, 1, SQUARED_EUCLIDEAN)
first = run_trial(outlier, given, AlgorithmSpec("first_point"), SQUARED_EUCLIDEAN, Rng(0), baseline=opt)
picks = [run_trial(outlier, given, AlgorithmSpec("random_index"), SQUARED_EUCLIDEAN, Rng(2, t), baseline=opt).ratio
         for t in range(300)]
print(f"outlier first: first_point ratio {first.ratio:.3g}, random_index median ratio {np.median(picks):.3g}")
