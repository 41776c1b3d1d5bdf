"""
How many centers do the unknown-n rules take?
=============================================

The max-distance rule (k = 2) keeps every arrival that is farther from the
first point than anything before it. The farthest-first rule keeps every
arrival that lands in the greedy k-spread set of all points seen so far.
Both counts grow like log n in random order; here they are measured
next to the harmonic reference.
"""

import numpy as np

from onlinekm import harmonic_reference, run_experiment

for n in (100, 1000, 10000):
    blobs = {"generator": "separated_blobs",
             "params": {"k": 3, "per_cluster": n // 3 + (n % 3 > 0), "separation": 10.0, "spread": 2.0, "dim": 2, "seed": 1}}
    md = run_experiment({"algorithm": {"name": "max_distance"}, "instance": blobs, "trials": 100, "seed": 2})
    print(f"n={md.rows[0].n:>6}  max_distance mean {md.aggregates['centers_taken']['mean']:6.2f}"
          f"  (1 + H_(n-1) = {harmonic_reference(md.rows[0].n, 1):6.2f})")

# The farthest-first rule recomputes a traversal per arrival, so keep n modest.
for n in (300, 1500):
    blobs = {"generator": "separated_blobs",
             "params": {"k": 3, "per_cluster": n // 3, "separation": 10.0, "spread": 2.0, "dim": 2, "seed": 1}}
    fft = run_experiment({"algorithm": {"name": "fft", "params": {"k": 3}}, "instance": blobs, "trials": 60, "seed": 3})
    counts = np.array([r.centers_taken for r in fft.rows])
    # with the traversal anchored at the first arrival, arrival i > k joins it
    # with probability (k - 1) / (i - 1), which gives this expectation
    anchored = 3 + 2 * sum(1.0 / (i - 1) for i in range(4, n + 1))
    print(f"n={n:>6}  fft mean {counts.mean():6.2f}  (anchored expectation {anchored:6.2f}, "
          f"k + k(H_n - H_k) = {harmonic_reference(n, 3):6.2f})")
