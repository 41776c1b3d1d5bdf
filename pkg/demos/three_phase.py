"""
Known n: observe, calibrate, then commit
========================================

The three-phase clusterer spends a prefix of the stream learning reference
centers offline, a second slice measuring how far points typically land
from them, and only then starts taking points. The default phase sizes
are meant for very large n; on a desk-sized stream they are overridden.
"""

import numpy as np

from onlinekm import (
    SQUARED_EUCLIDEAN,
    OfflineConfig,
    Rng,
    ThreePhaseClusterer,
    clustering_cost,
    gen_separated_blobs,
    offline_cluster,
    run_stream_blocked,
    uniform_permutation,
)

inst = gen_separated_blobs(3, [4000, 1500, 500], separation=12.0, spread=2.0, dim=2, rng=Rng(5))
X = inst.dataset.in_order(uniform_permutation(inst.n, Rng(5, 1)))

clusterer = ThreePhaseClusterer(inst.n, 3, OfflineConfig(), SQUARED_EUCLIDEAN, Rng(5, 2), alpha=0.05, alpha2=0.02)
trace = run_stream_blocked(clusterer, X)
print(f"phase sizes m1={clusterer.m1}, m2={clusterer.m2}; close cap per center {clusterer.close_threshold}")
print(f"calibrated radii r_max = {np.round(clusterer.r_max, 2)}")

reasons = [r.value for r in trace.reasons if r.value != "Skip"]
print(f"took {trace.n_centers} centers:", {r: reasons.count(r) for r in sorted(set(reasons))})

offline = offline_cluster(inst.dataset, 3, OfflineConfig(exact_threshold=0), SQUARED_EUCLIDEAN, Rng(0))
print(f"online cost {clustering_cost(inst.dataset, trace.centers):.1f} "
      f"vs offline 3-center cost {clustering_cost(inst.dataset, offline):.1f}")

# With the default constants this n leaves phase 2 empty: every radius is 0,
# so every later point that is not exactly on a reference center counts as far.
print("default phase sizes for n=6000 would be", 6000 // 300, "and", 6000 // (10**5 * 27))
