"""
Why arbitrary order forces many centers
=======================================

Each new point of the increasing-gaps sequence sits so far beyond its
predecessor that any center set without it costs more than c times the
optimum of the prefix. An algorithm that wants a c-approximation at every
prefix must therefore take every point.
"""

import itertools

from onlinekm import brute_force_opt, clustering_cost, gen_increasing_gaps, validate_increasing_gaps

c = 2.0
inst = gen_increasing_gaps(c, 10)
x = inst.values
print("points:", ", ".join(f"{v:.4g}" for v in x))
print("gap inequality holds:", validate_increasing_gaps(inst, c))

for t in range(3, len(x) + 1):
    prefix = x[:t].reshape(-1, 1)
    opt = brute_force_opt(prefix, 2).cost
    best_without_last = min(
        clustering_cost(prefix, prefix[list(s)])
        for size in (1, 2)
        for s in itertools.combinations(range(t - 1), size)
    )
    print(f"t={t:>2}: opt_2 = {opt:10.4g}, best 2 centers without x_t = {best_without_last:10.4g}, "
          f"ratio {best_without_last / opt:6.2f}")
