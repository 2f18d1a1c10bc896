"""
Pruning labels before inference
===============================

One-vs-all auxiliary problems on a small random grid. Each target label
gets a two-label min-cut problem; nodes where that cut lands on the target
are fixed for good, and the union of the fixes shrinks the search space.
"""

import numpy as np

from partopt import GeneratorSpec, generate, check_persistency, enumerate_minimizers
from partopt.kovtun import constraint_from_results, one_vs_all_runs
from partopt.lp import solve_lp

f = generate(GeneratorSpec(6, 3, 0.4, 10, "random", 18))
print(f.space.node_count, "nodes,", f.space.edge_count, "edges")

runs = one_vs_all_runs(f)
for r in runs:
    print("target", r.target, "fixes", r.fixed_labels())

constraint = constraint_from_results(f.space, runs)
sizes = np.array([len(a) for a in constraint.as_lists()])
print("labels left per node:", sizes)
print("search space", 3 ** f.space.node_count, "->", int(np.prod(sizes)))

# the brute force optimum agrees with every fix
best = enumerate_minimizers(f)
print("optimum", best.value, "at", best.meet)
print("oracle verdict:", check_persistency(f, constraint).name)

# pruned pairs can be forbidden in the LP without changing its value
pruned = [(s, i) for s in range(6) for i in range(3) if i not in constraint.as_lists()[s]]
print("LP value", solve_lp(f).value, "pruned LP value", solve_lp(f, forbidden=pruned).value)
