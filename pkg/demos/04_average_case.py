# %% [markdown]
# Why the search is cheap on average
#
# In a graph where a vertex has a single parent with probability p and i
# children with probability p_i, the region explored from an entrance grows
# like a branching process with mean offspring r = p * sum(i * p_i).  When
# r < 1 its expected size is 1 / (1 - r), independent of the graph size.

# %%
from sbk.randgen import (BranchingModel, estimate_model_from_graph, expected_tree_size,
                         gw_summary, random_unipath_like, simulate_gw_sizes)
from sbk.superbubble import DetectionState, enumerate_superbubbles, visited_count

for r in (0.3, 0.5, 0.77, 0.9):
    model = BranchingModel(r / 1.5, {1: 0.5, 2: 0.5})
    s = gw_summary(model, simulate_gw_sizes(model, 200_000, seed=1))
    print(f"r={r:.2f}: simulated mean {s['mean']:.3f} +- {s['stderr']:.3f}, "
          f"1/(1-r) = {s['expected']:.3f}")

# %%
# On random graphs shaped like compacted assembly graphs the visits per
# vertex stay flat as n grows.
for n in (10_000, 100_000, 1_000_000):
    g = random_unipath_like(n, seed=3)
    model = estimate_model_from_graph(g)
    state = DetectionState()
    enumerate_superbubbles(g, state)
    print(f"n={n:>9}: estimated r={model.r:.3f}, visits/n={visited_count(state) / n:.3f}, "
          f"bound {expected_tree_size(model):.3f}")
