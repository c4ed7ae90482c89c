# %% [markdown]
# Exit search on tiny graphs
#
# Each vertex is tried as an entrance.  The search visits a vertex only once
# all of its parents are visited, and stops as soon as one vertex is left
# waiting.  Dead ends, edges back to the entrance and stranded vertices make
# it give up early.

# %%
from sbk.graph import DirectedMultigraph
from sbk.oracle import is_superbubble
from sbk.superbubble import DetectionState, enumerate_superbubbles, find_exit, visited_count

graphs = {
    "bubble": DirectedMultigraph.from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)]),
    "two-cycle": DirectedMultigraph.from_edges(2, [(0, 1), (1, 0)]),
    "tip": DirectedMultigraph.from_edges(4, [(0, 1), (0, 2), (2, 3)]),
    "chain of two": DirectedMultigraph.from_edges(
        7, [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6)]),
}

# %%
# Search from vertex 0 in each graph and say how it ended.
for name, g in graphs.items():
    state = DetectionState()
    t = find_exit(g, 0, state)
    outcome = f"exit {t}" if t is not None else f"no exit ({state.abort_reason.value})"
    print(f"{name:13s} from 0: {outcome}, visited {state.visited_order}")

# %%
# Full enumeration, with the brute-force verdict for each reported pair.
for name, g in graphs.items():
    state = DetectionState()
    found = enumerate_superbubbles(g, state)
    print(f"\n{name}: {len(found)} superbubble(s), {visited_count(state)} visits in total")
    for sb in found:
        verdict = is_superbubble(g, sb.entrance, sb.exit)
        print(f"  <{sb.entrance},{sb.exit}> interior={sorted(sb.interior)} oracle ok={verdict.ok}")

# %%
# The outer pair of the chain passes three conditions but not minimality,
# because 3 already closes a smaller superbubble from 0.
print("\n<0,6> in the chain:", is_superbubble(graphs["chain of two"], 0, 6).as_dict())
