# %% [markdown]
# From reads to superbubbles
#
# Three short reads share most of their sequence.  Two of them differ at one
# base (A vs C), which opens a bubble, and the third starts differently,
# which leaves a second source.  With k = 5 and every k-mer kept (d = 1) the
# compacted graph has four vertices and one size-2 superbubble.

# %%
from sbk.debruijn import build_debruijn, count_kmers, solid_kmers
from sbk.stats import path_stats, size_histogram
from sbk.superbubble import enumerate_superbubbles
from sbk.unipath import compact

reads = ["ACGTTAGCAT", "ACGTTCGCAT", "TCGTTAGCAT"]
k, d = 5, 1

# %%
table = count_kmers(reads, k)
dbg = build_debruijn(solid_kmers(table, d), k)
print(f"{len(table)} distinct {k}-mers -> de Bruijn graph with "
      f"{dbg.graph.vertex_count} vertices, {dbg.graph.edge_count} edges")

# %%
ug = compact(dbg.graph, dbg.node_names)
print("unipath graph:")
for e in ug.graph.edges():
    print(f"  {ug.names[e.source]} -> {ug.names[e.target]}  label {e.label}")

# %%
bubbles = enumerate_superbubbles(ug.graph)
for sb in bubbles:
    ps = path_stats(ug.graph, sb)
    print(f"superbubble {ug.names[sb.entrance]} -> {ug.names[sb.exit]}: size {sb.size}, "
          f"paths {ps.shortest}..{ps.longest} bases")
print("size histogram:", {b: c for b, c in size_histogram(bubbles).items() if c})
