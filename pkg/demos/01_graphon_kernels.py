# %% [markdown]
# # Graphon kernels
#
# Each kernel maps a pair of network labels in [0, 1] to an interaction
# weight. The simulator needs three numbers from a kernel: its sup (for the
# acceptance step), its in-degree profile and, for unbounded kernels, a
# truncation level.

# %%
import numpy as np

from graphon_opinion import (
    ConstantGraphon, KNNGraphon, PowerLawGraphon, SmallWorldGraphon, step_graphon, truncate,
)

kernels = {
    "constant": ConstantGraphon(1.0),
    "power-law": PowerLawGraphon(9 / 16, 0.25),
    "small-world": SmallWorldGraphon(0.125),
    "knn": KNNGraphon(0.125, 0.75),
}
x = np.array([0.05, 0.25, 0.5, 0.75, 0.95])
for name, g in kernels.items():
    print(f"{name:12s} d(x) =", np.round(g.in_degree(x), 4))

# %% [markdown]
# The power-law kernel blows up at the origin. Its L1 norm stays finite, but
# the sup does not, so the Monte Carlo step works with min(B, 4) instead.

# %%
pl = kernels["power-law"]
print("L1 norm:", pl.p_norm(1.0))
cut = truncate(pl, 4.0)
print("truncated sup:", cut.sup(), " degree at x=0.01:", cut.in_degree(0.01), "vs", pl.in_degree(0.01))

# %% [markdown]
# A finite graph enters through its adjacency matrix as a step kernel.

# %%
ring = np.roll(np.eye(6), 1, axis=1) + np.roll(np.eye(6), -1, axis=1)
g = step_graphon(ring)
print("ring-of-6 degree:", g.in_degree(0.3), " symmetric:", g.eval(0.1, 0.9) == g.eval(0.9, 0.1))
