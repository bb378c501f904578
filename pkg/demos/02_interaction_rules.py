# %% [markdown]
# # Pairwise interaction rules
#
# Two agents with opinions in [-1, 1] compromise with strength gamma times
# P(x, y) and each receives bounded noise scaled by the diffusion
# D(w) = sqrt(1 - w^2). The controlled rule adds a penalised push away
# from the current mean, applied only where the update stays admissible.

# %%
import numpy as np

from graphon_opinion import interaction as I

w, w_star = 0.6, -0.2
print("noise-free:", I.binary_update(w, w_star, 0.3, 0.7, gamma=0.25, P=I.CompromiseFunction()))
print("mean shift:", I.pairwise_mean_shift(w, w_star, 0.3, 0.7, gamma=0.25, P=I.CompromiseFunction()))

# %% [markdown]
# Noise must satisfy |eta| <= ell so that noisy updates cannot leave the
# interval; the admissible bound is computed on a grid.

# %%
print("admissible noise on [-1, 1]:", I.admissible_noise_bound())
print("admissible noise on [-0.5, 0.5]:", I.admissible_noise_bound(lo=-0.5, hi=0.5))

# %% [markdown]
# The control acts only inside the selection interval. Outside it the
# opinion is left unchanged.

# %%
m, gamma, nu = 0.0, 0.5, 0.4
lo, hi = I.selection_interval(m, gamma, nu)
grid = np.linspace(-1, 1, 9)
print("selection interval:", (lo, hi))
print("controlled:", np.round(I.controlled_update(grid, m, gamma, nu), 4))
