# %% [markdown]
# # Uncontrolled model and its Beta-shaped steady state
#
# With no control and a constant kernel, the opinion law relaxes to a
# Beta-type density whose shape is set by lam = sigma^2 / gamma and the
# conserved mean. We simulate a small ensemble and measure the KS distance.

# %%
from graphon_opinion import beta_equilibrium, preset, run

cfg = preset("uncontrolled-beta", n_agents=10_000, epsilon=1e-2)
res = run(cfg)
first, last = res.initial, res.frames[-1]
print(f"steps={len(res.frames)}  mean {first.mean:.4f} -> {last.mean:.4f}")
print(f"variance {first.variance:.4f} -> {last.variance:.4f}  KS={last.ks_vs_oracle:.4f}")

# %% [markdown]
# The oracle also gives moments in closed form and by quadrature, which
# should agree to round-off.

# %%
q = beta_equilibrium(cfg.sigma2_value / cfg.gamma, first.mean)
print("closed-form variance", q.variance, " quadrature", q.moment_quad(2) - q.moment_quad(1) ** 2)
print("empirical variance  ", last.variance)
