"""
How fast does the ESD approach the law?
=======================================

Pool many Rademacher samples at each size, measure the Kolmogorov
distance of the pooled ESD to the limit and fit a power law in n.
"""

# %%
import numpy as np

from mplab import EnsembleConfig, MPLaw
from mplab.bounds import esd_distance_to_law
from mplab.experiments import estimate_expected_esd, run_rate_experiment
from mplab.ensemble import sample_matrix
from mplab.spectral import spectral_sample

config = EnsembleConfig(64, 128, "rademacher", trials=100, base_seed=1)
law = MPLaw(config.y)

# %% a single sample is far noisier than the pooled estimate
single = spectral_sample(sample_matrix(config, 0))
pooled = estimate_expected_esd(config)
print("one sample :", esd_distance_to_law(single, law))
print("100 pooled :", esd_distance_to_law(pooled, law))

# %% distances over a grid of sizes and the log-log fit
fit = run_rate_experiment(config, [64, 128, 256, 512])
print(fit.to_csv())
print(f"slope {fit.slope:.3f}, R^2 {fit.r_squared:.3f}, constant {fit.constant:.3f}")

# %% n * Delta_n should stay roughly flat if the rate is 1/n
print(np.array(fit.n_grid) * np.array(fit.delta_estimates))
