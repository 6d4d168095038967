"""
Transform errors, the smoothing bound and truncation
====================================================

The distance is controlled through Stieltjes transforms.  This script
looks at the transform error on the region G, evaluates the smoothing
bound for one sample, and checks the effect of truncating rare entries.
"""

# %%
from mplab import EnsembleConfig, EntryDistribution, MPLaw
from mplab.bounds import SmoothingParams, smoothing_rhs_for_sample, stieltjes_error_envelope
from mplab.experiments import run_stieltjes_experiment, run_truncation_experiment
from mplab.ensemble import sample_matrix
from mplab.spectral import spectral_sample

law = MPLaw(0.5)
config = EnsembleConfig(128, 256, trials=100, base_seed=3)

# %% error of the averaged transform at a few points, for two sizes
zs = [1 + 0.5j, 1 + 0.1j, 0.5 + 0.05j]
table = run_stieltjes_experiment(config, zs, [128, 512])
print(table.to_csv())
for z, ratios in table.decay_ratios().items():
    print(z, [round(r, 3) for _, _, r in ratios])

# %% the envelope with C = 1: the first term halves when n doubles
for n in (128, 256, 512):
    print(n, stieltjes_error_envelope(1 + 0.5j, n, law, 1.0))

# %% smoothing bound on one sample against the measured distance
params = SmoothingParams.for_law(law, 128)
report = smoothing_rhs_for_sample(spectral_sample(sample_matrix(config, 0)), law, params)
print(dict(zip(report.to_dict()["term_names"], report.to_dict()["terms"])))
print(f"total {report.total:.4f} >= measured {report.measured_delta:.4f}: {report.holds}")

# %% a rare large atom: about 3 entries per matrix exceed n^(1/4)
n, p = 128, 256
rare = EnsembleConfig(n, p, EntryDistribution("two_point", 3.0 / (n * p)), 1.0, 20, 4)
trunc = run_truncation_experiment(rare)
print(trunc.to_csv())
print("rank bound holds:", trunc.bai_holds, " interlacing holds:", trunc.interlacing_holds)
