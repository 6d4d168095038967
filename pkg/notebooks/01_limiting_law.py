"""
The limiting spectral law
=========================

Density, distribution function and Stieltjes transforms of the
Marchenko-Pastur law, and the symmetrized version used by the bounds.
"""

# %%
import numpy as np

from mplab import MPLaw
from mplab.mp_law import mp_cdf_vec, mp_moment, mp_pdf, mp_stieltjes, mp_stieltjes_sym, sym_cdf

law = MPLaw(0.5)
print(f"y = {law.y}: support [{law.lower:.4f}, {law.upper:.4f}]")

# %% density and distribution function on a coarse grid
for x in np.linspace(0.0, 3.0, 13):
    print(f"x={x:5.2f}  pdf={mp_pdf(law, x):.5f}  cdf={mp_cdf_vec(law, x):.5f}")

# %% the first moments are 1, 1 and 1 + y
print([round(mp_moment(law, k), 12) for k in range(4)])

# %% both transforms solve their quadratics on the upper half-plane
z = 1.0 + 0.5j
S, s = mp_stieltjes(law, z), mp_stieltjes_sym(law, z)
y = law.y
print("S_y(z) =", S, " residual", abs(y * z * S * S + (y - 1 + z) * S + 1))
print("s_y(z) =", s, " residual", abs(y * s * s + (z + (y - 1) / z) * s + 1))
print("s_y(z) - z S_y(z^2) =", abs(s - z * mp_stieltjes(law, z * z)))

# %% the symmetrized law puts half of the mass on each sign
for x in (-1.5, -0.5, 0.0, 0.5, 1.5):
    print(f"G~({x:+.1f}) = {sym_cdf(law, x):.5f}")
