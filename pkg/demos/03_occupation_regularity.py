"""Regularity of the occupation measure.

Rougher paths spend less time at each level, so the Fourier transform of
their occupation measure decays faster.  We fit the decay exponent kappa
for a few fractional stable processes and compare with 1/(2H) - 1/2.
At this step size the estimates sit somewhat above the ceiling, most
visibly for the roughest path; the ordering in H is the robust part.
"""

import numpy as np

from volterra_levy.kernels import FractionalRL
from volterra_levy.levy import StableIso
from volterra_levy.occupation import estimate_spatial_regularity, estimate_time_regularity
from volterra_levy.pathsim import simulate_ensemble, uniform_grid

grid = uniform_grid(1.0, 2**12)
lags = 1.0 / 2.0 ** np.arange(1, 7)
for seed, H in enumerate((0.25, 0.4, 0.6)):
    ens = (grid, simulate_ensemble(FractionalRL(H, 1.5), StableIso(1.5), grid, seed, 200))
    sp = estimate_spatial_regularity(ens, 0.0, 1.0)
    tr = estimate_time_regularity(ens, 0.25, lags)
    print(f"H={H}: kappa_hat {sp.kappa_hat:.3f} [{sp.ci[0]:.3f}, {sp.ci[1]:.3f}]  "
          f"ceiling {1 / (2 * H) - 0.5:.3f}  gamma_hat {tr.gamma_hat:.3f}")
