"""Where does local nondeterminism start?

The probe compares int_s^t psi(k(t, r) xi) dr with |xi|^alpha (t - s)^zeta
over shrinking windows.  For the Riemann-Liouville kernel the smallest
admissible zeta is H alpha; the constant kernel gives 1.
"""

from volterra_levy.kernels import Constant, Exponential, FractionalRL, LogSingular
from volterra_levy.levy import StableIso
from volterra_levy.lnd import LndProbeConfig, min_admissible_zeta

cfg = LndProbeConfig()
for kernel, alpha in [(Constant(), 1.5), (Exponential(1.0), 1.5), (FractionalRL(0.25, 1.2), 1.2),
                      (FractionalRL(0.75, 1.8), 1.8)]:
    zmin = min_admissible_zeta(kernel, StableIso(alpha), alpha, cfg)
    print(f"{kernel.id:32s} alpha={alpha}: zeta_min = {zmin:.4f}")

# the logarithmic kernel is admissible at every zeta tried
ls = LogSingular(1.5, 1.5, 0.5)
for lo in (0.5, 0.2, 0.05):
    print(f"{ls.id} from {lo}: {min_admissible_zeta(ls, StableIso(1.5), 1.5, cfg, interval=(lo, 2.0))}")
