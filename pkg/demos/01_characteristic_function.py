"""Simulate Volterra-Levy paths and check the law of z_t.

For a kernel k and Levy noise with exponent psi, z_t = int_0^t k(t, s) dL_s
has characteristic function exp(-int_0^t psi(k(t, s) xi) ds).  We simulate
an ensemble, estimate E exp(i xi z_t) and compare with the quadrature value.
"""

import numpy as np

from volterra_levy.kernels import FractionalRL
from volterra_levy.levy import StableIso
from volterra_levy.pathsim import char_function_mc_array, char_function_theory, simulate_ensemble, uniform_grid

H, alpha = 0.4, 1.5
kernel, model = FractionalRL(H, alpha), StableIso(alpha)
grid = uniform_grid(1.0, 128)
z = simulate_ensemble(kernel, model, grid, seed=1, replicas=20000)

print(f"fractional {alpha}-stable process, H = {H}, {z.shape[0]} replicas")
print(f"{'xi':>6} {'MC':>9} {'theory':>9} {'closed':>9} {'z':>6}")
for xi in (0.25, 0.5, 1.0, 2.0):
    est, se = char_function_mc_array(z[:, -1], [xi])
    th = char_function_theory(kernel, model, [xi], 1.0).real
    # for this kernel the exponent is |xi|^alpha t^(H alpha) / (H alpha)
    closed = np.exp(-xi**alpha / (H * alpha))
    print(f"{xi:6.2f} {est.real:9.5f} {th:9.5f} {closed:9.5f} {(est.real - th) / se.real:6.2f}")
