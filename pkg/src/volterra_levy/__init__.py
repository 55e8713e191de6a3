"""Volterra processes driven by Levy noise: simulation, local times, and
regularization by noise of SDEs with distributional drift.

Modules
-------
kernels     Volterra kernels and their alpha-energies.
levy        Symmetric Levy noise models: exponents and increment samplers.
pathsim     Path simulation and characteristic-function checks.
lnd         Numerical probe of (alpha, zeta)-local non-determinism.
occupation  Occupation measures, local times and regularity estimators.
drift       Drift fields on a periodic lattice and spectral convolution.
young       Sewing, the non-linear Young Picard solver and the flow derivative.
cli         Experiment configs, campaigns and the command line.
"""

__version__ = "0.1.0"
