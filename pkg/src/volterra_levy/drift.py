"""Drift fields on a periodic lattice and the spectral convolution ``b * Lbar``.

A drift is stored by its torus Fourier coefficients

    b_hat_n = int b(x) exp(-i xi_n x) dx,    b(x) = L^-d sum_n b_hat_n exp(i xi_n x),

on the dual of a ``Lattice``, so that ``sum (1+|xi|^2)^beta |b_hat|^2 dxi^d / (2 pi)^d``
is its ``H^beta`` norm, with the same normalization as ``occupation.sobolev_norm``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LatticeMismatchError
from .occupation import LocalTimeField, SpectralField, histogram_fourier
from .rng import stream

EPS_PAD = 0.05


def _axis_shape(k, d, m):
    sh = [1] * d
    sh[k] = m
    return sh


def _xi_norm2(lattice):
    fa = lattice.freq_axis() ** 2
    out = fa
    for _ in range(lattice.d - 1):
        out = np.add.outer(out, fa)
    return out


def to_spatial(coeffs, lattice):
    """Values at the cell centres of the field with torus coefficients ``coeffs``."""
    x0 = lattice.origin + 0.5 * lattice.dx
    c = np.asarray(coeffs, dtype=complex)
    ph = np.exp(1j * lattice.freq_axis() * x0)
    for k in range(lattice.d):
        c = c * ph.reshape(_axis_shape(k, lattice.d, lattice.M))
    return np.fft.ifftn(c) * (lattice.M / lattice.L) ** lattice.d


def to_coefficients(values, lattice):
    """Inverse of ``to_spatial`` for samples at the cell centres."""
    x0 = lattice.origin + 0.5 * lattice.dx
    c = np.fft.fftn(np.asarray(values)) * lattice.dx**lattice.d
    ph = np.exp(-1j * lattice.freq_axis() * x0)
    for k in range(lattice.d):
        c = c * ph.reshape(_axis_shape(k, lattice.d, lattice.M))
    return c


def spectral_gradient(coeffs, lattice):
    """Gradient at the cell centres, shape ``(M,)*d + (d,)``, by spectral differentiation."""
    fa = lattice.freq_axis()
    parts = []
    for k in range(lattice.d):
        parts.append(to_spatial(1j * fa.reshape(_axis_shape(k, lattice.d, lattice.M)) * coeffs, lattice).real)
    return np.stack(parts, axis=-1)


@dataclass(eq=False)
class SpectralDrift:
    """Real drift field given by Hermitian torus coefficients on ``lattice``."""

    lattice: object
    coefficients: np.ndarray
    beta_target: float = np.nan
    seed: int = None
    norm_target: float = np.nan

    def spatial(self):
        return to_spatial(self.coefficients, self.lattice).real

    def imaginary_residue(self):
        return float(np.abs(to_spatial(self.coefficients, self.lattice).imag).max())

    def sobolev_norm(self, beta):
        """Lattice ``H^beta`` norm."""
        lat = self.lattice
        w = (1 + _xi_norm2(lat)) ** beta
        return float(np.sqrt(np.sum(w * np.abs(self.coefficients) ** 2) / lat.L**lat.d))

    def scaled(self, c):
        return SpectralDrift(self.lattice, c * self.coefficients, self.beta_target, self.seed,
                             abs(c) * self.norm_target)


def _index_order(nmax, d):
    """Half-space index vectors with ``max |n_i| <= nmax``, ordered by shell then lexicographically.

    The order is a prefix of the order for any larger ``nmax``, so draws made in
    this order agree on shared modes across lattices.
    """
    out = []
    for shell in range(1, nmax + 1):
        rng = np.arange(-shell, shell + 1)
        grid = np.stack(np.meshgrid(*([rng] * d), indexing="ij"), axis=-1).reshape(-1, d)
        on_shell = np.abs(grid).max(axis=1) == shell
        grid = grid[on_shell]
        # keep the representative whose first nonzero entry is positive
        first = grid[np.arange(grid.shape[0]), np.argmax(grid != 0, axis=1)]
        out.append(grid[first > 0])
    return np.concatenate(out) if out else np.zeros((0, d), dtype=int)


def synth_besov_drift(beta, d, lattice, seed, amplitude=1.0):
    """Random drift with ``b_hat_n = A L^(d/2) a_n (1 + |xi_n|^2)^(-(beta + d/2 + 0.05)/2)``.

    ``a_n`` are standard complex Gaussians (real at ``n = 0``), Hermitian
    symmetrized, drawn in an order that does not depend on the lattice size:
    lattices with the same side ``L`` share their common modes.  Nyquist modes
    are set to zero.  ``norm_target`` is the expected lattice ``H^beta`` norm,
    ``A (sum_n (1 + |xi_n|^2)^(-d/2 - 0.05))^(1/2)`` over the retained modes.
    """
    if lattice.d != d:
        raise LatticeMismatchError("lattice dimension differs from d")
    M = lattice.M
    nmax = (M - 1) // 2
    rng = stream(seed, 0, "drift")
    a0 = rng.standard_normal()
    idx = _index_order(nmax, d)
    draws = rng.standard_normal((idx.shape[0], 2)) / np.sqrt(2.0)
    a = np.zeros((M,) * d, dtype=complex)
    a[(0,) * d] = a0
    vals = draws[:, 0] + 1j * draws[:, 1]
    pos = tuple(np.mod(idx, M).T)
    neg = tuple(np.mod(-idx, M).T)
    a[pos] = vals
    a[neg] = np.conj(vals)
    xi2 = _xi_norm2(lattice)
    expo = -(beta + 0.5 * d + EPS_PAD) / 2
    coeffs = amplitude * lattice.L ** (d / 2) * a * (1 + xi2) ** expo
    b = SpectralDrift(lattice, coeffs, beta, seed)
    # target: the expected lattice norm, E|a_n|^2 = 1 on every retained mode
    mask = np.abs(a) > 0
    mask[(0,) * d] = True
    w = (1 + xi2) ** (beta + 2 * expo)
    b.norm_target = float(amplitude * np.sqrt(np.sum(w[mask])))
    return b


def drift_from_function(f, lattice, beta_target=np.nan):
    """Deterministic drift from a vectorized ``f`` of points ``(..., d)`` sampled at cell centres."""
    vals = f(lattice.mesh())
    return SpectralDrift(lattice, to_coefficients(vals, lattice), beta_target)


def cosine_drift(lattice, freq=1.0, amp=1.0, axis=0):
    return drift_from_function(lambda x: amp * np.cos(freq * x[..., axis]), lattice, np.inf)


def sine_drift(lattice, freq=1.0, amp=1.0, axis=0):
    return drift_from_function(lambda x: amp * np.sin(freq * x[..., axis]), lattice, np.inf)


def gaussian_bump_drift(lattice, width=1.0, amp=1.0):
    return drift_from_function(
        lambda x: amp * np.exp(-0.5 * np.sum(x**2, axis=-1) / width**2), lattice, np.inf
    )


def constant_drift(lattice, c):
    coeffs = np.zeros((lattice.M,) * lattice.d, dtype=complex)
    coeffs[(0,) * lattice.d] = c * lattice.L**lattice.d
    return SpectralDrift(lattice, coeffs, np.inf)


def _mu_hat(L, lattice):
    if isinstance(L, LocalTimeField):
        if L.lattice != lattice:
            raise LatticeMismatchError("local time and drift live on different lattices")
        return histogram_fourier(L).values
    if isinstance(L, SpectralField):
        lat = L.freq.lattice
        if lat is None or lat != lattice:
            raise LatticeMismatchError("spectral field is not on the drift's lattice dual")
        return L.values
    raise TypeError("L must be a LocalTimeField or a SpectralField")


def convolve_spectral(b, L):
    """``(b * Lbar)(x) = int b(x + y) L(y) dy`` at the cell centres.

    In frequency this is ``b_hat(xi) mu_hat(xi)``, where ``mu_hat`` is the
    transform of the occupation measure; the reflection ``Lbar(y) = L(-y)``
    is what turns the ``exp(-i)`` of the drift into the ``exp(+i)`` of ``mu_hat``.
    """
    mu = _mu_hat(L, b.lattice)
    return to_spatial(b.coefficients * mu, b.lattice).real


def convolve_coefficients(b, L):
    """Torus coefficients of ``b * Lbar``."""
    return b.coefficients * _mu_hat(L, b.lattice)


def _torus_shifts(lattice, max_shift):
    m = min(lattice.M // 2, max_shift)
    r = np.arange(-m, m + 1)
    sh = np.stack(np.meshgrid(*([r] * lattice.d), indexing="ij"), axis=-1).reshape(-1, lattice.d)
    return sh[np.any(sh != 0, axis=1)]


def _diff_quotient_sup(f, lattice, expo, max_shift):
    """``sup |f(x + h) - f(x)| / |h|^expo`` over lattice shifts ``h``; ``f`` may carry a trailing vector axis."""
    best = 0.0
    axes = tuple(range(lattice.d))
    for h in _torus_shifts(lattice, max_shift):
        g = np.roll(f, shift=tuple(-h), axis=axes)
        diff = g - f
        if diff.ndim > lattice.d:
            diff = np.linalg.norm(diff, axis=-1)
        dist = np.linalg.norm(h) * lattice.dx
        best = max(best, float(np.abs(diff).max()) / dist**expo)
    return best


def holder_spatial_norm(field, theta, lattice, max_shift=256):
    """Lattice ``C^theta`` norm of a real field at the cell centres.

    ``theta <= 1``: ``sup|f| + sup |f(x) - f(y)| / |x - y|^theta``.
    ``1 < theta <= 2``: ``sup|f| + sup|grad f| + sup |grad f(x) - grad f(y)| / |x - y|^(theta-1)``,
    with the gradient taken spectrally.  Shifts up to ``max_shift`` cells per
    axis are scanned (all of them on lattices with ``M <= 2 max_shift``).
    """
    f = np.asarray(field, dtype=float)
    if not 0 < theta <= 2:
        raise DomainError("theta must lie in (0, 2]")
    sup = float(np.abs(f).max())
    if theta <= 1:
        return sup + _diff_quotient_sup(f, lattice, theta, max_shift)
    grad = spectral_gradient(to_coefficients(f, lattice), lattice)
    gsup = float(np.linalg.norm(grad, axis=-1).max())
    return sup + gsup + _diff_quotient_sup(grad, lattice, theta - 1, max_shift)
