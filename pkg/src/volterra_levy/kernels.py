"""Volterra kernel families and their alpha-energies.

All implemented kernels are of convolution type, ``k(t, s) = k(t - s)``, and
nonnegative.  The central quantity is the alpha-energy

    E_alpha(s, t) = int_s^t |k(t, r)|^alpha dr = int_0^{t-s} k(u)^alpha du,

which fixes the law of ``int k dL`` for alpha-stable noise and drives both the
path simulator and the local non-determinism probe.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .quadrature import adaptive_quad


class VolterraKernel:
    """Base class: a convolution kernel ``k(u)`` of the lag ``u = t - s``.

    Subclasses provide the pointwise kernel, a closed-form cumulative energy
    where one exists, and a change of variables ``u <-> e`` (with Jacobian
    ``du/de``) that flattens the kernel's singularity at ``u = 0`` for
    quadrature.
    """

    T_max = 1.0
    singular = False

    @property
    def id(self):
        raise NotImplementedError

    def lag(self, u):
        raise NotImplementedError

    def closed_energy(self, alpha, u):
        """``int_0^u k^alpha``, or ``None`` when no closed form is known."""
        return None

    # change of variables used by the quadrature; identity by default
    def to_energy_var(self, u):
        return np.asarray(u, dtype=float)

    def from_energy_var(self, e):
        return np.asarray(e, dtype=float)

    def jacobian(self, u):
        return np.ones_like(np.asarray(u, dtype=float))

    # log-space versions keep the quadrature finite when u underflows
    def log_from_energy_var(self, e):
        with np.errstate(divide="ignore"):
            return np.log(self.from_energy_var(e))

    def log_lag(self, log_u):
        with np.errstate(divide="ignore"):
            return np.log(self.lag(np.exp(log_u)))

    def log_jacobian(self, log_u):
        with np.errstate(divide="ignore"):
            return np.log(self.jacobian(np.exp(log_u)))

    def log_energy_density(self, alpha, log_u):
        """``log(k(u)^alpha du/de)``, the integrand of ``int k^alpha`` in the energy variable."""
        return alpha * self.log_lag(log_u) + self.log_jacobian(log_u)

    def energy_exists(self, alpha):
        return True


@dataclass(frozen=True)
class Constant(VolterraKernel):
    """``k = 1``: the Volterra process is the Levy process itself."""

    T_max: float = 1.0

    @property
    def id(self):
        return "constant"

    def lag(self, u):
        return np.ones_like(np.asarray(u, dtype=float))

    def closed_energy(self, alpha, u):
        return np.asarray(u, dtype=float)


@dataclass(frozen=True)
class FractionalRL(VolterraKernel):
    """Riemann-Liouville kernel ``k(u) = u^(H - 1/alpha_ref)``.

    With alpha-stable noise of index ``alpha_ref`` this gives the fractional
    alpha-stable process; ``alpha_ref = 2`` with Brownian noise gives the
    Riemann-Liouville fractional Brownian motion.
    """

    H: float = 0.5
    alpha_ref: float = 2.0
    T_max: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.H < 1.0:
            raise ConfigurationError("H must lie in (0, 1)")
        if not 0.0 < self.alpha_ref <= 2.0:
            raise ConfigurationError("alpha_ref must lie in (0, 2]")

    @property
    def exponent(self):
        return self.H - 1.0 / self.alpha_ref

    @property
    def singular(self):
        return self.exponent < 0

    @property
    def id(self):
        return f"fractional(H={self.H:g},alpha_ref={self.alpha_ref:g})"

    def lag(self, u):
        return np.asarray(u, dtype=float) ** self.exponent

    def _energy_power(self, alpha):
        return self.exponent * alpha + 1.0

    def energy_exists(self, alpha):
        return self._energy_power(alpha) > 0

    def closed_energy(self, alpha, u):
        c = self._energy_power(alpha)
        if c <= 0:
            raise DomainError(f"kernel is not in L^{alpha}: energy exponent {c:g} <= 0")
        return np.asarray(u, dtype=float) ** c / c

    def to_energy_var(self, u):
        c = self.H * self.alpha_ref
        return np.asarray(u, dtype=float) ** c / c

    def from_energy_var(self, e):
        c = self.H * self.alpha_ref
        return (c * np.asarray(e, dtype=float)) ** (1.0 / c)

    def jacobian(self, u):
        return np.asarray(u, dtype=float) ** (1.0 - self.H * self.alpha_ref)


@dataclass(frozen=True)
class Exponential(VolterraKernel):
    """Ornstein-Uhlenbeck kernel ``k(u) = exp(-a u)``."""

    a: float = 1.0
    T_max: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigurationError("Exponential kernel needs a > 0")

    @property
    def id(self):
        return f"exponential(a={self.a:g})"

    def lag(self, u):
        return np.exp(-self.a * np.asarray(u, dtype=float))

    def closed_energy(self, alpha, u):
        rate = self.a * alpha
        return -np.expm1(-rate * np.asarray(u, dtype=float)) / rate


@dataclass(frozen=True)
class LogSingular(VolterraKernel):
    """``k(u) = u^(-1/alpha_ref) * ln(1/u)^(-p)`` on ``0 < u < T_max < 1``.

    The kernel is ``L^alpha_ref``-integrable when ``p * alpha_ref > 1``, and
    its energy decays only logarithmically, so the resulting process is
    (alpha, zeta)-LND for every zeta > 0.
    """

    p: float = 1.5
    alpha_ref: float = 2.0
    T_max: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.alpha_ref <= 2.0:
            raise ConfigurationError("alpha_ref must lie in (0, 2]")
        if not self.p * self.alpha_ref > 1.0:
            raise ConfigurationError("LogSingular kernel needs p > 1/alpha_ref")
        if not 0.0 < self.T_max < 1.0:
            raise ConfigurationError("LogSingular kernel needs T_max < 1")

    singular = True

    @property
    def id(self):
        return f"logsingular(p={self.p:g},alpha_ref={self.alpha_ref:g})"

    def lag(self, u):
        u = np.asarray(u, dtype=float)
        return u ** (-1.0 / self.alpha_ref) * np.log(1.0 / u) ** (-self.p)

    def energy_exists(self, alpha):
        return alpha < self.alpha_ref or (alpha == self.alpha_ref)

    def closed_energy(self, alpha, u):
        if alpha > self.alpha_ref:
            raise DomainError(f"kernel is not in L^{alpha} for alpha > alpha_ref")
        if alpha != self.alpha_ref:
            return None
        b = self.p * alpha
        with np.errstate(divide="ignore"):
            return np.log(1.0 / np.asarray(u, dtype=float)) ** (1.0 - b) / (b - 1.0)

    # e = E_{alpha_ref}(u); u(e) inverts the closed form above
    def to_energy_var(self, u):
        b = self.p * self.alpha_ref
        with np.errstate(divide="ignore"):
            return np.log(1.0 / np.asarray(u, dtype=float)) ** (1.0 - b) / (b - 1.0)

    def from_energy_var(self, e):
        b = self.p * self.alpha_ref
        e = np.asarray(e, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.exp(-(((b - 1.0) * e) ** (1.0 / (1.0 - b))))

    def jacobian(self, u):
        b = self.p * self.alpha_ref
        u = np.asarray(u, dtype=float)
        return u * np.log(1.0 / u) ** b

    def log_from_energy_var(self, e):
        b = self.p * self.alpha_ref
        with np.errstate(divide="ignore", over="ignore"):
            return -(((b - 1.0) * np.asarray(e, dtype=float)) ** (1.0 / (1.0 - b)))

    def log_lag(self, log_u):
        return -log_u / self.alpha_ref - self.p * np.log(-log_u)

    def log_jacobian(self, log_u):
        return log_u + self.p * self.alpha_ref * np.log(-log_u)

    def log_energy_density(self, alpha, log_u):
        # du/de = k^-alpha_ref exactly; forming the difference first avoids
        # cancelling two huge terms when log_u is far below -1e15
        return (alpha - self.alpha_ref) * self.log_lag(log_u)


def _check_times(kernel, t, s, allow_diagonal):
    if t > kernel.T_max * (1 + 1e-12):
        raise DomainError(f"t={t} exceeds the kernel horizon T_max={kernel.T_max}")
    if s < 0:
        raise DomainError("s must be nonnegative")
    if s > t or (s == t and not allow_diagonal):
        raise DomainError(f"need s < t, got s={s}, t={t}")


def eval_kernel(kernel, t, s):
    """Return ``k(t, s)``.

    Kernels with a finite limit on the diagonal (Constant, Exponential, and
    FractionalRL with ``H >= 1/alpha_ref``) also accept ``s == t``.
    """
    _check_times(kernel, t, s, allow_diagonal=not kernel.singular)
    return float(kernel.lag(t - s)) if t > s else float(kernel.lag(0.0))


def integrate_lag(kernel, alpha, length, rtol=1e-11):
    """``int_0^length k(u)^alpha du``.

    The integral is taken in the kernel's energy variable, which absorbs the
    leading singularity of ``k(u)^alpha_ref``; the adaptive stage resolves the
    rest.  The integrand is assembled in log space.
    """
    if length <= 0:
        return 0.0
    e_max = float(kernel.to_energy_var(length))

    def h(e):
        log_u = kernel.log_from_energy_var(e)
        out = np.zeros_like(log_u)
        ok = np.isfinite(log_u)
        out[ok] = np.exp(kernel.log_energy_density(alpha, log_u[ok]))
        return out

    val, _ = adaptive_quad(h, 0.0, e_max, rtol=rtol)
    return val


def lag_energy(kernel, alpha, u):
    """Cumulative energy ``int_0^u k(v)^alpha dv`` for an array of lags."""
    u = np.asarray(u, dtype=float)
    closed = kernel.closed_energy(alpha, u)
    if closed is not None:
        return np.asarray(closed, dtype=float)
    if not kernel.energy_exists(alpha):
        raise DomainError(f"kernel is not in L^{alpha}")
    flat = u.ravel()
    out = np.array([integrate_lag(kernel, alpha, x) for x in flat])
    return out.reshape(u.shape)


def kernel_alpha_energy(kernel, alpha, s, t):
    """``int_s^t |k(t, r)|^alpha dr``."""
    if not 0 < alpha <= 2:
        raise DomainError("alpha must lie in (0, 2]")
    _check_times(kernel, t, s, allow_diagonal=False)
    return float(lag_energy(kernel, alpha, t - s))


def quadrature_alpha_energy(kernel, alpha, s, t, rtol=1e-11):
    """Same as ``kernel_alpha_energy`` but always by quadrature."""
    _check_times(kernel, t, s, allow_diagonal=False)
    return integrate_lag(kernel, alpha, t - s, rtol=rtol)


def cell_energies(kernel, alpha, t, grid):
    """Energy of each cell ``[s_j, s_{j+1}]`` of ``grid`` seen from target ``t``."""
    grid = np.asarray(grid, dtype=float)
    lags = t - grid
    if kernel.closed_energy(alpha, 1e-3 * kernel.T_max) is not None:
        cum = lag_energy(kernel, alpha, np.maximum(lags, 0.0))
        return cum[:-1] - cum[1:]
    # no closed form: integrate cell by cell, lag interval [t - s_{j+1}, t - s_j]
    out = np.empty(grid.size - 1)
    f = lambda v: kernel.lag(v) ** alpha  # noqa: E731
    for j in range(grid.size - 1):
        lo, hi = max(lags[j + 1], 0.0), lags[j]
        if lo == 0.0:
            out[j] = integrate_lag(kernel, alpha, hi)
        else:
            out[j] = adaptive_quad(f, lo, hi, rtol=1e-12, geometric=False)[0]
    return out


def cell_averaged_weights(kernel, alpha, t, grid):
    """Energy-matched weights, one per cell of ``grid``.

    ``w_j = (E_j / (s_{j+1} - s_j))^(1/alpha)`` where ``E_j`` is the
    alpha-energy of the cell seen from target time ``t``; hence
    ``sum_j w_j^alpha (s_{j+1} - s_j)`` equals the energy of ``[0, t]``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing with at least two points")
    if grid[0] < 0 or grid[-1] > t * (1 + 1e-12):
        raise DomainError("grid must lie inside [0, t]")
    if not 0 < alpha <= 2:
        raise DomainError("alpha must lie in (0, 2]")
    if t > kernel.T_max * (1 + 1e-12):
        raise DomainError(f"t={t} exceeds the kernel horizon T_max={kernel.T_max}")
    energies = np.maximum(cell_energies(kernel, alpha, t, grid), 0.0)
    return (energies / np.diff(grid)) ** (1.0 / alpha)


def kernel_from_spec(spec):
    """Build a kernel from a plain dict such as ``{"kind": "fractional", "H": 0.3}``."""
    spec = dict(spec)
    kind = spec.pop("kind")
    classes = {
        "constant": Constant,
        "fractional": FractionalRL,
        "exponential": Exponential,
        "logsingular": LogSingular,
    }
    if kind not in classes:
        raise ConfigurationError(f"unknown kernel kind {kind!r}")
    return classes[kind](**spec)
