"""Driving noise families: characteristic exponents and increment samplers.

Every model is symmetric with a real characteristic exponent ``psi`` such that
``E exp(i <xi, L_t>) = exp(-t psi(xi))``.

Stable variates come from the Chambers-Mallows-Stuck transform.  Isotropic
stable vectors in ``d > 1`` use the sub-Gaussian construction: the square root
of a positive (alpha/2)-stable amplitude times an independent Gaussian vector.
The log-modified family has no closed sampler and is drawn from a tabulated
radial distribution function obtained by Fourier inversion.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate, optimize

from .errors import ConfigurationError, DomainError

_LOG2 = np.log(2.0)


class LevyModel:
    """Base class for a symmetric Levy noise in ``R^dim``."""

    dim = 1

    @property
    def id(self):
        raise NotImplementedError

    @property
    def stable(self):
        """True when ``psi(c xi) = c^alpha psi(xi)`` for ``c > 0``."""
        return True

    def psi(self, xi):
        """Characteristic exponent at ``xi`` of shape ``(..., dim)``."""
        raise NotImplementedError

    def log_psi_scaled(self, log_k, xi):
        """``log psi(exp(log_k) * xi)`` for an array ``log_k`` and one vector ``xi``.

        Used by the kernel quadratures, where ``k`` may be astronomically
        large near the diagonal.
        """
        base = self.psi(np.asarray(xi, dtype=float))
        with np.errstate(divide="ignore"):
            return np.log(base) + self.alpha * np.asarray(log_k, dtype=float)

    def sample(self, dt, rng, size):
        """``size`` increments over a step ``dt``, shape ``(size, dim)``."""
        raise NotImplementedError


def _check_dim(dim):
    if int(dim) != dim or dim < 1:
        raise ConfigurationError("dim must be a positive integer")


@dataclass(frozen=True)
class BrownianIso(LevyModel):
    """Brownian motion with ``psi(xi) = sigma^2 |xi|^2 / 2``."""

    sigma: float = 1.0
    dim: int = 1

    def __post_init__(self):
        _check_dim(self.dim)
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be positive")

    alpha = 2.0

    @property
    def id(self):
        return f"brownian(sigma={self.sigma:g},d={self.dim})"

    @property
    def c_alpha(self):
        return 0.5 * self.sigma**2

    def psi(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.c_alpha * np.sum(xi**2, axis=-1)

    def sample(self, dt, rng, size):
        return self.sigma * np.sqrt(dt) * rng.standard_normal((size, self.dim))


@dataclass(frozen=True)
class StableIso(LevyModel):
    """Rotation-invariant alpha-stable noise, ``psi(xi) = c_alpha |xi|^alpha``."""

    alpha: float = 1.5
    c_alpha: float = 1.0
    dim: int = 1

    def __post_init__(self):
        _check_dim(self.dim)
        if not 0.0 < self.alpha <= 2.0:
            raise ConfigurationError("alpha must lie in (0, 2]")
        if not self.c_alpha > 0:
            raise ConfigurationError("c_alpha must be positive")

    @property
    def id(self):
        return f"stable_iso(alpha={self.alpha:g},c={self.c_alpha:g},d={self.dim})"

    def psi(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.c_alpha * np.linalg.norm(xi, axis=-1) ** self.alpha

    def sample(self, dt, rng, size):
        scale = (self.c_alpha * dt) ** (1.0 / self.alpha)
        if self.dim == 1:
            return scale * sample_stable_1d(self.alpha, rng, size)[:, None]
        # sub-Gaussian: sqrt(A) G with E exp(-lam A) = exp(-lam^(alpha/2)), G ~ N(0, 2 I)
        g = np.sqrt(2.0) * rng.standard_normal((size, self.dim))
        if self.alpha == 2.0:
            return scale * g
        amp = sample_positive_stable(0.5 * self.alpha, rng, size)
        return scale * np.sqrt(amp)[:, None] * g


@dataclass(frozen=True)
class StableComponentwise(LevyModel):
    """Independent 1-d stable coordinates, ``psi(xi) = c_alpha sum |xi_i|^alpha``."""

    alpha: float = 1.5
    c_alpha: float = 1.0
    dim: int = 1

    def __post_init__(self):
        _check_dim(self.dim)
        if not 0.0 < self.alpha <= 2.0:
            raise ConfigurationError("alpha must lie in (0, 2]")
        if not self.c_alpha > 0:
            raise ConfigurationError("c_alpha must be positive")

    @property
    def id(self):
        return f"stable_comp(alpha={self.alpha:g},c={self.c_alpha:g},d={self.dim})"

    def psi(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.c_alpha * np.sum(np.abs(xi) ** self.alpha, axis=-1)

    def sample(self, dt, rng, size):
        scale = (self.c_alpha * dt) ** (1.0 / self.alpha)
        draws = sample_stable_1d(self.alpha, rng, size * self.dim)
        return scale * draws.reshape(size, self.dim)


@dataclass(frozen=True)
class StableLogModified(LevyModel):
    """``psi(xi) = |xi|^alpha ln(2 + |xi|)`` with ``0 < alpha < 1``.

    Not self-similar, so increments are drawn from a table built per step
    size.  Supported for ``dim <= 3``.
    """

    alpha: float = 0.5
    dim: int = 1

    def __post_init__(self):
        _check_dim(self.dim)
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError("StableLogModified needs alpha in (0, 1)")

    @property
    def id(self):
        return f"stable_logmod(alpha={self.alpha:g},d={self.dim})"

    @property
    def stable(self):
        return False

    def psi(self, xi):
        r = np.linalg.norm(np.asarray(xi, dtype=float), axis=-1)
        return r**self.alpha * np.log(2.0 + r)

    def log_psi_scaled(self, log_k, xi):
        r = float(np.linalg.norm(np.asarray(xi, dtype=float)))
        log_k = np.asarray(log_k, dtype=float)
        if r == 0.0:
            return np.full_like(log_k, -np.inf)
        y = log_k + np.log(r)
        return self.alpha * y + np.log(np.logaddexp(_LOG2, y))

    def sample(self, dt, rng, size):
        if self.dim > 3:
            raise NotImplementedError("log-modified sampler supports dim <= 3")
        table = _logmod_radial_table(float(self.alpha), float(dt))
        radius = table.sample(rng, size)
        # uniform direction on S^2, then project onto the first dim axes
        u = rng.standard_normal((size, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return radius[:, None] * u[:, : self.dim]


def char_exponent(model, xi):
    """``psi(xi)`` for one vector or an array of shape ``(..., dim)``."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        xi = xi[None]
    if xi.shape[-1] != model.dim:
        raise DomainError(f"xi has dimension {xi.shape[-1]}, model has {model.dim}")
    return model.psi(xi)


def sample_stable_1d(alpha, rng, size=None):
    """Symmetric standard alpha-stable draws, ``E exp(i xi X) = exp(-|xi|^alpha)``.

    Chambers-Mallows-Stuck.  ``alpha = 2`` gives ``N(0, 2)``.
    """
    if not 0.0 < alpha <= 2.0:
        raise DomainError("alpha must lie in (0, 2]")
    n = 1 if size is None else size
    v = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, n)
    w = rng.standard_exponential(n)
    if alpha == 1.0:
        x = np.tan(v)
    else:
        x = (
            np.sin(alpha * v)
            / np.cos(v) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)
        )
    return float(x[0]) if size is None else x


def sample_positive_stable(a, rng, size):
    """Totally skewed positive a-stable draws, ``E exp(-lam A) = exp(-lam^a)``, ``0 < a < 1``.

    Kanter's representation.
    """
    if not 0.0 < a < 1.0:
        raise DomainError("a must lie in (0, 1)")
    u = rng.uniform(0.0, np.pi, size)
    w = rng.standard_exponential(size)
    return (
        np.sin(a * u)
        / np.sin(u) ** (1.0 / a)
        * (np.sin((1.0 - a) * u) / w) ** ((1.0 - a) / a)
    )


def sample_increment(model, dt, rng, size=None):
    """Increment(s) ``L_{t+dt} - L_t``.

    Returns a ``dim``-vector, or an array ``(size, dim)`` when ``size`` is given.
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    out = model.sample(dt, rng, 1 if size is None else size)
    return out[0] if size is None else out


class _RadialTable:
    """Distribution of ``|X|`` for a 3-d isotropic law, in units of ``scale``."""

    def __init__(self, r, cdf, alpha, scale):
        self.scale = scale
        self.alpha = alpha
        self.r_lo, self.r_hi = r[0], r[-1]
        self.g_lo, self.g_hi = cdf[0], cdf[-1]
        self._inv = interpolate.PchipInterpolator(cdf, np.log(r))

    def sample(self, rng, size):
        q = rng.uniform(0.0, 1.0, size)
        out = np.empty(size)
        mid = (q >= self.g_lo) & (q <= self.g_hi)
        out[mid] = np.exp(self._inv(q[mid]))
        low = q < self.g_lo
        # the density is smooth at the origin, so G(r) ~ r^3 there
        out[low] = self.r_lo * (q[low] / self.g_lo) ** (1.0 / 3.0)
        high = q > self.g_hi
        # Pareto tail matching the heavy tail of index alpha
        out[high] = self.r_hi * ((1.0 - q[high]) / (1.0 - self.g_hi)) ** (-1.0 / self.alpha)
        return self.scale * out


@lru_cache(maxsize=32)
def _logmod_radial_table(alpha, dt, n=300, r_min=1e-3, r_max=1e4):
    # work in r' = r / s with dt psi(1/s) = 1; phi is the ch.f. in rho' = s rho
    v = optimize.brentq(lambda v: np.log(dt) + alpha * v + np.log(np.log(2.0 + np.exp(v))), -200.0, 200.0)
    s = np.exp(-v)
    norm = np.log(2.0 + 1.0 / s)

    def phi(rho):
        return np.exp(-(rho**alpha) * np.log(2.0 + rho / s) / norm)

    # phi < 1e-18 beyond rho_max
    rho_max = 1.0
    while rho_max**alpha * np.log(2.0 + rho_max / s) / norm < 42.0:
        rho_max *= 2.0

    def radial_cdf(x):
        # G(x) = (2/pi) int phi(rho) (sin(x rho)/rho - x cos(x rho)) drho; the
        # kernel is ~ x^3 rho^2 / 3 at the origin, oscillatory further out
        def near(rho):
            u = x * rho
            kern = np.where(u < 1e-3, u**3 / 3.0 - u**5 / 30.0, np.sin(u) - u * np.cos(u))
            return phi(rho) * kern / np.maximum(rho, 1e-300)

        rho1 = min(rho_max, 20.0 * np.pi / x)
        total, _ = integrate.quad(near, 0.0, rho1, epsabs=1e-12, epsrel=1e-10, limit=400)
        if rho1 < rho_max:
            a, _ = integrate.quad(lambda p: phi(p) / p, rho1, rho_max, weight="sin", wvar=x,
                                  epsabs=1e-12, limit=2000)
            b, _ = integrate.quad(phi, rho1, rho_max, weight="cos", wvar=x,
                                  epsabs=1e-12, limit=2000)
            total += a - x * b
        return 2.0 / np.pi * total

    r = np.geomspace(r_min, r_max, n)
    cdf = np.array([radial_cdf(x) for x in r])
    cdf = np.clip(np.maximum.accumulate(cdf), 0.0, 1.0)
    keep = np.concatenate([[True], np.diff(cdf) > 1e-14])
    return _RadialTable(r[keep], cdf[keep], alpha, s)


def model_from_spec(spec):
    """Build a model from a dict such as ``{"kind": "stable_iso", "alpha": 1.5}``."""
    spec = dict(spec)
    kind = spec.pop("kind")
    classes = {
        "brownian": BrownianIso,
        "stable_iso": StableIso,
        "stable_comp": StableComponentwise,
        "stable_logmod": StableLogModified,
    }
    if kind not in classes:
        raise ConfigurationError(f"unknown model kind {kind!r}")
    return classes[kind](**spec)
