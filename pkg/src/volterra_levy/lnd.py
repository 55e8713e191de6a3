"""Numerical probe of (alpha, zeta)-local non-determinism.

The condition asks that

    lim_{t -> 0} inf_{s, xi} int_s^t psi(k(t, r) xi) dr / ((t - s)^zeta |xi|^alpha) > 0.

For convolution kernels the ratio depends on ``s, t`` only through the window
``u = t - s``, so the limit is a statement about the ratio as ``u -> 0``.  A
grid reaching ``u ~ 1e-20`` together with the log-log slope of the windowed
minimum over the smallest decades decides the limit: a positive slope means
the ratio vanishes like a power of ``u`` and the infimum is 0.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NotFoundError
from .pathsim import integrate_psi
from .rng import stream


@dataclass
class LndProbeConfig:
    """Probe grids.

    Windows are ``u = f * t`` for ``t`` in ``t_grid`` and ``f`` in
    ``s_fractions`` (so ``s = t - u``).  Frequencies are ``r * v`` for radii
    ``r`` and unit directions ``v``; radii below ``small_radius`` are kept out
    of the headline infimum and reported separately.
    """

    t_grid: np.ndarray = field(default_factory=lambda: np.geomspace(0.25, 1e-20, 39))
    s_fractions: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.5, 0.1]))
    xi_radii: np.ndarray = field(default_factory=lambda: np.geomspace(1e-2, 1e4, 7))
    directions: np.ndarray = None
    zeta: float = 1.0
    alpha: float = 2.0
    small_radius: float = 1.0
    slope_decades: float = 3.0
    slope_tol: float = 2e-4
    n_random_dirs: int = 8
    seed: int = 0

    def __post_init__(self):
        self.t_grid = np.sort(np.asarray(self.t_grid, dtype=float))[::-1]
        self.s_fractions = np.asarray(self.s_fractions, dtype=float)
        self.xi_radii = np.asarray(self.xi_radii, dtype=float)
        if self.t_grid.size == 0 or self.s_fractions.size == 0 or self.xi_radii.size == 0:
            raise DomainError("probe grids must be nonempty")
        if np.any(self.t_grid <= 0) or np.any(self.xi_radii <= 0):
            raise DomainError("horizons and radii must be positive")
        if np.any(self.s_fractions <= 0) or np.any(self.s_fractions > 1):
            raise DomainError("s_fractions must lie in (0, 1]")
        if not self.zeta > 0:
            raise DomainError("zeta must be positive")
        if not 0 < self.alpha <= 2:
            raise DomainError("alpha must lie in (0, 2]")

    def direction_set(self, dim):
        if self.directions is not None:
            v = np.atleast_2d(np.asarray(self.directions, dtype=float))
            return v / np.linalg.norm(v, axis=1, keepdims=True)
        if dim == 1:
            return np.ones((1, 1))
        g = stream(self.seed, 0, "probe").standard_normal((self.n_random_dirs, dim))
        return np.vstack([np.eye(dim), g / np.linalg.norm(g, axis=1, keepdims=True)])


@dataclass
class LndResult:
    infimum: float
    argmin: dict
    slope: float
    grid_min: float
    small_radius_inf: float
    per_t: np.ndarray

    def __iter__(self):
        # unpacks as (infimum, argmin)
        return iter((self.infimum, self.argmin))


def lnd_ratio(kernel, model, s, t, xi, zeta, alpha):
    """``int_s^t psi(k(t, r) xi) dr / ((t - s)^zeta |xi|^alpha)``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if not 0 <= s < t:
        raise DomainError("need 0 <= s < t")
    if t > kernel.T_max * (1 + 1e-12):
        raise DomainError(f"t={t} exceeds T_max={kernel.T_max}")
    r = np.linalg.norm(xi)
    if r == 0:
        raise DomainError("xi must be nonzero")
    return integrate_psi(kernel, model, xi, t - s) / ((t - s) ** zeta * r**alpha)


class _NumeratorTable:
    """``int_0^u psi(k xi)`` on the probe grid; independent of zeta, so reused by bisection."""

    def __init__(self, kernel, model, config):
        self.kernel, self.model = kernel, model
        t = config.t_grid[config.t_grid <= kernel.T_max * (1 + 1e-12)]
        if t.size == 0:
            raise DomainError("no probe horizon lies below the kernel horizon")
        self.t = t
        self.fracs = config.s_fractions
        self.radii = config.xi_radii
        self.dirs = config.direction_set(model.dim)
        u = t[:, None] * self.fracs[None, :]
        self.u = u
        num = np.empty(u.shape + (self.radii.size, self.dirs.shape[0]))
        for idx in np.ndindex(u.shape):
            for ir, rad in enumerate(self.radii):
                for iv, v in enumerate(self.dirs):
                    num[idx + (ir, iv)] = integrate_psi(kernel, model, rad * v, u[idx])
        self.num = num

    def ratios(self, zeta, alpha):
        denom = self.u[:, :, None, None] ** zeta * self.radii[None, None, :, None] ** alpha
        return self.num / denom


def _infimum_from_table(table, config, zeta, alpha):
    ratio = table.ratios(zeta, alpha)
    big = table.radii >= config.small_radius
    if not np.any(big):
        big = np.ones_like(big)
    main = ratio[:, :, big, :]
    # minimum over frequency per window, and the running infimum over u <= t
    per_window = main.reshape(main.shape[0], main.shape[1], -1).min(axis=-1)
    u = table.u.ravel()
    m = per_window.ravel()
    order = np.argsort(u)
    u, m = u[order], m[order]
    sel = u <= u[0] * 10.0**config.slope_decades
    if sel.sum() >= 2:
        slope = float(np.polyfit(np.log(u[sel]), np.log(m[sel]), 1)[0])
    else:
        slope = 0.0
    per_t = np.array([[t, main[table.t <= t].min()] for t in table.t])
    grid_min = float(main.min())
    flat = np.unravel_index(np.argmin(np.where(table.t[:, None, None, None] <= table.t[-1], main, np.inf)), main.shape)
    it, jf, ir, iv = flat
    radii = table.radii[big]
    t_best = table.t[it]
    u_best = table.u[it, jf]
    argmin = {"t": t_best, "s": t_best - u_best, "xi": radii[ir] * table.dirs[iv]}
    if slope > config.slope_tol:
        inf = 0.0
    else:
        inf = float(per_t[-1, 1])
    small = ratio[:, :, ~big, :]
    small_inf = float(small.min()) if small.size else np.nan
    return LndResult(inf, argmin, slope, grid_min, small_inf, per_t)


def _refine(kernel, model, result, zeta, alpha, table):
    """One local pass: re-evaluate the ratio between grid neighbours of the argmin."""
    a = result.argmin
    u0 = a["t"] - a["s"]
    xi0 = np.asarray(a["xi"], dtype=float)
    best = np.inf
    best_arg = dict(a)
    for fu in (0.5, 0.75, 1.0, 1.5):
        u = min(u0 * fu, a["t"])
        for fr in (0.5, 1.0, 2.0):
            xi = xi0 * fr
            if np.linalg.norm(xi) < 1e-300:
                continue
            val = integrate_psi(kernel, model, xi, u) / (u**zeta * np.linalg.norm(xi) ** alpha)
            if val < best:
                best, best_arg = val, {"t": a["t"], "s": a["t"] - u, "xi": xi}
    return best, best_arg


def lnd_infimum(kernel, model, config, _table=None):
    """Estimate the LND limit-infimum for ``config.zeta`` and ``config.alpha``.

    Returns an ``LndResult`` (which unpacks as ``(infimum, argmin)``).  The
    infimum is the minimum over windows in the smallest horizon, refined once
    around its argmin, or 0 when the fitted slope shows the ratio vanishing.
    """
    table = _table or _NumeratorTable(kernel, model, config)
    res = _infimum_from_table(table, config, config.zeta, config.alpha)
    if res.infimum > 0:
        val, arg = _refine(kernel, model, res, config.zeta, config.alpha, table)
        if np.linalg.norm(arg["xi"]) >= config.small_radius and val < res.infimum:
            res.infimum, res.argmin = float(val), arg
    return res


def min_admissible_zeta(kernel, model, alpha, config, threshold=1e-3, interval=(0.05, 2.0),
                        tol=2e-4):
    """Smallest zeta in ``interval`` whose LND infimum reaches ``threshold``, by bisection.

    Returns the lower endpoint when it already passes.
    """
    table = _NumeratorTable(kernel, model, config)
    cfg = LndProbeConfig(**{**config.__dict__, "alpha": alpha})

    def passes(zeta):
        cfg.zeta = zeta
        return lnd_infimum(kernel, model, cfg, _table=table).infimum >= threshold

    lo, hi = interval
    if passes(lo):
        return float(lo)
    if not passes(hi):
        raise NotFoundError(f"no zeta in [{lo}, {hi}] passes the LND probe")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return float(hi)
