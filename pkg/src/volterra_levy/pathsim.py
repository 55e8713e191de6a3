"""Volterra-Levy path simulation and characteristic-function checks.

A path on a grid ``0 = t_0 < ... < t_N`` is

    z(t_i) = sum_{j < i} w_j(t_i) dL_j,

with one set of noise increments ``dL_j`` per replica shared by every target
time, and energy-matched weights from ``kernels.cell_averaged_weights``.  On a
uniform grid a convolution kernel has weights depending on ``i - j`` only, and
the sum is a discrete convolution done by FFT.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import signal, special

from .errors import BudgetError, DomainError
from .kernels import cell_averaged_weights, cell_energies
from .levy import sample_increment
from .quadrature import adaptive_quad
from .rng import stream

DIRECT_WORK_CAP = 5e7


@dataclass
class SamplePath:
    """One replica: ``values[i]`` is ``z`` at ``times[i]``."""

    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.times.ndim != 1 or self.times.size < 2:
            raise DomainError("a path needs at least two time marks")
        if self.values.shape[0] != self.times.size:
            raise DomainError("times and values differ in length")

    @property
    def dim(self):
        return self.values.shape[1]

    def index_of(self, t):
        """Index of grid time ``t``; raises if ``t`` is not on the grid."""
        i = int(np.searchsorted(self.times, t))
        for j in (i - 1, i):
            if 0 <= j < self.times.size and abs(self.times[j] - t) <= 1e-12 * max(1.0, abs(t)):
                return j
        raise DomainError(f"t={t} is not a grid point")


def uniform_grid(T, n_steps):
    return np.linspace(0.0, T, n_steps + 1)


def _is_uniform(grid):
    d = np.diff(grid)
    return np.allclose(d, d[0], rtol=1e-10, atol=0.0)


def lag_weights(kernel, alpha, dt, n_steps):
    """Uniform-grid weights ``W_m``, ``m = 1..n_steps``: the weight a cell ``m`` steps back gets."""
    grid = dt * np.arange(n_steps + 1)
    # cells seen from t = n dt, reversed so index m-1 is the cell [t - m dt, t - (m-1) dt]
    e = cell_energies(kernel, alpha, grid[-1], grid)[::-1]
    return (np.maximum(e, 0.0) / dt) ** (1.0 / alpha)


def _check_grid(kernel, grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing with at least two points")
    if grid[0] != 0.0:
        raise DomainError("grid must start at 0")
    if grid[-1] > kernel.T_max * (1 + 1e-12):
        raise DomainError(f"grid exceeds the kernel horizon T_max={kernel.T_max}")
    return grid


def volterra_sum(kernel, alpha, grid, increments, method="auto", work_cap=DIRECT_WORK_CAP):
    """Apply the weights to noise increments.

    ``increments`` has shape ``(..., N, d)`` for a grid of ``N + 1`` points;
    the result has shape ``(..., N + 1, d)`` with ``z(0) = 0``.  ``method`` is
    ``"fft"``, ``"direct"``, or ``"auto"`` (FFT on uniform grids).
    """
    grid = _check_grid(kernel, grid)
    inc = np.asarray(increments, dtype=float)
    n = grid.size - 1
    if inc.shape[-2] != n:
        raise DomainError("need one increment per grid cell")
    uniform = _is_uniform(grid)
    if method == "auto":
        method = "fft" if uniform else "direct"
    out = np.zeros(inc.shape[:-2] + (n + 1, inc.shape[-1]))
    if method == "fft":
        if not uniform:
            raise DomainError("the convolution path needs a uniform grid")
        w = lag_weights(kernel, alpha, grid[1], n)
        shape = (1,) * (inc.ndim - 2) + (n, 1)
        # z_i = sum_{m=1}^{i} W_m dL_{i-m}
        conv = signal.fftconvolve(inc, w.reshape(shape), axes=-2)[..., :n, :]
        out[..., 1:, :] = conv
        return out
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    if n * n / 2 * max(1, inc[..., 0, 0].size) > work_cap:
        raise BudgetError(f"direct Volterra sum needs ~{n * n // 2} weight evaluations per replica")
    for i in range(1, n + 1):
        w = cell_averaged_weights(kernel, alpha, grid[i], grid[: i + 1])
        out[..., i, :] = np.einsum("j,...jd->...d", w, inc[..., :i, :])
    return out


def draw_increments(model, grid, rng):
    dts = np.diff(grid)
    if _is_uniform(grid):
        return sample_increment(model, dts[0], rng, size=dts.size)
    return np.stack([sample_increment(model, dt, rng) for dt in dts])


def simulate_path(kernel, model, grid, rng, method="auto", meta=None):
    """One replica of ``z`` on ``grid`` driven by ``model`` noise from ``rng``."""
    grid = _check_grid(kernel, grid)
    inc = draw_increments(model, grid, rng)
    values = volterra_sum(kernel, model.alpha, grid, inc, method=method)
    info = {"kernel": kernel.id, "model": model.id}
    info.update(meta or {})
    return SamplePath(grid, values, info)


def simulate_ensemble(kernel, model, grid, seed, replicas, first_replica=0):
    """Replicas ``first_replica ..`` as an array of shape ``(R, N + 1, d)``.

    Replica ``r`` draws from ``stream(seed, r)``, so results do not depend on
    how a campaign is split into batches.
    """
    grid = _check_grid(kernel, grid)
    ids = range(first_replica, first_replica + replicas)
    inc = np.stack([draw_increments(model, grid, stream(seed, r)) for r in ids])
    return volterra_sum(kernel, model.alpha, grid, inc)


def ensemble_paths(kernel, model, grid, seed, replicas):
    """Like ``simulate_ensemble`` but as a list of ``SamplePath``."""
    vals = simulate_ensemble(kernel, model, grid, seed, replicas)
    return [
        SamplePath(grid, v, {"kernel": kernel.id, "model": model.id, "seed": seed, "replica": r})
        for r, v in enumerate(vals)
    ]


def integrate_psi(kernel, model, xi, length, rtol=1e-11):
    """``int_0^length psi(k(u) xi) du``, by quadrature in the kernel's energy variable."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if length <= 0 or not np.any(xi):
        return 0.0
    e_max = float(kernel.to_energy_var(length))
    log_base = float(np.log(model.psi(xi)))

    def h(e):
        log_u = kernel.log_from_energy_var(e)
        out = np.zeros_like(log_u)
        ok = np.isfinite(log_u)
        lu = log_u[ok]
        if model.stable:
            out[ok] = np.exp(log_base + kernel.log_energy_density(model.alpha, lu))
        else:
            out[ok] = np.exp(model.log_psi_scaled(kernel.log_lag(lu), xi) + kernel.log_jacobian(lu))
        return out

    val, _ = adaptive_quad(h, 0.0, e_max, rtol=rtol)
    return val


def char_function_theory(kernel, model, xi, t):
    """``exp(-int_0^t psi(k(t, s) xi) ds)``, evaluated by quadrature."""
    if t > kernel.T_max * (1 + 1e-12) or t < 0:
        raise DomainError(f"t={t} outside [0, T_max]")
    return complex(np.exp(-integrate_psi(kernel, model, xi, t)))


def _values_at(ensemble, t):
    if isinstance(ensemble, (list, tuple)):
        return np.stack([p.values[p.index_of(t)] for p in ensemble])
    raise TypeError("ensemble must be a list of SamplePath; use char_function_mc_array for arrays")


def char_function_mc_array(z_t, xi):
    """Empirical characteristic function of samples ``z_t`` of shape ``(R, d)``.

    Returns ``(estimate, stderr)`` where ``stderr`` is complex: its real and
    imaginary parts are the standard errors of the two parts of the estimate.
    """
    z_t = np.asarray(z_t, dtype=float)
    phase = z_t @ np.atleast_1d(np.asarray(xi, dtype=float))
    c, s = np.cos(phase), np.sin(phase)
    n = phase.size
    se = complex(c.std(ddof=1) / np.sqrt(n), s.std(ddof=1) / np.sqrt(n))
    return complex(c.mean(), s.mean()), se


def char_function_mc(ensemble, xi, t):
    """Monte Carlo ``E exp(i <xi, z_t>)`` over a list of ``SamplePath``."""
    return char_function_mc_array(_values_at(ensemble, t), xi)


def continuity_in_probability_probe(kernel, model, t, lags, eps=0.5, replicas=20000,
                                    seed=0, n_steps=256):
    """Empirical ``P(|z_t - z_{t-lag}| > eps)`` for each lag.

    Paths are simulated on a uniform grid of ``n_steps`` cells over ``[0, t]``;
    every lag must be a multiple of the step.  Returns an array with columns
    ``(lag, probability, stderr)``.
    """
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    if np.any(lags < 0) or np.any(lags > t):
        raise DomainError("lags must lie in [0, t]")
    grid = uniform_grid(t, n_steps)
    dt = grid[1]
    steps = np.rint(lags / dt).astype(int)
    if np.any(np.abs(steps * dt - lags) > 1e-9 * max(t, 1.0)):
        raise DomainError("lags must be multiples of the grid step t / n_steps")
    z = simulate_ensemble(kernel, model, grid, seed, replicas)
    rows = []
    for lag, m in zip(lags, steps):
        if m == 0:
            rows.append((lag, 0.0, 0.0))
            continue
        dist = np.linalg.norm(z[:, -1, :] - z[:, -1 - m, :], axis=-1)
        p = float(np.mean(dist > eps))
        rows.append((lag, p, np.sqrt(p * (1 - p) / replicas)))
    return np.array(rows)


def brownian_exceedance(lag, eps, sigma=1.0):
    """``P(|B_lag| > eps)`` for 1-d Brownian motion, the oracle for the probe."""
    return special.erfc(eps / (sigma * np.sqrt(2.0 * np.asarray(lag, dtype=float))))
