"""Non-linear Young integration, the Picard solver and the linearized flow.

The equation is

    theta_t = xi + int_0^t Gamma_{dr}(theta_r),

where ``Gamma_{s,t}(x)`` is a two-parameter field, additive in time.  For a
regularized SDE ``dx = b(x) dt + dz`` with ``x = theta + z`` the field is
``Gamma_{s,t} = b * Lbar_t - b * Lbar_s`` built from the local time of ``z``.

All time integrals are sums over the marks of a ``GammaField`` with a germ
``Gamma_{u,v}(y_u)`` ("left") or its trapezoidal compensation
``(Gamma_{u,v}(y_u) + Gamma_{u,v}(y_v)) / 2`` ("trapezoid").  The left germ is
the Riemann sum of the definition; the trapezoid has second-order error for
smooth inputs and is the default.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .drift import SpectralDrift
from .errors import (BudgetError, ConfigurationError, DomainError, LatticeMismatchError,
                     NonContractionError, RegularityError)
from .occupation import LocalTimeField

# ----------------------------------------------------------------------------
# periodic cubic B-spline evaluation of lattice fields


def _bspline_weights(f):
    f2, f3 = f * f, f * f * f
    return np.stack([(1 - f) ** 3 / 6, (3 * f3 - 6 * f2 + 4) / 6, (-3 * f3 + 3 * f2 + 3 * f + 1) / 6,
                     f3 / 6])


def _prefilter(fields, d):
    """Spline coefficients along the ``d`` spatial axes that follow the leading time axis."""
    c = np.asarray(fields, dtype=float)
    for ax in range(1, d + 1):
        c = ndimage.spline_filter1d(c, order=3, axis=ax, mode="grid-wrap")
    return c


def _spline_eval(coef, lattice, k, x):
    """Evaluate the periodic cubic spline ``coef[k]`` at points ``x``.

    ``coef`` has shape ``(K, M, ..., M) + tail``; ``k`` are time indices of
    shape ``(n,)``, ``x`` points of shape ``(n, d)``.  Returns ``(n,) + tail``.
    """
    d, M = lattice.d, lattice.M
    u = (np.asarray(x, dtype=float) - lattice.origin) / lattice.dx - 0.5
    base = np.floor(u).astype(np.int64)
    w = _bspline_weights(u - base)  # (4, n, d)
    tail = coef.shape[1 + d:]
    out = np.zeros((k.size,) + tail)
    extra = (slice(None),) + (None,) * len(tail)
    for offs in itertools.product(range(4), repeat=d):
        idx = [k]
        wt = np.ones(k.size)
        for ax, o in enumerate(offs):
            idx.append(np.mod(base[:, ax] - 1 + o, M))
            wt = wt * w[o, :, ax]
        out += wt[extra] * coef[tuple(idx)]
    return out


# ----------------------------------------------------------------------------
# Gamma fields


class GammaField:
    """Two-parameter field ``Gamma_{t_i, t_j}(x)`` on time marks, with its spatial gradient.

    Build it with one of the constructors.  Cumulative fields (anchors ``A``
    with ``Gamma_{s,t} = A_t - A_s``) are additive by construction; a general
    increment function is accepted for testing the sewing machinery.
    """

    def __init__(self, times, dim, increment, grad_increment=None, lattice=None, constants=None,
                 cumulative=True):
        self.times = np.asarray(times, dtype=float)
        if self.times.ndim != 1 or self.times.size < 2 or np.any(np.diff(self.times) <= 0):
            raise DomainError("time marks must be strictly increasing, at least two")
        self.dim = int(dim)
        self._inc = increment
        self._grad = grad_increment
        self.lattice = lattice
        self.constants = dict(constants or {})
        self.cumulative = cumulative

    @property
    def n_marks(self):
        return self.times.size

    def increment(self, i, j, x):
        """``Gamma_{t_i, t_j}(x)`` for index arrays ``i, j`` of shape ``(n,)`` and points ``(n, d)``."""
        i, j, x = _prep(i, j, x, self.dim)
        return self._inc(i, j, x)

    def grad_increment(self, i, j, x):
        """Spatial Jacobian of ``Gamma_{t_i, t_j}`` at ``x``, shape ``(n, d, d)``."""
        if self._grad is None:
            raise ConfigurationError("this field carries no gradient")
        i, j, x = _prep(i, j, x, self.dim)
        return self._grad(i, j, x)

    @classmethod
    def from_anchor_fields(cls, times, lattice, fields, grads=None, constants=None):
        """Cumulative field from lattice anchors ``fields[k] = A_{t_k}`` of shape ``(K, M..., d)``.

        ``grads`` has shape ``(K, M..., d, d)`` with ``grads[..., a, b] = d A^a / d x_b``.
        Off-lattice values use periodic cubic spline interpolation.
        """
        fields = np.asarray(fields, dtype=float)
        d = lattice.d
        if fields.shape[1:1 + d] != (lattice.M,) * d:
            raise LatticeMismatchError("anchor fields do not match the lattice")
        ca = _prefilter(fields, d)
        cg = None if grads is None else _prefilter(grads, d)

        def inc(i, j, x):
            return _spline_eval(ca, lattice, j, x) - _spline_eval(ca, lattice, i, x)

        def grad(i, j, x):
            return _spline_eval(cg, lattice, j, x) - _spline_eval(cg, lattice, i, x)

        out = cls(times, fields.shape[-1], inc, None if grads is None else grad, lattice, constants)
        out.anchors = fields
        out.anchor_grads = grads
        return out

    @classmethod
    def from_callables(cls, times, anchor, grad=None, dim=1, constants=None):
        """Cumulative field from ``anchor(t, x) -> (n, d)`` and ``grad(t, x) -> (n, d, d)``."""
        times = np.asarray(times, dtype=float)

        def inc(i, j, x):
            return anchor(times[j], x) - anchor(times[i], x)

        def g(i, j, x):
            return grad(times[j], x) - grad(times[i], x)

        return cls(times, dim, inc, None if grad is None else g, constants=constants)

    @classmethod
    def from_increment(cls, times, increment, grad=None, dim=1):
        """General (possibly non-additive) field from ``increment(s, t, x) -> (n, d)``."""
        times = np.asarray(times, dtype=float)

        def inc(i, j, x):
            return increment(times[i], times[j], x)

        def g(i, j, x):
            return grad(times[i], times[j], x)

        return cls(times, dim, inc, None if grad is None else g, cumulative=False)

    @classmethod
    def zero(cls, times, dim=1):
        return cls.from_callables(times, lambda t, x: np.zeros_like(x),
                                  lambda t, x: np.zeros(x.shape + (x.shape[-1],)), dim)


def _prep(i, j, x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, dim)
    n = x.shape[0]
    i = np.broadcast_to(np.asarray(i, dtype=np.int64), (n,))
    j = np.broadcast_to(np.asarray(j, dtype=np.int64), (n,))
    return i, j, x


def linear_gamma(times, c, dim=1):
    """``Gamma_{s,t}(x) = c x (t - s)``."""
    return GammaField.from_callables(
        times, lambda t, x: c * x * t[:, None],
        lambda t, x: c * t[:, None, None] * np.eye(x.shape[1])[None], dim)


def frozen_drift_gamma(times, b, db, dim=1):
    """``Gamma_{s,t}(x) = (t - s) b(x)``: the field of a path frozen at the origin.

    ``b`` maps points ``(n, d)`` to ``(n, d)`` and ``db`` to Jacobians ``(n, d, d)``.
    """
    return GammaField.from_callables(times, lambda t, x: t[:, None] * b(x),
                                     lambda t, x: t[:, None, None] * db(x), dim)


# ----------------------------------------------------------------------------
# sewing


@dataclass
class SewingResult:
    """Sums of the germ over dyadic refinements.

    ``integral[k]`` is the finest-level integral from the first mark to mark
    ``k``; ``levels[l]`` is the level-``l`` sum over the whole range, with
    ``k0 * 2^l`` intervals; ``deltas[l - 1] = |levels[l] - levels[l - 1]|``.
    """

    integral: np.ndarray
    levels: np.ndarray
    deltas: np.ndarray
    rate: float
    certified: bool

    def increment(self, i, j):
        return self.integral[j] - self.integral[i]


def _germ(gamma, i, j, y, germ):
    g = gamma.increment(i, j, y[i])
    if germ == "left":
        return g
    if germ == "trapezoid":
        return 0.5 * (g + gamma.increment(i, j, y[j]))
    raise ValueError(f"unknown germ {germ!r}")


def _contraction_rate(deltas, scale):
    """Level-to-level contraction ``-slope`` of ``log2 delta``; ``inf`` when deltas hit round-off."""
    floor = 1e-13 * max(1.0, scale)
    lv = np.arange(1, deltas.size + 1)
    ok = deltas > floor
    if ok.sum() < 2:
        return np.inf
    lv, dl = lv[ok], deltas[ok]
    # last half of the informative levels, at least two
    m = max(2, (lv.size + 1) // 2)
    lv, dl = lv[-m:], dl[-m:]
    return float(-np.polyfit(lv, np.log2(dl), 1)[0])


def sewing_integral(gamma, y, levels=None, germ="left", min_rate=0.05, check=True, extrapolate=False):
    """``int Gamma_{dr}(y_r)`` by compensated Riemann sums on dyadic refinements of the marks.

    ``y`` has one value per mark (shape ``(K,)`` or ``(K, d)``).  With ``K - 1
    = k0 2^levels`` intervals, level ``l`` sums the germ over ``k0 2^l``
    equal blocks of marks.  The certificate asks the level deltas to decay
    geometrically with rate at least ``min_rate`` (in powers of two per
    level); ``check`` raises ``NonContractionError`` otherwise.
    ``extrapolate`` adds a Richardson step ``(2^p S_l - S_{l-1}) / (2^p - 1)``
    to the integral over the whole range, with ``p`` the measured rate.
    """
    y = np.asarray(y, dtype=float).reshape(gamma.n_marks, -1)
    n = gamma.n_marks - 1
    tz = (n & -n).bit_length() - 1  # powers of two dividing n
    if levels is None:
        levels = tz
    if levels > tz:
        raise DomainError(f"{n} intervals do not support {levels} dyadic levels")
    k0 = n >> levels
    sums = []
    for lv in range(levels + 1):
        step = n // (k0 << lv)
        i = np.arange(0, n, step)
        sums.append(_germ(gamma, i, i + step, y, germ).sum(axis=0))
    sums = np.array(sums)
    i = np.arange(n)
    fine = _germ(gamma, i, i + 1, y, germ)
    integral = np.vstack([np.zeros((1, y.shape[1])), np.cumsum(fine, axis=0)])
    deltas = np.linalg.norm(np.diff(sums, axis=0), axis=-1)
    rate = _contraction_rate(deltas, float(np.abs(sums).max()) if sums.size else 1.0)
    certified = bool(rate >= min_rate)
    if check and not certified:
        raise NonContractionError(f"sewing levels contract at rate {rate:.3g} < {min_rate}")
    if extrapolate and levels >= 1 and np.isfinite(rate) and rate > 0:
        q = 2.0**rate
        corr = (sums[-1] - sums[-2]) / (q - 1)
        integral = integral + np.outer(np.arange(n + 1) / n, corr)
    return SewingResult(integral, sums, deltas, rate, certified)


# ----------------------------------------------------------------------------
# building Gamma from a drift and a local time


def _density_coefficients(ltf):
    """Transforms ``mu_hat`` of every cumulative density, as in ``histogram_fourier``."""
    lat = ltf.lattice
    axes = tuple(range(1, lat.d + 1))
    vals = np.conj(np.fft.fftn(ltf.density, axes=axes)) * lat.dx**lat.d
    phase = np.exp(1j * lat.freq_axis() * (lat.origin + 0.5 * lat.dx))
    for k in range(lat.d):
        sh = [1] * (lat.d + 1)
        sh[k + 1] = lat.M
        vals = vals * phase.reshape(sh)
    return vals


def _sup_increments(fields, times, lags):
    """``sup_x |F_{t_{i+m}} - F_{t_i}|`` maximized over ``i``, for each lag ``m``."""
    out = []
    flat = fields.reshape(fields.shape[0], -1)
    for m in lags:
        diff = np.abs(flat[m:] - flat[:-m]).max(axis=1)
        dt = times[m:] - times[:-m]
        out.append((float(dt.max()), float(diff.max()), diff / dt))
    return out


@dataclass
class GammaVerification:
    """Measured constants of the Gamma regularity inequalities on dyadic lags.

    ``norms[c]`` is ``sup |Gamma_{s,t}|_{C^c}/|t-s|^gamma`` over the probed
    pairs for ``c = 0, 1, 2`` (values, gradient, Hessian), ``gamma_hat`` the
    log-log slope of the sup increments of the ``C^2`` part against the lag.
    """

    gamma: float
    norms: tuple
    gamma_hat: float
    interp_error: float
    lags: np.ndarray
    sup_by_lag: np.ndarray

    @property
    def total(self):
        return float(sum(self.norms))


def verify_gamma_regularity(times, fields, grads, hessians, gamma, max_lags=12):
    """Measure ``||Gamma||_{C^gamma_T C^2}`` on pairs of marks at dyadic lags."""
    n = len(times) - 1
    lags = [2**p for p in range(max_lags) if 2**p <= n]
    norms, sups = [], []
    for arr in (fields, grads, hessians):
        rows = _sup_increments(arr, times, lags)
        best = 0.0
        for (_, _, ratio), m in zip(rows, lags):
            dt = times[m:] - times[:-m]
            best = max(best, float(np.max(ratio * dt / dt**gamma)))
        norms.append(best)
        sups.append([r[1] for r in rows])
    sups = np.array(sups)
    lag_t = np.array([float(np.median(times[m:] - times[:-m])) for m in lags])
    c2 = sups.sum(axis=0)
    ok = c2 > 0
    gh = float(np.polyfit(np.log(lag_t[ok]), np.log(c2[ok]), 1)[0]) if ok.sum() >= 2 else np.inf
    return tuple(norms), gh, np.array(lags), sups


def build_gamma_from_drift(b, localtime, gamma=0.5, bound=None, kappa_hat=None, margin=0.05,
                           verify=True):
    """``GammaField`` with anchors ``A_t = b * Lbar_t`` on the local time's marks.

    ``b`` is a ``SpectralDrift`` (``d = 1``) or a sequence of ``d`` of them,
    one per component.  Gradients and Hessians are spectral.  With
    ``verify``, the ``C^gamma_T C^2`` constants are measured and recorded in
    ``constants``; ``RegularityError`` is raised when they exceed ``bound``,
    when the measured time exponent falls short of ``gamma``, or when
    ``kappa_hat`` is given and ``beta + kappa_hat <= 2 + margin``.
    """
    drifts = [b] if isinstance(b, SpectralDrift) else list(b)
    if not isinstance(localtime, LocalTimeField):
        raise TypeError("localtime must be a LocalTimeField")
    lat = localtime.lattice
    d = lat.d
    if len(drifts) != d:
        raise ConfigurationError(f"need {d} drift components, got {len(drifts)}")
    for c in drifts:
        if c.lattice != lat:
            raise LatticeMismatchError("drift and local time live on different lattices")
    if kappa_hat is not None:
        beta = min(c.beta_target for c in drifts)
        if np.isfinite(beta) and not beta + kappa_hat > 2 + margin:
            raise RegularityError(
                f"beta + kappa = {beta + kappa_hat:.3g} does not exceed 2 + {margin}")
    mu = _density_coefficients(localtime)
    K = mu.shape[0]
    fa = lat.freq_axis()
    axes = tuple(range(1, d + 1))
    fields = np.empty((K,) + (lat.M,) * d + (d,))
    grads = np.empty((K,) + (lat.M,) * d + (d, d))
    hess = np.empty((K,) + (lat.M,) * d + (d, d, d)) if verify else None
    scale = (lat.M / lat.L) ** d
    x0 = lat.origin + 0.5 * lat.dx
    ph = np.exp(1j * fa * x0)

    def spatial(coef):
        c = coef
        for k in range(d):
            sh = [1] * (d + 1)
            sh[k + 1] = lat.M
            c = c * ph.reshape(sh)
        return (np.fft.ifftn(c, axes=axes) * scale).real

    def dfac(k):
        sh = [1] * (d + 1)
        sh[k + 1] = lat.M
        return (1j * fa).reshape(sh)

    for a, comp in enumerate(drifts):
        coef = comp.coefficients[None] * mu
        fields[..., a] = spatial(coef)
        for k in range(d):
            gk = coef * dfac(k)
            grads[..., a, k] = spatial(gk)
            if verify:
                for m in range(d):
                    hess[..., a, k, m] = spatial(gk * dfac(m))
    constants = {}
    if verify:
        norms, gh, lags, sups = verify_gamma_regularity(localtime.time_marks, fields, grads, hess, gamma)
        # interpolation check: cubic spline vs exact trigonometric sum at cell edges
        pts = lat.origin + lat.dx * np.arange(0, lat.M, max(1, lat.M // 64))
        if d == 1:
            exact = _trig_eval(drifts[0].coefficients * mu[-1], lat, pts)
            approx = _spline_eval(_prefilter(fields[-1:], 1), lat, np.zeros(pts.size, dtype=np.int64),
                                  pts[:, None])[:, 0]
            ierr = float(np.abs(exact - approx).max())
        else:
            ierr = np.nan
        ver = GammaVerification(gamma, norms, gh, ierr, lags, sups)
        constants = {"verification": ver, "norm": ver.total, "gamma_hat": gh, "interp_error": ierr}
        if not np.all(np.isfinite(norms)):
            raise RegularityError("Gamma has non-finite C^gamma_T C^2 constants")
        if bound is not None and ver.total > bound:
            raise RegularityError(f"||Gamma||_C^gamma C^2 = {ver.total:.3g} exceeds {bound}")
        if not gh > gamma:
            raise RegularityError(f"measured time exponent {gh:.3g} does not exceed gamma = {gamma}")
    return GammaField.from_anchor_fields(localtime.time_marks, lat, fields, grads, constants)


def _trig_eval(coeffs, lattice, x):
    """``L^-1 sum_n c_n exp(i xi_n x)`` at arbitrary points, ``d = 1``."""
    fa = lattice.freq_axis()
    return (np.exp(1j * np.outer(x, fa)) @ coeffs).real / lattice.L


# ----------------------------------------------------------------------------
# Picard solver


@dataclass
class PicardConfig:
    """``window`` is the initial window length in marks (``None``: the whole range)."""

    tol: float = 1e-8
    max_iter: int = 200
    window: int = None
    germ: str = "trapezoid"
    max_factor: float = 0.5
    n_trial: int = 3
    init: str = "constant"
    ramp: float = 1.0


@dataclass
class YoungSolution:
    times: np.ndarray
    theta: np.ndarray
    z: np.ndarray = None
    iterations: int = 0
    windows: list = field(default_factory=list)
    factors: np.ndarray = None
    residual: float = np.nan
    euler_gap: float = np.nan
    holder: float = np.nan
    holder_exp: float = np.nan

    @property
    def x(self):
        if self.z is None:
            raise ConfigurationError("no driving path attached")
        return self.theta + self.z

    @property
    def xi0(self):
        return self.theta[0]


def _sup(a):
    return float(np.abs(a).max()) if a.size else 0.0


def _picard_window(step_fn, start, init, tol, max_iter, floor, n_trial, max_factor):
    """Iterate ``state -> start + cumsum(step_fn(state))`` on one window.

    Returns ``(state, diffs, factors, ok)``; ``ok`` is False when a measured
    factor exceeded ``max_factor`` within the first ``n_trial`` iterations.
    """
    state = init
    diffs, factors = [], []
    for it in range(max_iter):
        inc = step_fn(state)
        new = np.concatenate([start[None], start[None] + np.cumsum(inc, axis=0)])
        diff = _sup(new - state)
        state = new
        if diffs and diffs[-1] > floor:
            factors.append(diff / diffs[-1])
            if it < n_trial and factors[-1] > max_factor:
                return state, diffs + [diff], factors, False
        diffs.append(diff)
        if diff <= tol:
            return state, diffs, factors, True
    raise BudgetError(f"Picard iteration did not reach tol={tol} in {max_iter} iterations "
                      f"(last change {diffs[-1]:.3g})")


def _windowed_picard(n, make_step, start, init_fn, cfg, scale):
    """Cover marks ``0..n`` by windows, halving the window until the map contracts."""
    w = n if cfg.window is None else int(cfg.window)
    floor = max(1e-3 * cfg.tol, 64 * np.finfo(float).eps * scale)
    state = np.empty((n + 1,) + start.shape)
    state[0] = start
    a, iters, windows, factors = 0, 0, [], []
    while a < n:
        while True:
            b = min(a + w, n)
            init = init_fn(a, b, state[a])
            sol, diffs, fac, ok = _picard_window(make_step(a, b), state[a], init, cfg.tol, cfg.max_iter,
                                                 floor, cfg.n_trial, cfg.max_factor)
            iters += len(diffs)
            if ok:
                break
            if b - a == 1:
                raise NonContractionError(
                    f"no contraction on a single step at mark {a}: factor {max(fac):.3g}")
            w = max(1, (b - a) // 2)
        state[a:b + 1] = sol
        windows.append((a, b))
        factors.append(max(fac) if fac else 0.0)
        a = b
    return state, iters, windows, np.array(factors)


def _theta_step(gamma, germ):
    def make(a, b):
        i = np.arange(a, b)

        def step(state):
            g = gamma.increment(i, i + 1, state[:-1])
            if germ == "left":
                return g
            return 0.5 * (g + gamma.increment(i, i + 1, state[1:]))

        return step

    return make


def euler_solve(gamma, xi0):
    """One pass ``theta_{j+1} = theta_j + Gamma_{t_j, t_{j+1}}(theta_j)``."""
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    n = gamma.n_marks - 1
    th = np.empty((n + 1, xi0.size))
    th[0] = xi0
    for j in range(n):
        th[j + 1] = th[j] + gamma.increment(j, j + 1, th[j][None])[0]
    return th


def holder_norm(path, gamma_exp, times=None):
    """``sup_{s != t} |f_t - f_s| / |t - s|^gamma`` over all pairs of marks.

    ``path`` is a ``SamplePath``-like object with ``times`` and ``values``, a
    ``YoungSolution`` (its ``theta``), or an array of values with ``times``.
    """
    if not 0 < gamma_exp <= 1:
        raise DomainError("gamma_exp must lie in (0, 1]")
    if times is None:
        if isinstance(path, YoungSolution):
            times, vals = path.times, path.theta
        else:
            times, vals = path.times, path.values
    else:
        vals = path
    times = np.asarray(times, dtype=float)
    vals = np.asarray(vals, dtype=float).reshape(times.size, -1)
    if times.size < 2:
        raise DomainError("need at least two marks")
    best = 0.0
    for m in range(1, times.size):
        diff = np.linalg.norm(vals[m:] - vals[:-m], axis=1)
        dt = times[m:] - times[:-m]
        best = max(best, float(np.max(diff / dt**gamma_exp)))
    return best


def picard_solve(gamma, xi0, config=None, z=None, holder_exp=0.55, euler_check=True):
    """Solve ``theta_t = xi0 + int_0^t Gamma_{dr}(theta_r)`` on the marks of ``gamma``.

    Windows start at ``config.window`` marks and are halved until one trial
    iteration contracts with factor at most ``config.max_factor``.  The
    returned solution carries the fixed-point residual of the whole path,
    the Euler gap (for the left germ, where the discrete fixed point is the
    Euler scheme) and the Holder norm of ``theta``.
    """
    cfg = config or PicardConfig()
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    if xi0.size != gamma.dim:
        raise DomainError("initial condition has the wrong dimension")
    n = gamma.n_marks - 1
    times = gamma.times

    def init_fn(a, b, start):
        base = np.repeat(start[None], b - a + 1, axis=0)
        if cfg.init == "ramp":
            base = base + cfg.ramp * ((times[a:b + 1] - times[a]) / (times[-1] - times[0]))[:, None]
        elif cfg.init != "constant":
            raise ValueError(f"unknown init {cfg.init!r}")
        return base

    scale = 1.0 + float(np.abs(xi0).max())
    theta, iters, windows, factors = _windowed_picard(n, _theta_step(gamma, cfg.germ), xi0, init_fn, cfg,
                                                      scale)
    sew = sewing_integral(gamma, theta, germ=cfg.germ, check=False)
    residual = _sup(theta - xi0 - sew.integral)
    gap = np.nan
    if euler_check and cfg.germ == "left":
        gap = _sup(theta - euler_solve(gamma, xi0))
    zt = None if z is None else np.asarray(z, dtype=float).reshape(theta.shape)
    return YoungSolution(times, theta, zt, iters, windows, factors, residual, gap,
                         holder_norm(theta, holder_exp, times), holder_exp)


def uniqueness_probe(gamma, xi0, config=None, ramp=1.0):
    """Sup distance between the fixed points from ``theta^(0) = xi`` and ``xi + ramp``."""
    cfg = config or PicardConfig()
    a = picard_solve(gamma, xi0, PicardConfig(**{**cfg.__dict__, "init": "constant"}), euler_check=False)
    b = picard_solve(gamma, xi0, PicardConfig(**{**cfg.__dict__, "init": "ramp", "ramp": ramp}),
                     euler_check=False)
    return _sup(a.theta - b.theta)


def flow_derivative(gamma, solution, config=None):
    """``J_t = I + int_0^t grad Gamma_{dr}(theta_r) J_r`` along a solution, shape ``(K, d, d)``.

    Solved by the same windowed Picard scheme with a matrix unknown.
    """
    cfg = config or PicardConfig()
    theta = solution.theta
    n = gamma.n_marks - 1
    d = gamma.dim
    G = gamma.grad_increment(np.arange(n), np.arange(1, n + 1), theta[:-1])
    Gr = gamma.grad_increment(np.arange(n), np.arange(1, n + 1), theta[1:]) if cfg.germ == "trapezoid" else None

    def make(a, b):
        def step(J):
            left = np.einsum("nij,njk->nik", G[a:b], J[:-1])
            if cfg.germ == "left":
                return left
            return 0.5 * (left + np.einsum("nij,njk->nik", Gr[a:b], J[1:]))

        return step

    def init_fn(a, b, start):
        return np.repeat(start[None], b - a + 1, axis=0)

    J, _, _, _ = _windowed_picard(n, make, np.eye(d), init_fn, cfg, 1.0)
    return J
