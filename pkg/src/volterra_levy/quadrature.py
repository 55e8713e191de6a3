"""Adaptive composite Gauss-Legendre quadrature.

Integrable endpoint singularities are handled by bisection: panels whose
10-point and 20-point estimates disagree are split until the summed
disagreement drops below tolerance.  Callers remove the bulk of a singularity
by a change of variables first (see ``kernels``), so the adaptive stage only
cleans up residual power or log behaviour.
"""

import numpy as np

from .errors import QuadratureError

_X10, _W10 = np.polynomial.legendre.leggauss(10)
_X20, _W20 = np.polynomial.legendre.leggauss(20)


def _panel_sums(f, lo, hi):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x10 = mid[:, None] + half[:, None] * _X10
    x20 = mid[:, None] + half[:, None] * _X20
    y10 = np.asarray(f(x10.ravel()), dtype=float).reshape(x10.shape)
    y20 = np.asarray(f(x20.ravel()), dtype=float).reshape(x20.shape)
    i10 = half * (y10 @ _W10)
    i20 = half * (y20 @ _W20)
    return i20, np.abs(i20 - i10)


def adaptive_quad(f, a, b, rtol=1e-11, atol=0.0, initial=8, max_panels=4000, geometric=True):
    """Integrate a vectorized ``f`` over ``[a, b]``.

    Parameters
    ----------
    f : callable
        Maps an array of abscissae to an array of values.  It is never
        evaluated at the endpoints.
    a, b : float
        Finite limits, ``a < b``.
    rtol, atol : float
        Stop when the summed error estimate is below ``max(rtol*|I|, atol)``.
    initial : int
        Number of starting panels.
    geometric : bool
        Grade the starting panels geometrically towards ``a``, where the
        callers place their singular endpoint.

    Returns
    -------
    (value, error_estimate)
    """
    a = float(a)
    b = float(b)
    if not b > a:
        raise ValueError("need a < b")
    if geometric:
        frac = np.concatenate([[0.0], 2.0 ** -np.arange(initial - 1, -1, -1)])
    else:
        frac = np.linspace(0.0, 1.0, initial + 1)
    edges = a + (b - a) * frac
    lo, hi = edges[:-1], edges[1:]
    done_val = 0.0
    done_err = 0.0
    while True:
        val, err = _panel_sums(f, lo, hi)
        if not (np.all(np.isfinite(val)) and np.all(np.isfinite(err))):
            raise QuadratureError("integrand produced non-finite values")
        total = done_val + val.sum()
        total_err = done_err + err.sum()
        tol = max(rtol * abs(total), atol)
        if total_err <= tol:
            return total, total_err
        n_active = lo.size
        if n_active + (lo.size if lo.size else 0) > max_panels:
            raise QuadratureError(
                f"adaptive quadrature exceeded {max_panels} panels "
                f"(estimate {total:.6g}, error {total_err:.3g})"
            )
        # retire panels that are already accurate enough for their share
        share = tol / max(n_active, 1)
        keep = err <= 0.25 * share
        done_val += val[keep].sum()
        done_err += err[keep].sum()
        lo, hi = lo[~keep], hi[~keep]
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        order = np.argsort(lo)
        lo, hi = lo[order], hi[order]
