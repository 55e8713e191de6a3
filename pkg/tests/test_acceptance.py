"""Acceptance suite: one test per criterion, run at the stated tolerances.

Each test records ``(passed, detail)`` in ``conftest.ACCEPTANCE`` and prints a
PASS/FAIL line; the terminal summary lists all of them together.
"""

import math
import time

import numpy as np
import pytest

import conftest
import oracles as orc
from volterra_levy.drift import synth_besov_drift
from volterra_levy.kernels import Constant, Exponential, FractionalRL, LogSingular
from volterra_levy.levy import BrownianIso, StableIso
from volterra_levy.lnd import LndProbeConfig, min_admissible_zeta
from volterra_levy.occupation import (Lattice, estimate_spatial_regularity, estimate_time_regularity,
                                      localtime_formula_check, mc_moment_bound_check, occupation_histogram)
from volterra_levy.pathsim import (SamplePath, char_function_mc_array, char_function_theory, simulate_ensemble,
                                   simulate_path, uniform_grid)
from volterra_levy.rng import stream
from volterra_levy.young import (PicardConfig, build_gamma_from_drift, flow_derivative, frozen_drift_gamma,
                                 linear_gamma, picard_solve, sewing_integral, uniqueness_probe, GammaField)

pytestmark = pytest.mark.slow


def record(cid, ok, detail):
    conftest.ACCEPTANCE[cid] = (bool(ok), detail)
    print(f"criterion {cid}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


# ----------------------------------------------------------------------------
# 1. characteristic function of z


def test_criterion_1_characteristic_function():
    grid = uniform_grid(1.0, 64)
    xis = np.linspace(0.25, 2.5, 10)
    cols = [16, 32, 48, 64]
    lines, ok = [], True
    for model in (BrownianIso(), StableIso(0.8), StableIso(1.5)):
        a = getattr(model, "alpha", 2.0)
        for kernel in (Constant(), Exponential(1.0), FractionalRL(0.4, a)):
            t0 = time.time()
            z = simulate_ensemble(kernel, model, grid, 1, 10**5)
            zs = []
            for i in cols:
                for x in xis:
                    est, se = char_function_mc_array(z[:, i, :], [x])
                    th = char_function_theory(kernel, model, [x], grid[i])
                    zs.append((est.real - th.real) / se.real)
            zs = np.abs(zs)
            good = zs.max() <= 3 and np.mean(zs <= 2) >= 0.95 and time.time() - t0 <= 300
            ok &= good
            lines.append(f"{kernel.id}/{model.id}: max|z|={zs.max():.2f} "
                         f"frac<=2={np.mean(zs <= 2):.3f}{'' if good else ' (fail)'}")
    record(1, ok, "; ".join(lines))


# ----------------------------------------------------------------------------
# 2. fractional alpha-stable closed form


def test_criterion_2_fractional_stable_closed_form():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20):
        H, a = rng.uniform(0.1, 0.9), rng.uniform(0.5, 1.95)
        xi, t, c = rng.uniform(0.1, 3.0), rng.uniform(0.05, 1.0), rng.uniform(0.5, 2.0)
        got = char_function_theory(FractionalRL(H, a), StableIso(a, c), [xi], t).real
        quad = orc.fractional_stable_cf_quad(c, a, H, xi, t)
        closed = orc.fractional_stable_cf(c, a, H, xi, t)
        worst = max(worst, abs(got / quad - 1), abs(got / closed - 1))
    record(2, worst <= 1e-8, f"max relative error {worst:.2e} over 20 tuples")


# ----------------------------------------------------------------------------
# 3. LND table


def test_criterion_3_lnd_table():
    t0 = time.time()
    errs = []
    for kernel in (Constant(), Exponential(1.0)):
        zmin = min_admissible_zeta(kernel, StableIso(1.5), 1.5, LndProbeConfig())
        errs.append((kernel.id, zmin, 1.0))
    for H in (0.25, 0.5, 0.75):
        for a in (1.2, 1.8):
            zmin = min_admissible_zeta(FractionalRL(H, a), StableIso(a), a, LndProbeConfig())
            errs.append((f"fractional({H},{a})", zmin, H * a))
    ok = all(abs(z - ref) <= 1e-3 for _, z, ref in errs)
    lower = []
    for zeta in (0.5, 0.2, 0.05):
        z = min_admissible_zeta(LogSingular(1.5, 1.5, 0.5), StableIso(1.5), 1.5, LndProbeConfig(),
                                interval=(zeta, 2.0))
        lower.append(z == zeta)
    ok = ok and all(lower) and time.time() - t0 <= 120
    worst = max(abs(z - ref) for _, z, ref in errs)
    record(3, ok, f"max |zeta_min - ref| = {worst:.1e}; logsingular lower endpoints {lower}; "
                  f"{time.time() - t0:.0f}s")


# ----------------------------------------------------------------------------
# 4, 5. regularity of the occupation measure


GRID = uniform_grid(1.0, 2**12)


@pytest.fixture(scope="module")
def ensembles():
    out = {"brownian": simulate_ensemble(Constant(), BrownianIso(), GRID, 40, 500),
           "fbm_0.25": simulate_ensemble(FractionalRL(0.25, 2.0), BrownianIso(), GRID, 41, 500)}
    for k, H in enumerate((0.25, 0.4, 0.6)):
        out[f"stable_{H}"] = simulate_ensemble(FractionalRL(H, 1.5), StableIso(1.5), GRID, 42 + k, 500)
    return out


@pytest.fixture(scope="module")
def spatial(ensembles):
    return {k: estimate_spatial_regularity((GRID, v), 0.0, 1.0) for k, v in ensembles.items()}


def test_criterion_4_spatial_regularity(spatial):
    bm, fbm = spatial["brownian"].kappa_hat, spatial["fbm_0.25"].kappa_hat
    st = [spatial[f"stable_{H}"] for H in (0.25, 0.4, 0.6)]
    checks = [0.35 <= bm <= 0.65, 1.1 <= fbm <= 1.9, abs(st[1].kappa_hat - 0.75) <= 0.4,
              st[0].ci[0] > st[1].ci[1] and st[1].ci[0] > st[2].ci[1]]
    detail = (f"brownian {bm:.3f}; fbm H=0.25 {fbm:.3f}; stable H=0.25,0.4,0.6 "
              + ", ".join(f"{r.kappa_hat:.3f} [{r.ci[0]:.3f},{r.ci[1]:.3f}]" for r in st))
    record(4, all(checks), detail)


def test_criterion_5_time_regularity(ensembles):
    lags = 1.0 / 2.0 ** np.arange(1, 7)
    bm = estimate_time_regularity((GRID, ensembles["brownian"]), 0.25, lags)
    fs = estimate_time_regularity((GRID, ensembles["stable_0.4"]), 0.25, lags)
    g = uniform_grid(1.0, 2**12)
    lin = estimate_time_regularity([SamplePath(g, g.copy())], 0.0, lags)
    ok = bm.ci[0] > 0.5 and fs.ci[0] > 0.5 and abs(lin.gamma_hat - 0.5) <= 0.05
    record(5, ok, f"brownian {bm.gamma_hat:.3f} (lo {bm.ci[0]:.3f}); fractional stable {fs.gamma_hat:.3f} "
                  f"(lo {fs.ci[0]:.3f}); linear {lin.gamma_hat:.3f}")


# ----------------------------------------------------------------------------
# 6. moment envelope


def test_criterion_6_moment_envelope():
    xi = np.geomspace(0.5, 20, 10)
    lags = 1.0 / 2.0 ** np.arange(1, 9)
    reps = {}
    for name, k, m in (("brownian", Constant(), BrownianIso()), ("ou-levy", Exponential(1.0), StableIso(1.5))):
        ens = simulate_ensemble(k, m, GRID, 7, 200)
        reps[name] = mc_moment_bound_check((GRID, ens), xi, lags)
    ok = all(r.max_over_median <= 10 for r in reps.values())
    record(6, ok, "; ".join(f"{k} max/median {r.max_over_median:.2f}" for k, r in reps.items()))


# ----------------------------------------------------------------------------
# 7. local time formula


def _bridge_refine(path, rng):
    """Brownian bridge midpoints: the same path on a grid with half the step."""
    v = path.values[:, 0]
    dt = path.times[1] - path.times[0]
    mid = 0.5 * (v[:-1] + v[1:]) + rng.normal(0.0, math.sqrt(dt / 4), v.size - 1)
    fine = np.empty(2 * v.size - 1)
    fine[::2], fine[1::2] = v, mid
    return SamplePath(uniform_grid(path.times[-1], 2 * (v.size - 1)), fine[:, None])


def test_criterion_7_localtime_formula():
    b = lambda x: np.cos(x[..., 0])
    shifts = np.linspace(-np.pi, np.pi, 17)
    coarse, fine = [], []
    for r in range(32):
        p = simulate_path(Constant(), BrownianIso(), uniform_grid(1.0, 2**12), stream(70, r))
        coarse.append(localtime_formula_check(b, p, 0.0, 1.0, shifts, Lattice(2**10, 8 * np.pi)))
        half = _bridge_refine(p, stream(71, r))
        fine.append(localtime_formula_check(b, half, 0.0, 1.0, shifts, Lattice(2**11, 8 * np.pi)))
    coarse, fine = np.array(coarse), np.array(fine)
    # one replica's error is a random sum; the ratio is taken between ensemble RMS errors
    ratio = np.sqrt(np.mean(fine**2) / np.mean(coarse**2))
    ok = coarse.max() <= 5e-2 and ratio <= 0.55
    record(7, ok, f"max discrepancy {coarse.max():.2e}; RMS error ratio {ratio:.3f} "
                  f"(per replica {np.min(fine / coarse):.2f} to {np.max(fine / coarse):.2f})")


# ----------------------------------------------------------------------------
# 8. sewing and Young machinery


def test_criterion_8_sewing_and_picard():
    times = np.linspace(0.0, 1.0, 2**12 + 1)
    const = sewing_integral(GammaField.from_callables(times, lambda t, x: np.repeat(t[:, None], x.shape[1], 1)),
                            np.zeros(times.size))
    lin = sewing_integral(linear_gamma(times, 1.0), times)
    rs = sewing_integral(GammaField.from_callables(times, lambda t, x: np.cos(x) * t[:, None] ** 2), times,
                         germ="trapezoid")
    sewing_ok = (const.certified and lin.certified and rs.certified and const.levels.shape[0] == 13
                 and abs(const.integral[-1, 0] - 1.0) <= 1e-12 and abs(lin.integral[-1, 0] - 0.5) <= 2.0**-12
                 and abs(rs.integral[-1, 0] - orc.FROZEN["cos_t2"]) <= 1e-6)
    t1000 = np.linspace(0.0, 1.0, 1001)
    g = frozen_drift_gamma(t1000, np.sin, lambda x: np.cos(x)[..., None])
    s = picard_solve(g, 1.0)
    rk = np.array([orc.sin_ode(1.0, t) for t in t1000])
    err = float(np.max(np.abs(s.theta[:, 0] - rk)))
    cfg = PicardConfig()
    gap = uniqueness_probe(g, 1.0, cfg)
    ok = sewing_ok and err <= 1e-3 and gap <= 2 * cfg.tol
    record(8, ok, f"sewing rates {const.rate:.2g}, {lin.rate:.2f}, {rs.rate:.2f}; picard vs ode {err:.1e}; "
                  f"uniqueness gap {gap:.1e}")


# ----------------------------------------------------------------------------
# 9, 10. regularized SDE


T_SDE = 0.5
N_SDE = 2**12
LAT_SDE = Lattice(512, 32 * np.pi)


@pytest.fixture(scope="module")
def logsingular_path():
    g = uniform_grid(T_SDE, N_SDE)
    return simulate_path(LogSingular(1.5, 1.5, 0.5), StableIso(1.5), g, stream(1))


def _sde(path, beta, step=1):
    ltf = occupation_histogram(path, 0.0, T_SDE, LAT_SDE, marks=path.times[::step], periodic=True)
    b = synth_besov_drift(beta, 1, LAT_SDE, 3)
    # the logarithmic kernel has an infinite regularity ceiling
    return build_gamma_from_drift(b, ltf, gamma=0.5, kappa_hat=np.inf)


def test_criterion_9_regularized_sde(logsingular_path):
    cfg = PicardConfig()
    ok, lines = True, []
    for beta in (-0.5, 0.0):
        fine = _sde(logsingular_path, beta)
        coarse = _sde(logsingular_path, beta, step=2)
        a = picard_solve(fine, 0.3, cfg)
        b = picard_solve(coarse, 0.3, cfg)
        gap = float(np.max(np.abs(a.theta[::2] - b.theta)))
        good = (fine.constants["gamma_hat"] > 0.5 and np.all(a.factors <= 0.5) and a.residual <= cfg.tol
                and gap <= 5 * cfg.tol)
        ok &= good
        lines.append(f"beta={beta}: gamma_hat {fine.constants['gamma_hat']:.3f}, max factor {a.factors.max():.3f}, "
                     f"residual {a.residual:.1e}, halving gap {gap:.1e}")
    record(9, ok, "; ".join(lines))


def test_criterion_10_flow(logsingular_path):
    t1000 = np.linspace(0.0, 1.0, 1001)
    g = frozen_drift_gamma(t1000, np.sin, lambda x: np.cos(x)[..., None])
    tight = PicardConfig(tol=1e-13)
    h = 1e-4

    def rel_err(gam, x0):
        s = picard_solve(gam, x0)
        J = flow_derivative(gam, s)[:, 0, 0]
        fd = (picard_solve(gam, x0 + h, tight, euler_check=False).theta[:, 0]
              - picard_solve(gam, x0 - h, tight, euler_check=False).theta[:, 0]) / (2 * h)
        return float(np.max(np.abs(J - fd) / np.abs(fd)))

    smooth = rel_err(g, 1.0)
    ens = simulate_ensemble(LogSingular(1.5, 1.5, 0.5), StableIso(1.5), uniform_grid(T_SDE, N_SDE), 5, 100)
    kappa = estimate_spatial_regularity((uniform_grid(T_SDE, N_SDE), ens), 0.0, T_SDE, n_boot=50).kappa_hat
    beta = 1.0
    sde = rel_err(_sde(logsingular_path, beta), 0.3)
    ok = smooth <= 1e-2 and sde <= 1e-2 and beta >= 2.1 - kappa
    record(10, ok, f"smooth benchmark {smooth:.1e}; sde beta={beta} (kappa_hat {kappa:.2f}) {sde:.1e}")
