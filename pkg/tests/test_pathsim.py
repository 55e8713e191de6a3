import math

import numpy as np
import pytest

import oracles as orc
from volterra_levy.errors import BudgetError, DomainError
from volterra_levy.kernels import Constant, Exponential, FractionalRL, LogSingular, kernel_alpha_energy
from volterra_levy.levy import BrownianIso, StableIso, StableLogModified
from volterra_levy.pathsim import (SamplePath, brownian_exceedance, char_function_mc, char_function_mc_array,
                                   char_function_theory, continuity_in_probability_probe, draw_increments,
                                   ensemble_paths, simulate_ensemble, simulate_path, uniform_grid, volterra_sum)
from volterra_levy.rng import stream


def test_constant_kernel_is_the_levy_process():
    grid = uniform_grid(1.0, 64)
    inc = draw_increments(StableIso(1.5), grid, stream(1))
    p = simulate_path(Constant(), StableIso(1.5), grid, stream(1))
    assert p.values[0, 0] == 0.0
    assert np.allclose(p.values[1:, 0], np.cumsum(inc[:, 0]), atol=1e-13)


@pytest.mark.parametrize("kernel", [Exponential(1.0), FractionalRL(0.3, 1.5), LogSingular(1.5, 1.5, 0.5)])
def test_fft_matches_direct(kernel):
    n = 1024 if kernel.id.startswith("exp") else 256
    grid = uniform_grid(0.5, n)
    inc = draw_increments(StableIso(1.5), grid, stream(2))
    a = volterra_sum(kernel, 1.5, grid, inc, method="fft")
    b = volterra_sum(kernel, 1.5, grid, inc, method="direct")
    assert np.max(np.abs(a - b)) <= 1e-10


def test_direct_budget():
    grid = uniform_grid(1.0, 512)
    inc = np.zeros((512, 1))
    with pytest.raises(BudgetError):
        volterra_sum(Exponential(1.0), 2.0, grid, inc, method="direct", work_cap=1e4)


def test_grid_checks():
    with pytest.raises(DomainError):
        simulate_path(LogSingular(1.5, 1.5, 0.5), StableIso(1.5), uniform_grid(0.8, 8), stream(0))
    with pytest.raises(DomainError):
        SamplePath([0.0], [[0.0]])


def test_fractional_brownian_variance():
    # H = 1/2, alpha_ref = 2: k = 1, Var z_1 = energy * sigma^2
    k = FractionalRL(0.5, 2.0)
    z = simulate_ensemble(k, BrownianIso(), uniform_grid(1.0, 16), 3, 10**5)[:, -1, 0]
    target = kernel_alpha_energy(k, 2.0, 0.0, 1.0)
    se = z.var() * math.sqrt(2.0 / z.size)
    assert abs(z.var() - target) <= 3 * se


def test_char_function_theory_closed_forms():
    k, m = FractionalRL(0.4, 1.5), StableIso(1.5)
    for xi, t in [(2.0, 0.5), (0.3, 1.0), (5.0, 0.1)]:
        ref = orc.fractional_stable_cf(1.0, 1.5, 0.4, xi, t)
        assert char_function_theory(k, m, [xi], t).real == pytest.approx(ref, rel=1e-8)
    assert char_function_theory(k, m, [0.0], 0.5) == 1.0
    m2 = StableLogModified(0.5)
    assert char_function_theory(Constant(), m2, [1.5], 0.7).real == pytest.approx(
        math.exp(-0.7 * 1.5**0.5 * math.log(3.5)), rel=1e-10)


def test_char_function_mc_fractional_stable():
    k, m = FractionalRL(0.4, 1.5), StableIso(1.5)
    grid = uniform_grid(0.5, 64)
    z = simulate_ensemble(k, m, grid, 4, 10**5)
    est, se = char_function_mc_array(z[:, -1], [2.0])
    theory = char_function_theory(k, m, [2.0], 0.5)
    assert abs(est.real - theory.real) <= 3 * se.real
    assert abs(est.imag) <= 3 * se.imag


def test_char_function_mc_on_paths():
    grid = uniform_grid(1.0, 8)
    paths = ensemble_paths(Constant(), BrownianIso(), grid, 5, 200)
    est, se = char_function_mc(paths, [0.0], 0.5)
    assert est == 1.0 and se == 0.0
    with pytest.raises(DomainError):
        char_function_mc(paths, [1.0], 0.3)


def test_refinement_stability():
    k, m = Exponential(1.0), StableIso(1.5)
    xi = [1.0]
    coarse = simulate_ensemble(k, m, uniform_grid(1.0, 32), 6, 40000)[:, -1]
    fine = simulate_ensemble(k, m, uniform_grid(1.0, 64), 7, 40000)[:, -1]
    a, sa = char_function_mc_array(coarse, xi)
    b, sb = char_function_mc_array(fine, xi)
    assert abs(a.real - b.real) <= 3 * math.hypot(sa.real, sb.real)


def test_continuity_probe_brownian():
    lags = np.array([0.0, 1 / 64, 1 / 16, 1 / 4, 1.0])
    tab = continuity_in_probability_probe(Constant(), BrownianIso(), 1.0, lags, eps=0.5,
                                          replicas=20000, n_steps=64, seed=1)
    assert tab[0, 1] == 0.0
    for lag, p, se in tab[1:]:
        ref = orc.brownian_exceedance(lag, 0.5)
        assert abs(p - ref) <= 3 * se + 1e-12
        assert float(brownian_exceedance(lag, 0.5)) == pytest.approx(ref, rel=1e-12)


def test_continuity_probe_fractional_trend():
    lags = 0.5 / 2.0 ** np.arange(0, 7)
    tab = continuity_in_probability_probe(FractionalRL(0.4, 1.5), StableIso(1.5), 0.5, lags,
                                          replicas=5000, n_steps=128, seed=2)
    p, se = tab[:, 1], tab[:, 2]
    # shrinking lags: nonincreasing up to 3 standard errors, and heading to 0
    assert np.all(np.diff(p) <= 3 * np.hypot(se[1:], se[:-1]))
    assert p[-1] < 0.5 * p[0]
