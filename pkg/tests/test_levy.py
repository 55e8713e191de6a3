import math

import numpy as np
import pytest

from volterra_levy.errors import ConfigurationError
from volterra_levy.levy import (BrownianIso, StableComponentwise, StableIso, StableLogModified, char_exponent,
                                model_from_spec, sample_increment, sample_positive_stable, sample_stable_1d)
from volterra_levy.rng import stream


def ecf(x, xi):
    """Empirical ch.f. (real part) of rows of ``x`` at ``xi`` with its standard error."""
    c = np.cos(np.atleast_2d(x) @ np.atleast_1d(xi)) if np.ndim(x) > 1 else np.cos(x * xi)
    return c.mean(), c.std(ddof=1) / math.sqrt(c.size)


def test_char_exponent_examples():
    assert char_exponent(StableIso(1.3, 1.0), [1.0]) == pytest.approx(1.0)
    assert char_exponent(StableComponentwise(1.0, 1.0, dim=2), [1.0, 1.0]) == pytest.approx(2.0)
    assert char_exponent(StableLogModified(0.5), [1.0]) == pytest.approx(math.log(3), rel=1e-14)
    assert char_exponent(BrownianIso(2.0), [0.5]) == pytest.approx(4 * 0.25 / 2)
    for m in (StableIso(1.5, dim=2), StableComponentwise(1.5, dim=2), StableLogModified(0.5, dim=2)):
        assert char_exponent(m, [0.0, 0.0]) == 0.0
        assert char_exponent(m, [0.3, -1.2]) == pytest.approx(char_exponent(m, [-0.3, 1.2]))


def test_componentwise_dominates_isotropic():
    rng = np.random.default_rng(1)
    xi = rng.standard_normal((100, 3))
    for a in (0.5, 1.0, 1.7, 2.0):
        comp = char_exponent(StableComponentwise(a, 1.0, dim=3), xi)
        iso = char_exponent(StableIso(a, 1.0, dim=3), xi)
        assert np.all(comp >= iso * (1 - 1e-12))


@pytest.mark.parametrize("alpha,xi", [(2.0, 1.0), (0.7, 2.0), (1.5, 1.0)])
def test_sample_stable_cf(alpha, xi):
    x = sample_stable_1d(alpha, stream(5), 10**6)
    m, se = ecf(x, xi)
    assert abs(m - math.exp(-(xi**alpha))) <= 3 * se


def test_cauchy_median():
    x = sample_stable_1d(1.0, stream(6), 10**6)
    # median of a Cauchy sample has standard error pi / (2 sqrt(n))
    assert abs(np.median(x)) <= 3 * math.pi / (2 * math.sqrt(x.size))


def test_positive_stable_laplace():
    a = 0.75
    x = sample_positive_stable(a, stream(7), 10**6)
    v = np.exp(-x)
    assert abs(v.mean() - math.exp(-1.0)) <= 3 * v.std() / math.sqrt(v.size)


def test_brownian_variance():
    # psi = sigma^2 xi^2 / 2, so increments over dt have variance sigma^2 dt
    x = sample_increment(BrownianIso(1.0), 0.25, stream(8), 10**6)[:, 0]
    se = x.var() * math.sqrt(2.0 / x.size)
    assert abs(x.var() - 0.25) <= 3 * se


@pytest.mark.parametrize("model,dt", [
    (BrownianIso(0.7), 0.3),
    (StableIso(1.5, 1.0, dim=2), 1.0),
    (StableIso(0.8, 2.0, dim=1), 0.5),
    (StableComponentwise(1.2, 1.0, dim=2), 0.7),
    (StableLogModified(0.5, dim=1), 0.1),
    (StableLogModified(0.6, dim=2), 1.0),
])
def test_increment_cf_grid(model, dt):
    n = 2 * 10**5
    x = sample_increment(model, dt, stream(9), n)
    rng = np.random.default_rng(0)
    dirs = rng.standard_normal((10, model.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.geomspace(0.2, 3.0, 10)
    bad = 0
    for r, v in zip(radii, dirs):
        xi = r * v
        m, se = ecf(x, xi)
        target = math.exp(-dt * float(char_exponent(model, xi)))
        bad += abs(m - target) > 3 * se
    assert bad <= 1


def test_cf_at_zero_and_isotropic_unit():
    x = sample_increment(StableIso(1.5, 1.0, dim=2), 1.0, stream(10), 10**6)
    assert ecf(x, [0.0, 0.0])[0] == 1.0
    m, se = ecf(x, [1 / math.sqrt(2), 1 / math.sqrt(2)])
    assert abs(m - math.exp(-1.0)) <= 3 * se


def test_determinism_and_independence():
    a = sample_increment(StableIso(1.5), 0.1, stream(3, 4), 1000)
    b = sample_increment(StableIso(1.5), 0.1, stream(3, 4), 1000)
    assert np.array_equal(a, b)
    c = sample_increment(StableIso(1.5), 0.1, stream(3, 5), 1000)
    assert not np.array_equal(a, c)
    g = sample_increment(BrownianIso(), 0.1, stream(11), 10**5)[:, 0]
    rho = np.corrcoef(g[:-1], g[1:])[0, 1]
    assert abs(rho) <= 3 / math.sqrt(g.size)


def test_model_validation():
    with pytest.raises(ConfigurationError):
        StableLogModified(1.2)
    with pytest.raises(ConfigurationError):
        model_from_spec({"kind": "gamma"})
    assert model_from_spec({"kind": "stable_iso", "alpha": 1.5}).alpha == 1.5
