import numpy as np
import pytest

from volterra_levy.errors import DomainError, NotFoundError
from volterra_levy.kernels import Constant, Exponential, FractionalRL, LogSingular
from volterra_levy.levy import StableComponentwise, StableIso, StableLogModified
from volterra_levy.lnd import LndProbeConfig, lnd_infimum, lnd_ratio, min_admissible_zeta

FAST = dict(t_grid=np.geomspace(0.25, 1e-20, 20), xi_radii=np.geomspace(1e-2, 1e4, 4))


def test_ratio_constant():
    for s, t, xi in [(0.0, 1.0, 2.0), (0.3, 0.4, 0.01), (0.5, 0.9, 100.0)]:
        assert lnd_ratio(Constant(), StableIso(1.3, 1.7), s, t, [xi], 1.0, 1.3) == pytest.approx(1.7, rel=1e-8)


def test_ratio_fractional():
    H, a = 0.3, 1.5
    k = FractionalRL(H, a)
    for s, t, xi in [(0.0, 1.0, 2.0), (0.2, 0.3, 50.0)]:
        assert lnd_ratio(k, StableIso(a), s, t, [xi], H * a, a) == pytest.approx(1 / (H * a), rel=1e-8)


def test_ratio_homogeneous():
    k, m = Exponential(2.0), StableIso(1.2)
    r = lnd_ratio(k, m, 0.1, 0.6, [1.0], 1.0, 1.2)
    for c in (0.1, 10.0):
        assert lnd_ratio(k, m, 0.1, 0.6, [c], 1.0, 1.2) == pytest.approx(r, rel=1e-10)


def test_ratio_componentwise_axis():
    k = FractionalRL(0.4, 1.5)
    a = lnd_ratio(k, StableComponentwise(1.5, dim=2), 0.0, 0.5, [3.0, 0.0], 0.6, 1.5)
    b = lnd_ratio(k, StableIso(1.5), 0.0, 0.5, [3.0], 0.6, 1.5)
    assert a == pytest.approx(b, rel=1e-12)


def test_ratio_errors():
    with pytest.raises(DomainError):
        lnd_ratio(Constant(), StableIso(1.5), 0.5, 0.5, [1.0], 1.0, 1.5)
    with pytest.raises(DomainError):
        lnd_ratio(Constant(), StableIso(1.5), 0.0, 0.5, [0.0], 1.0, 1.5)


def test_infimum_examples():
    res = lnd_infimum(Constant(), StableIso(1.5, 2.0), LndProbeConfig(zeta=1.0, alpha=1.5, **FAST))
    assert res.infimum == pytest.approx(2.0, rel=1e-8)
    inf, arg = res
    assert set(arg) == {"t", "s", "xi"}
    res = lnd_infimum(Constant(), StableLogModified(0.5), LndProbeConfig(zeta=1.0, alpha=0.5, **FAST))
    assert res.infimum >= 1.0


def test_infimum_vanishes_below_h_alpha():
    H, a = 0.4, 1.5
    res = lnd_infimum(FractionalRL(H, a), StableIso(a), LndProbeConfig(zeta=H * a - 0.05, alpha=a, **FAST))
    assert res.infimum == 0.0 and res.slope > 0
    vals = res.per_t[:, 1]
    assert np.all(np.diff(vals) <= 1e-12 * vals[:-1])


def test_infimum_refinement_monotone():
    k, m = Exponential(1.0), StableIso(1.5)
    coarse = LndProbeConfig(zeta=1.0, alpha=1.5, t_grid=np.geomspace(0.25, 1e-3, 5))
    fine = LndProbeConfig(zeta=1.0, alpha=1.5, t_grid=np.geomspace(0.25, 1e-3, 9))
    assert lnd_infimum(k, m, fine).grid_min <= lnd_infimum(k, m, coarse).grid_min


def test_min_admissible_zeta():
    cfg = LndProbeConfig(**FAST)
    assert min_admissible_zeta(Constant(), StableIso(1.5), 1.5, cfg) == pytest.approx(1.0, abs=1e-3)
    assert min_admissible_zeta(FractionalRL(0.3, 1.5), StableIso(1.5), 1.5, cfg) == pytest.approx(0.45, abs=1e-3)
    for lo in (0.5, 0.2, 0.05):
        z = min_admissible_zeta(LogSingular(1.5, 1.5, 0.5), StableIso(1.5), 1.5, cfg, interval=(lo, 2.0))
        assert z == lo


def test_min_admissible_zeta_not_found():
    cfg = LndProbeConfig(**FAST)
    with pytest.raises(NotFoundError):
        min_admissible_zeta(Constant(), StableIso(1.5), 1.5, cfg, interval=(0.2, 0.8))
