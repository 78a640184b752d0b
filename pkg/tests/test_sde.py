import warnings

import numpy as np
import pytest

from volband.errors import DimensionError, DomainError, NumericalError
from volband.model import ObservationRecord
from volband.sde import (
    BLOCKS_HEIGHTS,
    BLOCKS_TIMES,
    SdeSpec,
    blocks_spec,
    blocks_volatility,
    cir_mean,
    cir_spec,
    constant_spec,
    euler_maruyama,
    log_transform,
    returns_path,
    simulate_cir,
    subsample,
    subsample_indices,
    to_returns,
)


def test_degenerate_sde_is_constant():
    spec = SdeSpec(drift=lambda t, x: 0.0, dispersion=lambda t, x: 0.0, x0=3.2)
    path = euler_maruyama(spec, 101, np.random.default_rng(0))
    np.testing.assert_array_equal(path.values, 3.2)
    assert path.equidistant and path.T == 1.0


def test_noise_free_linear_drift_on_fine_grid():
    spec = SdeSpec(drift=lambda t, x: -10 * x + 20, dispersion=lambda t, x: 0.0, x0=0.0)
    path = euler_maruyama(spec, 800_001, np.random.default_rng(0))
    assert path.n == 800_000
    assert path.values[-1] == pytest.approx(2 * (1 - np.exp(-10)), abs=1e-4)


def test_vectorised_paths_and_reproducibility():
    spec = blocks_spec()
    rng = np.random.default_rng(1)
    many = euler_maruyama(spec, 201, rng, paths=3)
    assert many.shape == (3, 201)
    np.testing.assert_array_equal(many[:, 0], 2.0)
    one = euler_maruyama(spec, 201, np.random.default_rng(5))
    again = euler_maruyama(spec, 201, np.random.default_rng(5))
    np.testing.assert_array_equal(one.values, again.values)


def test_weak_error_terminal_variance():
    x = euler_maruyama(constant_spec(1.7, T=2.0), 201, np.random.default_rng(2), paths=10_000)
    assert x[:, -1].var() == pytest.approx(1.7**2 * 2.0, rel=0.05)


def test_blowup_raises_with_step():
    spec = SdeSpec(drift=lambda t, x: x**3, dispersion=lambda t, x: 0.0, x0=10.0)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(NumericalError) as err:
            euler_maruyama(spec, 1001, np.random.default_rng(0))
        assert err.value.step is not None and err.value.step > 0
        with pytest.raises(NumericalError):
            euler_maruyama(spec, 1001, np.random.default_rng(0), paths=2)
    with pytest.raises(DomainError):
        euler_maruyama(spec, 1, np.random.default_rng(0))


def test_subsample_strides():
    path = ObservationRecord.equispaced(np.arange(11.0))
    np.testing.assert_array_equal(subsample(path, 5).values, [0, 2, 4, 6, 8, 10])
    assert subsample(path, 10).values.tolist() == path.values.tolist()
    np.testing.assert_array_equal(subsample_indices(800_001, 4000)[:3], [0, 200, 400])
    assert subsample_indices(800_001, 4000).size == 4001
    with pytest.raises(DimensionError):
        subsample(path, 3)


def test_subsample_keeps_simulated_values():
    fine = euler_maruyama(blocks_spec(), 4001, np.random.default_rng(3))
    coarse = subsample(fine, 400)
    idx = subsample_indices(4001, 400)
    np.testing.assert_array_equal(coarse.values, fine.values[idx])
    np.testing.assert_array_equal(coarse.times, fine.times[idx])


def test_blocks_values():
    assert blocks_volatility(0.0) == 10.0
    assert blocks_volatility(1.0) == pytest.approx(10.0, abs=1e-12)
    assert blocks_volatility(0.3) == pytest.approx(20.966818, abs=1e-9)
    # half a jump at the jump time itself
    assert blocks_volatility(0.1) == pytest.approx(10 + 3.655606 * 2)


def test_blocks_shape():
    t = np.linspace(0, 1, 100_001)
    s = blocks_volatility(t)
    assert np.all(s > 0)
    scalar = np.array([blocks_volatility(u) for u in t[::997]])
    np.testing.assert_allclose(s[::997], scalar, rtol=1e-14)
    off = np.setdiff1d(np.round(t, 8), np.round(BLOCKS_TIMES, 8))
    jumps = np.flatnonzero(np.abs(np.diff(blocks_volatility(off))) > 1e-9)
    assert jumps.size == len(BLOCKS_TIMES) == len(BLOCKS_HEIGHTS) == 11
    assert sum(BLOCKS_HEIGHTS) == pytest.approx(0.0, abs=1e-12)


def test_cir_noise_free_reduction():
    path, vol = simulate_cir(6, 3, 0, 1.0, 1.0, 8001, np.random.default_rng(0))
    np.testing.assert_allclose(path.values, cir_mean(6, 3, 1.0, path.times), atol=1e-3)
    assert np.all(vol == 0)
    assert cir_mean(6, 3, 1.0, 1.0) == pytest.approx(2 - np.exp(-3))


def test_cir_mean_monte_carlo():
    x = euler_maruyama(cir_spec(6, 3, 2, 1.0), 2001, np.random.default_rng(4), paths=4000)
    assert x[:, -1].mean() == pytest.approx(2 - np.exp(-3), rel=0.02)


def test_cir_negative_states_rare():
    path, vol = simulate_cir(6, 3, 2, 1.0, 1.0, 800_001, np.random.default_rng(7))
    assert np.mean(path.values < 0) < 1e-3
    sub, subvol = simulate_cir(6, 3, 2, 1.0, 1.0, 8001, np.random.default_rng(7), n=400)
    assert sub.n == 400 and subvol.shape == (401,)
    np.testing.assert_allclose(subvol, 2 * np.sqrt(np.maximum(sub.values, 0)))


def test_cir_feller_and_domain():
    with pytest.warns(RuntimeWarning, match="Feller"):
        simulate_cir(1, 3, 2, 1.0, 1.0, 101, np.random.default_rng(0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        simulate_cir(6, 3, 2, 1.0, 1.0, 101, np.random.default_rng(0))
    with pytest.raises(DomainError):
        simulate_cir(6, 3, 2, 0.0, 1.0, 101, np.random.default_rng(0))


def test_log_transform():
    np.testing.assert_array_equal(log_transform([100, 100, 100]), [0, 0, 0])
    np.testing.assert_allclose(log_transform([100, 200]), [0, np.log(2)])
    rec = log_transform(ObservationRecord.equispaced([5.0, 10.0, 2.5]))
    assert isinstance(rec, ObservationRecord)
    np.testing.assert_allclose(rec.values, [0, np.log(2), np.log(0.5)])
    with pytest.raises(DomainError):
        log_transform([1.0, 0.0, 2.0])


def test_returns():
    np.testing.assert_allclose(to_returns([100, 110]), [0.1])
    np.testing.assert_array_equal(to_returns([7, 7, 7, 7]), [0, 0, 0])
    np.testing.assert_allclose(to_returns([2, 1, 2]), [-0.5, 1.0])
    path = returns_path(ObservationRecord.equispaced([2.0, 1.0, 2.0]))
    np.testing.assert_allclose(path.values, [0, -0.5, 0.5])
    np.testing.assert_allclose(np.diff(path.values), [-0.5, 1.0])
    with pytest.raises(DomainError):
        to_returns([1.0, 0.0, 1.0])
