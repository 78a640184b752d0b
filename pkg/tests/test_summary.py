import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from oracles import ig_cdf_quadrature
from volband.errors import DimensionError
from volband.model import build_bin_layout
from volband.prior import sample_inverse_gamma
from volband.sampler import ChainOutput
from volband.summary import credible_band, effective_sample_size, summarize


def test_band_of_integers():
    lo, hi = credible_band(np.arange(1.0, 101.0), 0.9)
    assert (lo, hi) == (pytest.approx(5.95), pytest.approx(95.05))


def test_constant_samples():
    lay = build_bin_layout(20, 1.0, 10)
    out = summarize(np.full((200, 2), 4.0), lay)
    np.testing.assert_allclose([out.s_mean, out.s_lo, out.s_hi], 2.0)
    np.testing.assert_allclose([out.theta_mean, out.theta_lo, out.theta_hi], 4.0)
    np.testing.assert_array_equal(out.ess, 1.0)


def test_band_matches_inverse_gamma_quantiles():
    draws = sample_inverse_gamma(52.5, 35.0, np.random.default_rng(3), size=200_000)
    lo, hi = credible_band(draws, 0.95)
    for q, got in [(0.025, lo), (0.975, hi)]:
        exact = optimize.brentq(lambda x: ig_cdf_quadrature([x], 52.5, 35.0)[0] - q, 0.3, 1.5, xtol=1e-10)
        # Monte Carlo error of a sample quantile is of order 1e-3 here
        assert got == pytest.approx(exact, abs=3e-3)


@pytest.mark.parametrize("phi,tol", [(0.0, 0.1), (0.9, 0.2)])
def test_ess_reference_cases(phi, tol):
    rng = np.random.default_rng(11)
    L = 10_000 if phi == 0 else 100_000
    eps = rng.standard_normal(L)
    x = np.empty(L)
    x[0] = eps[0] / np.sqrt(1 - phi**2)
    for i in range(1, L):
        x[i] = phi * x[i - 1] + eps[i]
    expected = L * (1 - phi) / (1 + phi)
    assert effective_sample_size(x) == pytest.approx(expected, rel=tol)


def test_ess_constant_trace():
    assert effective_sample_size(np.full(500, 2.5)) == 1.0


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), g1=st.floats(0.05, 0.95), g2=st.floats(0.05, 0.95))
def test_band_properties(seed, g1, g2):
    rng = np.random.default_rng(seed)
    lay = build_bin_layout(30, 1.0, 10)
    theta = np.exp(rng.normal(size=(150, 3)))
    a, b = summarize(theta, lay, min(g1, g2), with_ess=False), summarize(theta, lay, max(g1, g2), with_ess=False)
    assert np.all(b.theta_lo <= a.theta_lo) and np.all(a.theta_hi <= b.theta_hi)
    assert np.all(b.s_lo <= a.s_lo) and np.all(a.s_hi <= b.s_hi)
    # the s band is the square root of the theta band
    np.testing.assert_allclose(a.s_lo, np.sqrt(a.theta_lo), atol=1e-9)
    np.testing.assert_allclose(a.s_hi, np.sqrt(a.theta_hi), atol=1e-9)
    # and agrees with the quantiles of sqrt(theta) up to interpolation error
    s_lo, s_hi = credible_band(np.sqrt(theta), a.level)
    assert np.all(np.abs(s_lo - a.s_lo) < 0.1) and np.all(np.abs(s_hi - a.s_hi) < 0.1)
    assert np.all(a.s_lo <= a.s_median) and np.all(a.s_median <= a.s_hi)
    shuffled = summarize(theta[rng.permutation(150)], lay, a.level, with_ess=False)
    for name in ("s_mean", "s_lo", "s_hi", "theta_mean", "theta_lo", "theta_hi"):
        np.testing.assert_allclose(getattr(shuffled, name), getattr(a, name), rtol=1e-12)


def test_summary_from_chain_output():
    lay = build_bin_layout(30, 1.0, 10)
    rng = np.random.default_rng(0)
    chain = ChainOutput(
        theta=np.exp(rng.normal(size=(300, 3))),
        alpha_trace=rng.uniform(10, 20, 300),
        zeta=None,
        accepted=150,
        proposals=300,
        proposal_draws=310,
        warnings={"theta_floor": 1},
    )
    out = summarize(chain, lay, 0.9)
    assert out.acceptance_rate == pytest.approx(0.5)
    assert out.alpha_summary["q05"] < out.alpha_summary["median"] < out.alpha_summary["q95"]
    diag = out.diagnostics()
    assert diag["warnings"] == {"theta_floor": 1} and len(diag["ess"]) == 3
    assert list(out.band_table()) == ["bin_left", "bin_right", "s_mean", "s_lo", "s_hi",
                                      "theta_mean", "theta_lo", "theta_hi"]
    np.testing.assert_allclose(out.bin_right - out.bin_left, lay.widths)


def test_summary_errors():
    lay = build_bin_layout(30, 1.0, 10)
    with pytest.raises(ValueError):
        summarize(np.ones((99, 3)), lay)
    with pytest.raises(DimensionError):
        summarize(np.ones((200, 4)), lay)
    with pytest.raises(ValueError):
        credible_band(np.ones(10), 1.0)
