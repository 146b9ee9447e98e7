import numpy as np
import pytest

from modvillain.complex import Cell
from modvillain.correlation import (CorrelationPoint, certified_floor, check_floor, connected,
                                    decay_series, fit_power_law, marginal_mc_two_point, two_point)
from modvillain.errors import DomainError, IntegrityError, PrecisionError

P3 = Cell((0, 0, 0), (0, 1))


@pytest.fixture(scope="module")
def series():
    return decay_series(3, 0.1, 0, [8, 12, 16, 24, 32, 48, 64], 512)


def test_connected_formula():
    v = connected(0.1, 0.5, 0.5, 0.1)
    expected = np.exp(-4 * np.pi**2 * 0.1) * (np.exp(-8 * np.pi**2 * 0.1 * 0.1) - 1)
    assert v == pytest.approx(expected, rel=1e-14)
    assert connected(0.1, 0.5, 0.5, 0.0) == 0.0


def test_floor_below_value():
    for c in (-0.3, -1e-6, 1e-4, 0.2):
        assert abs(connected(0.2, 0.6, 0.6, c)) >= certified_floor(0.2, 0.6, 0.6, c)


def test_frozen_decay_values(series):
    assert series[0].value == pytest.approx(6.635733403935914e-06, rel=1e-9)
    assert series[-1].value == pytest.approx(1.2318474425026977e-08, rel=1e-9)
    assert series[0].cross_term == pytest.approx(-0.00016227643994055262, rel=1e-9)


def test_sign_law(series):
    for pt in series:
        assert np.sign(pt.value) == -np.sign(pt.cross_term)


def test_floor_and_fit(series):
    check_floor(series)
    fit = fit_power_law(series)
    assert -3.3 <= fit.exponent <= -2.7
    assert fit.n_range == (8, 64)


def test_ratio_approaches_two_to_minus_d(series):
    by_n = {pt.n: pt.value for pt in series}
    assert abs(by_n[64] / by_n[32]) == pytest.approx(1 / 8, rel=0.25)


def test_power_law_not_exponential(series):
    rates = [np.log(abs(pt.value)) / pt.n for pt in series]
    assert abs(rates[-1]) < abs(rates[0])


def test_two_dimensions_vanish():
    assert all(pt.value == 0 for pt in decay_series(2, 0.3, 1, [1, 4, 7], 64))
    assert two_point(2, 0.3, Cell((0, 0), (0, 1)), Cell((2, 3), (0, 1)), 16) == 0.0


def test_two_point_matches_series():
    pts = decay_series(3, 0.1, 0, [2], 64)
    assert two_point(3, 0.1, P3, Cell((2, 0, 0), (0, 1)), 64) == pytest.approx(pts[0].value, rel=1e-10)


def test_grid_too_small():
    with pytest.raises(PrecisionError):
        decay_series(3, 0.1, 0, [16], 64)


def test_bad_inputs():
    with pytest.raises(DomainError):
        decay_series(3, -0.1, 0, [1], 64)
    with pytest.raises(DomainError):
        decay_series(3, 0.1, 3, [1], 64)
    with pytest.raises(DomainError):
        fit_power_law([CorrelationPoint(n, 1.0 / n, 64, 0.1) for n in (1, 2, 3)])


def test_fit_on_exact_power_law():
    pts = [CorrelationPoint(n, 5.0 * n**-2.5, 0, 0.1) for n in (2, 4, 8, 16)]
    fit = fit_power_law(pts)
    assert fit.exponent == pytest.approx(-2.5)
    assert fit.log_prefactor == pytest.approx(np.log(5.0))
    assert fit.max_log_residual < 1e-12


def test_check_floor_raises():
    with pytest.raises(IntegrityError):
        check_floor([CorrelationPoint(1, 1e-9, 64, 0.1, -0.1, 1e-3)])


def test_marginal_mc_matches_closed_form():
    q = Cell((1, 0, 0), (0, 1))
    exact = two_point(3, 0.1, P3, q, 32)
    est, se = marginal_mc_two_point(3, 0.1, P3, q, 32, 50_000, np.random.default_rng(11))
    assert abs(est - exact) < 3 * se


def test_marginal_mc_rank_one_and_seeded():
    a = marginal_mc_two_point(3, 0.1, P3, P3, 16, 2000, np.random.default_rng(0))
    b = marginal_mc_two_point(3, 0.1, P3, P3, 16, 2000, np.random.default_rng(0))
    assert a == b
    exact = two_point(3, 0.1, P3, P3, 16)
    assert abs(a[0] - exact) < 4 * a[1]
