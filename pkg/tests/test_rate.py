import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covertjam.errors import InvalidArgumentError
from covertjam.geometry import NetworkGeometry
from covertjam.rate import (FJ, GNJ, RateScenario, covert_rate, dc_surrogate, psi_gradient, psi_linearized,
                            psi_term, sigma_term)

distance = st.floats(1.0, 20.0)
scenarios = st.builds(
    RateScenario,
    p_total=st.floats(0.01, 1e3),
    g_ab=st.floats(0.01, 30.0),
    g_jb=st.floats(0.01, 10.0),
    geometry=st.builds(NetworkGeometry, distance, distance, distance, distance, st.floats(2.0, 4.0)),
    sigma_b2=st.floats(0.01, 10.0),
)
alphas = st.floats(0.0, 1.0)


def _unit(mode=GNJ, g_jb=1.0):
    return RateScenario(1.0, 1.0, g_jb, NetworkGeometry(1.0, 1.0, 1.0, 1.0, 2.0), 1.0, mode)


def test_zero_signal_gives_zero_rate():
    for mode in (GNJ, FJ):
        assert covert_rate(0.0, _unit(mode)) == 0.0


def test_unit_plug_in():
    assert covert_rate(1.0, _unit(FJ)) == pytest.approx(1.0, abs=1e-15)
    # GNJ at alpha=1 has no jamming term: same unit SNR
    assert covert_rate(1.0, _unit(GNJ)) == pytest.approx(1.0, abs=1e-15)
    # alpha=1/2, unit gains: SNR = 0.5 / (1 + 0.5)
    assert covert_rate(0.5, _unit(GNJ)) == pytest.approx(math.log2(4 / 3), abs=1e-15)


def test_rate_reference_expression():
    geo = NetworkGeometry(3.0, 4.0, 2.0, 5.0, 2.5)
    s = RateScenario(7.0, 1.3, 0.6, geo, 0.4)
    alpha = 0.37
    num = alpha * 7.0 * 1.3 * 2.0**2.5
    den = 2.0**2.5 * 3.0**2.5 * 0.4 + (1 - alpha) * 7.0 * 0.6 * 3.0**2.5
    assert covert_rate(alpha, s) == pytest.approx(math.log2(1 + num / den), rel=1e-14)
    assert covert_rate(alpha, s.with_mode(FJ)) == pytest.approx(math.log2(1 + alpha * 7.0 * 1.3 / (3.0**2.5 * 0.4)), rel=1e-14)


def test_no_interference_equals_fj():
    s = _unit(GNJ, g_jb=0.0)
    grid = np.linspace(0, 1, 101)
    np.testing.assert_array_equal(covert_rate(grid, s), covert_rate(grid, s.with_mode(FJ)))


def test_scenario_validation():
    geo = NetworkGeometry.default()
    with pytest.raises(InvalidArgumentError):
        RateScenario(0.0, 1.0, 1.0, geo)
    with pytest.raises(InvalidArgumentError):
        RateScenario(1.0, -1.0, 1.0, geo)
    with pytest.raises(InvalidArgumentError):
        RateScenario(1.0, 1.0, 1.0, geo, sigma_b2=0.0)
    with pytest.raises(InvalidArgumentError):
        RateScenario(1.0, 1.0, 1.0, geo, mode="xx")
    with pytest.raises(InvalidArgumentError):
        covert_rate(1.5, _unit())


def test_split_identity_on_random_points(rng):
    geo = NetworkGeometry.default()
    for _ in range(20):
        s = RateScenario(float(10 ** rng.uniform(-2, 3)), float(rng.exponential()), float(rng.exponential()), geo,
                         float(10 ** rng.uniform(-1, 1)))
        a = rng.uniform(0, 1, 100)
        np.testing.assert_allclose(sigma_term(a, s) - psi_term(a, s), covert_rate(a, s), rtol=0, atol=1e-12)


def test_psi_at_full_power():
    geo = NetworkGeometry(3.0, 4.0, 2.0, 5.0, 2.0)
    s = RateScenario(5.0, 1.0, 2.0, geo, 0.7)
    assert psi_term(1.0, s) == pytest.approx(math.log2(4.0 * 9.0 * 0.7), rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(scenarios)
def test_terms_are_concave(s):
    x = np.linspace(0, 1, 201)
    h = x[1] - x[0]
    for f in (sigma_term, psi_term):
        y = np.asarray(f(x, s))
        second = (y[2:] - 2 * y[1:-1] + y[:-2]) / h**2
        assert np.all(second <= 1e-10 * max(1.0, np.max(np.abs(y))) / h**2)


@settings(max_examples=100, deadline=None)
@given(scenarios, st.floats(0.01, 0.99))
def test_gradient_matches_finite_difference(s, anchor):
    _, b, c = s.coefficients()
    # step small against the curvature scale of log(b + (1 - x) c), kept inside [0, 1]
    h = min(1e-3 * (b + (1 - anchor) * c) / c, 0.25 * min(anchor, 1 - anchor))
    f = [psi_term(anchor + k * h, s) for k in (-2, -1, 1, 2)]
    fd = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
    # the stencil cannot resolve slopes below its rounding floor
    floor = 18 * np.finfo(float).eps * max(abs(v) for v in f) / (12 * h)
    assert fd == pytest.approx(psi_gradient(anchor, s), rel=1e-6, abs=floor)


@settings(max_examples=100, deadline=None)
@given(scenarios, alphas)
def test_linearization_touches_at_anchor(s, anchor):
    assert psi_linearized(anchor, anchor, s) == psi_term(anchor, s)


@settings(max_examples=100, deadline=None)
@given(scenarios, alphas)
def test_surrogate_lower_bounds_rate(s, anchor):
    x = np.linspace(0, 1, 301)
    assert np.all(np.asarray(psi_linearized(x, anchor, s)) >= np.asarray(psi_term(x, s)) - 1e-12)
    assert np.all(np.asarray(dc_surrogate(x, anchor, s)) <= np.asarray(covert_rate(x, s)) + 1e-12)
    assert dc_surrogate(anchor, anchor, s) == pytest.approx(covert_rate(anchor, s), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(scenarios)
def test_rate_increasing_in_alpha(s):
    x = np.linspace(0, 1, 501)
    for mode in (GNJ, FJ):
        r = np.asarray(covert_rate(x, s.with_mode(mode)))
        assert np.all(np.diff(r) > 0)


@settings(max_examples=100, deadline=None)
@given(scenarios, alphas)
def test_jamming_never_helps(s, alpha):
    assert covert_rate(alpha, s) <= covert_rate(alpha, s.with_mode(FJ))


@settings(max_examples=50, deadline=None)
@given(scenarios, alphas, st.floats(1.0, 20.0), st.floats(0.0, 10.0))
def test_fj_ignores_jammer_link(s, alpha, d_jb, g_jb):
    fj = s.with_mode(FJ)
    other = RateScenario(s.p_total, s.g_ab, g_jb, s.geometry.replace(d_jb=d_jb), s.sigma_b2, FJ)
    assert covert_rate(alpha, fj) == covert_rate(alpha, other)
