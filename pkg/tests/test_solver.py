import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covertjam.errors import InfeasibleError, InvalidArgumentError
from covertjam.experiments import random_scenario
from covertjam.feasibility import CovertnessSpec, covert_exact, max_feasible_alpha
from covertjam.geometry import NetworkGeometry
from covertjam.rate import FJ, GNJ, RateScenario, covert_rate, dc_surrogate
from covertjam.solver import SolverConfig, golden_section_max, grid_oracle, solve, solve_fj, solve_gnj_dc

distance = st.floats(1.0, 20.0)
scenarios = st.builds(
    RateScenario,
    p_total=st.floats(0.01, 1e3),
    g_ab=st.floats(0.01, 30.0),
    g_jb=st.floats(0.0, 10.0),
    geometry=st.builds(NetworkGeometry, distance, distance, distance, distance, st.floats(2.0, 4.0)),
    sigma_b2=st.floats(0.01, 10.0),
)
specs = st.builds(CovertnessSpec, st.floats(0.01, 0.5))


def _scenario(rng, mode=GNJ):
    return random_scenario(rng)[0].with_mode(mode)


def test_golden_section_on_parabola():
    x, fx = golden_section_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, 1e-12)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert fx == pytest.approx(0.0, abs=1e-12)
    assert golden_section_max(lambda t: t, 0.0, 2.0)[0] == 2.0


def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        SolverConfig(max_iters=0)
    with pytest.raises(InvalidArgumentError):
        SolverConfig(rate_tol=0.0)
    with pytest.raises(InvalidArgumentError):
        SolverConfig(alpha_init=1.0)
    with pytest.raises(InvalidArgumentError):
        grid_oracle(RateScenario(1.0, 1.0, 1.0, NetworkGeometry.default()), 0.1, grid_points=5)


def test_solvers_match_oracle(rng):
    tol = 10 * SolverConfig().alpha_tol
    for _ in range(15):
        scen, spec = random_scenario(rng)
        for mode, fn in ((GNJ, solve_gnj_dc), (FJ, solve_fj)):
            s = scen.with_mode(mode)
            res = fn(s, spec)
            ora = grid_oracle(s, spec, grid_points=100_000, refine=True)
            assert res.alpha_star == pytest.approx(ora.alpha_star, abs=tol)
            assert res.rate == pytest.approx(ora.rate, abs=1e-4)
            assert res.mode == mode


def test_interference_free_optimum_is_boundary(square):
    s = RateScenario(5.0, 2.0, 0.0, square)
    res = solve_gnj_dc(s, 0.1)
    assert res.alpha_star == max_feasible_alpha(square, 0.1).alpha_max


def test_fj_sits_on_boundary(square):
    res = solve_fj(RateScenario(5.0, 2.0, 1.0, square, mode=FJ), 0.1)
    assert res.alpha_star == max_feasible_alpha(square, 0.1).alpha_max
    assert (res.iterations, res.converged) == (0, True)
    assert solve(RateScenario(5.0, 2.0, 1.0, square, mode=FJ), 0.1) == res


@settings(max_examples=60, deadline=None)
@given(scenarios, specs)
def test_result_invariants(s, spec):
    res = solve_gnj_dc(s, spec)
    assert covert_exact(res.alpha_star, s.geometry, spec)
    assert res.rate == covert_rate(res.alpha_star, s)
    true_rates = [row[3] for row in res.trace]
    assert all(b >= a for a, b in zip(true_rates, true_rates[1:]))
    assert res.converged or res.iterations == SolverConfig().max_iters
    # the final surrogate is tangent at the solution
    assert abs(dc_surrogate(res.alpha_star, res.alpha_star, s) - res.rate) < 1e-9
    assert res == solve_gnj_dc(s, spec)


@settings(max_examples=60, deadline=None)
@given(scenarios, specs)
def test_fj_dominates_gnj(s, spec):
    assert solve_fj(s.with_mode(FJ), spec).rate >= solve_gnj_dc(s, spec).rate


@settings(max_examples=40, deadline=None)
@given(scenarios, st.floats(0.01, 0.5), st.floats(0.01, 0.5))
def test_fj_rate_monotone_in_epsilon(s, e1, e2):
    lo, hi = sorted((e1, e2))
    s = s.with_mode(FJ)
    assert solve_fj(s, lo).rate <= solve_fj(s, hi).rate


def test_start_point_does_not_matter(square):
    s = RateScenario(50.0, 3.0, 2.0, square)
    a = solve_gnj_dc(s, 0.1, SolverConfig(alpha_init=0.01))
    b = solve_gnj_dc(s, 0.1, SolverConfig(alpha_init=0.9))
    assert a.alpha_star == pytest.approx(b.alpha_star, abs=1e-7)


def test_oracle_fj_within_one_cell(square):
    s = RateScenario(5.0, 2.0, 1.0, square, mode=FJ)
    n = 10_000
    ora = grid_oracle(s, 0.1, grid_points=n)
    assert abs(ora.alpha_star - max_feasible_alpha(square, 0.1).alpha_max) <= 1 / (n + 1)


def test_oracle_refinement_never_hurts(rng):
    for _ in range(10):
        s = _scenario(rng)
        spec = CovertnessSpec(float(rng.uniform(0.01, 0.5)))
        coarse = grid_oracle(s, spec, grid_points=1000).rate
        doubled = grid_oracle(s, spec, grid_points=2001).rate
        refined = grid_oracle(s, spec, grid_points=1000, refine=True).rate
        assert doubled >= coarse and refined >= coarse


def test_oracle_close_to_refined(rng):
    for _ in range(5):
        s = _scenario(rng)
        spec = CovertnessSpec(0.1)
        plain = grid_oracle(s, spec, grid_points=100_000)
        fine = grid_oracle(s, spec, grid_points=100_000, refine=True)
        lipschitz = np.max(np.abs(np.gradient(covert_rate(np.linspace(0, 1, 1001), s), 1e-3)))
        assert 0 <= fine.rate - plain.rate <= lipschitz / 100_001


def test_infeasible_region(monkeypatch, square):
    import covertjam.solver as solver_mod
    from covertjam.feasibility import FeasibleRegion

    monkeypatch.setattr(solver_mod, "max_feasible_alpha", lambda *a, **k: FeasibleRegion(0.0, True))
    s = RateScenario(5.0, 2.0, 1.0, square)
    with pytest.raises(InfeasibleError):
        solve_gnj_dc(s, 0.1)
    with pytest.raises(InfeasibleError):
        solve_fj(s, 0.1)
    monkeypatch.setattr(solver_mod, "covert_exact", lambda a, *args: np.zeros(np.shape(a), bool))
    with pytest.raises(InfeasibleError):
        grid_oracle(s, 0.1, grid_points=100)


def test_flat_low_snr_objective():
    # signal far weaker than jamming: the rate is nearly flat, DC crawls, and the
    # 100-step budget runs out short of the boundary while the rate is still close
    geo = NetworkGeometry(5.0, 1.0, 1.0, 1.0, 4.0)
    s = RateScenario(1.0, 1.0, 1.0, geo)
    res = solve_gnj_dc(s, 0.5)
    edge = max_feasible_alpha(geo, 0.5).alpha_max
    assert not res.converged and res.iterations == 100
    assert edge - res.alpha_star > 1e-3
    assert covert_rate(edge, s) - res.rate < 1e-4
    longer = solve_gnj_dc(s, 0.5, SolverConfig(max_iters=10_000))
    assert longer.converged and longer.alpha_star == pytest.approx(edge, abs=1e-7)
