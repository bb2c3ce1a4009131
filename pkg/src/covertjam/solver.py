"""Covert-rate maximization over the power split.

GNJ is solved by DC ascent (the subtracted log term is replaced by its
tangent and the resulting concave scalar problem is maximized by
golden-section search).  FJ has a rate increasing in ``alpha`` so the
optimum sits on the covertness boundary.  ``grid_oracle`` is the
brute-force check for both.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import InfeasibleError, InvalidArgumentError
from .feasibility import covert_exact, max_feasible_alpha
from .rate import FJ, GNJ, RateScenario, covert_rate

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolverConfig:
    alpha_init: Optional[float] = None  # None: half of alpha_max
    max_iters: int = 100
    rate_tol: float = 1e-9
    alpha_tol: float = 1e-8
    grid_points: int = 100_000
    feas_tol: float = 1e-8

    def __post_init__(self):
        if self.max_iters < 1 or self.grid_points < 1:
            raise InvalidArgumentError("max_iters and grid_points must be positive")
        for name in ("rate_tol", "alpha_tol", "feas_tol"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.alpha_init is not None and not 0.0 < self.alpha_init < 1.0:
            raise InvalidArgumentError("alpha_init must lie in (0, 1)")


@dataclass(frozen=True)
class SolveResult:
    alpha_star: float
    rate: float
    mode: str
    iterations: int
    converged: bool
    # rows of (iteration, alpha, surrogate rate, true rate)
    trace: tuple = field(default=(), repr=False)


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10):
    """Maximize a unimodal ``f`` on ``[lo, hi]``; endpoints are checked too.

    Returns ``(x, f(x))``.
    """
    best_x, best_f = lo, f(lo)
    f_hi = f(hi)
    if f_hi >= best_f:
        best_x, best_f = hi, f_hi
    h = hi - lo
    if h <= tol:
        return best_x, best_f
    c = hi - INV_PHI * h
    d = lo + INV_PHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc > fd:
            hi, d, fd = d, c, fc
            h = hi - lo
            c = hi - INV_PHI * h
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            h = hi - lo
            d = lo + INV_PHI * h
            fd = f(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def _region(scenario: RateScenario, spec, config: SolverConfig):
    region = max_feasible_alpha(scenario.geometry, spec, config.feas_tol)
    if region.empty:
        raise InfeasibleError("no power split satisfies the covertness constraint")
    return region.alpha_max


def solve_gnj_dc(scenario: RateScenario, spec, config: Optional[SolverConfig] = None) -> SolveResult:
    """DC ascent for the jammed (GNJ) rate inside ``(0, alpha_max]``."""
    config = config or SolverConfig()
    hi = _region(scenario, spec, config)
    x0 = config.alpha_init if config.alpha_init is not None else 0.5 * hi
    x0 = min(x0, hi)
    a, b, c = scenario.with_mode(GNJ).coefficients()
    x, rate, iters, converged, trace = _kernels.dc_core(
        a, b, c, hi, x0, config.max_iters, config.rate_tol, config.alpha_tol)
    if np.any(np.diff(trace[:, 3]) < 0):
        raise AssertionError("DC ascent produced a decreasing rate sequence")
    rows = tuple((int(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in trace)
    return SolveResult(alpha_star=float(x), rate=covert_rate(float(x), scenario.with_mode(GNJ)), mode=GNJ,
                       iterations=iters, converged=converged, trace=rows)


def solve_fj(scenario: RateScenario, spec, config: Optional[SolverConfig] = None) -> SolveResult:
    """FJ rate grows with ``alpha``: the optimum is the covertness boundary."""
    config = config or SolverConfig()
    alpha = _region(scenario, spec, config)
    rate = covert_rate(alpha, scenario.with_mode(FJ))
    return SolveResult(alpha_star=alpha, rate=rate, mode=FJ, iterations=0, converged=True,
                       trace=((0, alpha, rate, rate),))


def solve(scenario: RateScenario, spec, config: Optional[SolverConfig] = None) -> SolveResult:
    if scenario.mode == FJ:
        return solve_fj(scenario, spec, config)
    return solve_gnj_dc(scenario, spec, config)


def grid_oracle(scenario: RateScenario, spec, mode: Optional[str] = None, grid_points: int = 100_000,
                refine: bool = False, tol: float = 1e-12) -> SolveResult:
    """Brute force: best rate over a uniform grid of feasible ``alpha``.

    With ``refine`` the best cell and its neighbours are searched again,
    with the feasible edge located by local bisection.
    """
    if grid_points < 10:
        raise InvalidArgumentError("grid_points must be at least 10")
    mode = mode or scenario.mode
    scen = scenario.with_mode(mode)
    geo = scen.geometry
    grid = np.arange(1, grid_points + 1) / (grid_points + 1)
    feasible = covert_exact(grid, geo, spec)
    if not feasible.any():
        raise InfeasibleError("no grid point satisfies the covertness constraint")
    rates = np.where(feasible, covert_rate(grid, scen), -np.inf)
    k = int(np.argmax(rates))
    best_x, best_r = float(grid[k]), float(rates[k])
    if refine:
        step = 1.0 / (grid_points + 1)
        lo = max(grid[k] - step, 0.5 * grid[k])
        hi = min(grid[k] + step, 1.0 - 0.5 * step)
        if not covert_exact(hi, geo, spec):
            good, bad = float(grid[k]), float(hi)
            while bad - good > tol:
                mid = 0.5 * (good + bad)
                if covert_exact(mid, geo, spec):
                    good = mid
                else:
                    bad = mid
            hi = good
        x, r = golden_section_max(lambda t: covert_rate(t, scen), float(lo), float(hi), tol)
        if r > best_r and covert_exact(x, geo, spec):
            best_x, best_r = x, r
    return SolveResult(alpha_star=best_x, rate=best_r, mode=mode, iterations=0, converged=True)
