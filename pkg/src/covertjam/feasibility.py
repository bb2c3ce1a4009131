"""Covertness constraint on the power split ``alpha``.

Eve's best achievable ``P_FA + P_MD`` depends on the split only through
``r = alpha D_je^beta / ((1 - alpha) D_ae^beta)``; the constraint
``min error >= 1 - eps`` therefore carves out an interval ``(0, alpha_max]``
that does not depend on the total power.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detection import min_error_from_ratio
from .errors import InvalidArgumentError, NumericFailureError, SingularPointError
from .geometry import NetworkGeometry

MAX_BISECTION_ITERS = 200


@dataclass(frozen=True)
class CovertnessSpec:
    epsilon: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise InvalidArgumentError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")


@dataclass(frozen=True)
class FeasibleRegion:
    alpha_max: float
    empty: bool = False


def _spec(spec) -> CovertnessSpec:
    return spec if isinstance(spec, CovertnessSpec) else CovertnessSpec(float(spec))


def power_ratio(alpha, geometry: NetworkGeometry):
    """``phi1 / phi0`` for the split ``alpha`` (independent of total power)."""
    alpha = np.asarray(alpha, dtype=float)
    return alpha * geometry.loss_je / ((1.0 - alpha) * geometry.loss_ae)


def covert_exact(alpha, geometry: NetworkGeometry, spec):
    """True where Eve's minimum detection error stays at or above ``1 - eps``.

    Accepts a scalar or an array of ``alpha`` values in (0, 1).
    """
    spec = _spec(spec)
    a = np.asarray(alpha, dtype=float)
    if np.any((a <= 0) | (a >= 1)):
        raise InvalidArgumentError("alpha must lie in (0, 1)")
    ok = np.asarray(min_error_from_ratio(power_ratio(a, geometry))) >= 1.0 - spec.epsilon
    return bool(ok) if ok.ndim == 0 else ok


def max_feasible_alpha(geometry: NetworkGeometry, spec, tol: float = 1e-8) -> FeasibleRegion:
    """Right end of the feasible interval, found by bisection to ``tol``."""
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    spec = _spec(spec)
    if not covert_exact(tol, geometry, spec):
        return FeasibleRegion(alpha_max=0.0, empty=True)
    if covert_exact(1.0 - tol, geometry, spec):
        return FeasibleRegion(alpha_max=1.0)
    lo, hi = tol, 1.0 - tol
    for _ in range(MAX_BISECTION_ITERS):
        if hi - lo <= tol:
            return FeasibleRegion(alpha_max=lo)
        mid = 0.5 * (lo + hi)
        if covert_exact(mid, geometry, spec):
            lo = mid
        else:
            hi = mid
    raise NumericFailureError(f"bisection did not reach tol={tol} in {MAX_BISECTION_ITERS} steps")


def covert_logform(alpha: float, geometry: NetworkGeometry, spec, variant: str = "ae") -> bool:
    """The constraint rewritten as a single log-form inequality.

    ``variant="ae"`` evaluates
    ``exp[(1-a)Lae / ((1-a)Lae - a Lje) * ln(a Lje / ((1-a)Lae))] < eps``.
    ``variant="je"`` puts ``Lje`` in the leading numerator and compares
    against ``ln eps``; it is kept for comparison only.
    Raises ``SingularPointError`` where ``(1-a)Lae == a Lje``.
    """
    spec = _spec(spec)
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError("alpha must lie in (0, 1)")
    lae, lje = geometry.loss_ae, geometry.loss_je
    denom = (1.0 - alpha) * lae - alpha * lje
    if denom == 0.0:
        raise SingularPointError(f"constraint is singular at alpha={alpha!r}; perturb it")
    log_r = math.log(alpha * lje / ((1.0 - alpha) * lae))
    if variant == "ae":
        return math.exp((1.0 - alpha) * lae / denom * log_r) < spec.epsilon
    if variant == "je":
        return (1.0 - alpha) * lje / denom * log_r < math.log(spec.epsilon)
    raise InvalidArgumentError(f"unknown variant {variant!r}")


def t_substituted_constraints(alpha: float, t: float, geometry: NetworkGeometry, spec) -> tuple[float, float]:
    """Residuals (lhs - rhs) of the two constraints after substituting ``T``.

    Negative residuals mean the constraint holds.
    """
    spec = _spec(spec)
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError("alpha must lie in (0, 1)")
    lae, lje = geometry.loss_ae, geometry.loss_je
    c2 = (1.0 - alpha) * lae * math.log(alpha * lje / ((1.0 - alpha) * lae)) - t * math.log(spec.epsilon)
    c3 = (1.0 - alpha) * lae - alpha * lje - t
    return c2, c3


def logform_agreement(geometry: NetworkGeometry, spec, n_points: int = 1000, variant: str = "ae") -> float:
    """Fraction of a uniform alpha grid where the log form agrees with ``covert_exact``."""
    grid = np.arange(1, n_points + 1) / (n_points + 1)
    exact = covert_exact(grid, geometry, spec)
    agree = 0
    total = 0
    for a, e in zip(grid, exact):
        try:
            approx = covert_logform(float(a), geometry, spec, variant)
        except SingularPointError:
            continue
        total += 1
        agree += approx == bool(e)
    return agree / total if total else float("nan")
