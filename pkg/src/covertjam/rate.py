"""Covert rate at Bob and its difference-of-concave split.

Rates are in bits per channel use.  Under Gaussian noise jamming (GNJ)
Bob treats the jamming signal as interference; under friendly jamming
(FJ) he cancels it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .geometry import NetworkGeometry

GNJ = "gnj"
FJ = "fj"
MODES = (GNJ, FJ)
LN2 = math.log(2.0)


@dataclass(frozen=True)
class RateScenario:
    p_total: float
    g_ab: float
    g_jb: float
    geometry: NetworkGeometry
    sigma_b2: float = 1.0
    mode: str = GNJ

    def __post_init__(self):
        if not self.p_total > 0:
            raise InvalidArgumentError(f"P_total must be positive, got {self.p_total!r}")
        if self.g_ab < 0 or self.g_jb < 0:
            raise InvalidArgumentError("channel gains must be nonnegative")
        if not self.sigma_b2 > 0:
            raise InvalidArgumentError(f"sigma_b2 must be positive, got {self.sigma_b2!r}")
        if self.mode not in MODES:
            raise InvalidArgumentError(f"mode must be one of {MODES}, got {self.mode!r}")

    def with_mode(self, mode: str) -> "RateScenario":
        return RateScenario(self.p_total, self.g_ab, self.g_jb, self.geometry, self.sigma_b2, mode)

    def coefficients(self) -> tuple[float, float, float]:
        """``(a, b, c)`` such that the GNJ rate is ``log2(1 + a x / (b + (1 - x) c))``."""
        geo = self.geometry
        a = self.p_total * self.g_ab * geo.loss_jb
        b = geo.loss_jb * geo.loss_ab * self.sigma_b2
        c = self.p_total * self.g_jb * geo.loss_ab
        return a, b, c


def _check_alpha(alpha):
    alpha = np.asarray(alpha, dtype=float)
    if np.any((alpha < 0) | (alpha > 1)):
        raise InvalidArgumentError("alpha must lie in [0, 1]")
    return alpha


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def covert_rate(alpha, scenario: RateScenario):
    alpha = _check_alpha(alpha)
    if scenario.mode == FJ:
        snr = alpha * scenario.p_total * scenario.g_ab / (scenario.geometry.loss_ab * scenario.sigma_b2)
        return _out(np.log1p(snr) / LN2)
    # same SINR as a x / (b + (1 - x) c), arranged so g_jb = 0 reproduces FJ bit for bit
    geo = scenario.geometry
    noise = geo.loss_ab * scenario.sigma_b2
    jam = (1.0 - alpha) * scenario.p_total * scenario.g_jb * geo.loss_ab / geo.loss_jb
    return _out(np.log1p(alpha * scenario.p_total * scenario.g_ab / (noise + jam)) / LN2)


def sigma_term(alpha, scenario: RateScenario):
    """Concave part: log2 of noise + jamming + signal."""
    alpha = _check_alpha(alpha)
    a, b, c = scenario.coefficients()
    return _out(np.log2(b + (1.0 - alpha) * c + alpha * a))


def psi_term(alpha, scenario: RateScenario):
    """Subtracted concave part: log2 of noise + jamming."""
    alpha = _check_alpha(alpha)
    _, b, c = scenario.coefficients()
    return _out(np.log2(b + (1.0 - alpha) * c))


def psi_gradient(alpha_anchor: float, scenario: RateScenario) -> float:
    _check_alpha(alpha_anchor)
    _, b, c = scenario.coefficients()
    return -c / ((b + (1.0 - alpha_anchor) * c) * LN2)


def psi_linearized(alpha, alpha_anchor: float, scenario: RateScenario):
    """First-order expansion of ``psi_term`` around ``alpha_anchor``."""
    alpha = _check_alpha(alpha)
    return _out(psi_term(alpha_anchor, scenario) + psi_gradient(alpha_anchor, scenario) * (alpha - alpha_anchor))


def dc_surrogate(alpha, alpha_anchor: float, scenario: RateScenario):
    """Concave lower bound of the GNJ rate, tight at ``alpha_anchor``."""
    return _out(np.asarray(sigma_term(alpha, scenario)) - psi_linearized(alpha, alpha_anchor, scenario))
