"""Eve's radiometer: false-alarm / missed-detection probabilities.

Eve compares the average received energy against a threshold ``V``.  With
a long observation window the statistic collapses to ``sigma_e2 + gamma``
where ``gamma`` is exponential with mean ``phi0`` when Alice is silent and
the sum of two independent exponentials (means ``phi0`` and ``phi1``) when
she transmits.  All probabilities below are functions of the excess
``u = V - sigma_e2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .errors import DegenerateDetectionError, InvalidArgumentError
from .geometry import NetworkGeometry, as_generator, draw_fading_batch

# relative gap below which phi0 and phi1 are treated as equal
DEGENERACY_TOL = 1e-9

ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class DetectionParams:
    phi0: float
    phi1: float
    sigma_e2: float = 1.0

    def __post_init__(self):
        if not (self.phi0 >= 0 and self.phi1 >= 0):
            raise InvalidArgumentError(f"scale parameters must be nonnegative: {self.phi0}, {self.phi1}")
        if not self.sigma_e2 > 0:
            raise InvalidArgumentError(f"sigma_e2 must be positive, got {self.sigma_e2}")

    @property
    def ratio(self) -> float:
        return self.phi1 / self.phi0

    def scaled(self, c: float) -> "DetectionParams":
        return DetectionParams(c * self.phi0, c * self.phi1, self.sigma_e2)


@dataclass(frozen=True)
class DetectorEstimate:
    p_fa_hat: float
    p_md_hat: float
    n_trials: int
    m_slots: Union[int, str]


def detection_params(alpha: float, p_total: float, geometry: NetworkGeometry,
                     sigma_e2: float = 1.0) -> DetectionParams:
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not p_total > 0:
        raise InvalidArgumentError(f"P_total must be positive, got {p_total!r}")
    return DetectionParams(
        phi0=(1.0 - alpha) * p_total / geometry.loss_je,
        phi1=alpha * p_total / geometry.loss_ae,
        sigma_e2=sigma_e2,
    )


def _degenerate(phi0, phi1):
    return np.abs(phi0 - phi1) <= DEGENERACY_TOL * np.maximum(phi0, phi1)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _fa_excess(u, phi0):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        tail = np.exp(-u / phi0) if phi0 > 0 else np.zeros_like(u)
    return np.where(u <= 0, 1.0, tail)


def _md_excess(u, phi0, phi1):
    u = np.asarray(u, dtype=float)
    up = np.maximum(u, 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if phi0 == 0 and phi1 == 0:
            cdf = np.ones_like(up)
        elif phi0 == 0 or phi1 == 0:
            cdf = -np.expm1(-up / max(phi0, phi1))
        elif _degenerate(phi0, phi1):
            x = up / phi0
            cdf = -np.expm1(-x) - x * np.exp(-x)
        else:
            cdf = (phi1 * np.exp(-up / phi1) - phi0 * np.exp(-up / phi0) + phi0 - phi1) / (phi0 - phi1)
    return np.where(u <= 0, 0.0, np.clip(cdf, 0.0, 1.0))


def p_fa(v, params: DetectionParams):
    """Probability that Eve declares a transmission while Alice is silent."""
    return _out(_fa_excess(np.asarray(v, dtype=float) - params.sigma_e2, params.phi0))


def p_md(v, params: DetectionParams):
    """Probability that Eve misses an actual transmission."""
    return _out(_md_excess(np.asarray(v, dtype=float) - params.sigma_e2, params.phi0, params.phi1))


def detection_error_sum(v, params: DetectionParams, prior: Optional[float] = None):
    """``P_FA + P_MD``, or the prior-weighted error when ``prior`` is given."""
    fa = p_fa(v, params)
    md = p_md(v, params)
    if prior is None:
        return fa + md
    if not 0.0 <= prior <= 1.0:
        raise InvalidArgumentError(f"prior must lie in [0, 1], got {prior!r}")
    return (1.0 - prior) * fa + prior * md


def _optimal_excess(phi0: float, phi1: float) -> float:
    if phi0 <= 0 or phi1 <= 0:
        raise DegenerateDetectionError(f"optimal threshold undefined for phi0={phi0}, phi1={phi1}")
    if _degenerate(phi0, phi1):
        return phi0
    t = (phi1 - phi0) / phi0
    # phi0*phi1/(phi1-phi0) * ln(phi1/phi0); log1p only near t = 0, where it is accurate
    log_ratio = math.log1p(t) if abs(t) < 0.5 else math.log(phi1 / phi0)
    return phi1 * log_ratio / t


def optimal_threshold(params: DetectionParams) -> float:
    """Threshold minimizing ``P_FA + P_MD``."""
    return _optimal_excess(params.phi0, params.phi1) + params.sigma_e2


def optimal_threshold_excess(params: DetectionParams) -> float:
    """``V* - sigma_e2``, computed without the round trip through ``V*``."""
    return _optimal_excess(params.phi0, params.phi1)


def min_detection_error(params: DetectionParams) -> float:
    """``P_FA + P_MD`` at the optimal threshold."""
    u = _optimal_excess(params.phi0, params.phi1)
    return float(_fa_excess(u, params.phi0) + _md_excess(u, params.phi0, params.phi1))


def min_detection_error_closed_form(params: DetectionParams) -> float:
    """The minimum error as a two-term expression in ``A = ln(phi1/phi0)``.

    Only meaningful away from ``phi0 == phi1``.
    """
    phi0, phi1 = params.phi0, params.phi1
    if phi0 <= 0 or phi1 <= 0:
        raise DegenerateDetectionError("closed form requires positive scale parameters")
    a = math.log(phi1 / phi0)
    lam2 = (phi1 * math.exp(-phi0 * a / (phi1 - phi0))
            - phi0 * math.exp(-phi1 * a / (phi1 - phi0)) + phi0 - phi1) / (phi0 - phi1)
    return math.exp(-phi1 * a / (phi1 - phi0)) + lam2


def min_error_from_ratio(r):
    """Minimum error as a function of ``r = phi1/phi0`` alone: ``1 - r**(1/(1-r))``.

    Vectorized; ``r = 0`` gives 1 and ``r -> 1`` gives ``1 - 1/e``.
    """
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = r - 1.0
        # ln(r)/(1-r), with the removable singularity at r = 1
        expo = np.where(np.abs(t) <= DEGENERACY_TOL, -1.0, -np.log1p(t) / t)
        expo = np.where(r == 0, -np.inf, expo)
    return _out(-np.expm1(expo))


def gamma_pdf(gamma, params: DetectionParams, hypothesis: int):
    """Density of the signal-plus-jamming power at Eve under ``hypothesis`` (0 or 1)."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise InvalidArgumentError("gamma must be nonnegative")
    phi0, phi1 = params.phi0, params.phi1
    if hypothesis == 0:
        if phi0 <= 0:
            raise DegenerateDetectionError("no jamming power: gamma is identically zero")
        return _out(np.exp(-g / phi0) / phi0)
    if hypothesis != 1:
        raise InvalidArgumentError(f"hypothesis must be 0 or 1, got {hypothesis!r}")
    if phi0 <= 0 or phi1 <= 0:
        phi = max(phi0, phi1)
        if phi <= 0:
            raise DegenerateDetectionError("gamma is identically zero")
        return _out(np.exp(-g / phi) / phi)
    if _degenerate(phi0, phi1):
        return _out(g / phi0**2 * np.exp(-g / phi0))
    return _out((np.exp(-g / phi0) - np.exp(-g / phi1)) / (phi0 - phi1))


def mc_detection(rng, alpha: float, p_total: float, geometry: NetworkGeometry,
                 sigma_e2: float, v: float, m_slots=ASYMPTOTIC, n_trials: int = 100_000,
                 m_t: int = 1, n_d: Optional[int] = None,
                 chi2_convention: str = "normalized") -> DetectorEstimate:
    """Monte Carlo estimate of Eve's error rates at threshold ``v``.

    Every trial draws fresh fading, applies best-``n_d`` antenna selection
    with MRT, and runs the energy detector under both hypotheses.  For a
    finite ``m_slots`` the energy statistic is ``(sigma_e2 + gamma)`` times
    ``chi2_{2m}/(2m)`` (``chi2_convention="normalized"``, unit mean) or
    ``chi2_{2m}/m`` (``"unnormalized"``, mean 2).
    """
    if int(n_trials) != n_trials or n_trials < 1:
        raise InvalidArgumentError("n_trials must be a positive integer")
    if m_slots != ASYMPTOTIC and (int(m_slots) != m_slots or m_slots < 1):
        raise InvalidArgumentError(f"m_slots must be a positive integer or {ASYMPTOTIC!r}")
    if chi2_convention not in ("normalized", "unnormalized"):
        raise InvalidArgumentError(f"unknown chi2 convention {chi2_convention!r}")
    n_d = m_t if n_d is None else n_d
    if not 1 <= n_d <= m_t:
        raise InvalidArgumentError(f"need 1 <= N_D <= M_T, got N_D={n_d}, M_T={m_t}")
    params = detection_params(alpha, p_total, geometry, sigma_e2)
    rng = as_generator(rng)

    h_ab, h_ae, _, h_je = draw_fading_batch(rng, m_t, n_trials)
    eve_gain = _kernels.eve_gain_batch(h_ab, h_ae, n_d)
    gamma0 = params.phi0 * np.abs(h_je) ** 2
    gamma1 = gamma0 + params.phi1 * eve_gain
    stat0 = sigma_e2 + gamma0
    stat1 = sigma_e2 + gamma1
    if m_slots != ASYMPTOTIC:
        dof = 2 * int(m_slots)
        norm = dof if chi2_convention == "normalized" else int(m_slots)
        stat0 = stat0 * rng.chisquare(dof, n_trials) / norm
        stat1 = stat1 * rng.chisquare(dof, n_trials) / norm
    n_fa, n_md = _kernels.count_errors(stat0, stat1, float(v))
    return DetectorEstimate(
        p_fa_hat=n_fa / n_trials,
        p_md_hat=n_md / n_trials,
        n_trials=int(n_trials),
        m_slots=m_slots,
    )
