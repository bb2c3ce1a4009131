"""Network geometry, Rayleigh fading and transmit antenna selection.

Four single-purpose nodes share a plane: Alice (``M_T`` antennas), Bob,
the jammer and Eve.  Path loss is ``D**beta``; every small-scale
coefficient is unit-variance circularly-symmetric complex Gaussian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateChannelError, InvalidArgumentError

# Positions used for the default experiments (metres).
DEFAULT_POSITIONS = {
    "alice": (-2.5, 2.5),
    "bob": (2.5, 2.5),
    "jammer": (2.5, -2.5),
    "eve": (-2.5, -2.5),
}


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, a SeedSequence or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise InvalidArgumentError("an explicit seed or Generator is required")
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class NetworkGeometry:
    d_ab: float
    d_ae: float
    d_jb: float
    d_je: float
    beta: float = 2.0

    def __post_init__(self):
        for name in ("d_ab", "d_ae", "d_jb", "d_je", "beta"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidArgumentError(f"{name} must be positive and finite, got {value!r}")

    @classmethod
    def from_positions(cls, alice, bob, jammer, eve, beta: float = 2.0) -> "NetworkGeometry":
        return cls(
            d_ab=math.dist(alice, bob),
            d_ae=math.dist(alice, eve),
            d_jb=math.dist(jammer, bob),
            d_je=math.dist(jammer, eve),
            beta=beta,
        )

    @classmethod
    def default(cls, beta: float = 2.0) -> "NetworkGeometry":
        return cls.from_positions(**DEFAULT_POSITIONS, beta=beta)

    # path-loss factors D**beta
    @property
    def loss_ab(self) -> float:
        return self.d_ab ** self.beta

    @property
    def loss_ae(self) -> float:
        return self.d_ae ** self.beta

    @property
    def loss_jb(self) -> float:
        return self.d_jb ** self.beta

    @property
    def loss_je(self) -> float:
        return self.d_je ** self.beta

    def replace(self, **changes) -> "NetworkGeometry":
        fields = dict(d_ab=self.d_ab, d_ae=self.d_ae, d_jb=self.d_jb, d_je=self.d_je, beta=self.beta)
        fields.update(changes)
        return NetworkGeometry(**fields)


@dataclass(frozen=True)
class FadingRealization:
    h_ab: np.ndarray
    h_ae: np.ndarray
    h_jb: complex
    h_je: complex

    @property
    def m_t(self) -> int:
        return self.h_ab.shape[0]


@dataclass(frozen=True)
class SelectionResult:
    indices: tuple[int, ...]
    g_ab: float


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def draw_fading(rng, m_t: int) -> FadingRealization:
    """Draw one independent Rayleigh realization of all four links."""
    if int(m_t) != m_t or m_t < 1:
        raise InvalidArgumentError(f"M_T must be a positive integer, got {m_t!r}")
    rng = as_generator(rng)
    h_ab = _complex_normal(rng, m_t)
    h_ae = _complex_normal(rng, m_t)
    h_jb, h_je = _complex_normal(rng, 2)
    return FadingRealization(h_ab=h_ab, h_ae=h_ae, h_jb=complex(h_jb), h_je=complex(h_je))


def draw_fading_batch(rng, m_t: int, n: int):
    """Draw ``n`` realizations at once.

    Returns ``(h_ab, h_ae, h_jb, h_je)`` with shapes ``(n, m_t)``,
    ``(n, m_t)``, ``(n,)``, ``(n,)``.
    """
    if int(m_t) != m_t or m_t < 1:
        raise InvalidArgumentError(f"M_T must be a positive integer, got {m_t!r}")
    if n < 1:
        raise InvalidArgumentError("batch size must be positive")
    rng = as_generator(rng)
    h_ab = _complex_normal(rng, (n, m_t))
    h_ae = _complex_normal(rng, (n, m_t))
    h_jb = _complex_normal(rng, n)
    h_je = _complex_normal(rng, n)
    return h_ab, h_ae, h_jb, h_je


def _check_nd(n_d: int, m_t: int):
    if int(n_d) != n_d or n_d < 1:
        raise InvalidArgumentError(f"N_D must be a positive integer, got {n_d!r}")
    if n_d > m_t:
        raise InvalidArgumentError(f"N_D={n_d} exceeds M_T={m_t}")


def select_antennas(h_ab: Sequence[complex], n_d: int) -> SelectionResult:
    """Pick the ``n_d`` strongest antennas; ties go to the lowest index."""
    h = np.asarray(h_ab)
    _check_nd(n_d, h.shape[0])
    power = np.abs(h) ** 2
    order = np.argsort(-power, kind="stable")[:n_d]
    chosen = np.sort(order)
    return SelectionResult(indices=tuple(int(i) for i in chosen), g_ab=float(power[chosen].sum()))


def random_selection(rng, m_t: int, n_d: int, h_ab: Sequence[complex]) -> SelectionResult:
    h = np.asarray(h_ab)
    if h.shape[0] != m_t:
        raise InvalidArgumentError(f"h_ab has length {h.shape[0]}, expected M_T={m_t}")
    _check_nd(n_d, m_t)
    rng = as_generator(rng)
    chosen = np.sort(rng.choice(m_t, size=n_d, replace=False))
    power = np.abs(h) ** 2
    return SelectionResult(indices=tuple(int(i) for i in chosen), g_ab=float(power[chosen].sum()))


def eve_effective_gain(h_ab_selected, h_ae_selected) -> float:
    """``|w^H h_ae|^2`` for the MRT direction ``w = h_ab / ||h_ab||``."""
    h_ab = np.atleast_1d(np.asarray(h_ab_selected, dtype=complex))
    h_ae = np.atleast_1d(np.asarray(h_ae_selected, dtype=complex))
    if h_ab.shape != h_ae.shape or h_ab.size == 0:
        raise InvalidArgumentError("channel vectors must be non-empty and of equal length")
    norm = np.linalg.norm(h_ab)
    if norm == 0.0:
        raise DegenerateChannelError("MRT beamformer undefined for an all-zero channel")
    return float(abs(np.vdot(h_ab / norm, h_ae)) ** 2)
