"""Closed-form predictions used as independent checks on Monte Carlo output.

The detection statistics of a threshold detector on coherent light have an
exact expression through the Marcum Q function; everything else here is
elementary algebra on the component transfer functions.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .components import EntanglementSource
from .constants import SIGMA0
from .special import marcum_q1

_DEG = math.pi / 180.0


def p_no_click(gamma: float, sigma: float, alpha: complex) -> float:
    """Probability that one mode with mean amplitude alpha stays below gamma."""

    if gamma < 0 or sigma <= 0:
        raise ValueError("gamma must be nonnegative and sigma positive")
    root2 = math.sqrt(2.0)
    return 1.0 - marcum_q1(root2 * abs(alpha) / sigma, root2 * gamma / sigma)


def pr_click(
    alpha_h: complex, alpha_v: complex, gamma: float, sigma: float = SIGMA0
) -> float:
    """Click probability of a detector on coherent light (alpha_h, alpha_v)."""

    return 1.0 - p_no_click(gamma, sigma, alpha_h) * p_no_click(gamma, sigma, alpha_v)


def dark_count_prob(gamma: float, sigma: float = SIGMA0) -> float:
    """Click probability on bare vacuum."""

    e = math.exp(-(gamma**2) / sigma**2)
    return 1.0 - (1.0 - e) ** 2


def nominal_efficiency(gamma: float, sigma: float = SIGMA0) -> float:
    """Leading-order coefficient of signal intensity in the click probability."""

    e = math.exp(-(gamma**2) / sigma**2)
    return e * (1.0 - e) * gamma**2 / sigma**4


def mz_mean_amplitudes(
    phi_deg: float, theta_deg: float, d: float, alpha: float = 1e5
) -> tuple:
    """Mean output amplitudes (a_H, b_H, a_V, b_V) of the two-arm interferometer.

    phi is the arm phase, theta the wave-plate fast-axis angle in the same
    arm, d the optical density attenuating the input.
    """

    att = 10.0 ** (-d / 2.0) * alpha
    e_phi = cmath.exp(1j * phi_deg * _DEG)
    c2 = math.cos(2.0 * theta_deg * _DEG)
    s2 = math.sin(2.0 * theta_deg * _DEG)
    a_h = (1.0 + e_phi * c2) / 2.0 * att
    b_h = (1.0 - e_phi * c2) / 2.0 * att
    a_v = e_phi / 2.0 * s2 * att
    b_v = -e_phi / 2.0 * s2 * att
    return a_h, b_h, a_v, b_v


def hom_powers(phi_deg: float, beam_power: float = 4e-3) -> tuple:
    """Power-meter readings when two equal coherent beams interfere.

    Returns (transmitted, reflected) in watts; totals 2x the single-beam
    power split as cos^2, sin^2 of half the relative phase.
    """

    total = 2.0 * beam_power
    half = phi_deg * _DEG / 2.0
    return total * math.cos(half) ** 2, total * math.sin(half) ** 2


def ent_second_moments(params: EntanglementSource) -> tuple:
    """Exact (E[v v^dagger], E[v v^T]) for v = (a_H, a_V, b_H, b_V).

    Derived by expectation algebra from the source's linear combination of
    four independent standard complex Gaussians: writing v = C w with
    w = (z, conj(z)), the moments are C C^dagger and C S C^T with S the
    swap of the two blocks.
    """

    ch = math.cosh(params.r)
    sh = math.sinh(params.r)
    phase = cmath.exp(1j * params.varphi * _DEG)
    # columns: z1H z1V z2H z2V | z1H* z1V* z2H* z2V*
    coeff = np.zeros((4, 8), dtype=complex)
    if params.ent_type.upper() == "I":
        rows = [
            (0, 0, ch), (0, 6, sh),
            (1, 1, ch), (1, 7, phase * sh),
            (2, 2, ch), (2, 4, sh),
            (3, 3, ch), (3, 5, phase * sh),
        ]
    elif params.ent_type.upper() == "II":
        rows = [
            (0, 0, ch), (0, 7, sh),
            (1, 1, ch), (1, 6, phase * sh),
            (2, 2, ch), (2, 5, phase * sh),
            (3, 3, ch), (3, 4, sh),
        ]
    else:
        raise ValueError(f"unknown entanglement source type {params.ent_type!r}")
    for i, j, value in rows:
        coeff[i, j] = value
    coeff *= SIGMA0

    swap = np.zeros((8, 8))
    swap[:4, 4:] = np.eye(4)
    swap[4:, :4] = np.eye(4)
    first = coeff @ coeff.conj().T  # E[w w^dagger] = identity
    second = coeff @ swap @ coeff.T  # E[w w^T] swaps z against conj(z)
    return first, second
