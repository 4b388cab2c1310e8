"""Transfer functions for every optical component on the table.

Lossless elements are plain 2x2 Jones matrices.  Lossy elements replace the
removed amplitude with freshly drawn vacuum, so the output never collapses
to an exact zero field.  Sources emit Gaussian fields; meters and detectors
turn fields into readings.

All field arguments and results are complex arrays with a trailing axis of
length 2 and broadcast over any leading axes, so the same code serves both
scalar unit tests and the engine's vectorized step blocks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import rng
from .constants import DELTA_T, PHOTON_ENERGY, POWER_QUANTUM, SIGMA0, SIGMA0_SQ
from .polarization import KETS, haar_random_unitary, squared_norm

logger = logging.getLogger(__name__)

_DEG = math.pi / 180.0
_DEFAULT_BS_R = math.sqrt(0.5)


# ---------------------------------------------------------------------------
# Component parameter types (the tagged union the DSL produces)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfWavePlate:
    theta: float = 0.0  # fast-axis angle, degrees


@dataclass(frozen=True)
class QuarterWavePlate:
    theta: float = 0.0


@dataclass(frozen=True)
class PhaseDelay:
    phi: float = 0.0  # common phase, degrees


@dataclass(frozen=True)
class Dephaser:
    pass


@dataclass(frozen=True)
class TimeDelay:
    steps: int = 0


@dataclass(frozen=True)
class Rotator:
    theta: float = 0.0  # degrees, limited to [0, 90]


@dataclass(frozen=True)
class PhaseRetarder:
    phi: float = 0.0


@dataclass(frozen=True)
class Depolarizer:
    pass


@dataclass(frozen=True)
class NeutralDensityFilter:
    d: float = 10.0  # optical density


@dataclass(frozen=True)
class BeamBlocker:
    pass


@dataclass(frozen=True)
class Polarizer:
    theta: float = 0.0
    phi: float = 0.0


@dataclass(frozen=True)
class BeamSplitter:
    r: float = _DEFAULT_BS_R  # reflection coefficient


@dataclass(frozen=True)
class Mirror:
    pass


@dataclass(frozen=True)
class PolarizingBeamSplitter:
    basis: str = "HV"  # HV, DA or RL


@dataclass(frozen=True)
class LED:
    power: float = 4e-3  # W above the vacuum level


@dataclass(frozen=True)
class Laser:
    power: float = 4e-3
    polarization: str = "H"


@dataclass(frozen=True)
class EntanglementSource:
    ent_type: str = "I"  # I or II
    r: float = 1.0  # squeezing strength
    varphi: float = 0.0  # relative phase, degrees
    directions: str = "LR"  # travel directions of the two output beams


@dataclass(frozen=True)
class PowerMeter:
    pass


@dataclass(frozen=True)
class Detector:
    dcr: float = 1000.0  # dark counts per second


ComponentParams = Union[
    HalfWavePlate,
    QuarterWavePlate,
    PhaseDelay,
    Dephaser,
    TimeDelay,
    Rotator,
    PhaseRetarder,
    Depolarizer,
    NeutralDensityFilter,
    BeamBlocker,
    Polarizer,
    BeamSplitter,
    Mirror,
    PolarizingBeamSplitter,
    LED,
    Laser,
    EntanglementSource,
    PowerMeter,
    Detector,
]

MATRIX_KINDS = (
    HalfWavePlate,
    QuarterWavePlate,
    PhaseDelay,
    Dephaser,
    Rotator,
    PhaseRetarder,
    Depolarizer,
)
LOSSY_KINDS = (NeutralDensityFilter, BeamBlocker, Polarizer)
PASSTHROUGH_KINDS = MATRIX_KINDS + LOSSY_KINDS + (TimeDelay,)
TWO_BEAM_KINDS = (BeamSplitter, Mirror, PolarizingBeamSplitter)
SOURCE_KINDS = (LED, Laser, EntanglementSource)
SINK_KINDS = (PowerMeter, Detector)


# ---------------------------------------------------------------------------
# Lossless elements
# ---------------------------------------------------------------------------


def jones_matrix_of(params: ComponentParams, key: rng.RngKey | None = None) -> np.ndarray:
    """2x2 unitary of a lossless single-beam element.

    The dephaser and depolarizer need a key: they redraw their random
    parameters once per time step.
    """

    if isinstance(params, HalfWavePlate):
        t2 = 2.0 * params.theta * _DEG
        c, s = math.cos(t2), math.sin(t2)
        return np.array([[c, s], [s, -c]], dtype=complex)
    if isinstance(params, QuarterWavePlate):
        t = params.theta * _DEG
        c, s = math.cos(t), math.sin(t)
        off = (1.0 - 1j) * c * s
        return np.array(
            [[c * c + 1j * s * s, off], [off, s * s + 1j * c * c]], dtype=complex
        )
    if isinstance(params, PhaseDelay):
        factor = np.exp(1j * params.phi * _DEG)
        return np.array([[factor, 0.0], [0.0, factor]], dtype=complex)
    if isinstance(params, Dephaser):
        if key is None:
            raise ValueError("dephaser needs an rng key")
        phase = 2.0 * math.pi * float(
            rng.uniform(key.run_seed, key.node_id, key.step_index, key.draw_index)
        )
        factor = np.exp(1j * phase)
        return np.array([[factor, 0.0], [0.0, factor]], dtype=complex)
    if isinstance(params, Rotator):
        t = params.theta * _DEG
        c, s = math.cos(t), math.sin(t)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if isinstance(params, PhaseRetarder):
        return np.array([[1.0, 0.0], [0.0, np.exp(1j * params.phi * _DEG)]], dtype=complex)
    if isinstance(params, Depolarizer):
        if key is None:
            raise ValueError("depolarizer needs an rng key")
        draws = [
            float(rng.uniform(key.run_seed, key.node_id, key.step_index, key.draw_index + i))
            for i in range(4)
        ]
        u = draws[0]
        phi, lam, chi = (2.0 * math.pi * d for d in draws[1:])
        return haar_random_unitary(u, phi, lam, chi)
    raise ValueError(f"{type(params).__name__} is not a lossless element")


def polarizer_matrix(theta_deg: float, phi_deg: float) -> np.ndarray:
    """Projection matrix of a general elliptical polarizer."""

    t = theta_deg * _DEG
    p = phi_deg * _DEG
    c, s = math.cos(t), math.sin(t)
    return np.array(
        [
            [c * c, np.exp(-1j * p) * c * s],
            [np.exp(1j * p) * c * s, s * s],
        ],
        dtype=complex,
    )


# ---------------------------------------------------------------------------
# Lossy elements: attenuated signal plus injected vacuum
# ---------------------------------------------------------------------------


def ndf_output(d: float, field: np.ndarray, vacuum_z: np.ndarray) -> np.ndarray:
    amp = 10.0 ** (-d / 2.0)
    return amp * field + (1.0 - amp) * SIGMA0 * vacuum_z


def blocker_output(vacuum_z: np.ndarray) -> np.ndarray:
    return SIGMA0 * vacuum_z


def polarizer_output(
    theta_deg: float, phi_deg: float, field: np.ndarray, vacuum_z: np.ndarray
) -> np.ndarray:
    p = polarizer_matrix(theta_deg, phi_deg)
    comp = np.eye(2, dtype=complex) - p
    return field @ p.T + (SIGMA0 * vacuum_z) @ comp.T


def apply_lossy(params: ComponentParams, field: np.ndarray, key: rng.RngKey) -> np.ndarray:
    """Keyed evaluation of an attenuating element on one field sample."""

    field = np.asarray(field, dtype=complex)
    z = rng.gaussian_pair(key.run_seed, key.node_id, key.step_index, key.draw_index)
    z = np.broadcast_to(z, field.shape)
    if isinstance(params, NeutralDensityFilter):
        return ndf_output(params.d, field, z)
    if isinstance(params, BeamBlocker):
        return blocker_output(z)
    if isinstance(params, Polarizer):
        return polarizer_output(params.theta, params.phi, field, z)
    raise ValueError(f"{type(params).__name__} is not a lossy element")


# ---------------------------------------------------------------------------
# Two-beam elements
# ---------------------------------------------------------------------------


def apply_two_beam(
    params: ComponentParams, a: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Joint transfer of the two-input elements; unitary on the 4-dim space."""

    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if isinstance(params, (BeamSplitter, Mirror)):
        r = 1.0 if isinstance(params, Mirror) else params.r
        t = math.sqrt(max(0.0, 1.0 - r * r))
        return t * a + r * b, r * a - t * b
    if isinstance(params, PolarizingBeamSplitter):
        basis = params.basis.upper()
        if basis == "HV":
            a_out = np.stack([a[..., 0], b[..., 1]], axis=-1)
            b_out = np.stack([b[..., 0], a[..., 1]], axis=-1)
            return a_out, b_out
        if basis == "DA":
            diag_a = (a[..., 0] + a[..., 1]) / 2.0
            anti_a = (a[..., 0] - a[..., 1]) / 2.0
            diag_b = (b[..., 0] + b[..., 1]) / 2.0
            anti_b = (b[..., 0] - b[..., 1]) / 2.0
            a_out = np.stack([diag_a + anti_b, diag_a - anti_b], axis=-1)
            b_out = np.stack([diag_b + anti_a, diag_b - anti_a], axis=-1)
            return a_out, b_out
        if basis == "RL":
            right_a = (a[..., 0] - 1j * a[..., 1]) / 2.0
            left_a = (a[..., 0] + 1j * a[..., 1]) / 2.0
            right_b = (b[..., 0] - 1j * b[..., 1]) / 2.0
            left_b = (b[..., 0] + 1j * b[..., 1]) / 2.0
            a_out = np.stack([right_a + left_b, 1j * right_a - 1j * left_b], axis=-1)
            b_out = np.stack([right_b + left_a, 1j * right_b - 1j * left_a], axis=-1)
            return a_out, b_out
        raise ValueError(f"unknown polarizing beam splitter basis {params.basis!r}")
    raise ValueError(f"{type(params).__name__} is not a two-beam element")


# ---------------------------------------------------------------------------
# Sources
# ---------------------------------------------------------------------------


def led_scale(power: float) -> float:
    """Amplitude scale of a thermal source emitting `power` above vacuum."""

    sigma_sq = max(0.0, power) * DELTA_T / PHOTON_ENERGY
    return math.sqrt(sigma_sq + SIGMA0_SQ)


def laser_mean_field(power: float, polarization: str) -> np.ndarray:
    """Deterministic part of the laser output; vacuum noise rides on top."""

    alpha_sq = power * DELTA_T / PHOTON_ENERGY - SIGMA0_SQ
    if alpha_sq < 0.0:
        logger.warning(
            "laser power %.3e W is below the vacuum level; emitting pure vacuum", power
        )
        alpha_sq = 0.0
    ket = KETS[polarization.upper()]
    return math.sqrt(alpha_sq) * ket


def ent_output(
    params: EntanglementSource, z1: np.ndarray, z2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Pair of correlated fields from four independent complex Gaussians.

    z1 and z2 are standard complex Gaussian Jones pairs (trailing axis 2).
    """

    ch = math.cosh(params.r)
    sh = math.sinh(params.r)
    phase = np.exp(1j * params.varphi * _DEG)
    z1h, z1v = z1[..., 0], z1[..., 1]
    z2h, z2v = z2[..., 0], z2[..., 1]
    if params.ent_type.upper() == "I":
        a_h = z1h * ch + np.conj(z2h) * sh
        a_v = z1v * ch + phase * np.conj(z2v) * sh
        b_h = z2h * ch + np.conj(z1h) * sh
        b_v = z2v * ch + phase * np.conj(z1v) * sh
    elif params.ent_type.upper() == "II":
        a_h = z1h * ch + np.conj(z2v) * sh
        a_v = z1v * ch + phase * np.conj(z2h) * sh
        b_h = z2h * ch + phase * np.conj(z1v) * sh
        b_v = z2v * ch + np.conj(z1h) * sh
    else:
        raise ValueError(f"unknown entanglement source type {params.ent_type!r}")
    a = SIGMA0 * np.stack([a_h, a_v], axis=-1)
    b = SIGMA0 * np.stack([b_h, b_v], axis=-1)
    return a, b


def sample_source(params: ComponentParams, key: rng.RngKey):
    """Keyed emission of a source for one time step.

    Returns one field for LED/Laser, a pair of fields for an entanglement
    source.  Draw budget: LED/Laser use draws [key.draw_index, +4),
    the entanglement source uses [key.draw_index, +8).
    """

    seed, node, step, draw = key
    if isinstance(params, LED):
        z = rng.gaussian_pair(seed, node, step, draw)
        return led_scale(params.power) * z
    if isinstance(params, Laser):
        z = rng.gaussian_pair(seed, node, step, draw)
        return laser_mean_field(params.power, params.polarization) + SIGMA0 * z
    if isinstance(params, EntanglementSource):
        z1 = rng.gaussian_pair(seed, node, step, draw)
        z2 = rng.gaussian_pair(seed, node, step, draw + 4)
        return ent_output(params, z1, z2)
    raise ValueError(f"{type(params).__name__} is not a source")


# ---------------------------------------------------------------------------
# Measurement devices
# ---------------------------------------------------------------------------


def threshold_from_dcr(dcr: float, delta_t: float = DELTA_T) -> float:
    """Detection threshold that reproduces the requested dark count rate."""

    delta = dcr * delta_t
    if delta < 0.0 or delta > 1.0:
        raise ValueError(f"dark count probability {delta} exceeds 1")
    if delta == 0.0:
        return math.inf
    if delta == 1.0:
        return 0.0
    return SIGMA0 * math.sqrt(-math.log(1.0 - math.sqrt(1.0 - delta)))


@dataclass
class DetectorState:
    """Threshold plus running count, owned by whoever is tallying clicks."""

    gamma: float
    count: int = 0

    @classmethod
    def from_dcr(cls, dcr: float, delta_t: float = DELTA_T) -> "DetectorState":
        return cls(gamma=threshold_from_dcr(dcr, delta_t))


def detector_evaluate(state: DetectorState, field: np.ndarray) -> bool:
    """True when either amplitude of the incident field crosses threshold.

    The engine calls this once per step and beam, which is what enforces the
    one-click-per-step dead time.
    """

    field = np.asarray(field, dtype=complex)
    return bool(
        (np.abs(field[..., 0]) > state.gamma) | (np.abs(field[..., 1]) > state.gamma)
    )


def clicks_over_threshold(fields: np.ndarray, gamma: float) -> np.ndarray:
    """Vectorized click decision over a block of field samples."""

    return (np.abs(fields[..., 0]) > gamma) | (np.abs(fields[..., 1]) > gamma)


def quantize_power(power_w) -> np.ndarray:
    """Truncate to whole nanowatts; anything under 1 nW records as zero."""

    return np.floor(np.asarray(power_w) / POWER_QUANTUM) * POWER_QUANTUM


def beam_power(field: np.ndarray) -> np.ndarray:
    """Unquantized power of one beam segment, in watts."""

    return squared_norm(field) * PHOTON_ENERGY / DELTA_T


def power_meter_read(inputs) -> float:
    """Largest quantized beam power among the illuminating beams."""

    if not inputs:
        raise ValueError("power meter needs at least one input (vacuum if dark)")
    best = max(float(beam_power(np.asarray(f, dtype=complex))) for f in inputs)
    return float(quantize_power(best))
