"""Jones-vector geometry: standard kets, Bloch coordinates, thermal variance,
and the randomized unitary used by the depolarizer.

A Jones vector is any complex array whose trailing axis has length 2,
holding the horizontal and vertical amplitudes.
"""

from __future__ import annotations

import math

import numpy as np

from .constants import HBAR, K_B

_SQ2 = math.sqrt(0.5)

# The six standard polarization kets selectable on a laser.
KETS: dict[str, np.ndarray] = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([_SQ2, _SQ2], dtype=complex),
    "A": np.array([_SQ2, -_SQ2], dtype=complex),
    "R": np.array([_SQ2, 1j * _SQ2], dtype=complex),
    "L": np.array([_SQ2, -1j * _SQ2], dtype=complex),
}


def squared_norm(jones: np.ndarray) -> np.ndarray:
    """|h|^2 + |v|^2 over the trailing axis."""

    j = np.asarray(jones)
    return (j.real**2 + j.imag**2).sum(axis=-1)


def bloch_coords(jones: np.ndarray) -> tuple[float, float, float]:
    """Unit Bloch/Poincare-sphere coordinates of a polarization state.

    x is the D/A axis, y the R/L axis, z the H/V axis.
    """

    j = np.asarray(jones, dtype=complex)
    h, v = j[..., 0], j[..., 1]
    n = (abs(h) ** 2 + abs(v) ** 2)
    if np.any(n <= 0.0):
        raise ValueError("dark segment has no polarization")
    cross = np.conj(h) * v
    x = 2.0 * cross.real / n
    y = 2.0 * cross.imag / n
    z = (abs(h) ** 2 - abs(v) ** 2) / n
    if np.ndim(x) == 0:
        return float(x), float(y), float(z)
    return x, y, z


def sigma_thermal_sq(temperature: float, omega: float) -> float:
    """Per-quadrature-pair variance of a thermal mode at the given frequency.

    1/(exp(hbar*omega/(kB*T)) - 1) + 1/2, with the T -> 0 limit of 1/2.
    """

    if temperature < 0:
        raise ValueError("temperature must be nonnegative")
    if temperature == 0:
        return 0.5
    x = HBAR * omega / (K_B * temperature)
    if x > 700.0:  # occupation underflows double precision
        return 0.5
    return 1.0 / math.expm1(x) + 0.5


def haar_random_unitary(u, phi, lam, chi) -> np.ndarray:
    """SU(2)-style random unitary from four uniform parameters.

    With u ~ U[0,1] and phi, lam, chi ~ U[0, 2*pi) this is Haar distributed.
    The construction is exp(i*chi) * diag(1, e^{i*phi}) @ R(theta) @
    diag(1, e^{i*lam}) with theta = arccos(2u - 1) / 2.  Broadcasts over
    leading axes; output shape is ``broadcast_shape + (2, 2)``.
    """

    u = np.asarray(u, dtype=float)
    phi = np.asarray(phi, dtype=float)
    lam = np.asarray(lam, dtype=float)
    chi = np.asarray(chi, dtype=float)
    theta = 0.5 * np.arccos(np.clip(2.0 * u - 1.0, -1.0, 1.0))
    c, s = np.cos(theta), np.sin(theta)
    e_phi = np.exp(1j * phi)
    e_lam = np.exp(1j * lam)
    e_chi = np.exp(1j * chi)
    out = np.empty(np.broadcast(u, phi, lam, chi).shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s * e_lam
    out[..., 1, 0] = s * e_phi
    out[..., 1, 1] = c * e_phi * e_lam
    out *= e_chi[..., None, None] if out.ndim > 2 else e_chi
    return out
