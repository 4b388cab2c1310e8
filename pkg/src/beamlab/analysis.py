"""Post-run estimators: normalization, dark-count subtraction, post-selection
statistics, state reconstruction, and the interferometer closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as beta_dist

from .constants import DELTA_T
from .oracles import dark_count_prob, mz_mean_amplitudes, pr_click
from .components import threshold_from_dcr

_DEG = math.pi / 180.0

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


# ---------------------------------------------------------------------------
# Vacuum-level and efficiency estimators
# ---------------------------------------------------------------------------


def homodyne_estimate(p1, p2) -> float:
    """Vacuum power level from balanced difference/sum statistics.

    p1 and p2 are the two meter series in watts (warm-up zeros already
    dropped by the caller).  Returns var(p1 - p2) / (2 * mean(p1 + p2)).
    """

    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.shape != p2.shape or p1.size < 2:
        raise ValueError("need two equal-length series of at least 2 samples")
    x = p1 - p2
    y = p1 + p2
    mean_y = float(y.mean())
    if mean_y == 0.0:
        raise ZeroDivisionError("zero mean total power")
    return float(x.var(ddof=1)) / (2.0 * mean_y)


def efficiency_laser(counts: int, d: float, alpha_sq: float, duration: float) -> float:
    """Counts relative to the nominal attenuated photon flux.

    Can legitimately exceed 1 when dark counts dominate; callers should
    treat that regime as invalid.
    """

    if duration <= 0:
        raise ValueError("duration must be positive")
    return counts * DELTA_T / (10.0 ** (-d) * alpha_sq * duration)


def efficiency_heralded(n1: int, n12: int) -> float:
    """Coincidences over heralds: N12 / (N1 + N12)."""

    if n1 + n12 <= 0:
        raise ZeroDivisionError("no heralded events")
    return n12 / (n1 + n12)


# ---------------------------------------------------------------------------
# Normalized probabilities with optional dark-count subtraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Probability:
    value: float
    in_range: bool = True


def born_probability(n1, n2) -> float:
    """Standard normalization n1 / (n1 + n2)."""

    if n1 + n2 <= 0:
        raise ZeroDivisionError("no counts to normalize")
    return n1 / (n1 + n2)


def born_probability_min_subtracted(n1_sweep, n2_sweep) -> np.ndarray:
    """Sweep-wide normalization after subtracting each channel's minimum.

    This is the usual experimental dark-count removal when the true dark
    rate is unknown: the smallest count over the sweep is taken as the dark
    level of that channel.
    """

    n1 = np.asarray(n1_sweep, dtype=float)
    n2 = np.asarray(n2_sweep, dtype=float)
    if n1.size == 0 or n1.shape != n2.shape:
        raise ValueError("need two equal, nonempty count sweeps")
    a = n1 - n1.min()
    b = n2 - n2.min()
    total = a + b
    with np.errstate(invalid="ignore"):
        return np.where(total > 0, a / np.where(total > 0, total, 1.0), np.nan)


def born_probability_rate_subtracted(
    n1, n2, expected_dark1: float, expected_dark2: float
) -> Probability:
    """Normalization after subtracting dark counts estimated as rate * time.

    Small samples can push the estimate outside [0, 1]; the result is
    clamped and flagged.
    """

    a = n1 - expected_dark1
    b = n2 - expected_dark2
    if a + b == 0:
        raise ZeroDivisionError("no counts left after subtraction")
    p = a / (a + b)
    if 0.0 <= p <= 1.0:
        return Probability(p)
    return Probability(min(1.0, max(0.0, p)), in_range=False)


# ---------------------------------------------------------------------------
# State tomography
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReconstructedState:
    rho: np.ndarray  # 2x2, exactly Hermitian with unit trace
    positive_semidefinite: bool

    def fidelity(self, ket: np.ndarray) -> float:
        """<psi| rho |psi> against a normalized pure state."""

        ket = np.asarray(ket, dtype=complex)
        ket = ket / math.sqrt(float(np.vdot(ket, ket).real))
        return float(np.vdot(ket, self.rho @ ket).real)


def qst_reconstruct(exp_x: float, exp_y: float, exp_z: float) -> ReconstructedState:
    """Linear-inversion density matrix from the three Pauli expectations.

    The result always has unit trace and is Hermitian by construction, but
    noisy or inflated expectations can make it non-positive; that is
    reported rather than repaired.
    """

    for value in (exp_x, exp_y, exp_z):
        if not -1.0 <= value <= 1.0:
            raise ValueError("expectation values must lie in [-1, 1]")
    rho = 0.5 * (
        np.eye(2, dtype=complex) + exp_x * PAULI_X + exp_y * PAULI_Y + exp_z * PAULI_Z
    )
    eigenvalues = np.linalg.eigvalsh(rho)
    return ReconstructedState(rho, bool(eigenvalues.min() >= -1e-12))


def qst_basis_settings(basis: str) -> tuple:
    """(QWP angle, HWP angle) that rotate the given Pauli basis onto H/V."""

    settings = {"Z": (0.0, 0.0), "X": (45.0, 22.5), "Y": (90.0, 22.5)}
    try:
        return settings[basis.upper()]
    except KeyError:
        raise ValueError(f"unknown measurement basis {basis!r}") from None


def polarizer_settings(state: str) -> tuple:
    """(theta, phi) of the polarizer transmitting the named polarization."""

    settings = {
        "H": (0.0, 0.0),
        "V": (90.0, 0.0),
        "D": (45.0, 0.0),
        "A": (-45.0, 0.0),
        "R": (45.0, 90.0),
        "L": (45.0, -90.0),
    }
    try:
        return settings[state.upper()]
    except KeyError:
        raise ValueError(f"unknown polarization state {state!r}") from None


# ---------------------------------------------------------------------------
# Two-arm interferometer closed forms
# ---------------------------------------------------------------------------


def mz_probabilities(
    phi_deg: float, theta_deg: float, d: float, dcr: float, alpha: float = 1e5
) -> tuple:
    """Exclusive single-click probabilities (p1, p2) of the two outputs.

    Computed by feeding the mean output amplitudes into the threshold-click
    closed form; the two detectors are independent, so the exclusive single
    probabilities are products.
    """

    gamma = threshold_from_dcr(dcr)
    a_h, b_h, a_v, b_v = mz_mean_amplitudes(phi_deg, theta_deg, d, alpha)
    pr1 = pr_click(a_h, a_v, gamma)
    pr2 = pr_click(b_h, b_v, gamma)
    return pr1 * (1.0 - pr2), pr2 * (1.0 - pr1)


def mz_quantum(phi_deg: float, theta_deg: float) -> tuple:
    """Ideal one-particle predictions (q1, q2) for the same interferometer."""

    value = math.cos(phi_deg * _DEG) * math.cos(2.0 * theta_deg * _DEG)
    return 0.5 * (1.0 + value), 0.5 * (1.0 - value)


def mz_dark_subtracted(p1: float, p2: float, delta1: float, delta2: float) -> float:
    """Renormalized p1 after removing each detector's dark probability."""

    a = p1 - delta1
    b = p2 - delta2
    if a + b == 0:
        raise ZeroDivisionError("no probability left after subtraction")
    return a / (a + b)


# ---------------------------------------------------------------------------
# Coincidence statistics
# ---------------------------------------------------------------------------


def anticorrelation_alpha(n3: int, n13: int, n23: int, n123: int) -> float:
    """Heralded anticorrelation ratio; below 1 means anti-bunched clicks."""

    if n13 <= 0 or n23 <= 0:
        raise ZeroDivisionError("insufficient heralded singles")
    return n123 * (n3 + n13 + n23 + n123) / (n13 * n23)


def chsh(setting_counts) -> tuple:
    """Correlation matrix and Bell statistic from coincidence counts.

    ``setting_counts[i][j]`` holds the four coincidence counts
    (n13, n14, n23, n24) for analyzer setting (i, j): detectors 3/4 score
    +1/-1 on one side, detectors 1/2 score +1/-1 on the other.
    Returns (C, S) with S = |C11 + C12| + |C21 - C22|.
    """

    c = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            n13, n14, n23, n24 = setting_counts[i][j]
            total = n13 + n14 + n23 + n24
            if total <= 0:
                raise ZeroDivisionError(f"no coincidences for setting ({i + 1}, {j + 1})")
            c[i, j] = (n13 - n14 - n23 + n24) / total
    s = abs(c[0, 0] + c[0, 1]) + abs(c[1, 0] - c[1, 1])
    return c, float(s)


def teleport_fidelity(nh: int, nv: int, confidence: float = 0.95) -> tuple:
    """Fidelity nh/(nh+nv) with an exact Clopper-Pearson interval."""

    n = nh + nv
    if n <= 0:
        raise ZeroDivisionError("no valid teleportation events")
    alpha = 1.0 - confidence
    lower = 0.0 if nh == 0 else float(beta_dist.ppf(alpha / 2.0, nh, n - nh + 1))
    upper = 1.0 if nh == n else float(beta_dist.ppf(1.0 - alpha / 2.0, nh + 1, n - nh))
    return nh / n, lower, upper


def bsa_classify(table) -> str:
    """Classify which Bell state a four-detector coincidence table reflects.

    Detectors are taken in sorted label order (D1..D4 in the bundled layout,
    where D1/D2 analyze one splitter arm and D3/D4 the other).  Pools the
    two-detector signatures: cross-arm opposite-polarization pairs for the
    singlet, same-arm pairs for the triplet, and the remaining cross pairs
    as the accidental floor.  A signature wins when it exceeds twice every
    rival pool; a flat double-click profile (accidentals comparable to both
    signatures) indicates one of the two unresolvable states.
    """

    d1, d2, d3, d4 = sorted(table.detector_labels)
    singlet = table.count(d1, d4) + table.count(d2, d3)
    triplet = table.count(d1, d2) + table.count(d3, d4)
    cross = table.count(d1, d3) + table.count(d2, d4)
    if singlet + triplet + cross == 0:
        return "inconclusive"
    if singlet > 2 * max(triplet, cross):
        return "Psi_minus"
    if triplet > 2 * max(singlet, cross):
        return "Psi_plus"
    if 2 * cross >= max(singlet, triplet):
        return "Phi_pair"
    return "inconclusive"


def expected_dark_counts(dcr: float, num_steps: int) -> float:
    """Expected dark counts of one detector over a run."""

    return dark_count_prob(threshold_from_dcr(dcr)) * num_steps
