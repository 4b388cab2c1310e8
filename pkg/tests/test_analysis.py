import math

import numpy as np
import pytest

from beamlab import analysis
from beamlab.polarization import KETS
from beamlab.recorder import CoincidenceTable

# Single-run pattern counts from the published anticorrelation experiment
# (type-I source, r = 0.7, one second).
ANTICORR_COUNTS = dict(n3=43407, n13=6710, n23=6772, n123=703)

# Published coincidence counts for the four analyzer settings of the
# correlation test: rows are (n13, n14, n23, n24).
CHSH_COUNTS = [
    [(11, 34, 52, 5), (11, 37, 44, 8)],
    [(8, 45, 36, 7), (32, 9, 5, 43)],
]


class TestHomodyne:
    def test_constant_series_gives_zero(self):
        p = np.full(100, 3.3e-3)
        assert analysis.homodyne_estimate(p, p) == 0.0

    def test_synthetic_gaussian(self):
        rng = np.random.default_rng(5)
        x = rng.normal(0.0, 2e-9, 200000)
        base = np.full_like(x, 4e-3)
        p1 = base + x / 2
        p2 = base - x / 2
        expected = x.var(ddof=1) / (2 * (p1 + p2).mean())
        assert analysis.homodyne_estimate(p1, p2) == pytest.approx(expected, rel=1e-12)

    def test_zero_mean_rejected(self):
        zeros = np.zeros(10)
        with pytest.raises(ZeroDivisionError):
            analysis.homodyne_estimate(zeros, zeros)


class TestEfficiencies:
    def test_laser_zero_counts(self):
        assert analysis.efficiency_laser(0, 10.0, 1e10, 1.0) == 0.0

    def test_laser_dark_dominated_regime_exceeds_unity(self):
        # pure dark counts at d large: the inferred efficiency is invalid
        assert analysis.efficiency_laser(1000, 14.0, 1e10, 1.0) > 1.0

    def test_heralded_edges(self):
        assert analysis.efficiency_heralded(5, 0) == 0.0
        assert analysis.efficiency_heralded(0, 5) == 1.0
        assert analysis.efficiency_heralded(3, 1) == 0.25
        with pytest.raises(ZeroDivisionError):
            analysis.efficiency_heralded(0, 0)


class TestBornProbability:
    def test_symmetry(self):
        assert analysis.born_probability(7, 7) == 0.5

    def test_zero_counts_rejected(self):
        with pytest.raises(ZeroDivisionError):
            analysis.born_probability(0, 0)

    def test_min_subtraction(self):
        n1 = [110, 60, 10]
        n2 = [12, 62, 112]
        p = analysis.born_probability_min_subtracted(n1, n2)
        assert p[0] == pytest.approx(1.0)
        assert p[-1] == pytest.approx(0.0)
        assert p[1] == pytest.approx(0.5)

    def test_rate_subtraction_flags_overshoot(self):
        ok = analysis.born_probability_rate_subtracted(100, 100, 10, 10)
        assert ok.in_range and ok.value == 0.5
        clamped = analysis.born_probability_rate_subtracted(5, 100, 20, 0)
        assert not clamped.in_range
        assert clamped.value == 0.0


class TestQst:
    def test_pure_pole(self):
        state = analysis.qst_reconstruct(0.0, 0.0, 1.0)
        assert state.positive_semidefinite
        assert np.allclose(state.rho, [[1, 0], [0, 0]], atol=1e-15)
        assert state.fidelity(KETS["H"]) == pytest.approx(1.0)

    def test_maximally_mixed(self):
        state = analysis.qst_reconstruct(0.0, 0.0, 0.0)
        assert state.positive_semidefinite
        for ket in KETS.values():
            assert state.fidelity(ket) == pytest.approx(0.5)

    def test_inflated_expectations_break_positivity(self):
        state = analysis.qst_reconstruct(1.0, 1.0, 1.0)
        assert not state.positive_semidefinite
        eigenvalues = np.linalg.eigvalsh(state.rho)
        assert eigenvalues.min() == pytest.approx(0.5 * (1 - math.sqrt(3.0)), rel=1e-12)
        direction = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
        aligned = np.array(
            [math.cos(0.5 * math.acos(direction[2])),
             math.sin(0.5 * math.acos(direction[2]))
             * complex(math.cos(math.atan2(1, 1)), math.sin(math.atan2(1, 1)))],
            dtype=complex,
        )
        assert state.fidelity(aligned) > 1.0

    def test_trace_and_hermiticity_exact(self):
        state = analysis.qst_reconstruct(0.3, -0.2, 0.5)
        assert np.trace(state.rho) == pytest.approx(1.0, abs=1e-15)
        assert np.allclose(state.rho, state.rho.conj().T, atol=1e-15)

    def test_out_of_range_expectation_rejected(self):
        with pytest.raises(ValueError):
            analysis.qst_reconstruct(1.5, 0.0, 0.0)

    def test_basis_settings(self):
        assert analysis.qst_basis_settings("Z") == (0.0, 0.0)
        assert analysis.qst_basis_settings("X") == (45.0, 22.5)
        assert analysis.qst_basis_settings("Y") == (90.0, 22.5)
        with pytest.raises(ValueError):
            analysis.qst_basis_settings("W")

    def test_polarizer_settings(self):
        assert analysis.polarizer_settings("H") == (0.0, 0.0)
        assert analysis.polarizer_settings("V") == (90.0, 0.0)
        assert analysis.polarizer_settings("D") == (45.0, 0.0)
        assert analysis.polarizer_settings("A") == (-45.0, 0.0)
        assert analysis.polarizer_settings("R") == (45.0, 90.0)
        assert analysis.polarizer_settings("L") == (45.0, -90.0)


class TestMachZehnder:
    def test_ideal_limits(self):
        assert analysis.mz_quantum(0.0, 0.0) == pytest.approx((1.0, 0.0))
        for phi in (0.0, 45.0, 133.0, 270.0):
            q1, q2 = analysis.mz_quantum(phi, 45.0)
            assert q1 == pytest.approx(0.5)
            assert q2 == pytest.approx(0.5)

    def test_single_click_probabilities_sum_below_one(self):
        for phi in np.arange(0.0, 361.0, 45.0):
            for theta in (0.0, 15.0, 30.0, 45.0):
                p1, p2 = analysis.mz_probabilities(phi, theta, 12.0, 1000.0)
                assert 0.0 <= p1 <= 1.0
                assert p1 + p2 <= 1.0

    def test_dark_subtraction_recovers_ideal_shape(self):
        delta = 1e-3
        devs = []
        for phi in np.arange(0.0, 361.0, 30.0):
            p1, p2 = analysis.mz_probabilities(phi, 0.0, 12.0, 1000.0)
            q1, _ = analysis.mz_quantum(phi, 0.0)
            devs.append(abs(analysis.mz_dark_subtracted(p1, p2, delta, delta) - q1))
        assert max(devs) < 0.02


class TestAnticorrelation:
    def test_published_single_run_value(self):
        assert analysis.anticorrelation_alpha(**ANTICORR_COUNTS) == pytest.approx(
            0.89, abs=0.005
        )

    def test_no_triples_gives_zero(self):
        assert analysis.anticorrelation_alpha(100, 10, 10, 0) == 0.0

    def test_missing_heralds_rejected(self):
        with pytest.raises(ZeroDivisionError):
            analysis.anticorrelation_alpha(100, 0, 10, 1)

    def test_scale_invariance(self):
        base = analysis.anticorrelation_alpha(**ANTICORR_COUNTS)
        scaled = analysis.anticorrelation_alpha(
            **{k: 7 * v for k, v in ANTICORR_COUNTS.items()}
        )
        assert scaled == pytest.approx(base, rel=1e-12)


class TestChsh:
    def test_published_counts(self):
        c, s = analysis.chsh(CHSH_COUNTS)
        assert c[0, 0] == pytest.approx(-0.6863, abs=5e-4)
        assert c[0, 1] == pytest.approx(-0.6200, abs=5e-4)
        assert c[1, 0] == pytest.approx(-0.6875, abs=5e-4)
        assert c[1, 1] == pytest.approx(+0.6854, abs=5e-4)
        assert s == pytest.approx(2.679, abs=1e-3)

    def test_flat_counts_give_zero(self):
        flat = [[(5, 5, 5, 5)] * 2] * 2
        c, s = analysis.chsh(flat)
        assert np.allclose(c, 0.0)
        assert s == 0.0

    def test_ideal_singlet_correlations_saturate(self):
        def quad(c_value, total=10000):
            plus = total * (1 + c_value) / 4
            minus = total * (1 - c_value) / 4
            return (plus, minus, minus, plus)

        v = 1 / math.sqrt(2.0)
        counts = [[quad(-v), quad(-v)], [quad(-v), quad(+v)]]
        _, s = analysis.chsh(counts)
        assert s == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-12)

    def test_scale_invariance_and_bound(self):
        _, s1 = analysis.chsh(CHSH_COUNTS)
        scaled = [[tuple(3 * x for x in q) for q in row] for row in CHSH_COUNTS]
        _, s2 = analysis.chsh(scaled)
        assert s1 == pytest.approx(s2, rel=1e-12)
        assert 0.0 <= s1 <= 4.0

    def test_empty_setting_rejected(self):
        with pytest.raises(ZeroDivisionError):
            analysis.chsh([[(0, 0, 0, 0), (1, 1, 1, 1)], [(1, 1, 1, 1), (1, 1, 1, 1)]])


class TestTeleportFidelity:
    def test_published_run(self):
        f, lo, hi = analysis.teleport_fidelity(27, 1)
        assert f == pytest.approx(0.964, abs=1e-3)
        assert lo == pytest.approx(0.82, abs=0.01)
        assert hi > 0.99

    def test_balanced(self):
        f, lo, hi = analysis.teleport_fidelity(10, 10)
        assert f == 0.5
        assert lo < 0.5 < hi

    def test_all_failures(self):
        f, lo, hi = analysis.teleport_fidelity(0, 5)
        assert f == 0.0
        assert lo == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ZeroDivisionError):
            analysis.teleport_fidelity(0, 0)


def _table(counts: dict) -> CoincidenceTable:
    labels = ["D1", "D2", "D3", "D4"]
    values = np.zeros(16, dtype=np.int64)
    for names, count in counts.items():
        mask = sum(1 << labels.index(n) for n in names)
        values[mask] = count
    return CoincidenceTable(labels, values, int(values.sum()))


class TestBsaClassify:
    def test_published_signatures(self):
        psi_minus = _table(
            {("D1",): 56, ("D2",): 59, ("D3",): 54, ("D4",): 49,
             ("D1", "D2"): 7, ("D1", "D3"): 4, ("D1", "D4"): 68,
             ("D2", "D3"): 76, ("D2", "D4"): 8, ("D3", "D4"): 5}
        )
        assert analysis.bsa_classify(psi_minus) == "Psi_minus"
        psi_plus = _table(
            {("D1",): 55, ("D2",): 64, ("D3",): 48, ("D4",): 49,
             ("D1", "D2"): 75, ("D1", "D3"): 2, ("D1", "D4"): 0,
             ("D2", "D3"): 6, ("D2", "D4"): 9, ("D3", "D4"): 69}
        )
        assert analysis.bsa_classify(psi_plus) == "Psi_plus"
        phi_plus = _table(
            {("D1",): 104, ("D2",): 96, ("D3",): 91, ("D4",): 111,
             ("D1", "D2"): 18, ("D1", "D3"): 24, ("D1", "D4"): 23,
             ("D2", "D3"): 17, ("D2", "D4"): 21, ("D3", "D4"): 20}
        )
        assert analysis.bsa_classify(phi_plus) == "Phi_pair"

    def test_empty_table_inconclusive(self):
        assert analysis.bsa_classify(_table({})) == "inconclusive"


def test_expected_dark_counts_linear_in_rate():
    assert analysis.expected_dark_counts(1000.0, 10**6) == pytest.approx(1000.0, rel=1e-9)
