"""Tests for the refined Deutsch-Jozsa oracles, programs and execution."""

import numpy as np
import pytest

from conftest import rotation_unitary
from nvrdj import config as config_mod
from nvrdj.pulse_dsl import KIND_MW
from nvrdj.rdj import (
    BALANCED,
    CONSTANT,
    ORACLE_IDS,
    build_rdj_program,
    calibrate_dephasing_rates,
    classify,
    oracle_matrix,
    oracle_sequence,
    predicted_contrast,
    run_rdj,
)

# Total microwave duration per program at Omega1 = 7.87 MHz, Omega2 = 4.26 MHz,
# from duration = angle/(2 pi Omega) summed over the merged pulse inventory.
EXPECTED_MW_DURATION = {
    1: 6.353240152477764e-08,
    2: 1.9059720457433293e-07,
    3: 4.253389886118916e-07,
    4: 2.9827418556233635e-07,
}


def subspace(u3: np.ndarray) -> np.ndarray:
    """Restrict a 3x3 unitary to span{|0>, |-1>} (indices 1, 2)."""
    return u3[np.ix_([1, 2], [1, 2])]


def phase_aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    overlap = np.trace(v.conj().T @ u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v))


class TestOracleMatrix:
    def test_identity_oracle(self):
        np.testing.assert_allclose(oracle_matrix(1), np.eye(2), atol=0)

    def test_balanced_oracle_three(self):
        np.testing.assert_allclose(oracle_matrix(3), np.diag([1, -1]), atol=0)

    def test_constant_pair_differ_by_global_phase(self):
        np.testing.assert_allclose(oracle_matrix(2) @ np.linalg.inv(oracle_matrix(1)), -np.eye(2), atol=0)

    def test_diagonal_phase_action(self):
        """V_f |z> = (-1)^{f(z)} |z> for all four functions."""
        functions = {1: lambda z: 0, 2: lambda z: 1, 3: lambda z: z, 4: lambda z: 1 - z}
        for oid, f in functions.items():
            v = oracle_matrix(oid)
            np.testing.assert_allclose(np.diag(v), [(-1.0) ** f(z) for z in (0, 1)], atol=0)

    def test_invalid_id(self):
        with pytest.raises(ValueError, match="oracle id"):
            oracle_matrix(5)


class TestOracleSequence:
    def test_inventories(self):
        assert [(e.channel, e.angle_pi) for e in oracle_sequence(1).events] == []
        assert [(e.channel, e.angle_pi) for e in oracle_sequence(2).events] == [("MW1", 2.0)]
        assert [(e.channel, e.angle_pi) for e in oracle_sequence(3).events] == [
            ("MW1", 2.0), ("MW2", 2.0),
        ]
        assert [(e.channel, e.angle_pi) for e in oracle_sequence(4).events] == [("MW2", 2.0)]

    @pytest.mark.parametrize("oid", ORACLE_IDS)
    def test_fragment_equals_oracle_up_to_global_phase(self, oid):
        """The composed 3x3 product of the fragment's ideal rotations,
        restricted to the qubit subspace, is V_f up to global phase."""
        u = np.eye(3, dtype=complex)
        for ev in oracle_sequence(oid).events:
            u = rotation_unitary(ev.channel, ev.angle_pi * np.pi, ev.phase) @ u
        assert phase_aligned_distance(subspace(u), oracle_matrix(oid)) < 1e-9

    def test_mw2_cycle_phase_on_zero(self):
        """The MW2 2pi fragment acts as diag(-1, 1) on (|0>, |-1>)."""
        u = rotation_unitary("MW2", 2 * np.pi)
        np.testing.assert_allclose(subspace(u), np.diag([-1, 1]), atol=1e-12)


class TestBuildProgram:
    def test_identity_oracle_collapses_to_single_pi(self):
        program = build_rdj_program(1)
        mw = [e for e in program.events if e.kind == KIND_MW]
        assert [(e.channel, e.angle_pi) for e in mw] == [("MW1", 1.0)]

    def test_oracle_four_microwave_part(self):
        mw = [e for e in build_rdj_program(4).events if e.kind == KIND_MW]
        assert [(e.channel, e.angle_pi) for e in mw] == [
            ("MW1", 0.5), ("MW2", 2.0), ("MW1", 0.5),
        ]

    def test_oracle_two_merges_into_three_pi(self):
        mw = [e for e in build_rdj_program(2).events if e.kind == KIND_MW]
        assert [(e.channel, e.angle_pi) for e in mw] == [("MW1", 3.0)]

    @pytest.mark.parametrize("oid", ORACLE_IDS)
    def test_total_microwave_durations(self, oid, cals):
        program = build_rdj_program(oid)
        total = sum(
            e.duration_s(cals[e.channel].rabi_hz)
            for e in program.events
            if e.kind == KIND_MW
        )
        assert total == pytest.approx(EXPECTED_MW_DURATION[oid], rel=1e-12)

    def test_program_shape(self):
        program = build_rdj_program(3)
        kinds = [e.kind for e in program.events]
        assert kinds[0] == "laser" and kinds[1] == "wait" and kinds[-1] == "readout"


class TestRunRdj:
    @pytest.mark.parametrize("oid,expected_p0,expected_class", [
        (1, 0.0, CONSTANT),
        (2, 0.0, CONSTANT),
        (3, 1.0, BALANCED),
        (4, 1.0, BALANCED),
    ])
    def test_ideal_truth_table(self, ideal_cfg, oid, expected_p0, expected_class):
        """Constant oracles end dark (p0 = 0), balanced ones bright (p0 = 1)."""
        r = run_rdj(oid, ideal_cfg.channels, ideal_cfg.sim, ideal_cfg.readout,
                    detunings=ideal_cfg.detunings())
        assert r.p0 == pytest.approx(expected_p0, abs=1e-6)
        assert r.classification == expected_class

    def test_constant_pair_identical(self, ideal_cfg):
        """Oracles 1 and 2 differ by a global phase only."""
        r1 = run_rdj(1, ideal_cfg.channels, ideal_cfg.sim, ideal_cfg.readout)
        r2 = run_rdj(2, ideal_cfg.channels, ideal_cfg.sim, ideal_cfg.readout)
        assert r1.p0 == pytest.approx(r2.p0, abs=1e-9)

    @pytest.mark.parametrize("oid", ORACLE_IDS)
    def test_auxiliary_level_stays_clean(self, ideal_cfg, oid):
        """Ideal runs leave < 1e-9 population in the auxiliary |+1> level."""
        from nvrdj import pulse_engine, readout as readout_mod
        from nvrdj.rdj import build_rdj_program

        rho = pulse_engine.run_sequence(
            readout_mod.initialize_state(ideal_cfg.readout),
            build_rdj_program(oid),
            ideal_cfg.channels,
            ideal_cfg.sim,
            init_fidelity=1.0,
        )
        assert rho[0, 0].real < 1e-9

    def test_ideal_separation(self, ideal_cfg):
        """|p0(balanced) - p0(constant)| = 1 for the ideal protocol."""
        p = {oid: run_rdj(oid, ideal_cfg.channels, ideal_cfg.sim, ideal_cfg.readout).p0
             for oid in ORACLE_IDS}
        assert abs((p[3] + p[4]) / 2 - (p[1] + p[2]) / 2) == pytest.approx(1.0, abs=1e-6)

    def test_monotone_degradation_in_dephasing(self, default_cfg):
        """Signal separation is non-increasing in the dephasing rate."""
        from dataclasses import replace

        seps = []
        for rate in (0.0, 5e5, 1e6, 2e6, 4e6):
            channels = {k: replace(c, dephasing_rate=rate) for k, c in default_cfg.channels.items()}
            cfg = replace(config_mod.with_mode(default_cfg, "dephased"), channels=channels)
            sig = {oid: run_rdj(oid, cfg.channels, cfg.sim, cfg.readout).signal for oid in ORACLE_IDS}
            seps.append((sig[3] + sig[4]) / 2 - (sig[1] + sig[2]) / 2)
        assert all(b <= a + 1e-12 for a, b in zip(seps, seps[1:]))

    def test_shots_deterministic(self, dephased_cfg):
        a = run_rdj(3, dephased_cfg.channels, dephased_cfg.sim, dephased_cfg.readout, shots=True, seed=7)
        b = run_rdj(3, dephased_cfg.channels, dephased_cfg.sim, dephased_cfg.readout, shots=True, seed=7)
        assert a.signal == b.signal
        assert a.raw_counts == b.raw_counts
        assert a.raw_counts is not None


class TestClassify:
    def test_low_signal_constant(self):
        assert classify(0.02, 0.5) == CONSTANT

    def test_high_signal_balanced(self):
        assert classify(0.98, 0.5) == BALANCED

    def test_dephased_contrast_classifies_all_four(self):
        """Signals at 0.5 +- 0.569/2 classify correctly with margin."""
        for s in (0.5 - 0.569 / 2, 0.5 - 0.569 / 2):
            assert classify(s) == CONSTANT
        for s in (0.5 + 0.569 / 2, 0.5 + 0.569 / 2):
            assert classify(s) == BALANCED

    def test_affine_rescaling_invariance(self):
        """Any midpoint-fixing rescaling with a > 0 keeps the outcome."""
        rng = np.random.default_rng(21)
        signals = [0.1, 0.35, 0.62, 0.97]
        for _ in range(100):
            a = rng.uniform(0.05, 1.0)
            for s in signals:
                scaled = 0.5 + a * (s - 0.5)
                assert classify(scaled) == classify(s)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            classify(1.2)


class TestCalibration:
    def test_predicted_contrast_hits_target(self, cals):
        calibrated = calibrate_dephasing_rates(cals, target_contrast=0.596)
        assert predicted_contrast(calibrated) == pytest.approx(0.596, abs=1e-9)
        assert calibrated["MW1"].dephasing_rate == calibrated["MW2"].dephasing_rate
        assert calibrated["MW1"].dephasing_rate > 0

    def test_zero_rates_give_unit_contrast(self, cals):
        assert predicted_contrast(cals) == pytest.approx(1.0, abs=0)
