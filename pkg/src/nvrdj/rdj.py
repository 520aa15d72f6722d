"""The refined Deutsch-Jozsa protocol on the qutrit's {|0>, |-1>} qubit.

A one-bit function f is encoded in the phase oracle V_f |z> = (-1)^{f(z)} |z>:

    f1(z) = 0      V1 = I           (constant)
    f2(z) = 1      V2 = -I          (constant)
    f3(z) = z      V3 = diag(1,-1)  (balanced)
    f4(z) = 1 - z  V4 = diag(-1,1)  (balanced)

The oracles are realized with full 2 pi pulses: a 2 pi pulse on MW2 cycles
|0> through the auxiliary |+1> level and back, imprinting a pi phase on |0>
(a Z-axis pi rotation of the qubit, = V4 up to global phase); a 2 pi pulse
on MW1 is -I on the qubit subspace (= V2); their combination gives V3. The
protocol brackets the oracle with two selective MW1 pi/2 pulses instead of
Hadamards, which inverts the readout: constant functions end with the |0>
population at 0 (weakest fluorescence) and balanced ones at 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from . import pulse_engine, readout, spin_core
from .pulse_dsl import (
    KIND_LASER,
    KIND_MW,
    KIND_READOUT,
    KIND_WAIT,
    PulseEvent,
    PulseSequence,
    merge_adjacent,
)
from .pulse_engine import ChannelCalibration, SimOptions
from .readout import ReadoutConfig

ORACLE_IDS = (1, 2, 3, 4)
CONSTANT = "constant"
BALANCED = "balanced"
CLASSIFICATION = {1: CONSTANT, 2: CONSTANT, 3: BALANCED, 4: BALANCED}

INIT_LASER_S = 5e-6
INIT_WAIT_S = 5e-6

_ORACLE_FRAGMENTS = {
    1: (),
    2: (("MW1", 2.0),),
    3: (("MW1", 2.0), ("MW2", 2.0)),
    4: (("MW2", 2.0),),
}


@dataclass(frozen=True)
class RdjResult:
    oracle: int
    p0: float
    signal: float
    classification: str
    raw_counts: Optional[int] = None


def oracle_matrix(oracle_id: int) -> np.ndarray:
    """V_f as a 2x2 diagonal unitary on span{|0>, |-1>}."""
    _check_id(oracle_id)
    return {
        1: np.diag([1.0, 1.0]),
        2: np.diag([-1.0, -1.0]),
        3: np.diag([1.0, -1.0]),
        4: np.diag([-1.0, 1.0]),
    }[oracle_id].astype(complex)


def oracle_sequence(oracle_id: int) -> PulseSequence:
    """The 2 pi pulse fragment implementing V_f (up to global phase)."""
    _check_id(oracle_id)
    events = tuple(
        PulseEvent(kind=KIND_MW, channel=ch, angle_pi=angle)
        for ch, angle in _ORACLE_FRAGMENTS[oracle_id]
    )
    return PulseSequence(events=events, name=f"oracle-{oracle_id}")


def build_rdj_program(oracle_id: int, readout_window_s: float = 300e-9) -> PulseSequence:
    """Full program: init laser, wait, pi/2 - oracle - pi/2, readout.

    Adjacent same-channel pulses are merged (zero gaps), so the identity
    oracle collapses the two pi/2 pulses into a single pi pulse.
    """
    _check_id(oracle_id)
    half_pi = PulseEvent(kind=KIND_MW, channel="MW1", angle_pi=0.5)
    events = (
        PulseEvent(kind=KIND_LASER, duration_ps=int(INIT_LASER_S * 1e12)),
        PulseEvent(kind=KIND_WAIT, duration_ps=int(INIT_WAIT_S * 1e12)),
        half_pi,
        *oracle_sequence(oracle_id).events,
        half_pi,
        PulseEvent(kind=KIND_READOUT, duration_ps=int(readout_window_s * 1e12)),
    )
    return merge_adjacent(PulseSequence(events=events, name=f"rdj-{oracle_id}"))


def classify(signal: float, threshold: float = 0.5) -> str:
    """Constant iff the normalized signal falls below the threshold."""
    if not (0.0 <= signal <= 1.0):
        raise ValueError("signal must be in [0, 1]")
    return CONSTANT if signal < threshold else BALANCED


def run_rdj(
    oracle_id: int,
    cals: Mapping[str, ChannelCalibration],
    opts: SimOptions,
    readout_cfg: ReadoutConfig,
    detunings: Optional[Mapping[str, float]] = None,
    threshold: float = 0.5,
    shots: bool = False,
    seed: int = 0,
    line_splitting_hz: float = 2.0 * spin_core.ZFS_E_HZ,
) -> RdjResult:
    """Execute one oracle end to end and classify the outcome.

    With `shots` the normalized signal is replaced by a Poisson-sampled one
    (deterministic per seed) and the raw counts are attached.
    """
    _check_id(oracle_id)
    program = build_rdj_program(oracle_id, readout_window_s=readout_cfg.window)
    rho0 = readout.initialize_state(readout_cfg)
    rho = pulse_engine.run_sequence(
        rho0,
        program,
        cals,
        opts,
        detunings=detunings,
        init_fidelity=readout_cfg.init_fidelity,
        line_splitting_hz=line_splitting_hz,
    )
    p0 = float(rho[1, 1].real)
    _, signal = readout.fluorescence_signal(rho, readout_cfg)
    counts = None
    if shots:
        counts = readout.sample_photon_counts(signal, readout_cfg, seed)
        mean_rate = counts / (readout_cfg.n_averages * readout_cfg.window)
        signal = (mean_rate - readout_cfg.rate_dark) / (readout_cfg.rate_bright - readout_cfg.rate_dark)
    clipped_signal = min(max(signal, 0.0), 1.0)
    return RdjResult(
        oracle=oracle_id,
        p0=p0,
        signal=signal,
        classification=classify(clipped_signal, threshold),
        raw_counts=counts,
    )


def predicted_contrast(cals: Mapping[str, ChannelCalibration]) -> float:
    """Closed-form contrast: the mean coherence envelope over all four
    programs, each from readout.predicted_visibility."""
    vs = [readout.predicted_visibility(build_rdj_program(i), cals) for i in ORACLE_IDS]
    return float(np.mean(vs))


def calibrate_dephasing_rates(
    cals: Mapping[str, ChannelCalibration],
    target_contrast: float = 0.596,
) -> dict[str, ChannelCalibration]:
    """Choose equal per-channel envelope rates R1 = R2 so the closed-form
    mean contrast over the four programs hits `target_contrast`.

    Bisection on the (monotone) predicted contrast; the experiment reports
    the contrast consequence of dephasing, not the rates themselves.
    """
    if not (0.0 < target_contrast < 1.0):
        raise ValueError("target contrast must be in (0, 1)")

    def with_rate(rate: float) -> dict[str, ChannelCalibration]:
        return {
            label: ChannelCalibration(
                label=cal.label,
                carrier_hz=cal.carrier_hz,
                rabi_hz=cal.rabi_hz,
                dephasing_rate=rate,
            )
            for label, cal in cals.items()
        }

    lo, hi = 0.0, 1e9
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if predicted_contrast(with_rate(mid)) > target_contrast:
            lo = mid
        else:
            hi = mid
    return with_rate(0.5 * (lo + hi))


def _check_id(oracle_id: int) -> None:
    if oracle_id not in ORACLE_IDS:
        raise ValueError(f"oracle id must be one of {ORACLE_IDS}, got {oracle_id!r}")
