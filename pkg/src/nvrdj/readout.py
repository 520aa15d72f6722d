"""Laser initialization, fluorescence readout and dephasing compensation.

The green laser polarizes the spin into |0> with probability p (the rest is
split evenly over m_s = +-1, all coherence destroyed). Readout maps the |0>
population to a photon rate between a dark and a bright level; the
normalized signal (raw - dark)/(bright - dark) equals the |0> population
exactly, so it spans [0, 1] with the mixed-state midpoint at 0.5. Repeated
single-shot experiments are modeled as one Poisson draw over the accumulated
counts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .pulse_dsl import KIND_MW, PulseSequence
from .spin_core import IDX_MINUS, IDX_PLUS, IDX_ZERO


@dataclass(frozen=True)
class ReadoutConfig:
    """Initialization and photon-counting parameters.

    The bright/dark rates only set the absolute count scale; the normalized
    signal pipeline is independent of them. Their default ratio 1.0/0.7 is a
    typical NV readout contrast, not a measured value.
    """

    init_fidelity: float = 0.9
    rate_bright: float = 1.0e5
    rate_dark: float = 0.7e5
    window: float = 300e-9
    n_averages: int = 50_000_000

    def __post_init__(self):
        if not (0.0 < self.init_fidelity <= 1.0):
            raise ValueError("init_fidelity must be in (0, 1]")
        if not (self.rate_bright > self.rate_dark >= 0.0):
            raise ValueError("require rate_bright > rate_dark >= 0")
        if self.window <= 0:
            raise ValueError("readout window must be > 0")
        if self.n_averages < 1:
            raise ValueError("n_averages must be >= 1")


def polarized_state(init_fidelity: float) -> np.ndarray:
    """Diagonal state p |0><0| + (1-p)/2 (|+1><+1| + |-1><-1|)."""
    if not (0.0 < init_fidelity <= 1.0):
        raise ValueError("init_fidelity must be in (0, 1]")
    rho = np.zeros((3, 3), dtype=complex)
    rho[IDX_ZERO, IDX_ZERO] = init_fidelity
    rho[IDX_PLUS, IDX_PLUS] = (1.0 - init_fidelity) / 2.0
    rho[IDX_MINUS, IDX_MINUS] = (1.0 - init_fidelity) / 2.0
    return rho


def initialize_state(cfg: ReadoutConfig) -> np.ndarray:
    """State after the green initialization pulse."""
    return polarized_state(cfg.init_fidelity)


def fluorescence_signal(rho: np.ndarray, cfg: ReadoutConfig) -> tuple[float, float]:
    """Return (raw_rate, normalized) for a readout of `rho`.

    raw_rate = p0 * bright + (1 - p0) * dark in counts/s; the normalized
    signal equals the |0> population.
    """
    p0 = float(rho[IDX_ZERO, IDX_ZERO].real)
    raw = p0 * cfg.rate_bright + (1.0 - p0) * cfg.rate_dark
    normalized = (raw - cfg.rate_dark) / (cfg.rate_bright - cfg.rate_dark)
    return raw, normalized


def sample_photon_counts(normalized: float, cfg: ReadoutConfig, seed: int) -> int:
    """Poisson-distributed total counts over n_averages readout windows."""
    if not (0.0 <= normalized <= 1.0):
        raise ValueError("normalized signal must be in [0, 1]")
    rate = cfg.rate_dark + normalized * (cfg.rate_bright - cfg.rate_dark)
    mean = cfg.n_averages * cfg.window * rate
    rng = np.random.default_rng(seed)
    return int(rng.poisson(mean))


def simulate_shots(normalized: float, cfg: ReadoutConfig, seed: int) -> float:
    """Shot-sampled normalized signal, deterministic for a given seed."""
    counts = sample_photon_counts(normalized, cfg, seed)
    mean_rate = counts / (cfg.n_averages * cfg.window)
    return (mean_rate - cfg.rate_dark) / (cfg.rate_bright - cfg.rate_dark)


def compensate_dephasing(raw_signal: float, visibility: float) -> tuple[float, bool]:
    """Undo a coherence envelope: 0.5 + (s - 0.5)/V, clipped to [0, 1].

    Returns (compensated, clipped). Division by a small visibility can
    overshoot the physical range under shot noise; the clip is flagged,
    never silent.
    """
    if not (0.0 < visibility <= 1.0):
        raise ValueError("visibility must be in (0, 1]")
    value = 0.5 + (raw_signal - 0.5) / visibility
    clipped = value < 0.0 or value > 1.0
    return (min(max(value, 0.0), 1.0), clipped)


def predicted_visibility(program: PulseSequence, cals: Mapping[str, object]) -> float:
    """Coherence envelope surviving the microwave part of a program.

    Multiplies e^{-R_channel * duration} over every MW pulse, the factor the
    damped-cosine nutation fit assigns to drive of that length. Laser and
    wait periods are excluded: they bracket the coherent part.
    """
    exponent = 0.0
    for ev in program.events:
        if ev.kind != KIND_MW:
            continue
        cal = cals[ev.channel]
        exponent += cal.dephasing_rate * ev.duration_s(cal.rabi_hz)
    return float(np.exp(-exponent))
