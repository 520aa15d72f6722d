"""Pulse-level simulator of a single NV-center electron spin (S=1) running
the refined Deutsch-Jozsa protocol over two selective microwave channels."""

from .analysis import AnalysisError, DampedSineFit, contrast, fft_rabi_frequency, fit_damped_sine
from .config import ConfigError, RunConfig, default_config, load_config
from .pulse_dsl import ParseError, PulseEvent, PulseSequence, merge_adjacent, parse, serialize, validate
from .pulse_engine import (
    ChannelCalibration,
    PropagationError,
    SequenceError,
    SimOptions,
    apply_pulse,
    drive_hamiltonian,
    nutation_curve,
    propagate,
    run_sequence,
)
from .rdj import RdjResult, build_rdj_program, classify, oracle_matrix, oracle_sequence, run_rdj
from .readout import (
    ReadoutConfig,
    compensate_dephasing,
    fluorescence_signal,
    initialize_state,
    predicted_visibility,
    simulate_shots,
)
from .spin_core import ZfsParams, spin1_operators, transition_frequencies, zero_field_hamiltonian

__version__ = "0.1.0"
