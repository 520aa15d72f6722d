import numpy as np
import pytest

from nvrdj import config as config_mod
from nvrdj.pulse_engine import ChannelCalibration, SimOptions

IDEAL = SimOptions(dephasing_model="none")


@pytest.fixture(scope="session")
def default_cfg():
    return config_mod.default_config()


@pytest.fixture(scope="session")
def ideal_cfg(default_cfg):
    return config_mod.with_mode(default_cfg, "ideal")


@pytest.fixture(scope="session")
def dephased_cfg(default_cfg):
    return config_mod.with_mode(default_cfg, "dephased")


@pytest.fixture(scope="session")
def cals():
    """Bare calibrations at the measured Rabi frequencies, no dephasing."""
    return {
        "MW1": ChannelCalibration(label="MW1", carrier_hz=2.8254e9, rabi_hz=7.87e6),
        "MW2": ChannelCalibration(label="MW2", carrier_hz=2.8644e9, rabi_hz=4.26e6),
    }


def rotation_unitary(channel: str, angle: float, phase: float = 0.0) -> np.ndarray:
    """Independent straight-line 3x3 pulse unitary for test oracles.

    Closed-form resonant rotation by `angle` on the channel's transition in
    the (|+1>, |0>, |-1>) basis, written directly from the two-level Rabi
    solution without touching the simulation engine.
    """
    target = 2 if channel == "MW1" else 0
    u = np.eye(3, dtype=complex)
    c = np.cos(angle / 2.0)
    s = np.sin(angle / 2.0)
    u[1, 1] = c
    u[target, target] = c
    u[1, target] = -1j * np.exp(1j * phase) * s
    u[target, 1] = -1j * np.exp(-1j * phase) * s
    return u
