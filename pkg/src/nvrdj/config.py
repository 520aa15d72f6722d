"""Run configuration: one JSON tree with explicit units in the key names.

Every physical parameter of a run is auditable in this one structure. The
channel carriers must sit on the two transition frequencies derived from the
zero-field splitting (resonant operation) unless a channel carries an
explicit `detuning_hz` override. Default dephasing rates are calibrated at
load time so the closed-form mean contrast over the four protocol programs
is 0.596 (see rdj.calibrate_dephasing_rates).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

from . import rdj, spin_core
from .pulse_engine import ChannelCalibration, SimOptions
from .readout import ReadoutConfig
from .spin_core import ZfsParams

DEFAULT_CONTRAST_TARGET = 0.596
_CARRIER_RTOL = 1e-9


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    zfs: ZfsParams
    channels: dict[str, ChannelCalibration]
    sim: SimOptions
    readout: ReadoutConfig
    seed: int = 0
    detuning_overrides: Optional[dict[str, float]] = None

    def detunings(self) -> dict[str, float]:
        """Transition-minus-carrier detuning per channel (Hz)."""
        f_low, f_high = spin_core.transition_frequencies(self.zfs)
        resonant = {"MW1": f_low, "MW2": f_high}
        out = {}
        for label, cal in self.channels.items():
            if self.detuning_overrides and label in self.detuning_overrides:
                out[label] = self.detuning_overrides[label]
            else:
                out[label] = resonant[label] - cal.carrier_hz
        return out

    def line_splitting_hz(self) -> float:
        return 2.0 * self.zfs.e_hz


def default_config() -> RunConfig:
    """Defaults reproducing the calibrated experiment: resonant carriers,
    Rabi frequencies 7.87/4.26 MHz, equal channel dephasing rates fit to the
    0.596 contrast target."""
    zfs = spin_core.DEFAULT_ZFS
    f_low, f_high = spin_core.transition_frequencies(zfs)
    bare = {
        "MW1": ChannelCalibration(label="MW1", carrier_hz=f_low, rabi_hz=7.87e6),
        "MW2": ChannelCalibration(label="MW2", carrier_hz=f_high, rabi_hz=4.26e6),
    }
    channels = rdj.calibrate_dephasing_rates(bare, target_contrast=DEFAULT_CONTRAST_TARGET)
    return RunConfig(
        zfs=zfs,
        channels=channels,
        sim=SimOptions(),
        readout=ReadoutConfig(),
        seed=0,
    )


def to_dict(cfg: RunConfig) -> dict:
    out = {
        "seed": cfg.seed,
        "zfs": {"d_hz": cfg.zfs.d_hz, "e_hz": cfg.zfs.e_hz},
        "channels": {},
        "sim": {
            "dephasing_model": cfg.sim.dephasing_model,
            "crosstalk": cfg.sim.crosstalk,
            "time_step_s": cfg.sim.time_step,
            "quasistatic_samples": cfg.sim.quasistatic_samples,
            "quasistatic_sigma_hz": cfg.sim.quasistatic_sigma,
        },
        "readout": {
            "init_fidelity": cfg.readout.init_fidelity,
            "rate_bright_cps": cfg.readout.rate_bright,
            "rate_dark_cps": cfg.readout.rate_dark,
            "window_s": cfg.readout.window,
            "n_averages": cfg.readout.n_averages,
        },
    }
    for label, cal in sorted(cfg.channels.items()):
        entry = {
            "carrier_hz": cal.carrier_hz,
            "rabi_hz": cal.rabi_hz,
            "dephasing_rate_per_s": cal.dephasing_rate,
        }
        if cfg.detuning_overrides and label in cfg.detuning_overrides:
            entry["detuning_hz"] = cfg.detuning_overrides[label]
        out["channels"][label.lower()] = entry
    return out


def from_dict(data: dict) -> RunConfig:
    base = default_config()
    try:
        zfs = base.zfs
        if "zfs" in data:
            zfs = ZfsParams(d_hz=float(data["zfs"]["d_hz"]), e_hz=float(data["zfs"]["e_hz"]))
        f_low, f_high = spin_core.transition_frequencies(zfs)
        resonant = {"MW1": f_low, "MW2": f_high}

        channels = {}
        overrides = {}
        raw_channels = data.get("channels", {})
        for label in ("MW1", "MW2"):
            raw = raw_channels.get(label.lower(), raw_channels.get(label, {}))
            carrier = float(raw.get("carrier_hz", resonant[label]))
            cal = ChannelCalibration(
                label=label,
                carrier_hz=carrier,
                rabi_hz=float(raw.get("rabi_hz", base.channels[label].rabi_hz)),
                dephasing_rate=float(
                    raw.get("dephasing_rate_per_s", base.channels[label].dephasing_rate)
                ),
            )
            if "detuning_hz" in raw:
                overrides[label] = float(raw["detuning_hz"])
            elif abs(carrier - resonant[label]) > _CARRIER_RTOL * resonant[label]:
                raise ConfigError(
                    f"channel {label} carrier {carrier} Hz is off the {resonant[label]} Hz "
                    f"transition; set detuning_hz explicitly for off-resonant operation"
                )
            channels[label] = cal

        raw_sim = data.get("sim", {})
        sim = SimOptions(
            dephasing_model=raw_sim.get("dephasing_model", base.sim.dephasing_model),
            crosstalk=bool(raw_sim.get("crosstalk", base.sim.crosstalk)),
            time_step=float(raw_sim.get("time_step_s", base.sim.time_step)),
            quasistatic_samples=int(raw_sim.get("quasistatic_samples", base.sim.quasistatic_samples)),
            quasistatic_sigma=float(raw_sim.get("quasistatic_sigma_hz", base.sim.quasistatic_sigma)),
        )
        raw_ro = data.get("readout", {})
        ro = ReadoutConfig(
            init_fidelity=float(raw_ro.get("init_fidelity", base.readout.init_fidelity)),
            rate_bright=float(raw_ro.get("rate_bright_cps", base.readout.rate_bright)),
            rate_dark=float(raw_ro.get("rate_dark_cps", base.readout.rate_dark)),
            window=float(raw_ro.get("window_s", base.readout.window)),
            n_averages=int(raw_ro.get("n_averages", base.readout.n_averages)),
        )
        return RunConfig(
            zfs=zfs,
            channels=channels,
            sim=sim,
            readout=ro,
            seed=int(data.get("seed", 0)),
            detuning_overrides=overrides or None,
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"invalid configuration: {err}") from err


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: {err}") from err
    return from_dict(data)


def dump_defaults() -> str:
    return json.dumps(to_dict(default_config()), indent=2, sort_keys=True)


def with_mode(cfg: RunConfig, mode: str) -> RunConfig:
    """Derive the effective config for a protocol run mode.

    ``ideal``    no dephasing, perfect initialization, crosstalk off
    ``dephased`` calibrated lindblad dephasing, perfect initialization
                 (isolates the dephasing contribution to contrast)
    ``shots``    configuration as-is (shot sampling is applied downstream)
    """
    if mode == "shots":
        return cfg
    if mode == "ideal":
        channels = {
            k: replace(c, dephasing_rate=0.0) for k, c in cfg.channels.items()
        }
        return replace(
            cfg,
            channels=channels,
            sim=replace(cfg.sim, dephasing_model="none", crosstalk=False),
            readout=replace(cfg.readout, init_fidelity=1.0),
        )
    if mode == "dephased":
        return replace(
            cfg,
            sim=replace(cfg.sim, dephasing_model="lindblad"),
            readout=replace(cfg.readout, init_fidelity=1.0),
        )
    raise ConfigError(f"unknown mode {mode!r}")
