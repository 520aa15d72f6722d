"""Figure rendering for the report path.

Renders the two calibration nutation curves with their damped-cosine fits
and the four-oracle protocol signals (ideal, dephased, compensated) as PNG
files, next to the delimited data the CLI already emits.
"""
from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import analysis, pulse_engine, rdj, readout
from .config import RunConfig, with_mode

NUTATION_T_MAX = 1e-6
NUTATION_POINTS = 501


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def nutation_figure(curve: np.ndarray, fit: analysis.DampedSineFit, fft_hz: float,
                    channel: str, path: Path) -> None:
    t_ns = curve[:, 0] * 1e9
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(t_ns, curve[:, 1], "k.", ms=3, label="simulated")
    tt = np.linspace(curve[0, 0], curve[-1, 0], 2000)
    model = fit.y0 + fit.amplitude * np.exp(-fit.decay_rate * tt) * np.cos(fit.omega * tt)
    ax.plot(tt * 1e9, model, "r-", lw=1, label="damped cosine fit")
    t_pi = curve[np.argmin(curve[:, 1]), 0]
    ax.axvline(t_pi * 1e9, color="0.6", ls="--", lw=0.8)
    ax.annotate(f"pi pulse {t_pi*1e9:.1f} ns", (t_pi * 1e9, 0.02), fontsize=8, color="0.3")
    ax.set_xlabel("pulse duration (ns)")
    ax.set_ylabel("normalized signal")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(f"{channel} nutation, {fit.frequency_hz/1e6:.2f} MHz (FFT {fft_hz/1e6:.2f} MHz)")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def rdj_figure(ideal, dephased, compensated, path: Path) -> None:
    oracles = [r.oracle for r in ideal]
    x = np.arange(len(oracles))
    width = 0.27
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.bar(x - width, [r.signal for r in ideal], width, label="ideal", color="0.75")
    ax.bar(x, [r.signal for r in dephased], width, label="dephased", color="tab:blue")
    ax.bar(x + width, compensated, width, label="compensated", color="tab:red")
    ax.axhline(0.5, color="0.4", ls=":", lw=0.8)
    ax.set_xticks(x)
    ax.set_xticklabels([f"f{o}\n({rdj.CLASSIFICATION[o]})" for o in oracles], fontsize=8)
    ax.set_ylabel("normalized signal")
    ax.set_ylim(0, 1.1)
    ax.set_title("refined Deutsch-Jozsa outputs")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report(cfg: RunConfig, out_dir: Path) -> list[str]:
    """Write nutation and protocol data, fits and figures; return the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    for channel in ("MW1", "MW2"):
        cal = cfg.channels[channel]
        curve = pulse_engine.nutation_curve(cal, NUTATION_T_MAX, NUTATION_POINTS, cfg.sim)
        csv_path = out_dir / f"nutation_{channel.lower()}.csv"
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write("t_s,signal\n")
            for t, s in curve:
                fh.write(f"{_fmt(t)},{_fmt(s)}\n")
        written.append(str(csv_path))
        fft_hz = analysis.fft_rabi_frequency(curve[:, 0], curve[:, 1])
        fit = analysis.fit_damped_sine(curve[:, 0], curve[:, 1])
        fit_path = out_dir / f"nutation_{channel.lower()}_fit.json"
        fit_path.write_text(
            json.dumps(
                {
                    "y0": fit.y0,
                    "amplitude": fit.amplitude,
                    "decay_rate_per_s": fit.decay_rate,
                    "omega_rad_per_s": fit.omega,
                    "frequency_hz": fit.frequency_hz,
                    "fft_frequency_hz": fft_hz,
                    "residual_rms": fit.residual_rms,
                    "converged": fit.converged,
                },
                indent=2,
                sort_keys=True,
            )
            + "\n",
            encoding="utf-8",
        )
        written.append(str(fit_path))
        png_path = out_dir / f"nutation_{channel.lower()}.png"
        nutation_figure(curve, fit, fft_hz, channel, png_path)
        written.append(str(png_path))

    ideal_cfg = with_mode(cfg, "ideal")
    dephased_cfg = with_mode(cfg, "dephased")
    ideal, dephased, compensated = [], [], []
    for oid in rdj.ORACLE_IDS:
        ideal.append(
            rdj.run_rdj(oid, ideal_cfg.channels, ideal_cfg.sim, ideal_cfg.readout,
                        detunings=ideal_cfg.detunings(),
                        line_splitting_hz=ideal_cfg.line_splitting_hz())
        )
        result = rdj.run_rdj(oid, dephased_cfg.channels, dephased_cfg.sim, dephased_cfg.readout,
                             detunings=dephased_cfg.detunings(),
                             line_splitting_hz=dephased_cfg.line_splitting_hz())
        dephased.append(result)
        program = rdj.build_rdj_program(oid, readout_window_s=dephased_cfg.readout.window)
        visibility = readout.predicted_visibility(program, dephased_cfg.channels)
        value, _ = readout.compensate_dephasing(min(max(result.signal, 0.0), 1.0), visibility)
        compensated.append(value)

    csv_path = out_dir / "rdj.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("oracle,p0,signal,signal_compensated,classification\n")
        for result, comp in zip(dephased, compensated):
            fh.write(
                f"{result.oracle},{_fmt(result.p0)},{_fmt(result.signal)},{_fmt(comp)},{result.classification}\n"
            )
    written.append(str(csv_path))
    png_path = out_dir / "rdj_signals.png"
    rdj_figure(ideal, dephased, compensated, png_path)
    written.append(str(png_path))
    return written
