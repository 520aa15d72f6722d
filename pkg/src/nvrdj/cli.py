"""Command-line entry point.

Subcommands::

    config    validate and print the run configuration (or the defaults)
    nutation  simulate a transient-nutation curve, fit it, emit CSV + JSON
    rdj       run the refined Deutsch-Jozsa protocol oracles
    run       execute a .seq pulse program and emit the final state
    fit       fit a damped cosine to a t_s,signal CSV
    fft       extract the dominant frequency from a t_s,signal CSV
    report    render the calibration and protocol figures next to the data

All data goes to files or stdout; diagnostics go to stderr. Given the same
configuration and seed, outputs are byte-identical across runs.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, config as config_mod, pulse_dsl, pulse_engine, rdj, readout
from .config import ConfigError, RunConfig, default_config, load_config, with_mode
from .pulse_dsl import ParseError
from .pulse_engine import SequenceError


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _load(args) -> RunConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return default_config()


def _fit_payload(fit: analysis.DampedSineFit, fft_hz: float) -> dict:
    return {
        "y0": fit.y0,
        "amplitude": fit.amplitude,
        "decay_rate_per_s": fit.decay_rate,
        "omega_rad_per_s": fit.omega,
        "frequency_hz": fit.frequency_hz,
        "fft_frequency_hz": fft_hz,
        "residual_rms": fit.residual_rms,
        "converged": fit.converged,
    }


def cmd_config(args) -> int:
    if args.print_defaults:
        print(config_mod.dump_defaults())
        return 0
    cfg = _load(args)
    print(json.dumps(config_mod.to_dict(cfg), indent=2, sort_keys=True))
    return 0


def cmd_nutation(args) -> int:
    cfg = _load(args)
    channel = args.channel.upper()
    if channel not in cfg.channels:
        raise ConfigError(f"invalid channel {args.channel!r}, expected MW1 or MW2")
    cal = cfg.channels[channel]
    curve = pulse_engine.nutation_curve(cal, args.t_max, args.points, cfg.sim)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"nutation_{channel.lower()}.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("t_s,signal\n")
        for t, s in curve:
            fh.write(f"{_fmt(t)},{_fmt(s)}\n")
    fft_hz = analysis.fft_rabi_frequency(curve[:, 0], curve[:, 1])
    fit = analysis.fit_damped_sine(curve[:, 0], curve[:, 1])
    payload = _fit_payload(fit, fft_hz)
    payload["pi_pulse_s"] = float(curve[np.argmin(curve[:, 1]), 0])
    fit_path = out_dir / f"nutation_{channel.lower()}_fit.json"
    fit_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(json.dumps(payload, sort_keys=True))
    return 0


def _run_oracles(cfg: RunConfig, oracles, mode: str, compensate: bool, seed: int):
    eff = with_mode(cfg, mode)
    detunings = eff.detunings()
    rows = []
    for oid in oracles:
        result = rdj.run_rdj(
            oid,
            eff.channels,
            eff.sim,
            eff.readout,
            detunings=detunings,
            shots=(mode == "shots"),
            seed=seed + oid,
            line_splitting_hz=eff.line_splitting_hz(),
        )
        compensated = None
        if compensate:
            program = rdj.build_rdj_program(oid, readout_window_s=eff.readout.window)
            visibility = readout.predicted_visibility(program, eff.channels)
            compensated, _ = readout.compensate_dephasing(
                min(max(result.signal, 0.0), 1.0), visibility
            )
        rows.append((result, compensated))
    return rows


def cmd_rdj(args) -> int:
    cfg = _load(args)
    mode = "ideal" if args.ideal else "shots" if args.shots else "dephased"
    oracles = list(rdj.ORACLE_IDS) if args.oracle == "all" else [int(args.oracle)]
    seed = cfg.seed if args.seed is None else args.seed
    rows = _run_oracles(cfg, oracles, mode, args.compensate, seed)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "rdj.csv", "w", encoding="utf-8") as fh:
        fh.write("oracle,p0,signal,signal_compensated,classification\n")
        for result, compensated in rows:
            comp = _fmt(compensated) if compensated is not None else ""
            fh.write(
                f"{result.oracle},{_fmt(result.p0)},{_fmt(result.signal)},{comp},{result.classification}\n"
            )
    if mode == "shots":
        with open(out_dir / "rdj_shots.csv", "w", encoding="utf-8") as fh:
            fh.write("oracle,seed,counts,normalized\n")
            for result, _ in rows:
                fh.write(
                    f"{result.oracle},{seed + result.oracle},{result.raw_counts},{_fmt(result.signal)}\n"
                )
    for result, compensated in rows:
        record = {
            "oracle": result.oracle,
            "p0": result.p0,
            "signal": result.signal,
            "classification": result.classification,
        }
        if compensated is not None:
            record["signal_compensated"] = compensated
        if result.raw_counts is not None:
            record["raw_counts"] = result.raw_counts
        print(json.dumps(record, sort_keys=True))
    return 0


def cmd_run(args) -> int:
    cfg = _load(args)
    source = Path(args.sequence).read_text(encoding="utf-8")
    seq = pulse_dsl.parse(source, name=Path(args.sequence).stem)
    rabi = {label: cal.rabi_hz for label, cal in cfg.channels.items()}
    seq = pulse_dsl.resolve_durations(seq, rabi)
    violations = pulse_dsl.validate(seq, rabi, time_step=cfg.sim.time_step)
    if violations:
        for v in violations:
            print(f"invalid sequence: {v}", file=sys.stderr)
        return 2
    rho0 = readout.initialize_state(cfg.readout)
    rho = pulse_engine.run_sequence(
        rho0,
        seq,
        cfg.channels,
        cfg.sim,
        detunings=cfg.detunings(),
        init_fidelity=cfg.readout.init_fidelity,
        line_splitting_hz=cfg.line_splitting_hz(),
    )
    _, signal = readout.fluorescence_signal(rho, cfg.readout)
    payload = {
        "rho_real": [[float(x) for x in row] for row in rho.real],
        "rho_imag": [[float(x) for x in row] for row in rho.imag],
        "populations": {
            "+1": float(rho[0, 0].real),
            "0": float(rho[1, 1].real),
            "-1": float(rho[2, 2].real),
        },
        "signal": signal,
    }
    print(json.dumps(payload, sort_keys=True))
    return 0


def _read_curve_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def cmd_fit(args) -> int:
    t, y = _read_curve_csv(args.input)
    fit = analysis.fit_damped_sine(
        t, y, free_phase=args.free_phase, fix_offset_amplitude=args.fix_offset_amplitude
    )
    fft_hz = analysis.fft_rabi_frequency(t, y)
    print(json.dumps(_fit_payload(fit, fft_hz), sort_keys=True))
    return 0


def cmd_fft(args) -> int:
    t, y = _read_curve_csv(args.input)
    print(json.dumps({"frequency_hz": analysis.fft_rabi_frequency(t, y)}, sort_keys=True))
    return 0


def cmd_report(args) -> int:
    from . import report

    cfg = _load(args)
    paths = report.render_report(cfg, Path(args.out_dir))
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nvrdj", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("config", help="validate and print the configuration")
    p.add_argument("--config", help="configuration JSON file")
    p.add_argument("--print-defaults", action="store_true", help="ignore --config and print the built-in defaults")
    p.set_defaults(func=cmd_config)

    p = sub.add_parser("nutation", help="simulate and fit a nutation curve")
    p.add_argument("--config")
    p.add_argument("--channel", required=True, help="MW1 or MW2")
    p.add_argument("--t-max", type=float, default=1e-6, dest="t_max")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out-dir", default=".", dest="out_dir")
    p.set_defaults(func=cmd_nutation)

    p = sub.add_parser("rdj", help="run the refined Deutsch-Jozsa oracles")
    p.add_argument("--config")
    p.add_argument("--oracle", required=True, choices=["1", "2", "3", "4", "all"])
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--ideal", action="store_true", help="no dephasing, perfect init")
    mode.add_argument("--dephased", action="store_true", help="calibrated dephasing (default)")
    mode.add_argument("--shots", action="store_true", help="dephased plus photon shot sampling")
    p.add_argument("--compensate", action="store_true", help="divide out the predicted coherence envelope")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=".", dest="out_dir")
    p.set_defaults(func=cmd_rdj)

    p = sub.add_parser("run", help="execute a .seq pulse program")
    p.add_argument("--config")
    p.add_argument("--sequence", required=True, help=".seq file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fit", help="fit a damped cosine to t_s,signal CSV data")
    p.add_argument("--input", required=True)
    p.add_argument("--free-phase", action="store_true", dest="free_phase")
    p.add_argument("--fix-offset-amplitude", action="store_true", dest="fix_offset_amplitude")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("fft", help="dominant frequency of t_s,signal CSV data")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_fft)

    p = sub.add_parser("report", help="render calibration and protocol figures")
    p.add_argument("--config")
    p.add_argument("--out-dir", default="reports", dest="out_dir")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return 2
    except (ConfigError, SequenceError, analysis.AnalysisError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
