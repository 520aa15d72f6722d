"""Calibration analysis: damped-cosine fits and FFT frequency extraction.

Nutation records are fit to

    y(t) = y0 + A exp(-R t) cos(w (t - t0))

with t0 the first sample (so time shifts only move an implicit phase
convention, not w or R). The default fit pins the cosine phase to zero,
matching how calibration curves are normalized; a free-phase mode exists
for noisy data whose first sample is not a pulse start. A constrained mode
fixes y0 = A = 0.5 and fits only (R, w), the normalization used for the
nutation calibration plots.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AnalysisError(Exception):
    pass


@dataclass(frozen=True)
class DampedSineFit:
    y0: float
    amplitude: float
    decay_rate: float
    omega: float
    phase: float
    residual_rms: float
    converged: bool

    @property
    def frequency_hz(self) -> float:
        return self.omega / (2.0 * np.pi)


def fft_rabi_frequency(t, y) -> float:
    """Dominant oscillation frequency in Hz.

    Mean-subtracted rFFT with x8 zero padding; the peak above DC is refined
    by parabolic interpolation on the log magnitude (the main-lobe tip is
    parabolic in log scale, so three-point refinement lands well inside a
    padded bin). Requires uniform sampling and a peak at least 3x the median
    magnitude.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) < 16:
        raise AnalysisError("need at least 16 samples")
    steps = np.diff(t)
    dt = steps.mean()
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-6 * abs(dt):
        raise AnalysisError("sampling must be uniform")
    padded = 8 * len(y)
    spectrum = np.abs(np.fft.rfft(y - y.mean(), n=padded))
    freqs = np.fft.rfftfreq(padded, d=dt)
    k = int(np.argmax(spectrum[1:])) + 1
    floor = np.median(spectrum)
    if spectrum[k] < 3.0 * floor or spectrum[k] == 0.0:
        raise AnalysisError("no dominant frequency")
    if 1 <= k < len(spectrum) - 1 and spectrum[k - 1] > 0 and spectrum[k + 1] > 0:
        lm, l0, lp = np.log(spectrum[k - 1 : k + 2])
        denom = lm - 2.0 * l0 + lp
        shift = 0.5 * (lm - lp) / denom if denom != 0.0 else 0.0
        shift = float(np.clip(shift, -0.5, 0.5))
    else:
        shift = 0.0
    return float(freqs[k] + shift * (freqs[1] - freqs[0]))


def _model_and_jacobian(params, tau, free_phase, fixed_offset):
    """Model values and analytic Jacobian in scaled time tau (O(1))."""
    if fixed_offset:
        r, w = params[0], params[1]
        y0, a = 0.5, 0.5
        phi = params[2] if free_phase else 0.0
    else:
        y0, a, r, w = params[0], params[1], params[2], params[3]
        phi = params[4] if free_phase else 0.0
    env = np.exp(-r * tau)
    arg = w * tau - phi
    cos_t, sin_t = np.cos(arg), np.sin(arg)
    y = y0 + a * env * cos_t
    cols = []
    if not fixed_offset:
        cols.append(np.ones_like(tau))          # d/dy0
        cols.append(env * cos_t)                # d/dA
    cols.append(-a * tau * env * cos_t)         # d/dR
    cols.append(-a * tau * env * sin_t)         # d/dw
    if free_phase:
        cols.append(a * env * sin_t)            # d/dphi
    return y, np.column_stack(cols)


def fit_damped_sine(
    t,
    y,
    init: DampedSineFit | None = None,
    free_phase: bool = False,
    fix_offset_amplitude: bool = False,
    max_iter: int = 200,
    gradient_tol: float = 1e-10,
) -> DampedSineFit:
    """Least-squares fit of the damped cosine by damped Gauss-Newton.

    Seeds: w from the FFT peak, y0 from the mean, A from half the
    peak-to-peak and R from a log-envelope regression over per-cycle
    extremes, unless `init` supplies them. Time and rates are rescaled to
    O(1) internally for conditioning. Non-convergence returns the best
    parameters found with converged=False; flat input raises.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) < 8:
        raise AnalysisError("need at least 8 samples")
    if np.any(np.diff(t) <= 0):
        raise AnalysisError("t must be strictly increasing")
    if np.ptp(y) < 1e-12:
        raise AnalysisError("no oscillation detected")

    t0 = t[0]
    scale = t[-1] - t0
    tau = (t - t0) / scale

    if init is not None:
        y0_s, a_s = init.y0, init.amplitude
        r_s, w_s = init.decay_rate * scale, init.omega * scale
        phi_s = init.phase
    else:
        try:
            f_seed = fft_rabi_frequency(t, y)
        except AnalysisError as err:
            raise AnalysisError("no oscillation detected") from err
        w_s = 2.0 * np.pi * f_seed * scale
        y0_s = float(y.mean())
        a_s = float(np.ptp(y)) / 2.0
        r_s = _seed_decay(tau, y - y0_s, w_s)
        phi_s = 0.0

    if fix_offset_amplitude:
        params = [r_s, w_s] + ([phi_s] if free_phase else [])
    else:
        params = [y0_s, a_s, r_s, w_s] + ([phi_s] if free_phase else [])
    params = np.asarray(params, dtype=float)

    lam = 1e-3
    model, jac = _model_and_jacobian(params, tau, free_phase, fix_offset_amplitude)
    residual = model - y
    cost = float(residual @ residual)
    converged = False
    for _ in range(max_iter):
        grad = jac.T @ residual
        if np.max(np.abs(grad)) < gradient_tol:
            converged = True
            break
        jtj = jac.T @ jac
        try:
            step = np.linalg.solve(jtj + lam * np.diag(np.diag(jtj)) + 1e-15 * np.eye(len(params)), -grad)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        trial = params + step
        model_t, jac_t = _model_and_jacobian(trial, tau, free_phase, fix_offset_amplitude)
        residual_t = model_t - y
        cost_t = float(residual_t @ residual_t)
        if cost_t < cost:
            tiny_step = np.max(np.abs(step) / (1.0 + np.abs(params))) < 1e-12
            params, model, jac, residual, cost = trial, model_t, jac_t, residual_t, cost_t
            lam = max(lam / 10.0, 1e-12)
            if tiny_step:
                converged = True
                break
        else:
            lam *= 10.0
            if lam > 1e12:
                break

    if fix_offset_amplitude:
        y0_f, a_f = 0.5, 0.5
        r_f, w_f = params[0], params[1]
        phi_f = params[2] if free_phase else 0.0
    else:
        y0_f, a_f, r_f, w_f = params[:4]
        phi_f = params[4] if free_phase else 0.0
    # Resolve the sign ambiguity (A, w) <-> (-A, -w) etc. toward the
    # conventional A >= 0, w > 0 representation.
    if w_f < 0:
        w_f, phi_f = -w_f, -phi_f
    if a_f < 0:
        a_f, phi_f = -a_f, phi_f + np.pi
    if r_f < 0:
        # A growing envelope is unphysical; a sub-1e-6 total envelope change
        # over the record is numerical noise on an undamped curve.
        if abs(r_f) < 1e-6:
            r_f = 0.0
        else:
            r_f = abs(r_f)
            converged = False
    return DampedSineFit(
        y0=float(y0_f),
        amplitude=float(a_f),
        decay_rate=float(r_f / scale),
        omega=float(w_f / scale),
        phase=float(phi_f),
        residual_rms=float(np.sqrt(cost / len(y))),
        converged=converged,
    )


def _seed_decay(tau, centered, w_scaled) -> float:
    """Log-envelope regression over per-cycle absolute maxima."""
    if w_scaled <= 0:
        return 0.0
    period = 2.0 * np.pi / w_scaled
    n_bins = max(int(tau[-1] / period), 1)
    xs, ys = [], []
    for b in range(n_bins):
        mask = (tau >= b * period) & (tau < (b + 1) * period)
        if not np.any(mask):
            continue
        peak = np.max(np.abs(centered[mask]))
        if peak > 1e-12:
            xs.append(tau[mask][np.argmax(np.abs(centered[mask]))])
            ys.append(np.log(peak))
    if len(xs) < 2:
        return 0.0
    slope = np.polyfit(xs, ys, 1)[0]
    return float(max(-slope, 0.0))


def contrast(signals_constant, signals_balanced) -> float:
    """mean(balanced) - mean(constant) on normalized signals."""
    sc = np.asarray(signals_constant, dtype=float)
    sb = np.asarray(signals_balanced, dtype=float)
    if sc.size == 0 or sb.size == 0:
        raise ValueError("both signal lists must be non-empty")
    if np.any(sc < 0) or np.any(sc > 1) or np.any(sb < 0) or np.any(sb > 1):
        raise ValueError("signals must be normalized to [0, 1]")
    return float(sb.mean() - sc.mean())
