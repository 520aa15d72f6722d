"""Textual pulse-sequence language (.seq files).

One event per line, `#` starts a comment, blank lines are skipped:

    event    := LASER <duration>
              | WAIT <duration>
              | READOUT <duration>
              | <channel> <angle> [PHASE <radians>]
              | <channel> DUR <duration> [PHASE <radians>]
    channel  := MW1 | MW2
    angle    := PI/2 | PI | 2PI | <float>PI
    duration := <float><unit>,  unit in {ns, us, ms, s}

Symbolic angles are kept on the event (as a multiple of pi) and resolved to
durations with duration = angle / (2 pi Omega) against a channel's calibrated
Rabi frequency. Explicit durations are quantized to 1 ps internally so that
serialization round-trips without float drift; symbolic angles stay exact so
that a 2PI pulse simulates as a full Rabi cycle to machine precision.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Mapping, Optional

PS_PER_UNIT = {"ns": 1_000, "us": 1_000_000, "ms": 1_000_000_000, "s": 1_000_000_000_000}
CHANNELS = ("MW1", "MW2")

KIND_MW = "mw"
KIND_WAIT = "wait"
KIND_LASER = "laser"
KIND_READOUT = "readout"

_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_TOKEN_RE = re.compile(r"\S+")


class ParseError(Exception):
    """Syntax error with a 1-based source position."""

    def __init__(self, line: int, column: int, message: str, token: str = ""):
        self.line = line
        self.column = column
        self.message = message
        self.token = token
        super().__init__(f"line {line}, column {column}: {message}" + (f" ({token!r})" if token else ""))


@dataclass(frozen=True)
class PulseEvent:
    """One timed event. MW pulses carry either a symbolic angle (multiple of
    pi), an explicit duration in integer picoseconds, or both after
    resolution."""

    kind: str
    channel: Optional[str] = None
    duration_ps: Optional[int] = None
    angle_pi: Optional[float] = None
    phase: float = 0.0

    def duration_s(self, rabi_hz: Optional[float] = None) -> float:
        """Effective duration in seconds.

        Symbolic angles win over a stored duration (they are exact); they
        need the channel's Rabi frequency: t = angle/(2 pi Omega) = k/(2 Omega)
        for angle = k pi.
        """
        if self.angle_pi is not None:
            if rabi_hz is None:
                if self.duration_ps is None:
                    raise ValueError("symbolic event not resolved and no Rabi frequency given")
                return self.duration_ps * 1e-12
            return self.angle_pi / (2.0 * rabi_hz)
        if self.duration_ps is None:
            raise ValueError("event has neither duration nor angle")
        return self.duration_ps * 1e-12


@dataclass(frozen=True)
class PulseSequence:
    events: tuple[PulseEvent, ...] = ()
    name: str = ""

    def __len__(self):
        return len(self.events)


def _parse_number(text: str) -> Optional[float]:
    if not _NUMBER_RE.match(text):
        return None
    value = float(text)
    if not math.isfinite(value):
        return None
    return value


def _parse_duration_ps(token: str, line: int, col: int) -> int:
    unit = None
    for u in ("ns", "us", "ms", "s"):
        if token.lower().endswith(u):
            unit = u
            break
    if unit is None:
        raise ParseError(line, col, "malformed duration, expected <float><ns|us|ms|s>", token)
    value = _parse_number(token[: -len(unit)])
    if value is None:
        raise ParseError(line, col, "malformed duration", token)
    if value < 0:
        raise ParseError(line, col, "negative duration", token)
    return int(round(value * PS_PER_UNIT[unit]))


def _parse_angle_pi(token: str, line: int, col: int) -> float:
    up = token.upper()
    if up == "PI/2":
        return 0.5
    if up == "PI":
        return 1.0
    if up.endswith("PI"):
        prefix = up[:-2]
        value = _parse_number(prefix) if prefix else None
        if value is None:
            raise ParseError(line, col, "malformed angle, expected PI/2, PI, 2PI or <float>PI", token)
        if value < 0:
            raise ParseError(line, col, "negative angle", token)
        return value
    raise ParseError(line, col, "malformed angle, expected PI/2, PI, 2PI or <float>PI", token)


def _parse_phase(tokens, line: int) -> float:
    """Consume an optional trailing [PHASE <radians>] clause."""
    if not tokens:
        return 0.0
    key, col = tokens[0]
    if key.upper() != "PHASE":
        raise ParseError(line, col, "unexpected trailing token", key)
    if len(tokens) < 2:
        raise ParseError(line, col, "PHASE requires a value in radians", key)
    value_tok, value_col = tokens[1]
    value = _parse_number(value_tok)
    if value is None:
        raise ParseError(line, value_col, "malformed phase", value_tok)
    if len(tokens) > 2:
        raise ParseError(line, tokens[2][1], "unexpected trailing token", tokens[2][0])
    return value


def parse(source: str, name: str = "") -> PulseSequence:
    """Parse `.seq` text into a PulseSequence. Raises ParseError on the first
    syntax error; never raises anything else for arbitrary text input."""
    events = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        text = raw.split("#", 1)[0]
        tokens = [(m.group(0), m.start() + 1) for m in _TOKEN_RE.finditer(text)]
        if not tokens:
            continue
        head, head_col = tokens[0]
        keyword = head.upper()
        if keyword in ("LASER", "WAIT", "READOUT"):
            if len(tokens) < 2:
                raise ParseError(lineno, head_col, f"{keyword} requires a duration", head)
            if len(tokens) > 2:
                raise ParseError(lineno, tokens[2][1], "unexpected trailing token", tokens[2][0])
            ps = _parse_duration_ps(tokens[1][0], lineno, tokens[1][1])
            kind = {"LASER": KIND_LASER, "WAIT": KIND_WAIT, "READOUT": KIND_READOUT}[keyword]
            events.append(PulseEvent(kind=kind, duration_ps=ps))
        elif keyword in CHANNELS:
            if len(tokens) < 2:
                raise ParseError(lineno, head_col, f"{keyword} requires an angle or DUR clause", head)
            second, second_col = tokens[1]
            if second.upper() == "DUR":
                if len(tokens) < 3:
                    raise ParseError(lineno, second_col, "DUR requires a duration", second)
                ps = _parse_duration_ps(tokens[2][0], lineno, tokens[2][1])
                phase = _parse_phase(tokens[3:], lineno)
                events.append(PulseEvent(kind=KIND_MW, channel=keyword, duration_ps=ps, phase=phase))
            else:
                angle = _parse_angle_pi(second, lineno, second_col)
                phase = _parse_phase(tokens[2:], lineno)
                events.append(PulseEvent(kind=KIND_MW, channel=keyword, angle_pi=angle, phase=phase))
        elif keyword.startswith("MW"):
            raise ParseError(lineno, head_col, "unknown channel", head)
        else:
            raise ParseError(lineno, head_col, "unknown keyword", head)
    return PulseSequence(events=tuple(events), name=name)


def resolve_durations(seq: PulseSequence, rabi_by_channel: Mapping[str, float]) -> PulseSequence:
    """Fill duration_ps for symbolic MW events from the calibrated Rabi
    frequencies (rounded to the 1 ps grid; the angle stays authoritative)."""
    out = []
    for ev in seq.events:
        if ev.kind == KIND_MW and ev.angle_pi is not None and ev.duration_ps is None:
            rabi = rabi_by_channel[ev.channel]
            out.append(replace(ev, duration_ps=int(round(ev.angle_pi / (2.0 * rabi) * 1e12))))
        else:
            out.append(ev)
    return PulseSequence(events=tuple(out), name=seq.name)


def validate(
    seq: PulseSequence,
    rabi_by_channel: Mapping[str, float],
    time_step: float = 1e-9,
) -> list[str]:
    """Check a sequence against the calibrations; returns a list of
    violations (empty means ok). Never mutates.

    Checks: known channels, symbolic-angle/duration consistency within one
    sample step, and READOUT placement (immediately after a LASER or at the
    end of the sequence, where the detection laser is implied). MW pulses
    cannot overlap LASER periods by construction since events are strictly
    sequential.
    """
    violations = []
    for i, ev in enumerate(seq.events):
        if ev.kind == KIND_MW:
            if ev.channel not in rabi_by_channel:
                violations.append(f"event {i}: unknown channel {ev.channel!r}")
                continue
            if ev.angle_pi is not None and ev.duration_ps is not None:
                expected = ev.angle_pi / (2.0 * rabi_by_channel[ev.channel])
                actual = ev.duration_ps * 1e-12
                if abs(actual - expected) > time_step:
                    violations.append(
                        f"event {i}: duration {actual*1e9:.3f} ns inconsistent with "
                        f"{ev.angle_pi:g} pi at the calibrated Rabi frequency "
                        f"(expected {expected*1e9:.1f} ns)"
                    )
        elif ev.kind == KIND_READOUT:
            at_end = i == len(seq.events) - 1
            after_laser = i > 0 and seq.events[i - 1].kind == KIND_LASER
            if not (at_end or after_laser):
                violations.append(f"event {i}: READOUT must follow a LASER or end the sequence")
    return violations


def _mergeable(a: PulseEvent, b: PulseEvent) -> bool:
    if a.kind != KIND_MW or b.kind != KIND_MW:
        return False
    if a.channel != b.channel or a.phase != b.phase:
        return False
    # Merge symbolic with symbolic or explicit with explicit; a mixed pair
    # has no faithful combined representation, so it is left alone.
    return (a.angle_pi is None) == (b.angle_pi is None)


def merge_adjacent(seq: PulseSequence) -> PulseSequence:
    """Combine consecutive same-channel, same-phase MW pulses into one.

    Idempotent; preserves the total microwave duration per channel and, for
    an ideal simulation, the final state (rotations about the same axis
    compose by angle addition).
    """
    merged: list[PulseEvent] = []
    for ev in seq.events:
        if merged and _mergeable(merged[-1], ev):
            prev = merged[-1]
            angle = None if prev.angle_pi is None else prev.angle_pi + ev.angle_pi
            dur = (
                prev.duration_ps + ev.duration_ps
                if prev.duration_ps is not None and ev.duration_ps is not None
                else None
            )
            merged[-1] = replace(prev, angle_pi=angle, duration_ps=dur)
        else:
            merged.append(ev)
    return PulseSequence(events=tuple(merged), name=seq.name)


def _format_duration(ps: int) -> str:
    if ps % PS_PER_UNIT["s"] == 0:
        return f"{ps // PS_PER_UNIT['s']}s"
    if ps % PS_PER_UNIT["ms"] == 0:
        return f"{ps // PS_PER_UNIT['ms']}ms"
    if ps % PS_PER_UNIT["us"] == 0:
        return f"{ps // PS_PER_UNIT['us']}us"
    if ps % PS_PER_UNIT["ns"] == 0:
        return f"{ps // PS_PER_UNIT['ns']}ns"
    return f"{repr(ps / 1000.0)}ns"


def _format_angle(angle_pi: float) -> str:
    if angle_pi == 0.5:
        return "PI/2"
    if angle_pi == 1.0:
        return "PI"
    if angle_pi == int(angle_pi):
        return f"{int(angle_pi)}PI"
    return f"{repr(angle_pi)}PI"


def serialize(seq: PulseSequence) -> str:
    """Render back to `.seq` text; parse(serialize(s)) == s for any parsed s.

    Symbolic MW events are re-emitted symbolically (a resolved duration is
    derivable and therefore dropped); explicit ones via DUR at ns precision.
    """
    lines = []
    for ev in seq.events:
        if ev.kind == KIND_LASER:
            lines.append(f"LASER {_format_duration(ev.duration_ps)}")
        elif ev.kind == KIND_WAIT:
            lines.append(f"WAIT {_format_duration(ev.duration_ps)}")
        elif ev.kind == KIND_READOUT:
            lines.append(f"READOUT {_format_duration(ev.duration_ps)}")
        else:
            if ev.angle_pi is not None:
                body = f"{ev.channel} {_format_angle(ev.angle_pi)}"
            else:
                body = f"{ev.channel} DUR {_format_duration(ev.duration_ps)}"
            if ev.phase != 0.0:
                body += f" PHASE {repr(ev.phase)}"
            lines.append(body)
    return "\n".join(lines) + ("\n" if lines else "")
