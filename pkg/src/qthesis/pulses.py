"""AWG pulse-sequence compiler.

A sequence has ``steps`` rows of ``points`` samples for each of four
channels, and each channel owns two marker rows. Pulses are inserted
additively into a row; SSM pulses use the absolute sample index within the
step as time, so the carrier phase is referenced to the start of the step.

Binary export (QSEQ): ``b"QSEQ"``, version (u16 LE), steps (u32 LE),
points (u32 LE), then the twelve ports ``CH1, CH1M1, CH1M2, ..., CH4M2`` as
row-major little-endian float32.
"""
from __future__ import annotations

import copy
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"QSEQ"
VERSION = 1
HEADER = struct.Struct("<4sHII")
TARGETS = ("channel", "marker1", "marker2")
SWEEP_TYPES = ("none", "duration", "amplitude", "start_time", "phase")
PORTS = tuple(f"CH{c}{suffix}" for c in range(1, 5) for suffix in ("", "M1", "M2"))
DEFAULT_POINTS = 8192


class PulseBoundsError(ValueError):
    """Pulse does not fit inside the step or violates the DAC range."""


class SequenceFormatError(ValueError):
    pass


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


@dataclass
class Pulse:
    """Rectangular or single-sideband pulse.

    ``duration`` and ``start_time`` are in samples, ``ssm_freq`` in cycles
    per sample (0 gives a square pulse) and ``phase`` in radians.
    """

    duration: int
    start_time: int = 0
    amplitude: float = 1.0
    ssm_freq: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        self.validate()

    def validate(self, step_points: int | None = None):
        if int(self.duration) != self.duration or self.duration < 0:
            raise PulseBoundsError(f"duration must be a non-negative integer, got {self.duration!r}")
        if int(self.start_time) != self.start_time or self.start_time < 0:
            raise PulseBoundsError(f"start_time must be a non-negative integer, got {self.start_time!r}")
        if not -1.0 <= self.amplitude <= 1.0:
            raise PulseBoundsError(f"amplitude {self.amplitude!r} outside the DAC range [-1, 1]")
        if step_points is not None and self.start_time + self.duration > step_points:
            raise PulseBoundsError(f"pulse [{self.start_time}, {self.start_time + self.duration}) "
                                   f"exceeds step length {step_points}")

    def make(self, step_points: int) -> np.ndarray:
        return pulse_make(self, step_points)

    def copy(self) -> "Pulse":
        return pulse_copy(self)

    def describe(self) -> str:
        return pulse_describe(self)

    def __str__(self):
        return self.describe()


def pulse_make(p: Pulse, step_points: int) -> np.ndarray:
    """Samples of ``p`` over one step of ``step_points`` samples."""
    p.validate(step_points)
    out = np.zeros(step_points)
    start, stop = int(p.start_time), int(p.start_time + p.duration)
    if p.ssm_freq == 0:
        out[start:stop] = p.amplitude
    else:
        t = np.arange(start, stop)
        out[start:stop] = p.amplitude * np.cos(2 * np.pi * p.ssm_freq * t + p.phase)
    return out


def pulse_copy(p: Pulse) -> Pulse:
    return copy.deepcopy(p)


def pulse_describe(p: Pulse) -> str:
    """One-line descriptor; square pulses show no SSM entry."""
    parts = [f"duration={p.duration}", f"start_time={p.start_time}", f"amplitude={p.amplitude:g}"]
    if p.ssm_freq != 0:
        parts.append(f"ssm_freq={p.ssm_freq:g}")
    parts.append(f"phase={p.phase:g}")
    kind = "SSM" if p.ssm_freq != 0 else "square"
    return f"Pulse[{kind}]({', '.join(parts)})"


@dataclass(frozen=True)
class SweepSpec:
    sweep_type: str = "none"
    start: float = 0.0
    step: float = 0.0

    def __post_init__(self):
        if self.sweep_type not in SWEEP_TYPES:
            raise ValueError(f"sweep_type must be one of {SWEEP_TYPES}")

    def pulse_at(self, base: Pulse, k: int) -> Pulse:
        p = pulse_copy(base)
        if self.sweep_type == "none":
            return p
        value = self.start + k * self.step
        if self.sweep_type in ("duration", "start_time"):
            if abs(value - round(value)) > 1e-9:
                raise PulseBoundsError(f"{self.sweep_type} sweep produced a non-integer value {value!r}")
            value = int(round(value))
            if value < 0:
                raise PulseBoundsError(f"{self.sweep_type} sweep produced a negative value at step {k}")
        setattr(p, self.sweep_type, value)
        p.validate()
        return p


@dataclass(eq=False)
class Sequence:
    """Four channels, each ``[channel, marker1, marker2]`` matrices of shape ``(steps, points)``."""

    steps: int
    points: int = DEFAULT_POINTS
    channel_list: list = field(default=None)

    def __post_init__(self):
        if not is_power_of_two(self.points):
            raise SequenceFormatError(f"points must be a power of 2 to fit AWG memory, got {self.points}")
        if self.steps < 1:
            raise SequenceFormatError("steps must be at least 1")
        if self.channel_list is None:
            self.channel_list = [[np.zeros((self.steps, self.points)) for _ in TARGETS] for _ in range(4)]

    def matrix(self, channel: int, target: str = "channel") -> np.ndarray:
        _check_address(channel, target)
        return self.channel_list[channel - 1][TARGETS.index(target)]

    def ports(self):
        """``(name, matrix)`` in export order."""
        for c in range(4):
            for t in range(3):
                yield PORTS[3 * c + t], self.channel_list[c][t]

    def add_sweep(self, channel: int, target: str, base: Pulse, sweep: SweepSpec | None = None) -> "Sequence":
        return add_sweep(self, channel, target, base, sweep)


def _check_address(channel: int, target: str):
    if channel not in (1, 2, 3, 4):
        raise ValueError(f"channel must be 1..4, got {channel!r}")
    if target not in TARGETS:
        raise ValueError(f"target must be one of {TARGETS}, got {target!r}")


def add_sweep(seq: Sequence, channel: int, target: str, base: Pulse, sweep: SweepSpec | None = None) -> Sequence:
    """Add ``base`` (with the swept field set to ``start + k * step``) to every step ``k``.

    Channel rows are clipped to [-1, 1] with a warning; marker rows become 0/1
    (any positive sum sets the marker). Markers of channels 2 and 4 are
    stored but flagged, since the instrument ignores them.
    """
    _check_address(channel, target)
    sweep = sweep or SweepSpec()
    pulses = [sweep.pulse_at(base, k) for k in range(seq.steps)]   # validate every step first
    for p in pulses:
        p.validate(seq.points)
    if target != "channel" and channel in (2, 4):
        warnings.warn(f"CH{channel} markers are redundant on the instrument and will be ignored there",
                      UserWarning, stacklevel=2)
    m = seq.matrix(channel, target)
    for k, p in enumerate(pulses):
        row = m[k] + pulse_make(p, seq.points)
        if target == "channel":
            if np.any(np.abs(row) > 1.0):
                warnings.warn(f"CH{channel} step {k}: summed amplitude exceeds 1 and was clipped",
                              UserWarning, stacklevel=2)
                row = np.clip(row, -1.0, 1.0)
        else:
            row = (row > 0).astype(float)
        m[k] = row
    return seq


@dataclass(frozen=True)
class RabiConfig:
    steps: int = 51
    points: int = DEFAULT_POINTS
    qubit_ch: tuple = (1, 2)
    cavity_ch: int = 3
    trigger_marker: tuple = (1, "marker1")
    ssm_freq: float = 0.0625
    durations: dict = field(default_factory=lambda: {"start": 0, "step": 10})
    qubit_start: int = 100
    qubit_amplitude: float = 1.0
    cavity_pulse: dict = field(default_factory=lambda: {"start_time": 1000, "duration": 4000, "amplitude": 1.0})
    trigger_pulse: dict = field(default_factory=lambda: {"start_time": 1000, "duration": 100, "amplitude": 1.0})

    @classmethod
    def from_dict(cls, d: dict) -> "RabiConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown Rabi config keys: {sorted(unknown)}")
        d = dict(d)
        for key in ("qubit_ch", "trigger_marker"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def compile_rabi(config: RabiConfig | dict | None = None) -> Sequence:
    """Rabi sequence: duration-swept SSM drive on an I/Q pair, fixed cavity tone and trigger.

    The Q channel carries the same pulse with an extra ``pi/2`` phase.
    """
    cfg = config if isinstance(config, RabiConfig) else RabiConfig.from_dict(config or {})
    if not is_power_of_two(cfg.points):
        raise SequenceFormatError(f"points must be a power of 2, got {cfg.points}")
    seq = Sequence(cfg.steps, cfg.points)
    sweep = SweepSpec("duration", cfg.durations.get("start", 0), cfg.durations.get("step", 10))
    ch_i, ch_q = cfg.qubit_ch
    base = Pulse(duration=int(sweep.start), start_time=cfg.qubit_start, amplitude=cfg.qubit_amplitude,
                 ssm_freq=cfg.ssm_freq, phase=0.0)
    add_sweep(seq, ch_i, "channel", base, sweep)
    q = pulse_copy(base)
    q.phase = np.pi / 2
    add_sweep(seq, ch_q, "channel", q, sweep)
    add_sweep(seq, cfg.cavity_ch, "channel", Pulse(**cfg.cavity_pulse))
    t_ch, t_target = cfg.trigger_marker
    add_sweep(seq, int(t_ch), t_target, Pulse(**cfg.trigger_pulse))
    return seq


def _fmt(v: float) -> str:
    return "%.17g" % v


def export_sequence(seq: Sequence, fmt: str, path) -> list:
    """Write ``seq`` as QSEQ binary (``fmt="bin"``) or one CSV per port; returns written paths."""
    path = Path(path)
    try:
        if fmt == "bin":
            path.write_bytes(sequence_bytes(seq))
            return [path]
        if fmt == "csv":
            out = []
            stem = path.with_suffix("") if path.suffix else path
            for name, m in seq.ports():
                p = stem.parent / f"{stem.name}_{name}.csv"
                rows = (",".join(_fmt(v) for v in row.astype(np.float32).astype(float)) for row in m)
                p.write_text("\n".join(rows) + "\n")
                out.append(p)
            return out
    except OSError as exc:
        raise OSError(f"cannot write sequence to {path}: {exc}") from exc
    raise ValueError("format must be 'bin' or 'csv'")


def sequence_bytes(seq: Sequence) -> bytes:
    parts = [HEADER.pack(MAGIC, VERSION, seq.steps, seq.points)]
    parts += [np.ascontiguousarray(m, dtype="<f4").tobytes() for _, m in seq.ports()]
    return b"".join(parts)


def import_sequence(path) -> Sequence:
    data = Path(path).read_bytes()
    return sequence_from_bytes(data)


def sequence_from_bytes(data: bytes) -> Sequence:
    if len(data) < HEADER.size:
        raise SequenceFormatError("file too short for a QSEQ header")
    magic, version, steps, points = HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION:
        raise SequenceFormatError("not a version-1 QSEQ file")
    n = steps * points
    if len(data) != HEADER.size + 12 * 4 * n:
        raise SequenceFormatError("QSEQ payload size does not match header")
    arr = np.frombuffer(data, dtype="<f4", offset=HEADER.size).astype(float).reshape(12, steps, points)
    cl = [[arr[3 * c + t].copy() for t in range(3)] for c in range(4)]
    return Sequence(steps, points, cl)


def qseq_size(steps: int, points: int) -> int:
    return HEADER.size + 12 * 4 * steps * points
