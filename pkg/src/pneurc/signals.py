"""Excitation and reference signal generators.

Every generator samples t = 0, dt, ..., duration - dt (endpoint exclusive)
on a uniform grid and returns a unit-tagged :class:`TimeSeries`. The default
sample time matches the 200 Hz refresh rate used by the control harness.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDataError, InvalidSpecError

DEFAULT_DT = 1.0 / 200.0

SIGNAL_KINDS = ("sine", "multisine", "chirp-linear", "chirp-quadratic")


def format_float(x) -> str:
    """Shortest decimal string that round-trips the value exactly.

    Coerces numpy scalars to plain Python floats first so the output is
    the bare number (numpy's repr wraps the value in its type name).
    """
    return repr(float(x))

# canonical unit spellings for the CSV header round trip
_UNIT_TOKENS = {"deg": "deg", "kpa": "kPa", "s": "s", "v": "V", "na": ""}


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar signal with an engineering unit tag."""

    values: np.ndarray
    dt: float
    unit: str = "deg"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise InvalidSpecError("TimeSeries values must be a non-empty 1-D array")
        if not (self.dt > 0.0):
            raise InvalidSpecError(f"dt must be positive, got {self.dt!r}")
        if not np.all(np.isfinite(vals)):
            raise InvalidSpecError("TimeSeries values must all be finite")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    @property
    def duration(self) -> float:
        return self.values.size * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size, dtype=float) * self.dt

    def downsample(self, factor: int) -> "TimeSeries":
        """Keep every ``factor``-th sample (pointwise, no filtering)."""
        if not isinstance(factor, int) or factor < 1:
            raise InvalidSpecError(f"downsample factor must be a positive int, got {factor!r}")
        return TimeSeries(self.values[::factor].copy(), self.dt * factor, self.unit)

    def to_csv(self, path) -> None:
        """Write a two-column CSV (t, value) with a one-line unit header."""
        unit_token = self.unit.lower() if self.unit else "na"
        lines = [f"t_s,value_{unit_token}"]
        t = self.times
        for k in range(self.values.size):
            lines.append(f"{format_float(t[k])},{format_float(self.values[k])}")
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        with open(path, "r", encoding="ascii") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        if not lines or not lines[0].startswith("t_s,value_"):
            raise InvalidDataError(f"{path}: missing 't_s,value_<unit>' header")
        unit_token = lines[0].split("value_", 1)[1]
        unit = _UNIT_TOKENS.get(unit_token, unit_token)
        t = np.empty(len(lines) - 1)
        v = np.empty(len(lines) - 1)
        for i, ln in enumerate(lines[1:]):
            parts = ln.split(",")
            if len(parts) != 2:
                raise InvalidDataError(f"{path}:{i + 2}: expected 2 columns, got {len(parts)}")
            try:
                t[i] = float(parts[0])
                v[i] = float(parts[1])
            except ValueError as exc:
                raise InvalidDataError(f"{path}:{i + 2}: {exc}") from exc
        if len(t) < 2:
            raise InvalidDataError(f"{path}: need at least 2 samples to recover dt")
        return cls(v, float(t[1] - t[0]), unit)


def _time_grid(duration: float, dt: float) -> np.ndarray:
    if not (dt > 0.0):
        raise InvalidSpecError(f"dt must be positive, got {dt!r}")
    if not (duration > 0.0):
        raise InvalidSpecError(f"duration must be positive, got {duration!r}")
    n = int(round(duration / dt))
    if n < 1:
        raise InvalidSpecError(f"duration {duration} too short for dt {dt}")
    return np.arange(n, dtype=float) * dt


def _check_amplitude(amplitude: float) -> None:
    if amplitude < 0.0:
        raise InvalidSpecError(f"amplitude must be non-negative, got {amplitude!r}")


def gen_sine(freq: float, amplitude: float, offset: float, duration: float,
             dt: float = DEFAULT_DT, unit: str = "deg") -> TimeSeries:
    """Single sinusoid ``amplitude * sin(2 pi f t) + offset``."""
    if not (freq > 0.0):
        raise InvalidSpecError(f"freq must be positive, got {freq!r}")
    _check_amplitude(amplitude)
    t = _time_grid(duration, dt)
    return TimeSeries(amplitude * np.sin(2.0 * np.pi * freq * t) + offset, dt, unit)


def gen_multisine(freqs, amplitude: float, offset: float, phase: float,
                  duration: float, dt: float = DEFAULT_DT, unit: str = "deg") -> TimeSeries:
    """Sum of sinusoids sharing one amplitude and one phase.

    values[k] = amplitude * sum_i sin(2 pi f_i k dt + phase) + offset
    """
    freqs = np.asarray(freqs, dtype=float)
    if freqs.ndim != 1 or freqs.size == 0:
        raise InvalidSpecError("freqs must be a non-empty 1-D sequence")
    if np.any(freqs <= 0.0):
        raise InvalidSpecError("all multisine frequencies must be positive")
    _check_amplitude(amplitude)
    t = _time_grid(duration, dt)
    acc = np.zeros_like(t)
    for f in freqs:
        acc += np.sin(2.0 * np.pi * f * t + phase)
    return TimeSeries(amplitude * acc + offset, dt, unit)


def gen_chirp_quadratic(amplitude: float, offset: float, c2: float, c1: float,
                        phase: float, duration: float, dt: float = DEFAULT_DT,
                        unit: str = "deg") -> TimeSeries:
    """Quadratic-phase chirp ``amplitude * sin(pi t (c2 t + c1) + phase) + offset``.

    The instantaneous frequency is (2 c2 t + c1) / 2, so c2 = 0 reduces to a
    plain sinusoid of frequency c1 / 2.
    """
    _check_amplitude(amplitude)
    if c1 < 0.0 or c2 < 0.0:
        raise InvalidSpecError("chirp coefficients c1, c2 must be non-negative")
    if c1 == 0.0 and c2 == 0.0:
        raise InvalidSpecError("chirp must sweep: c1 and c2 cannot both be zero")
    t = _time_grid(duration, dt)
    return TimeSeries(amplitude * np.sin(np.pi * t * (c2 * t + c1) + phase) + offset, dt, unit)


def gen_sweep_frequency(f_start: float, f_end: float, amplitude: float, offset: float,
                        duration: float, dt: float = DEFAULT_DT, unit: str = "kPa") -> TimeSeries:
    """Linear frequency sweep from f_start to f_end across the duration.

    The initial phase is fixed at -pi/2 so values[0] = offset - amplitude,
    i.e. the sweep starts at its minimum. With f_start == f_end this is a
    plain (phase-shifted) sine.
    """
    if not (f_start > 0.0) or not (f_end > 0.0):
        raise InvalidSpecError("sweep frequencies must be positive")
    _check_amplitude(amplitude)
    t = _time_grid(duration, dt)
    T = t.size * dt
    inst_phase = 2.0 * np.pi * (f_start * t + (f_end - f_start) * t * t / (2.0 * T)) - 0.5 * np.pi
    return TimeSeries(amplitude * np.sin(inst_phase) + offset, dt, unit)


@dataclass(frozen=True)
class SignalSpec:
    """Declarative description of a generated signal, used by configs.

    ``frequencies`` is interpreted per kind: [f] for sine, [f1..fn] for
    multisine, [f_start, f_end] for chirp-linear, and the phase-polynomial
    coefficients [c1, c2] for chirp-quadratic.
    """

    kind: str
    amplitude: float
    offset: float
    frequencies: tuple
    duration: float
    phase: float = 0.0
    unit: str = "deg"

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise InvalidSpecError(f"unknown signal kind {self.kind!r}, expected one of {SIGNAL_KINDS}")
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        if self.amplitude < 0.0:
            raise InvalidSpecError("amplitude must be non-negative")
        if not (self.duration > 0.0):
            raise InvalidSpecError("duration must be positive")
        n_freq = len(self.frequencies)
        if self.kind == "sine" and n_freq != 1:
            raise InvalidSpecError("sine takes exactly one frequency")
        if self.kind == "multisine" and n_freq == 0:
            raise InvalidSpecError("multisine needs at least one frequency")
        if self.kind in ("chirp-linear", "chirp-quadratic") and n_freq != 2:
            raise InvalidSpecError(f"{self.kind} takes exactly two entries in frequencies")
        if self.kind in ("sine", "multisine", "chirp-linear") and any(
                f <= 0.0 for f in self.frequencies):
            raise InvalidSpecError(f"{self.kind} frequencies must be positive")

    def render(self, dt: float = DEFAULT_DT) -> TimeSeries:
        if self.kind == "sine" and self.phase == 0.0:
            return gen_sine(self.frequencies[0], self.amplitude, self.offset,
                            self.duration, dt, self.unit)
        if self.kind in ("sine", "multisine"):
            return gen_multisine(self.frequencies, self.amplitude, self.offset,
                                 self.phase, self.duration, dt, self.unit)
        if self.kind == "chirp-linear":
            return gen_sweep_frequency(self.frequencies[0], self.frequencies[1],
                                       self.amplitude, self.offset, self.duration, dt, self.unit)
        c1, c2 = self.frequencies
        return gen_chirp_quadratic(self.amplitude, self.offset, c2, c1,
                                   self.phase, self.duration, dt, self.unit)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "offset": self.offset,
            "frequencies": list(self.frequencies),
            "duration": self.duration,
            "phase": self.phase,
            "unit": self.unit,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SignalSpec":
        if not isinstance(d, dict):
            raise InvalidSpecError(f"signal spec must be a mapping, got {type(d).__name__}")
        known = {"kind", "amplitude", "offset", "frequencies", "duration", "phase", "unit"}
        unknown = set(d) - known
        if unknown:
            raise InvalidSpecError(f"unknown signal spec fields: {sorted(unknown)}")
        missing = {"kind", "amplitude", "offset", "frequencies", "duration"} - set(d)
        if missing:
            raise InvalidSpecError(f"signal spec missing fields: {sorted(missing)}")
        return cls(kind=d["kind"], amplitude=d["amplitude"], offset=d["offset"],
                   frequencies=tuple(d["frequencies"]), duration=d["duration"],
                   phase=d.get("phase", 0.0), unit=d.get("unit", "deg"))
