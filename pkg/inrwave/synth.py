"""
Deterministic synthetic three-phase captures for every event class:
steady state, sub-cycle damped oscillation, sustained single-mode
oscillation, dual-mode (sideband) modulation, and step sag.

Amplitudes are per-unit. Channel B/C fundamentals lag/lead A by 120 degrees
and harmonic k inherits k times that shift. A mixed capture carries the
voltage phases followed by the current phases; currents lag their voltage
by current_lag_rad. Noise is Gaussian with std noise_std, relative to each
channel's fundamental amplitude unless noise_relative is False.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from .capture_io import save_capture
from .errors import InvalidInputError
from .training.rng import SeededRNG
from .waveform import (
    AMPERES,
    DEFAULT_CAPTURE_CYCLES,
    DEFAULT_SAMPLES_PER_CYCLE,
    DEFAULT_SYSTEM_FREQ_HZ,
    VOLTS,
    SamplingSpec,
    WaveformSet,
)

THREE_PHASE_OFFSETS = (0.0, -2.0 * math.pi / 3.0, 2.0 * math.pi / 3.0)
SPEC_SUFFIX = ".spec.json"


class EventClass(str, Enum):
    STEADY = "steady"
    SUBCYCLE_OSCILLATION = "subcycle_oscillation"
    SINGLE_MODE = "single_mode"
    DUAL_MODE_MODULATED = "dual_mode_modulated"
    STEP_SAG = "step_sag"


class Quantity(str, Enum):
    VOLTAGE = "voltage"
    CURRENT = "current"
    MIXED = "mixed"

    def parts(self) -> tuple[Quantity, ...]:
        if self is Quantity.MIXED:
            return (Quantity.VOLTAGE, Quantity.CURRENT)
        return (self,)


@dataclass(frozen=True)
class HarmonicSpec:
    """Harmonic of the given order; amplitude relative to the fundamental."""
    order: int
    amplitude: float
    phase_rad: float = 0.0


DEFAULT_HARMONICS = {
    Quantity.VOLTAGE: (HarmonicSpec(5, 0.02), HarmonicSpec(7, 0.01)),
    Quantity.CURRENT: (HarmonicSpec(3, 0.08), HarmonicSpec(5, 0.05), HarmonicSpec(7, 0.03)),
}


@dataclass(frozen=True)
class EventSpec:
    start_cycle: float = 30.0
    duration_cycles: float = 2.0
    frequency_hz: float = 900.0
    amplitude: float = 0.2
    modulation_depth: float = 0.3
    f_sideband_hz: float = 5.0
    sag_depth: float = 0.4
    decay_tau_s: float | None = None  # None = half the event window
    phase_rad: float = 0.0


@dataclass(frozen=True)
class SynthSpec:
    event_class: EventClass = EventClass.STEADY
    capture_cycles: int = DEFAULT_CAPTURE_CYCLES
    samples_per_cycle: int = DEFAULT_SAMPLES_PER_CYCLE
    system_freq_hz: float = DEFAULT_SYSTEM_FREQ_HZ
    quantity: Quantity = Quantity.VOLTAGE
    amplitudes: tuple[float, ...] = (1.0, 1.0, 1.0)
    phases_rad: tuple[float, ...] = THREE_PHASE_OFFSETS
    harmonics: tuple[HarmonicSpec, ...] | None = None  # None = quantity default
    event: EventSpec = field(default_factory=EventSpec)
    noise_std: float = 0.005
    noise_relative: bool = True
    current_lag_rad: float = math.pi / 12.0
    seed: int = 0
    n_locations: int = 1
    location_phase_step_rad: float = 0.02
    location_amplitude_drop: float = 0.02

    def __post_init__(self) -> None:
        object.__setattr__(self, "event_class", EventClass(self.event_class))
        object.__setattr__(self, "quantity", Quantity(self.quantity))
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "phases_rad", tuple(float(p) for p in self.phases_rad))
        if self.harmonics is not None:
            object.__setattr__(self, "harmonics", tuple(self.harmonics))
        self._validate()

    def _validate(self) -> None:
        if self.capture_cycles < 2:
            raise InvalidInputError(f"capture_cycles must be >= 2, got {self.capture_cycles}")
        if not self.amplitudes or len(self.amplitudes) != len(self.phases_rad):
            raise InvalidInputError("amplitudes and phases_rad need one entry per phase")
        if any(a < 0 for a in self.amplitudes):
            raise InvalidInputError(f"amplitudes must be nonnegative, got {self.amplitudes}")
        if self.noise_std < 0:
            raise InvalidInputError(f"noise_std must be >= 0, got {self.noise_std}")
        if self.n_locations < 1:
            raise InvalidInputError(f"n_locations must be >= 1, got {self.n_locations}")
        if not 0.0 <= self.location_amplitude_drop * (self.n_locations - 1) < 1.0:
            raise InvalidInputError("location_amplitude_drop leaves a non-positive amplitude")
        for q in self.quantity.parts():
            for h in self.resolved_harmonics(q):
                if h.order < 2 or h.amplitude < 0:
                    raise InvalidInputError(f"bad harmonic {h}")
        ev = self.event
        if ev.start_cycle < 0 or ev.duration_cycles <= 0:
            raise InvalidInputError(f"bad event window {ev.start_cycle}:{ev.duration_cycles}")
        if ev.start_cycle + ev.duration_cycles > self.capture_cycles:
            raise InvalidInputError(
                f"event window ends at cycle {ev.start_cycle + ev.duration_cycles}, "
                f"capture has {self.capture_cycles}"
            )
        if ev.amplitude < 0 or ev.frequency_hz <= 0 or ev.f_sideband_hz <= 0:
            raise InvalidInputError("event amplitude must be >= 0 and frequencies > 0")
        if not 0.0 <= ev.modulation_depth <= 1.0 or not 0.0 <= ev.sag_depth <= 1.0:
            raise InvalidInputError("modulation_depth and sag_depth must lie in [0, 1]")
        if ev.decay_tau_s is not None and ev.decay_tau_s <= 0:
            raise InvalidInputError(f"decay_tau_s must be positive, got {ev.decay_tau_s}")

    @property
    def sampling(self) -> SamplingSpec:
        return SamplingSpec(self.system_freq_hz, self.samples_per_cycle)

    @property
    def n_samples(self) -> int:
        return self.capture_cycles * self.samples_per_cycle

    def resolved_harmonics(self, quantity: Quantity | None = None) -> tuple[HarmonicSpec, ...]:
        """Explicit harmonics apply to every quantity; otherwise that quantity's defaults."""
        if self.harmonics is not None:
            return self.harmonics
        q = Quantity(quantity or self.quantity)
        if q is Quantity.MIXED:
            raise InvalidInputError("a mixed capture has per-quantity harmonics; name voltage or current")
        return DEFAULT_HARMONICS[q]

    def event_window(self) -> slice:
        start = int(round(self.event.start_cycle * self.samples_per_cycle))
        stop = int(round((self.event.start_cycle + self.event.duration_cycles) * self.samples_per_cycle))
        return slice(start, stop)

    def labels(self) -> list[str]:
        names = "ABCDEFGH"
        out = []
        for loc in range(self.n_locations):
            suffix = "" if loc == 0 else f"@{loc + 1}"
            for q in self.quantity.parts():
                prefix = "v" if q is Quantity.VOLTAGE else "i"
                out.extend(f"{prefix}_{names[p]}{suffix}" for p in range(len(self.amplitudes)))
        return out

    def units(self) -> list[str]:
        per_location = [VOLTS if q is Quantity.VOLTAGE else AMPERES for q in self.quantity.parts()]
        return [u for _ in range(self.n_locations) for u in per_location for _ in self.amplitudes]

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["event_class"] = self.event_class.value
        d["quantity"] = self.quantity.value
        if self.harmonics is not None or self.quantity is not Quantity.MIXED:
            d["harmonics"] = [asdict(h) for h in self.resolved_harmonics()]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SynthSpec:
        values = dict(d)
        values["event"] = EventSpec(**values.get("event", {}))
        if values.get("harmonics") is not None:
            values["harmonics"] = tuple(HarmonicSpec(**h) for h in values["harmonics"])
        for key in ("amplitudes", "phases_rad"):
            if key in values:
                values[key] = tuple(values[key])
        return cls(**values)


# ---------- Generation ----------


def _channel_signal(
    spec: SynthSpec,
    t: np.ndarray,
    amplitude: float,
    phase: float,
    harmonics: tuple[HarmonicSpec, ...],
) -> np.ndarray:
    w0 = 2.0 * math.pi * spec.system_freq_hz
    ev = spec.event
    window = spec.event_window()
    in_window = np.zeros(t.size, dtype=bool)
    in_window[window] = True
    t0 = ev.start_cycle / spec.system_freq_hz

    envelope = np.ones_like(t)
    if spec.event_class is EventClass.DUAL_MODE_MODULATED:
        envelope = 1.0 + ev.modulation_depth * np.cos(2.0 * math.pi * ev.f_sideband_hz * t)
    elif spec.event_class is EventClass.STEP_SAG:
        envelope = np.where(in_window, 1.0 - ev.sag_depth, 1.0)

    x = amplitude * envelope * np.sin(w0 * t + phase)
    for h in harmonics:
        x = x + amplitude * h.amplitude * np.sin(h.order * (w0 * t + phase) + h.phase_rad)

    w_ev = 2.0 * math.pi * ev.frequency_hz
    if spec.event_class is EventClass.SUBCYCLE_OSCILLATION:
        tau = ev.decay_tau_s or 0.5 * ev.duration_cycles / spec.system_freq_hz
        t_ev = t[in_window] - t0
        x = x.copy()
        x[in_window] += amplitude * ev.amplitude * np.exp(-t_ev / tau) * np.sin(w_ev * t_ev + ev.phase_rad + phase)
    elif spec.event_class is EventClass.SINGLE_MODE:
        active = np.arange(t.size) >= window.start
        t_ev = t[active] - t0
        x = x.copy()
        x[active] += amplitude * ev.amplitude * np.sin(w_ev * t_ev + ev.phase_rad + phase)
    return x


def gen(spec: SynthSpec) -> WaveformSet:
    """Deterministic given spec.seed; noise is drawn after all clean channels."""
    sampling = spec.sampling
    t = np.arange(spec.n_samples) / sampling.sample_rate_hz
    rows = []
    row_amplitudes = []
    for loc in range(spec.n_locations):
        scale = 1.0 - loc * spec.location_amplitude_drop
        shift = loc * spec.location_phase_step_rad
        for q in spec.quantity.parts():
            harmonics = spec.resolved_harmonics(q)
            lag = spec.current_lag_rad if q is Quantity.CURRENT and spec.quantity is Quantity.MIXED else 0.0
            for amplitude, phase in zip(spec.amplitudes, spec.phases_rad):
                rows.append(_channel_signal(spec, t, amplitude * scale, phase + shift - lag, harmonics))
                row_amplitudes.append(amplitude * scale)
    matrix = np.vstack(rows)
    if spec.noise_std > 0:
        noise = SeededRNG(spec.seed).normal(spec.noise_std, matrix.shape)
        if spec.noise_relative:
            noise *= np.asarray(row_amplitudes)[:, None]
        matrix = matrix + noise
    return WaveformSet.from_matrix(matrix, sampling, spec.labels(), spec.units())


# ---------- Suites ----------

# Documented gen_suite draw ranges (per-unit amplitudes, Hz, cycles). start_cycle is
# for the default 62-cycle capture and shifts to stay centered in other lengths.
SUITE_RANGES: dict[str, tuple[float, float]] = {
    "fundamental_amplitude": (0.8, 1.2),
    "event_frequency_hz": (300.0, 1500.0),
    "event_amplitude": (0.1, 0.3),
    "f_sideband_hz": (2.0, 15.0),
    "modulation_depth": (0.1, 0.4),
    "sag_depth": (0.2, 0.6),
    "start_cycle": (29.0, 31.0),
    "duration_cycles": (1.0, 3.0),
}


def _draw_spec(rng: SeededRNG, base: SynthSpec, event_class: EventClass) -> SynthSpec:
    def draw(key: str) -> float:
        lo, hi = SUITE_RANGES[key]
        return float(rng.uniform(lo, hi))

    amplitude = draw("fundamental_amplitude")
    event = EventSpec(
        start_cycle=draw("start_cycle") + (base.capture_cycles - DEFAULT_CAPTURE_CYCLES) / 2.0,
        duration_cycles=draw("duration_cycles"),
        frequency_hz=draw("event_frequency_hz"),
        amplitude=draw("event_amplitude"),
        modulation_depth=draw("modulation_depth"),
        f_sideband_hz=draw("f_sideband_hz"),
        sag_depth=draw("sag_depth"),
    )
    return replace(
        base,
        event_class=event_class,
        amplitudes=(amplitude,) * len(base.amplitudes),
        event=event,
        seed=rng.integers(0, 2**31),
    )


def gen_suite(n_events: int, seed: int, base: SynthSpec | None = None) -> list[tuple[SynthSpec, WaveformSet]]:
    """
    n randomized captures. Classes are dealt round-robin from a fresh seeded
    shuffle of all classes, so every class appears once n >= 5.
    """
    if n_events < 1:
        raise InvalidInputError(f"n_events must be >= 1, got {n_events}")
    base = base or SynthSpec()
    rng = SeededRNG(seed)
    classes = list(EventClass)
    suite: list[tuple[SynthSpec, WaveformSet]] = []
    order: list[int] = []
    for i in range(n_events):
        if i % len(classes) == 0:
            order = [int(k) for k in rng.permutation(len(classes))]
        spec = _draw_spec(rng, base, classes[order[i % len(classes)]])
        suite.append((spec, gen(spec)))
    return suite


def single_class_suite(
    event_class: EventClass | str, n_events: int, seed: int, base: SynthSpec | None = None
) -> list[tuple[SynthSpec, WaveformSet]]:
    """Benchmark suite of one class, drawn from the same ranges as gen_suite."""
    if n_events < 1:
        raise InvalidInputError(f"n_events must be >= 1, got {n_events}")
    base = base or SynthSpec()
    rng = SeededRNG(seed)
    specs = [_draw_spec(rng, base, EventClass(event_class)) for _ in range(n_events)]
    return [(spec, gen(spec)) for spec in specs]


# ---------- Files ----------


def spec_sidecar_path(out_path: str | Path) -> Path:
    p = Path(out_path)
    return p.with_name(p.stem + SPEC_SUFFIX)


def save_synth(spec: SynthSpec, capture: WaveformSet, out_path: str | Path) -> tuple[Path, Path]:
    """Capture file plus a <stem>.spec.json provenance sidecar."""
    capture_path = save_capture(capture, out_path)
    side = spec_sidecar_path(out_path)
    side.write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return capture_path, side
