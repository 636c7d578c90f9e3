"""
Sampled waveform captures: sampling metadata, single and multi-channel
containers, the normalized time grid fed to the INR models, differential
(event-signature) extraction, and the energy-normalized error metric.
All containers are immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

import numpy as np

from .errors import InvalidInputError, UndefinedMetricError

VOLTS = "V"
AMPERES = "A"
_UNITS = (VOLTS, AMPERES)

# Default capture geometry: 62 cycles at 128 samples per cycle, event-centered.
DEFAULT_SYSTEM_FREQ_HZ = 60.0
DEFAULT_SAMPLES_PER_CYCLE = 128
DEFAULT_CAPTURE_CYCLES = 62


def _frozen_array(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


# ---------- Sampling metadata ----------


@dataclass(frozen=True)
class SamplingSpec:
    """Fundamental frequency and samples per cycle; the sample rate is derived."""
    system_freq_hz: float = DEFAULT_SYSTEM_FREQ_HZ
    samples_per_cycle: int = DEFAULT_SAMPLES_PER_CYCLE

    def __post_init__(self) -> None:
        if not np.isfinite(self.system_freq_hz) or self.system_freq_hz <= 0:
            raise InvalidInputError(f"system_freq_hz must be positive, got {self.system_freq_hz}")
        if isinstance(self.samples_per_cycle, bool) or int(self.samples_per_cycle) != self.samples_per_cycle:
            raise InvalidInputError(f"samples_per_cycle must be an integer, got {self.samples_per_cycle}")
        if self.samples_per_cycle < 2:
            raise InvalidInputError(f"samples_per_cycle must be >= 2, got {self.samples_per_cycle}")
        object.__setattr__(self, "system_freq_hz", float(self.system_freq_hz))
        object.__setattr__(self, "samples_per_cycle", int(self.samples_per_cycle))

    @property
    def sample_rate_hz(self) -> float:
        return self.system_freq_hz * self.samples_per_cycle

    def cycles(self, n_samples: int) -> float:
        return n_samples / self.samples_per_cycle

    def to_dict(self) -> dict[str, Any]:
        return {"system_freq_hz": self.system_freq_hz, "samples_per_cycle": self.samples_per_cycle}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SamplingSpec:
        return cls(system_freq_hz=float(d["system_freq_hz"]), samples_per_cycle=int(d["samples_per_cycle"]))


# ---------- Containers ----------


@dataclass(frozen=True, eq=False)
class Waveform:
    """One uniformly sampled channel, e.g. v_A in volts or i_B in amperes."""
    samples: np.ndarray
    spec: SamplingSpec
    label: str = "x"
    unit: str = VOLTS

    def __post_init__(self) -> None:
        arr = _frozen_array(self.samples)
        if arr.ndim != 1:
            raise InvalidInputError(f"{self.label}: samples must be one-dimensional, got shape {arr.shape}")
        if arr.size < self.spec.samples_per_cycle:
            raise InvalidInputError(
                f"{self.label}: need at least one cycle ({self.spec.samples_per_cycle} samples), got {arr.size}"
            )
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise InvalidInputError(f"{self.label}: non-finite sample at index {int(bad[0])}")
        if self.unit not in _UNITS:
            raise InvalidInputError(f"{self.label}: unit must be one of {_UNITS}, got {self.unit!r}")
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)

    @property
    def n_cycles(self) -> float:
        return self.spec.cycles(self.n_samples)

    @property
    def quantity(self) -> str:
        return "voltage" if self.unit == VOLTS else "current"

    def time_s(self) -> np.ndarray:
        """Absolute sample instants in seconds from the first sample."""
        return np.arange(self.n_samples) / self.spec.sample_rate_hz

    def with_samples(self, samples: Any, label: str | None = None) -> Waveform:
        return Waveform(samples=samples, spec=self.spec, label=label or self.label, unit=self.unit)


@dataclass(frozen=True, eq=False)
class WaveformSet:
    """Time-synchronized channels sharing one SamplingSpec and length."""
    channels: tuple[Waveform, ...]

    def __post_init__(self) -> None:
        chans = tuple(self.channels)
        if not chans:
            raise InvalidInputError("WaveformSet needs at least one channel")
        first = chans[0]
        for ch in chans[1:]:
            if ch.n_samples != first.n_samples:
                raise InvalidInputError(
                    f"channel {ch.label} has {ch.n_samples} samples, expected {first.n_samples}"
                )
            if ch.spec != first.spec:
                raise InvalidInputError(f"channel {ch.label} has a different SamplingSpec")
        labels = [c.label for c in chans]
        if len(set(labels)) != len(labels):
            raise InvalidInputError(f"duplicate channel labels: {labels}")
        object.__setattr__(self, "channels", chans)

    def __iter__(self) -> Iterator[Waveform]:
        return iter(self.channels)

    def __len__(self) -> int:
        return len(self.channels)

    @property
    def spec(self) -> SamplingSpec:
        return self.channels[0].spec

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.channels)

    @property
    def units(self) -> tuple[str, ...]:
        return tuple(c.unit for c in self.channels)

    @property
    def n_samples(self) -> int:
        return self.channels[0].n_samples

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    def channel(self, label: str) -> Waveform:
        for c in self.channels:
            if c.label == label:
                return c
        raise InvalidInputError(f"no channel {label!r}; available: {list(self.labels)}")

    def as_matrix(self) -> np.ndarray:
        """Samples as a (channels, n_samples) array."""
        return np.vstack([c.samples for c in self.channels])

    @classmethod
    def from_matrix(
        cls,
        matrix: Any,
        spec: SamplingSpec,
        labels: Sequence[str],
        units: Sequence[str] | None = None,
    ) -> WaveformSet:
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        if m.shape[0] != len(labels):
            raise InvalidInputError(f"{m.shape[0]} rows but {len(labels)} labels")
        units = list(units) if units is not None else [default_unit(l) for l in labels]
        return cls(tuple(Waveform(m[i], spec, labels[i], units[i]) for i in range(len(labels))))


def default_unit(label: str) -> str:
    """Channels named i_* are currents; everything else is a voltage."""
    return AMPERES if label.lower().startswith("i") else VOLTS


def as_waveform_set(target: Waveform | WaveformSet) -> WaveformSet:
    return target if isinstance(target, WaveformSet) else WaveformSet((target,))


# ---------- Time grid ----------


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Normalized model inputs t_k in [-1, 1]."""
    t: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", _frozen_array(self.t))

    @property
    def n_samples(self) -> int:
        return int(self.t.size)


def normalize_time(n_samples: int) -> TimeGrid:
    """t_k = -1 + 2k/(n-1). Written as (2k - (n-1))/(n-1) so the grid is exactly symmetric."""
    if int(n_samples) != n_samples or n_samples < 2:
        raise InvalidInputError(f"normalize_time needs n_samples >= 2, got {n_samples}")
    n = int(n_samples)
    k = np.arange(n, dtype=float)
    return TimeGrid((2.0 * k - (n - 1)) / (n - 1))


# ---------- Event signatures ----------


def differential_waveform(capture: Waveform, pre_event_cycles: int) -> Waveform:
    """
    Capture minus the periodic extension of its average pre-event cycle.
    The baseline is the mean over the first pre_event_cycles cycles.
    """
    spc = capture.spec.samples_per_cycle
    if pre_event_cycles < 1:
        raise InvalidInputError(f"pre_event_cycles must be >= 1, got {pre_event_cycles}")
    needed = (pre_event_cycles + 1) * spc
    if capture.n_samples < needed:
        raise InvalidInputError(
            f"{capture.label}: {pre_event_cycles} pre-event cycles need at least {needed} samples, "
            f"got {capture.n_samples}"
        )
    baseline = capture.samples[: pre_event_cycles * spc].reshape(pre_event_cycles, spc).mean(axis=0)
    reps = -(-capture.n_samples // spc)
    extension = np.tile(baseline, reps)[: capture.n_samples]
    return capture.with_samples(capture.samples - extension)


def event_window_samples(spec: SamplingSpec, start_cycle: float, duration_cycles: float) -> slice:
    """Sample slice covering [start_cycle, start_cycle + duration_cycles)."""
    if start_cycle < 0 or duration_cycles <= 0:
        raise InvalidInputError(f"bad event window {start_cycle}:{duration_cycles}")
    start = int(round(start_cycle * spec.samples_per_cycle))
    stop = int(round((start_cycle + duration_cycles) * spec.samples_per_cycle))
    return slice(start, stop)


# ---------- Metrics ----------


def _samples_of(w: Waveform | np.ndarray) -> np.ndarray:
    return w.samples if isinstance(w, Waveform) else np.asarray(w, dtype=float)


def nmse_percent(raw: Waveform | np.ndarray, recon: Waveform | np.ndarray) -> float:
    """100 * sum((raw - recon)^2) / sum(raw^2)."""
    r = _samples_of(raw)
    x = _samples_of(recon)
    if r.shape != x.shape:
        raise InvalidInputError(f"length mismatch: raw {r.shape} vs recon {x.shape}")
    energy = float(np.sum(r * r))
    if energy == 0.0:
        raise UndefinedMetricError("NMSE undefined: reference waveform has zero energy")
    err = r - x
    return 100.0 * float(np.sum(err * err)) / energy


def segment_nmse_percent(
    raw: Waveform | np.ndarray,
    recon: Waveform | np.ndarray,
    start: int,
    stop: int,
) -> float:
    """NMSE restricted to samples [start, stop)."""
    r = _samples_of(raw)
    x = _samples_of(recon)
    if r.shape != x.shape:
        raise InvalidInputError(f"length mismatch: raw {r.shape} vs recon {x.shape}")
    if not 0 <= start < stop <= r.size:
        raise InvalidInputError(f"segment [{start}, {stop}) outside 0..{r.size}")
    return nmse_percent(r[start:stop], x[start:stop])


def channel_nmse_percent(raw: WaveformSet, recon: WaveformSet) -> dict[str, float]:
    """Per-channel NMSE, matched by label in raw's order."""
    missing = [l for l in raw.labels if l not in recon.labels]
    if missing:
        raise InvalidInputError(f"reconstruction lacks channels {missing}")
    return {l: nmse_percent(raw.channel(l), recon.channel(l)) for l in raw.labels}
