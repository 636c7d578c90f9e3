"""
Frequency-domain analysis: one-sided DFT magnitude spectra, dominant-mode
extraction, modulation-sideband pairing, spectral NMSE between a capture
and its reconstruction, and a truncated-Fourier baseline.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, NamedTuple

import numpy as np
import pandas as pd
from scipy import signal

from .errors import InvalidInputError, NoSignificantPeakError, UndefinedMetricError
from .inr.forward import reconstruct
from .inr.schemas import InrModel
from .waveform import TimeGrid, Waveform, as_waveform_set, differential_waveform

DEFAULT_EXCLUDE_BELOW_HZ = 90.0
DEFAULT_MIN_REL_MAGNITUDE = 0.1

Window = Literal["none", "hann"]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided magnitude spectrum; bin k sits at k * sample_rate / n."""
    magnitudes: np.ndarray = field(repr=False)
    freq_axis: np.ndarray = field(repr=False)
    n_source: int
    sample_rate_hz: float
    window: str = "none"

    @property
    def bin_width_hz(self) -> float:
        return self.sample_rate_hz / self.n_source

    @property
    def n_bins(self) -> int:
        return int(self.magnitudes.size)

    def signal_energy(self) -> float:
        """sum(x^2) recovered from the scaled magnitudes (Parseval); rectangular window only."""
        m = self.magnitudes
        n = self.n_source
        interior_end = m.size - 1 if n % 2 == 0 else m.size
        energy = m[0] ** 2 + np.sum(m[1:interior_end] ** 2) / 2.0
        if n % 2 == 0:
            energy += m[-1] ** 2
        return float(n * energy)


class Peak(NamedTuple):
    frequency_hz: float
    magnitude: float
    bin_index: int


class DominantMode(NamedTuple):
    frequency_hz: float
    magnitude: float
    bin_index: int
    significant: bool


@dataclass(frozen=True)
class SidebandPair:
    lower: Peak
    upper: Peak
    carrier_hz: float

    @property
    def offset_hz(self) -> float:
        return (self.upper.frequency_hz - self.lower.frequency_hz) / 2.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "lower_hz": self.lower.frequency_hz,
            "upper_hz": self.upper.frequency_hz,
            "lower_magnitude": self.lower.magnitude,
            "upper_magnitude": self.upper.magnitude,
            "f_sideband_hz": self.offset_hz,
        }


@dataclass(frozen=True)
class SidebandResult:
    pairs: tuple[SidebandPair, ...]
    carrier_hz: float

    @property
    def found(self) -> bool:
        return bool(self.pairs)

    @property
    def f_sideband_hz(self) -> float | None:
        """Offset of the strongest pair."""
        return self.pairs[0].offset_hz if self.pairs else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "carrier_hz": self.carrier_hz,
            "f_sideband_hz": self.f_sideband_hz,
            "pairs": [p.to_dict() for p in self.pairs],
        }


# ---------- DFT ----------


def dft_magnitude(w: Waveform | np.ndarray, window: Window = "none", sample_rate_hz: float | None = None) -> Spectrum:
    """
    Scaled so a sinusoid of amplitude A on an exact bin reads A:
    2/n for interior bins, 1/n at DC and (even n) Nyquist. The Hann option
    replaces n by the window sum.
    """
    if isinstance(w, Waveform):
        x = w.samples
        fs = w.spec.sample_rate_hz
    else:
        x = np.asarray(w, dtype=float)
        if sample_rate_hz is None:
            raise InvalidInputError("sample_rate_hz is required for raw arrays")
        fs = float(sample_rate_hz)
    n = x.size
    if n < 2:
        raise InvalidInputError(f"DFT needs at least 2 samples, got {n}")
    if window == "hann":
        taper = signal.get_window("hann", n)
        norm = float(np.sum(taper))
        spec = np.fft.rfft(x * taper)
    elif window == "none":
        norm = float(n)
        spec = np.fft.rfft(x)
    else:
        raise InvalidInputError(f"unknown window {window!r}")
    mags = np.abs(spec) / norm
    last = mags.size - 1 if n % 2 == 0 else mags.size
    mags[1:last] *= 2.0
    freqs = np.arange(mags.size) * fs / n
    return Spectrum(mags, freqs, n, fs, window)


# ---------- Peaks ----------


def dominant_frequency(
    s: Spectrum,
    exclude_below_hz: float = DEFAULT_EXCLUDE_BELOW_HZ,
    min_rel_magnitude: float = DEFAULT_MIN_REL_MAGNITUDE,
) -> DominantMode:
    """
    Largest bin at or above exclude_below_hz. significant is False when it
    falls below min_rel_magnitude of the spectrum's global maximum (noise floor).
    """
    allowed = np.flatnonzero(s.freq_axis >= exclude_below_hz)
    if allowed.size == 0:
        raise NoSignificantPeakError(
            f"no bins at or above {exclude_below_hz} Hz (spectrum ends at {s.freq_axis[-1]:.3f} Hz)"
        )
    k = int(allowed[np.argmax(s.magnitudes[allowed])])
    mag = float(s.magnitudes[k])
    global_max = float(np.max(s.magnitudes))
    significant = mag > 0.0 and mag >= min_rel_magnitude * global_max
    return DominantMode(float(s.freq_axis[k]), mag, k, significant)


def find_spectral_peaks(s: Spectrum, min_rel_magnitude: float = DEFAULT_MIN_REL_MAGNITUDE) -> tuple[Peak, ...]:
    """Local maxima above min_rel_magnitude x global max, strongest first."""
    global_max = float(np.max(s.magnitudes))
    if global_max == 0.0:
        return ()
    idx, _ = signal.find_peaks(s.magnitudes, height=min_rel_magnitude * global_max)
    peaks = [Peak(float(s.freq_axis[k]), float(s.magnitudes[k]), int(k)) for k in idx]
    return tuple(sorted(peaks, key=lambda p: (-p.magnitude, p.bin_index)))


def detect_sidebands(
    s: Spectrum,
    carrier_hz: float = 60.0,
    min_rel_magnitude: float = DEFAULT_MIN_REL_MAGNITUDE,
) -> SidebandResult:
    """
    Pair peaks symmetric about carrier_hz within one bin. The carrier's own
    peak is never paired. No pair is an empty result, not an error.
    """
    tol = s.bin_width_hz
    peaks = [p for p in find_spectral_peaks(s, min_rel_magnitude) if abs(p.frequency_hz - carrier_hz) > tol]
    lower = [p for p in peaks if p.frequency_hz < carrier_hz]
    upper = [p for p in peaks if p.frequency_hz > carrier_hz]
    pairs: list[SidebandPair] = []
    used: set[int] = set()
    for lo in sorted(lower, key=lambda p: -p.magnitude):
        offset = carrier_hz - lo.frequency_hz
        best: Peak | None = None
        for up in upper:
            if up.bin_index in used:
                continue
            mismatch = abs((up.frequency_hz - carrier_hz) - offset)
            if mismatch <= tol and (best is None or mismatch < abs((best.frequency_hz - carrier_hz) - offset)):
                best = up
        if best is not None:
            used.add(best.bin_index)
            pairs.append(SidebandPair(lo, best, carrier_hz))
    pairs.sort(key=lambda p: -(p.lower.magnitude + p.upper.magnitude))
    return SidebandResult(tuple(pairs), carrier_hz)


# ---------- Comparison ----------


def spectral_nmse(raw: Spectrum, recon: Spectrum) -> float:
    """Energy-normalized squared error between magnitude spectra, in percent."""
    if raw.n_bins != recon.n_bins:
        raise InvalidInputError(f"spectra have {raw.n_bins} and {recon.n_bins} bins")
    energy = float(np.sum(raw.magnitudes**2))
    if energy == 0.0:
        raise UndefinedMetricError("spectral NMSE undefined: reference spectrum is all zero")
    diff = raw.magnitudes - recon.magnitudes
    return 100.0 * float(np.sum(diff * diff)) / energy


@dataclass
class SpectrumReport:
    raw: Spectrum
    recon: Spectrum
    raw_dominant: DominantMode
    recon_dominant: DominantMode
    spectral_nmse_percent: float
    raw_sidebands: SidebandResult | None = None
    recon_sidebands: SidebandResult | None = None
    differential: bool = False

    @property
    def dominant_agrees(self) -> bool:
        return abs(self.raw_dominant.bin_index - self.recon_dominant.bin_index) <= 1

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "differential": self.differential,
            "bin_width_hz": self.raw.bin_width_hz,
            "window": self.raw.window,
            "raw_dominant": self.raw_dominant._asdict(),
            "recon_dominant": self.recon_dominant._asdict(),
            "dominant_agrees": self.dominant_agrees,
            "spectral_nmse_percent": self.spectral_nmse_percent,
        }
        if self.raw_sidebands is not None:
            d["raw_sidebands"] = self.raw_sidebands.to_dict()
        if self.recon_sidebands is not None:
            d["recon_sidebands"] = self.recon_sidebands.to_dict()
        return d


def spectrum_report(
    raw: Waveform,
    model: InrModel | Waveform,
    grid: TimeGrid | None = None,
    *,
    exclude_below_hz: float = DEFAULT_EXCLUDE_BELOW_HZ,
    carrier_hz: float | None = None,
    min_rel_magnitude: float = DEFAULT_MIN_REL_MAGNITUDE,
    pre_event_cycles: int | None = None,
    window: Window = "none",
) -> SpectrumReport:
    """
    Spectra of raw and its reconstruction (a model, or an already
    reconstructed waveform), both dominant modes, optional sideband pairs
    about carrier_hz, and the spectral NMSE. With pre_event_cycles both
    sides are first reduced to their differential waveforms.
    """
    if isinstance(model, Waveform):
        recon = model
    elif model.arch.n_outputs > 1:
        recon = as_waveform_set(reconstruct(model, grid)).channel(raw.label)
    else:
        recon = reconstruct(model, grid)
    if recon.n_samples != raw.n_samples:
        raise InvalidInputError(f"reconstruction has {recon.n_samples} samples, raw has {raw.n_samples}")
    if pre_event_cycles is not None:
        raw = differential_waveform(raw, pre_event_cycles)
        recon = differential_waveform(recon, pre_event_cycles)
    raw_s = dft_magnitude(raw, window)
    recon_s = dft_magnitude(recon, window)
    report = SpectrumReport(
        raw=raw_s,
        recon=recon_s,
        raw_dominant=dominant_frequency(raw_s, exclude_below_hz, min_rel_magnitude),
        recon_dominant=dominant_frequency(recon_s, exclude_below_hz, min_rel_magnitude),
        spectral_nmse_percent=spectral_nmse(raw_s, recon_s),
        differential=pre_event_cycles is not None,
    )
    if carrier_hz is not None:
        report.raw_sidebands = detect_sidebands(raw_s, carrier_hz, min_rel_magnitude)
        report.recon_sidebands = detect_sidebands(recon_s, carrier_hz, min_rel_magnitude)
    return report


# ---------- Fourier baseline ----------


def fourier_param_count(n_terms: int) -> int:
    """Amplitude, frequency and phase per kept bin, plus DC."""
    return 3 * n_terms + 1


def truncated_fourier(w: Waveform, n_terms: int) -> Waveform:
    """Keep DC and the n_terms strongest non-DC bins; zero the rest and invert."""
    if n_terms < 0:
        raise InvalidInputError(f"n_terms must be >= 0, got {n_terms}")
    coeffs = np.fft.rfft(w.samples)
    keep = np.zeros(coeffs.size, dtype=bool)
    keep[0] = True
    order = np.argsort(-np.abs(coeffs[1:]), kind="stable") + 1
    keep[order[:n_terms]] = True
    return w.with_samples(np.fft.irfft(np.where(keep, coeffs, 0.0), n=w.n_samples))


# ---------- Export ----------


def save_spectrum(s: Spectrum, path: str | Path) -> Path:
    """Two-column frequency_hz,magnitude text for plotting."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"frequency_hz": s.freq_axis, "magnitude": s.magnitudes})
    frame.to_csv(p, index=False, float_format="%.17g", lineterminator="\n")
    return p
