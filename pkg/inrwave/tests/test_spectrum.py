"""
Tests for DFT magnitude scaling, dominant-mode extraction, sideband
pairing, spectral NMSE and the truncated-Fourier baseline.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent.parent))

from inrwave.errors import NoSignificantPeakError, UndefinedMetricError
from inrwave.spectrum import (
    detect_sidebands,
    dft_magnitude,
    dominant_frequency,
    find_spectral_peaks,
    fourier_param_count,
    save_spectrum,
    spectral_nmse,
    spectrum_report,
    truncated_fourier,
)
from inrwave.waveform import SamplingSpec, Waveform

SPEC = SamplingSpec(60.0, 128)


def _wave(cycles: int, fn) -> Waveform:
    t = np.arange(cycles * SPEC.samples_per_cycle) / SPEC.sample_rate_hz
    return Waveform(fn(t), SPEC, "v_A")


def _event_capture(cycles: int = 62) -> Waveform:
    return _wave(cycles, lambda t: np.sin(2 * np.pi * 60 * t) + 0.2 * np.sin(2 * np.pi * 900 * t))


def _modulated(cycles: int, depth: float = 0.3, f_sb: float = 5.0) -> Waveform:
    return _wave(cycles, lambda t: (1 + depth * np.cos(2 * np.pi * f_sb * t)) * np.sin(2 * np.pi * 60 * t))


# ---------- DFT ----------


class TestDft:
    def test_on_bin_amplitudes(self):
        s = dft_magnitude(_event_capture())
        assert s.n_source == 7936
        assert s.bin_width_hz == pytest.approx(7680 / 7936)
        assert s.freq_axis[62] == pytest.approx(60.0)
        assert s.magnitudes[62] == pytest.approx(1.0, rel=1e-9)
        assert s.magnitudes[930] == pytest.approx(0.2, rel=1e-9)

    def test_dc_is_not_doubled(self):
        s = dft_magnitude(np.full(64, 0.5), sample_rate_hz=640.0)
        assert s.magnitudes[0] == pytest.approx(0.5)

    @pytest.mark.parametrize("n", [64, 65])
    def test_parseval(self, n):
        x = np.random.default_rng(n).normal(size=n)
        s = dft_magnitude(x, sample_rate_hz=1000.0)
        assert s.signal_energy() == pytest.approx(float(np.sum(x * x)), rel=1e-10)

    def test_hann_keeps_on_bin_amplitude(self):
        s = dft_magnitude(_event_capture(), window="hann")
        assert s.window == "hann"
        assert s.magnitudes[930] == pytest.approx(0.2, rel=1e-6)

    def test_save_spectrum(self, tmp_path):
        s = dft_magnitude(_event_capture(4))
        frame = pd.read_csv(save_spectrum(s, tmp_path / "s.csv"), float_precision="round_trip")
        assert list(frame.columns) == ["frequency_hz", "magnitude"]
        np.testing.assert_array_equal(frame["magnitude"].to_numpy(), s.magnitudes)


# ---------- Dominant mode ----------


class TestDominant:
    def test_event_frequency_found(self):
        mode = dominant_frequency(dft_magnitude(_event_capture()))
        assert mode.frequency_hz == pytest.approx(900.0)
        assert mode.significant

    def test_exclusion_can_be_lowered(self):
        mode = dominant_frequency(dft_magnitude(_event_capture()), exclude_below_hz=0.0)
        assert mode.frequency_hz == pytest.approx(60.0)

    def test_steady_state_is_not_significant(self):
        mode = dominant_frequency(dft_magnitude(_wave(62, lambda t: np.sin(2 * np.pi * 60 * t))))
        assert not mode.significant

    def test_exclusion_past_nyquist(self):
        with pytest.raises(NoSignificantPeakError):
            dominant_frequency(dft_magnitude(_event_capture(4)), exclude_below_hz=5000.0)


# ---------- Sidebands ----------


class TestSidebands:
    def test_exact_bins(self):
        result = detect_sidebands(dft_magnitude(_modulated(60)), carrier_hz=60.0)
        assert result.found
        pair = result.pairs[0]
        assert pair.lower.frequency_hz == pytest.approx(55.0)
        assert pair.upper.frequency_hz == pytest.approx(65.0)
        assert result.f_sideband_hz == pytest.approx(5.0)
        assert pair.lower.magnitude == pytest.approx(0.15, rel=1e-9)

    def test_off_bin_within_one_bin(self):
        s = dft_magnitude(_modulated(62))
        result = detect_sidebands(s, carrier_hz=60.0)
        assert result.found
        assert abs(result.f_sideband_hz - 5.0) <= s.bin_width_hz
        assert abs(result.pairs[0].lower.frequency_hz - 55.0) <= s.bin_width_hz

    def test_unmodulated_has_no_pair(self):
        result = detect_sidebands(dft_magnitude(_event_capture(60)), carrier_hz=60.0)
        assert not result.found
        assert result.f_sideband_hz is None
        assert result.to_dict()["pairs"] == []

    def test_zero_spectrum_has_no_peaks(self):
        assert find_spectral_peaks(dft_magnitude(np.zeros(32), sample_rate_hz=100.0)) == ()


# ---------- Comparison and baseline ----------


class TestComparison:
    def test_identical_spectra(self):
        raw = _event_capture(8)
        s = dft_magnitude(raw)
        assert spectral_nmse(s, s) == 0.0
        report = spectrum_report(raw, raw.with_samples(raw.samples), carrier_hz=60.0)
        assert report.spectral_nmse_percent == 0.0
        assert report.dominant_agrees
        assert report.to_dict()["raw_dominant"]["frequency_hz"] == pytest.approx(900.0)

    def test_differential_report(self):
        steady = _wave(8, lambda t: np.sin(2 * np.pi * 60 * t))
        bump = np.where((steady.time_s() >= 4 / 60) & (steady.time_s() < 6 / 60), 0.2, 0.0)
        raw = steady.with_samples(steady.samples + bump * np.sin(2 * np.pi * 900 * steady.time_s()))
        report = spectrum_report(raw, raw.with_samples(raw.samples), pre_event_cycles=2)
        assert report.differential
        assert abs(report.raw_dominant.frequency_hz - 900.0) <= report.raw.bin_width_hz

    def test_zero_reference(self):
        z = dft_magnitude(np.zeros(16), sample_rate_hz=10.0)
        with pytest.raises(UndefinedMetricError):
            spectral_nmse(z, z)

    def test_truncated_fourier_exact_for_sparse_signal(self):
        raw = _wave(4, lambda t: 0.3 + np.sin(2 * np.pi * 60 * t) + 0.5 * np.cos(2 * np.pi * 180 * t))
        approx = truncated_fourier(raw, 2)
        np.testing.assert_allclose(approx.samples, raw.samples, atol=1e-12)
        assert fourier_param_count(2) == 7
        dropped = truncated_fourier(raw, 1)
        assert np.max(np.abs(dropped.samples - raw.samples)) > 0.4
