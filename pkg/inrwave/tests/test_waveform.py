"""
Tests for capture containers, the normalized time grid, differential
waveforms and the NMSE metric.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent.parent))

from inrwave.errors import InvalidInputError, UndefinedMetricError
from inrwave.waveform import (
    AMPERES,
    VOLTS,
    SamplingSpec,
    Waveform,
    WaveformSet,
    channel_nmse_percent,
    differential_waveform,
    event_window_samples,
    nmse_percent,
    normalize_time,
    segment_nmse_percent,
)

SPEC = SamplingSpec(60.0, 32)


def _sine(n_cycles: int = 4, amplitude: float = 1.0, label: str = "v_A") -> Waveform:
    n = n_cycles * SPEC.samples_per_cycle
    t = np.arange(n) / SPEC.sample_rate_hz
    return Waveform(amplitude * np.sin(2 * np.pi * 60.0 * t), SPEC, label)


# ---------- SamplingSpec / containers ----------


class TestContainers:
    def test_sample_rate_and_cycles(self):
        spec = SamplingSpec(60.0, 128)
        assert spec.sample_rate_hz == 7680.0
        assert spec.cycles(7936) == 62.0

    def test_sampling_rejects_bad_values(self):
        with pytest.raises(InvalidInputError):
            SamplingSpec(0.0, 128)
        with pytest.raises(InvalidInputError):
            SamplingSpec(60.0, 1)

    def test_waveform_is_read_only(self):
        w = _sine()
        with pytest.raises(ValueError):
            w.samples[0] = 5.0

    def test_waveform_rejects_non_finite(self):
        data = np.zeros(64)
        data[10] = np.nan
        with pytest.raises(InvalidInputError, match="index 10"):
            Waveform(data, SPEC)

    def test_waveform_needs_one_cycle(self):
        with pytest.raises(InvalidInputError):
            Waveform(np.zeros(10), SPEC)

    def test_set_rejects_mismatched_lengths(self):
        a = _sine(4, label="v_A")
        b = _sine(3, label="v_B")
        with pytest.raises(InvalidInputError):
            WaveformSet((a, b))

    def test_set_rejects_duplicate_labels(self):
        with pytest.raises(InvalidInputError):
            WaveformSet((_sine(), _sine()))

    def test_from_matrix_infers_units(self):
        m = np.ones((2, 64))
        s = WaveformSet.from_matrix(m, SPEC, ["v_A", "i_A"])
        assert s.units == (VOLTS, AMPERES)
        assert s.channel("i_A").quantity == "current"
        np.testing.assert_array_equal(s.as_matrix(), m)

    def test_channel_lookup_is_the_selection_surface(self):
        s = WaveformSet.from_matrix(np.vstack([np.zeros(64), np.ones(64)]), SPEC, ["v_A", "v_B"])
        assert s.channel("v_B").samples[0] == 1.0
        assert not hasattr(s, "subset")

    def test_unknown_channel(self):
        s = WaveformSet((_sine(),))
        with pytest.raises(InvalidInputError, match="no channel"):
            s.channel("v_Z")


# ---------- Time grid ----------


class TestNormalizeTime:
    def test_endpoints_and_symmetry(self):
        g = normalize_time(7936)
        assert g.t[0] == -1.0
        assert g.t[-1] == 1.0
        np.testing.assert_array_equal(g.t, -g.t[::-1])
        assert np.all(np.diff(g.t) > 0)

    def test_odd_length_has_exact_zero(self):
        g = normalize_time(5)
        np.testing.assert_array_equal(g.t, [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_too_short(self):
        with pytest.raises(InvalidInputError):
            normalize_time(1)


# ---------- Differential / windows ----------


class TestDifferential:
    def test_steady_state_differential_is_zero(self):
        w = _sine(6)
        d = differential_waveform(w, 2)
        assert np.max(np.abs(d.samples)) < 1e-12

    def test_event_survives(self):
        w = _sine(6)
        bump = np.zeros(w.n_samples)
        bump[4 * 32 : 5 * 32] = 0.5
        d = differential_waveform(w.with_samples(w.samples + bump), 2)
        np.testing.assert_allclose(d.samples, bump, atol=1e-12)

    def test_needs_post_baseline_cycle(self):
        with pytest.raises(InvalidInputError):
            differential_waveform(_sine(2), 2)

    def test_event_window_samples(self):
        assert event_window_samples(SamplingSpec(60.0, 128), 30, 2) == slice(3840, 4096)


# ---------- NMSE ----------


class TestNmse:
    def test_identical_is_zero(self):
        w = _sine()
        assert nmse_percent(w, w) == 0.0

    def test_all_zero_reconstruction_is_100(self):
        w = _sine()
        assert nmse_percent(w, np.zeros(w.n_samples)) == pytest.approx(100.0)

    def test_scale_invariance(self):
        w = _sine()
        recon = w.samples * 0.9
        a = nmse_percent(w, recon)
        b = nmse_percent(w.samples * 3.0, recon * 3.0)
        assert a == pytest.approx(b, rel=1e-12)
        assert a == pytest.approx(1.0)

    def test_zero_energy_reference(self):
        with pytest.raises(UndefinedMetricError):
            nmse_percent(np.zeros(64), np.zeros(64))

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            nmse_percent(np.ones(64), np.ones(65))

    def test_segment(self):
        raw = np.ones(100)
        recon = np.ones(100)
        recon[50:60] = 0.0
        assert segment_nmse_percent(raw, recon, 50, 60) == pytest.approx(100.0)
        assert segment_nmse_percent(raw, recon, 0, 50) == 0.0
        with pytest.raises(InvalidInputError):
            segment_nmse_percent(raw, recon, 60, 50)

    def test_channel_nmse_matches_by_label(self):
        a, b = _sine(label="v_A"), _sine(amplitude=2.0, label="v_B")
        raw = WaveformSet((a, b))
        recon = WaveformSet((b.with_samples(b.samples), a.with_samples(a.samples * 0.9)))
        out = channel_nmse_percent(raw, recon)
        assert list(out) == ["v_A", "v_B"]
        assert out["v_A"] == pytest.approx(1.0)
        assert out["v_B"] == 0.0
