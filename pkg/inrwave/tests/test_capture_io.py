"""
Tests for capture file read/write: header metadata, sidecars, column
mapping and parse errors that name the offending row and column.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent.parent))

from inrwave.capture_io import load_capture, save_capture, sidecar_path, write_sidecar
from inrwave.errors import CaptureParseError, InvalidInputError
from inrwave.synth import EventClass, SynthSpec, gen
from inrwave.waveform import AMPERES, SamplingSpec, WaveformSet

SPEC = SamplingSpec(60.0, 16)


def _capture() -> WaveformSet:
    rng = np.random.default_rng(3)
    return WaveformSet.from_matrix(rng.normal(size=(3, 48)), SPEC, ["v_A", "v_B", "i_C"])


def _write(path: Path, rows: list[str], labels: str = "v_A,v_B") -> Path:
    header = f"# system_freq_hz=60.0\n# samples_per_cycle=4\n# labels={labels}\n"
    path.write_text(header + "\n".join(rows) + "\n", encoding="utf-8")
    return path


class TestSaveLoad:
    def test_samples_round_trip_exactly(self, tmp_path):
        cap = _capture()
        path = save_capture(cap, tmp_path / "cap.csv")
        back = load_capture(path)
        assert back.labels == cap.labels
        assert back.spec == cap.spec
        assert back.channel("i_C").unit == AMPERES
        np.testing.assert_array_equal(back.as_matrix(), cap.as_matrix())

    def test_synthetic_capture_is_bit_exact_after_reload(self, tmp_path):
        cap = gen(SynthSpec(event_class=EventClass.SINGLE_MODE, seed=3))
        back = load_capture(save_capture(cap, tmp_path / "synth.csv"))
        mismatched = np.count_nonzero(back.as_matrix() != cap.as_matrix())
        assert mismatched == 0

    def test_hard_to_round_values_parse_exactly(self, tmp_path):
        values = np.array([0.1 + 0.2, 1 / 3, -2.0 / 7.0, 2.2250738585072014e-308, 1.2345678901234567e300, 0.30000000000000004])
        rng = np.random.default_rng(11)
        values = np.concatenate([values, rng.normal(scale=400.0, size=250)])
        values = values[: (values.size // 16) * 16]
        cap = WaveformSet.from_matrix(values[None, :], SPEC, ["v_A"])
        back = load_capture(save_capture(cap, tmp_path / "hard.csv"))
        np.testing.assert_array_equal(back.as_matrix(), cap.as_matrix())

    def test_column_map_selects_and_reorders(self, tmp_path):
        path = save_capture(_capture(), tmp_path / "cap.csv")
        back = load_capture(path, column_map={"v_B": 1, "v_A": 0})
        assert back.labels == ("v_B", "v_A")
        np.testing.assert_array_equal(back.channel("v_A").samples, _capture().channel("v_A").samples)

    def test_sidecar_supplies_metadata(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("\n".join(f"{k}.0,{-k}.0" for k in range(8)) + "\n", encoding="utf-8")
        side = write_sidecar(path, SamplingSpec(50.0, 4), ["v_A", "v_B"])
        assert side == sidecar_path(path)
        cap = load_capture(path)
        assert cap.spec.system_freq_hz == 50.0
        assert cap.labels == ("v_A", "v_B")
        assert json.loads(side.read_text())["samples_per_cycle"] == 4

    def test_explicit_spec_overrides_missing_metadata(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("\n".join(str(k) for k in range(8)) + "\n", encoding="utf-8")
        cap = load_capture(path, spec=SamplingSpec(60.0, 4))
        assert cap.labels == ("x0",)
        assert cap.n_samples == 8


class TestParseErrors:
    def test_missing_metadata(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("1\n2\n3\n4\n", encoding="utf-8")
        with pytest.raises(CaptureParseError, match="samples_per_cycle|system_freq_hz"):
            load_capture(path)

    def test_ragged_row_names_line(self, tmp_path):
        path = _write(tmp_path / "c.csv", ["1,2", "3,4", "5", "7,8"])
        with pytest.raises(CaptureParseError) as exc:
            load_capture(path)
        assert exc.value.row == 6

    def test_non_numeric_cell_names_row_and_column(self, tmp_path):
        path = _write(tmp_path / "c.csv", ["1,2", "3,abc", "5,6", "7,8"])
        with pytest.raises(CaptureParseError) as exc:
            load_capture(path)
        assert exc.value.row == 5
        assert exc.value.column == "v_B"
        assert "non-numeric" in str(exc.value)

    def test_nan_cell(self, tmp_path):
        path = _write(tmp_path / "c.csv", ["1,2", "nan,4", "5,6", "7,8"])
        with pytest.raises(CaptureParseError, match="non-finite") as exc:
            load_capture(path)
        assert exc.value.column == "v_A"

    def test_missing_column(self, tmp_path):
        path = _write(tmp_path / "c.csv", ["1,2", "3,4", "5,6", "7,8"])
        with pytest.raises(CaptureParseError) as exc:
            load_capture(path, column_map={"v_C": 2})
        assert exc.value.column == "v_C"

    def test_missing_file(self, tmp_path):
        with pytest.raises(CaptureParseError):
            load_capture(tmp_path / "nope.csv")

    def test_parse_errors_are_input_errors(self):
        assert issubclass(CaptureParseError, InvalidInputError)
        assert issubclass(CaptureParseError, ValueError)
