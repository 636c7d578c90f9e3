"""
Tests for model files and run reports: exact round trips, byte-stable
re-saves, and malformed input naming the offending field.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent.parent))

from inrwave.errors import InvalidInputError, ModelFormatError
from inrwave.inr import (
    FORMAT_VERSION,
    ArchSpec,
    ModelMeta,
    evaluate,
    load_model,
    model_from_dict,
    model_from_parameters,
    model_to_dict,
    save_model,
)
from inrwave.reports import RunReport, compression_of, load_report, report_path_for, write_report
from inrwave.training import init_model
from inrwave.waveform import SamplingSpec, normalize_time

META = ModelMeta(
    labels=("v_A", "v_B", "v_C"),
    units=("V", "V", "V"),
    sampling=SamplingSpec(60.0, 128),
    n_samples=7936,
    scales=(0.7071, 0.7, 0.71),
)


def _model(kind: str = "double"):
    if kind == "multi":
        base = init_model(ArchSpec.multi(6, 5, 3, omega0=3116.0), seed=4)
        return model_from_parameters(base.arch, base.params, META)
    return init_model(ArchSpec.double(6, 5, omega0=3116.0), seed=4)


# ---------- Model files ----------


class TestModelFiles:
    @pytest.mark.parametrize("kind", ["double", "multi"])
    def test_round_trip_is_exact(self, tmp_path, kind):
        model = _model(kind)
        back = load_model(save_model(model, tmp_path / "m.model.json"))
        assert back.arch == model.arch
        assert back.meta == model.meta
        for name in model.arch.shapes():
            assert np.array_equal(back.params[name], model.params[name])
        t = normalize_time(257).t
        assert np.array_equal(evaluate(back, t), evaluate(model, t))

    def test_resave_is_byte_identical(self, tmp_path):
        first = save_model(_model("multi"), tmp_path / "a.model.json")
        second = save_model(load_model(first), tmp_path / "b.model.json")
        assert first.read_bytes() == second.read_bytes()

    def test_document_layout(self):
        d = model_to_dict(init_model(ArchSpec.single(3), seed=0))
        assert d["format_version"] == FORMAT_VERSION
        assert list(d["parameters"]) == ["a1", "b1", "a2", "b2"]
        assert isinstance(d["parameters"]["b2"], float)

    def test_unsupported_version(self):
        d = model_to_dict(_model())
        d["format_version"] = 99
        with pytest.raises(ModelFormatError) as exc:
            model_from_dict(d)
        assert exc.value.field == "format_version"

    def test_missing_section(self):
        d = model_to_dict(_model())
        del d["meta"]
        with pytest.raises(ModelFormatError) as exc:
            model_from_dict(d)
        assert exc.value.field == "meta"

    def test_bad_parameter_shape(self):
        d = model_to_dict(_model())
        d["parameters"]["A2"] = d["parameters"]["A2"][:-1]
        with pytest.raises(ModelFormatError) as exc:
            model_from_dict(d)
        assert exc.value.field == "A2"

    def test_non_finite_parameter(self, tmp_path):
        path = save_model(_model(), tmp_path / "m.model.json")
        d = json.loads(path.read_text())
        d["parameters"]["a3"][0] = float("nan")
        path.write_text(json.dumps(d))
        with pytest.raises(ModelFormatError) as exc:
            load_model(path)
        assert exc.value.field == "a3"

    def test_unknown_arch_kind(self):
        d = model_to_dict(_model())
        d["arch"]["kind"] = "triple"
        with pytest.raises(ModelFormatError):
            model_from_dict(d)

    def test_not_json(self, tmp_path):
        path = tmp_path / "m.model.json"
        path.write_text("{not json")
        with pytest.raises(ModelFormatError):
            load_model(path)


# ---------- Reports ----------


class TestReports:
    def test_compression_ratio(self):
        c = compression_of(7936, 1661)
        assert c.ratio == pytest.approx(4.7778, abs=1e-4)
        assert c.ratio_fraction == "7936/1661"
        assert compression_of(7936 * 3, 8103).ratio_fraction == "7936/2701"
        with pytest.raises(InvalidInputError):
            compression_of(0, 5)

    def test_write_and_load(self, tmp_path):
        artifact = tmp_path / "x.model.json"
        artifact.write_text("{}")
        report = RunReport(command="fit", artifacts=[str(artifact)], compression=compression_of(100, 10))
        path = write_report(report, report_path_for(tmp_path / "x"))
        assert path.name == "x.report.json"
        back = load_report(path)
        assert back.command == "fit" and back.status == "ok"
        assert back.compression.ratio == 10.0

    def test_missing_artifact_refused(self, tmp_path):
        report = RunReport(command="fit", artifacts=[str(tmp_path / "gone.model.json")])
        with pytest.raises(InvalidInputError):
            write_report(report, tmp_path / "r.report.json")
