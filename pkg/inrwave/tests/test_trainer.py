"""
Tests for the fitting loop, training configuration, divergence handling
and the multi-run protocol. Captures are kept tiny so fits take well
under a second.
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent.parent))

from inrwave.errors import InvalidInputError, TrainingDivergedError, UndefinedMetricError
from inrwave.inr import ArchSpec, reconstruct
from inrwave.training import (
    TrainConfig,
    build_train_config,
    fit,
    fit_multi_run,
    fit_separate,
    init_parameters,
    load_train_config,
    omega0_for_capture,
    run_fit_task,
    separate_fit_tasks,
    FitTask,
    RunFailure,
)
from inrwave.waveform import SamplingSpec, Waveform, WaveformSet, nmse_percent

SPEC = SamplingSpec(60.0, 32)
N = 4 * 32
FAST = TrainConfig(learning_rate=1e-2, epochs=60, loss_report_stride=10)


def _constant(level: float = 2.0, label: str = "v_A") -> Waveform:
    return Waveform(np.full(N, level), SPEC, label)


def _three_phase() -> WaveformSet:
    t = np.arange(N) / SPEC.sample_rate_hz
    rows = [np.sin(2 * np.pi * 60.0 * t + k * 2 * np.pi / 3) + 1.5 for k in range(3)]
    return WaveformSet.from_matrix(np.vstack(rows), SPEC, ["v_A", "v_B", "v_C"])


# ---------- Initialization ----------


class TestInitialization:
    def test_deeper_layers_scale_with_architecture_omega0(self):
        arch = ArchSpec.double(3, 4, omega0=300.0)
        params = init_parameters(arch, seed=0)
        assert np.max(np.abs(params["A2"])) <= math.sqrt(6.0 / 3) / 300.0
        assert np.max(np.abs(params["b2"])) <= math.sqrt(6.0 / 3) / 300.0
        assert np.max(np.abs(params["a3"])) <= math.sqrt(6.0 / 4) / 300.0
        assert np.max(np.abs(params["b3"])) <= math.sqrt(6.0 / 4) / 300.0

    def test_first_layer_ignores_omega0(self):
        params = init_parameters(ArchSpec.single(1000, omega0=3000.0), seed=1)
        assert np.all(np.abs(params["a1"]) < 1.0)
        assert np.max(np.abs(params["a1"])) > 0.9
        assert np.max(np.abs(params["a2"])) <= math.sqrt(6.0 / 1000) / 3000.0

    def test_multi_output_layer_bound(self):
        arch = ArchSpec.multi(6, 5, 3, omega0=50.0)
        params = init_parameters(arch, seed=2)
        bound = math.sqrt(6.0 / 5) / 50.0
        assert np.max(np.abs(params["A3"])) <= bound
        assert np.max(np.abs(params["A3"])) > 0.5 * bound

    def test_fit_initializes_with_config_omega0(self):
        config = TrainConfig(learning_rate=1e-12, epochs=1, omega0=400.0, seed=3)
        model, report = fit(_constant(), ArchSpec.double(4, 4), config)
        expected = init_parameters(ArchSpec.double(4, 4, omega0=400.0), seed=3)
        assert report.omega0 == 400.0
        np.testing.assert_allclose(model.params["A2"], expected["A2"], rtol=0, atol=1e-9)

    def test_same_seed_same_draw(self):
        arch = ArchSpec.double(5, 6, omega0=80.0)
        a, b = init_parameters(arch, 7), init_parameters(arch, 7)
        for name in arch.shapes():
            np.testing.assert_array_equal(a[name], b[name])


# ---------- TrainConfig ----------


class TestTrainConfig:
    def test_defaults(self):
        c = TrainConfig()
        assert c.learning_rate == 1e-4
        assert c.epochs == 2000
        assert c.optimizer == "adam"
        assert c.batch_size is None and c.omega0 is None

    def test_rejects_bad_values(self):
        with pytest.raises(InvalidInputError, match="learning_rate"):
            build_train_config({"learning_rate": -1.0})
        with pytest.raises(InvalidInputError):
            build_train_config({"unknown_field": 1})

    def test_none_overrides_are_ignored(self):
        c = build_train_config({"epochs": 5, "seed": None})
        assert c.epochs == 5 and c.seed == 0

    def test_file_with_overrides(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"epochs": 10, "learning_rate": 0.003}), encoding="utf-8")
        c = load_train_config(path, epochs=20, seed=None)
        assert c.epochs == 20 and c.learning_rate == 0.003

    def test_bad_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(InvalidInputError):
            load_train_config(path)

    def test_omega0_for_capture(self):
        assert omega0_for_capture(62) == pytest.approx(16 * np.pi * 62)
        with pytest.raises(InvalidInputError):
            omega0_for_capture(0)


# ---------- fit ----------


class TestFit:
    def test_constant_target_is_learned(self):
        config = FAST.with_overrides(epochs=400)
        model, report = fit(_constant(), ArchSpec.double(8, 8), config)
        assert report.final_nmse_percent < 5.0
        assert report.best_loss <= report.loss_trace[0][1]

    def test_report_matches_independent_scoring(self):
        target = _constant(3.0)
        model, report = fit(target, ArchSpec.single(6), FAST)
        assert nmse_percent(target, reconstruct(model)) == report.final_nmse_percent
        assert report.channel_nmse_percent == {"v_A": report.final_nmse_percent}
        assert model.meta.scales == (3.0,)
        assert report.param_count == 19

    def test_same_seed_is_bitwise_identical(self):
        a, ra = fit(_constant(), ArchSpec.double(6, 5), FAST)
        b, rb = fit(_constant(), ArchSpec.double(6, 5), FAST)
        for name in a.arch.shapes():
            assert np.array_equal(a.params[name], b.params[name])
        assert ra.loss_trace == rb.loss_trace

    def test_different_seeds_differ(self):
        a, _ = fit(_constant(), ArchSpec.double(6, 5), FAST)
        b, _ = fit(_constant(), ArchSpec.double(6, 5), FAST.with_seed(1))
        assert not np.array_equal(a.params["a1"], b.params["a1"])

    def test_loss_trace_stride(self):
        _, report = fit(_constant(), ArchSpec.single(4), FAST.with_overrides(epochs=50))
        assert [e for e, _ in report.loss_trace] == [0, 10, 20, 30, 40, 50]

    def test_minibatch_trace_and_determinism(self):
        config = FAST.with_overrides(epochs=20, batch_size=32)
        a, ra = fit(_constant(), ArchSpec.double(4, 4), config)
        b, _ = fit(_constant(), ArchSpec.double(4, 4), config)
        assert [e for e, _ in ra.loss_trace] == [0, 10, 20]
        assert np.array_equal(a.params["A2"], b.params["A2"])

    def test_config_omega0_overrides_arch(self):
        model, report = fit(_constant(), ArchSpec.single(4), FAST.with_overrides(omega0=77.0, epochs=2))
        assert model.omega0 == 77.0 and report.omega0 == 77.0

    def test_combined_model_scores_every_channel(self):
        capture = _three_phase()
        model, report = fit(capture, ArchSpec.multi(8, 8, 3), FAST)
        assert model.meta.labels == capture.labels
        assert set(report.channel_nmse_percent) == {"v_A", "v_B", "v_C"}
        assert report.final_nmse_percent == pytest.approx(np.mean(list(report.channel_nmse_percent.values())))

    def test_event_window_nmse(self):
        _, report = fit(_constant(), ArchSpec.single(4), FAST, event_window=slice(32, 64))
        assert report.transient_nmse_percent is not None
        assert report.transient_nmse_percent >= 0.0

    def test_zero_energy_target(self):
        with pytest.raises(UndefinedMetricError):
            fit(_constant(0.0), ArchSpec.single(4), FAST)

    def test_channel_count_mismatch(self):
        with pytest.raises(InvalidInputError):
            fit(_three_phase(), ArchSpec.multi(4, 4, 2), FAST)
        with pytest.raises(InvalidInputError):
            fit(_three_phase(), ArchSpec.double(4, 4), FAST)

    def test_divergence_reports_trace_and_seed(self):
        config = TrainConfig(optimizer="sgd", learning_rate=50.0, epochs=200, seed=9, loss_report_stride=1)
        with pytest.raises(TrainingDivergedError) as exc:
            fit(_constant(), ArchSpec.double(8, 8), config)
        assert exc.value.seed == 9
        assert exc.value.loss_trace
        assert exc.value.to_dict()["seed"] == 9


class TestSeparate:
    def test_separate_seeds_and_counts(self):
        capture = _three_phase()
        result = fit_separate(capture, 4, 4, FAST.with_seed(5))
        assert [r.seed for r in result.reports] == [5, 6, 7]
        assert result.param_count == 3 * (8 + 16 + 8 + 1)
        assert [m.meta.labels[0] for m in result.models] == ["v_A", "v_B", "v_C"]

    def test_task_seeds_are_run_major(self):
        tasks = separate_fit_tasks(_three_phase(), 4, 4, FAST.with_seed(20), runs=2)
        assert [t.config.seed for t in tasks] == [20, 21, 22, 23, 24, 25]
        assert [t.target.label for t in tasks] == ["v_A", "v_B", "v_C"] * 2
        assert all(t.arch.h1 == 4 and t.arch.h2 == 4 for t in tasks)

    def test_multi_run_keeps_best_complete_run(self):
        result = fit_separate(_three_phase(), 4, 4, FAST.with_seed(5), runs=2, workers=1)
        assert len(result.run_nmse) == 2
        assert result.mean_nmse_percent == min(result.run_nmse)
        assert result.stats.n == 2
        assert [r.seed for r in result.reports] in ([5, 6, 7], [8, 9, 10])

    def test_single_run_matches_direct_fits(self):
        capture = _three_phase()
        result = fit_separate(capture, 4, 4, FAST.with_seed(5))
        for c, channel in enumerate(capture):
            _, report = fit(channel, ArchSpec.double(4, 4), FAST.with_seed(5 + c))
            assert result.reports[c].final_nmse_percent == report.final_nmse_percent

    def test_all_separate_runs_failing_raises(self):
        bad = TrainConfig(optimizer="sgd", learning_rate=50.0, epochs=200)
        with pytest.raises(TrainingDivergedError):
            fit_separate(_three_phase(), 8, 8, bad, runs=2)


# ---------- Multi-run ----------


class TestMultiRun:
    def test_stats_over_seeds(self):
        result = fit_multi_run(_constant(), ArchSpec.double(4, 4), FAST.with_seed(10), runs=3, workers=1)
        assert result.seeds == [10, 11, 12]
        assert result.stats.n == 3
        values = [r.final_nmse_percent for r in result.reports]
        assert result.stats.min == min(values)
        assert result.best_report.final_nmse_percent == min(values)

    def test_failed_run_comes_back_as_value(self):
        bad = TrainConfig(optimizer="sgd", learning_rate=50.0, epochs=200, seed=2)
        outcome = run_fit_task(FitTask(_constant(), ArchSpec.double(8, 8), bad))
        assert isinstance(outcome, RunFailure)
        assert outcome.seed == 2
        assert outcome.kind == "TrainingDivergedError"

    def test_all_runs_failing_raises(self):
        bad = TrainConfig(optimizer="sgd", learning_rate=50.0, epochs=200)
        with pytest.raises(TrainingDivergedError):
            fit_multi_run(_constant(), ArchSpec.double(8, 8), bad, runs=2, workers=1)

    def test_input_errors_propagate(self):
        with pytest.raises(UndefinedMetricError):
            fit_multi_run(_constant(0.0), ArchSpec.single(3), FAST, runs=2, workers=1)

    def test_runs_must_be_positive(self):
        with pytest.raises(InvalidInputError):
            fit_multi_run(_constant(), ArchSpec.single(3), FAST, runs=0)
