"""
inrwave: compact implicit-neural-representation models of power-system
waveform captures. A capture is fitted by a small sinusoidal MLP over
normalized time; the model's parameters are the compressed record.
"""
from .errors import (
    BudgetTooSmallError,
    CaptureParseError,
    InrWaveError,
    InvalidInputError,
    ModelFormatError,
    NoSignificantPeakError,
    NumericalError,
    TrainingDivergedError,
    UndefinedMetricError,
    UsageError,
)
from .waveform import SamplingSpec, TimeGrid, Waveform, WaveformSet, nmse_percent, normalize_time
from .capture_io import load_capture, save_capture
from .inr import ArchSpec, InrModel, load_model, param_count, reconstruct, save_model
from .training import TrainConfig, fit, fit_multi_run
from .spectrum import detect_sidebands, dft_magnitude, dominant_frequency, spectrum_report
from .synth import EventClass, SynthSpec, gen, gen_suite

__version__ = "0.1.0"

__all__ = [
    "BudgetTooSmallError",
    "CaptureParseError",
    "InrWaveError",
    "InvalidInputError",
    "ModelFormatError",
    "NoSignificantPeakError",
    "NumericalError",
    "TrainingDivergedError",
    "UndefinedMetricError",
    "UsageError",
    "SamplingSpec",
    "TimeGrid",
    "Waveform",
    "WaveformSet",
    "nmse_percent",
    "normalize_time",
    "load_capture",
    "save_capture",
    "ArchSpec",
    "InrModel",
    "load_model",
    "param_count",
    "reconstruct",
    "save_model",
    "TrainConfig",
    "fit",
    "fit_multi_run",
    "detect_sidebands",
    "dft_magnitude",
    "dominant_frequency",
    "spectrum_report",
    "EventClass",
    "SynthSpec",
    "gen",
    "gen_suite",
]
