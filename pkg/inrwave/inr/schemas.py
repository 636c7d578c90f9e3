"""
Architecture specs and parameter containers for the three INR models:
single hidden layer, double hidden layer, and shared-trunk multi-output.
Models are immutable; training works on plain name -> array dicts and
rebuilds a model with model_from_parameters.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Union

import numpy as np

from ..errors import InvalidInputError, ModelFormatError
from ..waveform import SamplingSpec, VOLTS

DEFAULT_OMEGA0 = 30.0


class ArchKind(str, Enum):
    SINGLE = "single"
    DOUBLE = "double"
    MULTI = "multi"


class Activation(str, Enum):
    SINE = "sine"
    RELU = "relu"  # ablation only


# ---------- Architecture ----------


@dataclass(frozen=True)
class ArchSpec:
    """Layer widths, activation and first-layer frequency scale."""
    kind: ArchKind
    h: int | None = None
    h1: int | None = None
    h2: int | None = None
    channels: int | None = None
    activation: Activation = Activation.SINE
    omega0: float = DEFAULT_OMEGA0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ArchKind(self.kind))
        object.__setattr__(self, "activation", Activation(self.activation))
        if not np.isfinite(self.omega0) or self.omega0 <= 0:
            raise InvalidInputError(f"omega0 must be positive, got {self.omega0}")
        object.__setattr__(self, "omega0", float(self.omega0))
        if self.kind is ArchKind.SINGLE:
            _require_width("h", self.h)
            if self.activation is not Activation.SINE:
                raise InvalidInputError("the single-layer model only supports sine activation")
        else:
            _require_width("h1", self.h1)
            _require_width("h2", self.h2)
        if self.kind is ArchKind.MULTI:
            if self.channels is None or self.channels < 2:
                raise InvalidInputError(f"multi-output model needs channels >= 2, got {self.channels}")

    @classmethod
    def single(cls, h: int, omega0: float = DEFAULT_OMEGA0) -> ArchSpec:
        return cls(ArchKind.SINGLE, h=h, omega0=omega0)

    @classmethod
    def double(
        cls, h1: int, h2: int, activation: Activation | str = Activation.SINE, omega0: float = DEFAULT_OMEGA0
    ) -> ArchSpec:
        return cls(ArchKind.DOUBLE, h1=h1, h2=h2, activation=Activation(activation), omega0=omega0)

    @classmethod
    def multi(
        cls,
        h1: int,
        h2: int,
        channels: int,
        activation: Activation | str = Activation.SINE,
        omega0: float = DEFAULT_OMEGA0,
    ) -> ArchSpec:
        return cls(ArchKind.MULTI, h1=h1, h2=h2, channels=channels, activation=Activation(activation), omega0=omega0)

    @property
    def n_outputs(self) -> int:
        return self.channels if self.kind is ArchKind.MULTI else 1

    def with_omega0(self, omega0: float) -> ArchSpec:
        return replace(self, omega0=float(omega0))

    def shapes(self) -> dict[str, tuple[int, ...]]:
        """Parameter name -> array shape, in canonical order."""
        if self.kind is ArchKind.SINGLE:
            return {"a1": (self.h,), "b1": (self.h,), "a2": (self.h,), "b2": ()}
        trunk = {"a1": (self.h1,), "b1": (self.h1,), "A2": (self.h1, self.h2), "b2": (self.h2,)}
        if self.kind is ArchKind.DOUBLE:
            return {**trunk, "a3": (self.h2,), "b3": ()}
        return {**trunk, "A3": (self.h2, self.channels), "b3": (self.channels,)}

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "h": self.h,
            "h1": self.h1,
            "h2": self.h2,
            "channels": self.channels,
            "activation": self.activation.value,
            "omega0": self.omega0,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ArchSpec:
        return cls(
            kind=ArchKind(d["kind"]),
            h=d.get("h"),
            h1=d.get("h1"),
            h2=d.get("h2"),
            channels=d.get("channels"),
            activation=Activation(d.get("activation", "sine")),
            omega0=float(d.get("omega0", DEFAULT_OMEGA0)),
        )


def _require_width(name: str, value: int | None) -> None:
    if value is None or isinstance(value, bool) or int(value) != value or value < 1:
        raise InvalidInputError(f"{name} must be a positive integer, got {value}")


# ---------- Metadata ----------


@dataclass(frozen=True)
class ModelMeta:
    """
    What is needed to turn network outputs back into a signal:
    channel labels/units, the capture's SamplingSpec and length, and the
    per-channel RMS scale the targets were divided by before fitting.
    """
    labels: tuple[str, ...] = ("x",)
    units: tuple[str, ...] = (VOLTS,)
    sampling: SamplingSpec | None = None
    n_samples: int | None = None
    scales: tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "scales", tuple(float(s) for s in self.scales))
        if not (len(self.labels) == len(self.units) == len(self.scales)):
            raise InvalidInputError("labels, units and scales must have equal length")

    @classmethod
    def default(cls, n_outputs: int) -> ModelMeta:
        if n_outputs == 1:
            return cls()
        return cls(
            labels=tuple(f"x{i}" for i in range(n_outputs)),
            units=(VOLTS,) * n_outputs,
            scales=(1.0,) * n_outputs,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "labels": list(self.labels),
            "units": list(self.units),
            "sampling": self.sampling.to_dict() if self.sampling else None,
            "n_samples": self.n_samples,
            "scales": list(self.scales),
            "time_normalization": "t_k = (2k - (n-1)) / (n-1)",
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ModelMeta:
        sampling = d.get("sampling")
        return cls(
            labels=tuple(d["labels"]),
            units=tuple(d["units"]),
            sampling=SamplingSpec.from_dict(sampling) if sampling else None,
            n_samples=d.get("n_samples"),
            scales=tuple(d["scales"]),
        )


# ---------- Models ----------


def _check_arrays(arch: ArchSpec, params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    for name, shape in arch.shapes().items():
        if name not in params:
            raise ModelFormatError(f"missing parameter {name!r}", field=name)
        try:
            arr = np.array(params[name], dtype=float)
        except (TypeError, ValueError) as e:
            raise ModelFormatError(f"parameter {name!r} is not a numeric array: {e}", field=name) from e
        if arr.shape != shape:
            raise ModelFormatError(f"parameter {name!r} has shape {arr.shape}, expected {shape}", field=name)
        if not np.all(np.isfinite(arr)):
            raise ModelFormatError(f"parameter {name!r} contains non-finite values", field=name)
        arr.setflags(write=False)
        out[name] = arr
    return out


class _ModelBase:
    arch: ArchSpec
    meta: ModelMeta
    params: dict[str, np.ndarray]

    @property
    def omega0(self) -> float:
        return self.arch.omega0

    @property
    def activation(self) -> Activation:
        return self.arch.activation

    def __getattr__(self, name: str) -> Any:
        params = self.__dict__.get("params")
        if params is not None and name in params:
            value = params[name]
            return float(value) if value.ndim == 0 else value
        raise AttributeError(name)


@dataclass(frozen=True, eq=False)
class SingleLayerModel(_ModelBase):
    """x(t) = sum_i a2_i sin(omega0 a1_i t + b1_i) + b2. Fields: a1, b1, a2 (h,), b2 scalar."""
    arch: ArchSpec
    params: dict[str, np.ndarray] = field(repr=False)
    meta: ModelMeta = field(default_factory=ModelMeta)

    def __post_init__(self) -> None:
        if self.arch.kind is not ArchKind.SINGLE:
            raise InvalidInputError(f"SingleLayerModel needs a single arch, got {self.arch.kind.value}")
        object.__setattr__(self, "params", _check_arrays(self.arch, self.params))
        _check_meta(self.meta, 1)

    @property
    def h(self) -> int:
        return self.arch.h


@dataclass(frozen=True, eq=False)
class DoubleLayerModel(_ModelBase):
    """
    z = act(omega0 a1 t + b1); y = act(z @ A2 + b2); x = y @ a3 + b3.
    A2 is (h1, h2); b2 has one bias per second-layer neuron.
    """
    arch: ArchSpec
    params: dict[str, np.ndarray] = field(repr=False)
    meta: ModelMeta = field(default_factory=ModelMeta)

    def __post_init__(self) -> None:
        if self.arch.kind is not ArchKind.DOUBLE:
            raise InvalidInputError(f"DoubleLayerModel needs a double arch, got {self.arch.kind.value}")
        object.__setattr__(self, "params", _check_arrays(self.arch, self.params))
        _check_meta(self.meta, 1)

    @property
    def h1(self) -> int:
        return self.arch.h1

    @property
    def h2(self) -> int:
        return self.arch.h2


@dataclass(frozen=True, eq=False)
class MultiOutputModel(_ModelBase):
    """Double-layer trunk shared by C outputs: x_c = y @ A3[:, c] + b3[c]."""
    arch: ArchSpec
    params: dict[str, np.ndarray] = field(repr=False)
    meta: ModelMeta = field(default_factory=lambda: ModelMeta.default(3))

    def __post_init__(self) -> None:
        if self.arch.kind is not ArchKind.MULTI:
            raise InvalidInputError(f"MultiOutputModel needs a multi arch, got {self.arch.kind.value}")
        object.__setattr__(self, "params", _check_arrays(self.arch, self.params))
        _check_meta(self.meta, self.arch.channels)

    @property
    def h1(self) -> int:
        return self.arch.h1

    @property
    def h2(self) -> int:
        return self.arch.h2

    @property
    def channels(self) -> int:
        return self.arch.channels

    @property
    def labels(self) -> tuple[str, ...]:
        return self.meta.labels


InrModel = Union[SingleLayerModel, DoubleLayerModel, MultiOutputModel]

_MODEL_TYPES = {
    ArchKind.SINGLE: SingleLayerModel,
    ArchKind.DOUBLE: DoubleLayerModel,
    ArchKind.MULTI: MultiOutputModel,
}


def _check_meta(meta: ModelMeta, n_outputs: int) -> None:
    if len(meta.labels) != n_outputs:
        raise ModelFormatError(
            f"model has {n_outputs} outputs but metadata names {len(meta.labels)} channels", field="labels"
        )


def model_from_parameters(arch: ArchSpec, params: dict[str, Any], meta: ModelMeta | None = None) -> InrModel:
    """Build the model type matching arch.kind; arrays are copied and frozen."""
    cls = _MODEL_TYPES[arch.kind]
    return cls(arch=arch, params=dict(params), meta=meta or ModelMeta.default(arch.n_outputs))


def parameters_of(model: InrModel) -> dict[str, np.ndarray]:
    """Writable copies of the model's parameters in canonical order."""
    return {name: np.array(model.params[name], dtype=float) for name in model.arch.shapes()}


def trunk_as_double(model: MultiOutputModel, channel: int) -> DoubleLayerModel:
    """The double-layer model computing output `channel` of a multi-output model."""
    if not 0 <= channel < model.channels:
        raise InvalidInputError(f"channel index {channel} out of range 0..{model.channels - 1}")
    arch = ArchSpec.double(model.h1, model.h2, model.activation, model.omega0)
    p = model.params
    params = {
        "a1": p["a1"],
        "b1": p["b1"],
        "A2": p["A2"],
        "b2": p["b2"],
        "a3": p["A3"][:, channel],
        "b3": p["b3"][channel],
    }
    meta = ModelMeta(
        labels=(model.meta.labels[channel],),
        units=(model.meta.units[channel],),
        sampling=model.meta.sampling,
        n_samples=model.meta.n_samples,
        scales=(model.meta.scales[channel],),
    )
    return DoubleLayerModel(arch=arch, params=params, meta=meta)
