"""
INR core: sinusoidal MLP architectures over normalized time, their
deterministic forward evaluation, exact parameter counts and model files.
"""
from .schemas import (
    DEFAULT_OMEGA0,
    Activation,
    ArchKind,
    ArchSpec,
    DoubleLayerModel,
    InrModel,
    ModelMeta,
    MultiOutputModel,
    SingleLayerModel,
    model_from_parameters,
    parameters_of,
    trunk_as_double,
)
from .forward import (
    ForwardCache,
    activate,
    activation_derivative,
    evaluate,
    forward_double,
    forward_multi,
    forward_pass,
    forward_single,
    reconstruct,
)
from .counting import (
    combined_param_count,
    double_param_count,
    enumerate_parameters,
    enumerated_size,
    param_count,
    separate_param_count,
)
from .persistence import FORMAT_VERSION, MODEL_SUFFIX, load_model, model_from_dict, model_to_dict, save_model

__all__ = [
    "DEFAULT_OMEGA0",
    "Activation",
    "ArchKind",
    "ArchSpec",
    "DoubleLayerModel",
    "InrModel",
    "ModelMeta",
    "MultiOutputModel",
    "SingleLayerModel",
    "model_from_parameters",
    "parameters_of",
    "trunk_as_double",
    "ForwardCache",
    "activate",
    "activation_derivative",
    "evaluate",
    "forward_double",
    "forward_multi",
    "forward_pass",
    "forward_single",
    "reconstruct",
    "combined_param_count",
    "double_param_count",
    "enumerate_parameters",
    "enumerated_size",
    "param_count",
    "separate_param_count",
    "FORMAT_VERSION",
    "MODEL_SUFFIX",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "save_model",
]
