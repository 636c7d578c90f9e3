"""
Trainer: initialization, MSE loss with analytic gradients, Adam/SGD,
the fitting loop and the multi-run protocol.
"""
from .config import TrainConfig, build_train_config, load_train_config
from .rng import SeededRNG
from .init import init_model, init_parameters
from .gradients import (
    Gradients,
    backward,
    check_gradients,
    relative_error,
    finite_difference_gradients,
    loss_and_gradients,
    mse_loss,
)
from .optimizers import SGD, Adam, make_optimizer
from .trainer import TrainReport, fit, omega0_for_capture
from .multi_run import (
    FitTask,
    MultiRunResult,
    SeparateFit,
    NmseStats,
    RunFailure,
    fit_multi_run,
    fit_separate,
    separate_fit_tasks,
    run_fit_task,
    split_outcomes,
)

__all__ = [
    "TrainConfig",
    "build_train_config",
    "load_train_config",
    "SeededRNG",
    "init_model",
    "init_parameters",
    "Gradients",
    "backward",
    "check_gradients",
    "relative_error",
    "finite_difference_gradients",
    "loss_and_gradients",
    "mse_loss",
    "SGD",
    "Adam",
    "make_optimizer",
    "SeparateFit",
    "TrainReport",
    "fit",
    "fit_separate",
    "omega0_for_capture",
    "FitTask",
    "MultiRunResult",
    "NmseStats",
    "RunFailure",
    "fit_multi_run",
    "separate_fit_tasks",
    "run_fit_task",
    "split_outcomes",
]
