"""Python bindings for the quantum reservoir computing core."""

from ._core import (
    ConfigError,
    DomainError,
    ParameterError,
    QrcError,
    capacity,
    capacity_single,
    esn_run,
    hamiltonian,
    lyapunov_estimate,
    mackey_glass_series,
    narma_lr_baseline,
    narma_series,
    nmse,
    predict,
    run_experiment,
    run_reservoir,
    sine_input,
    train,
    validate,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "ParameterError",
    "QrcError",
    "capacity",
    "capacity_single",
    "esn_run",
    "hamiltonian",
    "lyapunov_estimate",
    "mackey_glass_series",
    "narma_lr_baseline",
    "narma_series",
    "nmse",
    "predict",
    "run_experiment",
    "run_reservoir",
    "sine_input",
    "train",
    "validate",
]
