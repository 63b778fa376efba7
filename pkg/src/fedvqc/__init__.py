"""Federated training of angle-embedded variational quantum classifiers on a
dense statevector simulator."""

from ._accel import BACKEND
from .config import ExperimentConfig
from .experiment import run_experiment, sweep_clients
from .qnn import CircuitSpec, QNNClassifier, forward, parameter_shift_grad
from .statevector import Statevector, apply_gate, expectation, init_zero_state

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CircuitSpec", "ExperimentConfig", "QNNClassifier", "Statevector", "apply_gate",
    "expectation", "forward", "init_zero_state", "parameter_shift_grad", "run_experiment", "sweep_clients",
]
