"""Local client training: MSE loss, Adam, and the full-batch iteration loop."""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, NumericError


@dataclass(frozen=True)
class LossReport:
    mse: float
    num_samples: int


def mse_loss(predictions, labels):
    """Mean squared error over all samples (and outputs, for 2-D input)."""
    p = np.asarray(predictions, dtype=float)
    y = np.asarray(labels, dtype=float)
    if p.size == 0 or y.size == 0:
        raise ValueError("mse_loss needs at least one sample")
    if p.shape != y.shape:
        raise ValueError(f"prediction shape {p.shape} != label shape {y.shape}")
    return LossReport(float(np.mean((y - p) ** 2)), int(p.shape[0]))


@dataclass(frozen=True)
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    step_size: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, num_params, step_size=0.1, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(np.zeros(num_params), np.zeros(num_params), 0, step_size, beta1, beta2, eps)

    def reset(self):
        return AdamState.fresh(self.first_moment.size, self.step_size, self.beta1, self.beta2, self.eps)


def adam_step(state, params, gradient):
    """One bias-corrected Adam update. Returns ``(new_state, new_params)``."""
    g = np.asarray(gradient, dtype=float)
    params = np.asarray(params, dtype=float)
    if g.shape != params.shape or g.shape != state.first_moment.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, gradient {g.shape}, "
                         f"moments {state.first_moment.shape}")
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite gradient component")
    t = state.step_count + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * g
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * (g * g)
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - state.step_size * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, first_moment=m, second_moment=v, step_count=t), new_params


@dataclass
class LocalResult:
    params: np.ndarray
    losses: list = field(default_factory=list)
    adam: AdamState = None


def train_local(model, X, labels, params, adam, iterations, rng_seed=None):
    """Run ``iterations`` full-batch Adam steps of ``model`` on one client's data.

    ``losses[i]`` is the MSE at the parameters *before* step ``i``. Training is
    full-batch and therefore deterministic; ``rng_seed`` is accepted for
    interface stability and currently unused.
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    if X.shape[0] == 0:
        raise ConfigurationError("client has no training data")
    if iterations < 1:
        raise ConfigurationError(f"iterations must be >= 1, got {iterations}")
    targets = model.targets(labels)
    params = np.array(params, dtype=float)
    losses = []
    for _ in range(iterations):
        loss, grad = model.loss_and_grad(params, X, targets)
        if not np.isfinite(loss):
            raise NumericError("non-finite loss")
        losses.append(LossReport(loss, X.shape[0]))
        adam, params = adam_step(adam, params, grad)
    return LocalResult(params, losses, adam)
