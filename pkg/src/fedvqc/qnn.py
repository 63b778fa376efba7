"""Angle-embedded variational classifier and its parameter-shift gradients.

Circuit for ``n`` qubits and ``L`` layers::

    RX(x_q) on every qubit            # embedding
    H on every qubit                  # once
    repeat L times:
        RY(theta[l*n + q]) on every qubit
        CNOT(q, (q+1) % n) for q = 0..n-1   (skipped when n == 1)

Each readout qubit ``c`` yields ``p_c = (1 - <Z_c>) / 2``.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError
from .statevector import (CNOT, H, RX, RY, Statevector, init_zero_state,
                          qubit_stride, run_circuit, rx_matrices, ry_matrices)

SHIFT = np.pi / 2
FEATURE_SLACK = 1e-9
_H_MATRIX = H(0).matrix()[None]


@dataclass(frozen=True)
class CircuitSpec:
    num_qubits: int = 4
    num_layers: int = 4
    readout_qubits: tuple = (0,)

    def __post_init__(self):
        object.__setattr__(self, "readout_qubits", tuple(int(q) for q in self.readout_qubits))
        problems = []
        if not 1 <= self.num_qubits <= 20:
            problems.append(f"num_qubits must be in [1, 20], got {self.num_qubits}")
        if self.num_layers < 1:
            problems.append(f"num_layers must be >= 1, got {self.num_layers}")
        if not self.readout_qubits:
            problems.append("at least one readout qubit is required")
        if len(set(self.readout_qubits)) != len(self.readout_qubits):
            problems.append(f"readout qubits must be distinct: {self.readout_qubits}")
        if any(not 0 <= q < self.num_qubits for q in self.readout_qubits):
            problems.append(f"readout qubits {self.readout_qubits} out of range for {self.num_qubits} qubits")
        if problems:
            raise ConfigurationError(problems)

    @property
    def num_params(self):
        return self.num_layers * self.num_qubits

    @property
    def dim(self):
        return 1 << self.num_qubits

    def to_dict(self):
        return {"num_qubits": self.num_qubits, "num_layers": self.num_layers,
                "readout_qubits": list(self.readout_qubits)}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["num_qubits"]), int(d["num_layers"]), tuple(d["readout_qubits"]))


def _check_params(spec, params):
    params = np.asarray(params, dtype=float)
    if params.shape != (spec.num_params,):
        raise ConfigurationError(
            f"expected {spec.num_params} parameters ({spec.num_layers} layers x {spec.num_qubits} qubits), "
            f"got shape {params.shape}")
    if not np.all(np.isfinite(params)):
        raise ConfigurationError("parameters must be finite")
    return params


def _check_features(spec, features):
    x = np.asarray(features, dtype=float)
    if x.shape[-1] != spec.num_qubits:
        raise ConfigurationError(f"feature length {x.shape[-1]} does not match {spec.num_qubits} qubits")
    if not np.all(np.isfinite(x)) or x.min() < -FEATURE_SLACK or x.max() > np.pi + FEATURE_SLACK:
        raise ConfigurationError("features must be finite and scaled into [0, pi]")
    return x


def angle_embed(features, spec=None):
    """RX(x_q) on qubit q of |0...0>."""
    x = np.asarray(features, dtype=float)
    spec = spec or CircuitSpec(num_qubits=x.size, num_layers=1)
    x = _check_features(spec, x)
    state = init_zero_state(spec.num_qubits)
    return run_circuit(state, [RX(q, v) for q, v in enumerate(x)])


def build_ansatz(spec, params):
    params = _check_params(spec, params)
    n = spec.num_qubits
    gates = [H(q) for q in range(n)]
    for layer in range(spec.num_layers):
        gates.extend(RY(q, params[layer * n + q]) for q in range(n))
        if n > 1:
            gates.extend(CNOT(q, (q + 1) % n) for q in range(n))
    return gates


def readout_probabilities(state, spec):
    strides = [qubit_stride(spec.num_qubits, q) for q in spec.readout_qubits]
    z = kernels.z_expectations(state.amplitudes[None, :], strides)[0]
    return (1.0 - z) / 2.0


def forward(spec, params, features):
    """Class-1 probabilities ``p_c`` for each readout qubit (gate-by-gate path)."""
    state = angle_embed(features, spec)
    state = run_circuit(state, build_ansatz(spec, params))
    return [float(p) for p in readout_probabilities(state, spec)]


# -- batched engine -----------------------------------------------------------


def embed_batch(spec, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    states = np.zeros((X.shape[0], spec.dim), dtype=np.complex128)
    states[:, 0] = 1.0
    for q in range(spec.num_qubits):
        kernels.apply_1q(states, rx_matrices(X[:, q]), qubit_stride(spec.num_qubits, q))
    return states


def z_batch(spec, param_rows, X=None, embedded=None):
    """<Z> on the readout qubits for every (parameter row, sample) pair.

    Returns an array of shape ``(R, S, C)``. Row ``r * S + s`` of the working
    batch holds sample ``s`` under parameter row ``r``.
    """
    param_rows = np.atleast_2d(np.asarray(param_rows, dtype=float))
    if embedded is None:
        embedded = embed_batch(spec, X)
    R, S = param_rows.shape[0], embedded.shape[0]
    n = spec.num_qubits
    states = np.tile(embedded, (R, 1))
    for q in range(n):
        kernels.apply_1q(states, _H_MATRIX, qubit_stride(n, q))
    for layer in range(spec.num_layers):
        for q in range(n):
            angles = param_rows[:, layer * n + q]
            if R == 1:
                mats = ry_matrices(angles)
            else:
                mats = ry_matrices(np.repeat(angles, S))
            kernels.apply_1q(states, mats, qubit_stride(n, q))
        if n > 1:
            for q in range(n):
                kernels.apply_cnot(states, qubit_stride(n, q), qubit_stride(n, (q + 1) % n))
    strides = [qubit_stride(n, q) for q in spec.readout_qubits]
    return kernels.z_expectations(states, strides).reshape(R, S, len(strides))


def shifted_rows(params):
    """Parameter rows ``[theta, theta + s e_j..., theta - s e_j...]``, s = pi/2."""
    P = params.size
    rows = np.tile(params, (2 * P + 1, 1))
    idx = np.arange(P)
    rows[1 + idx, idx] += SHIFT
    rows[1 + P + idx, idx] -= SHIFT
    return rows


def z_and_shift_grad(spec, params, X=None, embedded=None):
    """Expectations ``(S, C)`` and their parameter-shift derivatives ``(P, S, C)``."""
    params = _check_params(spec, params)
    z = z_batch(spec, shifted_rows(params), X, embedded)
    P = params.size
    return z[0], (z[1:P + 1] - z[P + 1:]) / 2.0


def parameter_shift_grad(spec, params, features, target):
    """Gradient of one sample's squared error ``mean_c (y_c - p_c)**2``."""
    x = _check_features(spec, features)
    y = np.atleast_1d(np.asarray(target, dtype=float))
    if y.size != len(spec.readout_qubits):
        raise ConfigurationError(f"target has {y.size} entries for {len(spec.readout_qubits)} readouts")
    z, dz = z_and_shift_grad(spec, params, x[None, :])
    p = (1.0 - z[0]) / 2.0
    # d(y - p)^2 = 2 (p - y) dp,  dp = -dz / 2
    return -(dz[:, 0, :] * (p - y)).sum(axis=1) / y.size


def sample_loss(spec, params, features, target):
    """Squared error ``mean_c (y_c - p_c)**2`` of a single sample."""
    p = np.asarray(forward(spec, params, features))
    y = np.atleast_1d(np.asarray(target, dtype=float))
    return float(np.mean((y - p) ** 2))


# -- classifier ---------------------------------------------------------------

STRATEGIES = ("multi_readout", "one_vs_rest")


@dataclass(frozen=True)
class QNNClassifier:
    """Maps a flat parameter vector to class decisions.

    Binary problems read qubit 0 and predict class 1 when ``p >= 0.5``.
    With ``C > 2`` classes, ``multi_readout`` reads qubits ``0..C-1`` of one
    circuit; ``one_vs_rest`` trains ``C`` circuits (parameters concatenated)
    that each read qubit 0. Either way the decision is the argmax of the
    per-class probabilities, ties going to the lowest class index.
    """

    num_qubits: int = 4
    num_layers: int = 4
    num_classes: int = 2
    strategy: str = "multi_readout"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(f"multiclass strategy must be one of {STRATEGIES}")
        if self.num_classes < 2:
            raise ConfigurationError("need at least two classes")
        if self.num_outputs > self.num_qubits and self.strategy == "multi_readout":
            raise ConfigurationError(
                f"{self.num_classes} classes need {self.num_classes} readout qubits, have {self.num_qubits}")

    @property
    def binary(self):
        return self.num_classes == 2

    @property
    def num_outputs(self):
        return 1 if self.binary else self.num_classes

    @property
    def num_blocks(self):
        return self.num_classes if (self.strategy == "one_vs_rest" and not self.binary) else 1

    @property
    def spec(self):
        readout = (0,) if self.num_blocks > 1 else tuple(range(self.num_outputs))
        return CircuitSpec(self.num_qubits, self.num_layers, readout)

    @property
    def num_params(self):
        return self.num_blocks * self.spec.num_params

    def init_params(self, rng):
        return rng.uniform(0.0, 2.0 * np.pi, size=self.num_params)

    def pad(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] > self.num_qubits:
            raise ConfigurationError(f"{X.shape[1]} features exceed {self.num_qubits} qubits")
        if X.shape[1] < self.num_qubits:
            X = np.hstack([X, np.zeros((X.shape[0], self.num_qubits - X.shape[1]))])
        return _check_features(self.spec, X)

    def targets(self, labels):
        labels = np.asarray(labels, dtype=int)
        if self.binary:
            return labels.astype(float)[:, None]
        return np.eye(self.num_classes)[labels]

    def _blocks(self, params):
        params = np.asarray(params, dtype=float)
        if params.shape != (self.num_params,):
            raise ConfigurationError(f"expected {self.num_params} parameters, got shape {params.shape}")
        return params.reshape(self.num_blocks, -1)

    def probabilities(self, params, X):
        """``(S, num_outputs)`` probabilities."""
        spec = self.spec
        embedded = embed_batch(spec, self.pad(X))
        blocks = self._blocks(params)
        z = z_batch(spec, blocks, embedded=embedded)  # (blocks, S, C)
        if self.num_blocks > 1:
            z = z[:, :, 0].T
        else:
            z = z[0]
        return (1.0 - z) / 2.0

    def predict(self, params, X):
        p = self.probabilities(params, X)
        if self.binary:
            return (p[:, 0] >= 0.5).astype(int)
        return np.argmax(p, axis=1)

    def loss_and_grad(self, params, X, targets):
        """Full-batch MSE over samples and outputs and its gradient."""
        spec = self.spec
        embedded = embed_batch(spec, self.pad(X))
        targets = np.asarray(targets, dtype=float).reshape(embedded.shape[0], self.num_outputs)
        grads = []
        preds = []
        for b, block in enumerate(self._blocks(params)):
            z, dz = z_and_shift_grad(spec, block, embedded=embedded)
            y = targets[:, b:b + 1] if self.num_blocks > 1 else targets
            p = (1.0 - z) / 2.0
            preds.append(p)
            grads.append(-(dz * (p - y)[None]).sum(axis=(1, 2)) / targets.size)
        p = np.hstack(preds)
        return float(np.mean((targets - p) ** 2)), np.concatenate(grads)
