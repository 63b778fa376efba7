"""Dense statevector simulation of few-qubit circuits.

Conventions:

* qubit 0 is the most significant bit of the basis-state index, so on three
  qubits ``|100>`` is index 4;
* ``RX(t) = exp(-i t X / 2)`` and ``RY(t) = exp(-i t Y / 2)``;
* ``CNOT`` targets are ``(control, target)``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigurationError, OracleScopeError

MAX_QUBITS = 20
MAX_ORACLE_QUBITS = 10
GATE_KINDS = ("H", "X", "Y", "RX", "RY", "CNOT")

_SQRT1_2 = 1.0 / np.sqrt(2.0)
_FIXED = {
    "H": np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
}
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def rx_matrix(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry_matrix(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx_matrices(thetas):
    """Stack of RX matrices, shape ``(len(thetas), 2, 2)``."""
    thetas = np.asarray(thetas, dtype=float)
    c = np.cos(thetas / 2)
    s = -1j * np.sin(thetas / 2)
    out = np.empty((thetas.size, 2, 2), dtype=complex)
    out[:, 0, 0] = c
    out[:, 0, 1] = s
    out[:, 1, 0] = s
    out[:, 1, 1] = c
    return out


def ry_matrices(thetas):
    thetas = np.asarray(thetas, dtype=float)
    c = np.cos(thetas / 2)
    s = np.sin(thetas / 2)
    out = np.empty((thetas.size, 2, 2), dtype=complex)
    out[:, 0, 0] = c
    out[:, 0, 1] = -s
    out[:, 1, 0] = s
    out[:, 1, 1] = c
    return out


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ConfigurationError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(t) for t in np.atleast_1d(self.targets))
        object.__setattr__(self, "targets", targets)
        arity = 2 if self.kind == "CNOT" else 1
        if len(targets) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubit(s), got {targets}")
        if len(set(targets)) != arity:
            raise ValueError(f"{self.kind} qubits must be distinct, got {targets}")
        if any(t < 0 for t in targets):
            raise ValueError(f"negative qubit index in {targets}")
        if not np.isfinite(self.angle):
            raise ValueError("gate angle must be finite")

    def matrix(self):
        if self.kind == "RX":
            return rx_matrix(self.angle)
        if self.kind == "RY":
            return ry_matrix(self.angle)
        if self.kind == "CNOT":
            return CNOT_MATRIX.copy()
        return _FIXED[self.kind].copy()

    def __repr__(self):
        qs = ",".join(f"q{t}" for t in self.targets)
        if self.kind in ("RX", "RY"):
            return f"{self.kind}({self.angle:.6g}) {qs}"
        return f"{self.kind} {qs}"


def H(q):
    return Gate("H", (q,))


def X(q):
    return Gate("X", (q,))


def Y(q):
    return Gate("Y", (q,))


def RX(q, angle):
    return Gate("RX", (q,), float(angle))


def RY(q, angle):
    return Gate("RY", (q,), float(angle))


def CNOT(control, target):
    return Gate("CNOT", (control, target))


@dataclass(frozen=True)
class Observable:
    """Single-qubit Pauli observable; only ``Z`` is supported."""

    qubit: int
    kind: str = "Z"

    def __post_init__(self):
        if self.kind != "Z":
            raise ConfigurationError(f"unsupported observable {self.kind!r}")

    def matrix(self):
        return PAULI_Z.copy()


@dataclass
class Statevector:
    amplitudes: np.ndarray
    num_qubits: int = field(default=None)

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be one-dimensional")
        n = amps.size.bit_length() - 1
        if amps.size != 1 << n or n < 1:
            raise ValueError(f"amplitude count {amps.size} is not 2**n with n >= 1")
        if self.num_qubits is not None and self.num_qubits != n:
            raise ValueError(f"{amps.size} amplitudes do not describe {self.num_qubits} qubits")
        self.amplitudes = amps
        self.num_qubits = n

    def norm_squared(self):
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def copy(self):
        return Statevector(self.amplitudes.copy())


def init_zero_state(num_qubits):
    if not isinstance(num_qubits, (int, np.integer)) or not 1 <= num_qubits <= MAX_QUBITS:
        raise ConfigurationError(f"num_qubits must be an integer in [1, {MAX_QUBITS}], got {num_qubits!r}")
    amps = np.zeros(1 << int(num_qubits), dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(amps)


def qubit_stride(num_qubits, qubit):
    return 1 << (num_qubits - 1 - qubit)


def _check_targets(gate, num_qubits):
    for t in gate.targets:
        if t >= num_qubits:
            raise ValueError(f"{gate!r} addresses qubit {t} of a {num_qubits}-qubit state")


def apply_gate_inplace(batch, num_qubits, gate):
    """Apply ``gate`` to every row of a ``(B, 2**n)`` array, in place."""
    _check_targets(gate, num_qubits)
    if gate.kind == "CNOT":
        c, t = gate.targets
        kernels.apply_cnot(batch, qubit_stride(num_qubits, c), qubit_stride(num_qubits, t))
    else:
        kernels.apply_1q(batch, gate.matrix()[None], qubit_stride(num_qubits, gate.targets[0]))
    return batch


def apply_gate(state, gate):
    """Return a new state with ``gate`` applied; ``state`` is left untouched."""
    batch = state.amplitudes.copy()[None, :]
    apply_gate_inplace(batch, state.num_qubits, gate)
    return Statevector(batch[0])


def run_circuit(state, circuit):
    batch = state.amplitudes.copy()[None, :]
    for gate in circuit:
        apply_gate_inplace(batch, state.num_qubits, gate)
    return Statevector(batch[0])


def expectation(state, obs):
    """<psi|Z_q|psi> as a float."""
    if not 0 <= obs.qubit < state.num_qubits:
        raise ValueError(f"observable qubit {obs.qubit} out of range")
    z = kernels.z_expectations(state.amplitudes[None, :], [qubit_stride(state.num_qubits, obs.qubit)])
    return float(z[0, 0])


# -- dense oracle (tests only) ------------------------------------------------


def embed_operator(matrix, targets, num_qubits):
    """Full ``2**n x 2**n`` operator for a 1- or 2-qubit matrix.

    Built from Kronecker products of projectors so that non-adjacent and
    reversed (control > target) qubit pairs are handled without swaps.
    """
    if num_qubits > MAX_ORACLE_QUBITS:
        raise OracleScopeError(f"dense oracle limited to {MAX_ORACLE_QUBITS} qubits")
    eye = np.eye(2, dtype=complex)
    units = [np.array([[1, 0], [0, 0]], dtype=complex), np.array([[0, 1], [0, 0]], dtype=complex),
             np.array([[0, 0], [1, 0]], dtype=complex), np.array([[0, 0], [0, 1]], dtype=complex)]
    k = len(targets)
    dim = 1 << num_qubits
    full = np.zeros((dim, dim), dtype=complex)
    # matrix[r, c] with r, c written in binary over the targets (first target = MSB)
    for r in range(1 << k):
        for c in range(1 << k):
            coeff = matrix[r, c]
            if coeff == 0:
                continue
            factors = [eye] * num_qubits
            for pos, q in enumerate(targets):
                rb = (r >> (k - 1 - pos)) & 1
                cb = (c >> (k - 1 - pos)) & 1
                factors[q] = units[2 * rb + cb]
            term = factors[0]
            for f in factors[1:]:
                term = np.kron(term, f)
            full += coeff * term
    return full


def dense_oracle_apply(state, circuit):
    """Multiply out the full circuit unitary and apply it once."""
    n = state.num_qubits
    if n > MAX_ORACLE_QUBITS:
        raise OracleScopeError(f"dense oracle limited to {MAX_ORACLE_QUBITS} qubits, got {n}")
    unitary = np.eye(1 << n, dtype=complex)
    for gate in circuit:
        _check_targets(gate, n)
        unitary = embed_operator(gate.matrix(), gate.targets, n) @ unitary
    return Statevector(unitary @ state.amplitudes)


def dense_expectation(state, obs):
    op = embed_operator(obs.matrix(), (obs.qubit,), state.num_qubits)
    return np.vdot(state.amplitudes, op @ state.amplitudes)
