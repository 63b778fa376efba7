"""Experiment configuration: defaults, validation, YAML I/O, and hashing."""

import dataclasses
import hashlib
import json
from dataclasses import dataclass

import yaml

from .data import DNA_FEATURE_MODES
from .errors import ConfigurationError
from .qnn import STRATEGIES

AGGREGATIONS = ("fedavg_unweighted", "fedavg_weighted")
TRANSPORTS = ("inprocess", "socket")
STRAGGLER_MODES = ("strict", "tolerate_stragglers")
BUILTIN_DATASETS = ("iris", "breast_cancer", "dna")

# flag / file aliases that mirror the federated-training input names
ALIASES = {"learning_rate": "step_size", "rounds": "max_iterations"}

PROFILES = {
    "default": {},
    # 100 local Adam steps per round, fewer rounds
    "long_local": {"local_iterations": 100, "max_iterations": 10},
}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "iris"
    num_qubits: int = 4
    num_layers: int = 4
    num_clients: int = 3
    max_iterations: int = 100
    local_iterations: int = 1
    step_size: float = 0.1
    test_fraction: float = 0.2
    num_features_to_use: int = 4
    num_data_points: int = None
    trials: int = 10
    seed: int = 0
    aggregation: str = "fedavg_unweighted"
    multiclass_strategy: str = "multi_readout"
    reset_adam: bool = True
    transport: str = "inprocess"
    straggler_mode: str = "strict"
    round_timeout: float = 30.0
    dna_samples: int = 200
    dna_seed: int = 42
    dna_features: str = "motif_window"
    csv_label_column: str = "class"
    csv_nominal_columns: tuple = ()
    csv_ignore_columns: tuple = ()

    def problems(self):
        p = []

        def need(cond, msg):
            if not cond:
                p.append(msg)

        ds = self.dataset
        need(ds in BUILTIN_DATASETS or (ds.startswith("csv:") and len(ds) > 4),
             f"dataset must be one of {BUILTIN_DATASETS} or 'csv:<path>', got {ds!r}")
        need(1 <= self.num_qubits <= 20, f"num_qubits must be in [1, 20], got {self.num_qubits}")
        need(self.num_layers >= 1, f"num_layers must be >= 1, got {self.num_layers}")
        need(self.num_clients >= 1, f"num_clients must be >= 1, got {self.num_clients}")
        need(self.max_iterations >= 1, f"max_iterations (rounds) must be >= 1, got {self.max_iterations}")
        need(self.local_iterations >= 1, f"local_iterations must be >= 1, got {self.local_iterations}")
        need(self.step_size > 0, f"step_size must be > 0, got {self.step_size}")
        need(0 < self.test_fraction < 1, f"test_fraction must be in (0, 1), got {self.test_fraction}")
        need(1 <= self.num_features_to_use <= self.num_qubits,
             f"num_features_to_use must be in [1, num_qubits={self.num_qubits}], got {self.num_features_to_use}")
        need(self.num_data_points is None or self.num_data_points >= 4,
             f"num_data_points must be >= 4 when set, got {self.num_data_points}")
        need(self.trials >= 1, f"trials must be >= 1, got {self.trials}")
        need(self.seed >= 0, f"seed must be >= 0, got {self.seed}")
        need(self.aggregation in AGGREGATIONS, f"aggregation must be one of {AGGREGATIONS}")
        need(self.multiclass_strategy in STRATEGIES, f"multiclass_strategy must be one of {STRATEGIES}")
        need(self.transport in TRANSPORTS, f"transport must be one of {TRANSPORTS}")
        need(self.straggler_mode in STRAGGLER_MODES, f"straggler_mode must be one of {STRAGGLER_MODES}")
        need(self.round_timeout > 0, "round_timeout must be > 0")
        need(self.dna_samples >= 2 and self.dna_samples % 2 == 0,
             f"dna_samples must be a positive even number, got {self.dna_samples}")
        need(self.dna_features in DNA_FEATURE_MODES, f"dna_features must be one of {DNA_FEATURE_MODES}")
        return p

    def validate(self):
        p = self.problems()
        if p:
            raise ConfigurationError(p)
        return self

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["csv_nominal_columns"] = list(self.csv_nominal_columns)
        d["csv_ignore_columns"] = list(self.csv_ignore_columns)
        return d

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def run_name(self):
        return f"{self.config_hash()[:12]}-seed{self.seed}"

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name, value):
    if value is None:
        return None
    default = _FIELDS[name].default
    if name in ("csv_nominal_columns", "csv_ignore_columns"):
        if isinstance(value, str):
            value = [v for v in value.split(",") if v]
        return tuple(value)
    if name == "num_data_points":
        return int(value)
    if isinstance(default, bool):
        if isinstance(value, str):
            if value.lower() in ("1", "true", "yes", "on"):
                return True
            if value.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"{value!r} is not a boolean")
        return bool(value)
    if isinstance(default, int):
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"{value!r} is not an integer")
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


def config_from_mapping(mapping, base=None):
    """Build a config from a mapping, applying aliases and type coercion.

    Unknown keys and uncoercible values are all reported in one error.
    """
    base = base or ExperimentConfig()
    changes, problems = {}, []
    mapping = dict(mapping or {})
    profile = mapping.pop("profile", None)
    if profile is not None:
        if profile not in PROFILES:
            problems.append(f"unknown profile {profile!r}; available: {sorted(PROFILES)}")
        else:
            changes.update(PROFILES[profile])
    for key, value in mapping.items():
        name = ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
        if name not in _FIELDS:
            problems.append(f"unknown config key {key!r}")
            continue
        try:
            changes[name] = _coerce(name, value)
        except (TypeError, ValueError) as exc:
            problems.append(f"{key}: {exc}")
    if problems:
        raise ConfigurationError(problems)
    return dataclasses.replace(base, **changes)


def load_config(path, overrides=None):
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a key-value mapping")
    data.update(overrides or {})
    return config_from_mapping(data)


def dump_config(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config.to_dict(), fh, sort_keys=True)
