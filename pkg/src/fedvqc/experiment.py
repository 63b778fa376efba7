"""End-to-end federated runs: data preparation, rounds, evaluation, outputs."""

import csv
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import data as datamod
from .config import ExperimentConfig, dump_config
from .errors import ConfigurationError
from .federated import (FederatedClient, GlobalModel, InProcessTransport, LoopbackSocketTransport,
                        ServerState, run_round)
from .metrics import (TrajectoryLog, aggregate_trials, classification_report, write_json,
                      write_mean_curve_csv, write_trajectory_csv)
from .qnn import QNNClassifier

log = logging.getLogger(__name__)

RUNS_DIR_ENV = "FEDVQC_RUNS_DIR"


def load_dataset(config):
    if config.dataset == "iris":
        return datamod.load_iris()
    if config.dataset == "breast_cancer":
        return datamod.load_breast_cancer()
    if config.dataset == "dna":
        return datamod.generate_dna(config.dna_samples, config.dna_seed, features=config.dna_features)
    path = config.dataset[len("csv:"):]
    schema = datamod.CsvSchema(config.csv_label_column, tuple(config.csv_nominal_columns),
                               tuple(config.csv_ignore_columns))
    return datamod.load_csv(path, schema, name=Path(path).stem)


def subsample(ds, num_points, rng):
    """Stratified subsample of ``num_points`` rows (the ``num_data_points`` input)."""
    if num_points is None or num_points >= len(ds):
        return ds
    keep = datamod.stratified_test_counts(ds.class_counts(), num_points / len(ds))
    idx = []
    for c in range(ds.num_classes):
        members = np.flatnonzero(ds.labels == c)
        idx.extend(members[rng.permutation(members.size)][:keep[c]])
    return ds.subset(np.sort(np.array(idx, dtype=int)))


@dataclass
class TrialResult:
    trial: int
    log: TrajectoryLog
    report: object
    params: np.ndarray
    client_losses: list = field(default_factory=list)


def _make_transport(config):
    return LoopbackSocketTransport() if config.transport == "socket" else InProcessTransport()


def run_trial(config, trial, dataset=None, transport=None):
    """One seeded execution of the federated training procedure."""
    config.validate()
    ds = dataset if dataset is not None else load_dataset(config)
    split_ss, init_ss, sub_ss = np.random.SeedSequence([config.seed, trial]).spawn(3)
    ds = subsample(ds, config.num_data_points, np.random.default_rng(sub_ss))
    split = datamod.split_and_partition(ds, config.test_fraction, config.num_clients, np.random.default_rng(split_ss))
    num_features = min(config.num_features_to_use, ds.num_features)
    scaled, _ = datamod.select_and_scale(ds, num_features, split.train_idx, config.num_qubits)

    model = QNNClassifier(config.num_qubits, config.num_layers, ds.num_classes, config.multiclass_strategy)
    clients = [
        FederatedClient(k, model, scaled.features[shard], scaled.labels[shard],
                        config.local_iterations, config.step_size, config.reset_adam)
        for k, shard in enumerate(split.client_shards)
    ]
    X_test = scaled.features[split.test_idx]
    y_test = scaled.labels[split.test_idx]
    t_test = model.targets(y_test)

    def evaluate(params):
        p = model.probabilities(params, X_test)
        acc = float(np.mean(model.predict(params, X_test) == y_test))
        return acc, float(np.mean((t_test - p) ** 2))

    state = ServerState(GlobalModel(model.init_params(np.random.default_rng(init_ss)), 0), model.num_params,
                        weighted=config.aggregation == "fedavg_weighted", mode=config.straggler_mode,
                        timeout=config.round_timeout)
    traj = TrajectoryLog(trial)
    own_transport = transport is None
    transport = transport or _make_transport(config)
    try:
        for _ in range(config.max_iterations):
            _, metrics = run_round(state, clients, transport, evaluate)
            traj.append(metrics.round, metrics.accuracy, metrics.loss)
    finally:
        if own_transport:
            transport.close()
    final = state.model.params
    report = classification_report(model.predict(final, X_test), y_test, ds.num_classes)
    losses = [(r, trial, cid, it, mse) for c in clients for (r, cid, it, mse) in c.loss_log]
    losses.sort()
    return TrialResult(trial, traj, report, np.array(final), losses)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trials: list
    run_dir: Path = None

    @property
    def logs(self):
        return [t.log for t in self.trials]

    @property
    def mean_curve(self):
        return aggregate_trials(self.logs)

    @property
    def final_accuracies(self):
        return np.array([t.log.accuracy[-1] for t in self.trials])

    def summary(self, class_names=None):
        reports = [t.report.to_dict(class_names) for t in self.trials]
        keys = ("accuracy", "precision", "recall", "f1")
        return {
            "dataset": self.config.dataset,
            "num_clients": self.config.num_clients,
            "trials": len(self.trials),
            "mean": {k: float(np.mean([r[k] for r in reports])) for k in keys},
            "per_trial": reports,
        }


def runs_root(out_root=None):
    return Path(out_root or os.environ.get(RUNS_DIR_ENV, "runs"))


def run_experiment(config, out_root=None, write=True, dataset=None):
    """All trials of ``config``; writes outputs under ``<root>/<hash>-seed<seed>``."""
    config.validate()
    ds = dataset if dataset is not None else load_dataset(config)
    trials = []
    for t in range(config.trials):
        trials.append(run_trial(config, t, ds))
        log.info("trial %d/%d: final accuracy %.3f", t + 1, config.trials, trials[-1].log.accuracy[-1])
    result = ExperimentResult(config, trials)
    if write:
        result.run_dir = write_outputs(result, runs_root(out_root) / config.run_name(), ds.class_names)
    return result


def write_outputs(result, run_dir, class_names=None):
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    dump_config(result.config, run_dir / "config.yaml")
    write_trajectory_csv(run_dir / "trajectory.csv", result.logs)
    write_mean_curve_csv(run_dir / "mean_curve.csv", result.mean_curve)
    write_json(run_dir / "report.json", result.summary(class_names))
    with open(run_dir / "client_losses.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round", "trial", "client_id", "iteration", "mse"])
        for t in result.trials:
            for r, trial, cid, it, mse in t.client_losses:
                w.writerow([r, trial, cid, it, repr(mse)])
    return run_dir


def sweep_clients(config, client_counts, out_root=None, write=True):
    """Mean final accuracy per client count, sharing the base seed across counts."""
    counts = [int(k) for k in client_counts]
    problems = []
    if not counts:
        problems.append("client_counts is empty")
    if len(set(counts)) != len(counts):
        problems.append(f"duplicate client counts in {counts}")
    problems += [f"client count must be >= 1, got {k}" for k in counts if k < 1]
    if problems:
        raise ConfigurationError(problems)
    config.validate()
    ds = load_dataset(config)
    rows = []
    for k in counts:
        res = run_experiment(config.replace(num_clients=k), out_root=out_root, write=write, dataset=ds)
        acc = res.final_accuracies
        rows.append({"num_clients": k, "mean_final_accuracy": float(acc.mean()),
                     "std_final_accuracy": float(acc.std(ddof=1)) if acc.size > 1 else 0.0,
                     "trials": int(acc.size)})
    if write:
        out = runs_root(out_root) / f"sweep-{config.run_name()}"
        out.mkdir(parents=True, exist_ok=True)
        dump_config(config, out / "config.yaml")
        with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return rows
