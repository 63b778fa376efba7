"""Command-line entry point: ``fedvqc run | sweep-clients | gen-dna | report``."""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import data as datamod
from .config import PROFILES, ExperimentConfig, config_from_mapping, load_config
from .errors import ConfigurationError, FedVQCError
from .experiment import run_experiment, sweep_clients
from .metrics import aggregate_trials, read_trajectory_csv

# flag name -> config field; flags mirror the federated-training input names
CONFIG_FLAGS = {
    "dataset": str,
    "max_iterations": int,
    "num_clients": int,
    "num_data_points": int,
    "num_features_to_use": int,
    "learning_rate": float,
    "local_iterations": int,
    "num_qubits": int,
    "num_layers": int,
    "test_fraction": float,
    "trials": int,
    "seed": int,
    "aggregation": str,
    "multiclass_strategy": str,
    "transport": str,
    "straggler_mode": str,
    "dna_features": str,
}


def _add_config_flags(p):
    p.add_argument("--config", type=Path, help="YAML key-value experiment file")
    p.add_argument("--profile", choices=sorted(PROFILES), help="preset overrides")
    for name, typ in CONFIG_FLAGS.items():
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")
    p.add_argument("--out", type=Path, default=None, help="run-directory root (default: $FEDVQC_RUNS_DIR or ./runs)")


def resolve_config(args):
    overrides = {}
    if args.profile:
        overrides["profile"] = args.profile
    for name in CONFIG_FLAGS:
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    problems = []
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            problems.append(f"--set expects KEY=VALUE, got {item!r}")
        else:
            overrides[key.strip()] = value.strip()
    if problems:
        raise ConfigurationError(problems)
    if args.config:
        config = load_config(args.config, overrides)
    else:
        config = config_from_mapping(overrides, ExperimentConfig())
    return config.validate()


def cmd_run(args):
    config = resolve_config(args)
    result = run_experiment(config, out_root=args.out)
    summary = result.summary()
    print(f"run directory: {result.run_dir}")
    print(f"mean final accuracy over {len(result.trials)} trial(s): {summary['mean']['accuracy']:.4f}")
    return 0


def cmd_sweep(args):
    config = resolve_config(args)
    counts = [int(k) for k in args.client_counts.split(",") if k.strip()]
    rows = sweep_clients(config, counts, out_root=args.out)
    print("num_clients,mean_final_accuracy,std_final_accuracy")
    for r in rows:
        print(f"{r['num_clients']},{r['mean_final_accuracy']:.4f},{r['std_final_accuracy']:.4f}")
    return 0


def cmd_gen_dna(args):
    if args.num_samples < 2 or args.num_samples % 2:
        raise ConfigurationError(f"--num-samples must be a positive even number, got {args.num_samples}")
    ds = datamod.generate_dna(args.num_samples, args.seed, features=args.features)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    datamod.write_dna_csv(ds, args.out)
    print(f"wrote {len(ds)} sequences to {args.out}")
    return 0


def cmd_report(args):
    run_dir = args.run_dir
    report = json.loads((run_dir / "report.json").read_text(encoding="utf-8"))
    curve = aggregate_trials(read_trajectory_csv(run_dir / "trajectory.csv"))
    m = report["mean"]
    print(f"dataset={report['dataset']} clients={report['num_clients']} trials={report['trials']}")
    print(f"accuracy={m['accuracy']:.4f} precision={m['precision']:.4f} recall={m['recall']:.4f} f1={m['f1']:.4f}")
    print(f"mean accuracy at round {int(curve.rounds[-1])}: {curve.mean[-1]:.4f} (sd {curve.std[-1]:.4f})")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="fedvqc", description="Federated variational-circuit classifier experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run all trials of one configuration")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep-clients", help="mean final accuracy versus number of clients")
    _add_config_flags(p)
    p.add_argument("--client-counts", default="1,2,3,4,5")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-dna", help="write the synthetic promoter dataset as CSV")
    p.add_argument("--num-samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--features", choices=datamod.DNA_FEATURE_MODES, default="motif_window")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen_dna)

    p = sub.add_parser("report", help="summarise a finished run directory")
    p.add_argument("run_dir", type=Path)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print("invalid configuration:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return 2
    except (FedVQCError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
