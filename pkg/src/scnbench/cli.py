"""
CLI - Command Line Interface for SCN Bench

Generate datasets, train and evaluate models, and run the benchmark suite.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from .bench import Bench
from .configurator import Algorithm, ConfigError, load_config
from .data import (
    Dataset,
    apply_normalization,
    gen_db1,
    gen_linear_sigmoid,
    load_csv,
    normalize_minmax,
    rmse,
    write_csv,
)
from .persistence import load_model, save_model, write_report
from .report_generator import ReportGenerator
from .trainer import StopReason, train
from .version import __version__

EXIT_ERROR = 1
EXIT_STALLED = 3


def cmd_gen_data(args: argparse.Namespace) -> int:
    """Write train.csv and test.csv for a synthetic task."""
    if args.dataset == "db1":
        train_ds, test_ds = gen_db1(args.n_train, args.n_test, args.seed)
    else:
        full = gen_linear_sigmoid(args.n_train + args.n_test, args.input_dim, args.seed)
        train_ds = Dataset(full.X[:args.n_train], full.T[:args.n_train],
                           provenance=full.provenance)
        test_ds = Dataset(full.X[args.n_train:], full.T[args.n_train:],
                          provenance=full.provenance)

    train_path = write_csv(os.path.join(args.out, "train.csv"), train_ds)
    test_path = write_csv(os.path.join(args.out, "test.csv"), test_ds)
    print(f"✅ Wrote {train_ds.n_samples} training rows to {train_path}")
    print(f"✅ Wrote {test_ds.n_samples} test rows to {test_path}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    """Train one model and write the model file and per-node report."""
    cfg = load_config(
        args.config,
        algorithm=args.algorithm,
        l_max=args.l_max,
        epsilon=args.epsilon,
        t_max=args.t_max,
        upsilon=args.upsilon,
        r0=args.r0,
        window=args.window,
        seed=args.seed,
        tau_mode=args.tau_mode,
        activation=args.activation,
        max_r_rounds_per_lambda=args.max_r_rounds,
        r_schedule=args.r_schedule,
        tolerance_metric=args.tolerance_metric,
    )

    train_ds = normalize_minmax(load_csv(args.train, args.target_columns))
    test_ds = None
    if args.test:
        test_ds = apply_normalization(load_csv(args.test, args.target_columns),
                                      train_ds.norm_meta)

    print(f"🧪 Training {cfg.algorithm.label} on {train_ds.n_samples} samples "
          f"(L_max={cfg.l_max}, T_max={cfg.t_max}, seed={cfg.seed})...")
    model, trace, stop_reason = train(train_ds, cfg, test_ds)

    model_path = save_model(model, args.model_out)
    report_path = write_report(trace, args.report_out)

    print(f"\n📊 Results:")
    print(f"   Nodes: {model.n_nodes}")
    print(f"   Train RMSE: {trace.final_train_rmse:.6f}")
    if trace.final_test_rmse is not None:
        print(f"   Test RMSE: {trace.final_test_rmse:.6f}")
    print(f"   Time: {trace.total_elapsed:.2f}s")
    print(f"   Stop reason: {stop_reason.value}")
    print(f"💾 Model saved to {model_path}")
    print(f"💾 Report saved to {report_path}")

    if stop_reason == StopReason.STALLED:
        print("⚠️  No admissible hidden node could be configured; "
              "try a larger T_max or upsilon")
        return EXIT_STALLED
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    """Print the RMSE of a saved model on a CSV file."""
    model = load_model(args.model)
    target_columns = args.target_columns or model.output_dim
    data = load_csv(args.data, target_columns)
    if data.input_dim != model.input_dim or data.output_dim != model.output_dim:
        raise ValueError(
            f"data has {data.input_dim} input(s) and {data.output_dim} target(s), "
            f"model expects {model.input_dim} and {model.output_dim}"
        )

    pred_norm = model.predict_normalized(data.X)
    error = rmse(pred_norm, model.norm_meta.normalize_t(data.T))
    print(f"📊 RMSE: {error:.6f} ({model.n_nodes} nodes, {data.n_samples} samples)")
    print(f"   RMSE (original scale): {rmse(model.predict(data.X), data.T):.6f}")

    if args.predictions_out:
        path = write_csv(args.predictions_out, Dataset(data.X, model.predict(data.X)))
        print(f"💾 Predictions saved to {path}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    """Run the benchmark suite and write its tables."""
    bench = Bench(args.suite, trials=args.trials, jobs=args.jobs,
                  show_progress=not args.no_progress)
    jobs_msg = f" (jobs: {args.jobs})" if args.jobs > 1 else ""
    print(f"📋 Running bench suite '{bench.suite.get('name')}' with "
          f"{bench.suite['trials']} trial(s){jobs_msg}...")
    bench.run()
    for name, rows in bench.display_tables().items():
        ReportGenerator.print_table(name, rows)
    bench.save_results(args.out)
    print(f"✅ Bench suite completed: {len(bench.tables)} table(s)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scnbench",
        description="SCN Bench - Stochastic Configuration Networks for regression",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  scnbench gen-data --out data/db1
  scnbench train --train data/db1/train.csv --test data/db1/test.csv --algorithm sc3
  scnbench train --train data/db1/train.csv --algorithm sc2 --window 15
  scnbench eval --model output/scn_model.json --data data/db1/test.csv
  scnbench bench --suite db1 --trials 20 --jobs 4
  scnbench bench --suite bench_suite.yaml --out output/bench
        """
    )
    parser.add_argument('--version', action='version', version=f'SCN Bench {__version__}')
    parser.add_argument('--verbose', action='store_true', help='Log per-node construction details')

    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')

    gen = subparsers.add_parser('gen-data', help='Generate a synthetic dataset as train/test CSV files')
    gen.add_argument('--out', type=str, required=True, help='Output directory')
    gen.add_argument('--dataset', type=str, choices=['db1', 'linear-sigmoid'], default='db1',
                     help='Dataset generator (default: db1)')
    gen.add_argument('--n-train', type=int, default=1000, help='Training rows (default: 1000)')
    gen.add_argument('--n-test', type=int, default=300, help='Test rows (default: 300)')
    gen.add_argument('--input-dim', type=int, default=9,
                     help='Inputs for linear-sigmoid (default: 9)')
    gen.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    gen.set_defaults(func=cmd_gen_data)

    tr = subparsers.add_parser('train', help='Train a model on a CSV file')
    tr.add_argument('--train', type=str, required=True, help='Training CSV')
    tr.add_argument('--test', type=str, help='Optional test CSV (normalized with training statistics)')
    tr.add_argument('--config', type=str, help='YAML/JSON file with hyperparameters')
    tr.add_argument('--algorithm', type=str, choices=[a.value for a in Algorithm],
                    help='Construction algorithm (default: sc3)')
    tr.add_argument('--l-max', type=int, help='Maximum hidden nodes (default: 50)')
    tr.add_argument('--epsilon', type=float, help='Error tolerance (default: 0.05)')
    tr.add_argument('--t-max', type=int, help='Candidates per scope round (default: 200)')
    tr.add_argument('--upsilon', type=str, metavar='LIST',
                    help='Comma-separated scope values (default: 1,5,15,30,50,100,150,200)')
    tr.add_argument('--r0', type=float, help='Initial contraction index (default: 0.9)')
    tr.add_argument('--window', type=int, help='SC-II window size K')
    tr.add_argument('--seed', type=int, help='Random seed (default: 0)')
    tr.add_argument('--tau-mode', type=str, choices=['deterministic-half', 'random'],
                    help='Growth of r after a failed round')
    tr.add_argument('--r-schedule', type=str, metavar='LIST',
                    help='Comma-separated increasing r values used instead of tau growth')
    tr.add_argument('--max-r-rounds', type=int, help='Rounds per scope value (default: 5)')
    tr.add_argument('--activation', type=str,
                    choices=['sigmoid', 'tanh', 'gaussian', 'sine', 'cosine'],
                    help='Hidden activation (default: sigmoid)')
    tr.add_argument('--tolerance-metric', type=str, choices=['rmse', 'frobenius'],
                    help='Quantity compared with epsilon (default: rmse)')
    tr.add_argument('--target-columns', type=int, default=1,
                    help='Trailing CSV columns holding targets (default: 1)')
    tr.add_argument('--model-out', type=str, default='output/scn_model.json',
                    help='Model file (default: output/scn_model.json)')
    tr.add_argument('--report-out', type=str, default='output/scn_report.csv',
                    help='Per-node report CSV (default: output/scn_report.csv)')
    tr.set_defaults(func=cmd_train)

    ev = subparsers.add_parser('eval', help='Evaluate a saved model on a CSV file')
    ev.add_argument('--model', type=str, required=True, help='Model file')
    ev.add_argument('--data', type=str, required=True, help='CSV file to evaluate on')
    ev.add_argument('--target-columns', type=int,
                    help="Trailing CSV columns holding targets (default: the model's outputs)")
    ev.add_argument('--predictions-out', type=str, help='Write inputs and predictions as CSV')
    ev.set_defaults(func=cmd_eval)

    be = subparsers.add_parser('bench', help='Run the repeated-trial benchmark suite')
    be.add_argument('--suite', type=str, default='db1',
                    help="Built-in 'db1' or a YAML/JSON suite file (default: db1)")
    be.add_argument('--trials', type=int, help='Trials per cell (default: 20)')
    be.add_argument('--out', type=str, default='output/bench', help='Output directory')
    be.add_argument('--jobs', type=int, default=1, metavar='N',
                    help='Worker threads per trial batch (default: 1 = sequential)')
    be.add_argument('--no-progress', action='store_true', help='Hide progress bars')
    be.set_defaults(func=cmd_bench)

    return parser


def main(argv: Optional[List[str]] = None) -> None:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )

    if not args.command:
        parser.print_help()
        sys.exit(EXIT_ERROR)

    if args.command == 'train':
        needs_window = args.algorithm == Algorithm.SC2.value and args.window is None
        if needs_window and not args.config:
            parser.error("--window is required with --algorithm sc2")
    if args.command == 'bench' and args.trials is not None and args.trials < 1:
        parser.error("--trials must be at least 1")

    try:
        code = args.func(args)
    except FileNotFoundError as e:
        print(f"❌ {e}")
        sys.exit(EXIT_ERROR)
    except ConfigError as e:
        print(f"❌ Invalid configuration: {e}")
        sys.exit(EXIT_ERROR)
    except (ValueError, OSError) as e:
        print(f"❌ Error: {e}")
        sys.exit(EXIT_ERROR)

    if code:
        sys.exit(code)


if __name__ == '__main__':
    main()
