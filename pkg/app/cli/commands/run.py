import argparse

from app.cli.cli import add_experiment_arguments, build_experiment, merged_values
from app.settings import settings
from app.storage import SqlStorage
from app.storage.files import write_run
from app.workers.harness import run_trials


def register(subparsers):
    parser = subparsers.add_parser("run", help="run trials of one configuration")
    add_experiment_arguments(parser)
    parser.add_argument("--k", type=int)
    parser.set_defaults(handler=cmd_run)


def cmd_run(args: argparse.Namespace) -> int:
    values = merged_values(args, ("k",))
    config = build_experiment(values)
    report = run_trials(config, workers=args.workers)

    out_dir = values.get("out_path") or settings.RESULTS_DIR
    csv_path, _ = write_run(report, out_dir)
    if args.db or settings.DATABASE_URL:
        SqlStorage(args.db).save_experiment(config, report)

    low, high = report.failure_ci
    print(
        f"failure_fraction={report.failure_fraction:.4f} [{low:.4f}, {high:.4f}] "
        f"mean_total_words={report.mean_total_words:.1f} -> {csv_path}"
    )
    return 0
