import argparse

from app.cli.cli import add_experiment_arguments, build_experiment, merged_values
from app.errors import ConfigError
from app.schemas.experiment import MechanismKind
from app.settings import settings
from app.storage import SqlStorage
from app.storage.files import write_sweep
from app.utils.utils import parse_number_list
from app.workers.sweep import run_sweep


def register(subparsers):
    parser = subparsers.add_parser("sweep", help="scaling table over k and alpha")
    add_experiment_arguments(parser)
    parser.add_argument("--ks", default="4,16,64", help="comma separated site counts")
    parser.add_argument("--alphas", help="comma separated relative errors")
    parser.add_argument("--mechanisms", default="robust,deterministic", help="comma separated mechanisms")
    parser.set_defaults(handler=cmd_sweep)


def cmd_sweep(args: argparse.Namespace) -> int:
    values = merged_values(args)
    base = build_experiment(values)
    try:
        ks = parse_number_list(args.ks, int)
        alphas = parse_number_list(args.alphas, float)
        mechanisms = [MechanismKind(m.strip()) for m in args.mechanisms.split(",") if m.strip()]
    except ValueError as e:
        raise ConfigError(f"Bad sweep list: {e}") from e
    if not ks:
        raise ConfigError("--ks must name at least one k")

    report, aggregates = run_sweep(base, ks, alphas or None, mechanisms or None, workers=args.workers)
    csv_path, _ = write_sweep(report, values.get("out_path") or settings.RESULTS_DIR)
    if args.db or settings.DATABASE_URL:
        storage = SqlStorage(args.db)
        for aggregate in aggregates:
            storage.save_experiment(
                base.model_copy(update={"k": aggregate.k, "alpha": aggregate.alpha, "mechanism": MechanismKind(aggregate.mechanism)}),
                aggregate,
            )

    exponents = ", ".join(
        f"{key}={value:.3f}" if value is not None else f"{key}=n/a" for key, value in report.exponents.items()
    )
    print(f"{len(report.rows)} configurations; exponents: {exponents} -> {csv_path}")
    return 0
