import argparse

from pydantic import ValidationError

from app.errors import ConfigError
from app.schemas.audit import AuditConfig
from app.settings import settings
from app.storage.files import format_audit, write_audit
from app.utils.utils import ceil_sqrt, parse_number_list
from app.workers.auditor import audit_partial_dp

MAX_AUDIT_S = 4
EXIT_CODES = {"pass": 0, "violation": 1, "inconclusive": 3}


def register(subparsers):
    parser = subparsers.add_parser("audit", help="empirical partial-DP audit on a small pinned configuration")
    parser.add_argument("--k", type=int)
    parser.add_argument("--block-size", dest="block_size", type=int)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--items", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--noise-mode", dest="noise_mode", choices=["standard", "disabled"])
    parser.add_argument("--initial-count", dest="initial_count", type=int)
    parser.add_argument("--target", help="site,block where the two databases differ")
    parser.add_argument("--target-value", dest="target_value", type=int)
    parser.add_argument("--thresholds", help="database D: rows separated by ';', thresholds by ','")
    parser.add_argument("--identical", action="store_true", default=None, help="audit D against itself")
    parser.add_argument("--bucket-width", dest="bucket_width", type=float)
    parser.add_argument("--min-count", dest="min_count", type=int)
    parser.add_argument("--out", dest="out_path")
    parser.add_argument("--workers", type=int)
    parser.set_defaults(handler=cmd_audit)


def build_audit_config(args: argparse.Namespace) -> AuditConfig:
    fields = {
        key: getattr(args, key)
        for key in (
            "k",
            "block_size",
            "beta",
            "items",
            "trials",
            "seed",
            "noise_mode",
            "initial_count",
            "target_value",
            "identical",
            "bucket_width",
            "min_count",
        )
        if getattr(args, key) is not None
    }
    try:
        if args.target:
            site, block = parse_number_list(args.target, int)
            fields["target"] = (site, block)
        if args.thresholds:
            fields["thresholds"] = [parse_number_list(row, int) for row in args.thresholds.split(";")]
        config = AuditConfig(**fields)
    except (ValueError, ValidationError) as e:
        raise ConfigError(f"Bad audit configuration: {e}") from e
    if ceil_sqrt(config.k) > MAX_AUDIT_S:
        raise ConfigError(f"Audit needs ceil(sqrt(k)) <= {MAX_AUDIT_S}, got k={config.k}", key="k")
    return config


def cmd_audit(args: argparse.Namespace) -> int:
    config = build_audit_config(args)
    report = audit_partial_dp(config, workers=args.workers)
    write_audit(report, args.out_path or settings.RESULTS_DIR)
    print(format_audit(report), end="")
    return EXIT_CODES[report.verdict]
