import argparse
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from app.errors import ConfigError
from app.schemas.experiment import ExperimentConfig
from app.utils.utils import read_key_value_file

CONFIG_KEYS = {
    "mechanism",
    "adversary",
    "k",
    "alpha",
    "delta",
    "items",
    "trials",
    "seed",
    "noise_mode",
    "out_path",
    "c0",
    "initial_count",
}


def add_experiment_arguments(parser: argparse.ArgumentParser):
    """Flags shared by `run` and `sweep`; every default is None so file values survive."""
    parser.add_argument("--config", type=Path, help="key=value file; flags override its values")
    parser.add_argument("--mechanism", choices=["robust", "oblivious", "deterministic"])
    parser.add_argument("--adversary", help="replay:round_robin | replay:single_site:I | replay:weighted:W1,..,Wk | stop_on_fire | update_chaser")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--items", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--noise-mode", dest="noise_mode", choices=["standard", "disabled"])
    parser.add_argument("--c0", type=float, help="block-size constant of the oblivious baseline")
    parser.add_argument("--initial-count", dest="initial_count", type=int)
    parser.add_argument("--out", dest="out_path", help="output directory")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--db", help="SQLAlchemy URL to store results in")


def load_config_file(path: Optional[Path]) -> dict[str, str]:
    """
    Reads a flat key=value config file.

    Raises:
        ConfigError: If the file is missing or holds an unknown key.
    """
    if path is None:
        return {}
    try:
        values = read_key_value_file(path)
    except FileNotFoundError as e:
        raise ConfigError(str(e)) from e
    unknown = sorted(set(values) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"Unknown config key(s) in {path}: {', '.join(unknown)}", key=unknown[0])
    return values


def merged_values(args: argparse.Namespace, extra_keys: tuple[str, ...] = ()) -> dict[str, Any]:
    values: dict[str, Any] = dict(load_config_file(args.config))
    for key in CONFIG_KEYS | set(extra_keys):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return {key: value for key, value in values.items() if value not in (None, "")}


def build_experiment(values: dict[str, Any]) -> ExperimentConfig:
    """
    Raises:
        ConfigError: If the values do not form a valid experiment.
    """
    fields = {key: value for key, value in values.items() if key != "out_path"}
    try:
        return ExperimentConfig(**fields)
    except ValidationError as e:
        details = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors())
        raise ConfigError(details) from e


def build_parser() -> argparse.ArgumentParser:
    from app.cli.commands import audit, run, sweep

    parser = argparse.ArgumentParser(
        prog="count-tracking",
        description="Simulate and audit distributed count tracking against adaptive adversaries.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    run.register(subparsers)
    audit.register(subparsers)
    sweep.register(subparsers)
    return parser
