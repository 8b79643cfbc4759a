"""
Result file writers. Output depends only on the data, so reruns produce identical bytes.
"""
import math
from pathlib import Path
from typing import Union

import pandas as pd

from app.schemas.audit import AuditReport
from app.schemas.metrics import AggregateReport, SweepReport
from app.utils.columns import Columns, Paths


def _prepare(out_dir: Union[str, Path]) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def trials_frame(report: AggregateReport) -> pd.DataFrame:
    rows = [m.csv_row() for m in sorted(report.per_trial, key=lambda m: m.trial)]
    return pd.DataFrame(rows, columns=Columns.Trials.ORDER)


def write_run(report: AggregateReport, out_dir: Union[str, Path]) -> tuple[Path, Path]:
    """
    Writes the trial CSV and the aggregate summary JSON.

    Returns:
        tuple[Path, Path]: Paths of the CSV and the summary.
    """
    path = _prepare(out_dir)
    csv_path = path / Paths.TRIALS_CSV
    summary_path = path / Paths.RUN_SUMMARY
    trials_frame(report).to_csv(csv_path, index=False, lineterminator="\n")
    summary_path.write_text(report.model_dump_json(indent=2) + "\n")
    return csv_path, summary_path


def write_sweep(report: SweepReport, out_dir: Union[str, Path]) -> tuple[Path, Path]:
    path = _prepare(out_dir)
    csv_path = path / Paths.SWEEP_CSV
    summary_path = path / Paths.SWEEP_SUMMARY
    frame = pd.DataFrame([row.model_dump() for row in report.rows], columns=Columns.Sweep.ORDER)
    frame.to_csv(csv_path, index=False, lineterminator="\n")
    summary_path.write_text(report.model_dump_json(indent=2, include={"exponents", "bounds"}) + "\n")
    return csv_path, summary_path


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.4f}"


def audit_frame(report: AuditReport) -> pd.DataFrame:
    rows = [
        {
            "event": e.event,
            "count_D": e.count_D,
            "count_D_prime": e.count_D_prime,
            "log_ratio": _fmt(e.log_ratio),
            "ci": f"[{_fmt(e.ci_low)}, {_fmt(e.ci_high)}]",
            "verdict": e.verdict,
        }
        for e in report.events
    ]
    return pd.DataFrame(rows, columns=Columns.Audit.ORDER)


def format_audit(report: AuditReport) -> str:
    header = (
        f"k={report.k} Delta={report.block_size} target={report.target} trials={report.trials}\n"
        f"surviving D={report.surviving_D} D'={report.surviving_D_prime} "
        f"eps={_fmt(report.epsilon_bound)} max|log ratio|={_fmt(report.max_log_ratio)} "
        f"max lower bound={_fmt(report.max_lower_bound)}\n"
        f"verdict: {report.verdict}\n"
    )
    frame = audit_frame(report)
    table = frame.to_string(index=False) if len(frame) else "(no event reached the minimum count)"
    return header + "\n" + table + "\n"


def write_audit(report: AuditReport, out_dir: Union[str, Path]) -> Path:
    path = _prepare(out_dir) / Paths.AUDIT_REPORT
    path.write_text(format_audit(report))
    return path
