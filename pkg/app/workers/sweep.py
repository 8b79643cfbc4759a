"""
Communication scaling sweeps over k and alpha.
"""
import logging
from typing import Optional, Sequence

from app.schemas.experiment import ExperimentConfig, MechanismKind
from app.schemas.metrics import AggregateReport, SweepReport, SweepRow
from app.utils.utils import fit_exponent
from app.workers.harness import run_trials

logger = logging.getLogger(__name__)


def run_sweep(
    base: ExperimentConfig,
    ks: Sequence[int],
    alphas: Optional[Sequence[float]] = None,
    mechanisms: Optional[Sequence[MechanismKind]] = None,
    workers: Optional[int] = None,
) -> tuple[SweepReport, list[AggregateReport]]:
    """
    Runs one aggregate per (k, alpha, mechanism) and fits words ~ k^e per mechanism.

    Every configuration keeps the base seed, so a single-point sweep reproduces `run_trials`.

    Args:
        base (ExperimentConfig): Shared settings; k, alpha and mechanism are overridden.
        ks (Sequence[int]): Site counts.
        alphas (Optional[Sequence[float]]): Relative errors, the base alpha when None.
        mechanisms (Optional[Sequence[MechanismKind]]): Mechanisms, the base one when None.
        workers (Optional[int]): Worker processes per aggregate.

    Returns:
        tuple[SweepReport, list[AggregateReport]]: The scaling table and the aggregates behind it.

    Raises:
        ValueError: If `ks` is empty.
    """
    if not ks:
        raise ValueError("Sweep needs at least one k")
    alphas = list(alphas) if alphas else [base.alpha]
    mechanisms = [MechanismKind(m) for m in mechanisms] if mechanisms else [base.mechanism]

    rows: list[SweepRow] = []
    reports: list[AggregateReport] = []
    for mechanism in mechanisms:
        for alpha in alphas:
            for k in ks:
                config = base.model_copy(update={"k": k, "alpha": alpha, "mechanism": mechanism})
                config = ExperimentConfig.model_validate(config.model_dump())
                report = run_trials(config, workers=workers)
                reports.append(report)
                rows.append(
                    SweepRow(
                        k=k,
                        alpha=alpha,
                        mechanism=mechanism.value,
                        mean_total_words=report.mean_total_words,
                        failure_fraction=report.failure_fraction,
                    )
                )

    exponents: dict[str, Optional[float]] = {}
    bounds: dict[str, list[float]] = {}
    for mechanism in mechanisms:
        for alpha in alphas:
            key = mechanism.value if len(alphas) == 1 else f"{mechanism.value}@{alpha:g}"
            selected = [
                (row, report)
                for row, report in zip(rows, reports)
                if row.mechanism == mechanism.value and row.alpha == alpha
            ]
            exponents[key] = fit_exponent([r.k for r, _ in selected], [r.mean_total_words for r, _ in selected])
            bounds[key] = [rep.communication_bound for _, rep in selected]
            if exponents[key] is not None:
                logger.info(f"{key}: words ~ k^{exponents[key]:.3f}")
    return SweepReport(rows=rows, exponents=exponents, bounds=bounds), reports
