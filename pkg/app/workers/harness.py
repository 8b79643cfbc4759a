"""
Trial runner: plays the adversary against a mechanism and turns the
transcript into metrics.
"""
import logging
import multiprocessing
from typing import Callable, Optional

import numpy as np

from app.errors import ProtocolError, TrialAborted
from app.schemas.experiment import ExperimentConfig, MechanismKind
from app.schemas.metrics import AggregateReport, Metrics
from app.services.adversaries import Adversary, build_adversary
from app.services.base import TrackerBase
from app.services.baselines import DeterministicTracker, ObliviousTracker
from app.services.noise import RngStream, derive_stream
from app.services.privacy import compute_leak_set
from app.services.robust import RobustTracker
from app.services.tracking import (
    ItemLog,
    Transcript,
    bootstrap_threshold,
    communication_bound,
    derive_global_beta,
)
from app.services.tracking.core import compute_c_factor
from app.settings import settings
from app.utils.utils import ceil_sqrt, evenly_spaced_checkpoints, wilson_interval

# Configure logging
logging.basicConfig(
    level=settings.LOG_LEVEL,
    format="%(asctime)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)

SEQUENTIAL_TRIALS = 4


def trial_stream(config: ExperimentConfig, trial_index: int) -> RngStream:
    return derive_stream(config.seed, (("trial", trial_index),), config.noise_mode)


def global_beta(config: ExperimentConfig) -> float:
    return derive_global_beta(config.delta, config.alpha, config.k, max(config.items + config.initial_count, 2))


def build_mechanism(config: ExperimentConfig, rng: RngStream) -> TrackerBase:
    """The tracker named by `config.mechanism`, seeded from the trial's mechanism stream."""
    if config.mechanism is MechanismKind.DETERMINISTIC:
        return DeterministicTracker(config.k, alpha=config.alpha, initial_count=config.initial_count)
    if config.mechanism is MechanismKind.OBLIVIOUS:
        return ObliviousTracker(config.k, alpha=config.alpha, c0=config.c0, rng=rng, initial_count=config.initial_count)
    return RobustTracker(
        config.k,
        alpha=config.alpha,
        beta=global_beta(config),
        rng=rng,
        initial_count=config.initial_count,
    )


def play(
    mechanism: TrackerBase,
    adversary: Adversary,
    initial_count: int = 0,
    record_items: bool = False,
    trial_index: int = 0,
) -> tuple[Transcript, Optional[ItemLog]]:
    """
    The two-player game: the adversary moves, the mechanism answers.

    Stops when the adversary's budget is spent or the mechanism is finished.

    Raises:
        TrialAborted: If the mechanism raises a protocol error.
    """
    transcript = Transcript(initial_count)
    item_log = ItemLog() if record_items else None
    view = transcript.view()
    true_count = initial_count
    while not mechanism.finished:
        action = adversary.next_action(view)
        if action is None:
            break
        if not action.is_skip:
            true_count += 1
        try:
            announcement = mechanism.process(action)
            transcript.append(action, announcement, true_count)
        except ProtocolError as e:
            raise TrialAborted(trial_index, len(transcript) + 1, e) from e
        if item_log is not None:
            item_log.append(action.site, mechanism.last_context)
    return transcript, item_log


def error_profile(transcript: Transcript, n_floor: int) -> float:
    """Max |a_t - N_t| / N_t over every step with N_t >= n_floor; 0 when there is none."""
    if not len(transcript):
        return 0.0
    counts = np.asarray(transcript.true_counts(), dtype=np.float64)
    values = np.asarray(transcript.values(), dtype=np.float64)
    mask = counts >= max(n_floor, 1)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(values[mask] - counts[mask]) / counts[mask]))


def sample_errors(transcript: Transcript, checkpoints: int) -> list[tuple[int, int, float]]:
    steps = evenly_spaced_checkpoints(len(transcript), checkpoints) | set(transcript.update_steps())
    counts = transcript.true_counts()
    values = transcript.values()
    return [(t, int(counts[t - 1]), float(values[t - 1])) for t in sorted(steps)]


def run_trial(config: ExperimentConfig, trial_index: int) -> tuple[Transcript, Metrics]:
    """
    Runs one trial of `config`.

    Args:
        config (ExperimentConfig): Experiment to run.
        trial_index (int): Index of the trial; selects its random streams.

    Returns:
        tuple[Transcript, Metrics]: The full transcript and the trial's metrics.

    Raises:
        TrialAborted: If the mechanism hits a protocol error.
    """
    stream = trial_stream(config, trial_index)
    mechanism = build_mechanism(config, stream.child("mechanism"))
    adversary = build_adversary(config.adversary, config.k, config.items, stream.child("adversary"))
    is_robust = config.mechanism is MechanismKind.ROBUST

    transcript, item_log = play(
        mechanism, adversary, config.initial_count, record_items=is_robust, trial_index=trial_index
    )

    n_floor = bootstrap_threshold(config.k, config.alpha, global_beta(config))
    max_rel_error = error_profile(transcript, n_floor)
    rounds = mechanism.summaries()
    if item_log is not None:
        leaks = compute_leak_set(transcript, item_log)
        for summary in rounds:
            summary.leak_set_size = leaks.round_size(summary.index)

    metrics = Metrics(
        trial=trial_index,
        seed=config.seed,
        mechanism=config.mechanism.value,
        adversary=adversary.label,
        k=config.k,
        alpha=config.alpha,
        delta=config.delta,
        n_items=adversary.delivered,
        max_rel_error=max_rel_error,
        failed=max_rel_error > config.alpha,
        total_words=mechanism.ledger.total(),
        words_by_category=mechanism.ledger.as_dict(),
        bootstrap_words=mechanism.bootstrap_words,
        rounds_completed=mechanism.rounds_completed,
        rounds=rounds,
        error_floor=n_floor,
        error_samples=sample_errors(transcript, config.error_checkpoints),
        update_count=len(transcript.update_steps()),
    )
    return transcript, metrics


def _trial_worker(args: tuple[dict, int]) -> Metrics:
    """
    Module-level worker for multiprocessing; returns metrics only so transcripts stay in the child.
    """
    config_dict, trial_index = args
    _, metrics = run_trial(ExperimentConfig.model_validate(config_dict), trial_index)
    return metrics


def _growth(metrics: list[Metrics]) -> tuple[Optional[float], Optional[float]]:
    """Mean N_end / N0 over closed rounds, and the fraction inside the predicted band."""
    ratios, in_band = [], 0
    for m in metrics:
        s = ceil_sqrt(m.k)
        low, high = 1 + m.alpha * s / 8, 1 + m.alpha * s / 4
        for r in m.rounds:
            if r.n_end is None or r.n0 <= 0 or r.end_reason == "open":
                continue
            ratio = r.n_end / r.n0
            ratios.append(ratio)
            in_band += low <= ratio <= high
    if not ratios:
        return None, None
    return float(np.mean(ratios)), in_band / len(ratios)


def _bits_in_band(metrics: list[Metrics], c_factor: float) -> Optional[float]:
    """Fraction of closed rounds whose phase bits total between 0.8 C k and 2.4 C k."""
    totals = [r.total_bits for m in metrics for r in m.rounds if r.end_reason != "open"]
    if not totals:
        return None
    k = metrics[0].k
    inside = sum(0.8 * c_factor * k <= b <= 2.4 * c_factor * k for b in totals)
    return inside / len(totals)


def aggregate(config: ExperimentConfig, metrics: list[Metrics]) -> AggregateReport:
    """Aggregates per-trial metrics; the result does not depend on their order."""
    metrics = sorted(metrics, key=lambda m: m.trial)
    failures = sum(m.failed for m in metrics)
    words = np.array([m.total_words for m in metrics], dtype=np.float64)
    mean_growth, in_band = _growth(metrics) if config.mechanism is MechanismKind.ROBUST else (None, None)
    leak_sizes = [r.leak_set_size for m in metrics for r in m.rounds if r.leak_set_size is not None]
    c_factor = None
    if config.mechanism is MechanismKind.ROBUST:
        c_factor = compute_c_factor(ceil_sqrt(config.k), global_beta(config))
    return AggregateReport(
        mechanism=config.mechanism.value,
        adversary=config.adversary.label,
        k=config.k,
        alpha=config.alpha,
        delta=config.delta,
        items=config.items,
        trials=len(metrics),
        seed=config.seed,
        failures=failures,
        failure_fraction=failures / len(metrics),
        failure_ci=wilson_interval(failures, len(metrics)),
        mean_total_words=float(words.mean()),
        max_total_words=int(words.max()),
        mean_rounds=float(np.mean([m.rounds_completed for m in metrics])),
        mean_round_growth=mean_growth,
        round_growth_in_band=in_band,
        round_bits_in_band=_bits_in_band(metrics, c_factor) if c_factor is not None else None,
        max_leak_set_size=max(leak_sizes) if leak_sizes else None,
        communication_bound=communication_bound(
            config.mechanism.value, config.k, config.alpha, config.items + config.initial_count, c_factor
        ),
        per_trial=metrics,
    )


class ExperimentRunner:
    """
    Runs every trial of an experiment, in parallel when that pays off.

    Features:
    - Trials are independent and keyed by index, so results do not depend on scheduling
    - Small batches run in-process
    - Optional callback per finished trial
    """

    def __init__(
        self,
        config: ExperimentConfig,
        workers: Optional[int] = None,
        on_trial_complete: Optional[Callable[[Metrics], None]] = None,
    ):
        """
        Initialize the runner.

        Args:
            config: Experiment to run
            workers: Worker processes (None = settings.WORKERS, then cpu_count)
            on_trial_complete: Callback for each finished trial
        """
        self.config = config
        self.workers = workers if workers is not None else settings.WORKERS
        self.on_trial_complete = on_trial_complete

    def _resolve_workers(self) -> int:
        if self.workers is not None:
            return max(1, self.workers)
        return max(1, multiprocessing.cpu_count())

    def _notify(self, metrics: Metrics):
        if self.on_trial_complete:
            try:
                self.on_trial_complete(metrics)
            except Exception as e:
                logger.error(f"Error in on_trial_complete callback: {e}")

    def run(self) -> AggregateReport:
        config = self.config
        if config.k > 1.0 / (config.alpha * config.alpha):
            logger.warning(
                f"k={config.k} exceeds 1/alpha^2={1.0 / config.alpha ** 2:.1f}; round count follows the log N regime"
            )
        workers = self._resolve_workers()
        logger.info(
            f"Running {config.trials} trials: {config.mechanism.value} vs {config.adversary.label}, "
            f"k={config.k}, alpha={config.alpha}, items={config.items}, workers={workers}"
        )

        results: list[Metrics] = []
        if workers == 1 or config.trials <= SEQUENTIAL_TRIALS:
            for i in range(config.trials):
                _, metrics = run_trial(config, i)
                results.append(metrics)
                self._notify(metrics)
        else:
            config_dict = config.model_dump(mode="json")
            worker_args = [(config_dict, i) for i in range(config.trials)]
            with multiprocessing.Pool(workers) as pool:
                for metrics in pool.imap_unordered(_trial_worker, worker_args):
                    results.append(metrics)
                    self._notify(metrics)

        report = aggregate(config, results)
        logger.info(
            f"Finished: failure fraction {report.failure_fraction:.3f}, mean words {report.mean_total_words:.0f}"
        )
        return report


def run_trials(config: ExperimentConfig, workers: Optional[int] = None) -> AggregateReport:
    """Runs `config.trials` trials and aggregates them."""
    return ExperimentRunner(config, workers=workers).run()
