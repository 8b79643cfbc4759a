"""
Empirical partial-DP audit of the robust tracker.

Two neighbouring threshold databases D and D' differ at one (site, block).
Many single-round runs are played on each with fresh noise; runs whose
transcript exposes the differing threshold belong to no event. The remaining
transcripts are bucketed into events whose frequencies over all trials are
compared.
"""
import logging
import math
import multiprocessing
from collections import Counter
from typing import Optional

from app.errors import AuditError
from app.schemas.audit import AuditConfig, AuditEventRow, AuditReport
from app.services.adversaries import RoundRobinReplay
from app.services.noise import derive_stream, uniform_thresholds
from app.services.privacy import compute_leak_set
from app.services.robust import RobustTracker
from app.services.tracking import Transcript, derive_round_params
from app.services.tracking.core import RoundParams
from app.settings import settings
from app.utils.utils import log_ratio_interval
from app.workers.harness import play

logger = logging.getLogger(__name__)

# Delta is pinned, so alpha only has to pass range checks
AUDIT_ALPHA = 0.5
CHUNK_TRIALS = 5000


def audit_params(config: AuditConfig) -> RoundParams:
    return derive_round_params(config.initial_count, config.k, AUDIT_ALPHA, config.beta, config.block_size)


def default_target(params: RoundParams) -> tuple[int, int]:
    """Site 1's block around where the first phase ends under round-robin delivery."""
    return 1, min(params.k_prime, max(1, math.ceil(params.phase_threshold / params.k)))


def threshold_databases(config: AuditConfig, params: RoundParams) -> tuple[list[list[int]], list[list[int]], tuple[int, int]]:
    """
    The neighbouring pair (D, D') and the position where they differ.

    Raises:
        AuditError: If a pinned database row does not hold k' thresholds.
    """
    if config.thresholds is not None:
        database = [list(row) for row in config.thresholds]
        for i, row in enumerate(database, start=1):
            if len(row) != params.k_prime:
                raise AuditError(f"Site {i} needs {params.k_prime} thresholds, got {len(row)}")
    else:
        rng = derive_stream(config.seed, (("audit_database", 0),))
        database = [
            uniform_thresholds(rng.child("site", i), params.block_size, params.k_prime).tolist()
            for i in range(1, config.k + 1)
        ]
    target = config.target or default_target(params)
    site, block = target
    if block > params.k_prime:
        raise AuditError(f"Target block {block} beyond k'={params.k_prime}")

    neighbour = [list(row) for row in database]
    if not config.identical:
        current = database[site - 1][block - 1]
        value = config.target_value if config.target_value is not None else current % params.block_size + 1
        neighbour[site - 1][block - 1] = value
    return database, neighbour, target


def event_signature(transcript: Transcript, n0: int, bucket_width: float) -> str:
    """
    Step and bucketed value of every phase-ending Update, plus whether the round closed.
    """
    parts = []
    closed = False
    for t in transcript.phase_end_steps():
        announcement = transcript.announcement(t)
        parts.append(f"{t}:{math.floor((announcement.value - n0) / bucket_width)}")
    for t in transcript.update_steps():
        if transcript.announcement(t).sync:
            closed = True
    parts.append("end" if closed else "open")
    return "|".join(parts)


def _audit_chunk(args: tuple[dict, list[list[int]], tuple[int, int], int, int, int]) -> tuple[int, int, Counter]:
    """
    Module-level worker: plays trials [start, stop) on one database.

    Returns:
        tuple[int, int, Counter]: side, surviving trial count, event counts.
    """
    config_dict, database, target, side, start, stop = args
    config = AuditConfig.model_validate(config_dict)
    bucket_width = config.bucket_width or config.block_size
    events: Counter = Counter()
    surviving = 0
    for trial in range(start, stop):
        rng = derive_stream(config.seed, (("audit", side), ("trial", trial)), config.noise_mode)
        tracker = RobustTracker(
            config.k,
            alpha=AUDIT_ALPHA,
            beta=config.beta,
            rng=rng,
            initial_count=config.initial_count,
            block_size=config.block_size,
            thresholds=database,
            single_round=True,
        )
        adversary = RoundRobinReplay(config.k, config.items)
        transcript, item_log = play(tracker, adversary, config.initial_count, record_items=True, trial_index=trial)
        if target in compute_leak_set(transcript, item_log).round_entries(0):
            continue
        surviving += 1
        events[event_signature(transcript, config.initial_count, bucket_width)] += 1
    return side, surviving, events


def _collect(config: AuditConfig, database, neighbour, target, workers: int) -> tuple[list[int], list[Counter]]:
    config_dict = config.model_dump(mode="json")
    jobs = []
    for side, db in enumerate((database, neighbour)):
        for start in range(0, config.trials, CHUNK_TRIALS):
            jobs.append((config_dict, db, target, side, start, min(config.trials, start + CHUNK_TRIALS)))

    surviving = [0, 0]
    events = [Counter(), Counter()]

    def merge(results):
        for side, count, counter in results:
            surviving[side] += count
            events[side].update(counter)

    if workers == 1 or len(jobs) <= 2:
        merge(map(_audit_chunk, jobs))
    else:
        with multiprocessing.Pool(workers) as pool:
            merge(pool.imap_unordered(_audit_chunk, jobs))
    return surviving, events


def audit_partial_dp(config: AuditConfig, workers: Optional[int] = None) -> AuditReport:
    """
    Runs the audit described by `config`.

    Args:
        config (AuditConfig): Pinned configuration.
        workers (Optional[int]): Worker processes (None = settings.WORKERS, then cpu_count).

    Returns:
        AuditReport: Per-event counts and log-ratios with the verdict:
        'violation' when some event's lower log-ratio bound exceeds eps = C / s,
        'inconclusive' when too few trials survive or no event has enough mass,
        'pass' otherwise.

    Raises:
        AuditError: If the database or target does not fit the configuration.
    """
    params = audit_params(config)
    database, neighbour, target = threshold_databases(config, params)
    eps = params.eps
    if workers is None:
        workers = settings.WORKERS or multiprocessing.cpu_count()
    logger.info(
        f"Auditing k={config.k}, Delta={params.block_size}, k'={params.k_prime}, target={target}, "
        f"eps={eps:.3f}, {config.trials} trials per database"
    )

    surviving, events = _collect(config, database, neighbour, target, workers)
    rows: list[AuditEventRow] = []
    max_log_ratio = 0.0
    max_lower = -math.inf
    violation = False
    for event in sorted(set(events[0]) | set(events[1])):
        count_d, count_dp = events[0][event], events[1][event]
        if max(count_d, count_dp) < config.min_count:
            continue
        estimate, low, high = log_ratio_interval(count_d, count_dp, config.trials, config.trials)
        # lower confidence bound on |log ratio|
        lower = low if estimate >= 0 else -high
        flagged = lower > eps
        violation |= flagged
        max_log_ratio = max(max_log_ratio, abs(estimate))
        max_lower = max(max_lower, lower)
        rows.append(
            AuditEventRow(
                event=event,
                count_D=count_d,
                count_D_prime=count_dp,
                log_ratio=estimate,
                ci_low=low,
                ci_high=high,
                verdict="violation" if flagged else "ok",
            )
        )

    if violation:
        verdict = "violation"
    elif min(surviving) < config.min_count or not rows:
        verdict = "inconclusive"
    else:
        verdict = "pass"
    log = logger.warning if verdict == "inconclusive" else logger.info
    log(f"Audit verdict: {verdict} (surviving {surviving[0]}/{surviving[1]}, max lower bound {max_lower:.3f})")
    return AuditReport(
        k=config.k,
        block_size=params.block_size,
        target=target,
        trials=config.trials,
        surviving_D=surviving[0],
        surviving_D_prime=surviving[1],
        epsilon_bound=eps,
        max_log_ratio=max_log_ratio,
        max_lower_bound=max_lower if rows else 0.0,
        verdict=verdict,
        events=rows,
    )
