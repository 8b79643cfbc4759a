import logging

import pytest

from app.schemas.experiment import ExperimentConfig
from app.utils.utils import ceil_sqrt
from app.workers.harness import ExperimentRunner, aggregate, run_trial, run_trials
from app.workers.sweep import run_sweep


def small(**overrides) -> ExperimentConfig:
    values = dict(mechanism="robust", k=16, alpha=0.1, delta=0.05, items=20000, trials=2, seed=42)
    values.update(overrides)
    return ExperimentConfig(**values)


def test_empty_budget():
    transcript, metrics = run_trial(small(items=0), 0)
    assert len(transcript) == 0
    assert metrics.max_rel_error == 0.0
    assert metrics.total_words == 0
    assert not metrics.failed


def test_trial_is_reproducible():
    _, first = run_trial(small(), 1)
    _, second = run_trial(small(), 1)
    assert first.model_dump() == second.model_dump()


def test_trials_use_different_randomness():
    _, first = run_trial(small(), 0)
    _, second = run_trial(small(), 1)
    assert first.error_samples != second.error_samples


def test_words_are_conserved():
    _, metrics = run_trial(small(), 0)
    assert metrics.total_words == sum(metrics.words_by_category.values())
    assert metrics.bootstrap_words > 0


def test_robust_round_invariants():
    transcript, metrics = run_trial(small(items=40000), 0)
    s = ceil_sqrt(16)
    assert metrics.rounds_completed >= 1
    for summary in metrics.rounds:
        assert summary.leak_set_size is not None and summary.leak_set_size <= s
        assert len(summary.phase_outputs) <= s
    closed = [r for r in metrics.rounds if r.end_reason != "open"]
    assert all(r.n_end == r.n0 + r.items for r in closed)
    sync_updates = sum(transcript.announcement(t).sync for t in transcript.update_steps())
    assert sync_updates >= len(closed)


def test_error_samples_cover_updates():
    transcript, metrics = run_trial(small(error_checkpoints=16), 0)
    sampled = {t for t, _, _ in metrics.error_samples}
    assert set(transcript.update_steps()) <= sampled
    assert len(sampled) <= 16 + len(transcript.update_steps())
    for t, n, a in metrics.error_samples:
        assert transcript.true_count(t) == n
        assert transcript.announcement(t).value == a


def test_robust_accuracy_round_robin():
    config = small(items=50000, trials=3)
    for trial in range(3):
        _, metrics = run_trial(config, trial)
        assert metrics.max_rel_error <= 0.1


@pytest.mark.parametrize("mechanism", ["deterministic", "oblivious", "robust"])
def test_single_trial_aggregate(mechanism):
    config = small(mechanism=mechanism, trials=1, items=5000)
    report = run_trials(config, workers=1)
    _, metrics = run_trial(config, 0)
    assert report.trials == 1
    assert report.failure_fraction == float(metrics.failed)
    assert report.mean_total_words == metrics.total_words
    assert report.max_total_words == metrics.total_words


def test_aggregate_ignores_order():
    config = small(trials=3, items=5000)
    metrics = [run_trial(config, i)[1] for i in range(3)]
    forward = aggregate(config, metrics)
    backward = aggregate(config, list(reversed(metrics)))
    assert forward.model_dump() == backward.model_dump()


def test_parallel_matches_sequential():
    config = small(trials=6, items=3000)
    sequential = run_trials(config, workers=1)
    parallel = run_trials(config, workers=2)
    assert sequential.model_dump() == parallel.model_dump()
    assert [m.trial for m in parallel.per_trial] == list(range(6))


def test_trial_callback():
    seen = []
    ExperimentRunner(small(trials=2, items=1000), workers=1, on_trial_complete=lambda m: seen.append(m.trial)).run()
    assert seen == [0, 1]


def test_many_sites_warning(caplog):
    with caplog.at_level(logging.WARNING):
        run_trials(small(k=16, alpha=0.3, trials=1, items=100), workers=1)
    assert any("log N regime" in record.message for record in caplog.records)


def test_report_fields():
    report = run_trials(small(items=30000, trials=2), workers=1)
    assert report.failure_ci[0] <= report.failure_fraction <= report.failure_ci[1]
    assert report.communication_bound > 0
    assert report.mean_round_growth is None or report.mean_round_growth > 1.0
    assert report.max_leak_set_size is None or report.max_leak_set_size <= 4


@pytest.mark.slow
def test_communication_scaling():
    base = ExperimentConfig(k=4, alpha=0.1, delta=0.05, items=200000, trials=2, seed=42)
    report, aggregates = run_sweep(base, [4, 16, 64], mechanisms=["robust", "deterministic"], workers=1)
    assert report.exponents["robust"] < report.exponents["deterministic"]
    assert 0.8 <= report.exponents["deterministic"] <= 1.15
    assert 0.4 <= report.exponents["robust"] <= 0.75
    robust_words = [row.mean_total_words for row in report.rows if row.mechanism == "robust"]
    for smaller, larger in zip(robust_words, robust_words[1:]):
        assert 1.3 <= larger / smaller <= 3.5
    assert all(a.failures == 0 for a in aggregates)


@pytest.mark.slow
@pytest.mark.parametrize("adversary", ["replay:round_robin", "stop_on_fire", "update_chaser"])
def test_robust_accuracy_at_full_scale(adversary):
    report = run_trials(small(adversary=adversary, items=1_000_000, trials=200), workers=None)
    assert report.failure_fraction <= 0.08
    assert report.max_leak_set_size <= ceil_sqrt(16)
    if adversary == "replay:round_robin":
        assert report.round_bits_in_band >= 0.95
