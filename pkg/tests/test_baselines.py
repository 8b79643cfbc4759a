import pytest

from app.errors import ParameterError
from app.services.adversaries import RoundRobinReplay, SingleSiteReplay
from app.services.baselines import (
    DeterministicTracker,
    DetSiteState,
    ObliviousTracker,
    det_estimate,
    det_step,
    oblivious_block_size,
)
from app.services.noise import derive_stream
from app.schemas.experiment import ExperimentConfig, MechanismKind
from app.services.tracking import StepAction
from app.workers.harness import play, run_trial


def test_det_step_reports_on_growth():
    state = DetSiteState()
    reports = [det_step(state, 0.5) for _ in range(5)]
    assert reports == [1, 2, 3, None, 5]
    assert state.last_reported == 5


def test_det_estimate_sums_last_reports():
    sites = [DetSiteState(count=10, last_reported=8), DetSiteState(count=3, last_reported=3)]
    assert det_estimate(sites) == 11


@pytest.mark.parametrize("adversary", [RoundRobinReplay(8, 5000), SingleSiteReplay(8, 5000, site=3)])
def test_deterministic_error_bound(adversary):
    tracker = DeterministicTracker(8, alpha=0.1)
    transcript, _ = play(tracker, adversary)
    for t in range(1, len(transcript) + 1):
        n = transcript.true_count(t)
        assert n - transcript.announcement(t).value <= 0.1 * n + 1e-9
        assert transcript.announcement(t).value <= n
    assert tracker.estimate == det_estimate(tracker.sites)
    assert tracker.ledger.total() == transcript.update_steps().__len__()


def test_deterministic_rejects_bad_alpha():
    with pytest.raises(ParameterError):
        DeterministicTracker(4, alpha=1.5)


def test_oblivious_block_size():
    assert oblivious_block_size(1000, 64, 0.1, 2.0) == 6
    assert oblivious_block_size(10, 64, 0.1, 2.0) == 1


def test_oblivious_announces_every_bit():
    tracker = ObliviousTracker(1, alpha=0.1, c0=2.0, rng=derive_stream(4), initial_count=100)
    assert tracker.block_size == 5
    transcript, _ = play(tracker, SingleSiteReplay(1, 50), 100)
    # one bit per completed block of 5
    assert len(transcript.update_steps()) == 10
    assert tracker.ledger.site_to_server == 10
    values = [transcript.announcement(t).value for t in transcript.update_steps()]
    assert values == [100.0 + 5 * m for m in range(1, 11)]


def test_oblivious_round_doubles():
    tracker = ObliviousTracker(1, alpha=0.1, c0=2.0, rng=derive_stream(4), initial_count=100)
    play(tracker, SingleSiteReplay(1, 100), 100)
    first = tracker.rounds[0]
    assert first.end_reason == "doubled"
    assert first.phase_bits == [20]
    assert 196 <= first.n_end <= 200
    assert tracker.n0 == first.n_end
    assert tracker.rounds_completed == 1


def test_oblivious_from_zero_starts_immediately():
    tracker = ObliviousTracker(2, alpha=0.1, rng=derive_stream(4))
    announcement = tracker.process(StepAction.deliver(1))
    assert announcement.is_update and announcement.sync
    assert announcement.value == 1.0
    assert tracker.rounds[0].n_end == 1


def test_oblivious_rejects_bad_constant():
    with pytest.raises(ParameterError):
        ObliviousTracker(2, alpha=0.1, c0=0.0)


def test_deterministic_starts_from_initial_count():
    tracker = DeterministicTracker(8, alpha=0.1, initial_count=100_000)
    assert tracker.process(StepAction.skip()).value == 100_000.0
    transcript, _ = play(tracker, RoundRobinReplay(8, 5000), 100_000)
    assert transcript.announcement(1).value == 100_001.0
    for t in range(1, len(transcript) + 1):
        n = transcript.true_count(t)
        value = transcript.announcement(t).value
        # only items since the start are ever unreported
        assert 0 <= n - value <= 0.1 * (n - 100_000) + 8
    assert tracker.estimate == 100_000 + det_estimate(tracker.sites)


def test_deterministic_harness_trial_with_initial_count():
    config = ExperimentConfig(mechanism=MechanismKind.DETERMINISTIC, k=8, items=5000, initial_count=100_000, trials=1)
    _, metrics = run_trial(config, 0)
    assert metrics.max_rel_error < 0.01
    assert not metrics.failed
