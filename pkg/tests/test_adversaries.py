import pytest

from app.errors import ParameterError
from app.schemas.experiment import AdversarySpec, ExperimentConfig
from app.services.adversaries import (
    RoundRobinReplay,
    SingleSiteReplay,
    StopOnFire,
    UpdateChaser,
    WeightedReplay,
    build_adversary,
)
from app.services.noise import derive_stream
from app.services.tracking import Announcement
from app.workers.harness import run_trial, run_trials
from tests.conftest import drive


def test_round_robin():
    assert drive(RoundRobinReplay(3, 6)) == [1, 2, 3, 1, 2, 3]


def test_single_site():
    assert drive(SingleSiteReplay(3, 4, site=2)) == [2, 2, 2, 2]


def test_zero_budget_stops_at_once():
    assert drive(RoundRobinReplay(3, 0)) == []


def test_negative_budget_rejected():
    with pytest.raises(ParameterError):
        RoundRobinReplay(3, -1)


def test_single_site_out_of_range():
    with pytest.raises(ParameterError):
        SingleSiteReplay(3, 4, site=4)


def test_degenerate_weights_match_single_site():
    weighted = WeightedReplay(3, 50, weights=[1.0, 0.0, 0.0], rng=derive_stream(1))
    assert drive(weighted) == drive(SingleSiteReplay(3, 50, site=1))


def test_weighted_is_reproducible_and_follows_weights():
    first = drive(WeightedReplay(2, 5000, weights=[3.0, 1.0], rng=derive_stream(6).child("adversary")))
    second = drive(WeightedReplay(2, 5000, weights=[3.0, 1.0], rng=derive_stream(6).child("adversary")))
    assert first == second
    assert 0.7 < first.count(1) / len(first) < 0.8


def test_weighted_rejects_wrong_length():
    with pytest.raises(ParameterError):
        WeightedReplay(3, 10, weights=[1.0, 1.0], rng=derive_stream(1))


def test_update_chaser_falls_back_to_round_robin():
    assert drive(UpdateChaser(3, 7)) == [1, 2, 3, 1, 2, 3, 1]


def test_update_chaser_follows_revealing_update():
    def announce(action):
        return Announcement.update(0.0) if action.site == 2 else Announcement.no_change(0.0)

    assert drive(UpdateChaser(3, 6), announce) == [1, 2, 2, 2, 2, 2]


def test_update_chaser_ignores_sync_broadcasts():
    value = iter(range(1, 100))

    def announce(action):
        return Announcement.update(float(next(value)), sync=True)

    assert drive(UpdateChaser(3, 6), announce) == [1, 2, 3, 1, 2, 3]


def test_stop_on_fire_moves_on_after_update():
    fired = {3, 5}
    step = iter(range(1, 100))

    def announce(action):
        return Announcement.update(0.0) if next(step) in fired else Announcement.no_change(0.0)

    # update at steps 3 and 5 moves from site 1 to 2, then 2 to 3
    assert drive(StopOnFire(3, 7), announce) == [1, 1, 1, 2, 2, 3, 3]


@pytest.mark.parametrize(
    "text, expected",
    [
        ("replay:round_robin", RoundRobinReplay),
        ("replay:single_site:2", SingleSiteReplay),
        ("replay:weighted:1,1,2", WeightedReplay),
        ("stop_on_fire", StopOnFire),
        ("update_chaser", UpdateChaser),
    ],
)
def test_build_adversary(text, expected):
    spec = AdversarySpec.parse(text)
    adversary = build_adversary(spec, 3, 10, derive_stream(0))
    assert isinstance(adversary, expected)
    assert adversary.label == spec.label


def test_stop_on_fire_breaks_oblivious_baseline():
    config = ExperimentConfig(
        mechanism="oblivious",
        adversary="stop_on_fire",
        k=64,
        alpha=0.1,
        items=25000,
        initial_count=100000,
        trials=3,
    )
    for trial in range(3):
        _, metrics = run_trial(config, trial)
        assert metrics.failed
        assert metrics.max_rel_error > 0.1


def test_stop_on_fire_overestimate_per_pass():
    # each fired block credits Delta while about Delta / 2 items arrived
    config = ExperimentConfig(
        mechanism="oblivious", adversary="stop_on_fire", k=64, alpha=0.1, items=30000, initial_count=100000, trials=3
    )
    block = 625
    overestimates = []
    for trial in range(3):
        transcript, _ = run_trial(config, trial)
        pass_end = transcript.update_steps()[63]
        overestimates.append(transcript.announcement(pass_end).value - transcript.true_count(pass_end))
    assert sum(overestimates) / 3 == pytest.approx(64 * block / 2, rel=0.15)


@pytest.mark.parametrize("adversary", ["stop_on_fire", "update_chaser"])
def test_robust_tracker_withstands_adaptive_adversaries(adversary):
    config = ExperimentConfig(
        mechanism="robust", adversary=adversary, k=64, alpha=0.1, items=25000, initial_count=100000, trials=2
    )
    for trial in range(2):
        _, metrics = run_trial(config, trial)
        assert not metrics.failed


@pytest.mark.parametrize("adversary", ["stop_on_fire", "update_chaser", "replay:single_site:1"])
def test_deterministic_tracker_withstands_everything(adversary):
    config = ExperimentConfig(mechanism="deterministic", adversary=adversary, k=8, alpha=0.1, items=5000, trials=1)
    _, metrics = run_trial(config, 0)
    assert metrics.max_rel_error <= 0.1 + 8 / metrics.error_floor


@pytest.mark.parametrize(
    "items, trials, allowed",
    [(25000, 10, 1), pytest.param(200_000, 100, 10, marks=pytest.mark.slow)],
)
def test_oblivious_baseline_holds_under_replay(items, trials, allowed):
    config = ExperimentConfig(
        mechanism="oblivious", k=64, alpha=0.1, items=items, initial_count=100000, trials=trials
    )
    report = run_trials(config, workers=1 if trials <= 10 else None)
    assert report.failures <= allowed
