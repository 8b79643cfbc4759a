import pytest

from app.services.noise import NoiseMode, derive_stream
from app.services.tracking import Announcement, Transcript

# k=4 (s=2), Delta=3, beta=0.3: C ~ 3.387, T ~ 13.55, k' = 14
HAND_K = 4
HAND_BLOCK = 3
HAND_BETA = 0.3
HAND_N0 = 1000
HAND_K_PRIME = 14


def hand_database(site4_block4: int = 3) -> list[list[int]]:
    """Every threshold 2 except site 4, block 4."""
    database = [[2] * HAND_K_PRIME for _ in range(HAND_K)]
    database[3][3] = site4_block4
    return database


@pytest.fixture
def quiet_stream():
    return derive_stream(11, (("test", 0),), NoiseMode.DISABLED)


@pytest.fixture
def noisy_stream():
    return derive_stream(11, (("test", 0),))


def drive(adversary, announce=lambda action: Announcement.no_change(0.0)) -> list[int]:
    """Plays an adversary against a fixed answer rule and returns the delivered sites."""
    transcript = Transcript()
    sites = []
    count = 0
    while True:
        action = adversary.next_action(transcript.view())
        if action is None:
            return sites
        count += 1
        sites.append(action.site)
        transcript.append(action, announce(action), count)
