from app.schemas.experiment import AdversarySpec
from app.services.noise import RngStream

from .adaptive import StopOnFire, UpdateChaser
from .base import Adversary
from .replay import RoundRobinReplay, SingleSiteReplay, WeightedReplay


def build_adversary(spec: AdversarySpec, k: int, budget: int, rng: RngStream) -> Adversary:
    """
    Instantiates the adversary an `AdversarySpec` describes.

    Args:
        spec (AdversarySpec): Parsed adversary description.
        k (int): Number of sites.
        budget (int): Items to deliver.
        rng (RngStream): The adversary's own stream (used by weighted replay).
    """
    if spec.kind == "stop_on_fire":
        return StopOnFire(k, budget)
    if spec.kind == "update_chaser":
        return UpdateChaser(k, budget)
    if spec.schedule == "single_site":
        return SingleSiteReplay(k, budget, site=spec.site)
    if spec.schedule == "weighted":
        return WeightedReplay(k, budget, weights=list(spec.weights), rng=rng)
    return RoundRobinReplay(k, budget)


__all__ = [
    "Adversary",
    "RoundRobinReplay",
    "SingleSiteReplay",
    "WeightedReplay",
    "StopOnFire",
    "UpdateChaser",
    "build_adversary",
]
