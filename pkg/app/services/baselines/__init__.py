from .deterministic import DeterministicTracker, DetSiteState, det_estimate, det_step
from .oblivious import ObliviousTracker, oblivious_block_size

__all__ = [
    "DeterministicTracker",
    "DetSiteState",
    "det_estimate",
    "det_step",
    "ObliviousTracker",
    "oblivious_block_size",
]
