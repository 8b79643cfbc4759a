"""
Oblivious adversaries: the stream is fixed in advance and announcements are ignored.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.errors import ParameterError
from app.services.adversaries.base import Adversary
from app.services.noise import RngStream
from app.services.tracking.core import StepAction
from app.services.tracking.transcript import TranscriptView

_WEIGHTED_CHUNK = 4096


@dataclass
class RoundRobinReplay(Adversary):
    def choose(self, view: TranscriptView) -> StepAction:
        return StepAction.deliver(self.delivered % self.k + 1)

    @property
    def label(self) -> str:
        return "replay:round_robin"


@dataclass
class SingleSiteReplay(Adversary):
    site: int = 1

    def __post_init__(self):
        super().__post_init__()
        if not 1 <= self.site <= self.k:
            raise ParameterError(f"Site {self.site} outside 1..{self.k}")

    def choose(self, view: TranscriptView) -> StepAction:
        return StepAction.deliver(self.site)

    @property
    def label(self) -> str:
        return f"replay:single_site:{self.site}"


@dataclass
class WeightedReplay(Adversary):
    """Each item goes to site i with probability w_i / sum(w), drawn from the adversary's own stream."""

    weights: list[float] = field(default_factory=list)
    rng: Optional[RngStream] = None
    _probabilities: np.ndarray = field(init=False, repr=False)
    _pending: list[int] = field(default_factory=list, init=False, repr=False)

    def __post_init__(self):
        super().__post_init__()
        if len(self.weights) != self.k:
            raise ParameterError(f"Need {self.k} weights, got {len(self.weights)}")
        w = np.asarray(self.weights, dtype=float)
        if (w < 0).any() or w.sum() <= 0:
            raise ParameterError("Weights must be nonnegative with a positive sum")
        self._probabilities = w / w.sum()
        if self.rng is None:
            self.rng = RngStream(0, (("adversary", 0),))

    def choose(self, view: TranscriptView) -> StepAction:
        if not self._pending:
            draws = self.rng.generator.choice(self.k, size=_WEIGHTED_CHUNK, p=self._probabilities)
            # reversed so pop() yields draws in order
            self._pending = (draws[::-1] + 1).tolist()
        return StepAction.deliver(self._pending.pop())

    @property
    def label(self) -> str:
        return "replay:weighted:" + ",".join(f"{w:g}" for w in self.weights)
