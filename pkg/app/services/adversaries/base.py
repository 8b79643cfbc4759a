from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional

from app.errors import ParameterError
from app.services.tracking.core import StepAction
from app.services.tracking.transcript import TranscriptView


@dataclass
class Adversary(ABC):
    """
    Base class for all input strategies.

    An adversary sees nothing but the transcript view (its own past actions and
    the announcements) and stops once it has delivered `budget` items.

    Args:
        k (int): Number of sites.
        budget (int): Items to deliver before stopping.
    """

    k: int
    budget: int
    delivered: int = field(default=0, init=False)

    def __post_init__(self):
        if self.budget < 0:
            raise ParameterError(f"Item budget must be nonnegative, got {self.budget}")
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")

    @property
    def exhausted(self) -> bool:
        return self.delivered >= self.budget

    def next_action(self, view: TranscriptView) -> Optional[StepAction]:
        """
        Next move of the game.

        Returns:
            Optional[StepAction]: The action, or None once the budget is spent.
        """
        if self.exhausted:
            return None
        action = self.choose(view)
        if not action.is_skip:
            self.delivered += 1
        return action

    @abstractmethod
    def choose(self, view: TranscriptView) -> StepAction:
        """Picks the next action; only called while budget remains."""

    @property
    def label(self) -> str:
        return type(self).__name__
