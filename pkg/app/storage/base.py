"""
Abstract base class for storage backends.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, List

from app.schemas.experiment import ExperimentConfig
from app.schemas.metrics import AggregateReport


class StorageBackend(ABC):
    """
    Abstract base class for experiment storage.

    Implementations should handle:
    - Saving an aggregate together with its per-trial rows
    - Deduplication on the configuration fingerprint
    - Simple queries for stored results
    """

    @abstractmethod
    def save_experiment(self, config: ExperimentConfig, report: AggregateReport) -> bool:
        """
        Save one experiment with all its trials.

        Args:
            config: Configuration the report was produced from
            report: Aggregate report, per-trial metrics included

        Returns:
            bool: True if saved, False if the configuration is already stored
        """
        pass

    @abstractmethod
    def experiment_exists(self, fingerprint: str) -> bool:
        """
        Check if an experiment with this configuration fingerprint is stored.
        """
        pass

    @abstractmethod
    def get_experiment_count(self) -> int:
        pass

    @abstractmethod
    def get_trials(self, fingerprint: str) -> List[Dict[str, Any]]:
        """
        Get the per-trial rows of a stored experiment.

        Returns:
            list: One dict per trial with the trial CSV columns, ordered by trial
        """
        pass

    @abstractmethod
    def get_statistics(self) -> Dict[str, Any]:
        pass
