"""
SQLAlchemy storage backend for experiment results.
"""
import hashlib
import logging
from typing import Any, Dict, List, Optional, Set

from sqlalchemy import create_engine, func
from sqlalchemy.orm import Session, sessionmaker

from app.schemas.experiment import ExperimentConfig
from app.schemas.metrics import AggregateReport
from app.settings import settings

from .base import StorageBackend
from .models import Base, Experiment, TrialResult

logger = logging.getLogger(__name__)


def config_fingerprint(config: ExperimentConfig) -> str:
    return hashlib.sha256(config.model_dump_json().encode()).hexdigest()


class SqlStorage(StorageBackend):
    """
    Storage backend on any SQLAlchemy URL (sqlite, postgres, ...).
    """

    def __init__(self, database_url: Optional[str] = None):
        """
        Initialize SQL storage.

        Args:
            database_url: SQLAlchemy connection URL. If not provided, reads settings.DATABASE_URL.

        Raises:
            ValueError: If no URL is configured.
        """
        self.database_url = database_url or settings.DATABASE_URL
        if not self.database_url:
            raise ValueError("DATABASE_URL setting or database_url parameter required")

        self.engine = create_engine(self.database_url, pool_pre_ping=True)
        self.SessionLocal = sessionmaker(bind=self.engine)

        # Create tables if they don't exist
        Base.metadata.create_all(self.engine)

        # Cache of stored fingerprints for fast lookup
        self._fingerprints: Optional[Set[str]] = None

    def _get_session(self) -> Session:
        """Get a new database session."""
        return self.SessionLocal()

    def _load_fingerprints(self) -> Set[str]:
        if self._fingerprints is None:
            with self._get_session() as session:
                self._fingerprints = {r[0] for r in session.query(Experiment.fingerprint).all()}
        return self._fingerprints

    def save_experiment(self, config: ExperimentConfig, report: AggregateReport) -> bool:
        """Save an experiment and its trial rows; skipped when the fingerprint is already stored."""
        fingerprint = config_fingerprint(config)
        if self.experiment_exists(fingerprint):
            return False

        with self._get_session() as session:
            try:
                session.add(
                    Experiment(
                        fingerprint=fingerprint,
                        config_json=config.model_dump_json(),
                        mechanism=report.mechanism,
                        adversary=report.adversary,
                        k=report.k,
                        alpha=report.alpha,
                        delta=report.delta,
                        items=report.items,
                        trials=report.trials,
                        seed=report.seed,
                        failure_fraction=report.failure_fraction,
                        mean_total_words=report.mean_total_words,
                    )
                )
                for metrics in report.per_trial:
                    session.add(TrialResult(fingerprint=fingerprint, **metrics.csv_row()))
                session.commit()
            except Exception as e:
                session.rollback()
                logger.error(f"Error saving experiment {fingerprint[:12]}: {e}")
                return False

        self._load_fingerprints().add(fingerprint)
        return True

    def experiment_exists(self, fingerprint: str) -> bool:
        return fingerprint in self._load_fingerprints()

    def get_experiment_count(self) -> int:
        with self._get_session() as session:
            return session.query(func.count(Experiment.id)).scalar() or 0

    def get_trials(self, fingerprint: str) -> List[Dict[str, Any]]:
        with self._get_session() as session:
            rows = (
                session.query(TrialResult)
                .filter(TrialResult.fingerprint == fingerprint)
                .order_by(TrialResult.trial)
                .all()
            )
            return [
                {
                    "trial": r.trial,
                    "seed": r.seed,
                    "mechanism": r.mechanism,
                    "adversary": r.adversary,
                    "k": r.k,
                    "alpha": r.alpha,
                    "delta": r.delta,
                    "n_items": r.n_items,
                    "max_rel_error": r.max_rel_error,
                    "failed": r.failed,
                    "total_words": r.total_words,
                    "rounds": r.rounds,
                }
                for r in rows
            ]

    def get_statistics(self) -> Dict[str, Any]:
        with self._get_session() as session:
            stats = {
                "total_experiments": session.query(func.count(Experiment.id)).scalar() or 0,
                "total_trials": session.query(func.count(TrialResult.id)).scalar() or 0,
                "last_saved": None,
                "storage_type": self.engine.dialect.name,
            }
            last = session.query(func.max(Experiment.created_at)).scalar()
            if last:
                stats["last_saved"] = last.isoformat()
            return stats
