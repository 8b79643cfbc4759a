"""
SQLAlchemy models for experiment results.
"""
from datetime import datetime

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Index, Integer, String, Text
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


class Experiment(Base):
    """One aggregate run of `run_trials`."""
    __tablename__ = "experiments"

    id = Column(Integer, primary_key=True, autoincrement=True)
    fingerprint = Column(String(64), unique=True, nullable=False, index=True)
    config_json = Column(Text)
    mechanism = Column(String(32), index=True)
    adversary = Column(String(255))
    k = Column(Integer)
    alpha = Column(Float)
    delta = Column(Float)
    items = Column(Integer)
    trials = Column(Integer)
    seed = Column(Integer)
    failure_fraction = Column(Float)
    mean_total_words = Column(Float)
    created_at = Column(DateTime, default=datetime.utcnow)

    trial_results = relationship("TrialResult", back_populates="experiment", cascade="all, delete-orphan")

    __table_args__ = (
        Index("idx_experiment_scaling", "mechanism", "k", "alpha"),
    )


class TrialResult(Base):
    """Per-trial row, same columns as the trial CSV."""
    __tablename__ = "trial_results"

    id = Column(Integer, primary_key=True, autoincrement=True)
    fingerprint = Column(
        String(64), ForeignKey("experiments.fingerprint", ondelete="CASCADE"), nullable=False, index=True
    )
    trial = Column(Integer)
    seed = Column(Integer)
    mechanism = Column(String(32))
    adversary = Column(String(255))
    k = Column(Integer)
    alpha = Column(Float)
    delta = Column(Float)
    n_items = Column(Integer)
    max_rel_error = Column(Float)
    failed = Column(Boolean)
    total_words = Column(Integer)
    rounds = Column(Integer)

    experiment = relationship("Experiment", back_populates="trial_results")
