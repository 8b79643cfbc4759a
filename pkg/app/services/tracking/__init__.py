from .core import (
    Announcement,
    CommLedger,
    ItemEvent,
    RoundParams,
    StepAction,
    Tag,
    bootstrap_threshold,
    communication_bound,
    derive_global_beta,
    derive_round_params,
)
from .transcript import ItemContext, ItemLog, Transcript, TranscriptView

__all__ = [
    "Announcement",
    "CommLedger",
    "ItemEvent",
    "RoundParams",
    "StepAction",
    "Tag",
    "bootstrap_threshold",
    "communication_bound",
    "derive_global_beta",
    "derive_round_params",
    "ItemContext",
    "ItemLog",
    "Transcript",
    "TranscriptView",
]
