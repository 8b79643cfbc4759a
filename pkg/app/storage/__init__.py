from .base import StorageBackend
from .sql_storage import SqlStorage, config_fingerprint

__all__ = ["StorageBackend", "SqlStorage", "config_fingerprint"]
