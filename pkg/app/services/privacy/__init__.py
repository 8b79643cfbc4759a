from .leak import LeakSet, compute_leak_set, query_value

__all__ = ["LeakSet", "compute_leak_set", "query_value"]
