from .server import ServerState, server_begin_round, server_on_bit
from .site import SiteMsg, SiteState, site_begin_round, site_receive_item
from .tracker import RobustTracker, TrackerMode, end_round

__all__ = [
    "ServerState",
    "server_begin_round",
    "server_on_bit",
    "SiteMsg",
    "SiteState",
    "site_begin_round",
    "site_receive_item",
    "RobustTracker",
    "TrackerMode",
    "end_round",
]
