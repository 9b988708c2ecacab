"""Offline/online engine for minimal-expected-cost pick-up routes.

Offline, `backward_growth` builds pruned sets of pick-up sequences of every
length; online, `query_routes` evaluates them against a cab position and
returns all minimum-cost routes in a length range.  `baselines` holds the
brute-force oracles used to verify both stages.
"""

from .core import (
    Candidate,
    Instance,
    Origin,
    Route,
    Sequence,
    extend_candidate,
    pickup_probability,
    route_cost,
    route_cost_direct,
    route_cost_waiting,
    seed_candidate,
    travel_cost_direct,
)
from .errors import (
    HorizonError,
    InvariantError,
    MembershipError,
    MissingLevelError,
    MsrecError,
    NoRouteError,
    ParseError,
    StoreMismatchError,
    VerificationError,
)
from .growth import (
    CandidateStore,
    GenerationStats,
    LevelStats,
    backward_growth,
    batch_view,
    generate_level,
    generation_work_bound,
)
from .pruning import (
    InsertOutcome,
    LevelIndex,
    Precedence,
    PruneStats,
    batch_prune,
    compare_precedence,
    incremental_insert,
    incremental_pruning_ratio,
)
from .query import Dispatcher, Query, RouteSet, query_routes, query_routes_dest, round_robin
from .storage import (
    load_instance,
    load_store,
    save_instance,
    save_store,
    synthetic_instance,
)

__version__ = "0.1.0"

__all__ = [
    "Candidate",
    "CandidateStore",
    "Dispatcher",
    "GenerationStats",
    "HorizonError",
    "Instance",
    "InsertOutcome",
    "InvariantError",
    "LevelIndex",
    "LevelStats",
    "MembershipError",
    "MissingLevelError",
    "MsrecError",
    "NoRouteError",
    "Origin",
    "ParseError",
    "Precedence",
    "PruneStats",
    "Query",
    "Route",
    "RouteSet",
    "Sequence",
    "StoreMismatchError",
    "VerificationError",
    "backward_growth",
    "batch_prune",
    "batch_view",
    "compare_precedence",
    "extend_candidate",
    "generate_level",
    "generation_work_bound",
    "incremental_insert",
    "incremental_pruning_ratio",
    "load_instance",
    "load_store",
    "pickup_probability",
    "query_routes",
    "query_routes_dest",
    "round_robin",
    "route_cost",
    "route_cost_direct",
    "route_cost_waiting",
    "save_instance",
    "save_store",
    "seed_candidate",
    "synthetic_instance",
    "travel_cost_direct",
]
