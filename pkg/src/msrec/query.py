"""Online stage: evaluate stored candidates against a cab position.

A query scans the stored levels in its length range, computes each
candidate's route cost from the two cached values, and returns every route
achieving the minimum.  Scans are read-only; any number may run at once.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Candidate, Instance, Origin, Route, route_cost
from .errors import (
    HorizonError,
    InvariantError,
    NoRouteError,
    StoreMismatchError,
)
from .growth import CandidateStore


@dataclass(frozen=True)
class Query:
    origin: Origin
    l_min: int
    l_max: int
    destination: int | None = None

    def __post_init__(self):
        if not 1 <= self.l_min <= self.l_max:
            raise InvariantError(f"bad length range [{self.l_min}, {self.l_max}]")

    def validate(self, inst: Instance):
        if self.l_max > inst.n:
            raise InvariantError(f"l_max {self.l_max} exceeds instance size {inst.n}")
        if self.destination is not None and not 0 <= self.destination < inst.n:
            raise InvariantError(f"destination {self.destination} not in instance")
        row = self.origin.cost_row(inst)
        worst = max(row)
        if worst >= inst.horizon:
            raise HorizonError(
                f"origin cost {worst} reaches the horizon {inst.horizon}"
            )


@dataclass(frozen=True)
class RouteSet:
    """All minimum-cost routes for one query; every member shares ``cost``."""

    routes: tuple[Route, ...]
    cost: float

    def __post_init__(self):
        if not self.routes:
            raise InvariantError("a route set cannot be empty")


def _check_store(store: CandidateStore, inst: Instance, q: Query):
    if store.fingerprint != inst.fingerprint:
        raise StoreMismatchError(
            "store was precomputed for a different instance "
            f"({store.fingerprint[:12]}... vs {inst.fingerprint[:12]}...)"
        )
    q.validate(inst)
    for length in range(q.l_min, q.l_max + 1):
        store.level(length)  # raises MissingLevelError


def _scan(
    store: CandidateStore, inst: Instance, q: Query, destination: int | None
) -> RouteSet:
    row = q.origin.cost_row(inst)
    miss = inst.miss_probs
    horizon = inst.horizon

    best = float("inf")
    ties: list[Candidate] = []
    for length in range(q.l_min, q.l_max + 1):
        for cand in store.level(length):
            points = cand.seq.points
            if destination is not None and points[-1] != destination:
                continue
            cost = (
                miss[points[0]] * cand.travel_cost
                + row[points[0]] * cand.pickup_prob
                + horizon * (1.0 - cand.pickup_prob)
            )
            if cost < best:
                best = cost
                ties = [cand]
            elif cost == best:
                ties.append(cand)
    if not ties:
        raise NoRouteError(
            f"no stored candidate ends at point {destination} "
            f"for lengths {q.l_min}..{q.l_max}"
        )
    return RouteSet(
        routes=tuple(Route(q.origin, c, best) for c in ties),
        cost=best,
    )


def query_routes(store: CandidateStore, inst: Instance, q: Query) -> RouteSet:
    """All minimum-expected-cost routes for the query's origin and lengths.

    Ties are collected on exact cost equality and come out in stored
    (canonical) candidate order, so results are deterministic.
    """
    _check_store(store, inst, q)
    if q.destination is not None:
        return query_routes_dest(store, inst, q)
    if store.destination is not None:
        raise InvariantError(
            "store is destination-constrained; query it with a destination"
        )
    return _scan(store, inst, q, None)


def query_routes_dest(store: CandidateStore, inst: Instance, q: Query) -> RouteSet:
    """Like ``query_routes`` but restricted to routes ending at the query's
    destination.  Works on a store grown for that destination or on an
    unconstrained store, which is filtered on the fly."""
    if q.destination is None:
        raise InvariantError("destination query without a destination")
    _check_store(store, inst, q)
    if store.destination is not None and store.destination != q.destination:
        raise InvariantError(
            f"store holds routes to point {store.destination}, "
            f"query asks for point {q.destination}"
        )
    # A single-destination store needs no filtering; its candidates all end
    # at the destination already.
    dest = None if store.destination == q.destination else q.destination
    return _scan(store, inst, q, dest)


class Dispatcher:
    """Round-robin assignment of per-source optimal routes to many cabs.

    The table holds, for every source point surviving at the configured
    lengths, the best stored candidate assuming a cab already at that source
    (zero origin leg); that makes the table origin-free.  Request k is served
    the ((k-1) mod table size)-th entry, evaluated at the requesting cab's
    actual position.
    """

    def __init__(self, store: CandidateStore, inst: Instance, l_min: int, l_max: int):
        if store.fingerprint != inst.fingerprint:
            raise StoreMismatchError("store does not match instance")
        if not 1 <= l_min <= l_max <= inst.n:
            raise InvariantError(f"bad length range [{l_min}, {l_max}]")
        for length in range(l_min, l_max + 1):
            store.level(length)
        self.store = store
        self.inst = inst
        self.l_min = l_min
        self.l_max = l_max
        self.counter = 0
        self._table: list[Candidate] | None = None

    @property
    def table(self) -> list[Candidate]:
        if self._table is None:
            self._table = self._build_table()
        return self._table

    def _build_table(self) -> list[Candidate]:
        miss = self.inst.miss_probs
        horizon = self.inst.horizon
        best: dict[int, tuple[float, tuple, Candidate]] = {}
        for length in range(self.l_min, self.l_max + 1):
            for cand in self.store.level(length):
                src = cand.seq.source
                score = (
                    miss[src] * cand.travel_cost
                    + horizon * (1.0 - cand.pickup_prob)
                )
                entry = (score, cand.sort_key(), cand)
                if src not in best or entry < best[src]:
                    best[src] = entry
        if not best:
            raise NoRouteError("no candidates in the configured length range")
        return [best[src][2] for src in sorted(best)]

    def next_route(self, origin: Origin) -> Route:
        table = self.table
        cand = table[self.counter % len(table)]
        self.counter += 1
        return Route(origin, cand, route_cost(origin, cand, self.inst))


def round_robin(dispatcher: Dispatcher, origin: Origin) -> Route:
    """Serve the next request in the dispatcher's circular order."""
    return dispatcher.next_route(origin)
