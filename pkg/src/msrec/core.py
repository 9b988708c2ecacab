"""Domain types and cost arithmetic for expected-cruising-cost routes.

A route starts at a cab position, visits an ordered sequence of pick-up
points, and is charged a fixed horizon cost if every pick-up fails.  Its
expected cost is the dot product of the cumulative-distance vector with the
first-success probability vector.  Two cached quantities make that cost
cheap to evaluate for any origin:

  travel_cost   origin-free part of the expected cost (0 for a single point),
                maintained under prepending a point via a backward recursion
  pickup_prob   probability that some point in the sequence yields a pick-up

``route_cost`` combines them; ``route_cost_direct`` evaluates the full dot
product from scratch and serves as the independent oracle.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence as SeqABC

import numpy as np

from .errors import HorizonError, InvariantError, MembershipError

MAX_POINTS = 64  # point sets must fit a single machine-word bitmask

METRICS = ("distance", "time")


def _as_float_tuple(values) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class Instance:
    """A set of pick-up points with probabilities and pairwise travel costs.

    ``cost[i][j]`` is the cost of driving from point i to point j; asymmetry
    is allowed and the diagonal must be zero.  ``horizon`` is the fixed cost
    charged when a whole route fails to produce a passenger; it is shared by
    routes of every length so their costs are comparable.

    By default construction requires ``horizon > (n + 1) * max(cost)``, which
    guarantees the horizon exceeds any possible path cost and therefore that
    batch pruning is safe for arbitrarily prefixed routes.  Pass
    ``strict_horizon=False`` to accept instances that only guarantee safety
    for directly queried origins (origin cost < horizon).
    """

    probs: tuple[float, ...]
    cost: tuple[tuple[float, ...], ...]
    horizon: float
    metric: str = "distance"
    coords: tuple[tuple[float, float], ...] | None = None
    strict_horizon: bool = True

    def __post_init__(self):
        object.__setattr__(self, "probs", _as_float_tuple(self.probs))
        object.__setattr__(self, "cost", tuple(_as_float_tuple(row) for row in self.cost))
        object.__setattr__(self, "horizon", float(self.horizon))
        if self.coords is not None:
            object.__setattr__(
                self, "coords", tuple((float(x), float(y)) for x, y in self.coords)
            )
        self._validate()

    def _validate(self):
        n = len(self.probs)
        if not 1 <= n <= MAX_POINTS:
            raise InvariantError(f"need 1..{MAX_POINTS} points, got {n}")
        for i, p in enumerate(self.probs):
            if not 0.0 <= p <= 1.0 or math.isnan(p):
                raise InvariantError(f"probability of point {i} is {p}, not in [0, 1]")
        if len(self.cost) != n:
            raise InvariantError(f"cost matrix has {len(self.cost)} rows, expected {n}")
        for i, row in enumerate(self.cost):
            if len(row) != n:
                raise InvariantError(f"cost matrix row {i} has {len(row)} entries, expected {n}")
            for j, c in enumerate(row):
                if not math.isfinite(c) or c < 0.0:
                    raise InvariantError(f"cost[{i}][{j}] = {c} is not a finite non-negative value")
            if row[i] != 0.0:
                raise InvariantError(f"cost[{i}][{i}] = {row[i]}, diagonal must be zero")
        if not math.isfinite(self.horizon) or self.horizon <= 0.0:
            raise InvariantError(f"horizon must be a positive finite value, got {self.horizon}")
        if self.metric not in METRICS:
            raise InvariantError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.coords is not None and len(self.coords) != n:
            raise InvariantError(f"{len(self.coords)} coordinate pairs for {n} points")
        if self.strict_horizon and self.horizon <= self.horizon_bound:
            raise InvariantError(
                f"horizon {self.horizon} does not exceed (n + 1) * max cost = "
                f"{self.horizon_bound}; pass strict_horizon=False to accept"
            )

    @property
    def n(self) -> int:
        return len(self.probs)

    @cached_property
    def max_cost(self) -> float:
        return max(max(row) for row in self.cost)

    @cached_property
    def horizon_bound(self) -> float:
        """Smallest horizon (exclusive) that makes every path cost safe."""
        return (self.n + 1) * self.max_cost

    @cached_property
    def miss_probs(self) -> tuple[float, ...]:
        """Per-point probability of NOT picking up a passenger."""
        return tuple(1.0 - p for p in self.probs)

    @cached_property
    def cost_array(self) -> np.ndarray:
        return np.array(self.cost, dtype=np.float64)

    @cached_property
    def miss_array(self) -> np.ndarray:
        return np.array(self.miss_probs, dtype=np.float64)

    @cached_property
    def fingerprint(self) -> str:
        """Content hash tying candidate stores to the instance they came from."""
        h = hashlib.sha256()
        h.update(b"msrec-instance-1")
        h.update(struct.pack("<IH", self.n, METRICS.index(self.metric)))
        h.update(struct.pack(f"<{self.n}d", *self.probs))
        for row in self.cost:
            h.update(struct.pack(f"<{self.n}d", *row))
        h.update(struct.pack("<d", self.horizon))
        return h.hexdigest()


@dataclass(frozen=True)
class Sequence:
    """An ordered list of distinct pick-up points."""

    points: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(int(p) for p in self.points))
        if not self.points:
            raise InvariantError("a sequence needs at least one point")
        mask = 0
        for p in self.points:
            if not 0 <= p < MAX_POINTS:
                raise InvariantError(f"point id {p} out of range 0..{MAX_POINTS - 1}")
            bit = 1 << p
            if mask & bit:
                raise InvariantError(f"point {p} appears twice in {self.points}")
            mask |= bit
        object.__setattr__(self, "_mask", mask)

    @property
    def mask(self) -> int:
        return self._mask  # type: ignore[attr-defined]

    @property
    def source(self) -> int:
        return self.points[0]

    @property
    def last(self) -> int:
        return self.points[-1]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Candidate:
    """A sequence with its cached travel cost and pick-up probability."""

    seq: Sequence
    travel_cost: float
    pickup_prob: float

    def sort_key(self):
        return (self.seq.source, self.travel_cost, self.seq.mask, self.seq.points)


@dataclass(frozen=True)
class Origin:
    """A cab position: either one of the instance points or an explicit
    vector of travel costs from the position to every point."""

    point: int | None = None
    costs: tuple[float, ...] | None = None

    def __post_init__(self):
        if (self.point is None) == (self.costs is None):
            raise InvariantError("origin needs exactly one of: point id, cost vector")
        if self.costs is not None:
            object.__setattr__(self, "costs", _as_float_tuple(self.costs))
            for i, c in enumerate(self.costs):
                if not math.isfinite(c) or c < 0.0:
                    raise InvariantError(f"origin cost to point {i} is {c}")

    @classmethod
    def at_point(cls, point: int) -> "Origin":
        return cls(point=int(point))

    @classmethod
    def from_costs(cls, costs: Iterable[float]) -> "Origin":
        return cls(costs=tuple(costs))

    @classmethod
    def from_xy(cls, x: float, y: float, inst: Instance) -> "Origin":
        """Cab position given as coordinates; needs a coordinate instance."""
        if inst.coords is None:
            raise InvariantError("instance has no coordinates; give a point id or cost vector")
        return cls(costs=tuple(
            math.sqrt((x - px) ** 2 + (y - py) ** 2) for px, py in inst.coords
        ))

    def cost_row(self, inst: Instance) -> tuple[float, ...]:
        """Travel cost from this position to every point."""
        if self.point is not None:
            if not 0 <= self.point < inst.n:
                raise InvariantError(f"origin point {self.point} not in instance of {inst.n} points")
            return inst.cost[self.point]
        if len(self.costs) != inst.n:
            raise InvariantError(
                f"origin cost vector has {len(self.costs)} entries for {inst.n} points"
            )
        return self.costs

    def cost_to(self, target: int, inst: Instance) -> float:
        return self.cost_row(inst)[target]


@dataclass(frozen=True)
class Route:
    """An origin joined to a candidate, with its evaluated expected cost."""

    origin: Origin
    candidate: Candidate
    cost: float

    @property
    def points(self) -> tuple[int, ...]:
        return self.candidate.seq.points


def _point_ids(seq) -> tuple[int, ...]:
    return seq.points if isinstance(seq, Sequence) else tuple(seq)


def pickup_probability(probs: Iterable[float]) -> float:
    """Probability that at least one of the given pick-ups succeeds."""
    miss = 1.0
    empty = True
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise InvariantError(f"probability {p} not in [0, 1]")
        miss *= 1.0 - p
        empty = False
    if empty:
        raise InvariantError("pick-up probability of an empty sequence is undefined")
    return 1.0 - miss


def seed_candidate(point: int, inst: Instance) -> Candidate:
    """Length-1 candidate: zero travel cost, pick-up probability of the point."""
    if not 0 <= point < inst.n:
        raise InvariantError(f"point {point} not in instance of {inst.n} points")
    return Candidate(Sequence((point,)), 0.0, inst.probs[point])


def extend_candidate(point: int, cand: Candidate, inst: Instance) -> Candidate:
    """Prepend ``point`` to a candidate, updating both cached values in O(1).

    Prepending works backward: the old source becomes the second stop, so the
    old travel cost survives weighted by the chance the old source missed,
    plus the new leg weighted by the chance the old sequence picks up at all.
    """
    if cand.seq.mask >> point & 1:
        raise MembershipError(f"point {point} already in sequence {cand.seq.points}")
    src = cand.seq.source
    travel = inst.miss_probs[src] * cand.travel_cost + inst.cost[point][src] * cand.pickup_prob
    prob = inst.probs[point] + inst.miss_probs[point] * cand.pickup_prob
    return Candidate(Sequence((point,) + cand.seq.points), travel, prob)


def travel_cost_direct(seq, inst: Instance) -> float:
    """Origin-free expected travel cost evaluated as an explicit dot product.

    Independent of the recursion in ``extend_candidate``; used to check it.
    """
    points = _point_ids(seq)
    total = 0.0
    cum = 0.0
    carry = 1.0  # probability all stops after the source missed so far
    prev = points[0]
    for pt in points[1:]:
        cum += inst.cost[prev][pt]
        total += cum * carry * inst.probs[pt]
        carry *= inst.miss_probs[pt]
        prev = pt
    return total


def route_cost_direct(origin: Origin, seq, inst: Instance) -> float:
    """Expected route cost as the full cumulative-distance / first-success
    probability dot product, horizon component included.

    This is the reference oracle for ``route_cost``.  The first-success
    probabilities plus the all-miss probability must sum to one; that is
    checked on every call.
    """
    points = _point_ids(seq)
    row = origin.cost_row(inst)
    cum = row[points[0]]
    carry = 1.0
    total = 0.0
    checksum = 0.0
    prev = None
    for pt in points:
        if prev is not None:
            cum += inst.cost[prev][pt]
        weight = carry * inst.probs[pt]
        total += cum * weight
        checksum += weight
        carry *= inst.miss_probs[pt]
        prev = pt
    total += inst.horizon * carry
    checksum += carry
    if abs(checksum - 1.0) > 1e-12:
        raise InvariantError(f"probability components sum to {checksum}, expected 1")
    return total


def route_cost(origin: Origin, cand: Candidate, inst: Instance) -> float:
    """Expected route cost from the candidate's cached values.

    Equals ``route_cost_direct`` on the same sequence to within rounding.
    """
    src = cand.seq.source
    leg = origin.cost_to(src, inst)
    if leg >= inst.horizon:
        raise HorizonError(
            f"origin cost {leg} to point {src} reaches the horizon {inst.horizon}; "
            "pruned stores cannot answer such queries"
        )
    return (
        inst.miss_probs[src] * cand.travel_cost
        + leg * cand.pickup_prob
        + inst.horizon * (1.0 - cand.pickup_prob)
    )


def route_cost_waiting(
    origin: Origin,
    seq,
    inst: Instance,
    wait_time: float,
    wait_probs: SeqABC[float],
) -> float:
    """Expected time cost when the cab waits at the final point after a
    fully unsuccessful cruise.

    Three terms: cruising time to the first success (origin leg included),
    full cruise plus ``wait_time`` when every stop missed but the wait at the
    last point succeeds, and the horizon when the wait fails too.  With a
    zero wait probability this reduces to the plain time-metric route cost.
    """
    if inst.metric != "time":
        raise InvariantError("waiting cost is defined for time-metric instances only")
    if wait_time < 0.0 or not math.isfinite(wait_time):
        raise InvariantError(f"wait time {wait_time} must be finite and non-negative")
    points = _point_ids(seq)
    p_wait = float(wait_probs[points[-1]])
    if not 0.0 <= p_wait <= 1.0:
        raise InvariantError(f"wait probability {p_wait} not in [0, 1]")

    row = origin.cost_row(inst)
    cum = row[points[0]]
    carry = 1.0
    cruise = 0.0
    prev = None
    for pt in points:
        if prev is not None:
            cum += inst.cost[prev][pt]
        cruise += cum * carry * inst.probs[pt]
        carry *= inst.miss_probs[pt]
        prev = pt
    waiting = (cum + wait_time) * carry * p_wait
    missed = inst.horizon * carry * (1.0 - p_wait)
    return cruise + waiting + missed
