"""Precedence comparison and the two pruning mechanisms.

Incremental pruning acts during growth: among candidates with the same
source point and the same point set, only the minimum-travel-cost orderings
can ever head an optimal route, whatever prefix is later prepended (their
pick-up probabilities are identical, so the comparison is safe for any
horizon).  Batch pruning acts per finished level: among candidates with the
same source and length, only the Pareto front of (travel cost, miss
probability) can be optimal for any origin closer than the horizon.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .core import Candidate
from .errors import InvariantError


class Precedence(enum.Enum):
    FIRST_PRECEDES = "first_precedes"
    SECOND_PRECEDES = "second_precedes"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"


class InsertOutcome(enum.Enum):
    KEPT_NEW = "kept_new"
    KEPT_TIE = "kept_tie"
    DISCARDED = "discarded"


def _close(a: float, b: float, tol: float) -> bool:
    """Relative closeness; tol == 0 degrades to exact equality."""
    if tol == 0.0:
        return a == b
    return math.isclose(a, b, rel_tol=tol, abs_tol=0.0)


def compare_precedence(a: Candidate, b: Candidate, tol: float = 0.0) -> Precedence:
    """Pareto comparison on (travel cost, miss probability), both minimized.

    Only meaningful between candidates sharing source point and length; the
    caller enforces that regime.
    """
    qa, qb = 1.0 - a.pickup_prob, 1.0 - b.pickup_prob
    t_eq = _close(a.travel_cost, b.travel_cost, tol)
    q_eq = _close(qa, qb, tol)
    if t_eq and q_eq:
        return Precedence.EQUIVALENT
    a_t = t_eq or a.travel_cost < b.travel_cost   # a no worse on travel cost
    a_q = q_eq or qa < qb                          # a no worse on miss probability
    if a_t and a_q:
        return Precedence.FIRST_PRECEDES
    if (t_eq or b.travel_cost < a.travel_cost) and (q_eq or qb < qa):
        return Precedence.SECOND_PRECEDES
    return Precedence.INCOMPARABLE


@dataclass
class _Bucket:
    min_cost: float
    members: list[Candidate] = field(default_factory=list)


class LevelIndex:
    """Per-level index from (source, point set) to the candidates currently
    sharing the minimum travel cost for that key."""

    def __init__(self, tol: float = 0.0):
        if tol < 0.0:
            raise InvariantError(f"tie tolerance must be non-negative, got {tol}")
        self.tol = tol
        self._buckets: dict[tuple[int, int], _Bucket] = {}
        self.live = 0        # candidates currently held
        self.peak_live = 0   # high-water mark of ``live``

    def __len__(self) -> int:
        return self.live

    def insert(self, cand: Candidate) -> tuple[InsertOutcome, list[Candidate]]:
        key = (cand.seq.source, cand.seq.mask)
        bucket = self._buckets.get(key)
        if bucket is None:
            self._buckets[key] = _Bucket(cand.travel_cost, [cand])
            self.live += 1
            if self.live > self.peak_live:
                self.peak_live = self.live
            return InsertOutcome.KEPT_NEW, []
        if _close(cand.travel_cost, bucket.min_cost, self.tol):
            bucket.members.append(cand)
            bucket.min_cost = min(bucket.min_cost, cand.travel_cost)
            self.live += 1
            if self.live > self.peak_live:
                self.peak_live = self.live
            return InsertOutcome.KEPT_TIE, []
        if cand.travel_cost < bucket.min_cost:
            evicted = bucket.members
            self._buckets[key] = _Bucket(cand.travel_cost, [cand])
            self.live += 1 - len(evicted)
            return InsertOutcome.KEPT_NEW, evicted
        return InsertOutcome.DISCARDED, []

    def candidates(self) -> list[Candidate]:
        """All surviving candidates in canonical order."""
        out = [c for bucket in self._buckets.values() for c in bucket.members]
        out.sort(key=Candidate.sort_key)
        return out


def incremental_insert(
    index: LevelIndex, cand: Candidate, tol: float | None = None
) -> tuple[InsertOutcome, list[Candidate]]:
    """Offer a candidate to the index, evicting anything it strictly beats."""
    if tol is not None and tol != index.tol:
        raise InvariantError("tie tolerance is fixed per index")
    return index.insert(cand)


@dataclass(frozen=True)
class PruneStats:
    enumerated: int
    kept: int

    def __post_init__(self):
        if not 0 <= self.kept <= self.enumerated:
            raise InvariantError(f"kept {self.kept} outside 0..{self.enumerated}")

    @property
    def ratio(self) -> float:
        if self.enumerated == 0:
            return 0.0
        return (self.enumerated - self.kept) / self.enumerated


def batch_prune(level: list[Candidate], tol: float = 0.0) -> tuple[list[Candidate], PruneStats]:
    """Keep, per source point, the Pareto front of (travel cost, miss
    probability); equivalent duplicates all survive.

    All input candidates must share one length.  Output is deterministically
    ordered by (source, travel cost, point set, point order).
    """
    if level:
        length = len(level[0].seq)
        for c in level:
            if len(c.seq) != length:
                raise InvariantError("batch pruning needs candidates of a single length")

    by_source: dict[int, list[Candidate]] = {}
    for cand in level:
        by_source.setdefault(cand.seq.source, []).append(cand)

    survivors: list[Candidate] = []
    for group in by_source.values():
        if tol == 0.0:
            survivors.extend(_pareto_exact(group))
        else:
            survivors.extend(_pareto_tolerant(group, tol))
    survivors.sort(key=Candidate.sort_key)
    return survivors, PruneStats(enumerated=len(level), kept=len(survivors))


def _pareto_exact(group: list[Candidate]) -> list[Candidate]:
    """Single sweep over the group sorted by (travel cost, miss probability).

    A candidate is dominated iff some strictly cheaper candidate has a miss
    probability no larger, or an equally cheap one has a strictly smaller
    miss probability.
    """
    decorated = sorted(((c.travel_cost, 1.0 - c.pickup_prob, c) for c in group),
                       key=lambda t: (t[0], t[1]))
    out: list[Candidate] = []
    best_q = math.inf  # smallest miss probability among strictly cheaper candidates
    i = 0
    n = len(decorated)
    while i < n:
        j = i
        while j < n and decorated[j][0] == decorated[i][0]:
            j += 1
        group_min_q = decorated[i][1]
        for k in range(i, j):
            _, q, cand = decorated[k]
            if q == group_min_q and q < best_q:
                out.append(cand)
        best_q = min(best_q, group_min_q)
        i = j
    return out


def _pareto_tolerant(group: list[Candidate], tol: float) -> list[Candidate]:
    # Quadratic scan; only used with a nonzero tie tolerance, where sorting
    # by fuzzy keys is not well defined.  Groups are small at desk scale.
    out = []
    for cand in group:
        dominated = any(
            other is not cand
            and compare_precedence(other, cand, tol) is Precedence.FIRST_PRECEDES
            for other in group
        )
        if not dominated:
            out.append(cand)
    return out


def incremental_pruning_ratio(length: int) -> float:
    """Fraction of all length-L sequences removed by incremental pruning on a
    tie-free instance: 1 - 1/(L-1)!."""
    if length < 3:
        raise InvariantError(
            f"incremental pruning only acts on lengths >= 3, got {length}"
        )
    return 1.0 - 1.0 / math.factorial(length - 1)
