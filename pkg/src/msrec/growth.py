"""Offline stage: level-by-level backward growth of sequence candidates.

Level L is built by prepending every absent point to every level-(L-1)
survivor, pruning incrementally as candidates arrive.  Batch pruning is a
separate post-pass producing a derived view: a batch-pruned level must never
feed further growth, because candidates it removes can still be optimal
postfixes of longer sequences.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from .core import Candidate, Instance, seed_candidate, extend_candidate
from .errors import InvariantError, MissingLevelError
from .pruning import LevelIndex, batch_prune

IP_ONLY = "ip_only"
IP_PLUS_BATCH = "ip_plus_batch"


@dataclass(frozen=True)
class CandidateStore:
    """Per-length candidate sets, tied to their instance by fingerprint."""

    levels: dict[int, tuple[Candidate, ...]]
    fingerprint: str
    kind: str = IP_ONLY
    destination: int | None = None

    def __post_init__(self):
        if self.kind not in (IP_ONLY, IP_PLUS_BATCH):
            raise InvariantError(f"unknown store kind {self.kind!r}")
        for length, cands in self.levels.items():
            for c in cands:
                if len(c.seq) != length:
                    raise InvariantError(
                        f"candidate {c.seq.points} stored under length {length}"
                    )

    def level(self, length: int) -> tuple[Candidate, ...]:
        try:
            return self.levels[length]
        except KeyError:
            raise MissingLevelError(
                f"store has no level {length}; built levels: {sorted(self.levels)}"
            ) from None

    def has_levels(self, l_min: int, l_max: int) -> bool:
        return all(length in self.levels for length in range(l_min, l_max + 1))

    @property
    def max_level(self) -> int:
        return max(self.levels)

    def total_candidates(self) -> int:
        return sum(len(v) for v in self.levels.values())


@dataclass(frozen=True)
class LevelStats:
    enumerated_extensions: int
    kept_after_ip: int
    kept_after_batch: int | None
    peak_live_candidates: int
    wall_time: float

    def __post_init__(self):
        if self.kept_after_ip > self.enumerated_extensions:
            raise InvariantError("kept more candidates than were enumerated")
        if self.kept_after_batch is not None and self.kept_after_batch > self.kept_after_ip:
            raise InvariantError("batch pruning cannot add candidates")


@dataclass
class GenerationStats:
    levels: dict[int, LevelStats] = field(default_factory=dict)

    @property
    def total_enumerated(self) -> int:
        return sum(s.enumerated_extensions for s in self.levels.values())

    @property
    def peak_live_candidates(self) -> int:
        return max(s.peak_live_candidates for s in self.levels.values())


def generation_work_bound(n: int) -> int:
    """Total extensions enumerated growing a tie-free n-point instance to
    full length: n + n(n-1) * 2^(n-2)."""
    if n < 1:
        raise InvariantError(f"need at least one point, got {n}")
    if n == 1:
        return 1
    return n + n * (n - 1) * 2 ** (n - 2)


def _build_level(
    prev: list[Candidate], inst: Instance, tol: float, shards: int
) -> tuple[list[Candidate], int, int]:
    """One growth step.  Returns (survivors, extensions tried, peak live).

    Work is split across ``shards`` index shards keyed by the prepended
    point, so every (source, point set) key lives in exactly one shard and
    the result is independent of the shard count.
    """
    n = inst.n
    if shards < 1:
        raise InvariantError(f"shard count must be positive, got {shards}")
    shards = min(shards, n)
    indexes = [LevelIndex(tol) for _ in range(shards)]
    shard_of = [i * shards // n for i in range(n)]

    enumerated = 0
    ordered = sorted(prev, key=Candidate.sort_key)
    for cand in ordered:
        mask = cand.seq.mask
        for point in range(n):
            if mask >> point & 1:
                continue
            enumerated += 1
            indexes[shard_of[point]].insert(extend_candidate(point, cand, inst))

    survivors: list[Candidate] = []
    peak = 0
    for index in indexes:
        survivors.extend(index.candidates())
        peak += index.peak_live
    survivors.sort(key=Candidate.sort_key)
    return survivors, enumerated, peak


def generate_level(
    prev: list[Candidate], inst: Instance, tol: float = 0.0, shards: int = 1
) -> list[Candidate]:
    """All incrementally-pruned candidates one longer than ``prev``."""
    survivors, _, _ = _build_level(list(prev), inst, tol, shards)
    return survivors


def backward_growth(
    inst: Instance,
    l_max: int,
    *,
    batch: bool = False,
    destination: int | None = None,
    tol: float = 0.0,
    shards: int = 1,
) -> tuple[CandidateStore, GenerationStats]:
    """Grow candidate levels 1..l_max with incremental pruning.

    With ``batch=True`` the returned store holds the batch-pruned view of
    every level; growth itself always runs on the incrementally-pruned
    levels.  With a destination point, level 1 seeds with that point alone,
    so every candidate ends there (points are prepended).  At most the two
    working levels are live at any moment, beyond what the store keeps.
    """
    if not 1 <= l_max <= inst.n:
        raise InvariantError(f"l_max {l_max} outside 1..{inst.n}")
    if destination is not None and not 0 <= destination < inst.n:
        raise InvariantError(f"destination {destination} not in instance of {inst.n} points")

    stats = GenerationStats()
    t0 = time.perf_counter()
    if destination is None:
        level = [seed_candidate(p, inst) for p in range(inst.n)]
    else:
        level = [seed_candidate(destination, inst)]
    seeded = len(level)
    stats.levels[1] = LevelStats(
        enumerated_extensions=seeded,
        kept_after_ip=seeded,
        kept_after_batch=None,
        peak_live_candidates=seeded,
        wall_time=time.perf_counter() - t0,
    )
    ip_levels: dict[int, tuple[Candidate, ...]] = {1: tuple(level)}

    for length in range(2, l_max + 1):
        t0 = time.perf_counter()
        level, enumerated, peak_index = _build_level(level, inst, tol, shards)
        ip_levels[length] = tuple(level)
        stats.levels[length] = LevelStats(
            enumerated_extensions=enumerated,
            kept_after_ip=len(level),
            kept_after_batch=None,
            peak_live_candidates=len(ip_levels[length - 1]) + peak_index,
            wall_time=time.perf_counter() - t0,
        )

    store = CandidateStore(
        levels=ip_levels,
        fingerprint=inst.fingerprint,
        kind=IP_ONLY,
        destination=destination,
    )
    if batch:
        store = batch_view(store, tol=tol)
        for length in store.levels:
            stats.levels[length] = replace(
                stats.levels[length], kept_after_batch=len(store.levels[length])
            )
    return store, stats


def batch_view(store: CandidateStore, tol: float = 0.0) -> CandidateStore:
    """Batch-prune every level into a derived query store.

    The input store is untouched; feeding the result back into growth is
    unsupported by design.  Applying this to an already batch-pruned store
    returns an equal store (Pareto fronts are idempotent).
    """
    pruned = {
        length: tuple(batch_prune(list(cands), tol=tol)[0])
        for length, cands in store.levels.items()
    }
    return CandidateStore(
        levels=pruned,
        fingerprint=store.fingerprint,
        kind=IP_PLUS_BATCH,
        destination=store.destination,
    )
