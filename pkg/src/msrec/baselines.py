"""Independent oracles and comparison baselines.

Everything here evaluates route costs by explicit dot-product arithmetic,
sharing no code with the incremental recursion it is used to check.  The
dominance baseline prunes by componentwise comparison of interleaved
(leg cost, miss probability) vectors within equal source/destination groups;
it is strictly weaker than precedence pruning and serves as a comparison
point.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Sequence as SeqABC

import numpy as np

from .core import Candidate, Instance, Origin, Route, Sequence, route_cost_direct
from .errors import InvariantError
from .pruning import PruneStats

ENUMERATION_GUARD = 10**8  # refuse exhaustive runs beyond this many sequences


def sequence_count(n: int, length: int) -> int:
    """Number of ordered length-L selections from n points."""
    return math.perm(n, length)


def iter_sequences(n: int, length: int) -> Iterable[tuple[int, ...]]:
    """Stream all length-L sequences in lexicographic order."""
    return itertools.permutations(range(n), length)


def enumerate_sequences(inst: Instance, length: int) -> list[tuple[int, ...]]:
    """All length-L sequences over the instance's points, lexicographic."""
    if not 1 <= length <= inst.n:
        raise InvariantError(f"length {length} outside 1..{inst.n}")
    return list(iter_sequences(inst.n, length))


def _check_enumeration_size(n: int, l_min: int, l_max: int):
    total = sum(sequence_count(n, length) for length in range(l_min, l_max + 1))
    if total > ENUMERATION_GUARD:
        raise InvariantError(
            f"{total} sequences exceed the exhaustive-search guard of {ENUMERATION_GUARD}"
        )


def brute_force(
    inst: Instance,
    origin: Origin,
    l_min: int,
    l_max: int,
    destination: int | None = None,
):
    """Exact minimum over every route in the length range, all ties included.

    Evaluates each sequence from scratch with ``route_cost_direct``; this is
    the reference the whole engine is tested against.
    """
    from .query import RouteSet  # local import to avoid a cycle

    if not 1 <= l_min <= l_max <= inst.n:
        raise InvariantError(f"bad length range [{l_min}, {l_max}]")
    _check_enumeration_size(inst.n, l_min, l_max)

    best = float("inf")
    ties: list[tuple[int, ...]] = []
    for length in range(l_min, l_max + 1):
        for points in iter_sequences(inst.n, length):
            if destination is not None and points[-1] != destination:
                continue
            cost = route_cost_direct(origin, points, inst)
            if cost < best:
                best = cost
                ties = [points]
            elif cost == best:
                ties.append(points)
    if not ties:
        raise InvariantError(f"no sequence ends at point {destination}")
    routes = tuple(
        Route(origin, _direct_candidate(points, inst), best) for points in ties
    )
    return RouteSet(routes=routes, cost=best)


def _direct_candidate(points: tuple[int, ...], inst: Instance) -> Candidate:
    """Candidate whose cached values come from direct arithmetic."""
    travel = 0.0
    cum = 0.0
    carry = 1.0
    prev = points[0]
    for pt in points[1:]:
        cum += inst.cost[prev][pt]
        travel += cum * carry * inst.probs[pt]
        carry *= inst.miss_probs[pt]
        prev = pt
    carry *= inst.miss_probs[points[0]]
    return Candidate(Sequence(points), travel, 1.0 - carry)


def minima_by_length(
    inst: Instance,
    origins: SeqABC[Origin],
    l_min: int,
    l_max: int,
    destination: int | None = None,
) -> np.ndarray:
    """Brute-force minimum route cost for every (origin, length) pair.

    Returns an array of shape (len(origins), l_max - l_min + 1).  Each
    sequence's cost splits into an origin-independent part plus the origin
    leg weighted by the sequence's pick-up probability, so one pass over the
    sequences serves every origin at once.  Arithmetic is direct, built from
    the same cumulative vectors as ``route_cost_direct``.
    """
    if not 1 <= l_min <= l_max <= inst.n:
        raise InvariantError(f"bad length range [{l_min}, {l_max}]")
    _check_enumeration_size(inst.n, l_min, l_max)

    origin_cost = np.array([o.cost_row(inst) for o in origins], dtype=np.float64)
    mins = np.full((len(origins), l_max - l_min + 1), np.inf)
    cost = inst.cost
    probs = inst.probs
    miss = inst.miss_probs
    horizon = inst.horizon
    for col, length in enumerate(range(l_min, l_max + 1)):
        for points in iter_sequences(inst.n, length):
            if destination is not None and points[-1] != destination:
                continue
            cum = 0.0
            carry = 1.0
            inner = 0.0
            psum = 0.0
            prev = None
            for pt in points:
                if prev is not None:
                    cum += cost[prev][pt]
                weight = carry * probs[pt]
                inner += cum * weight
                psum += weight
                carry *= miss[pt]
                prev = pt
            if abs(psum + carry - 1.0) > 1e-12:
                raise InvariantError("probability components do not sum to 1")
            const = inner + horizon * carry
            np.minimum(
                mins[:, col],
                origin_cost[:, points[0]] * psum + const,
                out=mins[:, col],
            )
    return mins


def scan_direct_min(origin: Origin, seqs: SeqABC[tuple[int, ...]], inst: Instance) -> float:
    """Minimum direct route cost over an explicit sequence list.

    One flat loop with inlined arithmetic, so scan times over differently
    pruned lists are comparable.
    """
    row = origin.cost_row(inst)
    cost = inst.cost
    probs = inst.probs
    miss = inst.miss_probs
    horizon = inst.horizon
    best = float("inf")
    for points in seqs:
        cum = row[points[0]]
        carry = 1.0
        total = 0.0
        prev = None
        for pt in points:
            if prev is not None:
                cum += cost[prev][pt]
            total += cum * carry * probs[pt]
            carry *= miss[pt]
            prev = pt
        total += horizon * carry
        if total < best:
            best = total
    return best


def dominance_vector(seq, inst: Instance) -> tuple[float, ...]:
    """Interleaved (leg cost, miss probability) vector used for dominance.

    For points p0..pk: (cost[p0][p1], miss[p1], cost[p1][p2], miss[p2], ...).
    """
    points = seq.points if isinstance(seq, Sequence) else tuple(seq)
    if len(points) < 2:
        raise InvariantError("dominance vectors need at least two points")
    out: list[float] = []
    for a, b in zip(points, points[1:]):
        out.append(inst.cost[a][b])
        out.append(inst.miss_probs[b])
    return tuple(out)


def _dominated_py(dp: np.ndarray, order: np.ndarray) -> np.ndarray:
    n, d = dp.shape
    out = np.zeros(n, dtype=np.bool_)
    for ii in range(n):
        i = order[ii]
        for jj in range(ii):
            j = order[jj]
            if out[j]:
                continue  # anything j dominates, its dominator dominates too
            dominates = True
            strict = False
            for t in range(d):
                a = dp[j, t]
                b = dp[i, t]
                if a > b:
                    dominates = False
                    break
                if a < b:
                    strict = True
            if dominates and strict:
                out[i] = True
                break
    return out


_dominated_jit = None


def _dominated_mask(dp: np.ndarray, order: np.ndarray) -> np.ndarray:
    global _dominated_jit
    if _dominated_jit is None:
        from numba import njit

        _dominated_jit = njit(cache=True)(_dominated_py)
    return _dominated_jit(dp, order)


def dominance_prune(
    seqs: Iterable[tuple[int, ...]], inst: Instance
) -> tuple[list[tuple[int, ...]], PruneStats]:
    """Remove every sequence whose dominance vector is componentwise
    dominated (all <=, at least one <) by another with the same source and
    destination.  Sequences with equal vectors all survive.

    Survivors keep the input order.  Within a group whose members share one
    point set and whose miss probabilities are pairwise distinct, no
    dominance is possible (the probability components are permutations of a
    single multiset, and componentwise <= between equal-sum vectors forces
    equality), so such groups are kept wholesale.
    """
    seq_list = [tuple(s.points) if isinstance(s, Sequence) else tuple(s) for s in seqs]
    total = len(seq_list)
    if total == 0:
        return [], PruneStats(0, 0)
    length = len(seq_list[0])
    for s in seq_list:
        if len(s) != length:
            raise InvariantError("dominance pruning needs sequences of one length")
    if length < 2:
        return list(seq_list), PruneStats(total, total)

    groups: dict[tuple[int, int], list[int]] = {}
    for i, s in enumerate(seq_list):
        groups.setdefault((s[0], s[-1]), []).append(i)

    cost_arr = inst.cost_array
    miss_arr = inst.miss_array
    kept = np.ones(total, dtype=np.bool_)
    for idxs in groups.values():
        if len(idxs) < 2:
            continue
        if _no_dominance_possible(seq_list, idxs, inst):
            continue
        mat = np.array([seq_list[i] for i in idxs], dtype=np.int64)
        dp = np.empty((len(idxs), 2 * (length - 1)))
        dp[:, 0::2] = cost_arr[mat[:, :-1], mat[:, 1:]]
        dp[:, 1::2] = miss_arr[mat[:, 1:]]
        order = np.argsort(dp.sum(axis=1), kind="stable").astype(np.int64)
        dominated = _dominated_mask(dp, order)
        for local, idx in enumerate(idxs):
            if dominated[local]:
                kept[idx] = False

    survivors = [seq_list[i] for i in range(total) if kept[i]]
    return survivors, PruneStats(total, len(survivors))


def _no_dominance_possible(seq_list, idxs, inst: Instance) -> bool:
    """True when the group provably contains no dominated sequence: all
    members visit the same point set and the miss probabilities of the
    non-source points are pairwise distinct."""
    first = seq_list[idxs[0]]
    length = len(first)
    if length != inst.n:
        base = frozenset(first)
        for i in idxs[1:]:
            if frozenset(seq_list[i]) != base:
                return False
    values = [inst.miss_probs[p] for p in first[1:]]
    return len(set(values)) == len(values)
