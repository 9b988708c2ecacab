import itertools
import math

import pytest

from msrec import (
    InvariantError,
    backward_growth,
    batch_view,
    generate_level,
    generation_work_bound,
    seed_candidate,
    travel_cost_direct,
)
from msrec.growth import IP_ONLY, IP_PLUS_BATCH
from msrec.baselines import minima_by_length
from msrec.query import Query, query_routes
from .conftest import make_instance, random_origins, rel_err


def level_sizes(store):
    return [len(store.levels[length]) for length in sorted(store.levels)]


class TestGenerateLevel:
    def test_three_point_level_two(self):
        inst = make_instance(3, 1)
        seeds = [seed_candidate(p, inst) for p in range(3)]
        level2 = generate_level(seeds, inst)
        assert len(level2) == 6  # every (source, point set) key is unique

    def test_count_law_level_three(self):
        inst = make_instance(5, 2)
        seeds = [seed_candidate(p, inst) for p in range(5)]
        level3 = generate_level(generate_level(seeds, inst), inst)
        assert len(level3) == math.comb(5, 3) * 3

    def test_survivors_have_minimum_travel_cost(self):
        """Each surviving ordering must beat every other ordering of the same
        point set from the same source, per direct evaluation."""
        inst = make_instance(5, 2)
        seeds = [seed_candidate(p, inst) for p in range(5)]
        level3 = generate_level(generate_level(seeds, inst), inst)
        for cand in level3:
            src = cand.seq.source
            others = set(cand.seq.points) - {src}
            best = min(
                travel_cost_direct((src,) + perm, inst)
                for perm in itertools.permutations(others)
            )
            assert rel_err(cand.travel_cost, best) <= 1e-12

    def test_full_mask_collapses_to_single_ordering(self):
        """At the final level only one ordering per source survives, the one
        minimizing the travel cost over all interior permutations."""
        inst = make_instance(4, 9)
        store, _ = backward_growth(inst, 4)
        top = store.levels[4]
        assert len(top) == 4
        for cand in top:
            src = cand.seq.source
            best = min(
                travel_cost_direct((src,) + perm, inst)
                for perm in itertools.permutations(set(range(4)) - {src})
            )
            assert rel_err(cand.travel_cost, best) <= 1e-12


class TestBackwardGrowth:
    def test_single_level(self):
        inst = make_instance(6, 4)
        store, stats = backward_growth(inst, 1)
        assert level_sizes(store) == [6]
        assert store.levels[1][0].travel_cost == 0.0
        assert stats.total_enumerated == 6

    def test_count_law_n10(self):
        inst = make_instance(10, 42)
        store, stats = backward_growth(inst, 10)
        assert level_sizes(store) == [math.comb(10, L) * L for L in range(1, 11)]
        # observed pruning ratio per level matches the tie-free formula
        for L in range(3, 11):
            total = math.perm(10, L)
            observed = (total - len(store.levels[L])) / total
            want = 1.0 - 1.0 / math.factorial(L - 1)
            assert rel_err(observed, want) <= 1e-12

    def test_work_accounting(self):
        for n, seed in ((7, 5), (9, 6)):
            inst = make_instance(n, seed)
            _, stats = backward_growth(inst, n)
            assert stats.total_enumerated == generation_work_bound(n)

    def test_count_law_across_seeds(self):
        # tie-free instances must hit the formula exactly, whatever the seed
        for seed in range(5):
            inst = make_instance(8, 100 + seed)
            store, _ = backward_growth(inst, 8)
            assert level_sizes(store) == [
                math.comb(8, L) * L for L in range(1, 9)
            ]

    def test_level_sizes_unimodal(self):
        inst = make_instance(9, 8)
        store, _ = backward_growth(inst, 9)
        sizes = level_sizes(store)
        falling = False
        for a, b in zip(sizes, sizes[1:]):
            if b < a:
                falling = True
            if falling:
                assert b <= a
        peak = sizes.index(max(sizes)) + 1
        assert abs(peak - 9 // 2) <= 1

    def test_memory_contract(self):
        inst = make_instance(8, 10)
        store, stats = backward_growth(inst, 8)
        for length in range(2, 9):
            cap = len(store.levels[length - 1]) + len(store.levels[length]) + 1
            assert stats.levels[length].peak_live_candidates <= cap

    def test_batch_counts_nested(self):
        inst = make_instance(10, 11)
        store, stats = backward_growth(inst, 10, batch=True)
        assert store.kind == IP_PLUS_BATCH
        for length, s in stats.levels.items():
            assert s.kept_after_batch is not None
            assert s.kept_after_batch <= s.kept_after_ip
            assert len(store.levels[length]) == s.kept_after_batch
        assert len(store.levels[10]) <= 2 * 10

    def test_l_max_validated(self):
        inst = make_instance(4, 12)
        for bad in (0, 5):
            with pytest.raises(InvariantError):
                backward_growth(inst, bad)

    def test_destination_validated(self):
        inst = make_instance(4, 12)
        with pytest.raises(InvariantError):
            backward_growth(inst, 3, destination=4)

    def test_fingerprint_recorded(self):
        inst = make_instance(4, 12)
        store, _ = backward_growth(inst, 2)
        assert store.fingerprint == inst.fingerprint


class TestDeterminism:
    def store_bytes(self, store):
        from msrec.storage import save_store
        import tempfile, pathlib

        with tempfile.TemporaryDirectory() as d:
            path = pathlib.Path(d) / "s.txt"
            save_store(store, path)
            return path.read_bytes()

    def test_repeated_runs_identical(self):
        inst = make_instance(7, 13)
        a, _ = backward_growth(inst, 5)
        b, _ = backward_growth(inst, 5)
        assert self.store_bytes(a) == self.store_bytes(b)

    def test_shard_count_invisible(self):
        inst = make_instance(7, 13)
        reference = None
        for shards in (1, 2, 3, 7):
            store, _ = backward_growth(inst, 5, shards=shards)
            data = self.store_bytes(store)
            if reference is None:
                reference = data
            assert data == reference

    def test_batch_view_deterministic(self):
        inst = make_instance(7, 13)
        store, _ = backward_growth(inst, 5)
        assert self.store_bytes(batch_view(store)) == self.store_bytes(batch_view(store))


class TestBatchView:
    def test_view_leaves_original_untouched(self):
        inst = make_instance(6, 14)
        store, _ = backward_growth(inst, 4)
        before = {length: tuple(cands) for length, cands in store.levels.items()}
        view = batch_view(store)
        assert store.kind == IP_ONLY
        assert {length: tuple(c) for length, c in store.levels.items()} == before
        assert view.kind == IP_PLUS_BATCH

    def test_every_level_shrinks_or_holds(self):
        inst = make_instance(8, 15)
        store, _ = backward_growth(inst, 6)
        view = batch_view(store)
        for length in store.levels:
            assert len(view.levels[length]) <= len(store.levels[length])
        # mid levels should actually lose candidates on a generic instance
        assert len(view.levels[5]) < len(store.levels[5])

    def test_singleton_partitions_unchanged(self):
        inst = make_instance(5, 16)
        store, _ = backward_growth(inst, 5)
        # final level: one candidate per source, nothing to compare
        view = batch_view(store)
        assert view.levels[5] == store.levels[5]

    def test_idempotent(self):
        inst = make_instance(7, 17)
        store, _ = backward_growth(inst, 5)
        once = batch_view(store)
        twice = batch_view(once)
        assert once.levels == twice.levels
        assert twice.kind == IP_PLUS_BATCH


class TestDestinationMode:
    def test_all_candidates_end_at_destination(self):
        inst = make_instance(6, 18)
        dest = 2
        store, _ = backward_growth(inst, 5, destination=dest)
        for length, cands in store.levels.items():
            assert len(cands) > 0
            for cand in cands:
                assert cand.seq.points[-1] == dest
        assert store.destination == dest

    def test_level_sizes(self):
        inst = make_instance(7, 19)
        store, _ = backward_growth(inst, 7, destination=3)
        assert len(store.levels[1]) == 1
        for length in range(2, 8):
            assert len(store.levels[length]) == math.comb(6, length - 1) * (length - 1)

    def test_optimal_against_filtered_brute_force(self):
        inst = make_instance(6, 20)
        dest = 4
        store, _ = backward_growth(inst, 6, destination=dest)
        view = batch_view(store)
        origins = random_origins(inst, 6, seed=21)
        oracle = minima_by_length(inst, origins, 1, 6, destination=dest)
        for oi, origin in enumerate(origins):
            for length in range(1, 7):
                for s in (store, view):
                    got = query_routes(
                        s, inst, Query(origin, length, length, destination=dest)
                    ).cost
                    assert rel_err(got, oracle[oi, length - 1]) <= 1e-12


class TestWorkBound:
    def test_small_values(self):
        assert generation_work_bound(1) == 1
        assert generation_work_bound(3) == 15
        assert generation_work_bound(10) == 23050

    def test_matches_per_level_summation(self):
        # n seeds, then (L-1) * L * C(n, L) extensions per level L >= 2
        for n in range(1, 14):
            by_level = n + sum(
                (L - 1) * L * math.comb(n, L) for L in range(2, n + 1)
            )
            assert generation_work_bound(n) == by_level

    def test_rejects_nonpositive(self):
        with pytest.raises(InvariantError):
            generation_work_bound(0)
