import json

import numpy as np
import pytest

from chaingreedy import (
    ChainSpec,
    CoverageInstance,
    CoverageOracle,
    GroundElement,
    apply_permutation,
    best_known_optimum,
    brute_force_optimum,
    coverage_value,
    decentralized_greedy,
    generate_instance,
    load_instance,
    mask_probability,
    monte_carlo,
    run_chain_greedy,
    save_instance,
    sequential_greedy,
)
from chaingreedy.coverage import (
    format_order,
    instance_from_dict,
    instance_to_dict,
    normalize_order,
)

from conftest import all_masks, make_tiny_instance


def handmade_instance():
    """One agent, two options; option 0 covers two points (one on the rim)."""
    return CoverageInstance(
        points=np.array([[0.0, 0.0], [3.0, 4.0], [50.0, 50.0]]),
        locations=np.array([[0.0, 0.0], [10.0, 0.0]]),
        agent_locations=((0, 1),),
        radii=((5.0, 5.0),),
        kappas=(1,),
    )


class TestGenerateInstance:
    def test_deterministic(self):
        a = generate_instance(n=3, num_locations=8, locations_per_agent=4, num_points=50, seed=5)
        b = generate_instance(n=3, num_locations=8, locations_per_agent=4, num_points=50, seed=5)
        assert np.array_equal(a.points, b.points)
        assert np.array_equal(a.locations, b.locations)
        assert a.agent_locations == b.agent_locations
        assert a.radii == b.radii
        c = generate_instance(n=3, num_locations=8, locations_per_agent=4, num_points=50, seed=6)
        assert not np.array_equal(a.points, c.points)

    def test_shapes_and_ranges(self):
        inst = generate_instance(
            n=4,
            num_locations=9,
            locations_per_agent=6,
            num_points=120,
            kappa=2,
            radius_range=(3.0, 7.0),
            area=(40.0, 60.0),
            seed=1,
        )
        assert inst.n == 4
        assert inst.points.shape == (120, 2)
        assert inst.locations.shape == (9, 2)
        assert (inst.points[:, 0] <= 40.0).all() and (inst.points[:, 1] <= 60.0).all()
        for row in inst.agent_locations:
            assert len(row) == 6
            assert len(set(row)) == 6
        for row in inst.radii:
            assert len(row) == 2
            assert all(3.0 <= r <= 7.0 for r in row)
            assert len(set(row)) == 1
        assert inst.kappas == (2, 2, 2, 2)

    def test_per_agent_kappa(self):
        inst = generate_instance(
            n=3, num_locations=6, locations_per_agent=3, num_points=10, kappa=(1, 0, 2), seed=2
        )
        assert inst.kappas == (1, 0, 2)
        # capacity-zero agents still carry a radius slot
        assert len(inst.radii[1]) == 1

    def test_validation(self):
        with pytest.raises(ValueError):
            generate_instance(n=0)
        with pytest.raises(ValueError):
            generate_instance(num_locations=4, locations_per_agent=5)
        with pytest.raises(ValueError):
            generate_instance(locations_per_agent=3, kappa=4)
        with pytest.raises(ValueError):
            generate_instance(radius_range=(0.0, 5.0))
        with pytest.raises(ValueError):
            generate_instance(num_points=-1)
        with pytest.raises(ValueError):
            generate_instance(n=3, kappa=(1, 1))


class TestCoverageInstance:
    def test_ground_and_matroid(self):
        inst = generate_instance(n=2, num_locations=5, locations_per_agent=3, num_points=10, seed=3)
        ground = inst.ground()
        assert len(ground) == 2
        assert ground[0] == tuple(GroundElement(1, b) for b in range(3))
        matroid = inst.matroid()
        assert matroid.capacities == inst.kappas
        assert matroid.partition_sizes == (3, 3)

    def test_element_location(self):
        inst = handmade_instance()
        assert inst.element_location(GroundElement(1, 1)) == 1
        with pytest.raises(ValueError):
            inst.element_location(GroundElement(2, 0))
        with pytest.raises(ValueError):
            inst.element_location(GroundElement(1, 2))

    def test_validation(self):
        good = instance_to_dict(handmade_instance())
        with pytest.raises(ValueError):
            bad = dict(good)
            bad["agent_locations"] = [[0, 5]]
            instance_from_dict(bad)
        with pytest.raises(ValueError):
            bad = dict(good)
            bad["kappas"] = [3]
            instance_from_dict(bad)
        with pytest.raises(ValueError):
            bad = dict(good)
            bad["radii"] = [[-1.0, 5.0]]
            instance_from_dict(bad)
        with pytest.raises(ValueError):
            bad = dict(good)
            bad["radii"] = [[5.0], [5.0]]
            instance_from_dict(bad)


class TestCoverageOracle:
    def test_handmade_values(self):
        inst = handmade_instance()
        oracle = CoverageOracle(inst)
        e0, e1 = GroundElement(1, 0), GroundElement(1, 1)
        assert oracle.value(set()) == 0.0
        # option 0 sits at the origin: covers (0,0) and the rim point (3,4)
        assert oracle.value({e0}) == 2.0
        # option 1 at (10,0) covers nothing within radius 5... check (3,4):
        # distance sqrt(49+16) > 5, origin distance 10 > 5
        assert oracle.value({e1}) == 0.0
        assert oracle.value({e0, e1}) == 2.0

    def test_boundary_point_counts(self):
        # (3,4) is exactly at distance 5: closed disk includes it
        inst = handmade_instance()
        oracle = CoverageOracle(inst)
        assert oracle.value({GroundElement(1, 0)}) == 2.0

    def test_unknown_element(self):
        oracle = CoverageOracle(handmade_instance())
        with pytest.raises(ValueError):
            oracle.value({GroundElement(1, 7)})

    def test_unequal_slot_radii_rejected(self):
        inst = CoverageInstance(
            points=np.zeros((1, 2)),
            locations=np.zeros((1, 2)),
            agent_locations=((0,),),
            radii=((5.0, 6.0),),
            kappas=(1,),
        )
        with pytest.raises(ValueError):
            CoverageOracle(inst)

    def test_monotone_and_submodular(self):
        rng = np.random.default_rng(103)
        inst = make_tiny_instance(rng)
        oracle = CoverageOracle(inst)
        universe = [s for block in inst.ground() for s in block]
        for _ in range(60):
            take = rng.permutation(len(universe))
            cut_a = int(rng.integers(0, len(universe) - 1))
            cut_b = int(rng.integers(cut_a, len(universe) - 1))
            small = frozenset(universe[i] for i in take[:cut_a])
            large = frozenset(universe[i] for i in take[:cut_b])
            extra = universe[int(take[len(universe) - 1])]
            gain_small = oracle.value(small | {extra}) - oracle.value(small)
            gain_large = oracle.value(large | {extra}) - oracle.value(large)
            assert gain_small >= gain_large - 1e-9
            assert oracle.value(large) >= oracle.value(small) - 1e-9

    def test_coverage_value_helper(self):
        inst = handmade_instance()
        sel = {GroundElement(1, 0)}
        assert coverage_value(inst, sel) == CoverageOracle(inst).value(sel)

    def test_no_points(self):
        inst = CoverageInstance(
            points=np.zeros((0, 2)),
            locations=np.zeros((1, 2)),
            agent_locations=((0,),),
            radii=((5.0,),),
            kappas=(1,),
        )
        oracle = CoverageOracle(inst)
        assert oracle.value({GroundElement(1, 0)}) == 0.0


class TestOrders:
    def test_normalize_variants(self):
        assert normalize_order(None, 3) == (1, 2, 3)
        assert normalize_order("DBHGFCAE", 8) == (4, 2, 8, 7, 6, 3, 1, 5)
        assert normalize_order("3,1,2", 3) == (3, 1, 2)
        assert normalize_order([2, 1], 2) == (2, 1)
        assert normalize_order("bca", 3) == (2, 3, 1)

    def test_format_round_trip(self):
        order = (4, 2, 8, 7, 6, 3, 1, 5)
        assert format_order(order) == "DBHGFCAE"
        assert normalize_order(format_order(order), 8) == order
        long_order = tuple(range(30, 0, -1))
        assert normalize_order(format_order(long_order), 30) == long_order

    def test_validation(self):
        with pytest.raises(ValueError):
            normalize_order("AAB", 3)
        with pytest.raises(ValueError):
            normalize_order("AB", 3)
        with pytest.raises(ValueError):
            normalize_order([1, 2, 4], 3)

    def test_apply_permutation(self):
        inst = generate_instance(n=3, num_locations=7, locations_per_agent=3, num_points=10, kappa=(1, 2, 0), seed=9)
        ground, matroid = apply_permutation(inst, (3, 1, 2))
        assert [block[0].agent for block in ground] == [3, 1, 2]
        assert matroid.capacities == (0, 1, 2)


class TestRunChainGreedy:
    def test_matches_generic_solver_exhaustively(self):
        rng = np.random.default_rng(107)
        for _ in range(12):
            inst = make_tiny_instance(rng)
            oracle = CoverageOracle(inst)
            order = tuple(int(a) + 1 for a in rng.permutation(inst.n))
            ground, matroid = apply_permutation(inst, order)
            for bits in all_masks(inst.n - 1):
                fast = run_chain_greedy(oracle, mask=bits, order=order)
                slow = decentralized_greedy(oracle, matroid, ground, bits)
                assert fast.per_agent == slow.per_agent
                assert fast.value == slow.value
                assert fast.oracle_calls == slow.oracle_calls

    def test_default_mask_is_sequential(self):
        rng = np.random.default_rng(109)
        inst = make_tiny_instance(rng)
        oracle = CoverageOracle(inst)
        ground, matroid = apply_permutation(inst, None)
        fast = run_chain_greedy(oracle)
        slow = sequential_greedy(oracle, matroid, ground)
        assert fast.per_agent == slow.per_agent
        assert fast.value == slow.value

    def test_mask_length_check(self):
        oracle = CoverageOracle(handmade_instance())
        with pytest.raises(ValueError):
            run_chain_greedy(oracle, mask=(1,))


class TestBestKnownOptimum:
    def test_small_instances_certified(self):
        rng = np.random.default_rng(113)
        for _ in range(5):
            inst = make_tiny_instance(rng)
            oracle = CoverageOracle(inst)
            exact = brute_force_optimum(oracle, inst.matroid(), inst.ground())
            assert best_known_optimum(inst, oracle=oracle) == exact.value

    def test_restart_path_lower_bounds(self):
        inst = generate_instance(
            n=5, num_locations=12, locations_per_agent=8, num_points=300, kappa=3, seed=21
        )
        oracle = CoverageOracle(inst)
        # comb(8,3)^5 is far over a forced cap of 1: restart path
        value = best_known_optimum(inst, oracle=oracle, restarts=20, enumeration_cap=1)
        identity = run_chain_greedy(oracle).value
        assert value >= identity
        # deterministic
        again = best_known_optimum(inst, oracle=oracle, restarts=20, enumeration_cap=1)
        assert value == again


class TestMonteCarlo:
    def test_deterministic_and_grouped(self):
        rng = np.random.default_rng(127)
        inst = make_tiny_instance(rng)
        chain = ChainSpec.from_probs(list(rng.uniform(0.2, 0.9, inst.n - 1)))
        a = monte_carlo(inst, chain, iterations=300, seed=4)
        b = monte_carlo(inst, chain, iterations=300, seed=4)
        assert a == b
        assert a.iterations == 300
        assert 1 <= a.distinct_outcomes <= 2 ** (inst.n - 1)
        c = monte_carlo(inst, chain, iterations=300, seed=5)
        assert c.mean_value != a.mean_value or c.distinct_outcomes != a.distinct_outcomes

    def test_matches_naive_average(self):
        rng = np.random.default_rng(131)
        inst = make_tiny_instance(rng)
        oracle = CoverageOracle(inst)
        chain = ChainSpec.from_probs(list(rng.uniform(0.2, 0.9, inst.n - 1)))
        iterations, seed = 80, 11
        report = monte_carlo(inst, chain, iterations=iterations, seed=seed, oracle=oracle)
        qs = np.asarray(chain.effective_probs())
        values = []
        for k in range(iterations):
            sub = np.random.default_rng([seed, k])
            bits = tuple(int(b) for b in (sub.random(inst.n - 1) < qs))
            values.append(run_chain_greedy(oracle, mask=bits).value)
        assert report.mean_value == pytest.approx(np.mean(values), abs=1e-9)
        expected_se = np.std(values, ddof=1) / np.sqrt(iterations)
        assert report.std_error == pytest.approx(expected_se, abs=1e-9)

    def test_exact_expectation_bound_tiny(self):
        rng = np.random.default_rng(137)
        inst = make_tiny_instance(rng)
        oracle = CoverageOracle(inst)
        chain = ChainSpec.from_probs(list(rng.uniform(0.2, 0.9, inst.n - 1)))
        optimum = best_known_optimum(inst, oracle=oracle)
        from chaingreedy import expected_gap

        exact_mean = sum(
            mask_probability(chain, bits) * run_chain_greedy(oracle, mask=bits).value
            for bits in all_masks(inst.n - 1)
        )
        assert exact_mean >= expected_gap(chain) * optimum - 1e-9

    def test_permutation_changes_runs_not_gap(self):
        rng = np.random.default_rng(139)
        inst = make_tiny_instance(rng)
        chain = ChainSpec.from_probs(list(rng.uniform(0.3, 0.8, inst.n - 1)))
        shuffled = tuple(int(a) + 1 for a in rng.permutation(inst.n))
        a = monte_carlo(inst, chain, iterations=200, seed=7)
        b = monte_carlo(inst, chain, permutation=shuffled, iterations=200, seed=7)
        assert a.predicted_gap == b.predicted_gap
        assert a.optimum_value == b.optimum_value

    def test_validation(self):
        inst = handmade_instance()
        with pytest.raises(ValueError):
            monte_carlo(inst, ChainSpec.from_probs([0.5]), iterations=10)
        chain = ChainSpec(1, ())
        with pytest.raises(ValueError):
            monte_carlo(inst, chain, iterations=0)
        with pytest.raises(ValueError):
            monte_carlo(inst, chain, permutation=(2,), iterations=10)


class TestSerialization:
    def test_round_trip_exact(self, tmp_path):
        inst = generate_instance(n=3, num_locations=9, locations_per_agent=4, num_points=40, seed=33)
        path = tmp_path / "instance.json"
        save_instance(inst, path)
        loaded = load_instance(path)
        assert np.array_equal(inst.points, loaded.points)
        assert np.array_equal(inst.locations, loaded.locations)
        assert inst.agent_locations == loaded.agent_locations
        assert inst.radii == loaded.radii
        assert inst.kappas == loaded.kappas
        assert inst.seed == loaded.seed
        # identical greedy behaviour after the round trip
        chain = ChainSpec.from_probs([0.5, 0.5])
        a = monte_carlo(inst, chain, iterations=50, seed=1)
        b = monte_carlo(loaded, chain, iterations=50, seed=1)
        assert a == b

    def test_missing_keys_rejected(self):
        data = instance_to_dict(handmade_instance())
        del data["radii"]
        with pytest.raises(ValueError):
            instance_from_dict(data)

    def test_json_is_plain_data(self, tmp_path):
        inst = handmade_instance()
        path = tmp_path / "instance.json"
        save_instance(inst, path)
        with open(path) as fh:
            data = json.load(fh)
        assert set(data) == {"seed", "kappas", "agent_locations", "radii", "locations", "points"}
