import numpy as np
import pytest

from chaingreedy import (
    ChainSpec,
    best_exhaustive_allocation,
    evaluate_single_reinforcement,
    expected_gap,
    greedy_multi_reinforcement,
    sweep_single_reinforcement,
)

from conftest import random_chain

TOL = 1e-12

# Pinned position-effect fixture: the uniquely least reliable edge is edge 1,
# yet the sweep's argmax is the mid-chain edge 3 (longer runs pass through it).
POSITION_EFFECT_PROBS = (0.2, 0.7, 0.7, 0.3)
POSITION_EFFECT_BASELINE = 0.2509366666666667
POSITION_EFFECT_GAPS = (
    0.26144599999999996,
    0.26474766666666666,
    0.26579766666666665,
    0.2639356666666667,
)
POSITION_EFFECT_BEST_EDGE = 3


class TestSingleReinforcement:
    def test_example(self):
        chain = ChainSpec.from_probs([0.5, 0.5])
        assert evaluate_single_reinforcement(chain, 1) == pytest.approx(
            37 / 96, abs=TOL
        )

    def test_leaves_chain_untouched(self):
        chain = ChainSpec.from_probs([0.5, 0.5])
        evaluate_single_reinforcement(chain, 2)
        assert chain.trials == (1, 1)

    def test_edge_validation(self):
        chain = ChainSpec.from_probs([0.5, 0.5])
        with pytest.raises(ValueError):
            evaluate_single_reinforcement(chain, 0)
        with pytest.raises(ValueError):
            evaluate_single_reinforcement(chain, 3)


class TestSweep:
    def test_symmetric_chain_ties_to_first_edge(self):
        chain = ChainSpec.from_probs([0.5, 0.5])
        report = sweep_single_reinforcement(chain)
        assert report.per_edge_gap == pytest.approx((37 / 96, 37 / 96), abs=TOL)
        assert report.best_edge == 1
        assert report.best_gap == pytest.approx(37 / 96, abs=TOL)
        assert report.baseline_gap == pytest.approx(34 / 96, abs=TOL)

    def test_every_edge_helps(self):
        rng = np.random.default_rng(83)
        for _ in range(25):
            chain = random_chain(rng, int(rng.integers(2, 9)))
            report = sweep_single_reinforcement(chain)
            for gap in report.per_edge_gap:
                assert gap >= report.baseline_gap - TOL
            assert report.best_gap == max(report.per_edge_gap)

    def test_position_effect_fixture(self):
        chain = ChainSpec.from_probs(POSITION_EFFECT_PROBS)
        report = sweep_single_reinforcement(chain)
        weakest = POSITION_EFFECT_PROBS.index(min(POSITION_EFFECT_PROBS)) + 1
        assert weakest == 1
        assert report.best_edge == POSITION_EFFECT_BEST_EDGE
        assert report.best_edge != weakest
        assert report.baseline_gap == pytest.approx(POSITION_EFFECT_BASELINE, abs=TOL)
        assert report.per_edge_gap == pytest.approx(POSITION_EFFECT_GAPS, abs=TOL)
        # cross-check with the exhaustive engine
        exact = sweep_single_reinforcement(chain, engine="enumerate")
        assert exact.best_edge == POSITION_EFFECT_BEST_EDGE
        assert exact.per_edge_gap == pytest.approx(report.per_edge_gap, abs=TOL)

    def test_single_agent_rejected(self):
        with pytest.raises(ValueError):
            sweep_single_reinforcement(ChainSpec(1, ()))


class TestGreedyMultiReinforcement:
    def test_budget_one_matches_sweep(self):
        chain = ChainSpec.from_probs([0.2, 0.7, 0.7, 0.3])
        sweep = sweep_single_reinforcement(chain)
        plan = greedy_multi_reinforcement(chain, 1)
        assert plan.extra_trials == ((sweep.best_edge, 1),)
        assert plan.final_gap == pytest.approx(sweep.best_gap, abs=TOL)
        assert plan.baseline_gap == pytest.approx(sweep.baseline_gap, abs=TOL)
        assert plan.rounds == ((sweep.best_edge, plan.final_gap),)

    def test_budget_spent_exactly(self):
        chain = ChainSpec.from_probs([0.3, 0.6, 0.4])
        plan = greedy_multi_reinforcement(chain, 5)
        assert sum(extra for _, extra in plan.extra_trials) == 5
        assert plan.budget == 5
        assert len(plan.rounds) == 5
        assert plan.as_dict() == dict(plan.extra_trials)

    def test_gap_never_decreases_over_rounds(self):
        rng = np.random.default_rng(89)
        for _ in range(10):
            chain = random_chain(rng, int(rng.integers(2, 7)), low=0.1, high=0.9)
            plan = greedy_multi_reinforcement(chain, 4)
            gaps = [plan.baseline_gap] + [gap for _, gap in plan.rounds]
            assert all(a <= b + TOL for a, b in zip(gaps, gaps[1:]))
            assert plan.final_gap == pytest.approx(
                expected_gap(chain.with_extra_trials(plan.as_dict())), abs=TOL
            )

    def test_validation(self):
        chain = ChainSpec.from_probs([0.5])
        with pytest.raises(ValueError):
            greedy_multi_reinforcement(chain, 0)
        with pytest.raises(ValueError):
            greedy_multi_reinforcement(ChainSpec(1, ()), 1)


class TestExhaustiveAllocation:
    def test_single_budget_matches_sweep(self):
        chain = ChainSpec.from_probs([0.2, 0.7, 0.7, 0.3])
        alloc, gap = best_exhaustive_allocation(chain, 1)
        sweep = sweep_single_reinforcement(chain)
        assert alloc == {sweep.best_edge: 1}
        assert gap == pytest.approx(sweep.best_gap, abs=TOL)

    def test_dominates_greedy(self):
        rng = np.random.default_rng(97)
        ratios = []
        for _ in range(8):
            chain = random_chain(rng, int(rng.integers(3, 6)), low=0.15, high=0.85)
            budget = int(rng.integers(2, 4))
            plan = greedy_multi_reinforcement(chain, budget)
            alloc, exact_gap = best_exhaustive_allocation(chain, budget)
            assert sum(alloc.values()) == budget
            assert plan.final_gap <= exact_gap + TOL
            assert exact_gap >= plan.baseline_gap - TOL
            ratios.append(plan.final_gap / exact_gap)
        # informational: greedy tracked the exact optimum closely on this grid
        assert min(ratios) > 0.9

    def test_validation(self):
        with pytest.raises(ValueError):
            best_exhaustive_allocation(ChainSpec.from_probs([0.5]), 0)
        with pytest.raises(ValueError):
            best_exhaustive_allocation(ChainSpec(1, ()), 2)
