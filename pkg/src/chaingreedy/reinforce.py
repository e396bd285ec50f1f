"""Allocation of extra transmission trials to raise the expected gap.

Granting an edge extra trials raises its effective delivery probability and
therefore the chain's expected optimality gap. The single-trial sweep answers
"which edge should get one more attempt"; the greedy allocator spends a larger
trial budget one attempt at a time. An exhaustive allocator is included as an
exact (exponential) reference, since the greedy one carries no optimality
guarantee of its own.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

from .chainprob import ChainSpec, expected_gap

__all__ = [
    "SweepReport",
    "ReinforcementPlan",
    "evaluate_single_reinforcement",
    "sweep_single_reinforcement",
    "greedy_multi_reinforcement",
    "best_exhaustive_allocation",
]


def _check_reinforceable(chain: ChainSpec) -> None:
    if chain.num_edges < 1:
        raise ValueError("chain has no edges to reinforce")


def evaluate_single_reinforcement(
    chain: ChainSpec, edge: int, engine: str = "dp"
) -> float:
    """Expected gap after granting ``edge`` (1-based) one extra trial."""
    return expected_gap(chain.with_extra_trials({edge: 1}), engine=engine)


@dataclass(frozen=True)
class SweepReport:
    """Expected gaps from trying one extra trial on each edge in turn.

    ``per_edge_gap[i]`` is the gap with edge i+1 reinforced; ``best_edge`` is
    1-based, ties resolved to the lowest index.
    """

    baseline_gap: float
    per_edge_gap: tuple[float, ...]
    best_edge: int
    best_gap: float


def sweep_single_reinforcement(chain: ChainSpec, engine: str = "dp") -> SweepReport:
    """Evaluate one extra trial on every edge; report the most valuable edge.

    The best edge is a genuine position effect, not simply the least reliable
    edge: a mid-chain edge can enable longer consecutive runs than an endpoint
    edge of equal reliability.
    """
    _check_reinforceable(chain)
    baseline = expected_gap(chain, engine=engine)
    gaps = tuple(
        evaluate_single_reinforcement(chain, edge, engine=engine)
        for edge in range(1, chain.num_edges + 1)
    )
    best_gap = max(gaps)
    best_edge = gaps.index(best_gap) + 1
    return SweepReport(baseline, gaps, best_edge, best_gap)


@dataclass(frozen=True)
class ReinforcementPlan:
    """How a budget of extra trials was spent and what it bought.

    ``extra_trials`` holds (edge, extra) pairs sorted by edge; ``rounds``
    records, per budget unit, the edge granted and the gap after granting it.
    """

    extra_trials: tuple[tuple[int, int], ...]
    budget: int
    baseline_gap: float
    final_gap: float
    rounds: tuple[tuple[int, float], ...]

    def as_dict(self) -> dict[int, int]:
        return dict(self.extra_trials)


def greedy_multi_reinforcement(
    chain: ChainSpec, budget: int, engine: str = "dp"
) -> ReinforcementPlan:
    """Spend ``budget`` extra trials one at a time, greedily.

    Each round grants one extra trial to the edge whose reinforcement yields
    the highest expected gap given everything granted so far. Heuristic: the
    sweep inside each round is exact, but the round-by-round composition is
    not guaranteed optimal (compare with :func:`best_exhaustive_allocation`).
    """
    _check_reinforceable(chain)
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    baseline = expected_gap(chain, engine=engine)
    granted: Counter[int] = Counter()
    current = chain
    rounds = []
    for _ in range(budget):
        report = sweep_single_reinforcement(current, engine=engine)
        granted[report.best_edge] += 1
        current = current.with_extra_trials({report.best_edge: 1})
        rounds.append((report.best_edge, report.best_gap))
    extra = tuple(sorted(granted.items()))
    return ReinforcementPlan(extra, budget, baseline, rounds[-1][1], tuple(rounds))


def best_exhaustive_allocation(
    chain: ChainSpec, budget: int, engine: str = "dp"
) -> tuple[dict[int, int], float]:
    """Exact best split of ``budget`` extra trials across edges.

    Enumerates every multiset of edges of size ``budget``; exponential, meant
    as a reference for small budgets. Ties resolve to the lexicographically
    first multiset.
    """
    _check_reinforceable(chain)
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    edges = range(1, chain.num_edges + 1)
    best_alloc: dict[int, int] | None = None
    best_gap = -1.0
    for combo in itertools.combinations_with_replacement(edges, budget):
        alloc = Counter(combo)
        gap = expected_gap(chain.with_extra_trials(alloc), engine=engine)
        if gap > best_gap:
            best_gap = gap
            best_alloc = dict(sorted(alloc.items()))
    assert best_alloc is not None
    return best_alloc, best_gap
