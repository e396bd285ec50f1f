"""Ground-set model, partition matroids, and greedy / brute-force solvers.

A team of n agents picks options from disjoint per-agent blocks, at most
kappa_i from block i, to maximize a monotone submodular utility known only
through a value oracle. The sequential greedy baseline assumes every agent
sees all earlier picks; the decentralized variant threads the picks along a
relay chain whose hand-offs can fail, so an agent may plan against a stale
(empty) view of its upstream peers.
"""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import EnumerationCapError

__all__ = [
    "GroundElement",
    "PartitionMatroid",
    "UtilityOracle",
    "AdditiveOracle",
    "SelectionResult",
    "marginal_gain",
    "sequential_greedy",
    "decentralized_greedy",
    "brute_force_optimum",
    "clique_number",
    "deterministic_gap_bound",
    "coerce_mask_bits",
    "DEFAULT_BRUTE_FORCE_CAP",
]

DEFAULT_BRUTE_FORCE_CAP = 10_000_000


@dataclass(frozen=True, order=True)
class GroundElement:
    """One selectable option, tagged by the owning agent.

    Tagging keeps per-agent option sets disjoint by construction even when two
    agents can reach the same physical resource. Agents are numbered from 1,
    options within an agent from 0.
    """

    agent: int
    local_id: int

    def __post_init__(self):
        if self.agent < 1:
            raise ValueError(f"agent index must be >= 1, got {self.agent}")
        if self.local_id < 0:
            raise ValueError(f"local_id must be >= 0, got {self.local_id}")

    def __repr__(self):
        return f"GroundElement({self.agent}, {self.local_id})"


@dataclass(frozen=True)
class PartitionMatroid:
    """Independence system: at most ``capacities[k]`` picks from the k-th block.

    Blocks are positional; callers pair the matroid with a ground-block
    sequence of matching sizes.
    """

    capacities: tuple[int, ...]
    partition_sizes: tuple[int, ...]

    def __post_init__(self):
        caps = tuple(int(c) for c in self.capacities)
        sizes = tuple(int(s) for s in self.partition_sizes)
        object.__setattr__(self, "capacities", caps)
        object.__setattr__(self, "partition_sizes", sizes)
        if len(caps) != len(sizes):
            raise ValueError(
                f"{len(caps)} capacities for {len(sizes)} blocks"
            )
        if not caps:
            raise ValueError("matroid needs at least one block")
        for k, (cap, size) in enumerate(zip(caps, sizes)):
            if size < 1:
                raise ValueError(f"block {k + 1} is empty")
            if not 0 <= cap <= size:
                raise ValueError(
                    f"capacity {cap} for block {k + 1} outside 0..{size}"
                )

    @property
    def n(self) -> int:
        return len(self.capacities)

    def is_independent(self, selection, ground) -> bool:
        """True when ``selection`` takes at most capacity from every block."""
        blocks = _prepare(ground, self)
        sel = frozenset(selection)
        members = frozenset(itertools.chain.from_iterable(blocks))
        if not sel <= members:
            raise ValueError(f"selection contains non-ground elements: {sorted(sel - members)}")
        return all(
            sum(1 for s in sel if s in frozenset(block)) <= cap
            for block, cap in zip(blocks, self.capacities)
        )


class UtilityOracle(ABC):
    """Black-box evaluator of a set function over ground elements.

    Implementations are expected to be normal (empty set maps to 0),
    monotone, and submodular; the solvers only ever call :meth:`value`.
    Memoization, if any, is the implementation's concern.
    """

    @abstractmethod
    def value(self, selection: Iterable[GroundElement]) -> float:
        """Utility of the given selection."""


class AdditiveOracle(UtilityOracle):
    """Modular utility: the sum of fixed nonnegative per-element weights."""

    def __init__(self, weights: Mapping[GroundElement, float]):
        self._weights = {k: float(v) for k, v in weights.items()}
        for elem, w in self._weights.items():
            if w < 0:
                raise ValueError(f"negative weight {w} for {elem}")

    def value(self, selection):
        total = 0.0
        for s in frozenset(selection):
            if s not in self._weights:
                raise ValueError(f"unknown element {s}")
            total += self._weights[s]
        return total


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of one solver run.

    ``per_agent`` follows the chain order of the ground blocks the solver was
    given. ``oracle_calls`` counts marginal-gain evaluations for the greedy
    solvers and candidate sets for brute force.
    """

    per_agent: tuple[frozenset[GroundElement], ...]
    union: frozenset[GroundElement]
    value: float
    oracle_calls: int


def marginal_gain(oracle: UtilityOracle, s: GroundElement, selection) -> float:
    """f(S + s) - f(S). Nonnegative whenever the oracle is monotone."""
    base = frozenset(selection)
    if s in base:
        raise ValueError(f"element {s} is already selected")
    return oracle.value(base | {s}) - oracle.value(base)


def coerce_mask_bits(mask) -> tuple[int, ...]:
    """Normalize an edge-outcome mask to a tuple of 0/1 ints.

    Accepts any iterable of bits or an object exposing a ``bits`` attribute.
    """
    bits = getattr(mask, "bits", mask)
    out = []
    for b in bits:
        ib = int(b)
        if ib not in (0, 1):
            raise ValueError(f"mask bits must be 0 or 1, got {b!r}")
        out.append(ib)
    return tuple(out)


def clique_number(mask) -> int:
    """Longest consecutive run of successful edges, plus one.

    This is the size of the largest group of consecutive agents that all end
    up sharing the same information, i.e. the clique number of the chain's
    realized information graph. An all-failure mask still yields 1.
    """
    best = run = 0
    for b in coerce_mask_bits(mask):
        run = run + 1 if b else 0
        if run > best:
            best = run
    return best + 1


def deterministic_gap_bound(n: int, w: int) -> float:
    """Worst-case value ratio guaranteed when w consecutive agents stay connected.

    With full connectivity (w == n) this is the classic 1/2; every lost agent
    of connectivity costs one unit in the denominator, down to 1/(n+1).
    """
    if n < 1:
        raise ValueError(f"need at least one agent, got n={n}")
    if not 1 <= w <= n:
        raise ValueError(f"clique number {w} outside 1..{n}")
    return 1.0 / (2 + n - w)


def _prepare(ground, matroid: PartitionMatroid):
    """Validate ground blocks against the matroid; return blocks sorted by local_id.

    Sorting fixes the candidate scan order, so greedy tie-breaks land on the
    lowest local_id deterministically.
    """
    blocks = tuple(tuple(sorted(block)) for block in ground)
    if len(blocks) != matroid.n:
        raise ValueError(f"{len(blocks)} ground blocks for {matroid.n} matroid blocks")
    seen: set[GroundElement] = set()
    for k, (block, size) in enumerate(zip(blocks, matroid.partition_sizes)):
        if len(block) != size:
            raise ValueError(
                f"block {k + 1} has {len(block)} elements, matroid expects {size}"
            )
        agents = {s.agent for s in block}
        if len(agents) != 1:
            raise ValueError(f"block {k + 1} mixes agent tags {sorted(agents)}")
        for s in block:
            if s in seen:
                raise ValueError(f"duplicate element {s}")
            seen.add(s)
    return blocks


def _greedy_block(oracle, block, kappa, context):
    """Pick ``kappa`` elements from ``block`` by repeated best marginal gain.

    ``block`` must be pre-sorted; ties go to the earliest candidate. Picks are
    made even at zero gain: the quota is fixed, and padding never hurts a
    monotone utility.
    """
    remaining = list(block)
    picks: list[GroundElement] = []
    evaluations = 0
    base = set(context)
    for _ in range(kappa):
        base_value = oracle.value(base)
        best_idx = -1
        best_gain = -math.inf
        for idx, cand in enumerate(remaining):
            gain = oracle.value(base | {cand}) - base_value
            evaluations += 1
            if gain > best_gain:
                best_gain = gain
                best_idx = idx
        chosen = remaining.pop(best_idx)
        picks.append(chosen)
        base.add(chosen)
    return picks, evaluations


def sequential_greedy(oracle: UtilityOracle, matroid: PartitionMatroid, ground) -> SelectionResult:
    """Greedy over agents in chain order with a perfectly shared view.

    Agent i picks its kappa_i elements one at a time, each maximizing the
    marginal gain on top of everything already chosen by agents 1..i.
    Guarantees at least half of the optimum for monotone submodular oracles.
    """
    blocks = _prepare(ground, matroid)
    accumulated: set[GroundElement] = set()
    per_agent = []
    calls = 0
    for block, kappa in zip(blocks, matroid.capacities):
        picks, evals = _greedy_block(oracle, block, kappa, accumulated)
        calls += evals
        per_agent.append(frozenset(picks))
        accumulated.update(picks)
    union = frozenset(accumulated)
    return SelectionResult(tuple(per_agent), union, float(oracle.value(union)), calls)


def decentralized_greedy(oracle: UtilityOracle, matroid: PartitionMatroid, ground, mask) -> SelectionResult:
    """Chain-order greedy where each hand-off may fail.

    ``mask`` holds one success bit per chain edge (edge i links positions i
    and i+1). A failed edge wipes the receiver's view of everything upstream:
    it plans from an empty context and forwards onward only what it can see,
    namely its own picks plus whatever it received. With an all-success mask
    this reduces exactly to :func:`sequential_greedy`.
    """
    blocks = _prepare(ground, matroid)
    bits = coerce_mask_bits(mask)
    if len(bits) != matroid.n - 1:
        raise ValueError(f"mask has {len(bits)} bits, expected {matroid.n - 1}")
    carry: set[GroundElement] = set()
    per_agent = []
    calls = 0
    for pos, (block, kappa) in enumerate(zip(blocks, matroid.capacities)):
        if pos > 0 and not bits[pos - 1]:
            carry = set()
        picks, evals = _greedy_block(oracle, block, kappa, carry)
        calls += evals
        per_agent.append(frozenset(picks))
        carry = carry | set(picks)
    union = frozenset(itertools.chain.from_iterable(per_agent))
    return SelectionResult(tuple(per_agent), union, float(oracle.value(union)), calls)


def brute_force_optimum(
    oracle: UtilityOracle,
    matroid: PartitionMatroid,
    ground,
    cap: int = DEFAULT_BRUTE_FORCE_CAP,
) -> SelectionResult:
    """Exact optimum by enumerating every independent selection of full quota.

    Only maximal selections are scanned; monotonicity makes that lossless.
    Raises :class:`EnumerationCapError` when the candidate count exceeds
    ``cap``. Ties resolve to the first maximizer in lexicographic block order,
    so results are deterministic.
    """
    blocks = _prepare(ground, matroid)
    total = 1
    for block, kappa in zip(blocks, matroid.capacities):
        total *= math.comb(len(block), kappa)
    if total > cap:
        raise EnumerationCapError(
            f"{total} candidate selections exceed the enumeration cap of {cap}",
            size=total,
            cap=cap,
        )
    best_combo = None
    best_value = -math.inf
    count = 0
    choices = (itertools.combinations(block, kappa) for block, kappa in zip(blocks, matroid.capacities))
    for combo in itertools.product(*choices):
        count += 1
        value = oracle.value(frozenset(itertools.chain.from_iterable(combo)))
        if value > best_value:
            best_value = value
            best_combo = combo
    per_agent = tuple(frozenset(part) for part in best_combo)
    union = frozenset(itertools.chain.from_iterable(best_combo))
    return SelectionResult(per_agent, union, float(best_value), count)
