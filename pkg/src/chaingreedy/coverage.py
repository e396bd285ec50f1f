"""Sensor-coverage benchmark: instances, oracle, and the Monte Carlo harness.

Agents choose among candidate sensor locations on a plane; a selection covers
every target point within some selected sensor's disk, and the utility is the
count of covered points. Coverage counts are monotone submodular, so the
greedy machinery and gap theory apply directly. The Monte Carlo harness
averages the decentralized greedy's utility over sampled hand-off outcomes
and compares the empirical gap against the predicted one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from . import backends
from .chainprob import ChainSpec, expected_gap
from .core import (
    GroundElement,
    PartitionMatroid,
    SelectionResult,
    UtilityOracle,
    brute_force_optimum,
    coerce_mask_bits,
)

__all__ = [
    "CoverageInstance",
    "CoverageOracle",
    "MonteCarloReport",
    "generate_instance",
    "coverage_value",
    "apply_permutation",
    "normalize_order",
    "format_order",
    "run_chain_greedy",
    "best_known_optimum",
    "monte_carlo",
    "instance_to_dict",
    "instance_from_dict",
    "save_instance",
    "load_instance",
]

# Substream namespace for the random restarts in best_known_optimum; iteration
# substreams use (seed, k) with k below this.
_RESTART_STREAM = 1 << 33

# Maximal-selection count under which the optimum is certified by brute force;
# each candidate costs a Python-level oracle call, so this stays modest.
DEFAULT_OPTIMUM_ENUMERATION_CAP = 100_000


@dataclass(frozen=True, eq=False)
class CoverageInstance:
    """A planar coverage scenario.

    ``agent_locations[i]`` lists the candidate location indices of agent i+1
    (its option b places a sensor at ``locations[agent_locations[i][b]]``).
    ``radii[i]`` holds one disk radius per sensor slot of agent i+1; the
    bundled oracle requires them equal within an agent, since an option's
    footprint must not depend on which slot it lands in.
    """

    points: np.ndarray
    locations: np.ndarray
    agent_locations: tuple[tuple[int, ...], ...]
    radii: tuple[tuple[float, ...], ...]
    kappas: tuple[int, ...]
    seed: int | None = None

    def __post_init__(self):
        points = np.ascontiguousarray(self.points, dtype=np.float64)
        locations = np.ascontiguousarray(self.locations, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise ValueError(f"points must be (P, 2), got {points.shape}")
        if locations.ndim != 2 or locations.shape[1] != 2:
            raise ValueError(f"locations must be (L, 2), got {locations.shape}")
        agent_locations = tuple(
            tuple(int(b) for b in row) for row in self.agent_locations
        )
        radii = tuple(tuple(float(r) for r in row) for row in self.radii)
        kappas = tuple(int(k) for k in self.kappas)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "agent_locations", agent_locations)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "kappas", kappas)
        n = len(agent_locations)
        if n < 1:
            raise ValueError("need at least one agent")
        if len(radii) != n or len(kappas) != n:
            raise ValueError(
                f"{n} agents but {len(radii)} radius rows and {len(kappas)} capacities"
            )
        num_locations = locations.shape[0]
        for i, row in enumerate(agent_locations):
            if not row:
                raise ValueError(f"agent {i + 1} has no candidate locations")
            for b in row:
                if not 0 <= b < num_locations:
                    raise ValueError(
                        f"agent {i + 1} references location {b} outside 0..{num_locations - 1}"
                    )
            if not 0 <= kappas[i] <= len(row):
                raise ValueError(
                    f"capacity {kappas[i]} for agent {i + 1} outside 0..{len(row)}"
                )
            if not radii[i]:
                raise ValueError(f"agent {i + 1} has no sensor slots")
            for r in radii[i]:
                if not (r > 0):
                    raise ValueError(f"radius {r} for agent {i + 1} is not positive")

    @property
    def n(self) -> int:
        return len(self.agent_locations)

    def ground(self) -> tuple[tuple[GroundElement, ...], ...]:
        """Ground blocks in agent order: element (i, b) is agent i's b-th option."""
        return tuple(
            tuple(GroundElement(i + 1, b) for b in range(len(row)))
            for i, row in enumerate(self.agent_locations)
        )

    def matroid(self) -> PartitionMatroid:
        return PartitionMatroid(
            self.kappas, tuple(len(row) for row in self.agent_locations)
        )

    def element_location(self, elem: GroundElement) -> int:
        """Index into ``locations`` of the sensor placed by ``elem``."""
        if not 1 <= elem.agent <= self.n:
            raise ValueError(f"agent {elem.agent} outside 1..{self.n}")
        row = self.agent_locations[elem.agent - 1]
        if not 0 <= elem.local_id < len(row):
            raise ValueError(
                f"option {elem.local_id} outside 0..{len(row) - 1} for agent {elem.agent}"
            )
        return row[elem.local_id]


def generate_instance(
    n: int = 8,
    num_locations: int = 25,
    locations_per_agent: int = 12,
    num_points: int = 2200,
    kappa=2,
    radius_range: tuple[float, float] = (10.0, 20.0),
    area: tuple[float, float] = (100.0, 100.0),
    seed: int = 0,
) -> CoverageInstance:
    """Sample a random coverage instance, reproducibly from ``seed``.

    Points and candidate locations are uniform over the ``area`` rectangle;
    each agent draws ``locations_per_agent`` distinct candidate locations and
    a single disk radius uniform over ``radius_range``, replicated across its
    sensor slots. ``kappa`` may be a single capacity or one per agent.
    """
    if n < 1:
        raise ValueError(f"need at least one agent, got n={n}")
    if num_locations < 1:
        raise ValueError(f"need at least one location, got {num_locations}")
    if not 1 <= locations_per_agent <= num_locations:
        raise ValueError(
            f"locations_per_agent {locations_per_agent} outside 1..{num_locations}"
        )
    if num_points < 0:
        raise ValueError(f"num_points must be >= 0, got {num_points}")
    lo, hi = (float(radius_range[0]), float(radius_range[1]))
    if not (0 < lo <= hi):
        raise ValueError(f"radius_range {radius_range} must satisfy 0 < lo <= hi")
    width, height = (float(area[0]), float(area[1]))
    if width <= 0 or height <= 0:
        raise ValueError(f"area {area} must be positive")
    if isinstance(kappa, (int, np.integer)):
        kappas = (int(kappa),) * n
    else:
        kappas = tuple(int(k) for k in kappa)
        if len(kappas) != n:
            raise ValueError(f"{len(kappas)} capacities for {n} agents")
    for k in kappas:
        if not 0 <= k <= locations_per_agent:
            raise ValueError(f"capacity {k} outside 0..{locations_per_agent}")

    rng = np.random.default_rng(seed)
    scale = np.array([width, height])
    points = rng.uniform(0.0, 1.0, size=(num_points, 2)) * scale
    locations = rng.uniform(0.0, 1.0, size=(num_locations, 2)) * scale
    agent_locations = []
    radii = []
    for i in range(n):
        row = np.sort(rng.choice(num_locations, size=locations_per_agent, replace=False))
        agent_locations.append(tuple(int(b) for b in row))
        radius = float(rng.uniform(lo, hi))
        slots = max(kappas[i], 1)
        radii.append((radius,) * slots)
    return CoverageInstance(
        points=points,
        locations=locations,
        agent_locations=tuple(agent_locations),
        radii=tuple(radii),
        kappas=kappas,
        seed=int(seed),
    )


def _pack_bool_rows(rows: np.ndarray) -> np.ndarray:
    """Pack an (E, P) boolean array into (E, W) uint64 words, little-endian bits."""
    num_rows = rows.shape[0]
    if rows.shape[1] == 0:
        return np.zeros((num_rows, 1), dtype=np.uint64)
    packed = np.packbits(rows, axis=1, bitorder="little")
    pad = (-packed.shape[1]) % 8
    if pad:
        packed = np.pad(packed, ((0, 0), (0, pad)))
    return np.ascontiguousarray(packed).view(np.uint64)


class CoverageOracle(UtilityOracle):
    """Counts distinct target points covered by the selected sensors.

    Element (agent i, option b) covers every point within the agent's disk
    radius of its candidate location (closed disk: boundary points count).
    Point membership bitsets are precomputed and packed into uint64 words, so
    evaluation is a bitwise union plus a popcount.
    """

    def __init__(self, instance: CoverageInstance):
        self.instance = instance
        agent_radius = []
        for i, row in enumerate(instance.radii):
            if any(r != row[0] for r in row):
                raise ValueError(
                    f"agent {i + 1} has unequal slot radii {row}; coverage "
                    "requires one radius per agent so footprints are slot-independent"
                )
            agent_radius.append(row[0])
        self.agent_radius = tuple(agent_radius)

        points = instance.points
        elements = []
        rows = []
        for i, row in enumerate(instance.agent_locations):
            radius_sq = agent_radius[i] ** 2
            for b, loc_idx in enumerate(row):
                elements.append(GroundElement(i + 1, b))
                delta = points - instance.locations[loc_idx]
                rows.append((delta * delta).sum(axis=1) <= radius_sq)
        self.elements = tuple(elements)
        bool_rows = (
            np.asarray(rows)
            if rows
            else np.zeros((0, points.shape[0]), dtype=bool)
        )
        self.packed = _pack_bool_rows(np.ascontiguousarray(bool_rows, dtype=bool))
        self._row_of = {elem: idx for idx, elem in enumerate(self.elements)}
        sizes = [len(row) for row in instance.agent_locations]
        self.block_starts = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)

    def value(self, selection) -> float:
        sel = frozenset(selection)
        if not sel:
            return 0.0
        rows = []
        for elem in sel:
            idx = self._row_of.get(elem)
            if idx is None:
                raise ValueError(f"unknown element {elem}")
            rows.append(idx)
        union = np.bitwise_or.reduce(self.packed[sorted(rows)], axis=0)
        return float(int(np.bitwise_count(union).sum()))


def coverage_value(instance: CoverageInstance, selection) -> float:
    """Covered-point count of ``selection``; builds a throwaway oracle.

    For repeated evaluations construct one :class:`CoverageOracle` and reuse it.
    """
    return CoverageOracle(instance).value(selection)


def normalize_order(order, n: int) -> tuple[int, ...]:
    """Normalize a chain order to a tuple of 1-based agent ids.

    Accepts ``None`` (identity), a string of letters where 'A' is agent 1
    ("DBHGFCAE"), a comma-separated string of integers ("4,2,8"), or any
    sequence of integers. Must be a bijection on 1..n.
    """
    if order is None:
        return tuple(range(1, n + 1))
    if isinstance(order, str):
        text = order.strip()
        if "," in text:
            ids = tuple(int(part) for part in text.split(","))
        else:
            ids = tuple(ord(ch.upper()) - ord("A") + 1 for ch in text)
    else:
        ids = tuple(int(a) for a in order)
    if sorted(ids) != list(range(1, n + 1)):
        raise ValueError(f"order {order!r} is not a permutation of agents 1..{n}")
    return ids


def format_order(order: Sequence[int]) -> str:
    """Render an agent order as letters when possible ('A' = agent 1)."""
    if max(order) <= 26:
        return "".join(chr(ord("A") + a - 1) for a in order)
    return ",".join(str(a) for a in order)


def apply_permutation(instance: CoverageInstance, order):
    """Ground blocks and matroid arranged in chain order ``order``.

    The chain's edge probabilities stay attached to chain positions, so
    permuting which agent stands where changes who talks over which edge; the
    selections change, the gap theory does not.
    """
    ids = normalize_order(order, instance.n)
    blocks = instance.ground()
    ground = tuple(blocks[a - 1] for a in ids)
    matroid = PartitionMatroid(
        tuple(instance.kappas[a - 1] for a in ids),
        tuple(len(block) for block in ground),
    )
    return ground, matroid


class _OrderLayout(NamedTuple):
    masks: np.ndarray
    starts: np.ndarray
    kappas: np.ndarray
    elements: tuple[GroundElement, ...]


def _order_layout(oracle: CoverageOracle, ids: tuple[int, ...]) -> _OrderLayout:
    """Kernel-ready arrays for the given chain order of agents."""
    instance = oracle.instance
    parts = []
    elements: list[GroundElement] = []
    sizes = []
    for a in ids:
        lo, hi = oracle.block_starts[a - 1], oracle.block_starts[a]
        parts.append(oracle.packed[lo:hi])
        elements.extend(oracle.elements[lo:hi])
        sizes.append(hi - lo)
    masks = np.ascontiguousarray(np.concatenate(parts, axis=0))
    starts = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)
    kappas = np.array([instance.kappas[a - 1] for a in ids], dtype=np.int64)
    return _OrderLayout(masks, starts, kappas, tuple(elements))


def _greedy_calls(layout: _OrderLayout) -> int:
    # Marginal-gain evaluations of the equivalent scan: kappa rounds over the
    # not-yet-picked candidates of each block.
    total = 0
    for pos, cap in enumerate(layout.kappas):
        size = int(layout.starts[pos + 1] - layout.starts[pos])
        total += sum(size - j for j in range(int(cap)))
    return total


def _kernel_result(layout: _OrderLayout, bits: np.ndarray) -> SelectionResult:
    selected, value = backends.coverage_chain_greedy(
        layout.masks, layout.starts, layout.kappas, bits
    )
    per_agent = []
    offset = 0
    for cap in layout.kappas:
        rows = selected[offset : offset + int(cap)]
        per_agent.append(frozenset(layout.elements[r] for r in rows))
        offset += int(cap)
    union = frozenset().union(*per_agent) if per_agent else frozenset()
    return SelectionResult(
        tuple(per_agent), union, float(value), _greedy_calls(layout)
    )


def run_chain_greedy(
    oracle: CoverageOracle, mask=None, order=None
) -> SelectionResult:
    """Kernel-backed decentralized greedy on a coverage instance.

    Equivalent to :func:`chaingreedy.core.decentralized_greedy` with this
    oracle, but runs on packed bitsets. ``mask`` defaults to all-success,
    which is exactly the sequential greedy. ``per_agent`` in the result
    follows the chain order, not agent numbering.
    """
    ids = normalize_order(order, oracle.instance.n)
    if mask is None:
        bits = (1,) * (oracle.instance.n - 1)
    else:
        bits = coerce_mask_bits(mask)
    if len(bits) != oracle.instance.n - 1:
        raise ValueError(
            f"mask has {len(bits)} bits, expected {oracle.instance.n - 1}"
        )
    layout = _order_layout(oracle, ids)
    return _kernel_result(layout, np.asarray(bits, dtype=np.uint8))


def best_known_optimum(
    instance: CoverageInstance,
    *,
    oracle: CoverageOracle | None = None,
    restarts: int = 200,
    seed: int = 0,
    enumeration_cap: int = DEFAULT_OPTIMUM_ENUMERATION_CAP,
) -> float:
    """Best selection value we can certify or find for the instance.

    Exact brute force when the number of maximal independent selections fits
    under ``enumeration_cap``; otherwise the best full-communication greedy
    value over the identity order plus ``restarts`` random orders (a lower
    bound on the true optimum).
    """
    oracle = oracle if oracle is not None else CoverageOracle(instance)
    feasible = 1
    for row, cap in zip(instance.agent_locations, instance.kappas):
        feasible *= math.comb(len(row), cap)
    if feasible <= enumeration_cap:
        result = brute_force_optimum(
            oracle, instance.matroid(), instance.ground(), cap=enumeration_cap
        )
        return result.value
    best = run_chain_greedy(oracle).value
    rng = np.random.default_rng([seed, _RESTART_STREAM])
    for _ in range(restarts):
        order = tuple(int(a) + 1 for a in rng.permutation(instance.n))
        best = max(best, run_chain_greedy(oracle, order=order).value)
    return float(best)


@dataclass(frozen=True)
class MonteCarloReport:
    """Aggregate of a Monte Carlo run.

    ``empirical_gap`` is mean value over ``optimum_value``; ``predicted_gap``
    is the chain's expected gap constant; ``std_error`` is the standard error
    of ``mean_value`` (not normalized by the optimum).
    """

    iterations: int
    mean_value: float
    optimum_value: float
    empirical_gap: float
    predicted_gap: float
    seed: int
    std_error: float
    distinct_outcomes: int


def _sample_outcome_counts(
    chain: ChainSpec, iterations: int, seed: int
) -> dict[int, int]:
    """Tally sampled masks (as ints) over per-iteration substreams.

    Iteration k draws from ``default_rng([seed, k])``, so the sample is fully
    determined by the seed and independent of batching.
    """
    qs = np.asarray(chain.effective_probs())
    m = chain.num_edges
    counts: dict[int, int] = {}
    for k in range(iterations):
        rng = np.random.default_rng([seed, k])
        bits = rng.random(m) < qs
        key = (
            int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")
            if m
            else 0
        )
        counts[key] = counts.get(key, 0) + 1
    return counts


def monte_carlo(
    instance: CoverageInstance,
    chain: ChainSpec,
    permutation=None,
    iterations: int = 10_000,
    seed: int = 0,
    *,
    optimum: float | None = None,
    restarts: int = 200,
    engine: str = "dp",
    oracle: CoverageOracle | None = None,
) -> MonteCarloReport:
    """Average decentralized-greedy utility under sampled hand-off outcomes.

    Each iteration samples one outcome mask from the chain's effective edge
    probabilities and runs the greedy under it. The greedy is deterministic
    per mask, so identical outcomes are solved once and weighted by their
    sample counts; the reported statistics match the naive per-iteration loop
    exactly. Pass ``optimum`` to reuse a precomputed best-known value (it does
    not depend on the permutation).
    """
    if chain.n != instance.n:
        raise ValueError(f"chain has {chain.n} agents, instance has {instance.n}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    ids = normalize_order(permutation, instance.n)
    oracle = oracle if oracle is not None else CoverageOracle(instance)
    layout = _order_layout(oracle, ids)
    m = chain.num_edges

    counts = _sample_outcome_counts(chain, iterations, seed)
    value_of: dict[int, float] = {}
    for key in sorted(counts):
        bits = np.array([(key >> e) & 1 for e in range(m)], dtype=np.uint8)
        _, value = backends.coverage_chain_greedy(
            layout.masks, layout.starts, layout.kappas, bits
        )
        value_of[key] = float(value)

    total = sum(counts[k] * value_of[k] for k in sorted(counts))
    mean = total / iterations
    if iterations > 1:
        ss = sum(counts[k] * (value_of[k] - mean) ** 2 for k in sorted(counts))
        std_error = math.sqrt(ss / (iterations - 1)) / math.sqrt(iterations)
    else:
        std_error = 0.0

    if optimum is None:
        optimum = best_known_optimum(
            instance, oracle=oracle, restarts=restarts, seed=seed
        )
    empirical_gap = mean / optimum if optimum > 0 else 1.0
    return MonteCarloReport(
        iterations=iterations,
        mean_value=mean,
        optimum_value=float(optimum),
        empirical_gap=empirical_gap,
        predicted_gap=expected_gap(chain, engine=engine),
        seed=seed,
        std_error=std_error,
        distinct_outcomes=len(counts),
    )


def instance_to_dict(instance: CoverageInstance) -> dict:
    """JSON-ready dict; float coordinates round-trip exactly via repr."""
    return {
        "seed": instance.seed,
        "kappas": list(instance.kappas),
        "agent_locations": [list(row) for row in instance.agent_locations],
        "radii": [list(row) for row in instance.radii],
        "locations": [[x, y] for x, y in instance.locations.tolist()],
        "points": [[x, y] for x, y in instance.points.tolist()],
    }


def instance_from_dict(data: Mapping) -> CoverageInstance:
    required = {"kappas", "agent_locations", "radii", "locations", "points"}
    missing = required - set(data)
    if missing:
        raise ValueError(f"instance data missing keys: {sorted(missing)}")
    return CoverageInstance(
        points=np.asarray(data["points"], dtype=np.float64).reshape(-1, 2),
        locations=np.asarray(data["locations"], dtype=np.float64).reshape(-1, 2),
        agent_locations=tuple(tuple(row) for row in data["agent_locations"]),
        radii=tuple(tuple(row) for row in data["radii"]),
        kappas=tuple(data["kappas"]),
        seed=data.get("seed"),
    )


def save_instance(instance: CoverageInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2)
        fh.write("\n")


def load_instance(path) -> CoverageInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))
