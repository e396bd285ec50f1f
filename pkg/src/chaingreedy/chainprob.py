"""Exact connectivity distribution of a lossy relay chain and the expected gap.

The realized connectivity of one message-passing round is summarized by the
clique number W of the induced information graph: the longest consecutive run
of delivered hand-offs, plus one. Three engines compute its distribution:

- ``dp``: run-length dynamic program over edge positions; exact, the default.
- ``enumerate``: sums over all 2^(n-1) outcome masks via the kernel backends;
  exact ground truth for testing, capped by edge count.
- ``paper``: O(n) closed form assembled from generative families. Its
  discounting step is only approximate for longer chains, so it is kept for
  auditing and comparison rather than as a reference.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from . import backends
from .core import clique_number, coerce_mask_bits, deterministic_gap_bound
from .errors import EnumerationCapError

__all__ = [
    "ChainSpec",
    "OutcomeMask",
    "GenerativeSequence",
    "CliqueDistribution",
    "effective_edge_prob",
    "family_probability",
    "mask_probability",
    "prob_clique_at_least",
    "prob_clique_at_least_closed_form",
    "clique_distribution",
    "enumerate_outcomes",
    "iter_outcomes",
    "expected_gap",
    "ENGINES",
    "DEFAULT_ENUMERATION_CAP",
]

ENGINES = ("dp", "paper", "enumerate")

# Edge-count ceiling for exhaustive outcome enumeration (2^24 masks).
DEFAULT_ENUMERATION_CAP = 24


def effective_edge_prob(base_prob: float, trials: int) -> float:
    """Probability that at least one of ``trials`` independent attempts lands."""
    p = float(base_prob)
    t = int(trials)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if t < 1:
        raise ValueError(f"trial count must be >= 1, got {t}")
    if t == 1:
        # exact identity; 1 - (1 - p) can round away from p
        return p
    return 1.0 - (1.0 - p) ** t


@dataclass(frozen=True)
class ChainSpec:
    """A relay chain: n agents, per-edge delivery probability and trial count.

    Edge i (1-based) carries the hand-off from agent i to agent i+1 and is
    attempted ``trials[i-1]`` times per round; the round succeeds if any
    attempt does. ``trials`` defaults to a single attempt per edge.
    """

    n: int
    base_probs: tuple[float, ...]
    trials: tuple[int, ...] = ()

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ValueError(f"need at least one agent, got n={n}")
        probs = tuple(float(p) for p in self.base_probs)
        trials = tuple(int(t) for t in self.trials)
        if not trials:
            trials = (1,) * (n - 1)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "base_probs", probs)
        object.__setattr__(self, "trials", trials)
        if len(probs) != n - 1:
            raise ValueError(f"{len(probs)} edge probabilities for {n - 1} edges")
        if len(trials) != n - 1:
            raise ValueError(f"{len(trials)} trial counts for {n - 1} edges")
        for p in probs:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
        for t in trials:
            if t < 1:
                raise ValueError(f"trial count must be >= 1, got {t}")

    @classmethod
    def from_probs(cls, probs, trials=None) -> "ChainSpec":
        probs = tuple(probs)
        return cls(len(probs) + 1, probs, tuple(trials) if trials else ())

    @property
    def num_edges(self) -> int:
        return self.n - 1

    def effective_probs(self) -> tuple[float, ...]:
        """Per-edge delivery probability after accounting for repeated trials."""
        return tuple(
            effective_edge_prob(p, t) for p, t in zip(self.base_probs, self.trials)
        )

    def with_extra_trials(self, extra: Mapping[int, int]) -> "ChainSpec":
        """A copy with ``extra[edge]`` additional trials on each listed edge (1-based)."""
        trials = list(self.trials)
        for edge, count in extra.items():
            e = int(edge)
            if not 1 <= e <= self.num_edges:
                raise ValueError(f"edge {e} outside 1..{self.num_edges}")
            c = int(count)
            if c < 0:
                raise ValueError(f"extra trial count must be >= 0, got {c}")
            trials[e - 1] += c
        return ChainSpec(self.n, self.base_probs, tuple(trials))


@dataclass(frozen=True)
class OutcomeMask:
    """One realized success (1) / failure (0) bit per chain edge."""

    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", coerce_mask_bits(self.bits))

    @classmethod
    def from_int(cls, value: int, num_edges: int) -> "OutcomeMask":
        """Decode ``value`` as bits, edge 1 in the least significant position."""
        if value < 0 or value >= 1 << num_edges:
            raise ValueError(f"mask value {value} outside 0..{(1 << num_edges) - 1}")
        return cls(tuple((value >> e) & 1 for e in range(num_edges)))

    def as_int(self) -> int:
        return sum(b << e for e, b in enumerate(self.bits))

    def __iter__(self):
        return iter(self.bits)

    def __len__(self):
        return len(self.bits)


def mask_probability(chain: ChainSpec, mask) -> float:
    """Probability of one exact outcome mask under the chain's effective probs."""
    bits = coerce_mask_bits(mask)
    if len(bits) != chain.num_edges:
        raise ValueError(f"mask has {len(bits)} bits, expected {chain.num_edges}")
    prob = 1.0
    for b, q in zip(bits, chain.effective_probs()):
        prob *= q if b else 1.0 - q
    return prob


@dataclass(frozen=True)
class GenerativeSequence:
    """A partial edge assignment: some edges forced on, some forced off.

    Edge indices are 1-based. The family it generates is the event that all
    listed edges behave as assigned, with every unlisted edge free; its
    probability is the product of the listed edges' individual terms.
    """

    connected: frozenset[int]
    disconnected: frozenset[int]

    def __post_init__(self):
        con = frozenset(int(e) for e in self.connected)
        dis = frozenset(int(e) for e in self.disconnected)
        object.__setattr__(self, "connected", con)
        object.__setattr__(self, "disconnected", dis)
        overlap = con & dis
        if overlap:
            raise ValueError(f"edges {sorted(overlap)} both connected and disconnected")
        for e in con | dis:
            if e < 1:
                raise ValueError(f"edge index must be >= 1, got {e}")


def family_probability(chain: ChainSpec, seq: GenerativeSequence) -> float:
    """Probability of the outcome family generated by ``seq``."""
    qs = chain.effective_probs()
    for e in sorted(seq.connected | seq.disconnected):
        if e > chain.num_edges:
            raise ValueError(f"edge {e} outside 1..{chain.num_edges}")
    prob = 1.0
    for e in sorted(seq.connected):
        prob *= qs[e - 1]
    for e in sorted(seq.disconnected):
        prob *= 1.0 - qs[e - 1]
    return prob


@dataclass(frozen=True)
class CliqueDistribution:
    """P(W = l) for clique numbers l = 1..n, tagged with the engine that built it.

    Construction does not force the entries to sum to one: the closed-form
    engine can emit slightly inconsistent mass, and keeping it representable
    is exactly what makes the audit tooling possible. Call :meth:`validate`
    when exactness is required.
    """

    pmf: tuple[float, ...]
    engine: str

    def __post_init__(self):
        object.__setattr__(self, "pmf", tuple(float(p) for p in self.pmf))
        if not self.pmf:
            raise ValueError("pmf must have at least one entry")

    @property
    def n(self) -> int:
        return len(self.pmf)

    def prob(self, l: int) -> float:
        """P(W = l)."""
        if not 1 <= l <= self.n:
            raise ValueError(f"clique number {l} outside 1..{self.n}")
        return self.pmf[l - 1]

    def at_least(self, l: int) -> float:
        """P(W >= l); by convention 1 for l <= 1 and 0 for l > n."""
        if l <= 1:
            return 1.0
        if l > self.n:
            return 0.0
        return float(sum(self.pmf[l - 1 :]))

    def validate(self, tol: float = 1e-12) -> None:
        """Raise unless entries are in [0, 1] and sum to 1, all within ``tol``."""
        for l, p in enumerate(self.pmf, start=1):
            if p < -tol or p > 1.0 + tol:
                raise ValueError(f"P(W={l}) = {p} outside [0, 1] (tol={tol})")
        total = sum(self.pmf)
        if abs(total - 1.0) > tol:
            raise ValueError(f"pmf sums to {total}, not 1 (tol={tol})")

    def expected_gap(self) -> float:
        """Probability-weighted optimality-gap constant implied by this pmf."""
        return sum(
            p * deterministic_gap_bound(self.n, l)
            for l, p in enumerate(self.pmf, start=1)
        )


def _check_level(chain: ChainSpec, l: int) -> None:
    if not 1 <= l <= chain.n:
        raise ValueError(f"clique number {l} outside 1..{chain.n}")


def prob_clique_at_least(chain: ChainSpec, l: int) -> float:
    """P(W >= l): the chance of a success run of at least l-1 consecutive edges.

    Method: dynamic program over edge positions. The state is the probability
    of each current trailing-run length 0..l-2 among outcomes that have not
    yet produced a run of l-1; a success from the longest tracked state moves
    its mass into an absorbing "achieved" bucket, a failure pools everything
    back to run length 0. Linear in (number of edges) x l and exact, including
    at the degenerate probabilities 0 and 1.
    """
    _check_level(chain, l)
    run_needed = l - 1
    if run_needed == 0:
        return 1.0
    state = [0.0] * run_needed
    state[0] = 1.0
    achieved = 0.0
    for q in chain.effective_probs():
        pooled = (1.0 - q) * sum(state)
        achieved += state[run_needed - 1] * q
        nxt = [0.0] * run_needed
        nxt[0] = pooled
        for k in range(1, run_needed):
            nxt[k] = state[k - 1] * q
        state = nxt
    return achieved


def prob_clique_at_least_closed_form(chain: ChainSpec, l: int) -> float:
    """P(W >= l) via the union-of-families closed form (the ``paper`` engine).

    Builds one generative family per possible start of an (l-1)-edge success
    run: family i forces edges i..i+l-2 on and edge i-1 off (nothing off for
    i = 1). The first l families are genuinely disjoint and are summed
    directly; each later family is discounted by the summed probability of
    the families it can overlap. That discount treats the earlier families as
    disjoint among themselves, which stops being true once n - l >= 4, so the
    result can drift from :func:`prob_clique_at_least`. Kept for auditing;
    see the acceptance report for measured deviations.
    """
    _check_level(chain, l)
    run = l - 1
    if run == 0:
        return 1.0
    fam_count = chain.n - run
    fams = []
    for i in range(1, fam_count + 1):
        connected = frozenset(range(i, i + run))
        disconnected = frozenset() if i == 1 else frozenset({i - 1})
        fams.append(
            family_probability(chain, GenerativeSequence(connected, disconnected))
        )
    lead = min(run + 1, fam_count)
    total = sum(fams[:lead])
    prefix = list(itertools.accumulate(fams))
    for i in range(run + 2, fam_count + 1):
        total += fams[i - 1] * (1.0 - prefix[i - run - 2])
    return total


def enumerate_outcomes(
    chain: ChainSpec, cap: int = DEFAULT_ENUMERATION_CAP
) -> CliqueDistribution:
    """Exact clique-number distribution by summing over all 2^(n-1) outcomes.

    Refuses chains with more than ``cap`` edges; the work is exponential.
    """
    m = chain.num_edges
    if m > cap:
        raise EnumerationCapError(
            f"chain has {m} edges, so {2 ** m} outcome masks; the enumeration cap "
            f"is {cap} edges ({2 ** cap} masks)",
            size=m,
            cap=cap,
        )
    pmf = backends.clique_pmf_by_enumeration(np.asarray(chain.effective_probs()))
    return CliqueDistribution(tuple(float(p) for p in pmf), engine="enumerate")


def clique_distribution(
    chain: ChainSpec,
    engine: str = "dp",
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> CliqueDistribution:
    """Distribution of the realized clique number under the chosen engine."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    if engine == "enumerate":
        return enumerate_outcomes(chain, cap=cap)
    at_least = (
        prob_clique_at_least if engine == "dp" else prob_clique_at_least_closed_form
    )
    tail = [at_least(chain, l) for l in range(1, chain.n + 1)]
    tail.append(0.0)
    pmf = tuple(tail[l - 1] - tail[l] for l in range(1, chain.n + 1))
    return CliqueDistribution(pmf, engine=engine)


def iter_outcomes(
    chain: ChainSpec, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[tuple[OutcomeMask, float, int]]:
    """Yield (mask, probability, clique number) for every outcome, in mask order.

    Mask order is the integer encoding with edge 1 least significant.
    """
    m = chain.num_edges
    if m > cap:
        raise EnumerationCapError(
            f"chain has {m} edges, so {2 ** m} outcome masks; the enumeration cap "
            f"is {cap} edges ({2 ** cap} masks)",
            size=m,
            cap=cap,
        )
    qs = chain.effective_probs()
    for value in range(1 << m):
        bits = tuple((value >> e) & 1 for e in range(m))
        prob = 1.0
        for b, q in zip(bits, qs):
            prob *= q if b else 1.0 - q
        yield OutcomeMask(bits), prob, clique_number(bits)


def expected_gap(
    chain: ChainSpec,
    engine: str = "dp",
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """Probability-weighted optimality-gap constant of the chain.

    The expectation of 1/(2 + n - W) over the clique-number distribution:
    the factor of the optimum that the decentralized greedy is guaranteed in
    expectation. Equals 1/2 when every hand-off is certain and 1/(n+1) when
    every hand-off always fails.
    """
    return clique_distribution(chain, engine=engine, cap=cap).expected_gap()
