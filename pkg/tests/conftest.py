"""Shared test helpers."""

import numpy as np

from chaingreedy import generate_instance


def make_tiny_instance(rng):
    """Random coverage instance small enough to brute force.

    At most 4 agents with at most 5 options each and unit capacity, so the
    optimum enumerates at most 5^4 selections and masks number at most 8.
    """
    n = int(rng.integers(2, 5))
    per_agent = int(rng.integers(2, 6))
    num_locations = int(rng.integers(per_agent, 2 * per_agent + 4))
    num_points = int(rng.integers(40, 90))
    return generate_instance(
        n=n,
        num_locations=num_locations,
        locations_per_agent=per_agent,
        num_points=num_points,
        kappa=1,
        radius_range=(12.0, 35.0),
        area=(100.0, 100.0),
        seed=int(rng.integers(0, 2**31)),
    )


def random_chain(rng, n, low=0.0, high=1.0):
    from chaingreedy import ChainSpec

    return ChainSpec.from_probs(rng.uniform(low, high, size=n - 1))


def all_masks(num_edges):
    for value in range(1 << num_edges):
        yield tuple((value >> e) & 1 for e in range(num_edges))


__all__ = ["make_tiny_instance", "random_chain", "all_masks", "np"]
