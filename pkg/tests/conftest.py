"""Shared oracles and fixtures.

The determinant oracles here are intentionally brute force so they stay
independent of the implementation they check.
"""

from itertools import combinations

import numpy as np
import pytest

from agnosbm import Regime, SbmParams


def rank_moments(a, mus, length):
    """Exact moment sequence N_l = sum_s a_s mus_s^l for l = 0..length-1.

    Built in extended precision: the Hankel determinants this feeds are
    cancellation-heavy and would otherwise see the construction rounding.
    """
    a = np.asarray(a, dtype=np.longdouble)
    mus = np.asarray(mus, dtype=np.longdouble)
    return np.array([(a * mus**l).sum() for l in range(length)],
                    dtype=np.longdouble)


def cauchy_binet_det(a, mus, m, start=0):
    """Brute-force subset expansion of the order-m Hankel determinant of a
    rank-structured moment sequence, with base offset ``start``."""
    a = np.asarray(a, dtype=np.longdouble)
    mus = np.asarray(mus, dtype=np.longdouble)
    total = np.longdouble(0.0)
    for subset in combinations(range(a.size), m):
        weight = np.longdouble(1.0)
        for s in subset:
            weight *= a[s] * mus[s] ** start
        vand = np.longdouble(1.0)
        for i, s in enumerate(subset):
            for t in subset[i + 1:]:
                vand *= (mus[s] - mus[t]) ** 2
        total += weight * vand
    return float(total)


def brute_cross_count(g, subset, v, v_prime, r, r_prime):
    """Count pairs by exhaustive enumeration over both shells."""
    from agnosbm import neighborhood_shells

    shell_a = set(int(x) for x in neighborhood_shells(g, v, r)[r])
    shell_b = set(int(x) for x in neighborhood_shells(g, v_prime, r_prime)[r_prime])
    edge_set = set()
    for u, w in subset.edges:
        edge_set.add((int(u), int(w)))
        edge_set.add((int(w), int(u)))
    return sum(1 for x in shell_a for y in shell_b if (x, y) in edge_set)


@pytest.fixture
def two_community_params():
    return SbmParams(p=np.array([0.5, 0.5]),
                     Q=np.array([[16.0, 4.0], [4.0, 16.0]]),
                     regime=Regime.CONSTANT)


@pytest.fixture
def two_community_log_params():
    return SbmParams(p=np.array([0.5, 0.5]),
                     Q=np.array([[16.0, 4.0], [4.0, 16.0]]),
                     regime=Regime.LOGARITHMIC)
