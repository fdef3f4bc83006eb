"""Independent reference implementations used only by the tests.

Everything here is deliberately written the slow, obvious way, sharing no
code with the package internals: single legal topplings in randomized or
stack order, dense real-height dynamics without the quanta/frac split,
and a cofactor-expansion determinant. Test expectations computed from
these are frozen in the test modules.
"""

from fractions import Fraction

import numpy as np


def unstable_sites(heights, threshold):
    return [i for i, h in enumerate(heights) if h >= threshold]


def random_order_stabilize(lat, heights, rng):
    """Stabilize by repeatedly toppling one random unstable site once."""
    h = np.array(heights, dtype=np.int64)
    od = np.zeros(lat.n_sites, dtype=np.int64)
    two_d = 2 * lat.d
    while True:
        unstable = unstable_sites(h, two_d)
        if not unstable:
            return h, od
        x = unstable[rng.integers(len(unstable))]
        h[x] -= two_d
        for y in lat.adjacency[x]:
            h[y] += 1
        od[x] += 1


def lifo_stabilize(lat, heights):
    """Stabilize with a last-in-first-out schedule of single topplings."""
    h = np.array(heights, dtype=np.int64)
    od = np.zeros(lat.n_sites, dtype=np.int64)
    two_d = 2 * lat.d
    stack = unstable_sites(h, two_d)
    while stack:
        x = stack.pop()
        while h[x] >= two_d:
            h[x] -= two_d
            od[x] += 1
            for y in lat.adjacency[x]:
                h[y] += 1
                if h[y] >= two_d:
                    stack.append(int(y))
    return h, od


def dense_stabilize(lat, heights, rng):
    """Continuous-model stabilization on raw real heights.

    Topples one random site with mass >= 1 at a time: the site loses
    exactly 1, each in-set neighbour gains 1/2d. No decomposition, no
    integer arithmetic; float drift is the caller's concern.
    """
    h = np.array(heights, dtype=np.float64)
    od = np.zeros(lat.n_sites, dtype=np.int64)
    share = 1.0 / (2 * lat.d)
    while True:
        unstable = [i for i, v in enumerate(h) if v >= 1.0 - 1e-12]
        if not unstable:
            return h, od
        x = unstable[rng.integers(len(unstable))]
        h[x] -= 1.0
        for y in lat.adjacency[x]:
            h[y] += share
        od[x] += 1


def dense_add(lat, heights, x, u, rng):
    """Continuous-model addition on raw real heights: add u, stabilize."""
    h = np.array(heights, dtype=np.float64)
    h[x] += u
    return dense_stabilize(lat, h, rng)


def cofactor_determinant(entries):
    """Exact determinant by first-row cofactor expansion (n <= 8 or so)."""
    n = len(entries)
    rows = [[Fraction(v) for v in row] for row in entries]

    def det(rs):
        k = len(rs)
        if k == 0:
            return Fraction(1)
        if k == 1:
            return rs[0][0]
        total = Fraction(0)
        for j in range(k):
            if rs[0][j] == 0:
                continue
            minor = [[row[c] for c in range(k) if c != j] for row in rs[1:]]
            sign = -1 if j % 2 else 1
            total += sign * rs[0][j] * det(minor)
        return total

    return det(rows)


def stable_configurations(lat):
    """All integer-stable configurations, lexicographic."""
    import itertools
    two_d = 2 * lat.d
    return itertools.product(range(two_d), repeat=lat.n_sites)
