"""Classical integer sandpile on a finite lattice with open boundary.

Heights are nonnegative int64 arrays in the lattice's site order. A site
holding at least 2d grains is unstable and may topple: it sheds 2d grains,
each in-set neighbour gains one, and grains on boundary bonds leave the
system. Stabilization topples until every site is stable; the result and
the per-site toppling counts (odometer) do not depend on the order in
which legal topplings are performed.
"""

from collections import deque
import itertools
import math

import numpy as np

from .errors import CapacityError, DomainError

BRUTEFORCE_MAX_SITES = 24
ENUMERATION_CAP = 1_000_000


def _as_heights(lat, heights):
    h = np.asarray(heights)
    if h.shape != (lat.n_sites,):
        raise DomainError(f"heights must have shape ({lat.n_sites},), got {h.shape}")
    if not np.issubdtype(h.dtype, np.integer):
        raise DomainError("integer sandpile heights must be an integer array")
    if (h < 0).any():
        raise DomainError("heights must be nonnegative")
    return h.astype(np.int64)


def is_stable(lat, heights):
    """True iff every site holds fewer than 2d grains."""
    return bool((_as_heights(lat, heights) < lat.threshold).all())


def max_stable(lat):
    """The maximal stable configuration: 2d - 1 grains everywhere."""
    return np.full(lat.n_sites, lat.threshold - 1, dtype=np.int64)


def btw_topple(lat, heights, x, force=False):
    """Topple site x once.

    Returns (new_heights, legal). The toppling is legal iff x is unstable;
    when it is not and force is False the configuration is returned
    unchanged. With force=True the toppling is applied anyway and the
    height at x may go negative.
    """
    h = _as_heights(lat, heights)
    legal = bool(h[x] >= lat.threshold)
    new = h.copy()
    if legal or force:
        new[x] -= lat.threshold
        new[lat.adjacency[x]] += 1
    return new, legal


def stabilize_from(lat, heights, seeds, odometer=None):
    """In-place FIFO stabilization seeded from candidate sites `seeds`.

    Mutates `heights` (int64 array); only sites reachable from unstable
    seeds are touched, so a single addition stabilizes in time local to
    the avalanche. Returns the odometer (allocated if not given).
    """
    two_d = lat.threshold
    od = odometer if odometer is not None else np.zeros(lat.n_sites, dtype=np.int64)
    queued = np.zeros(lat.n_sites, dtype=bool)
    queue = deque()
    for i in seeds:
        i = int(i)
        if heights[i] >= two_d and not queued[i]:
            queued[i] = True
            queue.append(i)
    while queue:
        x = queue.popleft()
        queued[x] = False
        k = heights[x] // two_d
        if k <= 0:
            continue
        heights[x] -= k * two_d
        od[x] += k
        for y in lat.adjacency[x]:
            heights[y] += k
            if heights[y] >= two_d and not queued[y]:
                queued[y] = True
                queue.append(int(y))
    return od


def btw_stabilize(lat, heights):
    """Topple until stable; returns (stable_heights, odometer).

    Order-independent by abelianness; this implementation drains a FIFO
    queue and topples each popped site floor(h/2d) times at once.
    """
    h = _as_heights(lat, heights).copy()
    od = stabilize_from(lat, h, range(lat.n_sites))
    return h, od


def stabilize_many(lat, quanta):
    """Stabilize many configurations at once; rows of `quanta` are replicas.

    Mutates `quanta` in place and returns the odometer matrix. Each round
    topples every unstable site of every replica floor(h/2d) times, which
    is a legal parallel schedule, so the fixed point matches the scalar
    stabilizer exactly.
    """
    two_d = lat.threshold
    amat = lat.adjacency_matrix
    od = np.zeros_like(quanta)
    while True:
        k = quanta // two_d
        if not k.any():
            return od
        quanta -= k * two_d
        quanta += k @ amat
        od += k


def btw_add(lat, heights, x, amount=1):
    """Drop `amount` grains on site x and stabilize."""
    if amount < 0:
        raise DomainError("cannot add a negative number of grains")
    h = _as_heights(lat, heights).copy()
    h[x] += amount
    stable, _ = btw_stabilize(lat, h)
    return stable


def is_allowed_bruteforce(lat, heights):
    """Decide allowedness by scanning every nonempty subset of sites.

    A subset W is forbidden when every x in W has fewer grains than
    neighbours inside W; the configuration is allowed iff no subset is
    forbidden. Exponential in the number of sites, capped accordingly.
    """
    m = lat.n_sites
    if m > BRUTEFORCE_MAX_SITES:
        raise CapacityError(
            f"subset scan is 2^{m}; refusing beyond {BRUTEFORCE_MAX_SITES} sites")
    h = [int(v) for v in _as_heights(lat, heights)]
    masks = [int(sum(1 << int(y) for y in lat.adjacency[x])) for x in range(m)]
    for w in range(1, 1 << m):
        ww = w
        forbidden = True
        while ww:
            x = (ww & -ww).bit_length() - 1
            ww &= ww - 1
            if h[x] >= (masks[x] & w).bit_count():
                forbidden = False
                break
        if forbidden:
            return False
    return True


def _burns_completely(h, adj):
    """Burning pass on height tuple h given adjacency lists `adj`."""
    m = len(h)
    deg = [len(a) for a in adj]
    alive = [True] * m
    n_alive = m
    changed = True
    while changed and n_alive:
        changed = False
        for x in range(m):
            if alive[x] and h[x] >= deg[x]:
                alive[x] = False
                n_alive -= 1
                changed = True
                for y in adj[x]:
                    deg[y] -= 1
    return n_alive == 0


def is_recurrent_burning(lat, heights):
    """Burning test: repeatedly remove sites whose height is at least the
    number of still-present in-set neighbours. Recurrent iff everything
    burns. Input must be stable."""
    h = _as_heights(lat, heights)
    if (h >= lat.threshold).any():
        raise DomainError("burning test requires a stable configuration")
    adj = [tuple(int(y) for y in a) for a in lat.adjacency]
    return _burns_completely(tuple(int(v) for v in h), adj)


def enumerate_recurrent(lat, cap=ENUMERATION_CAP):
    """All recurrent stable configurations, in lexicographic order.

    Returns an int64 array of shape (count, n_sites). The scan covers all
    (2d)^n_sites stable configurations, so it is capped.
    """
    two_d = lat.threshold
    total = two_d ** lat.n_sites
    if total > cap:
        raise CapacityError(
            f"{total} stable configurations exceeds the enumeration cap {cap}")
    adj = [tuple(int(y) for y in a) for a in lat.adjacency]
    rows = [h for h in itertools.product(range(two_d), repeat=lat.n_sites)
            if _burns_completely(h, adj)]
    return np.array(rows, dtype=np.int64).reshape(len(rows), lat.n_sites)


def addition_order(lat, x, recurrent=None):
    """Order of grain addition at x acting on the recurrent set.

    Addition-and-stabilize permutes the recurrent configurations; the
    order returned is the lcm of its cycle lengths, i.e. the least n with
    a_x^n = identity on every recurrent configuration.
    """
    if recurrent is None:
        recurrent = enumerate_recurrent(lat)
    index = {tuple(int(v) for v in row): i for i, row in enumerate(recurrent)}
    n = len(index)
    perm = [0] * n
    for i, row in enumerate(recurrent):
        img = tuple(int(v) for v in btw_add(lat, row, x))
        j = index.get(img)
        assert j is not None, "recurrent set is not closed under addition"
        perm[i] = j
    assert len(set(perm)) == n, "addition is not a bijection on the recurrent set"
    seen = [False] * n
    order = 1
    for i in range(n):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        order = math.lcm(order, length)
    return order


def btw_inverse_add(lat, heights, x, power=1, order=None, recurrent=None):
    """Undo `power` grain additions at x on a recurrent configuration.

    Realized as a forward power: a_x^-1 = a_x^(n-1) where n is the
    addition order at x, so the inverse of `power` additions is
    (-power) mod n further additions. Pass `order` (and optionally the
    enumerated `recurrent` set) to skip recomputing it.
    """
    h = _as_heights(lat, heights)
    if not is_recurrent_burning(lat, h):
        raise DomainError("inverse addition is defined only on recurrent configurations")
    if order is None:
        order = addition_order(lat, x, recurrent)
    k = (-int(power)) % order
    return btw_add(lat, h, x, amount=k)
