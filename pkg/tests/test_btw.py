import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sandpiles import (CapacityError, DomainError, addition_order, btw_add,
                       btw_inverse_add, btw_stabilize, btw_topple,
                       build_lattice, enumerate_recurrent,
                       is_allowed_bruteforce, is_recurrent_burning, is_stable,
                       max_stable, stabilize_many)
from oracles import lifo_stabilize, random_order_stabilize, stable_configurations


def total_outflow(lat, odometer):
    return int(np.dot(odometer, lat.boundary_degree))


def test_topple_moves_grains(path3):
    new, legal = btw_topple(path3, [2, 0, 0], 0)
    assert legal
    assert list(new) == [0, 1, 0]


def test_topple_illegal_without_force(path3):
    new, legal = btw_topple(path3, [1, 0, 0], 0)
    assert not legal
    assert list(new) == [1, 0, 0]


def test_topple_force_can_go_negative(path3):
    new, legal = btw_topple(path3, [1, 0, 0], 0, force=True)
    assert not legal
    assert list(new) == [-1, 1, 0]


def test_topple_interior_conserves_grains(path3):
    new, _ = btw_topple(path3, [0, 2, 0], 1)
    assert list(new) == [1, 0, 1]
    assert new.sum() == 2


def test_stable_predicates(path2):
    assert is_stable(path2, [1, 1])
    assert not is_stable(path2, [2, 0])
    assert list(max_stable(path2)) == [1, 1]
    assert list(max_stable(build_lattice([2, 2]))) == [3, 3, 3, 3]


def test_stabilize_already_stable_is_identity(path3):
    stable, od = btw_stabilize(path3, [1, 0, 1])
    assert list(stable) == [1, 0, 1]
    assert list(od) == [0, 0, 0]


def test_stabilize_cascade_frozen(path2):
    # (2,1): left topples to (0,2), right topples to (1,0).
    stable, od = btw_stabilize(path2, [2, 1])
    assert list(stable) == [1, 0]
    assert list(od) == [1, 1]


def test_stabilize_conserves_grains_up_to_outflow(grid33, rng):
    for _ in range(50):
        h = rng.integers(0, 12, size=9)
        stable, od = btw_stabilize(grid33, h)
        assert (stable >= 0).all() and (stable < 4).all()
        assert h.sum() == stable.sum() + total_outflow(grid33, od)


def test_stabilize_matches_random_order_oracle(grid33, rng):
    for _ in range(50):
        h = rng.integers(0, 10, size=9)
        ours, od_ours = btw_stabilize(grid33, h)
        ref, od_ref = random_order_stabilize(grid33, h, rng)
        assert np.array_equal(ours, ref)
        assert np.array_equal(od_ours, od_ref)


def test_stabilize_matches_lifo_oracle(path3, rng):
    for _ in range(100):
        h = rng.integers(0, 8, size=3)
        ours, od_ours = btw_stabilize(path3, h)
        ref, od_ref = lifo_stabilize(path3, h)
        assert np.array_equal(ours, ref)
        assert np.array_equal(od_ours, od_ref)


@given(heights=st.lists(st.integers(0, 15), min_size=4, max_size=4),
       seed=st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_stabilize_order_independent_property(heights, seed):
    lat = build_lattice([2, 2])
    ours, od_ours = btw_stabilize(lat, heights)
    ref, od_ref = random_order_stabilize(lat, heights, np.random.default_rng(seed))
    assert np.array_equal(ours, ref)
    assert np.array_equal(od_ours, od_ref)


def test_stabilize_many_matches_scalar(grid33, rng):
    batch = rng.integers(0, 10, size=(64, 9))
    work = batch.copy()
    od = stabilize_many(grid33, work)
    for row_in, row_out, row_od in zip(batch, work, od):
        ref, od_ref = btw_stabilize(grid33, row_in)
        assert np.array_equal(row_out, ref)
        assert np.array_equal(row_od, od_ref)


def test_stabilize_rejects_bad_input(path2):
    with pytest.raises(DomainError):
        btw_stabilize(path2, [1, -1])
    with pytest.raises(DomainError):
        btw_stabilize(path2, [1, 1, 1])
    with pytest.raises(DomainError):
        btw_stabilize(path2, [0.5, 0.5])


def test_add_examples_frozen(path2):
    # Addition orbit at the left site: (0,1) -> (1,1) -> (1,0) -> (0,1).
    assert list(btw_add(path2, [0, 1], 0)) == [1, 1]
    assert list(btw_add(path2, [1, 1], 0)) == [1, 0]
    assert list(btw_add(path2, [1, 0], 0)) == [0, 1]
    # five single additions at the left site walk (0,0) -> (1,0) -> (0,1)
    # -> (1,1) -> (1,0) -> (0,1)
    assert list(btw_add(path2, [0, 0], 0, amount=5)) == [0, 1]
    with pytest.raises(DomainError):
        btw_add(path2, [0, 0], 0, amount=-1)


def test_allowed_bruteforce_frozen_path2(path2):
    assert not is_allowed_bruteforce(path2, [0, 0])
    assert is_allowed_bruteforce(path2, [0, 1])
    assert is_allowed_bruteforce(path2, [1, 0])
    assert is_allowed_bruteforce(path2, [1, 1])


def test_allowed_bruteforce_frozen_path3(path3):
    allowed = {(1, 1, 1), (0, 1, 1), (1, 1, 0), (1, 0, 1)}
    for h in stable_configurations(path3):
        assert is_allowed_bruteforce(path3, list(h)) == (h in allowed)


def test_burning_matches_bruteforce_exhaustive():
    for dims in ([2], [3], [4], [2, 2]):
        lat = build_lattice(dims)
        for h in stable_configurations(lat):
            h = list(h)
            assert is_recurrent_burning(lat, h) == is_allowed_bruteforce(lat, h)


def test_burning_requires_stable(path2):
    with pytest.raises(DomainError):
        is_recurrent_burning(path2, [2, 0])


def test_bruteforce_capacity_cap():
    lat = build_lattice([25])
    with pytest.raises(CapacityError):
        is_allowed_bruteforce(lat, [1] * 25)


def test_enumerate_recurrent_frozen(path2):
    rec = enumerate_recurrent(path2)
    assert rec.tolist() == [[0, 1], [1, 0], [1, 1]]


def test_enumerate_recurrent_counts():
    # Path counts frozen from the determinant identity (n+1 for a path).
    for n in range(1, 7):
        assert len(enumerate_recurrent(build_lattice([n]))) == n + 1
    assert len(enumerate_recurrent(build_lattice([2, 2]))) == 192


def test_enumerate_recurrent_is_lexicographic(grid22):
    rec = enumerate_recurrent(grid22)
    as_tuples = [tuple(r) for r in rec]
    assert as_tuples == sorted(as_tuples)


def test_enumerate_capacity_cap():
    with pytest.raises(CapacityError):
        enumerate_recurrent(build_lattice([4, 4]))


def test_addition_order_frozen(path1, path2, path3):
    assert addition_order(path1, 0) == 2
    assert addition_order(path2, 0) == 3
    assert addition_order(path2, 1) == 3
    assert [addition_order(path3, x) for x in range(3)] == [4, 2, 4]


def test_addition_order_grid_frozen(grid22):
    rec = enumerate_recurrent(grid22)
    assert [addition_order(grid22, x, rec) for x in range(4)] == [24, 24, 24, 24]


def test_addition_power_order_is_identity(path3):
    rec = enumerate_recurrent(path3)
    for x in range(3):
        n = addition_order(path3, x, rec)
        for row in rec:
            assert list(btw_add(path3, row, x, amount=n)) == list(row)


def test_inverse_add_roundtrip(path2, path3, rng):
    for lat in (path2, path3):
        rec = enumerate_recurrent(lat)
        for _ in range(30):
            h = rec[rng.integers(len(rec))]
            x = int(rng.integers(lat.n_sites))
            assert np.array_equal(btw_inverse_add(lat, btw_add(lat, h, x), x), h)
            assert np.array_equal(btw_add(lat, btw_inverse_add(lat, h, x), x), h)


def test_inverse_add_power(path2):
    rec = enumerate_recurrent(path2)
    h = rec[0]
    one_by_one = btw_inverse_add(path2, btw_inverse_add(path2, h, 0), 0)
    assert np.array_equal(btw_inverse_add(path2, h, 0, power=2), one_by_one)


def test_inverse_add_rejects_transient(path2):
    with pytest.raises(DomainError):
        btw_inverse_add(path2, [0, 0], 0)
