import numpy as np
import pytest

from hintbandit.rng import RandomSource


def test_same_seed_and_stream_repeat():
    a = RandomSource(5, 2).standard_normal(100)
    b = RandomSource(5, 2).standard_normal(100)
    np.testing.assert_array_equal(a, b)


def test_children_differ_and_are_stable():
    root = RandomSource(5)
    x = root.child(1).standard_normal(1000)
    y = root.child(2).standard_normal(1000)
    assert not np.array_equal(x, y)
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.1
    # Drawing from the parent does not move a child.
    root.standard_normal(10)
    np.testing.assert_array_equal(root.child(1).standard_normal(1000), x)


def test_paths_are_distinct():
    root = RandomSource(0)
    assert root.child(1).child(2).path != root.child(2).child(1).path


def test_rejects_out_of_range():
    with pytest.raises(ValueError):
        RandomSource(-1)
    with pytest.raises(ValueError):
        RandomSource(0, 2**64)
