"""Assignment-based Wasserstein solver against brute-force permutation oracles."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnngp.transport import (
    MAX_CLOUD_SIZE,
    SampleSet,
    bootstrap_w1_stderr,
    w1_exact,
    w1_gaussian_1d,
    w1_truncated,
)

RNG = np.random.default_rng(55)


def brute_force_w1(a, b, s=None):
    size = a.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(size)):
        dists = np.linalg.norm(a - b[list(perm)], axis=1)
        if s is not None:
            dists = np.minimum(dists, s)
        best = min(best, float(dists.mean()))
    return best


def test_identical_clouds_zero():
    pts = RNG.normal(size=(8, 3))
    assert w1_exact(pts, pts) == pytest.approx(0.0, abs=1e-14)


def test_singletons():
    assert w1_exact([[0.0]], [[3.0]]) == pytest.approx(3.0)
    assert w1_truncated([[0.0]], [[3.0]], 1.0) == pytest.approx(1.0)


def test_matches_brute_force():
    for trial in range(50):
        size = 5 if trial % 2 == 0 else 6
        a = RNG.normal(size=(size, 2))
        b = RNG.normal(size=(size, 2))
        assert w1_exact(a, b) == pytest.approx(brute_force_w1(a, b), abs=1e-10)


def test_sorted_route_matches_assignment_in_1d():
    for _ in range(20):
        size = int(RNG.integers(2, 7))
        a = RNG.normal(size=(size, 1))
        b = RNG.normal(size=(size, 1))
        assert w1_exact(a, b) == pytest.approx(brute_force_w1(a, b), abs=1e-12)


def test_truncated_matches_brute_force():
    for trial in range(50):
        size = 5 if trial % 2 == 0 else 6
        a = RNG.normal(size=(size, 2))
        b = RNG.normal(size=(size, 2))
        dists = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
        s = float(np.median(dists))
        assert w1_truncated(a, b, s) == pytest.approx(brute_force_w1(a, b, s), abs=1e-10)


def test_truncation_monotone_and_dominated():
    a = RNG.normal(size=(7, 2))
    b = RNG.normal(size=(7, 2))
    full = w1_exact(a, b)
    levels = [0.1, 0.5, 1.0, 2.0, 50.0]
    values = [w1_truncated(a, b, s) for s in levels]
    for low, high in zip(values, values[1:]):
        assert low <= high + 1e-12
    assert all(v <= full + 1e-12 for v in values)
    assert values[-1] == pytest.approx(full, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=5
    ),
    st.lists(
        st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=5
    ),
    st.lists(
        st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=5
    ),
)
def test_metric_axioms(a_pts, b_pts, c_pts):
    size = min(len(a_pts), len(b_pts), len(c_pts))
    a = np.array(a_pts[:size])
    b = np.array(b_pts[:size])
    c = np.array(c_pts[:size])
    d_ab = w1_exact(a, b)
    assert d_ab >= 0.0
    assert d_ab == pytest.approx(w1_exact(b, a), abs=1e-10)
    assert w1_exact(a, a) == pytest.approx(0.0, abs=1e-12)
    assert d_ab <= w1_exact(a, c) + w1_exact(c, b) + 1e-10


def test_translation_equivariance_1d():
    a = np.sort(RNG.normal(size=(9, 1)), axis=0)
    shift = 0.7
    assert w1_exact(a, a + shift) == pytest.approx(shift, abs=1e-12)
    b = RNG.normal(size=(9, 1))
    base = w1_exact(a, b)
    shifted = w1_exact(a, b + shift)
    assert abs(shifted - base) <= shift + 1e-12


def test_shape_errors_and_cap():
    with pytest.raises(ValueError):
        w1_exact(np.zeros((3, 2)), np.zeros((4, 2)))
    with pytest.raises(ValueError):
        w1_exact(np.zeros((3, 2)), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        w1_truncated(np.zeros((2, 1)), np.ones((2, 1)), 0.0)
    with pytest.raises(ValueError):
        w1_exact(np.zeros((MAX_CLOUD_SIZE + 1, 2)), np.zeros((MAX_CLOUD_SIZE + 1, 2)))
    with pytest.raises(ValueError):
        SampleSet(points=np.array([[np.inf]]))


def test_gaussian_1d_closed_form():
    assert w1_gaussian_1d(0.0, 1.0, 0.0, 1.0) == 0.0
    assert w1_gaussian_1d(0.0, 1.0, 2.0, 1.0) == 2.0
    with pytest.raises(ValueError):
        w1_gaussian_1d(0.0, -1.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        w1_gaussian_1d(0.0, 1.0, 0.0, 2.0)


def test_sampled_estimate_near_closed_form():
    rng = np.random.default_rng(7)
    size = 10_000
    a = rng.normal(0.0, 1.0, size=(size, 1))
    b = rng.normal(2.0, 1.0, size=(size, 1))
    est = w1_exact(a, b)
    assert abs(est - w1_gaussian_1d(0.0, 1.0, 2.0, 1.0)) <= 0.05


def test_csv_round_trip(tmp_path):
    cloud = SampleSet(points=RNG.normal(size=(6, 3)))
    path = tmp_path / "cloud.csv"
    cloud.to_csv(path)
    clone = SampleSet.from_csv(path)
    assert np.array_equal(clone.points, cloud.points)


def test_bootstrap_stderr_positive_and_deterministic():
    a = RNG.normal(size=(40, 2))
    b = RNG.normal(size=(40, 2))
    s1 = bootstrap_w1_stderr(a, b, 50, 3)
    s2 = bootstrap_w1_stderr(a, b, 50, 3)
    assert s1 == s2 > 0.0
