import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GRID, grid_scales, raw_scales
from timescales.errors import EmptyInput, NonFinite, PointNotInScale, ResultEmpty
from timescales.timescale import (
    TimeScale,
    canonicalize,
    cantor_scale,
    parse_scale_literal,
    random_scale,
)


def segs(T):
    return [list(s) for s in T.segments]


# -- brute-force oracles ------------------------------------------------------

FINE = GRID / 8


def member(T, x):
    return any(lo <= x <= hi for lo, hi in T.segments)


def grid_members(T):
    """All multiples of FINE inside T; exact because endpoints sit on the 1/8 grid."""
    lo, hi = T.min, T.max
    ks = range(int(round(lo / FINE)), int(round(hi / FINE)) + 1)
    return [k * FINE for k in ks if member(T, k * FINE)]


def oracle_next(members, t):
    later = [x for x in members if x > t]
    return min(later) if later else None


def oracle_prev(members, t):
    earlier = [x for x in members if x < t]
    return max(earlier) if earlier else None


# -- canonicalize ------------------------------------------------------------


@pytest.mark.parametrize("raw, expected", [
    ([[0, 1], [1, 2]], [[0, 2]]),
    ([[3, 3], [0, 1]], [[0, 1], [3, 3]]),
    ([[0, 1], [0.5, 2], [5, 5]], [[0, 2], [5, 5]]),
    ([2, [0, 1], 2], [[0, 1], [2, 2]]),
])
def test_canonicalize_examples(raw, expected):
    assert segs(canonicalize(raw)) == expected


def test_canonicalize_errors():
    with pytest.raises(EmptyInput):
        canonicalize([])
    with pytest.raises(NonFinite):
        canonicalize([[0, float("inf")]])
    with pytest.raises(NonFinite):
        canonicalize([[float("nan"), 1]])
    with pytest.raises(ValueError):
        canonicalize([[2, 1]])


def test_constructor_rejects_non_canonical():
    with pytest.raises(ValueError):
        TimeScale(((0.0, 1.0), (1.0, 2.0)))
    with pytest.raises(ValueError):
        TimeScale(((2.0, 3.0), (0.0, 1.0)))


def test_literal_parsing():
    T = parse_scale_literal("[[0,1],[2,2],3]")
    assert segs(T) == [[0, 1], [2, 2], [3, 3]]
    assert parse_scale_literal(str(T)) == T
    with pytest.raises(ValueError):
        parse_scale_literal('{"a": 1}')


@given(raw_scales())
def test_canonicalize_idempotent(T):
    assert canonicalize(T.segments) == T
    for (_, hi), (lo, _) in zip(T.segments, T.segments[1:]):
        assert hi < lo


# -- jumps, graininess, classification ---------------------------------------


def test_sigma_rho_examples():
    A = canonicalize([[0, 1], [2, 3]])
    assert A.sigma(1) == 2 and A.rho(2) == 1
    U = canonicalize([[0, 1]])
    assert U.sigma(0.5) == 0.5 and U.rho(0) == 0
    D = canonicalize([0, 1, 2])
    assert D.sigma(1) == 2 and D.rho(1) == 0
    assert D.sigma(2) == 2 and D.rho(0) == 0  # boundary conventions


def test_mu_nu_examples():
    assert canonicalize([[0, 1], [2, 3]]).mu(1) == 1
    U = canonicalize([[0, 1]])
    assert U.mu(0.5) == 0 and U.nu(0.5) == 0
    T = canonicalize([0, 0.25, 1])
    assert T.mu(0.25) == 0.75 and T.nu(0.25) == 0.25


def test_classify_examples():
    assert str(canonicalize([[0, 1], [2, 3]]).classify(1)) == "right-scattered, left-dense"
    assert str(canonicalize([[0, 1]]).classify(0.5)) == "right-dense, left-dense"
    c = canonicalize([0, 1]).classify(1)
    assert c.right_dense and not c.left_dense


def test_point_not_in_scale():
    T = canonicalize([[0, 1], [2, 3]])
    for op in (T.sigma, T.rho, T.mu, T.nu, T.classify, T.segment_index):
        with pytest.raises(PointNotInScale):
            op(1.5)


@given(grid_scales())
def test_jumps_match_grid_oracle(T):
    members = grid_members(T)
    for t in members[::7] + [T.max]:
        nxt, prv = oracle_next(members, t), oracle_prev(members, t)
        if nxt is None:
            assert T.sigma(t) == t
        elif nxt == t + FINE and T.segments[T.segment_index(t)][1] > t:
            assert T.sigma(t) == t
        else:
            assert T.sigma(t) == nxt
        if prv is None:
            assert T.rho(t) == t
        elif prv == t - FINE and T.segments[T.segment_index(t)][0] < t:
            assert T.rho(t) == t
        else:
            assert T.rho(t) == prv


@given(grid_scales())
def test_right_scattered_iff_inner_right_endpoint(T):
    ends = {hi for _, hi in T.segments[:-1]}
    for t in grid_members(T):
        if t < T.max:
            assert (T.sigma(t) > t) == (t in ends)


@given(raw_scales())
def test_closure_and_ordering(T):
    for t in T.sample_points():
        s, r = T.sigma(t), T.rho(t)
        assert T.contains(s) and T.contains(r)
        assert r <= t <= s
        assert T.rho(s) <= s
        assert T.mu(t) == s - t >= 0 and T.nu(t) == t - r >= 0


def test_classify_agrees_with_graininess_on_random_scales():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        T = random_scale(rng)
        for t in T.sample_points():
            c = T.classify(t)
            assert c.right_dense == (T.mu(t) == 0)
            assert c.left_dense == (T.nu(t) == 0)


# -- truncations -------------------------------------------------------------


def test_kappa_examples():
    assert segs(canonicalize([[0, 1], 2]).kappa_upper()) == [[0, 1]]
    U = canonicalize([[0, 1]])
    assert U.kappa_upper() == U and U.kappa_lower() == U
    assert segs(canonicalize([0, 1, 2]).kappa_lower()) == [[1, 1], [2, 2]]
    with pytest.raises(ResultEmpty):
        canonicalize([3]).kappa_upper()
    with pytest.raises(ResultEmpty):
        canonicalize([3]).kappa_lower()


@given(grid_scales(), st.data())
def test_window_kappa_is_a_to_rho_b(T, data):
    pts = T.sample_points()
    a = data.draw(st.sampled_from(pts))
    b = data.draw(st.sampled_from([p for p in pts if p >= a]))
    W = T.restrict(a, b)
    if W.is_single_point:
        return
    assert W.kappa_upper() == T.restrict(a, T.rho(b))
    assert W.kappa_lower() == T.restrict(T.sigma(a), b)


@given(raw_scales())
def test_kappa_membership_agrees_with_sets(T):
    if T.is_single_point:
        return
    up, low = T.kappa_upper(), T.kappa_lower()
    for t in T.sample_points():
        assert T.in_kappa_upper(t) == up.contains(t)
        assert T.in_kappa_lower(t) == low.contains(t)


# -- sampling and membership ---------------------------------------------------


def test_contains_and_sampling_examples():
    assert canonicalize([[0, 1]]).contains(0.5)
    assert not canonicalize([[0, 1], [2, 3]]).contains(1.5)
    assert canonicalize([[0, 1], 2]).sample_points(3) == [0, 0.5, 1, 2]
    with pytest.raises(ValueError):
        canonicalize([[0, 1]]).sample_points(0)


@given(raw_scales(), st.integers(1, 12))
def test_sample_points_are_members(T, n):
    pts = T.sample_points(n)
    assert pts == sorted(set(pts))
    assert all(T.contains(p) for p in pts)
    for lo, hi in T.segments:
        assert lo in pts and hi in pts


def test_cantor_scale():
    C = cantor_scale(3)
    assert len(C) == 8
    assert C.min == 0 and C.max == 1
    assert C.segments[0] == (0.0, 1 / 27)


def test_random_scale_min_gap():
    rng = np.random.default_rng(3)
    for _ in range(50):
        T = random_scale(rng, window=(-3, 3), min_gap=0.05)
        for (a, b), (c, _) in zip(T.segments, T.segments[1:]):
            assert c - b >= 0.05
        assert all(hi - lo >= 0.05 or hi == lo for lo, hi in T.segments)
