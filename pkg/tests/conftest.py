import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from timescales.timescale import TimeScale, canonicalize

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

GRID = 0.125  # dyadic step: every endpoint, gap and midpoint below is exact


@st.composite
def raw_scales(draw, max_segments=8, lo=-10.0, hi=10.0):
    """Arbitrary float segments (may overlap or touch) run through canonicalize."""
    n = draw(st.integers(1, max_segments))
    segs = []
    for _ in range(n):
        a = draw(st.floats(lo, hi, allow_nan=False))
        length = draw(st.one_of(st.just(0.0), st.floats(0.0, 3.0)))
        segs.append([a, min(a + length, hi)])
    return canonicalize(segs)


@st.composite
def grid_scales(draw, max_segments=6, span=32):
    """Scales with endpoints on the 1/8 grid, gaps and segment lengths >= 1/8.

    Used where a brute-force oracle walks a finer grid, and for numerics where
    clean spacing keeps difference quotients well conditioned.
    """
    k = draw(st.integers(1, max_segments))
    ticks = sorted(draw(st.sets(st.integers(-span, span), min_size=2 * k, max_size=2 * k)))
    segs = []
    for j in range(k):
        a, b = ticks[2 * j] * GRID, ticks[2 * j + 1] * GRID
        if draw(st.booleans()):
            b = a
        segs.append((a, b))
    return TimeScale(tuple(segs))


@st.composite
def discrete_scales(draw, min_points=2, max_points=12):
    n = draw(st.integers(min_points, max_points))
    ticks = sorted(draw(st.sets(st.integers(-40, 40), min_size=n, max_size=n)))
    return TimeScale(tuple((t * GRID, t * GRID) for t in ticks))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
