"""
Bounded time scales as finite unions of disjoint closed intervals.

A time scale is stored in canonical form: a sorted tuple of ``(lo, hi)``
segments with ``lo <= hi`` and a strict gap ``hi_i < lo_{i+1}`` between
neighbours.  Degenerate segments (``lo == hi``) are isolated points.  All set
operations work on the stored endpoints exactly; there is no tolerance
anywhere in this module.

    >>> T = canonicalize([[0, 1], [2, 2]])
    >>> T.sigma(1.0), T.mu(1.0)
    (2.0, 1.0)
    >>> T.kappa_upper().segments
    ((0.0, 1.0),)
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInput, NonFinite, PointNotInScale, ResultEmpty

DEFAULT_DENSITY = 9


@dataclass(frozen=True)
class PointClass:
    """Right/left classification of a point of a time scale."""

    right: str  # "right-dense" | "right-scattered"
    left: str  # "left-dense" | "left-scattered"

    @property
    def right_dense(self) -> bool:
        return self.right == "right-dense"

    @property
    def left_dense(self) -> bool:
        return self.left == "left-dense"

    def __str__(self):
        return f"{self.right}, {self.left}"


def _as_segment(item) -> tuple[float, float]:
    if isinstance(item, (int, float)) and not isinstance(item, bool):
        lo = hi = item
    else:
        try:
            lo, hi = item
        except (TypeError, ValueError):
            raise ValueError(f"not a closed interval: {item!r}") from None
    lo, hi = float(lo), float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise NonFinite(f"interval endpoints must be finite, got [{lo}, {hi}]")
    if lo > hi:
        raise ValueError(f"interval has lo > hi: [{lo}, {hi}]")
    # -0.0 would print as "-0" and break literal round trips
    return lo + 0.0, hi + 0.0


def canonicalize(raw_segments: Iterable) -> "TimeScale":
    """Merge, sort and deduplicate closed intervals into a :class:`TimeScale`.

    Overlapping and touching intervals are merged; single numbers are accepted
    as shorthand for a degenerate interval.
    """
    segs = sorted(_as_segment(s) for s in raw_segments)
    if not segs:
        raise EmptyInput("a time scale needs at least one interval")
    merged = [list(segs[0])]
    for lo, hi in segs[1:]:
        last = merged[-1]
        if lo <= last[1]:
            last[1] = max(last[1], hi)
        else:
            merged.append([lo, hi])
    return TimeScale(tuple((lo, hi) for lo, hi in merged))


def parse_scale_literal(text_or_obj) -> "TimeScale":
    """Parse the JSON literal format ``[[0,1],[2,2],3]`` into a time scale."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    if not isinstance(obj, list):
        raise ValueError("a time-scale literal must be a JSON array")
    return canonicalize(obj)


@dataclass(frozen=True)
class TimeScale:
    segments: tuple[tuple[float, float], ...]
    _los: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple((float(lo), float(hi)) for lo, hi in self.segments)
        if not segs:
            raise EmptyInput("a time scale needs at least one interval")
        for i, (lo, hi) in enumerate(segs):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise NonFinite(f"segment {i} has a non-finite endpoint")
            if lo > hi:
                raise ValueError(f"segment {i} has lo > hi")
            if i and not segs[i - 1][1] < lo:
                raise ValueError("segments must be sorted, disjoint and non-adjacent; "
                                 "use canonicalize() for raw input")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "_los", tuple(lo for lo, _ in segs))

    # -- basic queries -------------------------------------------------------

    @property
    def min(self) -> float:
        return self.segments[0][0]

    @property
    def max(self) -> float:
        return self.segments[-1][1]

    def __len__(self):
        return len(self.segments)

    @property
    def is_discrete(self) -> bool:
        return all(lo == hi for lo, hi in self.segments)

    @property
    def is_single_point(self) -> bool:
        return len(self.segments) == 1 and self.segments[0][0] == self.segments[0][1]

    def points(self) -> list[float]:
        """The points of a purely discrete scale, ascending."""
        if not self.is_discrete:
            raise ValueError("points() is only defined for purely discrete scales")
        return [lo for lo, _ in self.segments]

    def segment_index(self, t: float) -> int:
        """Index of the segment containing ``t``; raises if ``t`` is not in the scale."""
        i = bisect_right(self._los, t) - 1
        if i < 0 or t > self.segments[i][1]:
            raise PointNotInScale(t)
        return i

    def contains(self, t: float) -> bool:
        i = bisect_right(self._los, t) - 1
        return i >= 0 and t <= self.segments[i][1]

    __contains__ = contains

    # -- jump operators ------------------------------------------------------

    def sigma(self, t: float) -> float:
        """Forward jump ``inf{s in T : s > t}``, with ``sigma(max) = max``."""
        i = self.segment_index(t)
        if t < self.segments[i][1]:
            return float(t)
        if i + 1 < len(self.segments):
            return self.segments[i + 1][0]
        return float(t)

    def rho(self, t: float) -> float:
        """Backward jump ``sup{s in T : s < t}``, with ``rho(min) = min``."""
        i = self.segment_index(t)
        if t > self.segments[i][0]:
            return float(t)
        if i > 0:
            return self.segments[i - 1][1]
        return float(t)

    def mu(self, t: float) -> float:
        return self.sigma(t) - t

    def nu(self, t: float) -> float:
        return t - self.rho(t)

    def classify(self, t: float) -> PointClass:
        right = "right-scattered" if self.mu(t) > 0 else "right-dense"
        left = "left-scattered" if self.nu(t) > 0 else "left-dense"
        return PointClass(right, left)

    # -- truncated sets ------------------------------------------------------

    def kappa_upper(self) -> "TimeScale":
        """``T`` minus ``(rho(max), max]``; drops a left-scattered maximum."""
        if self.is_single_point:
            raise ResultEmpty("kappa truncation of a single-point scale is empty")
        lo, hi = self.segments[-1]
        if lo == hi:
            return TimeScale(self.segments[:-1])
        return self

    def kappa_lower(self) -> "TimeScale":
        """``T`` minus ``[min, sigma(min))``; drops a right-scattered minimum."""
        if self.is_single_point:
            raise ResultEmpty("kappa truncation of a single-point scale is empty")
        lo, hi = self.segments[0]
        if lo == hi:
            return TimeScale(self.segments[1:])
        return self

    def in_kappa_upper(self, t: float) -> bool:
        if not self.contains(t) or self.is_single_point:
            return False
        lo, hi = self.segments[-1]
        return not (lo == hi and t == hi)

    def in_kappa_lower(self, t: float) -> bool:
        if not self.contains(t) or self.is_single_point:
            return False
        lo, hi = self.segments[0]
        return not (lo == hi and t == lo)

    def restrict(self, a: float, b: float) -> "TimeScale":
        """The time scale ``[a, b] ∩ T``."""
        if a > b:
            raise ValueError(f"empty window [{a}, {b}]")
        segs = [(max(lo, a), min(hi, b)) for lo, hi in self.segments if hi >= a and lo <= b]
        if not segs:
            raise ResultEmpty(f"[{a}, {b}] does not meet the time scale")
        return TimeScale(tuple(segs))

    # -- sampling ------------------------------------------------------------

    def sample_points(self, n_per_segment: int = DEFAULT_DENSITY) -> list[float]:
        """Segment endpoints plus ``n_per_segment - 2`` equally spaced interior points.

        Isolated points contribute themselves.  The result is sorted and
        free of duplicates; every returned value is a member of the scale.
        """
        if n_per_segment < 1:
            raise ValueError("n_per_segment must be positive")
        out = []
        for lo, hi in self.segments:
            if lo == hi:
                out.append(lo)
                continue
            out.append(lo)
            if n_per_segment > 2:
                inner = np.linspace(lo, hi, n_per_segment)[1:-1]
                out.extend(float(x) for x in np.clip(inner, lo, hi))
            out.append(hi)
        return sorted(set(out))

    # -- literal format ------------------------------------------------------

    def to_literal(self) -> list[list[float]]:
        return [[lo, hi] for lo, hi in self.segments]

    def __str__(self):
        return json.dumps(self.to_literal())


def cantor_scale(level: int, lo: float = 0.0, hi: float = 1.0) -> TimeScale:
    """Level-``k`` approximation of the Cantor set on ``[lo, hi]`` (``2**k`` segments)."""
    if level < 0:
        raise ValueError("level must be nonnegative")
    segs = [(lo, hi)]
    for _ in range(level):
        nxt = []
        for a, b in segs:
            third = (b - a) / 3.0
            nxt.append((a, a + third))
            nxt.append((b - third, b))
        segs = nxt
    return TimeScale(tuple(segs))


def random_scale(rng: np.random.Generator, *, max_segments: int = 8,
                 window: Sequence[float] = (-10.0, 10.0), p_point: float = 0.3,
                 min_gap: float = 0.0) -> TimeScale:
    """Draw a random canonical scale with 1 to ``max_segments`` segments.

    Each segment is degenerate with probability ``p_point``.  With
    ``min_gap > 0`` every gap and every non-degenerate segment is at least
    that long (draws are rejected until this holds).
    """
    lo_w, hi_w = window
    while True:
        k = int(rng.integers(1, max_segments + 1))
        ends = np.sort(rng.uniform(lo_w, hi_w, size=2 * k))
        segs = []
        for j in range(k):
            a, b = float(ends[2 * j]), float(ends[2 * j + 1])
            if rng.random() < p_point:
                b = a
            segs.append((a, b))
        if min_gap > 0:
            lengths = [b - a for a, b in segs if b > a]
            gaps = [segs[j + 1][0] - segs[j][1] for j in range(k - 1)]
            if any(g < min_gap for g in gaps) or any(d < min_gap for d in lengths):
                continue
        try:
            return TimeScale(tuple(segs))
        except ValueError:
            continue


def random_discrete_scale(rng: np.random.Generator, n_points: int, *,
                          window: Sequence[float] = (-5.0, 5.0),
                          min_gap: float = 0.01) -> TimeScale:
    """Random purely discrete scale with ``n_points`` points at least ``min_gap`` apart."""
    lo_w, hi_w = window
    while True:
        pts = np.sort(rng.uniform(lo_w, hi_w, size=n_points))
        if n_points < 2 or np.min(np.diff(pts)) >= min_gap:
            return TimeScale(tuple((float(p), float(p)) for p in pts))
