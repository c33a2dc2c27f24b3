"""Finite unions of points, closed intervals and one half-line."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional


@dataclass(frozen=True)
class SpectrumSet:
    """A closed subset of the real line bounded below.

    ``points`` are isolated reals, ``intervals`` closed bounded intervals and
    ``tail`` (when not ``None``) the start ``t`` of the half-line ``[t, inf)``.
    Instances built through :meth:`build` are normalised: components are
    disjoint, sorted, and no point lies inside an interval or the tail.
    """

    points: tuple[float, ...] = ()
    intervals: tuple[tuple[float, float], ...] = ()
    tail: Optional[float] = None
    notes: tuple[str, ...] = field(default=(), compare=False)

    @classmethod
    def build(cls, points: Iterable[float] = (), intervals: Iterable[tuple[float, float]] = (),
              tail: Optional[float] = None, notes: Iterable[str] = ()) -> "SpectrumSet":
        return normalize(points, intervals, tail, notes)

    @classmethod
    def empty(cls) -> "SpectrumSet":
        return cls()

    def is_empty(self) -> bool:
        return not self.points and not self.intervals and self.tail is None

    def minimum(self) -> float:
        if self.is_empty():
            raise ValueError("empty set has no minimum")
        cands = list(self.points) + [a for a, _ in self.intervals]
        if self.tail is not None:
            cands.append(self.tail)
        return min(cands)

    def contains(self, x: float) -> bool:
        return self.distance(x) == 0.0

    def distance(self, x: float) -> float:
        """inf over the set of |x - y|; ``inf`` for the empty set."""
        d = math.inf
        for p in self.points:
            d = min(d, abs(x - p))
        for a, b in self.intervals:
            if a <= x <= b:
                return 0.0
            d = min(d, a - x if x < a else x - b)
        if self.tail is not None:
            if x >= self.tail:
                return 0.0
            d = min(d, self.tail - x)
        return d

    def components(self):
        """Yield ``(kind, lo, hi)`` in ascending order; ``hi`` is inf for the tail."""
        items = [("point", p, p) for p in self.points]
        items += [("interval", a, b) for a, b in self.intervals]
        if self.tail is not None:
            items.append(("tail", self.tail, math.inf))
        return sorted(items, key=lambda c: c[1])

    def to_dict(self) -> dict:
        return {
            "points": [float(p) for p in self.points],
            "intervals": [[float(a), float(b)] for a, b in self.intervals],
            "tail": None if self.tail is None else float(self.tail),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpectrumSet":
        return normalize(data.get("points", ()), [tuple(iv) for iv in data.get("intervals", ())],
                         data.get("tail"))

    def __add__(self, other: "SpectrumSet") -> "SpectrumSet":
        return minkowski_sum(self, other)


def normalize(points: Iterable[float] = (), intervals: Iterable[tuple[float, float]] = (),
              tail: Optional[float] = None, notes: Iterable[str] = ()) -> SpectrumSet:
    pts = []
    ivs = []
    for p in points:
        p = float(p)
        if not math.isfinite(p):
            raise ValueError(f"non-finite point {p}")
        pts.append(p)
    for a, b in intervals:
        a, b = float(a), float(b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("interval ends must be finite; use the tail for [t, inf)")
        if b < a:
            raise ValueError(f"empty interval [{a}, {b}]")
        if a == b:
            pts.append(a)
        else:
            ivs.append((a, b))
    if tail is not None:
        tail = float(tail)
        if not math.isfinite(tail):
            raise ValueError("tail start must be finite")

    ivs.sort()
    merged: list[list[float]] = []
    for a, b in ivs:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])

    if tail is not None:
        while merged and merged[-1][1] >= tail:
            tail = min(tail, merged.pop()[0])

    kept_pts = []
    for p in sorted(set(pts)):
        if tail is not None and p >= tail:
            continue
        if any(a <= p <= b for a, b in merged):
            continue
        kept_pts.append(p)
    # a point sitting exactly at the start of the tail merges into it
    return SpectrumSet(tuple(kept_pts), tuple((a, b) for a, b in merged), tail, tuple(notes))


def minkowski_sum(a: SpectrumSet, b: SpectrumSet) -> SpectrumSet:
    """``{x + y : x in a, y in b}`` under the finite representation."""
    if a.is_empty() or b.is_empty():
        return SpectrumSet()
    points = [p + q for p in a.points for q in b.points]
    intervals = []
    for p in a.points:
        intervals += [(p + lo, p + hi) for lo, hi in b.intervals]
    for q in b.points:
        intervals += [(lo + q, hi + q) for lo, hi in a.intervals]
    intervals += [(a1 + b1, a2 + b2) for a1, a2 in a.intervals for b1, b2 in b.intervals]
    tails = []
    if a.tail is not None:
        tails.append(a.tail + b.minimum())
    if b.tail is not None:
        tails.append(b.tail + a.minimum())
    tail = min(tails) if tails else None
    return normalize(points, intervals, tail, a.notes + b.notes)
