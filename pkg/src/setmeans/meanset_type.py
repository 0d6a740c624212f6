"""Set-valued mean results: finite unions of flagged intervals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Interval, IntervalUnion, Rat, iu_normalize


@dataclass(frozen=True)
class MeanSet:
    """A finite union of disjoint intervals with open/closed endpoint flags.

    Unlike measure computations, the flags here are semantically significant;
    a singleton is a degenerate closed interval, and empty is allowed.
    """

    parts: tuple[Interval, ...]

    def __iter__(self):
        return iter(self.parts)

    def is_empty(self) -> bool:
        return not self.parts

    def contains(self, x: Rat) -> bool:
        return any(p.contains(x) for p in self.parts)

    def as_union(self) -> IntervalUnion:
        return IntervalUnion(self.parts)

    def subset_of(self, other: "MeanSet") -> bool:
        from .core import iu_contains_union

        return iu_contains_union(other.as_union(), self.as_union())

    def map_affine(self, alpha: Rat, beta: Rat) -> "MeanSet":
        if alpha == 0:
            raise ValueError("alpha must be nonzero")
        parts = [p.scale(alpha).shift(beta) for p in self.parts]
        if alpha < 0:
            parts.reverse()
        return MeanSet(tuple(parts))

    def __repr__(self):
        if not self.parts:
            return "<empty mean-set>"
        return " u ".join(repr(p) for p in self.parts)


def mean_set(parts) -> MeanSet:
    """Normalize a collection of flagged intervals into a MeanSet."""
    return MeanSet(iu_normalize(parts).parts)


def singleton(x: Rat) -> MeanSet:
    return MeanSet((Interval(Fraction(x), Fraction(x)),))


EMPTY_MEAN_SET = MeanSet(())
