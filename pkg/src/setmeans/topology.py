"""Derived-set calculus and related point-set topology on set expressions.

All operations are structural: the derived set of each node shape is known
in closed form, so accumulation points, closures, ideal-relative limits,
splits, and isolated-point extraction are computed exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .core import Interval, Rat
from .errors import (
    BudgetExceeded,
    InIdeal,
    NotIsolatedDense,
    SemanticError,
    Unsupported,
)
from .setexpr import (
    Affine,
    Cantor,
    Dense,
    Finite,
    IntervalSet,
    Seq,
    Seq2,
    SetExpr,
    Union,
    bounds,
    contains_point,
    has_uncountable_leaf,
    is_infinite,
    normalize_affine,
    union,
)
from .terms import (
    TermFun,
    tf_abs_below_index,
    tf_cmp,
    tf_eventual_sign,
    tf_find_value,
    tf_monotone_index,
    tf_value,
    tf_value_float,
    tf_with_start,
)

EMPTY = Finite(())


def is_empty_expr(s: SetExpr) -> bool:
    if isinstance(s, Finite):
        return not s.points
    if isinstance(s, Affine):
        return is_empty_expr(s.inner)
    if isinstance(s, Union):
        return all(is_empty_expr(p) for p in s.parts)
    return False


def _drop_empty(parts) -> SetExpr:
    kept = [p for p in parts if not is_empty_expr(p)]
    if not kept:
        return EMPTY
    return union(*kept)


# ---------------------------------------------------------------------------
# derived sets and closures


def derived_set(s: SetExpr) -> SetExpr:
    """The set of accumulation points, within the same algebra."""
    if isinstance(s, Finite):
        return EMPTY
    if isinstance(s, Seq):
        return Finite((s.limit,))
    if isinstance(s, Seq2):
        fams = [Seq(s.limit, s.outer)]
        if s.inner != s.outer:
            fams.append(Seq(s.limit, s.inner))
        return Union(tuple(fams + [Finite((s.limit,))]))
    if isinstance(s, IntervalSet):
        if s.iv.is_point():
            return EMPTY
        return IntervalSet(Interval(s.iv.lo, s.iv.hi))
    if isinstance(s, Dense):
        return IntervalSet(Interval(s.lo, s.hi))
    if isinstance(s, Cantor):
        return s
    if isinstance(s, Affine):
        inner = derived_set(s.inner)
        if is_empty_expr(inner):
            return EMPTY
        return normalize_affine(Affine(s.alpha, s.beta, inner))
    if isinstance(s, Union):
        return _drop_empty([derived_set(p) for p in s.parts])
    raise TypeError(f"unknown node {s!r}")


def closure(s: SetExpr) -> SetExpr:
    """A set expression whose point set is the closure of s."""
    if isinstance(s, Finite):
        return s
    if isinstance(s, Seq):
        return Union((Finite((s.limit,)), s))
    if isinstance(s, Seq2):
        return _drop_empty([s, derived_set(s)])
    if isinstance(s, IntervalSet):
        return IntervalSet(Interval(s.iv.lo, s.iv.hi))
    if isinstance(s, Dense):
        return IntervalSet(Interval(s.lo, s.hi))
    if isinstance(s, Cantor):
        return s
    if isinstance(s, Affine):
        return Affine(s.alpha, s.beta, closure(s.inner))
    if isinstance(s, Union):
        return Union(tuple(closure(p) for p in s.parts))
    raise TypeError(f"unknown node {s!r}")


def acc_chain(s: SetExpr, max_depth: int = 16) -> tuple[list[SetExpr], bool]:
    """Successive derived sets until empty (terminated) or a fixpoint/cap."""
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    chain: list[SetExpr] = []
    cur = normalize_affine(derived_set(s))
    prev: SetExpr | None = normalize_affine(s)
    for _ in range(max_depth):
        chain.append(cur)
        if is_empty_expr(cur):
            return chain, True
        if cur == prev:
            return chain, False  # nonempty fixpoint can never empty out
        prev = cur
        cur = normalize_affine(derived_set(cur))
    return chain, False


# ---------------------------------------------------------------------------
# ideal-relative limits


class Ideal(enum.Enum):
    EMPTY_ONLY = "empty"
    FINITE_SETS = "finite"
    COUNTABLE_SETS = "countable"
    NULL_SETS = "null"


_IDEAL_ORDER = {
    Ideal.EMPTY_ONLY: 0,
    Ideal.FINITE_SETS: 1,
    Ideal.COUNTABLE_SETS: 2,
    Ideal.NULL_SETS: 3,
}


def _positive_interval_leaves(s: SetExpr) -> list[Interval]:
    out = []
    for leaf in _leaves(normalize_affine(s)):
        if isinstance(leaf, IntervalSet) and not leaf.iv.is_point():
            out.append(leaf.iv)
    return out


def _uncountable_leaf_bounds(s: SetExpr) -> list[tuple[Rat, Rat]]:
    out = []
    for leaf in _leaves(normalize_affine(s)):
        if isinstance(leaf, IntervalSet) and not leaf.iv.is_point():
            out.append((leaf.iv.lo, leaf.iv.hi))
        elif isinstance(leaf, Cantor):
            out.append((Fraction(0), Fraction(1)))
        elif isinstance(leaf, Affine) and isinstance(leaf.inner, Cantor):
            lo, hi, _, _ = bounds(leaf)
            out.append((lo, hi))
    return out


def _leaves(s: SetExpr):
    if isinstance(s, Union):
        for p in s.parts:
            yield from _leaves(p)
    else:
        yield s


def ideal_limits(s: SetExpr, ideal: Ideal) -> tuple[Rat, Rat]:
    """Ideal-relative lower and upper limits of a bounded nonempty set.

    The upper limit is the infimum of x such that the part of the set above
    x belongs to the ideal; on this class it reduces to exact leaf extremes.
    """
    if is_empty_expr(s):
        raise InIdeal("set is empty")
    if ideal is Ideal.EMPTY_ONLY:
        lo, hi, _, _ = bounds(s)
        return lo, hi
    if ideal is Ideal.FINITE_SETS:
        if not is_infinite(s):
            raise InIdeal("finite set")
        d = derived_set(s)
        lo, hi, _, _ = bounds(d)
        return lo, hi
    if ideal is Ideal.COUNTABLE_SETS:
        pieces = _uncountable_leaf_bounds(s)
        if not pieces:
            raise InIdeal("countable set")
        return min(p[0] for p in pieces), max(p[1] for p in pieces)
    if ideal is Ideal.NULL_SETS:
        ivs = _positive_interval_leaves(s)
        if not ivs:
            raise InIdeal("set of measure zero")
        return min(iv.lo for iv in ivs), max(iv.hi for iv in ivs)
    raise TypeError(f"unknown ideal {ideal!r}")


# ---------------------------------------------------------------------------
# splitting at a point


def split_at(s: SetExpr, y: Rat) -> tuple[SetExpr, SetExpr]:
    """(H intersect (-inf, y], H intersect [y, +inf)) in the same algebra."""
    s = normalize_affine(s)
    below, above = _split(s, y)
    return below, above


def _split(s: SetExpr, y: Rat) -> tuple[SetExpr, SetExpr]:
    if isinstance(s, Finite):
        return (
            Finite(tuple(p for p in s.points if p <= y)),
            Finite(tuple(p for p in s.points if p >= y)),
        )
    if isinstance(s, IntervalSet):
        iv = s.iv
        if y < iv.lo or (y == iv.lo and iv.lo_open):
            return EMPTY, s
        if y > iv.hi or (y == iv.hi and iv.hi_open):
            return s, EMPTY
        below = IntervalSet(Interval(iv.lo, y, iv.lo_open, False))
        above = IntervalSet(Interval(y, iv.hi, False, iv.hi_open))
        return below, above
    if isinstance(s, Dense):
        if y <= s.lo:
            return EMPTY, s
        if y >= s.hi:
            return s, EMPTY
        at = [Finite((y,))] if contains_point(s, y) else []
        below = _drop_empty([Dense(s.lo, y)] + at)
        above = _drop_empty([Dense(y, s.hi)] + at)
        return below, above
    if isinstance(s, Cantor):
        return _split_cantor(y)
    if isinstance(s, Seq):
        return _split_seq(s, y)
    if isinstance(s, Seq2):
        if tf_eventual_sign(s.outer) < 0:
            neg = normalize_affine(Affine(Fraction(-1), Fraction(0), s))
            b, a = _split(neg, -y)
            flip = lambda t: normalize_affine(Affine(Fraction(-1), Fraction(0), t))
            return flip(a), flip(b)
        return _split_seq2(s, y)
    if isinstance(s, Union):
        parts = [_split(p, y) for p in s.parts]
        return (
            _drop_empty([p[0] for p in parts]),
            _drop_empty([p[1] for p in parts]),
        )
    if isinstance(s, Affine):  # only Cantor stays wrapped after normalization
        assert isinstance(s.inner, Cantor)
        y0 = (y - s.beta) / s.alpha
        b, a = _split_cantor(y0)
        wrap = lambda t: normalize_affine(Affine(s.alpha, s.beta, t))
        if s.alpha > 0:
            return wrap(b), wrap(a)
        return wrap(a), wrap(b)
    raise TypeError(f"unknown node {s!r}")


def _split_cantor(y: Rat, depth: int = 0) -> tuple[SetExpr, SetExpr]:
    c = Cantor()
    if y <= 0:
        below = Finite((Fraction(0),)) if y == 0 else EMPTY
        return below, c
    if y >= 1:
        above = Finite((Fraction(1),)) if y == 1 else EMPTY
        return c, above
    if depth > 256:
        raise Unsupported("cut point requires infinitely many cantor pieces")
    third = Fraction(1, 3)
    if Fraction(1, 3) <= y < Fraction(2, 3):
        left = Affine(third, Fraction(0), c)
        right = Affine(third, Fraction(2, 3), c)
        at = [Finite((y,))] if y == third else []
        return _drop_empty([left] + at), _drop_empty([right] + at)
    if y < third:
        b, a = _split_cantor(3 * y, depth + 1)
        scale = lambda t: normalize_affine(Affine(third, Fraction(0), t))
        right = Affine(third, Fraction(2, 3), c)
        return scale(b), _drop_empty([scale(a), right])
    b, a = _split_cantor(3 * y - 2, depth + 1)
    scale = lambda t: normalize_affine(Affine(third, Fraction(2, 3), t))
    left = Affine(third, Fraction(0), c)
    return _drop_empty([left, scale(b)]), scale(a)


_SPLIT_CAP = 100_000


def _split_seq(s: Seq, y: Rat) -> tuple[SetExpr, SetExpr]:
    tf = s.tail
    m = tf_monotone_index(tf)
    t = y - s.limit
    below_pts = []
    above_pts = []
    for n in range(tf.start, m + 1):
        v = tf_value(tf, n)
        if v <= t:
            below_pts.append(s.limit + v)
        if v >= t:
            above_pts.append(s.limit + v)
    sign = tf_eventual_sign(tf)
    tail = Seq(s.limit, tf_with_start(tf, m + 1))
    if sign > 0:
        if t <= 0:
            return (
                Finite(tuple(below_pts)),
                _drop_empty([Finite(tuple(above_pts)), tail]),
            )
        # tail values descend to 0: find first index with value <= t
        n_star = _first_tail_le(tf, m + 1, t)
        if n_star - (m + 1) > _SPLIT_CAP:
            raise BudgetExceeded("split produces too many explicit points")
        for n in range(m + 1, n_star):
            v = tf_value(tf, n)
            if v >= t:  # v > t except possible boundary equality
                above_pts.append(s.limit + v)
        lower_tail = Seq(s.limit, tf_with_start(tf, n_star))
        if tf_cmp(tf, n_star, t) == 0:
            above_pts.append(s.limit + tf_value(tf, n_star))
        return (
            _drop_empty([Finite(tuple(below_pts)), lower_tail]),
            Finite(tuple(above_pts)),
        )
    # negative tail: mirror through reflection
    neg = normalize_affine(Affine(Fraction(-1), Fraction(0), s))
    assert isinstance(neg, Seq)
    b, a = _split_seq(neg, -y)
    flip = lambda u: normalize_affine(Affine(Fraction(-1), Fraction(0), u))
    return flip(a), flip(b)


def _first_tail_le(tf: TermFun, lo: int, t: Rat) -> int:
    """First n >= lo (monotone positive tail) with f(n) <= t; t > 0."""
    if tf_cmp(tf, lo, t) <= 0:
        return lo
    hi = lo
    step = 1
    while tf_cmp(tf, hi, t) > 0:
        lo = hi
        hi += step
        step *= 2
        if hi > 1 << 50:
            raise BudgetExceeded("tail threshold search exceeded budget")
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if tf_cmp(tf, mid, t) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def _split_seq2(s: Seq2, y: Rat) -> tuple[SetExpr, SetExpr]:
    """Split a double sequence with positive parts; finitely many straddlers."""
    f, g = s.outer, s.inner
    _, g_top, _, _ = _tf_value_extent(g)
    t = y - s.limit
    if t <= 0:
        return EMPTY, s
    mf = tf_monotone_index(f)
    lo_all, hi_all, _, _ = bounds(s)
    if y > hi_all:
        return s, EMPTY
    if t <= g_top:
        raise Unsupported("cut point lies in the accumulation band of clusters")
    # clusters with outer value <= t - g_top sit entirely at or below y
    n_c = _first_tail_le(f, mf + 1, t - g_top)
    if n_c - f.start > 10_000:
        raise BudgetExceeded("split produces too many explicit clusters")
    below_parts: list[SetExpr] = [Seq2(s.limit, tf_with_start(f, n_c), g)]
    above_parts: list[SetExpr] = []
    if tf_cmp(f, n_c, t - g_top) == 0:
        above_parts.append(Finite((y,)))  # that cluster's top lands on y
    for n in range(f.start, n_c):
        cluster = Seq(s.limit + tf_value(f, n), g)
        b, a = _split_seq(cluster, y)
        below_parts.append(b)
        above_parts.append(a)
    return _drop_empty(below_parts), _drop_empty(above_parts)


def _tf_value_extent(tf: TermFun):
    from .setexpr import tf_value_bounds

    return tf_value_bounds(tf)


# ---------------------------------------------------------------------------
# accumulation structure with sidedness


@dataclass(frozen=True)
class AccPoint:
    value: Rat
    left_sided: bool
    right_sided: bool

    def __post_init__(self):
        if not (self.left_sided or self.right_sided):
            raise SemanticError("accumulation point needs a side")


@dataclass
class AccFamily:
    """A monotone tail {limit + tf(n) : n >= start} of accumulation points."""

    limit: Rat
    tf: TermFun
    start: int
    left_sided: bool  # sidedness of the family's points as acc points of H
    right_sided: bool

    def top(self) -> Rat:
        return self.limit + tf_value(tf_with_start(self.tf, self.start), self.start)

    def value(self, n: int) -> Rat:
        return self.limit + tf_value(self.tf, n)

    def span(self) -> tuple[Rat, Rat]:
        v = self.value(self.start)
        return (min(self.limit, v), max(self.limit, v))


@dataclass
class AccStructure:
    anchors: list[AccPoint]  # sorted by value, distinct values
    families: list[AccFamily]  # disjoint open ranges, limits are anchors

    def anchor_values(self) -> list[Rat]:
        return [a.value for a in self.anchors]

    def min_value(self) -> Rat:
        cands = [a.value for a in self.anchors]
        for fam in self.families:
            if tf_eventual_sign(fam.tf) < 0:
                cands.append(fam.value(fam.start))
        return min(cands)

    def max_value(self) -> Rat:
        cands = [a.value for a in self.anchors]
        for fam in self.families:
            if tf_eventual_sign(fam.tf) > 0:
                cands.append(fam.value(fam.start))
        return max(cands)

    def is_infinite(self) -> bool:
        return bool(self.families)

    def count_if_finite(self) -> int:
        return len(self.anchors) if not self.families else -1


def _merge_flag(table: dict, value: Rat, left: bool, right: bool):
    l0, r0 = table.get(value, (False, False))
    table[value] = (l0 or left, r0 or right)


def acc_structure(s: SetExpr) -> AccStructure:
    """Anchors and monotone families of H' with approach sidedness.

    Requires a countable set built from finite/sequence leaves.
    """
    s = normalize_affine(s)
    if has_uncountable_leaf(s):
        raise Unsupported("accumulation structure needs a countable set")
    anchor_flags: dict[Rat, tuple[bool, bool]] = {}
    families: list[AccFamily] = []
    for leaf in _leaves(s):
        if isinstance(leaf, Finite):
            continue
        if isinstance(leaf, Dense):
            raise Unsupported("dense filler has a continuum of accumulation points")
        if isinstance(leaf, Seq):
            sign = tf_eventual_sign(leaf.tail)
            _merge_flag(anchor_flags, leaf.limit, sign < 0, sign > 0)
            continue
        if isinstance(leaf, Seq2):
            sign = tf_eventual_sign(leaf.outer)
            _merge_flag(anchor_flags, leaf.limit, sign < 0, sign > 0)
            fams = [leaf.outer]
            if leaf.inner != leaf.outer:
                fams.append(leaf.inner)
            for tf in fams:
                families.append(
                    AccFamily(
                        limit=leaf.limit,
                        tf=tf,
                        start=tf_monotone_index(tf),
                        left_sided=sign < 0,
                        right_sided=sign > 0,
                    )
                )
            continue
        raise Unsupported(f"unsupported leaf for accumulation structure: {leaf!r}")

    # family prefix points (before the monotone tail) become plain anchors
    for fam in families:
        for n in range(fam.tf.start, fam.start):
            _merge_flag(
                anchor_flags, fam.limit + tf_value(fam.tf, n), fam.left_sided, fam.right_sided
            )

    _separate_families(anchor_flags, families)
    anchors = [
        AccPoint(v, l, r) for v, (l, r) in sorted(anchor_flags.items())
    ]
    return AccStructure(anchors, families)


def _separate_families(anchor_flags: dict, families: list[AccFamily]):
    """Trim family starts until ranges are disjoint and anchor-free."""
    for _ in range(64):
        changed = False
        for i, fam in enumerate(families):
            lo, hi = fam.span()
            conflicts = [
                v for v in anchor_flags if lo < v <= hi and v != fam.limit
            ] if tf_eventual_sign(fam.tf) > 0 else [
                v for v in anchor_flags if lo <= v < hi and v != fam.limit
            ]
            for j, other in enumerate(families):
                if i == j:
                    continue
                olo, ohi = other.span()
                if lo < ohi and olo < hi:
                    if fam.limit == other.limit and fam.tf == other.tf:
                        continue
                    if fam.limit == other.limit:
                        raise Unsupported(
                            "interleaved accumulation families share a limit"
                        )
                    conflicts.append(other.limit)  # force a trim toward own limit
            if conflicts:
                target = min(
                    (abs(v - fam.limit) for v in conflicts if v != fam.limit),
                    default=None,
                )
                if target is None or target == 0:
                    raise Unsupported("cannot separate accumulation families")
                new_start = max(
                    fam.start + 1, tf_abs_below_index(fam.tf, target)
                )
                if new_start - fam.tf.start > 100_000:
                    raise BudgetExceeded("family separation trimmed too far")
                for n in range(fam.start, new_start):
                    _merge_flag(
                        anchor_flags,
                        fam.limit + tf_value(fam.tf, n),
                        fam.left_sided,
                        fam.right_sided,
                    )
                fam.start = new_start
                changed = True
        if not changed:
            return
    raise Unsupported("family separation did not stabilize")


# ---------------------------------------------------------------------------
# one-sided accumulation queries (exact)


def acc_membership(st: AccStructure, x: Rat) -> tuple[bool, bool, bool]:
    """(is x in H', left_sided, right_sided)."""
    for a in st.anchors:
        if a.value == x:
            return True, a.left_sided, a.right_sided
    for fam in st.families:
        lo, hi = fam.span()
        if lo <= x <= hi and x != fam.limit:
            idx = tf_find_value(fam.tf, x - fam.limit, fam.start)
            if idx is not None and idx >= fam.start:
                return True, fam.left_sided, fam.right_sided
    return False, False, False


def acc_sup_below(st: AccStructure, x: Rat) -> Rat | None:
    """sup of accumulation values strictly below x (None if none)."""
    best: Rat | None = None
    for a in st.anchors:
        if a.value < x:
            best = a.value if best is None or a.value > best else best
    for fam in st.families:
        v = _fam_extreme_below(fam, x)
        if v is not None:
            best = v if best is None or v > best else best
    return best


def acc_inf_above(st: AccStructure, x: Rat) -> Rat | None:
    best: Rat | None = None
    for a in st.anchors:
        if a.value > x:
            best = a.value if best is None or a.value < best else best
    for fam in st.families:
        v = _fam_extreme_above(fam, x)
        if v is not None:
            best = v if best is None or v < best else best
    return best


def _fam_extreme_below(fam: AccFamily, x: Rat) -> Rat | None:
    """Supremum of family values strictly below x (None if there are none).

    May return an unattained supremum (the family limit) when the values
    accumulate at x from below; one-sided limit computations want exactly
    that value.
    """
    sign = tf_eventual_sign(fam.tf)
    t = x - fam.limit
    if sign > 0:
        # values in (limit, top], decreasing in n toward the limit
        if t <= 0:
            return None
        top = fam.value(fam.start)
        if x > top:
            return top
        n = _first_tail_lt(fam.tf, fam.start, t)
        return fam.value(n)
    # negative family: values in [bottom, limit), increasing with n
    bottom = fam.value(fam.start)
    if x <= bottom:
        return None
    if x >= fam.limit:
        return fam.limit  # values accumulate just under the limit
    n = _last_tail_lt_neg(fam.tf, fam.start, t)
    return fam.value(n)


def _fam_extreme_above(fam: AccFamily, x: Rat) -> Rat | None:
    """Infimum of family values strictly above x (None if there are none)."""
    sign = tf_eventual_sign(fam.tf)
    t = x - fam.limit
    if sign > 0:
        top = fam.value(fam.start)
        if x >= top:
            return None
        if t <= 0:
            return fam.limit  # values accumulate just above the limit
        n = _first_tail_le(fam.tf, fam.start, t)
        # values decrease with n; the smallest one above t is at index n-1
        return fam.value(n - 1) if n - 1 >= fam.start else None
    # negative family: values in [bottom, limit), increasing with n
    bottom = fam.value(fam.start)
    if x < bottom:
        return bottom
    if x >= fam.limit:
        return None
    n = _first_tail_gt_neg(fam.tf, fam.start, t)
    return fam.value(n) if n is not None else None


def _first_tail_lt(tf: TermFun, lo: int, t: Rat) -> int:
    """First n >= lo with f(n) < t (positive decreasing tail, 0 < t)."""
    n = _first_tail_le(tf, lo, t)
    while tf_cmp(tf, n, t) == 0:
        n += 1
    return n


def _last_tail_lt_neg(tf: TermFun, lo: int, t: Rat) -> int:
    """Largest n with f(n) < t for a negative increasing tail, f(lo) < t."""
    n = lo
    step = 1
    while tf_cmp(tf, n + step, t) < 0:
        n += step
        step *= 2
        if n > 1 << 50:
            raise BudgetExceeded("tail search exceeded budget")
    hi = n + step
    while n + 1 < hi:
        mid = (n + hi) // 2
        if tf_cmp(tf, mid, t) < 0:
            n = mid
        else:
            hi = mid
    return n


def _first_tail_gt_neg(tf: TermFun, lo: int, t: Rat) -> int | None:
    """First n >= lo with f(n) > t for a negative increasing tail."""
    if tf_cmp(tf, lo, t) > 0:
        return lo
    n = lo
    step = 1
    while tf_cmp(tf, n, t) <= 0:
        n += step
        step *= 2
        if n > 1 << 50:
            return None
    lo2, hi = n - step // 2, n
    lo2 = max(lo2, lo)
    while lo2 + 1 < hi:
        mid = (lo2 + hi) // 2
        if tf_cmp(tf, mid, t) <= 0:
            lo2 = mid
        else:
            hi = mid
    return hi


# ---------------------------------------------------------------------------
# isolated points


def _check_isolated_dense(s: SetExpr):
    s = normalize_affine(s)
    for leaf in _leaves(s):
        if isinstance(leaf, (IntervalSet, Cantor, Dense)) or (
            isinstance(leaf, Affine)
        ):
            if isinstance(leaf, IntervalSet) and leaf.iv.is_point():
                continue
            raise NotIsolatedDense(
                "set is not the closure of its isolated points"
            )


@dataclass(frozen=True)
class _AccComponent:
    """One component of H' for exact distance queries."""

    kind: str  # 'point' | 'family'
    value: Rat | None = None
    limit: Rat | None = None
    tf: TermFun | None = None


def _acc_components(s: SetExpr) -> list[_AccComponent]:
    comps = []
    d = normalize_affine(derived_set(s))
    for leaf in _leaves(d):
        if isinstance(leaf, Finite):
            comps.extend(_AccComponent("point", value=p) for p in leaf.points)
        elif isinstance(leaf, Seq):
            comps.append(_AccComponent("family", limit=leaf.limit, tf=leaf.tail))
            comps.append(_AccComponent("point", value=leaf.limit))
        else:  # pragma: no cover - derived sets of countable sets
            raise Unsupported(f"unexpected derived leaf {leaf!r}")
    return comps


def _dist_to_component(comp: _AccComponent, x: Rat) -> Rat:
    if comp.kind == "point":
        return abs(x - comp.value)
    tf, L = comp.tf, comp.limit
    t = x - L
    # |t| is the distance to the family's limit, which always belongs to the
    # closed accumulation set, so using it as a floor never overstates.
    best = abs(t)
    m = tf_monotone_index(tf)
    for n in range(tf.start, m + 1):
        d = abs(t - tf_value(tf, n))
        if d < best:
            best = d
    sign = tf_eventual_sign(tf)
    if t != 0 and (t > 0) == (sign > 0):
        if sign < 0:
            tf = _negate(tf)
            t = -t
        lo = m + 1
        if tf_cmp(tf, lo, t) <= 0:
            best = min(best, abs(t - tf_value(tf, lo)))
        else:
            n = _first_tail_le(tf, lo, t)
            for cand in (n - 1, n):
                if cand >= lo:
                    best = min(best, abs(t - tf_value(tf, cand)))
    return best


def _negate(tf: TermFun) -> TermFun:
    from .terms import tf_scale

    return tf_scale(tf, Fraction(-1))


def _seq_value_index(limit: Rat, tf: TermFun, x: Rat) -> int | None:
    from .setexpr import _seq_value_index as impl

    return impl(limit, tf, x)


def _leaf_candidates_exact(leaf, delta: Rat, budget: int):
    """Yield (id, main, tinies, float value) for points that could survive."""
    from .terms import tf_value_parts

    if isinstance(leaf, Finite):
        for p in leaf.points:
            yield ("f", p), p, (), float(p)
        return
    if isinstance(leaf, Seq):
        tf = leaf.tail
        cutoff = tf_abs_below_index(tf, delta)
        if cutoff - tf.start > budget:
            raise BudgetExceeded("isolated point budget exhausted")
        for n in range(tf.start, cutoff):
            main, tinies = tf_value_parts(tf, n)
            total = leaf.limit + main
            yield ("s", n), total, tinies, float(total)
        return
    if isinstance(leaf, Seq2):
        n_cut = tf_abs_below_index(leaf.outer, delta)
        k_cut = tf_abs_below_index(leaf.inner, delta)
        if (n_cut - leaf.outer.start) * max(k_cut - leaf.inner.start, 1) > budget:
            raise BudgetExceeded("isolated point budget exhausted")
        for n in range(leaf.outer.start, n_cut):
            fm, ft = tf_value_parts(leaf.outer, n)
            if abs(fm) < delta:
                continue
            for k in range(leaf.inner.start, k_cut):
                gm, gt = tf_value_parts(leaf.inner, k)
                if abs(gm) >= delta:
                    total = leaf.limit + fm + gm
                    yield (n, k), total, ft + gt, float(total)
        return
    raise NotIsolatedDense("set is not the closure of its isolated points")


def _survives(main: Rat, tinies, comps, delta: Rat) -> bool:
    """Exact test: distance from the candidate to every component >= delta."""
    from .terms import parts_cmp

    for c in comps:
        if c.kind == "point":
            p = c.value
            # excluded iff p - delta < x < p + delta
            if parts_cmp(main, tinies, p - delta) > 0 and parts_cmp(
                main, tinies, p + delta
            ) < 0:
                return False
        else:
            if tinies:
                raise ArithmeticError(
                    "family distance with symbolic tails is not supported"
                )
            if _dist_to_component(c, main) < delta:
                return False
    return True


def _iter_unique_candidates(s: SetExpr, delta: Rat, budget: int):
    """All candidates across leaves, each distinct value exactly once."""
    from .terms import tiny_signature

    s = normalize_affine(s)
    seen: set = set()
    for leaf in _leaves(s):
        for _id, main, tinies, xf in _leaf_candidates_exact(leaf, delta, budget):
            key = (main, tiny_signature(tinies))
            if key in seen:
                continue
            seen.add(key)
            yield main, tinies, xf


def isolated_outside(s: SetExpr, delta: Rat, budget: int = 1_000_000) -> list[Rat]:
    """The finite set of points of H at distance >= delta from every
    accumulation point (H minus the open delta-neighbourhood of H')."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    _check_isolated_dense(s)
    comps = _acc_components(s)
    out: list[Rat] = []
    for main, tinies, _xf in _iter_unique_candidates(s, delta, budget):
        if _survives(main, tinies, comps, delta):
            if tinies:
                raise BudgetExceeded(
                    "exact isolated points would need untractable precision"
                )
            out.append(main)
            if len(out) > budget:
                raise BudgetExceeded("isolated point budget exhausted")
    return sorted(out)


def isolated_stats(s: SetExpr, delta: Rat, budget: int = 10_000_000) -> tuple[int, float]:
    """(count, compensated float sum) of H - S(H', delta)."""
    _check_isolated_dense(s)
    comps = _acc_components(s)
    s = normalize_affine(s)
    leaves = list(_leaves(s))
    simple = all(c.kind == "point" for c in comps) and all(
        isinstance(l, (Finite, Seq)) for l in leaves
    )
    if not simple:
        count = 0
        total = 0.0
        for main, tinies, xf in _iter_unique_candidates(s, delta, min(budget, 400_000)):
            if _survives(main, tinies, comps, delta):
                count += 1
                total += xf
        return count, total
    points = [c.value for c in comps]
    skips = _build_skips(leaves, delta)
    count = 0
    total = 0.0
    for leaf, skip in zip(leaves, skips):
        c, t = _fast_leaf_scan(leaf, skip, points, delta, budget - count)
        count += c
        total += t
    return count, total


def _fast_leaf_scan(leaf, skip: set, points: list[Rat], delta: Rat, budget: int):
    """Survivor count and float sum for one finite or sequence leaf.

    The exclusion zone around each accumulation point cuts a contiguous index
    range out of the monotone tail, so survivors form finitely many index
    ranges whose sums have closed forms; no per-candidate scanning.
    """
    def exact_excluded(x: Rat) -> bool:
        return any(abs(x - p) < delta for p in points)

    count = 0
    total = 0.0
    if isinstance(leaf, Finite):
        for p in leaf.points:
            if ("f", p) in skip or exact_excluded(p):
                continue
            count += 1
            total += float(p)
        return count, total
    tf0 = leaf.tail
    if tf_eventual_sign(tf0) > 0:
        tf, lim, flip = tf0, leaf.limit, 1
    else:
        tf, lim, flip = _negate(tf0), -leaf.limit, -1
    m = tf_monotone_index(tf)
    # prefix before the monotone tail: explicit exact checks
    for n in range(tf.start, m):
        if ("s", n) in skip:
            continue
        x = leaf.limit + tf_value(tf0, n)
        if not exact_excluded(x):
            count += 1
            total += float(x)
    # each accumulation point excludes one contiguous tail range
    excluded: list[tuple[int, int]] = []  # [lo, hi) index ranges
    tail_end = None
    for p in points:
        t = flip * (p - leaf.limit)
        lo_val, hi_val = t - delta, t + delta
        if hi_val <= 0:
            continue  # the open exclusion band misses the positive tail
        n1 = _first_tail_lt(tf, m, hi_val)  # first f(n) < t + delta
        if lo_val <= 0:
            n2 = None  # band reaches below the tail: excluded forever
        else:
            n2 = _first_tail_le(tf, m, lo_val)
            if tf_cmp(tf, n2, lo_val) == 0:
                pass  # f(n2) == t - delta survives (open ball)
        if n2 is None:
            tail_end = n1 if tail_end is None else min(tail_end, n1)
        elif n2 > n1:
            excluded.append((n1, n2))
    if tail_end is None:
        raise BudgetExceeded("sequence survives near its own limit")
    if tail_end - m > 100_000_000:
        raise BudgetExceeded("isolated point budget exhausted")
    excluded = [r for r in ((max(lo, m), min(hi, tail_end)) for lo, hi in excluded) if r[0] < r[1]]
    excluded.sort()
    merged: list[list[int]] = []
    for lo, hi in excluded:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    survivors: list[tuple[int, int]] = []
    cursor = m
    for lo, hi in merged:
        if lo > cursor:
            survivors.append((cursor, lo))
        cursor = max(cursor, hi)
    if cursor < tail_end:
        survivors.append((cursor, tail_end))
    lf = float(leaf.limit)
    for lo, hi in survivors:
        if hi - lo > budget:
            raise BudgetExceeded("isolated point budget exhausted")
        count += hi - lo
        total += (hi - lo) * lf + flip * _tf_range_sum_float(tf, lo, hi)
    for kind, n in skip:
        if kind == "s" and any(lo <= n < hi for lo, hi in survivors):
            count -= 1
            total -= lf + flip * tf_value_float(tf, n)
    return count, total


_EULER_GAMMA = 0.5772156649015328606


def _harmonic_float(n: int) -> float:
    if n <= 0:
        return 0.0
    if n < 32:
        return sum(1.0 / k for k in range(1, n + 1))
    inv = 1.0 / n
    inv2 = inv * inv
    return (
        math.log(n)
        + _EULER_GAMMA
        + inv / 2
        - inv2 / 12
        + inv2 * inv2 / 120
        - inv2 * inv2 * inv2 / 252
    )


def _pow_tail_float(p: int, n: int) -> float:
    """sum over k > n of k^-p, p >= 2."""
    if n < 32:
        return sum(1.0 / k**p for k in range(n + 1, 33)) + _pow_tail_float(p, 32)
    x = float(n)
    ivp = x ** (1 - p) / (p - 1)
    return (
        ivp
        - 0.5 * x**-p
        + (p / 12.0) * x ** (-p - 1)
        - (p * (p + 1) * (p + 2) / 720.0) * x ** (-p - 3)
    )


def _pow_range_sum_float(p: int, a: int, b: int) -> float:
    """sum over n in [a, b) of n^-p."""
    if b <= a:
        return 0.0
    if p == 1:
        return _harmonic_float(b - 1) - _harmonic_float(a - 1)
    return _pow_tail_float(p, a - 1) - _pow_tail_float(p, b - 1)


def _tf_range_sum_float(tf: TermFun, a: int, b: int) -> float:
    """sum over n in [a, b) of tf(n), in floats, via per-term closed forms."""
    from .terms import DoubleGeoTerm, GeoTerm, PowTerm, _term_value_float

    if b <= a:
        return 0.0
    total = 0.0
    for t in tf.terms:
        if isinstance(t, PowTerm):
            total += float(t.c) * _pow_range_sum_float(t.p, a, b)
        elif isinstance(t, GeoTerm):
            rf = float(t.r)
            ra = math.exp(a * math.log(rf)) if a * math.log(rf) > -700 else 0.0
            rb = math.exp(b * math.log(rf)) if b * math.log(rf) > -700 else 0.0
            total += float(t.c) * (ra - rb) / (1 - rf)
        else:
            assert isinstance(t, DoubleGeoTerm)
            for n in range(a, min(b, a + 64)):
                total += _term_value_float(t, n)
    return total


def _build_skips(leaves, delta: Rat) -> list[set]:
    """Candidate ids to skip per leaf, so shared values count exactly once.

    Collisions are resolved structurally: repeated finite points, sequence
    indices hitting a finite point, and equal values between two sequence
    leaves (solved through the monotone tails, never by scanning floats).
    """
    from .setexpr import bounds as expr_bounds
    from .terms import tf_value_parts, tiny_signature

    skips: list[set] = [set() for _ in leaves]
    finite_vals: dict[Rat, int] = {}
    for i, leaf in enumerate(leaves):
        if isinstance(leaf, Finite):
            for p in leaf.points:
                if p in finite_vals:
                    skips[i].add(("f", p))
                else:
                    finite_vals[p] = i
    seq_ids = [i for i, l in enumerate(leaves) if isinstance(l, Seq)]
    for j in seq_ids:
        leaf = leaves[j]
        for p in finite_vals:
            idx = _seq_value_index(leaf.limit, leaf.tail, p)
            if idx is not None:
                skips[j].add(("s", idx))
    # pairwise sequence overlap: keep the earlier leaf's copy
    spans = {i: expr_bounds(leaves[i])[:2] for i in seq_ids}
    tiny_keys: dict = {}
    for pos_a in range(len(seq_ids)):
        for pos_b in range(pos_a + 1, len(seq_ids)):
            i, j = seq_ids[pos_a], seq_ids[pos_b]
            (alo, ahi), (blo, bhi) = spans[i], spans[j]
            if ahi < blo or bhi < alo:
                continue
            A, B = leaves[i], leaves[j]
            cut_a = tf_abs_below_index(A.tail, delta) - A.tail.start
            cut_b = tf_abs_below_index(B.tail, delta) - B.tail.start
            if min(cut_a, cut_b) > 20_000:
                raise BudgetExceeded("sequence-overlap dedup too large")
            if cut_a <= cut_b:
                src, dst, dst_idx = A, B, j
            else:
                src, dst, dst_idx = B, A, i
            for n in range(src.tail.start, src.tail.start + min(cut_a, cut_b)):
                main, tinies = tf_value_parts(src.tail, n)
                if tinies:
                    continue  # symbolic tails handled by signature below
                hit = _seq_value_index(dst.limit, dst.tail, src.limit + main)
                if hit is not None:
                    skips[dst_idx].add(("s", hit))
    # symbolic-tail candidates are few; dedup them by exact signature
    for j in seq_ids:
        leaf = leaves[j]
        cutoff = tf_abs_below_index(leaf.tail, delta)
        if cutoff - leaf.tail.start > 200:
            lo = _first_tiny_index(leaf.tail, cutoff)
        else:
            lo = leaf.tail.start
        for n in range(lo, cutoff):
            main, tinies = tf_value_parts(leaf.tail, n)
            if not tinies:
                continue
            key = (leaf.limit + main, tiny_signature(tinies))
            if key in tiny_keys:
                skips[j].add(("s", n))
            else:
                tiny_keys[key] = (j, n)
    return skips


def _first_tiny_index(tf: TermFun, hi: int) -> int:
    """First index carrying a symbolic tail (upward-closed in the index)."""
    from .terms import tf_value_parts

    def has_tiny(n: int) -> bool:
        return bool(tf_value_parts(tf, n)[1])

    if not has_tiny(hi - 1):
        return hi
    lo = tf.start
    if has_tiny(lo):
        return lo
    top = hi - 1
    while lo + 1 < top:
        mid = (lo + top) // 2
        if has_tiny(mid):
            top = mid
        else:
            lo = mid
    return top


def _cantor_max_le(t: Rat) -> Rat | None:
    """max of (Cantor set) intersect [0, t], exact."""
    if t < 0:
        return None
    if t >= 1:
        return Fraction(1)
    # iterate the ternary orbit accumulating the affine answer map x -> (x+b)/3^k
    shift = Fraction(0)
    scale = Fraction(1)
    seen: dict[Rat, tuple[Rat, Rat]] = {}
    while True:
        if Fraction(1, 3) <= t < Fraction(2, 3):
            return shift + scale * Fraction(1, 3)
        if t in seen:
            s0, c0 = seen[t]
            # answer = s0 + c0 * answer_local and answer_local repeats:
            # solve a = shift_rel + scale_rel * a relative to first visit
            rel_scale = scale / c0
            rel_shift = (shift - s0) / c0
            a_local = rel_shift / (1 - rel_scale)
            return s0 + c0 * a_local
        seen[t] = (shift, scale)
        if t < Fraction(1, 3):
            t = 3 * t
            scale = scale / 3
        else:
            t = 3 * t - 2
            shift = shift + scale * Fraction(2, 3)
            scale = scale / 3
        if len(seen) > 100_000:
            raise BudgetExceeded("cantor orbit too long")


def _cantor_min_ge(t: Rat) -> Rat | None:
    m = _cantor_max_le(1 - t)
    return None if m is None else 1 - m


def _dist_point_cantor(x: Rat) -> Rat:
    below = _cantor_max_le(x)
    above = _cantor_min_ge(x)
    cands = []
    if below is not None:
        cands.append(x - below)
    if above is not None:
        cands.append(above - x)
    return min(cands)


def _closure_profile(s: SetExpr):
    c = normalize_affine(closure(s))
    leaves = list(_leaves(c))
    if all(isinstance(l, Finite) for l in leaves):
        pts = sorted({p for l in leaves for p in l.points})
        return ("finite", pts)
    if all(isinstance(l, (Finite, IntervalSet)) for l in leaves):
        from .core import iu_normalize, point

        parts = []
        for l in leaves:
            if isinstance(l, Finite):
                parts.extend(point(p) for p in l.points)
            else:
                parts.append(Interval(l.iv.lo, l.iv.hi))
        return ("iu", iu_normalize(parts))
    if len(leaves) == 1:
        l = leaves[0]
        if isinstance(l, Cantor):
            return ("cantor", Fraction(1), Fraction(0))
        if isinstance(l, Affine) and isinstance(l.inner, Cantor):
            return ("cantor", l.alpha, l.beta)
    raise Unsupported("hausdorff distance not implemented for this shape pair")


def _dist_point_finite(x: Rat, pts: list[Rat]) -> Rat:
    return min(abs(x - p) for p in pts)


def _dist_point_iu(x: Rat, u) -> Rat:
    best = None
    for p in u.parts:
        if p.lo <= x <= p.hi:
            return Fraction(0)
        d = p.lo - x if x < p.lo else x - p.hi
        best = d if best is None or d < best else best
    return best


def _directed_finite(pts_a, dist_fn) -> Rat:
    return max(dist_fn(a) for a in pts_a)


def _directed_iu_to_any(u, dist_fn, breakpoints) -> Rat:
    """sup over the union of a piecewise-linear distance; candidates are part
    endpoints plus interior breakpoints of the distance function."""
    cands = []
    for p in u.parts:
        cands.append(p.lo)
        cands.append(p.hi)
        for b in breakpoints:
            if p.lo < b < p.hi:
                cands.append(b)
    return max(dist_fn(c) for c in cands)


def hausdorff_distance(a: SetExpr, b: SetExpr) -> Rat:
    """Exact Hausdorff distance between the closures of a and b.

    Supported pairs: finite/finite, finite/interval-union,
    interval-union/interval-union, and cantor/finite.
    """
    pa = _closure_profile(a)
    pb = _closure_profile(b)
    kinds = {pa[0], pb[0]}
    if kinds == {"finite"}:
        pts_a, pts_b = pa[1], pb[1]
        d1 = _directed_finite(pts_a, lambda x: _dist_point_finite(x, pts_b))
        d2 = _directed_finite(pts_b, lambda x: _dist_point_finite(x, pts_a))
        return max(d1, d2)
    if kinds == {"finite", "iu"} or kinds == {"iu"}:
        profs = {pa[0]: pa, pb[0]: pb}
        if kinds == {"iu"}:
            ua, ub = pa[1], pb[1]
            mids_b = _gap_midpoints(ub)
            mids_a = _gap_midpoints(ua)
            d1 = _directed_iu_to_any(ua, lambda x: _dist_point_iu(x, ub), mids_b)
            d2 = _directed_iu_to_any(ub, lambda x: _dist_point_iu(x, ua), mids_a)
            return max(d1, d2)
        pts = profs["finite"][1]
        u = profs["iu"][1]
        mids = [(p + q) / 2 for p, q in zip(pts, pts[1:])]
        d1 = _directed_finite(pts, lambda x: _dist_point_iu(x, u))
        d2 = _directed_iu_to_any(u, lambda x: _dist_point_finite(x, pts), mids)
        return max(d1, d2)
    if kinds == {"cantor", "finite"}:
        profs = {pa[0]: pa, pb[0]: pb}
        alpha, beta = profs["cantor"][1], profs["cantor"][2]
        pts = profs["finite"][1]
        # map the finite set into base cantor coordinates
        base_pts = sorted((p - beta) / alpha for p in pts)
        scale = abs(alpha)
        d1 = scale * max(_dist_point_cantor(p) for p in base_pts)
        # directed cantor -> finite: candidates are cantor extremes around the
        # tent peaks (midpoints) plus the cantor endpoints 0 and 1
        cands = [Fraction(0), Fraction(1)]
        for p, q in zip(base_pts, base_pts[1:]):
            m = (p + q) / 2
            lo = _cantor_max_le(m)
            hi = _cantor_min_ge(m)
            if lo is not None:
                cands.append(lo)
            if hi is not None:
                cands.append(hi)
        d2 = scale * max(_dist_point_finite(c, base_pts) for c in cands)
        return max(d1, d2)
    raise Unsupported("hausdorff distance not implemented for this shape pair")


def _gap_midpoints(u) -> list[Rat]:
    mids = []
    for p, q in zip(u.parts, u.parts[1:]):
        mids.append((p.hi + q.lo) / 2)
    return mids
