"""Symbolic bounded subsets of the reals.

The representable class is fixed: finite sets, one- and two-parameter
decaying sequences, intervals, a countable dense filler (realized as the
dyadic rationals of an open interval), the middle-thirds Cantor set, affine
images, and finite unions.  This class contains the worked examples the
library needs to reproduce and is closed under union, affine maps, and the
derived-set operation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .core import Interval, Rat, rat
from .errors import BudgetExceeded, SemanticError, Uncountable
from .terms import (
    TermFun,
    tf_abs_below_index,
    tf_abs_upper,
    tf_eventual_sign,
    tf_find_value,
    tf_monotone_index,
    tf_scale,
    tf_value,
    tf_value_float,
)

_PREFIX_CAP = 200_000


class SetExpr:
    """Base class for set expression nodes; all nodes are immutable."""

    __slots__ = ()


@dataclass(frozen=True)
class Finite(SetExpr):
    points: tuple[Rat, ...]

    def __post_init__(self):
        if len(set(self.points)) != len(self.points):
            raise SemanticError("finite set literal has repeated points")


@dataclass(frozen=True)
class Seq(SetExpr):
    """The point set {limit + tail(n) : n >= tail.start}."""

    limit: Rat
    tail: TermFun


@dataclass(frozen=True)
class Seq2(SetExpr):
    """The point set {limit + outer(n) + inner(k) : n, k}.

    Both parts must approach zero from the same side, which keeps point
    membership decidable; collisions between index pairs are allowed and
    collapse in the set semantics.
    """

    limit: Rat
    outer: TermFun
    inner: TermFun


@dataclass(frozen=True)
class IntervalSet(SetExpr):
    iv: Interval


@dataclass(frozen=True)
class Dense(SetExpr):
    """A fixed countable dense subset of (lo, hi) with measure zero.

    Canonical realization: the dyadic rationals strictly inside (lo, hi).
    Every implemented mean depends only on its closure and measure, so the
    realization is observable only through enumeration order.
    """

    lo: Rat
    hi: Rat

    def __post_init__(self):
        if self.lo >= self.hi:
            raise SemanticError("dense filler needs a nondegenerate interval")


@dataclass(frozen=True)
class Cantor(SetExpr):
    """The standard middle-thirds Cantor set in [0, 1]."""


@dataclass(frozen=True)
class Affine(SetExpr):
    """The image {alpha * x + beta : x in inner}."""

    alpha: Rat
    beta: Rat
    inner: SetExpr

    def __post_init__(self):
        if self.alpha == 0:
            raise SemanticError("affine map must be invertible (alpha != 0)")


@dataclass(frozen=True)
class Union(SetExpr):
    parts: tuple[SetExpr, ...]

    def __post_init__(self):
        if not self.parts:
            raise SemanticError("union needs at least one part")


def finite(*points) -> Finite:
    return Finite(tuple(rat(p) for p in points))


def _tf_prefix_values(tf: TermFun) -> list[tuple[int, Fraction]]:
    m = tf_monotone_index(tf)
    if m - tf.start > _PREFIX_CAP:
        raise SemanticError("sequence prefix before the monotone tail is too long")
    return [(n, tf_value(tf, n)) for n in range(tf.start, m + 1)]


def _validate_tail(tf: TermFun) -> None:
    """Sequence points must be pairwise distinct and never hit the limit."""
    prefix = _tf_prefix_values(tf)
    seen: dict[Fraction, int] = {}
    for n, v in prefix:
        if v == 0:
            raise SemanticError(f"sequence value at n={n} equals its limit")
        if v in seen:
            raise SemanticError(f"sequence values collide at n={seen[v]} and n={n}")
        seen[v] = n
    m = tf_monotone_index(tf)
    sign = tf_eventual_sign(tf)
    tail_top = tf_abs_upper(tf, m + 1)
    for n, v in prefix[:-1]:
        if (v > 0) == (sign > 0) and abs(v) <= tail_top:
            hit = tf_find_value(tf, v, m + 1)
            if hit is not None and hit != n:
                raise SemanticError(
                    f"sequence values collide at n={n} and n={hit}"
                )


def seq(limit, tail: TermFun) -> Seq:
    """Validated sequence-set constructor."""
    _validate_tail(tail)
    return Seq(rat(limit), tail)


def _sign_pure(tf: TermFun) -> bool:
    sign = tf_eventual_sign(tf)
    return all((v > 0) == (sign > 0) and v != 0 for _, v in _tf_prefix_values(tf))


def seq2(limit, outer: TermFun, inner: TermFun) -> Seq2:
    """Validated double-sequence constructor."""
    _validate_tail(outer)
    _validate_tail(inner)
    if not (_sign_pure(outer) and _sign_pure(inner)):
        raise SemanticError("double sequence parts must keep a constant sign")
    if tf_eventual_sign(outer) != tf_eventual_sign(inner):
        raise SemanticError("double sequence parts must approach from one side")
    return Seq2(rat(limit), outer, inner)


def union(*parts: SetExpr) -> SetExpr:
    flat: list[SetExpr] = []
    for p in parts:
        if isinstance(p, Union):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return Union(tuple(flat))


# ---------------------------------------------------------------------------
# affine normalization


def normalize_affine(s: SetExpr) -> SetExpr:
    """Push affine maps to the leaves and flatten unions.

    The point set is unchanged, except that a mapped dense filler is
    re-anchored to the dyadics of the image interval (same closure and
    measure, different enumeration order).
    """
    return _push_affine(s, Fraction(1), Fraction(0))


def _push_affine(s: SetExpr, a: Rat, b: Rat) -> SetExpr:
    if isinstance(s, Affine):
        return _push_affine(s.inner, a * s.alpha, a * s.beta + b)
    if isinstance(s, Union):
        parts = []
        for p in s.parts:
            q = _push_affine(p, a, b)
            if isinstance(q, Union):
                parts.extend(q.parts)
            else:
                parts.append(q)
        return Union(tuple(parts))
    if isinstance(s, Finite):
        return Finite(tuple(a * x + b for x in s.points))
    if isinstance(s, Seq):
        return Seq(a * s.limit + b, tf_scale(s.tail, a))
    if isinstance(s, Seq2):
        return Seq2(a * s.limit + b, tf_scale(s.outer, a), tf_scale(s.inner, a))
    if isinstance(s, IntervalSet):
        iv = s.iv.scale(a).shift(b) if a != 1 else s.iv.shift(b)
        return IntervalSet(iv)
    if isinstance(s, Dense):
        lo, hi = a * s.lo + b, a * s.hi + b
        if lo > hi:
            lo, hi = hi, lo
        return Dense(lo, hi)
    if isinstance(s, Cantor):
        if a == 1 and b == 0:
            return s
        return Affine(a, b, s)
    raise TypeError(f"unknown node {s!r}")


def affine_leaves(s: SetExpr):
    """Leaves of the normalized expression (Cantor kept under its map)."""
    s = normalize_affine(s)
    if isinstance(s, Union):
        return list(s.parts)
    return [s]


# ---------------------------------------------------------------------------
# bounds


def tf_value_bounds(tf: TermFun) -> tuple[Rat, Rat, bool, bool]:
    """inf/sup with attainment flags for the value set {tail(n) : n}."""
    prefix = _tf_prefix_values(tf)
    vals = [v for _, v in prefix]
    lo, hi = min(vals), max(vals)
    lo_att = hi_att = True
    if lo > 0:
        lo, lo_att = Fraction(0), False
    if hi < 0:
        hi, hi_att = Fraction(0), False
    return lo, hi, lo_att, hi_att


def bounds(s: SetExpr) -> tuple[Rat, Rat, bool, bool]:
    """Exact infimum and supremum of the point set with attainment flags."""
    if isinstance(s, Finite):
        if not s.points:
            raise SemanticError("bounds of an empty set")
        return min(s.points), max(s.points), True, True
    if isinstance(s, Seq):
        lo, hi, lo_att, hi_att = tf_value_bounds(s.tail)
        return s.limit + lo, s.limit + hi, lo_att, hi_att
    if isinstance(s, Seq2):
        olo, ohi, olo_a, ohi_a = tf_value_bounds(s.outer)
        ilo, ihi, ilo_a, ihi_a = tf_value_bounds(s.inner)
        return (
            s.limit + olo + ilo,
            s.limit + ohi + ihi,
            olo_a and ilo_a,
            ohi_a and ihi_a,
        )
    if isinstance(s, IntervalSet):
        return s.iv.lo, s.iv.hi, not s.iv.lo_open, not s.iv.hi_open
    if isinstance(s, Dense):
        return s.lo, s.hi, False, False
    if isinstance(s, Cantor):
        return Fraction(0), Fraction(1), True, True
    if isinstance(s, Affine):
        lo, hi, lo_a, hi_a = bounds(s.inner)
        if s.alpha > 0:
            return s.alpha * lo + s.beta, s.alpha * hi + s.beta, lo_a, hi_a
        return s.alpha * hi + s.beta, s.alpha * lo + s.beta, hi_a, lo_a
    if isinstance(s, Union):
        parts = [bounds(p) for p in s.parts]
        lo = min(p[0] for p in parts)
        hi = max(p[1] for p in parts)
        lo_a = any(p[2] for p in parts if p[0] == lo)
        hi_a = any(p[3] for p in parts if p[1] == hi)
        return lo, hi, lo_a, hi_a
    raise TypeError(f"unknown node {s!r}")


# ---------------------------------------------------------------------------
# cardinality structure


def has_uncountable_leaf(s: SetExpr) -> bool:
    if isinstance(s, IntervalSet):
        return not s.iv.is_point()
    if isinstance(s, Cantor):
        return True
    if isinstance(s, Affine):
        return has_uncountable_leaf(s.inner)
    if isinstance(s, Union):
        return any(has_uncountable_leaf(p) for p in s.parts)
    return False


def is_infinite(s: SetExpr) -> bool:
    if isinstance(s, Finite):
        return False
    if isinstance(s, IntervalSet):
        return not s.iv.is_point()
    if isinstance(s, Affine):
        return is_infinite(s.inner)
    if isinstance(s, Union):
        return any(is_infinite(p) for p in s.parts)
    return True


def is_countably_infinite(s: SetExpr) -> bool:
    return is_infinite(s) and not has_uncountable_leaf(s)


# ---------------------------------------------------------------------------
# membership


def _dyadic_in(lo: Rat, hi: Rat, x: Rat) -> bool:
    if not (lo < x < hi):
        return False
    d = x.denominator
    return d & (d - 1) == 0


def _cantor_contains(x: Rat) -> bool:
    if x < 0 or x > 1:
        return False
    seen = set()
    while True:
        if x == 0 or x == 1:
            return True
        if x in seen:
            return True  # periodic ternary orbit that never enters a gap
        seen.add(x)
        x *= 3
        if x > 2:
            x -= 2
        elif x >= 1:
            return False  # fell into a removed middle third
        if len(seen) > 10_000:
            raise BudgetExceeded("cantor membership orbit too long")


def _seq_value_index(limit: Rat, tf: TermFun, x: Rat) -> int | None:
    t = x - limit
    if t == 0:
        return None
    for n, v in _tf_prefix_values(tf):
        if v == t:
            return n
    m = tf_monotone_index(tf)
    return tf_find_value(tf, t, m + 1)


def contains_point(s: SetExpr, x: Rat) -> bool:
    """Exact membership of a rational point."""
    if isinstance(s, Finite):
        return x in s.points
    if isinstance(s, Seq):
        return _seq_value_index(s.limit, s.tail, x) is not None
    if isinstance(s, Seq2):
        return _seq2_contains(s, x)
    if isinstance(s, IntervalSet):
        return s.iv.contains(x)
    if isinstance(s, Dense):
        return _dyadic_in(s.lo, s.hi, x)
    if isinstance(s, Cantor):
        return _cantor_contains(x)
    if isinstance(s, Affine):
        return contains_point(s.inner, (x - s.beta) / s.alpha)
    if isinstance(s, Union):
        return any(contains_point(p, x) for p in s.parts)
    raise TypeError(f"unknown node {s!r}")


def _seq2_contains(s: Seq2, x: Rat) -> bool:
    """x = limit + outer(n) + inner(k)?  In any solution one of the two
    parts is at least half the offset, and values above that threshold are
    few, so both half-scans stay short."""
    t = x - s.limit
    sign = tf_eventual_sign(s.outer)
    if t == 0 or (t > 0) != (sign > 0):
        return False
    if sign < 0:
        t = -t
        outer, inner = tf_scale(s.outer, -1), tf_scale(s.inner, -1)
    else:
        outer, inner = s.outer, s.inner
    half = t / 2
    for big, small in ((outer, inner), (inner, outer)):
        cutoff = tf_abs_below_index(big, half)
        if cutoff - big.start > 200_000:
            raise BudgetExceeded("double-sequence membership scan too long")
        for n in range(big.start, cutoff):
            v = tf_value(big, n)
            if v < half:
                continue
            rem = t - v
            if rem <= 0:
                continue
            if _seq_value_index(Fraction(0), small, rem) is not None:
                return True
    return False


# ---------------------------------------------------------------------------
# enumeration


def _gen_finite(s: Finite):
    yield from s.points


def _gen_seq(s: Seq):
    from .terms import tf_value_parts

    n = s.tail.start
    while True:
        main, tinies = tf_value_parts(s.tail, n)
        if tinies:
            raise BudgetExceeded(
                "enumeration reached values too deep to materialize exactly"
            )
        yield s.limit + main
        n += 1


def _gen_seq2(s: Seq2):
    for d in itertools.count(0):
        for i in range(d + 1):
            n = s.outer.start + d - i
            k = s.inner.start + i
            yield s.limit + tf_value(s.outer, n) + tf_value(s.inner, k)


def _gen_dense(s: Dense):
    # level 0: integers; level j >= 1: odd numerators over 2^j (no repeats)
    for j in itertools.count(0):
        den = 1 << j
        m = (s.lo * den).__floor__() + 1
        while Fraction(m, den) < s.hi:
            if j == 0 or m % 2 == 1:
                yield Fraction(m, den)
            m += 1


def _gen_union(parts):
    gens = [iter(g) for g in parts]
    while gens:
        nxt = []
        for g in gens:
            try:
                yield next(g)
                nxt.append(g)
            except StopIteration:
                pass
        gens = nxt


def _gen_affine(s: Affine):
    for v in point_generator(s.inner):
        yield s.alpha * v + s.beta


def point_generator(s: SetExpr):
    """Raw canonical generator; may repeat values across union parts."""
    if isinstance(s, Finite):
        return _gen_finite(s)
    if isinstance(s, Seq):
        return _gen_seq(s)
    if isinstance(s, Seq2):
        return _gen_seq2(s)
    if isinstance(s, Dense):
        return _gen_dense(s)
    if isinstance(s, Affine):
        return _gen_affine(s)
    if isinstance(s, Union):
        return _gen_union([point_generator(p) for p in s.parts])
    if isinstance(s, (IntervalSet, Cantor)):
        raise Uncountable("cannot enumerate a set with an uncountable leaf")
    raise TypeError(f"unknown node {s!r}")


def enumerate_points(s: SetExpr, budget: int) -> list[Rat]:
    """First `budget` elements of the canonical injective enumeration.

    Deterministic, stable under budget extension; duplicates arising across
    union parts or double-sequence collisions are emitted once.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    if has_uncountable_leaf(s):
        raise Uncountable("cannot enumerate a set with an uncountable leaf")
    out: list[Rat] = []
    seen: set[Rat] = set()
    for v in point_generator(s):
        if len(out) >= budget:
            break
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# float sampling (for oracles and fast paths)


def sample_floats(s: SetExpr, budget: int) -> list[float]:
    return [float(v) for v in enumerate_points(s, budget)]


def seq_point_float(s: Seq, n: int) -> float:
    return float(s.limit) + tf_value_float(s.tail, n)


# ---------------------------------------------------------------------------
# rendering (inverse of the parser)


def _fmt_rat(x: Rat) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _fmt_term_mag(t, var: str) -> str:
    """Magnitude part of one term in the expression grammar."""
    from .terms import DoubleGeoTerm, GeoTerm, PowTerm

    mag = abs(t.c)
    coeff = _fmt_rat(mag)
    if isinstance(t, PowTerm):
        base = var if t.p == 1 else f"{var}^{t.p}"
        return f"{coeff}/{base}"
    if isinstance(t, GeoTerm):
        if t.r.numerator == 1:
            return f"{coeff}/{t.r.denominator}^{var}"
        return f"{coeff}*({_fmt_rat(t.r)})^{var}"
    assert isinstance(t, DoubleGeoTerm)
    if t.r.numerator == 1:
        return f"{coeff}/{t.r.denominator}^({t.s}^{var})"
    return f"{coeff}*({_fmt_rat(t.r)})^({t.s}^{var})"


def _fmt_termfun(limit: Rat, tfs: list[tuple[TermFun, str]]) -> str:
    signed: list[tuple[int, str]] = []
    for tf, var in tfs:
        for t in tf.terms:
            signed.append((1 if t.c > 0 else -1, _fmt_term_mag(t, var)))
    if limit != 0 or not signed:
        body = _fmt_rat(limit)
    else:
        sign, text = signed[0]
        body = ("-" if sign < 0 else "") + text
        signed = signed[1:]
    for sign, text in signed:
        body += (" - " if sign < 0 else " + ") + text
    return "{" + body + "}"


def render(s: SetExpr) -> str:
    """Emit the expression grammar; parse(render(s)) reproduces the AST."""
    if isinstance(s, Finite):
        return "{" + ", ".join(_fmt_rat(p) for p in s.points) + "}"
    if isinstance(s, Seq):
        start = s.tail.start
        base = _fmt_termfun(s.limit, [(s.tail, "n")])
        return base if start == 1 else f"{base}[n>={start}]"
    if isinstance(s, Seq2):
        base = _fmt_termfun(s.limit, [(s.outer, "n"), (s.inner, "k")])
        marks = ""
        if s.outer.start != 1:
            marks += f"[n>={s.outer.start}]"
        if s.inner.start != 1:
            marks += f"[k>={s.inner.start}]"
        return base + marks
    if isinstance(s, IntervalSet):
        lb = "(" if s.iv.lo_open else "["
        rb = ")" if s.iv.hi_open else "]"
        return f"{lb}{_fmt_rat(s.iv.lo)}, {_fmt_rat(s.iv.hi)}{rb}"
    if isinstance(s, Dense):
        return f"Q({_fmt_rat(s.lo)}, {_fmt_rat(s.hi)})"
    if isinstance(s, Cantor):
        return "C"
    if isinstance(s, Affine):
        inner = render(s.inner)
        head = f"{_fmt_rat(s.alpha)}*{inner}"
        if s.beta > 0:
            return f"{head} + {_fmt_rat(s.beta)}"
        if s.beta < 0:
            return f"{head} - {_fmt_rat(-s.beta)}"
        return head
    if isinstance(s, Union):
        return " U ".join(render(p) for p in s.parts)
    raise TypeError(f"unknown node {s!r}")
