"""Exactly evaluable null-term functions for parametric sequences.

A TermFun is a finite sum of primitive decaying terms over an integer index
n >= start:

    c / n^p          (p >= 1 integer, c nonzero rational)
    c * r^n          (0 < r < 1 rational)
    c * r^(s^n)      (0 < r < 1 rational, s >= 2 integer)

Every TermFun tends to 0, and beyond a computable index it has constant sign
and strictly decreasing absolute value.  The certificates produced here
(monotone index, gap envelope, resolution indices) are exact: a returned
index is guaranteed valid for every larger index, which is what lets the
set-level algorithms cover infinite tails with finitely many checks.

Deep geometric exponents are never materialized blindly: a term whose exact
value would need more than TRACK_BITS bits is carried as a symbolic "tiny"
with a certified magnitude bound, and comparisons resolve it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import Rat
from .errors import SemanticError

# A term is evaluated exactly while its exponent cost stays below this many
# bits; beyond that it is tracked symbolically with a bound of r^BOUND_CAP.
TRACK_BITS = 16384
BOUND_CAP = 4096

_SEARCH_CAP = 1 << 44


@dataclass(frozen=True)
class PowTerm:
    c: Rat
    p: int

    def __post_init__(self):
        if self.c == 0:
            raise SemanticError("zero coefficient in power term")
        if not (1 <= self.p <= 1000):
            raise SemanticError(f"power exponent out of range: {self.p}")


@dataclass(frozen=True)
class GeoTerm:
    c: Rat
    r: Rat

    def __post_init__(self):
        if self.c == 0:
            raise SemanticError("zero coefficient in geometric term")
        if not (0 < self.r < 1):
            raise SemanticError(f"geometric ratio must be in (0,1): {self.r}")


@dataclass(frozen=True)
class DoubleGeoTerm:
    c: Rat
    r: Rat
    s: int

    def __post_init__(self):
        if self.c == 0:
            raise SemanticError("zero coefficient in double-geometric term")
        if not (0 < self.r < 1):
            raise SemanticError(f"ratio must be in (0,1): {self.r}")
        if not (2 <= self.s <= 64):
            raise SemanticError(f"inner base out of range: {self.s}")


Term = PowTerm | GeoTerm | DoubleGeoTerm


def _dominance_key(t: Term):
    # Slower-decaying terms sort first.
    if isinstance(t, PowTerm):
        return (0, t.p, Fraction(0))
    if isinstance(t, GeoTerm):
        return (1, 0, -t.r)
    return (2, t.s, -t.r)


def _merge_terms(terms) -> tuple[Term, ...]:
    merged: dict = {}
    order: list = []
    for t in terms:
        if isinstance(t, PowTerm):
            key = ("p", t.p)
        elif isinstance(t, GeoTerm):
            key = ("g", t.r)
        else:
            key = ("d", t.r, t.s)
        if key in merged:
            merged[key] = merged[key] + t.c
        else:
            merged[key] = t.c
            order.append((key, t))
    out = []
    for key, proto in order:
        c = merged[key]
        if c == 0:
            continue
        if isinstance(proto, PowTerm):
            out.append(PowTerm(c, proto.p))
        elif isinstance(proto, GeoTerm):
            out.append(GeoTerm(c, proto.r))
        else:
            out.append(DoubleGeoTerm(c, proto.r, proto.s))
    return tuple(out)


@dataclass(frozen=True)
class TermFun:
    terms: tuple[Term, ...]
    start: int = 1

    def __post_init__(self):
        if not self.terms:
            raise SemanticError("term function must keep at least one term")
        if self.start < 1:
            raise SemanticError("start index must be >= 1")


def term_fun(terms, start: int = 1) -> TermFun:
    """Build a TermFun, merging same-shape terms and dropping cancellations."""
    merged = _merge_terms(terms)
    return TermFun(merged, start)


def tf_scale(tf: TermFun, alpha: Rat) -> TermFun:
    if alpha == 0:
        raise SemanticError("scaling a term function by zero")
    return TermFun(tuple(_scaled(t, alpha) for t in tf.terms), tf.start)


def _scaled(t: Term, alpha: Rat) -> Term:
    if isinstance(t, PowTerm):
        return PowTerm(t.c * alpha, t.p)
    if isinstance(t, GeoTerm):
        return GeoTerm(t.c * alpha, t.r)
    return DoubleGeoTerm(t.c * alpha, t.r, t.s)


def tf_with_start(tf: TermFun, start: int) -> TermFun:
    return TermFun(tf.terms, max(start, 1))


def tf_add(a: TermFun, b: TermFun) -> TermFun:
    return term_fun(a.terms + b.terms, max(a.start, b.start))


# ---------------------------------------------------------------------------
# scaled-power comparison without materialization


def _log2_rat(x: Fraction) -> float:
    n, d = x.numerator, x.denominator
    if n <= 0:
        raise ValueError("log of nonpositive value")
    try:
        return math.log2(n) - math.log2(d)
    except OverflowError:  # pragma: no cover - ints beyond float log range
        return (n.bit_length() - d.bit_length()) * 1.0


def cmp_pow_frac(r: Fraction, e: int, q: Fraction) -> int:
    """Sign of r**e - q for 0 < r < 1, e >= 1, without building r**e blindly."""
    if q <= 0:
        return 1
    if q >= 1:
        return -1  # 0 < r**e < 1 <= q
    a, b = r.numerator, r.denominator
    c, d = q.numerator, q.denominator
    cost = e * (a.bit_length() + b.bit_length())
    if cost <= TRACK_BITS:
        lhs = a**e * d
        rhs = c * b**e
        return (lhs > rhs) - (lhs < rhs)
    # log-domain comparison with a certified margin
    if e < (1 << 50):
        log_r = math.log1p((a - b) / b) / math.log(2) if abs(a - b) * 8 < b else _log2_rat(r)
        lhs_f = e * log_r
        rhs_f = _log2_rat(q)
        err = 1e-12 * (abs(lhs_f) + abs(rhs_f) + e * 1e-4 + 4)
        if lhs_f > rhs_f + err:
            return 1
        if lhs_f < rhs_f - err:
            return -1
        if cost <= (1 << 24):
            lhs = a**e * d
            rhs = c * b**e
            return (lhs > rhs) - (lhs < rhs)
        raise ArithmeticError("power comparison needs escalation beyond budget")
    # e is astronomically large: r**e sits below any q of moderate size.
    qbits = c.bit_length() + d.bit_length() + 4
    gap = Fraction(b - a, b)  # log2(1/r) >= 1 - r = gap
    if e * gap > 2 * qbits + 8:
        return -1
    raise ArithmeticError("power comparison needs escalation beyond budget")


@lru_cache(maxsize=None)
def _pow_cached(r: Fraction, e: int) -> Fraction:
    return r**e


def _term_exponent(t: Term, n: int) -> int:
    if isinstance(t, GeoTerm):
        return n
    assert isinstance(t, DoubleGeoTerm)
    return t.s**n


def _term_cost_bits(t: Term, n: int) -> int:
    if isinstance(t, PowTerm):
        return t.p * max(n.bit_length(), 1)
    base_bits = t.r.numerator.bit_length() + t.r.denominator.bit_length()
    if isinstance(t, GeoTerm):
        return n * base_bits
    # s**n itself may be huge; bound its size before building it
    if (t.s.bit_length() - 1) * n + 1 > 64:
        return 1 << 62
    return (t.s**n) * base_bits


def _term_value(t: Term, n: int) -> Fraction:
    if isinstance(t, PowTerm):
        return t.c / Fraction(n**t.p)
    if isinstance(t, GeoTerm):
        return t.c * _pow_cached(t.r, n)
    return t.c * _pow_cached(t.r, t.s**n)


def _term_value_float(t: Term, n: int) -> float:
    if isinstance(t, PowTerm):
        return float(t.c) / float(n) ** t.p
    lr = _log2_rat(t.r)
    e = n if isinstance(t, GeoTerm) else float(t.s) ** n
    mag = e * lr
    if mag < -1060:
        return 0.0
    return float(t.c) * 2.0**mag


@dataclass(frozen=True)
class TinyTerm:
    """A term too deep to materialize, with a certified magnitude bound."""

    c: Rat
    r: Rat
    exponent: int
    bound: Rat  # |value| <= bound, and value != 0 with sign(value) = sign(c)


def tf_value_parts(tf: TermFun, n: int) -> tuple[Fraction, tuple[TinyTerm, ...]]:
    """Exact main part plus symbolic tinies for untractable exponents."""
    main = Fraction(0)
    tinies = []
    for t in tf.terms:
        if isinstance(t, PowTerm) or _term_cost_bits(t, n) <= TRACK_BITS:
            main += _term_value(t, n)
        else:
            e = _term_exponent(t, n)
            bound = abs(t.c) * _pow_cached(t.r, BOUND_CAP)
            tinies.append(TinyTerm(t.c, t.r, e, bound))
    return main, tuple(tinies)


def tf_value(tf: TermFun, n: int) -> Fraction:
    """The value at n; exact unless a tracked tiny was dropped (see parts)."""
    return tf_value_parts(tf, n)[0]


def tf_value_float(tf: TermFun, n: int) -> float:
    return sum(_term_value_float(t, n) for t in tf.terms)


def parts_cmp(main: Fraction, tinies, q: Fraction) -> int:
    """Exact sign of (main + sum of tinies) - q."""
    diff = main - q
    if not tinies:
        return (diff > 0) - (diff < 0)
    total_bound = sum((t.bound for t in tinies), Fraction(0))
    if diff > total_bound:
        return 1
    if diff < -total_bound:
        return -1
    if diff == 0:
        return _tinies_sign(tinies)
    # |diff| <= bound but nonzero: compare the tiny sum against -diff exactly.
    if len(tinies) == 1:
        t = tinies[0]
        target = -diff / t.c
        if target <= 0:
            return 1 if t.c > 0 else -1
        return cmp_pow_frac(t.r, t.exponent, target) * (1 if t.c > 0 else -1)
    raise ArithmeticError("ambiguous comparison with multiple tiny tails")


def tiny_signature(tinies) -> tuple:
    """Hashable exact identity of a symbolic tail sum."""
    return tuple(sorted((t.c, t.r, t.exponent) for t in tinies))


def tf_cmp(tf: TermFun, n: int, q: Fraction) -> int:
    """Exact sign of f(n) - q, resolving symbolic tinies when needed."""
    main, tinies = tf_value_parts(tf, n)
    return parts_cmp(main, tinies, q)


def _tinies_sign(tinies) -> int:
    if len(tinies) == 1:
        return 1 if tinies[0].c > 0 else -1
    # the dominant tiny decides; compare in log space with a safety margin
    mags = sorted(
        ((_log2_rat(abs(t.c)) + t.exponent * _log2_rat(t.r), t) for t in tinies),
        key=lambda p: p[0],
        reverse=True,
    )
    top_mag, top = mags[0]
    if top_mag > mags[1][0] + 2 + math.log2(len(tinies)):
        return 1 if top.c > 0 else -1
    raise ArithmeticError("ambiguous sign of stacked tiny tails")


# ---------------------------------------------------------------------------
# dominance certificates


def _dominant(tf: TermFun) -> Term:
    return min(tf.terms, key=_dominance_key)


def tf_eventual_sign(tf: TermFun) -> int:
    return 1 if _dominant(tf).c > 0 else -1


def _persistent_once(check, n0: int) -> int:
    """Smallest-found n >= n0 where check(n) holds; check is upward-closed."""
    n = max(n0, 1)
    while not check(n):
        n *= 2
        if n > _SEARCH_CAP:
            raise SemanticError("certificate search exceeded depth budget")
    lo, hi = max(n // 2, n0), n
    while lo < hi:
        mid = (lo + hi) // 2
        if check(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _ratio_persistent_index(dom: Term, oth: Term) -> int:
    """Index from which |oth(n)|/|dom(n)| and the matching difference-envelope
    ratio are both non-increasing in n.  Case analysis over term shapes; each
    condition below is upward-closed in n."""
    if isinstance(dom, PowTerm):
        if isinstance(oth, PowTerm):
            return 1  # ratio is k * n^(p1-p2), p2 > p1: monotone everywhere
        r = oth.r
        p1 = dom.p + 1
        if isinstance(oth, GeoTerm):
            # need r * ((n+1)/n)^(p1+1) <= 1 from some n on
            def ok(n):
                return r * Fraction(n + 1, n) ** (p1 + 1) <= 1

            return _persistent_once(ok, 1)

        def ok(n):
            gap = oth.s**n * (oth.s - 1)
            return cmp_pow_frac(r, gap, Fraction(n, n + 1) ** (p1 + 1)) <= 0

        return _persistent_once(ok, 1)
    if isinstance(dom, GeoTerm):
        if isinstance(oth, GeoTerm):
            return 1  # exact geometric ratio
        assert isinstance(oth, DoubleGeoTerm)

        def ok(n):
            gap = oth.s**n * (oth.s - 1)
            return cmp_pow_frac(oth.r, gap, dom.r) <= 0

        return _persistent_once(ok, 1)
    assert isinstance(dom, DoubleGeoTerm)
    assert isinstance(oth, DoubleGeoTerm)
    if oth.s == dom.s:
        return 1  # ratio r2^(s^n)/r1^(s^n) with r2 < r1: decreasing
    ld = -_log2_rat(dom.r)
    lo = -_log2_rat(oth.r)

    def ok(n):
        # oth's log-decay per step must outrun dom's from n on
        return (oth.s**n) * (oth.s - 1) * lo >= (dom.s**n) * (dom.s - 1) * ld * 1.0001

    return _persistent_once(ok, 1)


def _val_ratio_le(dom: Term, oth: Term, n: int, q: Fraction) -> bool:
    """|oth(n)| <= q * |dom(n)|, exactly, without materializing deep powers."""
    cd, co = abs(dom.c), abs(oth.c)
    if isinstance(dom, PowTerm):
        dom_val_inv = Fraction(n**dom.p) / cd  # 1/|dom(n)|
        if isinstance(oth, PowTerm):
            return co * Fraction(n**dom.p) <= q * cd * Fraction(n**oth.p)
        target = q / (co * dom_val_inv)
        return cmp_pow_frac(oth.r, _term_exponent(oth, n), target) <= 0
    if isinstance(oth, PowTerm):
        return False  # a power term can never be dominated-small vs geo
    ed, eo = _term_exponent(dom, n), _term_exponent(oth, n)
    # co * ro^eo <= q * cd * rd^ed
    if oth.r == dom.r and isinstance(dom, (GeoTerm, DoubleGeoTerm)):
        if eo >= ed:
            return co * _safe_ratio_pow(oth.r, eo - ed) <= q * cd
    lhs = _log2_rat(co) + eo * _log2_rat(oth.r)
    rhs = _log2_rat(q * cd) + ed * _log2_rat(dom.r)
    err = 1e-9 * (abs(lhs) + abs(rhs) + 8)
    if lhs < rhs - err:
        return True
    if lhs > rhs + err:
        return False
    if _term_cost_bits(oth, n) <= TRACK_BITS and _term_cost_bits(dom, n) <= TRACK_BITS:
        return abs(_term_value(oth, n)) <= q * abs(_term_value(dom, n))
    raise ArithmeticError("ratio comparison needs escalation beyond budget")


def _safe_ratio_pow(r: Fraction, e: int) -> Fraction:
    if e * (r.numerator.bit_length() + r.denominator.bit_length()) > TRACK_BITS:
        return Fraction(0)  # vanishingly small; any upper use stays valid
    return _pow_cached(r, e)


def _dval_hi(t: Term, n: int) -> Fraction:
    """Upper bound on |t(n) - t(n+1)|, valid and non-increasing for n >= 1."""
    if isinstance(t, PowTerm):
        return abs(t.c) * t.p / Fraction(n ** (t.p + 1))
    if isinstance(t, GeoTerm):
        return abs(t.c) * (1 - t.r) * _pow_cached(t.r, n)
    return abs(t.c) * _pow_cached(t.r, min(t.s**n, BOUND_CAP))


def _dval_lo(t: Term, n: int) -> Fraction:
    """Lower bound on |t(n) - t(n+1)| at the specific index n."""
    if isinstance(t, PowTerm):
        return abs(t.c) * t.p / Fraction((n + 1) ** (t.p + 1))
    if isinstance(t, GeoTerm):
        return abs(t.c) * (1 - t.r) * _pow_cached(t.r, n)
    e = t.s**n
    if e * 4 > TRACK_BITS:
        return Fraction(0)
    return abs(t.c) * (1 - t.r ** (t.s - 1)) * _pow_cached(t.r, e)


def _dratio_le(dom: Term, oth: Term, n: int, q: Fraction) -> bool:
    """Difference-envelope ratio test: dval_hi(oth,n) <= q * dval_lo(dom,n)."""
    cd, co = abs(dom.c), abs(oth.c)
    if isinstance(dom, PowTerm):
        lo_inv = Fraction((n + 1) ** (dom.p + 1)) / (cd * dom.p)
        if isinstance(oth, PowTerm):
            return co * oth.p * Fraction((n + 1) ** (dom.p + 1)) <= q * cd * dom.p * Fraction(
                n ** (oth.p + 1)
            )
        scale = co if isinstance(oth, DoubleGeoTerm) else co * (1 - oth.r)
        target = q / (scale * lo_inv)
        return cmp_pow_frac(oth.r, _term_exponent(oth, n), target) <= 0
    if isinstance(oth, PowTerm):
        return False
    lo_d = _dval_lo(dom, n)
    if lo_d == 0:
        raise ArithmeticError("difference envelope vanished below budget")
    scale = co if isinstance(oth, DoubleGeoTerm) else co * (1 - oth.r)
    target = q * lo_d / scale
    return cmp_pow_frac(oth.r, _term_exponent(oth, n), target) <= 0


@lru_cache(maxsize=None)
def tf_monotone_index(tf: TermFun) -> int:
    """Index M >= start from which f has constant sign, strictly decreasing
    absolute value, and the dominant term controls values and gaps."""
    dom = _dominant(tf)
    others = [t for t in tf.terms if t is not dom]
    if not others:
        return tf.start
    base = max([tf.start] + [_ratio_persistent_index(dom, o) for o in others])
    k = len(others)
    q = Fraction(1, 2 * k)

    def ok(n):
        return all(
            _val_ratio_le(dom, o, n, q) and _dratio_le(dom, o, n, q) for o in others
        )

    return _persistent_once(ok, base)


def tf_gap_bound(tf: TermFun, n: int) -> Fraction:
    """Monotone upper bound on |f(m) - f(m+1)| for all m >= n >= M."""
    return Fraction(3, 2) * _dval_hi(_dominant(tf), n)


def tf_abs_upper(tf: TermFun, n: int) -> Fraction:
    """Monotone upper bound on |f(m)| for all m >= n >= M."""
    dom = _dominant(tf)
    if isinstance(dom, PowTerm):
        mag = abs(dom.c) / Fraction(n**dom.p)
    else:
        mag = abs(dom.c) * _pow_cached(dom.r, min(_term_exponent(dom, n), BOUND_CAP))
    return Fraction(3, 2) * mag


def _gap_bound_lt(tf: TermFun, n: int, eps: Fraction) -> bool:
    dom = _dominant(tf)
    target = Fraction(2, 3) * eps
    if isinstance(dom, PowTerm):
        return abs(dom.c) * dom.p < target * Fraction(n ** (dom.p + 1))
    scale = abs(dom.c) if isinstance(dom, DoubleGeoTerm) else abs(dom.c) * (1 - dom.r)
    if scale < target:
        return True
    return cmp_pow_frac(dom.r, _term_exponent(dom, n), target / scale) < 0


def _abs_upper_lt(tf: TermFun, n: int, eps: Fraction) -> bool:
    dom = _dominant(tf)
    target = Fraction(2, 3) * eps
    if isinstance(dom, PowTerm):
        return abs(dom.c) < target * Fraction(n**dom.p)
    if abs(dom.c) < target:
        return True
    return cmp_pow_frac(dom.r, _term_exponent(dom, n), target / abs(dom.c)) < 0


def tf_resolution_index(tf: TermFun, eps: Fraction) -> int:
    """Smallest-found R >= M with |f(n) - f(n+1)| < eps for every n >= R."""
    if eps <= 0:
        raise ValueError("resolution threshold must be positive")
    m = tf_monotone_index(tf)
    return _persistent_once(lambda n: _gap_bound_lt(tf, n, eps), m)


def tf_abs_below_index(tf: TermFun, eps: Fraction) -> int:
    """Smallest-found R >= M with |f(n)| < eps for every n >= R."""
    if eps <= 0:
        raise ValueError("threshold must be positive")
    m = tf_monotone_index(tf)
    return _persistent_once(lambda n: _abs_upper_lt(tf, n, eps), m)


def tf_find_value(tf: TermFun, v: Fraction, n_lo: int | None = None) -> int | None:
    """Index n in the monotone tail with f(n) == v, or None.

    Only searches n >= max(n_lo, monotone index); callers check any earlier
    prefix directly.
    """
    m = tf_monotone_index(tf)
    lo = max(m, n_lo if n_lo is not None else m)
    sign = tf_eventual_sign(tf)
    if v == 0 or (v > 0) != (sign > 0):
        return None
    c0 = tf_cmp(tf, lo, v)
    if c0 == 0:
        return lo
    # |f| decreasing: for positive tails f(lo) < v means v unattainable.
    if (sign > 0 and c0 < 0) or (sign < 0 and c0 > 0):
        return None
    hi = lo
    step = 1
    while True:
        hi = hi + step
        step *= 2
        if hi > _SEARCH_CAP:
            return None
        c = tf_cmp(tf, hi, v)
        if c == 0:
            return hi
        if (sign > 0 and c < 0) or (sign < 0 and c > 0):
            break
    a, b = lo, hi
    while a + 1 < b:
        mid = (a + b) // 2
        c = tf_cmp(tf, mid, v)
        if c == 0:
            return mid
        if (sign > 0 and c > 0) or (sign < 0 and c < 0):
            a = mid
        else:
            b = mid
    return None


def tf_single_pow(tf: TermFun) -> PowTerm | None:
    if len(tf.terms) == 1 and isinstance(tf.terms[0], PowTerm):
        return tf.terms[0]
    return None


def tf_single_geo(tf: TermFun) -> GeoTerm | None:
    if len(tf.terms) == 1 and isinstance(tf.terms[0], GeoTerm):
        return tf.terms[0]
    return None
