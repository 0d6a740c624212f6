"""Constructive rearrangements realizing prescribed running averages.

The machinery follows the constructive merge arguments: a single value can
be inserted into a sequence with a known running average without leaving an
epsilon-window past a computable index; a bounded sequence can be absorbed
insert-by-insert along a halving epsilon schedule; and two convergent
sequences can be interleaved with prescribed asymptotic frequencies by
drawing one stream at the first index of every length-gamma block.  All
witness indices are computed from explicit envelope certificates, so the
constructions are deterministic and verifiable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

from .core import Rat
from .errors import Degenerate, NoWitness, OutOfRange, BudgetExceeded
from .setexpr import (
    Dense,
    Finite,
    Seq,
    Seq2,
    SetExpr,
    Union,
    bounds,
    is_countably_infinite,
    normalize_affine,
    point_generator,
    _seq_value_index,
)
from .terms import (
    TermFun,
    tf_abs_below_index,
    tf_add,
    tf_monotone_index,
    tf_value,
    tf_value_float,
    tf_value_parts,
)
from .topology import Ideal, ideal_limits

_EXACT_BITS = 4096


class ValueStream:
    """Single-consumer injective stream with exact bookkeeping.

    Emits floats; the exact value is kept alongside while its size stays
    tractable.  The running sum is maintained exactly while feasible and in
    compensated floating point always.
    """

    def __init__(
        self,
        iterator: Iterator[tuple[float, Rat | None]],
        mean: Rat | None = None,
        elem_rate: Callable[[Fraction], int] | None = None,
        mean_cert: Callable[[Fraction], int] | None = None,
        dev_bound: Rat | None = None,
        contains: Callable[[Rat], bool] | None = None,
        label: str = "",
    ):
        self._it = iterator
        self.mean = mean
        self._elem_rate = elem_rate
        self._mean_cert = mean_cert
        self.dev_bound = dev_bound
        self._contains = contains
        self.label = label
        self.emitted_count = 0
        self.partial_sum_float = 0.0
        self._comp = 0.0
        self.partial_sum_exact: Fraction | None = Fraction(0)

    def elem_rate(self, eps: Fraction) -> int:
        if self._elem_rate is None:
            raise NoWitness(f"stream {self.label!r} has no element rate")
        return self._elem_rate(eps)

    def mean_cert(self, eps: Fraction) -> int:
        if self._mean_cert is None:
            raise NoWitness(f"stream {self.label!r} has no mean certificate")
        return self._mean_cert(eps)

    def contains(self, v: Rat) -> bool:
        if self._contains is None:
            return False
        return self._contains(v)

    def pull(self) -> tuple[float, Rat | None]:
        f, e = next(self._it)
        self.emitted_count += 1
        self.partial_sum_float += f
        if self.partial_sum_exact is not None:
            # exact bookkeeping is kept only while cheap: common denominators
            # of decaying sequences grow exponentially with the prefix length
            if (
                e is not None
                and self.emitted_count <= 2000
                and self.partial_sum_exact.denominator.bit_length() < 6000
            ):
                self.partial_sum_exact = self.partial_sum_exact + e
            else:
                self.partial_sum_exact = None
        return f, e

    def running_mean(self) -> float:
        return self.partial_sum_float / self.emitted_count

    def take(self, count: int) -> list[tuple[int, float, float]]:
        """(index, value, partial mean) rows for the first `count` pulls."""
        rows = []
        for _ in range(count):
            try:
                f, _ = self.pull()
            except StopIteration:
                break
            rows.append((self.emitted_count, f, self.running_mean()))
        return rows


def _exact_if_small(x: Fraction) -> Fraction | None:
    if x.denominator.bit_length() + x.numerator.bit_length() <= _EXACT_BITS:
        return x
    return None


# ---------------------------------------------------------------------------
# element streams from leaves


def _seq_iter(limit: Rat, tf: TermFun, skip_indices: frozenset[int]):
    from .terms import tf_single_pow

    pw = tf_single_pow(tf)
    n = tf.start
    if pw is not None:
        num, den, p = pw.c.numerator, pw.c.denominator, pw.p
        while True:
            if n not in skip_indices:
                v = limit + Fraction(num, den * n**p)
                yield float(v), _exact_if_small(v)
            n += 1
    while True:
        if n not in skip_indices:
            main, tinies = tf_value_parts(tf, n)
            if tinies:
                yield tf_value_float(tf, n) + float(limit), None
            else:
                v = limit + main
                yield float(v), _exact_if_small(v)
        n += 1


def stream_from_seq(leaf: Seq, skip_indices=frozenset(), label="seq") -> ValueStream:
    tf = leaf.tail
    m = tf_monotone_index(tf)
    dev = max(
        [abs(tf_value(tf, n)) for n in range(tf.start, m + 1)] or [Fraction(0)]
    )

    def rate(eps: Fraction) -> int:
        return tf_abs_below_index(tf, eps) - tf.start + 1

    def cert(eps: Fraction) -> int:
        m_e = rate(eps / 2)
        need = Fraction(2) * m_e * max(dev, eps) / eps
        return max(m_e, math.ceil(need)) + 1

    def contains(v: Rat) -> bool:
        idx = _seq_value_index(leaf.limit, tf, v)
        return idx is not None and idx not in skip_indices

    return ValueStream(
        _seq_iter(leaf.limit, tf, frozenset(skip_indices)),
        mean=leaf.limit,
        elem_rate=rate,
        mean_cert=cert,
        dev_bound=dev,
        contains=contains,
        label=label,
    )


def _dense_edge_values(d: Dense, ascending_to_top: bool):
    seen = set()
    j = 1
    while True:
        den = 1 << j
        if ascending_to_top:
            m = (d.hi * den).__ceil__() - 1
            v = Fraction(m, den)
            ok = d.lo < v < d.hi
        else:
            m = (d.lo * den).__floor__() + 1
            v = Fraction(m, den)
            ok = d.lo < v < d.hi
        if ok and v not in seen:
            seen.add(v)
            yield float(v), v
        j += 1
        if j > 4000:
            raise BudgetExceeded("dense edge stream exhausted its depth")


def stream_from_dense_edge(d: Dense, target_hi: bool, label="dense-edge") -> ValueStream:
    target = d.hi if target_hi else d.lo
    width = d.hi - d.lo

    def rate(eps: Fraction) -> int:
        k = 1
        while Fraction(1, 1 << k) >= eps:
            k += 1
        return k + 1

    def cert(eps: Fraction) -> int:
        m_e = rate(eps / 2)
        need = Fraction(2) * m_e * max(width, eps) / eps
        return max(m_e, math.ceil(need)) + 1

    emitted: set[Rat] = set()
    raw = _dense_edge_values(d, target_hi)

    def it():
        for f, v in raw:
            emitted.add(v)
            yield f, v

    def contains(v: Rat) -> bool:
        # conservative: exact once emitted; future dyadic edge values are
        # never reached by the canonical enumeration within any finite run
        return v in emitted

    return ValueStream(
        it(),
        mean=target,
        elem_rate=rate,
        mean_cert=cert,
        dev_bound=width,
        contains=contains,
        label=label,
    )


def stream_from_finite(points, label="finite") -> ValueStream:
    def it():
        for p in points:
            yield float(p), p

    return ValueStream(it(), label=label, dev_bound=None)


def canonical_stream(
    s: SetExpr | None, skip_values=frozenset(), skip_callables=(), label="rest"
) -> ValueStream:
    """Canonical enumeration of s, skipping values owned by other streams.

    The expression must be the structural remainder (witness leaves removed),
    so every element is examined once and exhaustion is a real StopIteration.
    """

    def it():
        if s is None:
            return
        seen: set[Rat] = set()
        for v in point_generator(s):
            if v in seen:
                continue
            seen.add(v)
            if len(seen) > 4_000_000:
                raise BudgetExceeded("canonical stream dedup set exhausted")
            if v in skip_values or any(sk(v) for sk in skip_callables):
                continue
            yield float(v), _exact_if_small(v)

    return ValueStream(it(), label=label)


# ---------------------------------------------------------------------------
# the merge lemmas


@dataclass(frozen=True)
class MergeParams:
    """Asymptotic draw frequencies for the two-stream block merge."""

    alpha: Rat

    def __post_init__(self):
        if not (0 <= self.alpha <= 1):
            raise ValueError("alpha must lie in [0, 1]")

    @property
    def beta(self) -> Rat:
        return 1 - self.alpha

    @property
    def gamma(self) -> Rat:
        small = min(self.alpha, self.beta)
        if small == 0:
            raise ValueError("degenerate weights have no block length")
        return 1 / small


def merge_element_index(
    b_mean: Rat, c: Rat, eps: Fraction, cert_index: int
) -> int:
    """Insertion position k: past it, running means stay within eps of the
    sequence mean after inserting c.  The three bounds mirror the epsilon/3
    decomposition of the insertion argument."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    k1 = cert_index
    k2 = math.ceil(3 * abs(c) / eps)
    k3 = math.ceil(3 * abs(b_mean - eps / 3) / eps)
    return max(k1, k2, k3) + 1


def merge_element(b: ValueStream, c: Rat, eps: Fraction, cert_index: int | None = None):
    """Insert the single value c into stream b at a certified position.

    Returns (k, merged stream); the merged stream emits b's values with c at
    position k, and for every n > k the running mean stays within eps of b's
    mean.
    """
    if b.mean is None:
        raise NoWitness("insertion needs the base stream's mean")
    if cert_index is None:
        cert_index = b.mean_cert(eps / 3)
    k = merge_element_index(b.mean, c, eps, cert_index)

    def it():
        i = 1
        while True:
            if i == k:
                yield float(c), _exact_if_small(Fraction(c))
            else:
                yield b.pull()
            i += 1

    merged = ValueStream(
        it(),
        mean=b.mean,
        mean_cert=_inserted_cert(b, c, k, eps),
        dev_bound=b.dev_bound,
        label=f"{b.label}+1",
    )
    return k, merged


def _inserted_cert(b: ValueStream, c: Rat, k: int, eps: Fraction):
    def cert(eps2: Fraction) -> int:
        base = b.mean_cert(eps2 / 2)
        spread = math.ceil(2 * abs(c - b.mean) / eps2)
        return max(k, base + 1, spread) + 1

    return cert


def merge_absorb(b: ValueStream, c: ValueStream, label="absorb") -> ValueStream:
    """Merge every element of bounded c into b without moving the mean.

    Inserts c's j-th element with the halving tolerance 2^-j at an index
    where all three insertion bounds hold for the current merged stream.
    """
    if b.mean is None:
        raise NoWitness("absorbing needs the base stream's mean")
    b_mean = b.mean
    dev_c = c.dev_bound

    state = {
        "j": 0,  # inserted count
        "k_last": 0,  # index of the last insertion
        "pending": None,
        "done": False,
        "cdev": dev_c if dev_c is not None else Fraction(0),
    }

    def current_cert(eps: Fraction) -> int:
        # after j insertions the deviation splits into the inserted values'
        # contribution and the base stream's own certified window
        j = state["j"]
        dc = state["cdev"] + abs(b_mean) + 1
        base = b.mean_cert(eps / 2)
        need = math.ceil(2 * j * dc / eps)
        return max(state["k_last"], base + j, need) + 1

    def next_insert_index() -> int | None:
        if state["pending"] is None and not state["done"]:
            try:
                f, e = c.pull()
            except StopIteration:
                state["done"] = True
                return None
            if e is None:
                e = Fraction(f)
            state["pending"] = e
        if state["pending"] is None:
            return None
        j_next = state["j"] + 1
        eps_j = Fraction(1, 2**j_next)
        if state["cdev"] == 0 or abs(state["pending"] - b_mean) > state["cdev"]:
            state["cdev"] = abs(state["pending"] - b_mean)
        k = merge_element_index(b_mean, state["pending"], eps_j, current_cert(eps_j / 3))
        return max(k, state["k_last"] + 1)

    def it():
        i = 1
        next_k = next_insert_index()
        while True:
            if next_k is not None and i == next_k:
                v = state["pending"]
                state["pending"] = None
                state["j"] += 1
                state["k_last"] = i
                yield float(v), _exact_if_small(v)
                next_k = next_insert_index()
            else:
                yield b.pull()
            i += 1

    return ValueStream(
        it(),
        mean=b_mean,
        mean_cert=current_cert,
        dev_bound=None,
        label=label,
    )


def merge_weighted(a: ValueStream, b: ValueStream, params: MergeParams, label="blocks") -> ValueStream:
    """Block merge with asymptotic draw frequency alpha from a, beta from b;
    the running mean converges to alpha*a.mean + beta*b.mean."""
    alpha = Fraction(params.alpha)
    if alpha == 0:
        return merge_absorb(b, a, label=label)
    if alpha == 1:
        return merge_absorb(a, b, label=label)
    if a.mean is None or b.mean is None:
        raise NoWitness("weighted merging needs both stream means")
    if alpha <= Fraction(1, 2):
        first, rest, gamma = a, b, 1 / alpha
    else:
        first, rest, gamma = b, a, 1 / (1 - alpha)
    target = alpha * a.mean + (1 - alpha) * b.mean
    counters = {"first_draws": 0, "total": 0}

    def it():
        m = 2  # the next block whose first index is pending
        next_first = 1  # block 1 always starts at index 1
        i = 1
        while True:
            if i == next_first:
                counters["first_draws"] += 1
                yield first.pull()
                next_first = max(math.ceil((m - 1) * gamma), i + 1)
                m += 1
            else:
                yield rest.pull()
            counters["total"] += 1
            i += 1

    def cert(eps: Fraction) -> int:
        n_e = max(a.elem_rate(eps / 4), b.elem_rate(eps / 4))
        da = a.dev_bound if a.dev_bound is not None else Fraction(0)
        db = b.dev_bound if b.dev_bound is not None else Fraction(0)
        gap = abs(a.mean - b.mean)
        spread = math.ceil(4 * (n_e * (da + db) + gap) / (3 * eps))
        m_k = math.ceil(gamma * (n_e + 1)) + math.ceil(
            gamma / (gamma - 1) * (n_e + 1)
        ) + 4
        return max(m_k, spread) + 1

    return ValueStream(
        it(),
        mean=target,
        mean_cert=cert,
        dev_bound=max(
            [d for d in (a.dev_bound, b.dev_bound) if d is not None]
            + [abs(a.mean - b.mean)]
        ),
        label=label,
    )


# ---------------------------------------------------------------------------
# witnesses and whole-set rearrangements


def _witness_backing(leaves, target: Rat):
    """(backing, leaf index, consumes-whole-leaf) for a subsequence of one
    leaf converging to the target extreme.  The backing is ('seq', Seq) for
    sequence-shaped witnesses or ('dense', Dense, target_hi)."""
    for i, leaf in enumerate(leaves):
        if isinstance(leaf, Seq) and leaf.limit == target:
            return ("seq", leaf), i, True
        if isinstance(leaf, Seq2):
            if leaf.limit == target:
                combined = tf_add(leaf.outer, leaf.inner)
                return ("seq", Seq(leaf.limit, combined)), i, False
            got = _extreme_cluster(leaf, target)
            if got is not None:
                return ("seq", got), i, False
        if isinstance(leaf, Dense) and (leaf.lo == target or leaf.hi == target):
            return ("dense", leaf, leaf.hi == target), i, False
    return None


def _extreme_cluster(leaf: Seq2, target: Rat) -> Seq | None:
    """A single cluster of a double sequence attaining an extreme limit."""
    for n in range(leaf.outer.start, tf_monotone_index(leaf.outer) + 2):
        base = leaf.limit + tf_value(leaf.outer, n)
        if base == target:
            return Seq(base, leaf.inner)
    for k in range(leaf.inner.start, tf_monotone_index(leaf.inner) + 2):
        base = leaf.limit + tf_value(leaf.inner, k)
        if base == target:
            return Seq(base, leaf.outer)
    return None


def _stream_from_backing(backing, skip_indices=frozenset(), label="witness") -> ValueStream:
    if backing[0] == "seq":
        return stream_from_seq(backing[1], skip_indices, label=label)
    return stream_from_dense_edge(backing[1], backing[2], label=label)


_COLLISION_CAP = 20_000


def _seq_collision_indices(dst: Seq, src: Seq) -> set[int]:
    """Indices n with dst.limit + dst.tail(n) inside src's value set.

    Both value sets accumulate only at their limits, so when the limits
    differ the collision set is finite and reachable by bounded walks."""
    from .terms import tf_abs_upper

    out: set[int] = set()
    m_src = tf_monotone_index(src.tail)
    for n in range(src.tail.start, m_src + 1):
        v = src.limit + tf_value(src.tail, n)
        idx = _seq_value_index(dst.limit, dst.tail, v)
        if idx is not None:
            out.add(idx)
    src_top = tf_abs_upper(src.tail, m_src + 1)
    gap = abs(dst.limit - src.limit) - src_top
    if gap > 0:
        cutoff = tf_abs_below_index(dst.tail, gap)
    else:
        cutoff = dst.tail.start + _COLLISION_CAP + 1
    if cutoff - dst.tail.start > _COLLISION_CAP:
        raise BudgetExceeded("witness collision walk too long")
    for n in range(dst.tail.start, cutoff):
        v = dst.limit + tf_value(dst.tail, n)
        if _seq_value_index(src.limit, src.tail, v) is not None:
            out.add(n)
    return out


def _collision_values(rest_leaf, backing) -> set[Rat]:
    """Values of a remainder leaf that already belong to a witness stream."""
    out: set[Rat] = set()
    if backing[0] != "seq":
        return out  # dense-edge witnesses are handled by a callable skip
    wit: Seq = backing[1]
    if isinstance(rest_leaf, Finite):
        for p in rest_leaf.points:
            if _seq_value_index(wit.limit, wit.tail, p) is not None:
                out.add(p)
        return out
    if isinstance(rest_leaf, Seq):
        for idx in _seq_collision_indices(rest_leaf, wit):
            out.add(rest_leaf.limit + tf_value(rest_leaf.tail, idx))
        return out
    raise BudgetExceeded("collision sets for this leaf shape need callables")


def _subsample(src: ValueStream, parity: int) -> ValueStream:
    """Every other element of src; keeps the mean and the rate envelope
    (the n-th emitted element has an original index of at least n)."""

    def it():
        idx = 0
        while True:
            f, e = src.pull()
            if idx % 2 == parity:
                yield f, e
            idx += 1

    return ValueStream(
        it(),
        mean=src.mean,
        elem_rate=src._elem_rate,
        mean_cert=src._mean_cert,
        dev_bound=src.dev_bound,
        label=f"{src.label}-{'even' if parity == 0 else 'odd'}",
    )


def interleave(x: ValueStream, y: ValueStream, label="interleave") -> ValueStream:
    """Round-robin merge of two disjoint streams (no mean bookkeeping)."""

    def it():
        streams = [x, y]
        while streams:
            alive = []
            for st in streams:
                try:
                    yield st.pull()
                    alive.append(st)
                except StopIteration:
                    pass
            if len(alive) < len(streams):
                streams = alive

    return ValueStream(it(), label=label)


def _c_skips(rest_leaves, backings):
    """(value set, callables) marking remainder values owned by witnesses."""
    values: set[Rat] = set()
    callables = []
    for backing, stream in backings:
        need_callable = backing[0] != "seq" or backing[2]
        for leaf in rest_leaves:
            if need_callable:
                continue
            try:
                values.update(_collision_values(leaf, backing))
            except BudgetExceeded:
                need_callable = True
        if need_callable:
            callables.append(stream.contains)
    return frozenset(values), tuple(callables)


def split_three(s: SetExpr):
    """Three disjoint streams covering s exactly: one converging to the
    lower limit, one to the upper limit, and the remainder.  Also returns
    the two limits.  With equal limits the single witness is split into its
    even- and odd-indexed halves."""
    if not is_countably_infinite(s):
        raise NoWitness("rearrangements need a countably infinite set")
    norm = normalize_affine(s)
    leaves = list(norm.parts) if isinstance(norm, Union) else [norm]
    lo, hi = ideal_limits(s, Ideal.FINITE_SETS)
    got = _witness_backing(leaves, lo)
    if got is None:
        raise NoWitness("no representable subsequence converges to the lower limit")
    a_back, a_leaf, a_full = got
    a = _stream_from_backing(a_back, label="witness-lo")
    consumed = {a_leaf} if a_full else set()
    partial = not a_full
    if hi == lo:
        rest_leaves = _remainder_leaves(leaves, consumed)
        skip_vals, skip_calls = _c_skips(
            rest_leaves, [(_mark_partial(a_back, partial), a)]
        )
        c = canonical_stream(_as_expr(rest_leaves), skip_vals, skip_calls)
        return _subsample(a, 0), _subsample(a, 1), c, lo, hi
    masked = [
        l if i != a_leaf or not a_full else Finite(()) for i, l in enumerate(leaves)
    ]
    got = _witness_backing(masked, hi)
    if got is None:
        raise NoWitness("no representable subsequence converges to the upper limit")
    b_back, b_leaf, b_full = got
    # values shared by both witnesses stay with the lower one
    if a_back[0] == "seq" and b_back[0] == "seq":
        b_skip = _seq_collision_indices(b_back[1], a_back[1])
        b = _stream_from_backing(b_back, frozenset(b_skip), label="witness-hi")
    else:
        b = _filter_stream(_stream_from_backing(b_back, label="witness-hi"), a.contains)
    if b_full:
        consumed = consumed | {b_leaf}
    rest_leaves = _remainder_leaves(leaves, consumed)
    skip_vals, skip_calls = _c_skips(
        rest_leaves,
        [(_mark_partial(a_back, not a_full), a), (_mark_partial(b_back, not b_full), b)],
    )
    c = canonical_stream(_as_expr(rest_leaves), skip_vals, skip_calls)
    return a, b, c, lo, hi


def _mark_partial(backing, partial: bool):
    # a partial witness owns only part of its leaf, so the remainder must be
    # filtered through the witness's exact membership callable
    if backing[0] == "seq":
        return ("seq", backing[1], partial)
    return backing


def _remainder_leaves(leaves, consumed: set):
    return [
        l
        for i, l in enumerate(leaves)
        if i not in consumed and not (isinstance(l, Finite) and not l.points)
    ]


def _as_expr(rest) -> SetExpr | None:
    if not rest:
        return None
    return Union(tuple(rest)) if len(rest) > 1 else rest[0]


def _filter_stream(src: ValueStream, banned) -> ValueStream:
    def it():
        while True:
            f, e = src.pull()
            if e is not None and banned(e):
                continue
            yield f, e

    return ValueStream(
        it(),
        mean=src.mean,
        elem_rate=src._elem_rate,
        mean_cert=src._mean_cert,
        dev_bound=src.dev_bound,
        contains=src._contains,
        label=src.label + "-filtered",
    )


def enumerate_with_mean(s: SetExpr, target: Rat) -> ValueStream:
    """Injective exhaustive enumeration of s whose running averages converge
    to the prescribed value between the lower and upper limits."""
    target = Fraction(target)
    a, b, c, lo, hi = split_three(s)
    if not (lo <= target <= hi):
        raise OutOfRange(f"target {target} outside [{lo}, {hi}]")
    if lo == hi:
        return merge_absorb(a, interleave(b, c), label="rearranged")
    if target == lo:
        return merge_absorb(a, interleave(b, c), label="rearranged")
    if target == hi:
        return merge_absorb(b, interleave(a, c), label="rearranged")
    alpha = (hi - target) / (hi - lo)
    core = merge_weighted(a, b, MergeParams(alpha))
    return merge_absorb(core, c, label="rearranged")


def enumerate_divergent(
    s: SetExpr, p: Rat | None = None, q: Rat | None = None, burst_cap: int = 10_000_000
) -> ValueStream:
    """Injective exhaustive enumeration whose running average drops below p
    and rises above q infinitely often."""
    a, b, c, lo, hi = split_three(s)
    if lo == hi:
        raise Degenerate("equal lower and upper limits admit no oscillation")
    span = hi - lo
    p = lo + span / 3 if p is None else Fraction(p)
    q = hi - span / 3 if q is None else Fraction(q)
    if not (lo < p < q < hi):
        raise OutOfRange("thresholds must satisfy lower < p < q < upper")
    pf, qf = float(p), float(q)

    def it():
        count = 0
        total = 0.0

        def emit(stream):
            nonlocal count, total
            f, e = stream.pull()
            count += 1
            total += f
            return f, e

        low_stage = True
        while True:
            try:
                yield emit(c)
            except StopIteration:
                pass
            pulls = 0
            if low_stage:
                while count == 0 or total / count >= pf or pulls == 0:
                    yield emit(a)
                    pulls += 1
                    if pulls > burst_cap:
                        raise BudgetExceeded("low burst exceeded its cap")
            else:
                while count == 0 or total / count <= qf or pulls == 0:
                    yield emit(b)
                    pulls += 1
                    if pulls > burst_cap:
                        raise BudgetExceeded("high burst exceeded its cap")
            low_stage = not low_stage

    return ValueStream(it(), label="divergent")
