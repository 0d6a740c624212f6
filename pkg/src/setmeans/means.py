"""Single-valued means with a shared limit-detection engine.

Every limit-based mean evaluates an exact quantity along a dyadic schedule
(shrinking neighbourhood radii or doubling sample grids) and feeds the trace
to a common detector: a limit is declared when a trailing window of values
agrees within the tolerance, divergence when the trailing band stays an
order of magnitude wider.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction

from .core import Rat, arithmetic_mean
from .errors import (
    BudgetExceeded,
    InIdeal,
    NonTerminating,
    OutOfBase,
    SemanticError,
    UndefinedMean,
)
from .measure import cantor_neighborhood_stats, neighborhood
from .setexpr import (
    Affine,
    Cantor,
    Dense,
    Finite,
    IntervalSet,
    Seq,
    Seq2,
    SetExpr,
    bounds,
    is_infinite,
    normalize_affine,
)
from .terms import (
    TermFun,
    tf_eventual_sign,
    tf_monotone_index,
    tf_resolution_index,
    tf_single_pow,
    tf_value,
    tf_value_float,
    tf_cmp,
)
from .topology import (
    Ideal,
    _IDEAL_ORDER,
    acc_chain,
    ideal_limits,
    is_empty_expr,
    isolated_stats,
)

# ---------------------------------------------------------------------------
# outcomes and schedules


@dataclass(frozen=True)
class MeanOutcome:
    status: str  # 'exact' | 'converged' | 'divergent' | 'undefined'
    value: float | None = None
    exact: Rat | None = None
    err_est: float | None = None
    band: tuple[float, float] | None = None
    reason: str | None = None
    trace: tuple[tuple[float, float], ...] = ()

    def ok(self) -> bool:
        return self.status in ("exact", "converged")

    def result(self) -> float:
        if not self.ok():
            raise UndefinedMean(self.reason or self.status)
        return float(self.exact) if self.exact is not None else self.value


def exact_outcome(value: Rat) -> MeanOutcome:
    return MeanOutcome("exact", value=float(value), exact=Fraction(value))


@dataclass(frozen=True)
class Schedule:
    """Dyadic evaluation schedule: parameters 2^-k (delta) or 2^k (grid)."""

    kind: str  # 'delta' | 'grid'
    start_exp: int
    end_exp: int
    tol: float = 1e-4
    stability_window: int = 3
    early_stop: bool = True

    def __post_init__(self):
        if self.end_exp - self.start_exp + 1 < self.stability_window:
            raise ValueError("schedule shorter than its stability window")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.stability_window < 2:
            raise ValueError("stability window must be >= 2")

    def exponents(self):
        return range(self.start_exp, self.end_exp + 1)

    def param(self, k: int) -> Fraction:
        if self.kind == "delta":
            return Fraction(1, 2**k)
        return Fraction(2**k)


def delta_schedule(start_exp=4, end_exp=40, tol=1e-4, window=3, early_stop=True) -> Schedule:
    return Schedule("delta", start_exp, end_exp, tol, window, early_stop)


def grid_schedule(start_exp=10, end_exp=40, tol=1e-4, window=3, early_stop=True) -> Schedule:
    return Schedule("grid", start_exp, end_exp, tol, window, early_stop)


def _band(values) -> float:
    return max(values) - min(values)


def _oscillates(values) -> bool:
    nondec = all(a <= b for a, b in zip(values, values[1:]))
    noninc = all(a >= b for a, b in zip(values, values[1:]))
    return not (nondec or noninc)


def run_schedule(evaluate, sched: Schedule) -> MeanOutcome:
    """Drive `evaluate(param) -> (float, exact | None) | None` over the
    schedule and classify the trace."""
    trace: list[tuple[float, float]] = []
    floats: list[float] = []
    exacts: list[Rat | None] = []
    budget_hit = False
    for k in sched.exponents():
        param = sched.param(k)
        try:
            got = evaluate(param)
        except BudgetExceeded:
            budget_hit = True
            break
        if got is None:
            continue
        val, exact = got
        trace.append((float(param), val))
        floats.append(val)
        exacts.append(exact)
        w = sched.stability_window
        if sched.early_stop and len(floats) >= w:
            window = floats[-w:]
            if _band(window) < sched.tol:
                return _converged(trace, floats, exacts, sched)
            if len(floats) >= 2 * w:
                prev = floats[-2 * w : -w]
                now_band = _band(window)
                if (
                    now_band > 10 * sched.tol
                    and _band(prev) > 10 * sched.tol
                    and now_band > 0.5 * _band(prev)
                    and _oscillates(floats[-2 * w :])
                ):
                    return _divergent(trace, floats, sched)
    if not floats:
        reason = "budget exhausted" if budget_hit else "no evaluable schedule points"
        return MeanOutcome("undefined", reason=reason, trace=tuple(trace))
    w = min(sched.stability_window, len(floats))
    band = _band(floats[-w:])
    if band <= 10 * sched.tol:
        return _converged(trace, floats, exacts, sched)
    if _oscillates(floats[-min(2 * sched.stability_window, len(floats)) :]):
        return _divergent(trace, floats, sched)
    return MeanOutcome(
        "undefined",
        reason="still drifting at the end of the schedule",
        trace=tuple(trace),
    )


def _converged(trace, floats, exacts, sched) -> MeanOutcome:
    w = min(sched.stability_window, len(floats))
    band = _band(floats[-w:])
    exact = None
    tail = exacts[-w:]
    if all(e is not None for e in tail) and len({*tail}) == 1:
        exact = tail[0]
    return MeanOutcome(
        "converged",
        value=floats[-1],
        exact=exact,
        err_est=band,
        trace=tuple(trace),
    )


def _divergent(trace, floats, sched) -> MeanOutcome:
    w = min(2 * sched.stability_window, len(floats))
    window = floats[-w:]
    return MeanOutcome(
        "divergent",
        band=(min(window), max(window)),
        trace=tuple(trace),
    )


# ---------------------------------------------------------------------------
# exact means


def _finite_points(s: SetExpr) -> list[Rat]:
    s = normalize_affine(s)
    pts: set[Rat] = set()
    from .setexpr import Union

    stack = [s]
    while stack:
        node = stack.pop()
        if isinstance(node, Union):
            stack.extend(node.parts)
        elif isinstance(node, Finite):
            pts.update(node.points)
        elif isinstance(node, IntervalSet) and node.iv.is_point():
            pts.add(node.iv.lo)
        else:
            raise SemanticError("set is not finite")
    return sorted(pts)


def mean_lis(s: SetExpr) -> MeanOutcome:
    """Midpoint of the accumulation range; arithmetic mean on finite sets."""
    if is_empty_expr(s):
        raise UndefinedMean("empty set")
    if not is_infinite(s):
        return exact_outcome(arithmetic_mean(_finite_points(s)))
    lo, hi = ideal_limits(s, Ideal.FINITE_SETS)
    return exact_outcome((lo + hi) / 2)


def mean_ideal(s: SetExpr, ideal: Ideal) -> MeanOutcome:
    lo, hi = ideal_limits(s, ideal)
    return exact_outcome((lo + hi) / 2)


DEFAULT_CHAIN = (Ideal.FINITE_SETS, Ideal.COUNTABLE_SETS)


def _in_ideal(s: SetExpr, ideal: Ideal) -> bool:
    from .setexpr import has_uncountable_leaf
    from .topology import _positive_interval_leaves

    if ideal is Ideal.EMPTY_ONLY:
        return is_empty_expr(s)
    if ideal is Ideal.FINITE_SETS:
        return not is_infinite(s)
    if ideal is Ideal.COUNTABLE_SETS:
        return not has_uncountable_leaf(s)
    return not _positive_interval_leaves(s)


def mean_ideal_chain(s: SetExpr, chain=DEFAULT_CHAIN) -> MeanOutcome:
    """Mean at the first chain level whose ideal still excludes the set."""
    if is_empty_expr(s):
        raise UndefinedMean("empty set")
    chain = tuple(chain)
    if any(
        _IDEAL_ORDER[a] >= _IDEAL_ORDER[b] for a, b in zip(chain, chain[1:])
    ):
        raise ValueError("ideal chain must be strictly increasing")
    if not is_infinite(s):
        return exact_outcome(arithmetic_mean(_finite_points(s)))
    if _in_ideal(s, chain[0]):
        raise InIdeal("infinite set inside the first chain ideal")
    level = len(chain) - 1
    for i in range(1, len(chain)):
        if _in_ideal(s, chain[i]):
            level = i - 1
            break
    lo, hi = ideal_limits(s, chain[level])
    return exact_outcome((lo + hi) / 2)


def mean_acc(s: SetExpr, max_depth: int = 32) -> MeanOutcome:
    """Arithmetic mean of the last nonempty derived set."""
    if is_empty_expr(s):
        raise UndefinedMean("empty set")
    chain, terminated = acc_chain(s, max_depth)
    if not terminated:
        raise NonTerminating("derived-set chain never empties")
    last = chain[-2] if len(chain) >= 2 else s
    return exact_outcome(arithmetic_mean(_finite_points(last)))


# ---------------------------------------------------------------------------
# isolated-point mean


def mean_iso(s: SetExpr, sched: Schedule | None = None, budget: int = 10_000_000) -> MeanOutcome:
    if sched is None:
        sched = delta_schedule()
    if not is_infinite(s):
        return exact_outcome(arithmetic_mean(_finite_points(s)))

    def evaluate(delta):
        count, total = isolated_stats(s, delta, budget)
        if count == 0:
            return None
        return total / count, None

    # surface the domain error eagerly
    isolated_stats(s, sched.param(sched.start_exp), budget)
    return run_schedule(evaluate, sched)


# ---------------------------------------------------------------------------
# neighbourhood-average mean


_EXACT_NBR_BUDGET = 3000


def _single_cantor_map(s: SetExpr):
    from .setexpr import Union

    s = normalize_affine(s)
    leaves = list(s.parts) if isinstance(s, Union) else [s]
    if len(leaves) != 1:
        return None
    leaf = leaves[0]
    if isinstance(leaf, Cantor):
        return Fraction(1), Fraction(0)
    if isinstance(leaf, Affine) and isinstance(leaf.inner, Cantor):
        return leaf.alpha, leaf.beta
    return None


def _seq_float_parts(limit, tf, delta, out):
    """Append ascending (lo, hi) float parts for one sequence leaf."""
    d = float(delta)
    r = tf_resolution_index(tf, 2 * delta)
    m = tf_monotone_index(tf)
    lf = float(limit)
    x_r = lf + tf_value_float(tf, r)
    cover = (min(lf, x_r) - d, max(lf, x_r) + d)
    pieces = [cover]
    pw = tf_single_pow(tf)
    if pw is not None:
        c, p = float(pw.c), pw.p
        pieces.extend(
            (lf + c / n**p - d, lf + c / n**p + d) for n in range(tf.start, r)
        )
    else:
        pieces.extend(
            (
                lf + tf_value_float(tf, n) - d,
                lf + tf_value_float(tf, n) + d,
            )
            for n in range(tf.start, r)
        )
    pieces.sort()
    out.append(pieces)


def _lavg_eval_float(s: SetExpr, delta) -> float:
    from .setexpr import Union

    s = normalize_affine(s)
    leaves = list(s.parts) if isinstance(s, Union) else [s]
    lists = []
    d = float(delta)
    for leaf in leaves:
        if isinstance(leaf, Finite):
            lists.append(sorted((float(p) - d, float(p) + d) for p in leaf.points))
        elif isinstance(leaf, Seq):
            _seq_float_parts(leaf.limit, leaf.tail, delta, lists)
        elif isinstance(leaf, IntervalSet):
            lists.append([(float(leaf.iv.lo) - d, float(leaf.iv.hi) + d)])
        elif isinstance(leaf, Dense):
            lists.append([(float(leaf.lo) - d, float(leaf.hi) + d)])
        else:
            # double sequences and cantor leaves fall back to exact parts
            u = neighborhood(leaf, delta, budget=200_000)
            lists.append([(float(p.lo), float(p.hi)) for p in u.parts])
    measure = 0.0
    moment = 0.0
    cur_lo = cur_hi = None
    for lo, hi in heapq.merge(*lists):
        if cur_hi is None:
            cur_lo, cur_hi = lo, hi
        elif lo <= cur_hi:
            cur_hi = max(cur_hi, hi)
        else:
            measure += cur_hi - cur_lo
            moment += (cur_hi * cur_hi - cur_lo * cur_lo) / 2
            cur_lo, cur_hi = lo, hi
    if cur_hi is not None:
        measure += cur_hi - cur_lo
        moment += (cur_hi * cur_hi - cur_lo * cur_lo) / 2
    return moment / measure


def lavg(s: SetExpr, sched: Schedule | None = None) -> MeanOutcome:
    """Limit of the neighbourhood average as the radius shrinks to zero."""
    if sched is None:
        sched = delta_schedule()
    if is_empty_expr(s):
        raise UndefinedMean("empty set")
    cantor_map = _single_cantor_map(s)

    def evaluate(delta):
        if cantor_map is not None:
            measure, moment = cantor_neighborhood_stats(*cantor_map, delta)
            val = moment / measure
            return float(val), val
        try:
            u = neighborhood(s, delta, budget=_EXACT_NBR_BUDGET)
            from .core import avg_iu

            val = avg_iu(u)
            return float(val), val
        except BudgetExceeded:
            return _lavg_eval_float(s, delta), None

    return run_schedule(evaluate, sched)


# ---------------------------------------------------------------------------
# evenly-distributed-sample mean


@dataclass(frozen=True)
class CellCover:
    """Occupied cells of a uniform left-closed grid over [a, b)."""

    n: int
    base: tuple[Rat, Rat]
    ranges: tuple[tuple[int, int], ...]  # inclusive index ranges, sorted

    def count(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self.ranges)

    def index_sum(self) -> int:
        return sum((hi * (hi + 1) - (lo - 1) * lo) // 2 for lo, hi in self.ranges)

    def left_endpoint_mean(self) -> Rat:
        cnt = self.count()
        if cnt == 0:
            raise UndefinedMean("no occupied cells")
        a, b = self.base
        w = (b - a) / self.n
        return a + w * Fraction(self.index_sum(), cnt)

    def indices(self):
        for lo, hi in self.ranges:
            yield from range(lo, hi + 1)


def _merge_ranges(ranges: list[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    ranges.sort()
    out: list[list[int]] = []
    for lo, hi in ranges:
        if out and lo <= out[-1][1] + 1:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def _cell_index(x: Rat, a: Rat, b: Rat, n: int) -> int:
    return ((x - a) * n / (b - a)).__floor__()


def _cell_side(x: Rat, a: Rat, b: Rat, n: int, side: int) -> int:
    """Cell holding points just above (side>0) or below (side<0) x."""
    q = (x - a) * n / (b - a)
    i = q.__floor__()
    if side < 0 and q == i:
        return i - 1
    return i


def _cell_of_seq_point(tf: TermFun, idx: int, limit: Rat, a: Rat, b: Rat, n: int) -> int:
    """Exact cell of limit + tf(idx), resolving capped tiny tails."""
    from .terms import tf_value_parts

    main, tinies = tf_value_parts(tf, idx)
    w = (b - a) / n
    q = (limit + main - a) / w
    i = q.__floor__()
    if not tinies:
        return i
    bw = sum((t.bound for t in tinies), Fraction(0)) / w
    frac = q - i
    if bw < frac and frac + bw < 1:
        return i  # safely interior to its cell
    # the symbolic tail could cross a boundary: compare against it exactly
    if frac + bw >= 1:
        t_up = a + (i + 1) * w - limit
        if tf_cmp(tf, idx, t_up) >= 0:
            return i + 1
    if frac <= bw:
        t_dn = a + i * w - limit
        if tf_cmp(tf, idx, t_dn) < 0:
            return i - 1
    return i


def _seq_cell_ranges(limit: Rat, tf: TermFun, a: Rat, b: Rat, n: int, budget: int, out):
    w = (b - a) / n
    r = tf_resolution_index(tf, w)
    if r - tf.start > budget:
        raise BudgetExceeded("grid needs too many resolved sequence points")
    sign = tf_eventual_sign(tf)
    pw = tf_single_pow(tf)
    if pw is not None and r - tf.start > 64:
        # integer fast path: floor(((limit + c/n^p) - a) * N / (b - a))
        pa, qa = (limit - a).numerator, (limit - a).denominator
        pc, qc = pw.c.numerator, pw.c.denominator
        ps, qs = (b - a).numerator, (b - a).denominator
        p = pw.p
        for idx in range(tf.start, r):
            npow = idx**p
            num = (pa * qc * npow + pc * qa) * n * qs
            den = qa * qc * npow * ps
            i = num // den
            out.append((i, i))
    else:
        for idx in range(tf.start, r):
            i = _cell_of_seq_point(tf, idx, limit, a, b, n)
            out.append((i, i))
    x_r = limit + tf_value(tf, r)
    side_cell = _cell_side(limit, a, b, n, 1 if sign > 0 else -1)
    r_cell = _cell_index(x_r, a, b, n)
    out.append((min(side_cell, r_cell), max(side_cell, r_cell)))


def _seq2_cell_ranges(s: Seq2, a: Rat, b: Rat, n: int, budget: int, out):
    w = (b - a) / n
    f, g = s.outer, s.inner
    r_out = tf_resolution_index(f, w)
    r_in = tf_resolution_index(g, w)
    if (r_out - f.start) * max(r_in - g.start, 1) > budget:
        raise BudgetExceeded("grid needs too many resolved clusters")
    sign = tf_eventual_sign(f)
    for idx in range(f.start, r_out):
        _seq_cell_ranges(s.limit + tf_value(f, idx), g, a, b, n, budget, out)
    x_r = s.limit + tf_value(f, r_out)
    side = 1 if sign > 0 else -1
    # each resolved inner offset smears into a contiguous block as the
    # cluster positions chain toward the limit
    for k in range(g.start, r_in):
        gv = tf_value(g, k)
        c1 = _cell_side(s.limit + gv, a, b, n, side)
        c2 = _cell_index(x_r + gv, a, b, n)
        out.append((min(c1, c2), max(c1, c2)))
    # the joint tail block: outer tail x inner tail
    g_r = tf_value(g, r_in)
    c1 = _cell_side(s.limit, a, b, n, side)
    c2 = _cell_index(x_r + g_r, a, b, n)
    c3 = _cell_side(x_r, a, b, n, -side)
    out.append((min(c1, c2, c3), max(c1, c2, c3)))


def _cantor_cell_ranges(alpha: Rat, beta: Rat, a: Rat, b: Rat, n: int, budget: int, out):
    w = (b - a) / n
    count = 0
    stack = [(Fraction(0), Fraction(1))]
    while stack:
        lo0, hi0 = stack.pop()
        img = sorted((alpha * lo0 + beta, alpha * hi0 + beta))
        if img[1] - img[0] <= w:
            out.append(
                (_cell_index(img[0], a, b, n), _cell_index(img[1], a, b, n))
            )
            count += 1
            if count > budget:
                raise BudgetExceeded("grid needs too many cantor pieces")
            continue
        third = (hi0 - lo0) / 3
        stack.append((lo0, lo0 + third))
        stack.append((hi0 - third, hi0))


def eds_cells(s: SetExpr, n: int, base: tuple[Rat, Rat], budget: int = 2_000_000) -> CellCover:
    """Exact occupied-cell ranges of the n-cell grid over [a, b)."""
    if n < 1:
        raise ValueError("grid resolution must be >= 1")
    a, b = base
    if a >= b:
        raise ValueError("base interval must be nondegenerate")
    lo, hi, lo_att, hi_att = bounds(s)
    if lo < a or hi > b or (hi == b and hi_att):
        raise OutOfBase("point set must lie inside [a, b)")
    s = normalize_affine(s)
    from .setexpr import Union

    leaves = list(s.parts) if isinstance(s, Union) else [s]
    ranges: list[tuple[int, int]] = []
    for leaf in leaves:
        if isinstance(leaf, Finite):
            for p in leaf.points:
                i = _cell_index(p, a, b, n)
                ranges.append((i, i))
        elif isinstance(leaf, Seq):
            _seq_cell_ranges(leaf.limit, leaf.tail, a, b, n, budget, ranges)
        elif isinstance(leaf, Seq2):
            _seq2_cell_ranges(leaf, a, b, n, budget, ranges)
        elif isinstance(leaf, IntervalSet):
            iv = leaf.iv
            i0 = _cell_index(iv.lo, a, b, n)
            if iv.is_point():
                ranges.append((i0, i0))
            else:
                q = (iv.hi - a) * n / (b - a)
                i1 = q.__floor__()
                # an upper endpoint exactly on a boundary occupies its cell
                # only when the endpoint belongs to the set
                if q == i1 and iv.hi_open:
                    i1 -= 1
                ranges.append((i0, max(i0, i1)))
        elif isinstance(leaf, Dense):
            i0 = _cell_index(leaf.lo, a, b, n)
            q = (leaf.hi - a) * n / (b - a)
            i1 = q.__floor__()
            if q == i1:
                i1 -= 1  # open upper end contributes nothing at the boundary
            ranges.append((i0, i1))
        elif isinstance(leaf, Cantor):
            _cantor_cell_ranges(Fraction(1), Fraction(0), a, b, n, budget, ranges)
        elif isinstance(leaf, Affine) and isinstance(leaf.inner, Cantor):
            _cantor_cell_ranges(leaf.alpha, leaf.beta, a, b, n, budget, ranges)
        else:
            raise TypeError(f"unknown leaf {leaf!r}")
        if len(ranges) > budget:
            raise BudgetExceeded("cell range budget exhausted")
    return CellCover(n, (a, b), _merge_ranges(ranges))


def default_base(s: SetExpr) -> tuple[Rat, Rat]:
    lo, hi, _, _ = bounds(s)
    return lo - 1, hi + 1


def mean_eds(
    s: SetExpr,
    sched: Schedule | None = None,
    base: tuple[Rat, Rat] | None = None,
    budget: int = 2_000_000,
) -> MeanOutcome:
    """Limit of averages of occupied-cell left endpoints on doubling grids."""
    if sched is None:
        sched = grid_schedule()
    if is_empty_expr(s):
        raise UndefinedMean("empty set")
    if base is None:
        base = default_base(s)

    def evaluate(param):
        n = int(param)
        cover = eds_cells(s, n, base, budget)
        val = cover.left_endpoint_mean()
        return float(val), val

    return run_schedule(evaluate, sched)


# ---------------------------------------------------------------------------
# oscillating counterexample for the isolated-point mean


@dataclass
class OscillatingIsoSet:
    """Two-cluster construction whose isolated-point averages oscillate.

    Stage j >= 1 places points in a shell at distances (2^-(j+2), 2^-(j+1))
    from its accumulator: odd stages cluster near 0 and drag the running
    average below `low_target`, even stages cluster above 1 and push it over
    `high_target`.  Points at distance >= delta from {0, 1} are exactly the
    stages with shell distance at least delta, so the schedule snapshots the
    running average at alternating extremes and no limit exists.
    """

    low_target: Fraction = Fraction(1, 4)
    high_target: Fraction = Fraction(3, 4)
    _counts: list[int] = field(default_factory=list)
    _sums: list[Fraction] = field(default_factory=list)

    def _stage_shell(self, j: int) -> tuple[Fraction, Fraction]:
        lo = Fraction(1, 2 ** (j + 2))
        hi = Fraction(1, 2 ** (j + 1))
        if j % 2 == 1:
            return lo, hi  # near 0
        return 1 + lo, 1 + hi  # above 1

    def _stage_points(self, j: int, m: int) -> tuple[Fraction, Fraction]:
        """(count, exact sum) of m evenly placed points inside the shell."""
        lo, hi = self._stage_shell(j)
        width = hi - lo
        total = m * lo + width * Fraction(sum(range(1, m + 1)), m + 1)
        return m, total

    def stage_points_explicit(self, j: int) -> list[Fraction]:
        self.ensure_stages(j)
        m = self._counts[j - 1] - (self._counts[j - 2] if j >= 2 else 0)
        lo, hi = self._stage_shell(j)
        width = hi - lo
        return [lo + width * Fraction(i, m + 1) for i in range(1, m + 1)]

    def ensure_stages(self, upto: int, budget: int = 30_000_000):
        while len(self._counts) < upto:
            j = len(self._counts) + 1
            n_prev = self._counts[-1] if self._counts else 0
            s_prev = self._sums[-1] if self._sums else Fraction(0)
            lo, hi = self._stage_shell(j)
            if j % 2 == 1:
                # (s_prev + sum) / (n_prev + m) < low_target; points < hi
                target = self.low_target
                m = 1
                while True:
                    cnt, ssum = self._stage_points(j, m)
                    if (s_prev + ssum) < target * (n_prev + cnt):
                        break
                    need = (s_prev - target * n_prev) / (target - hi)
                    m = max(m * 2, int(need) + 1)
                    if n_prev + m > budget:
                        raise BudgetExceeded("oscillating construction too deep")
            else:
                target = self.high_target
                m = 1
                while True:
                    cnt, ssum = self._stage_points(j, m)
                    if (s_prev + ssum) > target * (n_prev + cnt):
                        break
                    need = (target * n_prev - s_prev) / (lo - target)
                    m = max(m * 2, int(need) + 1)
                    if n_prev + m > budget:
                        raise BudgetExceeded("oscillating construction too deep")
            cnt, ssum = self._stage_points(j, m)
            self._counts.append(n_prev + cnt)
            self._sums.append(s_prev + ssum)

    def running_mean_after(self, stage: int) -> Fraction:
        self.ensure_stages(stage)
        return self._sums[stage - 1] / self._counts[stage - 1]

    def isolated_mean(self, delta: Fraction) -> Fraction | None:
        """Average of points at distance >= delta from {0, 1}."""
        k = 0
        while Fraction(1, 2 ** (k + 1)) >= delta:
            k += 1
        # stages j with shell lower edge 2^-(j+2) >= delta survive fully
        stage = k - 2
        if stage < 1:
            return None
        return self.running_mean_after(stage)


def mean_iso_oscillating(sched: Schedule | None = None) -> MeanOutcome:
    """Isolated-point mean of the shipped oscillating construction."""
    if sched is None:
        sched = delta_schedule()
    osc = OscillatingIsoSet()

    def evaluate(delta):
        got = osc.isolated_mean(delta)
        if got is None:
            return None
        return float(got), got

    return run_schedule(evaluate, sched)
