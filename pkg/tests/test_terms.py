"""Decaying term functions: certificates, resolution searches, comparisons."""

from fractions import Fraction as F
from random import Random

import pytest

from setmeans import DoubleGeoTerm, GeoTerm, PowTerm, SemanticError, term_fun
from setmeans.terms import (
    cmp_pow_frac,
    tf_abs_below_index,
    tf_abs_upper,
    tf_cmp,
    tf_eventual_sign,
    tf_find_value,
    tf_gap_bound,
    tf_monotone_index,
    tf_resolution_index,
    tf_value,
    tf_value_parts,
)

from gen import random_termfun


def test_values():
    harm = term_fun([PowTerm(F(1), 1)])
    assert tf_value(harm, 5) == F(1, 5)
    geo = term_fun([GeoTerm(F(3), F(1, 2))])
    assert tf_value(geo, 4) == F(3, 16)
    dg = term_fun([DoubleGeoTerm(F(1), F(1, 2), 2)])
    assert tf_value(dg, 3) == F(1, 256)


def test_same_shape_terms_merge():
    tf = term_fun([PowTerm(F(1), 1), PowTerm(F(2), 1)])
    assert tf_value(tf, 2) == F(3, 2)
    with pytest.raises(SemanticError):
        term_fun([PowTerm(F(1), 1), PowTerm(F(-1), 1)])  # cancels to zero


def test_monotone_certificate_random():
    rng = Random(23)
    for _ in range(200):
        tf = random_termfun(rng)
        m = tf_monotone_index(tf)
        sign = tf_eventual_sign(tf)
        prev = None
        # beyond the certificate: constant sign, strictly shrinking magnitude
        for n in range(m, m + 24):
            assert tf_cmp(tf, n, F(0)) == sign
            cur, tinies = tf_value_parts(tf, n)
            if tinies:
                continue  # value below the symbolic-tail threshold
            if prev is not None:
                assert abs(cur) < abs(prev)
            prev = cur


def test_gap_bound_validity():
    rng = Random(29)
    for _ in range(120):
        tf = random_termfun(rng)
        m = tf_monotone_index(tf)
        for n in range(m, m + 12):
            gap = abs(tf_value(tf, n) - tf_value(tf, n + 1))
            assert gap <= tf_gap_bound(tf, n)
        # the bound itself never increases
        bounds = [tf_gap_bound(tf, n) for n in range(m, m + 12)]
        assert all(a >= b for a, b in zip(bounds, bounds[1:]))


def test_resolution_index():
    harm = term_fun([PowTerm(F(1), 1)])
    eps = F(1, 10_000)
    r = tf_resolution_index(harm, eps)
    assert abs(tf_value(harm, r) - tf_value(harm, r + 1)) < eps
    geo = term_fun([GeoTerm(F(1), F(1, 2))])
    r = tf_resolution_index(geo, F(1, 2**20))
    assert abs(tf_value(geo, r) - tf_value(geo, r + 1)) < F(1, 2**20)


def test_abs_below_index():
    rng = Random(31)
    for _ in range(100):
        tf = random_termfun(rng)
        eps = F(1, rng.choice([10, 100, 1000]))
        r = tf_abs_below_index(tf, eps)
        for n in range(r, r + 8):
            assert abs(tf_value(tf, n)) < eps
        assert tf_abs_upper(tf, r) >= abs(tf_value(tf, r))


def test_find_value():
    harm = term_fun([PowTerm(F(1), 1)])
    assert tf_find_value(harm, F(1, 7)) == 7
    assert tf_find_value(harm, F(2, 13)) is None
    geo = term_fun([GeoTerm(F(1), F(1, 2))])
    assert tf_find_value(geo, F(1, 1024)) == 10
    assert tf_find_value(geo, F(1, 7)) is None
    neg = term_fun([PowTerm(F(-1), 2)])
    assert tf_find_value(neg, F(-1, 49)) == 7


def test_deep_tail_comparisons():
    # 2^-n + 2^-(2^n) against the dyadic 2^-n: the symbolic tail decides
    tf = term_fun([GeoTerm(F(1), F(1, 2)), DoubleGeoTerm(F(1), F(1, 2), 2)])
    for n in (20, 40, 80):
        assert tf_cmp(tf, n, F(1, 2**n)) == 1
        assert tf_cmp(tf, n, F(1, 2 ** (n - 1))) == -1
    main, tinies = tf_value_parts(tf, 40)
    assert main == F(1, 2**40) and len(tinies) == 1


def test_cmp_pow_frac():
    assert cmp_pow_frac(F(1, 2), 10, F(1, 1024)) == 0
    assert cmp_pow_frac(F(1, 2), 10, F(1, 1000)) == -1
    assert cmp_pow_frac(F(1, 2), 10, F(1, 1100)) == 1
    assert cmp_pow_frac(F(1, 2), 2**70, F(1, 10**9)) == -1
    assert cmp_pow_frac(F(9, 10), 10**7, F(1, 10**9)) == -1
    assert cmp_pow_frac(F(1, 2), 3, F(2)) == -1
