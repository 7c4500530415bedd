import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weyl_lab.errors import ContractError
from weyl_lab.exactzero import (
    HALF_PERIOD_PAIRING,
    NUMERIC_ONLY,
    RESIDUE_PERMUTATION,
    RationalPoint,
    certify_zero,
    eval_rational_exactly,
    gauss_monomial_point,
    parse_rational,
    residue_histogram,
)
from weyl_lab.sumcore import eval_direct


def brute_histogram(numerators, m, n):
    counts = [0] * m
    for k in range(1, n + 1):
        v = sum(a * k**j for j, a in enumerate(numerators, start=1)) % m
        counts[v] += 1
    return counts


class TestRationalPoint:
    def test_reduction_and_embedding(self):
        p = RationalPoint((13, -1), 12)
        assert p.numerators == (1, 11)
        assert p.to_torus().coords == (1 / 12, 11 / 12)

    def test_bad_modulus(self):
        with pytest.raises(ContractError):
            RationalPoint((1,), 1)
        with pytest.raises(ContractError):
            RationalPoint((1,), 2**31)

    def test_parse_round_trip(self):
        p = parse_rational("1,5/12")
        assert p == RationalPoint((1, 5), 12)
        assert parse_rational(str(p)) == p

    def test_parse_malformed(self):
        with pytest.raises(ContractError):
            parse_rational("nope")


class TestResidueHistogram:
    def test_n_squared_mod_6(self):
        # oracle: direct enumeration of n^2 mod 6 for n = 1..6
        h = residue_histogram(RationalPoint((0, 1), 6), 6)
        assert list(h.counts) == [1, 2, 0, 1, 2, 0]
        assert list(h.counts) == brute_histogram((0, 1), 6, 6)

    def test_linear_mod_2(self):
        h = residue_histogram(RationalPoint((1,), 2), 2)
        assert list(h.counts) == [1, 1]

    def test_cubic_permutation_mod_5(self):
        h = residue_histogram(RationalPoint((0, 0, 1), 5), 5)
        assert list(h.counts) == [1, 1, 1, 1, 1]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 40), st.integers(1, 120), st.integers(0, 10**6))
    def test_matches_brute_force(self, m, n, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 4))
        nums = tuple(int(a) for a in rng.integers(0, m, size=d))
        h = residue_histogram(RationalPoint(nums, m), n)
        assert list(h.counts) == brute_histogram(nums, m, n)
        assert h.counts.sum() == n

    def test_bad_n(self):
        with pytest.raises(ContractError):
            residue_histogram(RationalPoint((1,), 2), 0)


class TestCertifyZero:
    def test_quadratic_weyl_mod_12(self):
        cert = certify_zero(RationalPoint((1, 1), 12), 12)
        assert cert.mechanism == HALF_PERIOD_PAIRING
        assert cert.verified

    def test_gauss_mod_6(self):
        cert = certify_zero(gauss_monomial_point(1, 6, 2), 6)
        assert cert.mechanism == HALF_PERIOD_PAIRING
        assert cert.verified

    def test_cubic_monomial_mod_5(self):
        cert = certify_zero(gauss_monomial_point(1, 5, 3), 5)
        assert cert.mechanism == RESIDUE_PERMUTATION
        assert cert.verified

    def test_nonvanishing_is_numeric_only_unverified(self):
        cert = certify_zero(RationalPoint((0, 1), 5), 5)  # |Gauss sum| = sqrt(5)
        assert cert.mechanism == NUMERIC_ONLY
        assert not cert.verified

    def test_quadratic_sweep_small_primes(self):
        # both pairing families over every admissible coefficient, p <= 13
        for p in (3, 5, 7, 11, 13):
            for a in range(1, 4 * p + 1):
                for b in range(1, 4 * p + 1):
                    if math.gcd(a * b, 2 * p) != 1:
                        continue
                    cert = certify_zero(RationalPoint((a, b), 4 * p), 4 * p)
                    assert cert.mechanism == HALF_PERIOD_PAIRING, (p, a, b)
            for b in range(1, 2 * p + 1):
                if math.gcd(b, 2 * p) != 1:
                    continue
                cert = certify_zero(gauss_monomial_point(b, 2 * p, 2), 2 * p)
                assert cert.mechanism == HALF_PERIOD_PAIRING, (p, b)

    def test_monomial_sweep_small_primes(self):
        for d in (3, 5, 7):
            for p in (3, 5, 11, 17, 23, 29):
                if math.gcd(d, p - 1) != 1:
                    continue
                for b in range(1, p):
                    cert = certify_zero(gauss_monomial_point(b, p, d), p)
                    assert cert.mechanism == RESIDUE_PERMUTATION, (d, p, b)


class TestEvalRationalExactly:
    def test_vanishing_mod_12(self):
        assert abs(eval_rational_exactly(RationalPoint((1, 1), 12), 12)) < 1e-12

    def test_half_repeated(self):
        assert abs(eval_rational_exactly(RationalPoint((1,), 2), 4)) < 1e-12

    def test_partial_period_matches_direct(self):
        p = RationalPoint((1, 1), 12)
        assert eval_rational_exactly(p, 7) == pytest.approx(
            eval_direct(p.to_torus(), 7), abs=1e-9
        )

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_histogram_sum_identity_random(self, seed):
        # spot version of the 500-point identity sweep
        rng = np.random.default_rng(seed)
        m = int(rng.integers(2, 10**4))
        d = int(rng.integers(1, 4))
        nums = tuple(int(a) for a in rng.integers(0, m, size=d))
        n = int(rng.integers(1, 10**5))
        point = RationalPoint(nums, m)
        assert abs(
            eval_rational_exactly(point, n) - eval_direct(point.to_torus(), n)
        ) <= 1e-8
