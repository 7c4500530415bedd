import math

import numpy as np
import pytest

from weyl_lab.errors import ContractError, HypothesisViolationError
from weyl_lab.exactzero import RationalPoint, gauss_monomial_point
from weyl_lab.perturb import (
    KIND_GAUSS,
    KIND_MONOMIAL,
    KIND_QUADRATIC,
    KIND_SHIFTED,
    BoundProfile,
    continuity_check,
    fitted_constant,
    gauss_profile,
    incomplete_bound_scan,
    quadratic_profile,
    report_table,
    scan_table,
    tau_scaling_probe,
)


def brute_prefix_max(m, a, b, span):
    """max_{N<=span} |sum_{n<=N} e_m(a n + b n^2)| by direct enumeration."""
    n = np.arange(1, span + 1)
    terms = np.exp(2j * np.pi * ((a * n + b * n * n) % m) / m)
    return float(np.max(np.abs(np.cumsum(terms))))


def brute_window_max(m, phases_fn, span, max_len=None):
    """max over windows (M, M+N] inside [1, span] of |S(M+N) - S(M)|."""
    n = np.arange(1, span + 1)
    terms = np.exp(2j * np.pi * (phases_fn(n) % m) / m)
    prefix = np.concatenate([[0], np.cumsum(terms)])
    diffs = np.abs(prefix[None, :] - prefix[:, None])
    if max_len is not None:
        i, j = np.indices(diffs.shape)
        diffs[np.abs(i - j) > max_len] = 0.0
    return float(diffs.max())


class TestIncompleteScans:
    def test_gauss_p3_matches_enumeration(self):
        scan = incomplete_bound_scan(KIND_GAUSS, 3)
        assert len(scan) == 1
        p, ratio = scan[0]
        assert p == 3
        expected = max(brute_prefix_max(3, 0, b, 3) for b in (1, 2))
        assert ratio == pytest.approx(expected / math.sqrt(3), abs=1e-9)

    def test_gauss_small_primes_match_enumeration(self):
        scan = dict(incomplete_bound_scan(KIND_GAUSS, 13))
        for p in (3, 5, 7, 11, 13):
            expected = max(
                brute_prefix_max(p, 0, b, p) for b in range(1, p)
            )
            assert scan[p] == pytest.approx(expected / math.sqrt(p), abs=1e-9)

    def test_shifted_matches_window_enumeration(self):
        # the scan covers all windows M, N <= p through the shift reduction
        for p in (5, 7, 11):
            scan = dict(incomplete_bound_scan(KIND_SHIFTED, p))
            expected = max(
                brute_window_max(
                    p, lambda n, a=a, b=b: a * n + b * n * n, 2 * p, max_len=p
                )
                for a in range(p)
                for b in range(1, p)
            )
            assert scan[p] == pytest.approx(expected / math.sqrt(p), abs=1e-9)

    def test_monomial_matches_window_enumeration(self):
        for p in (5, 7, 11):
            scan = dict(incomplete_bound_scan(KIND_MONOMIAL, p, d=3))
            expected = max(
                brute_window_max(p, lambda n, a=a: a * n**3, 2 * p)
                for a in range(1, p)
            )
            denom = math.sqrt(p) * math.log(p)
            assert scan[p] == pytest.approx(expected / denom, abs=1e-9)

    def test_quadratic_matches_prefix_enumeration(self):
        for p in (3, 5):
            scan = dict(incomplete_bound_scan(KIND_QUADRATIC, p))
            expected = max(
                brute_prefix_max(4 * p, a, b, 4 * p)
                for a in range(1, 4 * p + 1)
                for b in range(1, 4 * p + 1)
                if math.gcd(a * b, 2 * p) == 1
            )
            denom = math.sqrt(p) * math.log(p)
            assert scan[p] == pytest.approx(expected / denom, abs=1e-9)

    def test_ratios_bounded_small_scale(self):
        # single recorded constant per kind over small primes
        assert fitted_constant(incomplete_bound_scan(KIND_GAUSS, 97)) <= 4.0
        assert fitted_constant(incomplete_bound_scan(KIND_SHIFTED, 47)) <= 4.0
        assert fitted_constant(
            incomplete_bound_scan(KIND_MONOMIAL, 47, d=3)
        ) <= 4.0
        assert fitted_constant(incomplete_bound_scan(KIND_QUADRATIC, 29)) <= 4.0

    def test_sampled_scan_is_seeded(self):
        a = incomplete_bound_scan(KIND_SHIFTED, 31, sample_size=20, seed=5)
        b = incomplete_bound_scan(KIND_SHIFTED, 31, sample_size=20, seed=5)
        assert a == b

    def test_exhaustive_cap(self):
        with pytest.raises(ContractError):
            incomplete_bound_scan(KIND_SHIFTED, 10**5)

    def test_unknown_kind(self):
        with pytest.raises(ContractError):
            incomplete_bound_scan("nope", 10)

    def test_scan_table_round_numbers(self):
        scan = incomplete_bound_scan(KIND_GAUSS, 7)
        table = scan_table(KIND_GAUSS, scan)
        lines = table.splitlines()
        assert lines[0] == "kind\tp\tworst_ratio"
        assert len(lines) == 1 + len(scan)


class TestBoundProfile:
    def test_contract(self):
        with pytest.raises(ContractError):
            BoundProfile(-1.0, 0.0, 1.0, 0.5)
        with pytest.raises(ContractError):
            BoundProfile(0.0, 0.0, 1.0, -0.5)
        with pytest.raises(ContractError):
            BoundProfile(0.0, 0.0, 0.0, 0.5)

    def test_envelope(self):
        prof = BoundProfile(1.0, 2.0, 3.0, 0.5)
        assert prof.envelope(10) == pytest.approx(23.0)


class TestContinuityCheck:
    def test_tau_zero_corner_is_exact_zero(self):
        anchor = gauss_monomial_point(1, 6, 2)
        report = continuity_check(anchor, gauss_profile(3, 0.0), 6)
        assert report.lhs == 0.0
        assert report.ratio == 0.0

    def test_gauss_anchor_bounded_ratio(self):
        p = 13
        anchor = gauss_monomial_point(1, 2 * p, 2)
        report = continuity_check(
            anchor, gauss_profile(p, 1.0), 2 * p, samples=60, seed=2
        )
        assert 0 < report.lhs <= 2 * report.n
        assert report.ratio <= 8.0
        assert report.c_fit > 0

    def test_quadratic_anchor_bounded_ratio(self):
        anchor = RationalPoint((1, 1), 12)
        report = continuity_check(
            anchor, quadratic_profile(3, 1.0), 52, samples=60, seed=2
        )
        assert report.ratio <= 8.0

    def test_reproducible_bit_for_bit(self):
        anchor = gauss_monomial_point(1, 10, 2)
        prof = gauss_profile(5, 0.5)
        a = continuity_check(anchor, prof, 10, samples=20, seed=9)
        b = continuity_check(anchor, prof, 10, samples=20, seed=9)
        assert a == b

    def test_declared_hypothesis_violation(self):
        anchor = gauss_monomial_point(1, 6, 2)
        prof = BoundProfile(0.0, 0.0, math.sqrt(3), 0.5, c=1e-6)
        with pytest.raises(HypothesisViolationError) as exc:
            continuity_check(anchor, prof, 6)
        assert exc.value.m >= 1
        assert exc.value.observed > exc.value.allowed

    def test_bad_args(self):
        anchor = gauss_monomial_point(1, 6, 2)
        with pytest.raises(ContractError):
            continuity_check(anchor, gauss_profile(3, 0.5), 6, samples=0)
        with pytest.raises(ContractError):
            continuity_check(anchor, gauss_profile(3, 0.5), 0)


class TestTauScaling:
    def test_three_taus_flat_band(self):
        p = 13
        anchor = gauss_monomial_point(1, 2 * p, 2)
        reports = tau_scaling_probe(
            anchor, gauss_profile(p, 1.0), 2 * p, [0.1, 0.5, 1.0], seed=3
        )
        assert len(reports) == 3
        ratios = [r.ratio for r in reports]
        assert max(ratios) / min(ratios) <= 10.0

    def test_doubling_tau_roughly_doubles_lhs(self):
        p = 13
        anchor = gauss_monomial_point(1, 2 * p, 2)
        r1, r2 = tau_scaling_probe(
            anchor, gauss_profile(p, 1.0), 2 * p, [0.25, 0.5],
            samples=80, seed=3,
        )
        assert r2.lhs <= 4.0 * r1.lhs

    def test_rejects_out_of_range_tau(self):
        anchor = gauss_monomial_point(1, 6, 2)
        with pytest.raises(ContractError):
            tau_scaling_probe(anchor, gauss_profile(3, 1.0), 6, [0.0])
        with pytest.raises(ContractError):
            tau_scaling_probe(anchor, gauss_profile(3, 1.0), 6, [5.0])
        with pytest.raises(ContractError):
            tau_scaling_probe(anchor, gauss_profile(3, 1.0), 6, [])

    def test_report_table_shape(self):
        anchor = gauss_monomial_point(1, 6, 2)
        reports = tau_scaling_probe(
            anchor, gauss_profile(3, 1.0), 6, [0.5, 1.0], samples=5
        )
        lines = report_table(reports).splitlines()
        assert lines[0].startswith("alpha\tkappa\tK\ttau")
        assert len(lines) == 3
