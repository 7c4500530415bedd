import math
import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weyl_lab.errors import CapacityError, ContractError
from weyl_lab.sumcore import (
    TorusPoint,
    eval_direct,
    eval_incremental,
    iter_partial_sum_blocks,
    trace,
)


def brute_sum(coords, n):
    """Independent oracle: exact rational phase reduction (floats are dyadic)."""
    from fractions import Fraction

    s = 0.0 + 0.0j
    for k in range(1, n + 1):
        phase = sum(
            (Fraction(c) * k**j for j, c in enumerate(coords, start=1)),
            Fraction(0),
        ) % 1
        s += cmath.exp(2j * math.pi * float(phase))
    return s


class TestTorusPoint:
    def test_reduces_mod_one(self):
        p = TorusPoint((1.25, -0.5))
        assert p.coords == (0.25, 0.5)
        assert p.degree == 2

    def test_empty_rejected(self):
        with pytest.raises(ContractError):
            TorusPoint(())


class TestEvalDirect:
    def test_zero_point(self):
        assert eval_direct(TorusPoint((0.0, 0.0)), 10) == pytest.approx(10 + 0j)

    def test_half(self):
        # e(1/2) + e(1) = -1 + 1
        assert eval_direct(TorusPoint((0.5,)), 2) == pytest.approx(0j, abs=1e-12)

    def test_quadratic_vanishing_mod_12(self):
        # (n + n^2)/12 summed over a full period of 12 cancels exactly
        assert abs(eval_direct(TorusPoint((1 / 12, 1 / 12)), 12)) < 1e-10

    def test_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            d = int(rng.integers(1, 6))
            coords = tuple(rng.random(d))
            n = int(rng.integers(1, 400))
            assert eval_direct(TorusPoint(coords), n) == pytest.approx(
                brute_sum(coords, n), abs=1e-9
            )

    def test_n_zero(self):
        assert eval_direct(TorusPoint((0.3,)), 0) == 0

    def test_overflowing_n_rejected(self):
        with pytest.raises(ContractError):
            eval_direct(TorusPoint((0.3,)), 2**53)


class TestEvalIncremental:
    def test_single_term_matches_direct(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            coords = tuple(rng.random(int(rng.integers(1, 6))))
            x = TorusPoint(coords)
            assert eval_incremental(x, 1) == pytest.approx(eval_direct(x, 1), abs=1e-14)

    def test_quadratic_vanishing_mod_12(self):
        assert abs(eval_incremental(TorusPoint((1 / 12, 1 / 12)), 12)) < 1e-8

    def test_oracle_equivalence_large_n(self):
        x = TorusPoint((0.31415926, 0.27182818))
        assert eval_incremental(x, 10**5) == pytest.approx(
            eval_direct(x, 10**5), abs=1e-8
        )

    def test_oracle_equivalence_random(self):
        # spot version of the acceptance sweep: 100 points, d <= 5, n <= 1e4
        rng = np.random.default_rng(11)
        for _ in range(100):
            d = int(rng.integers(1, 6))
            x = TorusPoint(tuple(rng.random(d)))
            n = int(rng.integers(1, 10**4 + 1))
            assert abs(eval_incremental(x, n) - eval_direct(x, n)) <= 1e-8


class TestTrace:
    def test_zero_point_full(self):
        t = trace(TorusPoint((0.0, 0.0)), 3, 1)
        assert t.full
        np.testing.assert_allclose(t.values, [1, 2, 3])

    def test_stride_checkpoints(self):
        t = trace(TorusPoint((1 / 12, 1 / 12)), 12, 12)
        assert list(t.checkpoints) == [12]
        assert abs(t.values[0]) < 1e-8

    def test_cubic_monomial_mod_5(self):
        # n^3/5 over the period 5: cubing permutes residues mod 5
        t = trace(TorusPoint((0.0, 0.0, 1 / 5)), 5, 1)
        assert abs(t.values[-1]) < 1e-10

    def test_final_checkpoint_always_present(self):
        t = trace(TorusPoint((0.3,)), 10, 4)
        assert list(t.checkpoints) == [4, 8, 10]

    def test_values_match_direct(self):
        x = TorusPoint((0.123, 0.456, 0.789))
        t = trace(x, 300, 37)
        for n, v in zip(t.checkpoints, t.values):
            assert v == pytest.approx(eval_direct(x, int(n)), abs=1e-9)

    def test_unit_step_property(self):
        rng = np.random.default_rng(2)
        x = TorusPoint(tuple(rng.random(3)))
        t = trace(x, 500, 1)
        steps = np.abs(np.diff(np.concatenate([[0j], t.values])))
        assert np.max(np.abs(steps - 1.0)) < 1e-9

    def test_capacity_error(self):
        with pytest.raises(CapacityError):
            trace(TorusPoint((0.3,)), 2**30, 1)

    def test_bad_stride(self):
        with pytest.raises(ContractError):
            trace(TorusPoint((0.3,)), 10, 0)


class TestStreamingBlocks:
    def test_partial_sum_blocks_cover_everything(self):
        x = TorusPoint((0.7071, 0.4142))
        direct = [eval_direct(x, n) for n in range(1, 40)]
        seen = {}
        for start, sums in iter_partial_sum_blocks(x, 39, block=16):
            for i, v in enumerate(sums):
                seen[start + i] = v
        assert sorted(seen) == list(range(1, 40))
        for n, v in seen.items():
            assert v == pytest.approx(direct[n - 1], abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 4),
    st.integers(1, 2000),
    st.integers(0, 2**32 - 1),
)
def test_triangle_bound(d, n, seed):
    rng = np.random.default_rng(seed)
    x = TorusPoint(tuple(rng.random(d)))
    assert abs(eval_incremental(x, n)) <= n * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 30), st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_periodicity_of_rational_points(m, k, seed):
    # phases at a/m are m-periodic in n, so S(km) = k * S(m)
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    nums = rng.integers(0, m, size=d)
    x = TorusPoint(tuple(int(a) / m for a in nums))
    s_m = eval_direct(x, m)
    s_km = eval_direct(x, k * m)
    assert abs(s_km - k * s_m) <= 1e-7 * k
