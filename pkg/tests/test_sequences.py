"""Sequence grammar: term evaluation, exact series classification, and
the derived weighted series, all checked against brute-force partial
sums."""

import math
from fractions import Fraction as F

import pytest

from qgends.errors import InvariantError, SchemaError
from qgends.sequences import (Constant, CumulativeProduct, Explicit, Geometric,
                              Power, inverse_weight_series, parse_sequence,
                              product_series, weighted_volume_series)


def brute_partial(seq, upto):
    return math.fsum(float(seq.term(n)) for n in range(upto))


class TestEval:
    def test_geometric(self):
        s = Geometric(F(1), F(1, 2))
        assert s.term(3) == F(1, 8)

    def test_constant(self):
        assert Constant(F(2)).term(100) == 2

    def test_explicit_prefix_then_tail(self):
        s = Explicit((F(5),), Constant(F(1)))
        assert s.term(0) == 5
        assert s.term(1) == 1

    def test_power_is_exact_for_integer_exponent(self):
        s = Power(F(1), F(2))
        assert s.term(3) == F(1, 16)

    def test_power_decay(self):
        s = Power(F(2), F(1))
        assert s.term(0) == 2
        assert s.term(1) == 1


class TestSeriesSum:
    def test_geometric_quarter(self):
        out = Geometric(F(1), F(1, 4)).series_sum()
        assert out.finite and out.value == F(4, 3) and out.error_bound == 0.0

    def test_constant_diverges(self):
        assert not Constant(F(1)).series_sum().finite

    def test_harmonic_diverges(self):
        assert not Power(F(1), F(1)).series_sum().finite

    def test_geometric_ratio_one_diverges(self):
        assert not Geometric(F(2), F(1)).series_sum().finite

    def test_basel(self):
        out = Power(F(1), F(2)).series_sum()
        assert out.finite
        assert out.value_float == pytest.approx(math.pi ** 2 / 6, abs=1e-12)

    def test_explicit_adds_prefix(self):
        s = Explicit((F(10),), Geometric(F(1), F(1, 2)))
        assert s.series_sum().value == 12

    @pytest.mark.parametrize("seq,tail_bound", [
        # tail bounds: geometric r^N head / (1-r); power integral comparison
        (Geometric(F(1), F(1, 4)), lambda n: 0.25 ** n / 0.75),
        (Geometric(F(3), F(9, 10)), lambda n: 3 * 0.9 ** n / 0.1),
        (Power(F(1), F(3)), lambda n: n ** -2.0 / 2.0),
        (Power(F(2), F(3, 2)), lambda n: 2 * 2.0 * n ** -0.5),
        (Explicit((F(7), F(1, 3)), Geometric(F(1), F(2, 5))),
         lambda n: 0.4 ** (n - 2) / 0.6),
    ])
    def test_partial_sums_approach_finite_value(self, seq, tail_bound):
        out = seq.series_sum()
        assert out.finite
        checkpoints = (10, 50, 200, 800)
        deltas = [abs(out.value_float - brute_partial(seq, n)) for n in checkpoints]
        assert all(b <= a + 1e-15 for a, b in zip(deltas, deltas[1:]))
        for n, delta in zip(checkpoints, deltas):
            assert delta <= tail_bound(n) + 1e-12

    def test_geometric_partial_sums_below_nano(self):
        seq = Geometric(F(1), F(1, 4))
        assert abs(seq.series_sum().value_float - brute_partial(seq, 40)) < 1e-9

    @pytest.mark.parametrize("seq,bound", [
        (Constant(F(1)), 1e6),
        (Power(F(1), F(1)), 10.0),
        (Geometric(F(1), F(3, 2)), 1e6),
    ])
    def test_divergent_partial_sums_exceed_bounds(self, seq, bound):
        assert not seq.series_sum().finite
        total, n = 0.0, 0
        while total <= bound:
            total += float(seq.term(n))
            n += 1
            assert n < 2_000_000
        assert total > bound

    def test_tail_sum_exact(self):
        s = Geometric(F(1), F(1, 2))
        assert s.tail_sum(3).value == F(1, 4)

    def test_error_bound_honoured_for_polynomial_geometric(self):
        # sum (n+1)(n+2)/4^n = 128/27 (derivatives of the geometric series)
        from qgends.sequences import GeomPoly, geompoly_series
        gp = GeomPoly(F(1), F(1, 4), ((F(1), F(1)), (F(2), F(1))))
        out = geompoly_series(gp, 0)
        assert abs(out.value_float - 128.0 / 27.0) <= max(out.error_bound, 1e-12)


class TestWeightedSeries:
    def test_tree_volume_finite(self):
        out = weighted_volume_series(Constant(F(2)), Geometric(F(1), F(1, 4)))
        assert out.value == 4

    def test_tree_volume_divergent(self):
        out = weighted_volume_series(Constant(F(2)), Geometric(F(1), F(1, 2)))
        assert not out.finite

    def test_inverse_weight_matches_brute_force(self):
        b, ell = Constant(F(2)), Geometric(F(1), F(1, 4))
        out = inverse_weight_series(b, ell)
        cum = CumulativeProduct(b)
        brute = math.fsum(float(ell.term(k)) / float(cum.mu(k)) for k in range(80))
        assert out.value == F(4, 7)
        assert out.value_float == pytest.approx(brute, abs=1e-12)

    def test_inverse_weight_shifted(self):
        out = inverse_weight_series(Constant(F(2)), Geometric(F(1), F(1, 4)), start=1)
        assert out.value == F(1, 14)

    def test_growing_branching_volume_diverges(self):
        out = weighted_volume_series(Geometric(F(2), F(2)), Geometric(F(1), F(1, 4)))
        assert not out.finite

    def test_growing_branching_inverse_converges(self):
        b, ell = Geometric(F(2), F(2)), Geometric(F(1), F(1, 4))
        out = inverse_weight_series(b, ell)
        cum = CumulativeProduct(b)
        brute = math.fsum(float(ell.term(k)) / float(cum.mu(k)) for k in range(40))
        assert out.finite
        assert out.value_float == pytest.approx(brute, abs=1e-12)

    def test_product_series_matches_brute_force(self):
        s = Power(F(1), F(-1))          # n + 1
        ell = Geometric(F(1), F(1, 4))
        out = product_series(((s, 0), (s, 1), (ell, 0)))
        brute = math.fsum(float(s.term(n)) * float(s.term(n + 1)) * float(ell.term(n))
                          for n in range(200))
        assert out.finite
        assert out.value_float == pytest.approx(brute, abs=1e-11)

    def test_cumulative_product_convention(self):
        cum = CumulativeProduct(Constant(F(2)))
        assert cum.mu(-1) == 1
        assert [cum.mu(n) for n in range(4)] == [2, 4, 8, 16]


class TestParsing:
    def test_roundtrip(self):
        doc = {"kind": "explicit", "prefix": [1, "1/3"],
               "tail": {"kind": "geometric", "a": 1, "r": "1/2"}}
        seq = parse_sequence(doc)
        assert parse_sequence(seq.to_json()) == seq
        assert seq.is_exact

    def test_float_marks_inexact(self):
        assert not parse_sequence({"kind": "constant", "c": 0.25}).is_exact

    def test_unknown_kind(self):
        with pytest.raises(SchemaError):
            parse_sequence({"kind": "fibonacci"})

    def test_unknown_field(self):
        with pytest.raises(SchemaError):
            parse_sequence({"kind": "constant", "c": 1, "d": 2})

    def test_bad_fraction_string(self):
        with pytest.raises(SchemaError):
            parse_sequence({"kind": "constant", "c": "one"})


class TestIntegerValidation:
    def test_accepts_constant_two(self):
        Constant(F(2)).require_integer_at_least(2, "b")

    def test_rejects_one(self):
        with pytest.raises(InvariantError):
            Constant(F(1)).require_integer_at_least(2, "b")

    def test_rejects_fractional_ratio(self):
        with pytest.raises(InvariantError):
            Geometric(F(2), F(3, 2)).require_integer_at_least(2, "b")

    def test_accepts_growing_integer_geometric(self):
        Geometric(F(2), F(3)).require_integer_at_least(2, "b")

    def test_accepts_explicit_prefix(self):
        Explicit((F(5), F(3)), Constant(F(2))).require_integer_at_least(2, "b")

    def test_rejects_decaying_power(self):
        with pytest.raises(InvariantError):
            Power(F(4), F(1)).require_integer_at_least(2, "b")
