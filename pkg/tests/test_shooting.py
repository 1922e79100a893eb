"""Layer propagation and deficiency elements."""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from qgends.errors import NoFiniteVolumeEnd
from qgends.graphspec import HalfLinePath, RadialTree
from qgends.radial import RadialTreeData
from qgends.sequences import Geometric
from qgends.spectral import (deficiency_element, find_deficiency_elements,
                             gram_matrix, gram_smallest_eigenvalue)
from qgends.spectral.shooting import (_line_plan, _radial_plan,
                                      dirichlet_channel_element, propagate)


class TestPropagation:
    def test_constant_weight_matches_cosh(self):
        # many layers with mu = 1 must reproduce cosh exactly
        ell = Geometric(F(1, 2), F(1, 2))  # total length 1
        arm = propagate(_line_plan(ell), -1.0, 1.0, 0.0)
        for x in (0.0, 0.25, 0.5, 0.75, 0.93):
            assert arm.value(x) == pytest.approx(math.cosh(x), abs=5e-15)

    def test_constant_weight_matches_sinh(self):
        ell = Geometric(F(1, 2), F(1, 2))
        arm = propagate(_line_plan(ell), -4.0, 0.0, 2.0)  # f'(0) = 2, q = 2
        for x in (0.1, 0.5, 0.9):
            assert arm.value(x) == pytest.approx(math.sinh(2.0 * x), abs=5e-14)

    def test_l2_norm_of_cosh(self):
        ell = Geometric(F(1, 2), F(1, 2))
        arm = propagate(_line_plan(ell), -1.0, 1.0, 0.0)
        want = 0.5 + math.sinh(2.0) / 4.0  # integral of cosh^2 over [0, 1]
        assert arm.l2_sq() == pytest.approx(want, rel=1e-10)

    def test_flux_continuity_across_weight_jump(self, binary_tree_finite_volume):
        data = RadialTreeData(binary_tree_finite_volume)
        arm = propagate(_radial_plan(data, 0), -1.0, 1.0, 0.0)
        # f continuous and mu f' continuous at the first breakpoint
        first, second = arm.layers[0], arm.layers[1]
        from qgends.spectral.profiles import basis_values
        C, S, dC, dS = basis_values(-1.0, first.width)
        f_end = first.a * C + first.b * S
        flux_end = first.mu * (first.a * dC + first.b * dS)
        C2, S2, dC2, dS2 = basis_values(-1.0, 0.0)
        f_start = second.a * C2 + second.b * S2
        flux_start = second.mu * (second.a * dC2 + second.b * dS2)
        assert f_start == pytest.approx(f_end, rel=1e-14)
        assert flux_start == pytest.approx(flux_end, rel=1e-14)
        # the slope itself drops by the branching factor
        assert second.mu / first.mu == 2.0


class TestDeficiencyCounts:
    def test_summable_half_line_has_one(self, half_line_summable):
        els = find_deficiency_elements(half_line_summable, -1.0)
        assert len(els) == 1
        assert els[0].h1_sq() == pytest.approx(1.0, rel=1e-12)

    def test_unit_half_line_has_none(self, half_line_unit):
        assert find_deficiency_elements(half_line_unit, -1.0) == []
        with pytest.raises(NoFiniteVolumeEnd):
            deficiency_element(half_line_unit, -1.0)

    def test_full_line_both_summable_has_two(self, full_line_both_summable):
        els = find_deficiency_elements(full_line_both_summable, -1.0)
        assert len(els) == 2
        assert gram_smallest_eigenvalue(els) > 1e-6

    def test_full_line_one_summable_has_one(self, full_line_one_summable):
        els = find_deficiency_elements(full_line_one_summable, -1.0)
        assert len(els) == 1

    def test_counts_match_end_census(self, half_line_summable, half_line_unit,
                                     full_line_both_summable,
                                     full_line_one_summable):
        from qgends.ends import count_finite_volume
        for spec in (half_line_summable, half_line_unit,
                     full_line_both_summable, full_line_one_summable):
            found = len(find_deficiency_elements(spec, -1.0))
            assert found == count_finite_volume(spec).finite_value

    def test_finite_volume_tree_symmetric_channel(self, binary_tree_finite_volume):
        els = find_deficiency_elements(binary_tree_finite_volume, -1.0)
        assert len(els) == 1
        assert els[0].end_id == "radial-symmetric-channel"

    def test_infinite_volume_tree_raises(self, binary_tree_infinite_volume):
        with pytest.raises(NoFiniteVolumeEnd):
            deficiency_element(binary_tree_infinite_volume, -1.0)


class TestElementShapes:
    def test_half_line_element_is_cosh(self):
        # total length 1: the Neumann-start solution is proportional to cosh
        spec = HalfLinePath(ell=Geometric(F(1, 2), F(1, 2)))
        element = deficiency_element(spec, -1.0)
        arm = element.arms["axis"]
        scale = arm.value(0.0)
        for x in (0.2, 0.5, 0.8):
            assert arm.value(x) == pytest.approx(scale * math.cosh(x), rel=1e-12)

    def test_lambda_zero_gives_constants(self, half_line_summable):
        element = deficiency_element(half_line_summable, 0.0)
        assert element.grad_sq() == pytest.approx(0.0, abs=1e-15)
        arm = element.arms["axis"]
        assert arm.value(0.3) == pytest.approx(arm.value(1.2), rel=1e-12)

    def test_full_line_elements_decay_on_infinite_side(self, full_line_one_summable):
        element = find_deficiency_elements(full_line_one_summable, -1.0)[0]
        assert element.end_id == "positive"
        neg = element.arms["negative"]
        assert neg.tail is not None
        c, _ = neg.tail
        assert neg.value(3.0) == pytest.approx(c * math.exp(-3.0), rel=1e-12)

    def test_gram_of_single_element_is_one(self, half_line_summable):
        els = find_deficiency_elements(half_line_summable, -1.0)
        assert gram_matrix(els)[0, 0] == pytest.approx(1.0, rel=1e-12)

    def test_gram_entries_are_symmetric(self, full_line_both_summable):
        els = find_deficiency_elements(full_line_both_summable, -1.0)
        gram = gram_matrix(els)
        assert np.allclose(gram, gram.T)

    def test_channel_selector(self, full_line_both_summable):
        element = deficiency_element(full_line_both_summable, -1.0, "negative")
        assert element.end_id == "negative"
        with pytest.raises(NoFiniteVolumeEnd):
            deficiency_element(full_line_both_summable, -1.0, "sideways")


class TestDirichletChannels:
    def test_boundary_value_is_zero(self, binary_tree_finite_volume):
        data = RadialTreeData(binary_tree_finite_volume)
        arm = dirichlet_channel_element(data, -1.0, 2)
        assert arm.boundary_value == 0.0
        assert arm.value(0.0) == 0.0

    def test_solution_is_increasing(self, binary_tree_finite_volume):
        data = RadialTreeData(binary_tree_finite_volume)
        arm = dirichlet_channel_element(data, -1.0, 1)
        total = sum(l.width for l in arm.layers)
        xs = np.linspace(0.0, total * 0.999, 40)
        vals = [arm.value(x) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_scaled_template_channels(self, binary_tree_finite_volume):
        # halving all lengths keeps the channel well defined
        data = RadialTreeData(binary_tree_finite_volume, scale=F(1, 2))
        arm = dirichlet_channel_element(data, -1.0, 0)
        assert arm.end_estimate > 0.0
        assert sum(l.width for l in arm.layers) == pytest.approx(
            0.5 * 4.0 / 3.0, rel=1e-9)


class TestSlowlySummableLengths:
    def test_power_law_half_line_element(self):
        # lengths (n+1)^-2: summable but far from geometric; the constant
        # weight lets the arm close exactly, so the element is still cosh
        from qgends.sequences import Power
        spec = HalfLinePath(ell=Power(F(1), F(2)))
        element = deficiency_element(spec, -1.0)
        arm = element.arms["axis"]
        total = math.pi ** 2 / 6.0
        scale = arm.value(0.0)
        for x in (0.3, 1.0, total * 0.999):
            assert arm.value(x) == pytest.approx(scale * math.cosh(x), rel=1e-10)
        assert arm.closure_l2 == 0.0 and arm.closure_grad == 0.0

    def test_power_law_full_line_count(self):
        from qgends.sequences import Constant, Power
        from qgends.graphspec import FullLinePath
        spec = FullLinePath(ell_pos=Power(F(1), F(2)), ell_neg=Constant(F(1)))
        els = find_deficiency_elements(spec, -1.0)
        assert len(els) == 1
