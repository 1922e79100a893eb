"""Blow-up witness reports."""

from fractions import Fraction as F

import pytest

from qgends.errors import NoQualifyingSequence
from qgends.graphspec import ChainWithAttachments, HalfLinePath
from qgends.sequences import Constant, Geometric
from qgends.spectral import witness_nonclosed


class TestTreeWitness:
    def test_ratios_strictly_increase(self, binary_tree_finite_volume):
        rows = witness_nonclosed(binary_tree_finite_volume, -1.0, 5)
        ratios = [r.ratio for r in rows]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] / ratios[0] >= 10.0

    def test_growth_factor_tracks_length_ratio(self, binary_tree_finite_volume):
        # interval lengths shrink by 1/4 per level, so the ratio grows ~16x
        rows = witness_nonclosed(binary_tree_finite_volume, -1.0, 5)
        for row in rows[2:]:
            assert row.growth == pytest.approx(16.0, rel=0.01)

    def test_boundary_residual_vanishes(self, binary_tree_finite_volume):
        rows = witness_nonclosed(binary_tree_finite_volume, -1.0, 4)
        assert all(r.boundary_residual == 0.0 for r in rows)

    def test_sup_normalisation(self, binary_tree_finite_volume):
        rows = witness_nonclosed(binary_tree_finite_volume, -1.0, 3)
        assert all(r.sup_norm == 1.0 for r in rows)

    def test_hamiltonian_norm_is_lambda_squared(self, binary_tree_finite_volume):
        rows = witness_nonclosed(binary_tree_finite_volume, -2.0, 3)
        for r in rows:
            assert r.ham_sq == pytest.approx(4.0 * r.l2_sq, rel=1e-12)

    def test_other_negative_lambda_works(self, binary_tree_finite_volume):
        rows = witness_nonclosed(binary_tree_finite_volume, -0.5, 4)
        ratios = [r.ratio for r in rows]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))

    def test_lambda_must_be_negative(self, binary_tree_finite_volume):
        with pytest.raises(ValueError):
            witness_nonclosed(binary_tree_finite_volume, 1.0, 3)


class TestQualification:
    def test_infinite_volume_tree_rejected(self, binary_tree_infinite_volume):
        with pytest.raises(NoQualifyingSequence):
            witness_nonclosed(binary_tree_infinite_volume, -1.0, 3)

    def test_finite_graph_rejected(self, three_star):
        with pytest.raises(NoQualifyingSequence):
            witness_nonclosed(three_star, -1.0, 3)

    def test_one_ended_attachments_rejected(self):
        spec = ChainWithAttachments(
            ell=Constant(F(1)),
            attachment=HalfLinePath(ell=Geometric(F(1), F(1, 2))),
            scaling=Geometric(F(1), F(1, 2)))
        with pytest.raises(NoQualifyingSequence):
            witness_nonclosed(spec, -1.0, 3)

    def test_identical_attachments_rejected(self, figure_one_chain):
        spec = ChainWithAttachments(ell=figure_one_chain.ell,
                                    attachment=figure_one_chain.attachment,
                                    scaling=Constant(F(1)))
        with pytest.raises(NoQualifyingSequence):
            witness_nonclosed(spec, -1.0, 3)


class TestChainWitness:
    def test_line_attachments_grow(self, figure_one_chain):
        rows = witness_nonclosed(figure_one_chain, -1.0, 6)
        ratios = [r.ratio for r in rows]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))
        # halving scale roughly quadruples the ratio once the arms are short
        assert ratios[-1] / ratios[-2] == pytest.approx(4.0, rel=0.2)

    def test_tree_attachments_grow(self, binary_tree_finite_volume):
        spec = ChainWithAttachments(ell=Constant(F(1)),
                                    attachment=binary_tree_finite_volume,
                                    scaling=Geometric(F(1), F(1, 2)))
        rows = witness_nonclosed(spec, -1.0, 5)
        ratios = [r.ratio for r in rows]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))

    def test_boundary_residuals_vanish(self, figure_one_chain):
        rows = witness_nonclosed(figure_one_chain, -1.0, 4)
        assert all(r.boundary_residual == 0.0 for r in rows)


def test_thread_pool_matches_serial(binary_tree_finite_volume, monkeypatch):
    serial = witness_nonclosed(binary_tree_finite_volume, -1.0, 4)
    monkeypatch.setenv("QGENDS_THREADS", "3")
    threaded = witness_nonclosed(binary_tree_finite_volume, -1.0, 4)
    assert [r.ratio for r in serial] == [r.ratio for r in threaded]


def test_layer_ratios_match_edgewise_graph_integrals(binary_tree_finite_volume):
    """Independent route: realise the level-1 element edgewise on actual
    truncations (alternating pair below the two children of a
    generation-1 vertex) and integrate with the closed-form edge
    profiles.  The graph-side ratio must converge, as the truncation
    deepens, to the layer-side ratio reported by the witness."""
    import math
    from qgends.metric_graph import truncate
    from qgends.radial import RadialTreeData
    from qgends.spectral.profiles import EdgeSolution
    from qgends.spectral.shooting import dirichlet_channel_element
    from qgends.spectral import witness_nonclosed

    lam, level = -1.0, 1
    spec = binary_tree_finite_volume
    arm = dirichlet_channel_element(RadialTreeData(spec), lam, level)
    target = witness_nonclosed(spec, lam, 1)[0].ratio

    def graph_ratio(depth):
        g = truncate(spec, depth)
        sols = []
        for sign, top in ((1.0, "o.0.0"), (-1.0, "o.0.1")):
            for u, v, length in g.edges:
                if v == top or v.startswith(top + "."):
                    k = v.count(".")          # generation of the child end
                    layer = arm.layers[(k - 1) - level]
                    sols.append(EdgeSolution(u, v, length, lam,
                                             sign * layer.a, sign * layer.b))
        l2 = math.fsum(e.l2_sq() for e in sols)
        grad = math.fsum(e.grad_sq() for e in sols)
        return grad / (l2 + lam * lam * l2)

    deviations = [abs(graph_ratio(d) - target) / target for d in (6, 9, 12)]
    assert deviations[0] > deviations[1] > deviations[2]
    assert deviations[2] < 1e-3
