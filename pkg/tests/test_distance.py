import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ensel.distance import (
    combined_feature_distance,
    density_distance,
    feature_distance,
    fourier_decompose,
    fourier_reconstruct,
    support_domain,
    support_volume,
)
from ensel.errors import (
    EmptyOverlap,
    GridMismatch,
    LengthMismatch,
    TooFewSamples,
    WeightOutOfRange,
)
from ensel.model import CylGrid, DensityField, FeatureSet, NormKind

from oracles import naive_density_distance, naive_support_volume


def field(grid, values):
    return DensityField(grid, np.asarray(values, dtype=float))


GRID_2x1 = CylGrid(2, 1, 1.0, 1.0)


class TestSupportDomain:
    def test_both_positive_everywhere(self):
        g = CylGrid(3, 2, 0.5, 0.5)
        mask = support_domain(field(g, np.ones(6)), field(g, np.full(6, 2.0)))
        assert mask.mask.all()

    def test_gt_zero_everywhere(self):
        g = CylGrid(3, 2, 0.5, 0.5)
        mask = support_domain(field(g, np.zeros(6)), field(g, np.ones(6)))
        assert not mask.mask.any()

    def test_disjoint_supports(self):
        g = CylGrid(4, 1, 1.0, 1.0)
        gt = field(g, [1, 1, 0, 0])
        sim = field(g, [0, 0, 1, 1])
        assert not support_domain(gt, sim).mask.any()

    def test_grid_mismatch(self):
        a = field(CylGrid(2, 2, 1.0, 1.0), np.ones(4))
        b = field(CylGrid(2, 2, 1.0, 0.5), np.ones(4))
        with pytest.raises(GridMismatch):
            support_domain(a, b)


class TestSupportVolume:
    def test_empty_mask_is_zero(self):
        g = CylGrid(2, 2, 1.0, 1.0)
        mask = support_domain(field(g, np.zeros(4)), field(g, np.ones(4)))
        assert support_volume(mask) == 0.0

    def test_two_cell_example(self):
        # n_r=2, n_z=1, dR=dz=1, R = {0.5, 1.5}: V+ = 2*pi*(0.5+1.5) = 4*pi
        mask = support_domain(field(GRID_2x1, [1, 1]), field(GRID_2x1, [1, 1]))
        assert support_volume(mask) == pytest.approx(4 * math.pi, rel=1e-15)

    def test_linear_in_spacing(self):
        g1 = CylGrid(4, 2, 0.3, 0.2)
        g2 = CylGrid(4, 2, 0.6, 0.2)
        m1 = support_domain(field(g1, np.ones(8)), field(g1, np.ones(8)))
        m2 = support_domain(field(g2, np.ones(8)), field(g2, np.ones(8)))
        # doubling dR doubles every R_j as well: V+ scales by 4 overall,
        # but per unit radius the sum is linear in dR
        assert support_volume(m2) == pytest.approx(4 * support_volume(m1), rel=1e-12)

    def test_matches_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            g = CylGrid(
                int(rng.integers(1, 7)),
                int(rng.integers(1, 7)),
                float(rng.uniform(0.1, 2)),
                float(rng.uniform(0.1, 2)),
            )
            vals_a = rng.uniform(0, 1, g.n_cells) * (rng.random(g.n_cells) > 0.3)
            vals_b = rng.uniform(0, 1, g.n_cells) * (rng.random(g.n_cells) > 0.3)
            mask = support_domain(field(g, vals_a), field(g, vals_b))
            expected = naive_support_volume(g, vals_a, vals_b)
            assert support_volume(mask) == pytest.approx(expected, rel=1e-12, abs=1e-300)


class TestDensityDistance:
    def test_identical_fields_zero(self):
        g = CylGrid(3, 3, 0.5, 0.5)
        vals = np.linspace(1, 2, 9)
        f = field(g, vals)
        for norm in NormKind:
            assert density_distance(f, field(g, vals.copy()), norm) == 0.0

    def test_constant_offset(self):
        g = CylGrid(4, 3, 0.7, 0.4)
        gt = field(g, np.full(12, 1.25))
        sim = field(g, np.full(12, 1.75))
        for norm in NormKind:
            assert density_distance(gt, sim, norm) == pytest.approx(0.5, rel=1e-12)

    def test_worked_two_cell_example(self):
        gt = field(GRID_2x1, [1.0, 1.0])
        sim = field(GRID_2x1, [2.0, 3.0])
        assert density_distance(gt, sim, NormKind.L1) == pytest.approx(1.75, rel=1e-12)
        assert density_distance(gt, sim, NormKind.L2) == pytest.approx(
            math.sqrt(3.25), rel=1e-12
        )
        assert density_distance(gt, sim, NormKind.LINF) == 2.0

    def test_empty_overlap_raises(self):
        g = CylGrid(4, 1, 1.0, 1.0)
        gt = field(g, [1, 1, 0, 0])
        sim = field(g, [0, 0, 1, 1])
        for norm in NormKind:
            with pytest.raises(EmptyOverlap):
                density_distance(gt, sim, norm)

    def test_grid_mismatch(self):
        a = field(CylGrid(2, 2, 1.0, 1.0), np.ones(4))
        b = field(CylGrid(4, 1, 1.0, 1.0), np.ones(4))
        with pytest.raises(GridMismatch):
            density_distance(a, b, NormKind.L1)


@st.composite
def field_pairs(draw):
    n_r = draw(st.integers(1, 6))
    n_z = draw(st.integers(1, 6))
    d_r = draw(st.floats(0.05, 2.0, allow_nan=False))
    d_z = draw(st.floats(0.05, 2.0, allow_nan=False))
    g = CylGrid(n_r, n_z, d_r, d_z)
    n = g.n_cells
    # exactly zero or comfortably normal: subnormal cell values would let
    # alpha-scaling underflow to zero and change the support domain
    cell = st.one_of(st.just(0.0), st.floats(1e-6, 10.0, allow_nan=False))
    a = draw(st.lists(cell, min_size=n, max_size=n))
    b = draw(st.lists(cell, min_size=n, max_size=n))
    return g, np.array(a), np.array(b)


class TestDensityDistanceProperties:
    @given(field_pairs())
    @settings(max_examples=200, deadline=None)
    def test_oracle_equivalence_and_invariants(self, pair):
        g, a, b = pair
        gt, sim = field(g, a), field(g, b)
        overlap = ((a > 0) & (b > 0)).any()
        if not overlap:
            with pytest.raises(EmptyOverlap):
                density_distance(gt, sim, NormKind.L1)
            return
        d1 = density_distance(gt, sim, NormKind.L1)
        d2 = density_distance(gt, sim, NormKind.L2)
        dinf = density_distance(gt, sim, NormKind.LINF)
        # oracle agreement
        for norm, got in (("L1", d1), ("L2", d2), ("LINF", dinf)):
            want = naive_density_distance(g, a, b, norm)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-300)
        # ordering (weighted mean <= rms <= max)
        assert d1 <= d2 * (1 + 1e-12)
        assert d2 <= dinf * (1 + 1e-12)
        # symmetry
        assert density_distance(sim, gt, NormKind.L2) == d2
        # zero iff equal on D+
        mask = (a > 0) & (b > 0)
        equal_on_overlap = np.array_equal(a[mask], b[mask])
        assert (d2 == 0.0) == equal_on_overlap

    @given(field_pairs(), st.floats(0.1, 10.0, allow_nan=False))
    @settings(max_examples=100, deadline=None)
    def test_scaling_covariance(self, pair, alpha):
        g, a, b = pair
        if not ((a > 0) & (b > 0)).any():
            return
        for norm in NormKind:
            base = density_distance(field(g, a), field(g, b), norm)
            scaled = density_distance(field(g, alpha * a), field(g, alpha * b), norm)
            assert scaled == pytest.approx(alpha * base, rel=1e-9, abs=1e-300)


class TestFeatureDistance:
    def test_identical_vectors(self):
        fs = FeatureSet((1.0, 2.0), (3.0, 4.0))
        assert feature_distance(fs, fs, NormKind.L2) == (0.0, 0.0)

    def test_l2_example(self):
        gt = FeatureSet((1.0, 0.0), (0.0, 0.0))
        sim = FeatureSet((0.0, 1.0), (0.0, 0.0))
        d_shock, d_edge = feature_distance(gt, sim, NormKind.L2)
        assert d_shock == pytest.approx(math.sqrt(2), rel=1e-15)
        assert d_edge == 0.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            feature_distance(
                FeatureSet((1.0,), (1.0,)), FeatureSet((1.0, 2.0), (1.0, 2.0)), NormKind.L1
            )

    def test_all_norms(self):
        gt = FeatureSet((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
        sim = FeatureSet((3.0, -4.0, 0.0), (1.0, 1.0, 1.0))
        assert feature_distance(gt, sim, NormKind.L1) == (7.0, 3.0)
        assert feature_distance(gt, sim, NormKind.L2)[0] == pytest.approx(5.0)
        assert feature_distance(gt, sim, NormKind.LINF) == (4.0, 1.0)


class TestCombinedFeatureDistance:
    def test_arithmetic(self):
        assert combined_feature_distance(0.2, 0.1, 1.0, 1.0) == pytest.approx(0.3)

    def test_zero_edge_weight(self):
        assert combined_feature_distance(0.7, 0.3, 1.0, 0.0) == 0.7

    def test_weight_out_of_range(self):
        with pytest.raises(WeightOutOfRange):
            combined_feature_distance(0.1, 0.1, -0.1, 1.0)
        with pytest.raises(WeightOutOfRange):
            combined_feature_distance(0.1, 0.1, 0.5, 1.5)

    @given(
        st.floats(0, 5, allow_nan=False),
        st.floats(0, 5, allow_nan=False),
        st.floats(0, 1),
        st.floats(0, 1),
        st.floats(0, 1),
    )
    @settings(max_examples=100, deadline=None)
    def test_linear_in_each_weight(self, ds, de, w1, w2, we):
        # f(w1) + f(w2) == f(w1 + w2) + f(0) with the other weight fixed
        lhs = combined_feature_distance(ds, de, w1, we) + combined_feature_distance(
            ds, de, w2, we
        )
        mid = 0.5 * (w1 + w2)
        rhs = 2 * combined_feature_distance(ds, de, mid, we)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


class TestFourierDecompose:
    def test_constant_curve(self):
        coeffs = fourier_decompose(np.full(32, 2.5), 7)
        assert coeffs[0] == pytest.approx(2.5, abs=1e-12)
        assert np.allclose(coeffs[1:], 0.0, atol=1e-12)

    def test_mode2_cosine(self):
        theta = np.arange(64) * (2 * np.pi / 64)
        curve = 1.7 + 0.25 * np.cos(2 * theta)
        coeffs = fourier_decompose(curve, 9)
        # layout: [a0, a1, b1, a2, b2, a3, b3, a4, b4]
        assert coeffs[0] == pytest.approx(1.7, abs=1e-12)
        assert coeffs[3] == pytest.approx(0.25, abs=1e-12)
        others = np.delete(coeffs, [0, 3])
        assert np.allclose(others, 0.0, atol=1e-12)

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            fourier_decompose(np.ones(8), 5)

    @given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=9, max_size=9))
    @settings(max_examples=100, deadline=None)
    def test_reconstruction_round_trip(self, coeffs):
        curve = fourier_reconstruct(np.array(coeffs), 64)
        back = fourier_decompose(curve, 9)
        assert np.allclose(back, coeffs, atol=1e-10)
