import numpy as np
import pytest

from combidetect import (
    DimensionMismatchError,
    IndexSet,
    Observation,
    ProblemInstance,
    SeededRng,
    canonical_distance,
    gaussian_sample,
    make_class,
    overlap,
)
from combidetect.core import as_vector


class TestIndexSet:
    def test_sorts_and_validates(self):
        s = IndexSet((5, 2, 9), 10)
        assert s.indices == (2, 5, 9)
        assert len(s) == 3
        assert s.n == 10

    def test_zero_based(self):
        np.testing.assert_array_equal(IndexSet((3, 1), 4).zero_based(), [0, 2])

    @pytest.mark.parametrize("bad", [(), (0, 1), (1, 11), (2, 2)])
    def test_rejects_bad_indices(self, bad):
        with pytest.raises(ValueError):
            IndexSet(bad, 10)

    def test_encode_decode_roundtrip(self):
        s = IndexSet((7, 1, 4), 9)
        assert s.encode() == "1,4,7"
        assert IndexSet.decode(s.encode(), 9) == s

    def test_hashable_and_frozen(self):
        s = IndexSet((1, 2), 5)
        assert s == IndexSet((2, 1), 5)
        assert hash(s) == hash(IndexSet((2, 1), 5))
        with pytest.raises(AttributeError):
            s.n = 6


class TestSetAlgebra:
    def test_overlap(self):
        a = IndexSet((1, 2, 3), 8)
        b = IndexSet((3, 4, 5), 8)
        assert overlap(a, b) == 1
        assert overlap(a, a) == 3

    def test_overlap_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            overlap(IndexSet((1,), 4), IndexSet((1,), 5))

    def test_distance_matches_symmetric_difference(self):
        a = IndexSet((1, 2, 3), 8)
        b = IndexSet((3, 4, 5), 8)
        # |A Δ B| = 4
        assert canonical_distance(a, b) == pytest.approx(2.0)
        assert canonical_distance(a, a) == 0.0

    def test_distance_equals_sqrt_2K_when_disjoint(self):
        a = IndexSet((1, 2), 8)
        b = IndexSet((5, 6), 8)
        assert canonical_distance(a, b) == pytest.approx(np.sqrt(4.0))

    def test_distance_requires_equal_sizes(self):
        with pytest.raises(ValueError):
            canonical_distance(IndexSet((1,), 5), IndexSet((1, 2), 5))


class TestSeededRng:
    def test_same_address_same_stream(self):
        a = SeededRng(42).child(3, 1).generator().standard_normal(5)
        b = SeededRng(42).child(3).child(1).generator().standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_different_children_differ(self):
        root = SeededRng(42)
        a = root.child(0).generator().standard_normal(5)
        b = root.child(1).generator().standard_normal(5)
        assert not np.array_equal(a, b)

    def test_order_of_derivation_is_irrelevant(self):
        r = SeededRng(7)
        first = r.child(2).generator().standard_normal(3)
        _ = r.child(5).generator().standard_normal(1000)
        again = r.child(2).generator().standard_normal(3)
        np.testing.assert_array_equal(first, again)

    def test_rejects_negative_keys(self):
        with pytest.raises(ValueError):
            SeededRng(-1)
        with pytest.raises(ValueError):
            SeededRng(1).child(-2)


class TestObservation:
    def test_validates_and_freezes(self):
        x = Observation(np.array([1.0, 2.0]))
        assert x.n == 2
        with pytest.raises(ValueError):
            x.values[0] = 9.0

    @pytest.mark.parametrize("bad", [np.array([]), np.zeros((2, 2)), np.array([np.nan]), np.array([np.inf])])
    def test_rejects_bad_vectors(self, bad):
        with pytest.raises(ValueError):
            Observation(bad)

    def test_as_vector_accepts_lists_and_observations(self):
        np.testing.assert_array_equal(as_vector([1, 2, 3], 3), [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(as_vector(Observation(np.ones(2)), 2), [1.0, 1.0])
        with pytest.raises(DimensionMismatchError):
            as_vector([1.0, 2.0], 3)


class TestProblemInstance:
    def test_exposes_class_shape(self):
        inst = ProblemInstance(make_class("disjoint", N=3, K=2), 0.7)
        assert inst.n == 6
        assert inst.K == 2

    @pytest.mark.parametrize("mu", [-0.1, np.nan, np.inf])
    def test_rejects_bad_mu(self, mu):
        spec = make_class("stars", m=4)
        with pytest.raises(ValueError):
            ProblemInstance(spec, mu)


class TestGaussianSample:
    def test_null_draw_is_standard_normal_stream(self):
        spec = make_class("disjoint", N=2, K=2)
        inst = ProblemInstance(spec, 1.0)
        rng = SeededRng(3).child(8)
        x = gaussian_sample(inst, None, rng)
        expected = rng.generator().standard_normal(4)
        np.testing.assert_array_equal(x.values, expected)

    def test_shift_lands_on_hypothesis_only(self):
        spec = make_class("disjoint", N=2, K=2)
        inst = ProblemInstance(spec, 5.0)
        s = IndexSet((3, 4), 4)
        rng = SeededRng(3).child(9)
        x = gaussian_sample(inst, s, rng)
        noise = rng.generator().standard_normal(4)
        np.testing.assert_array_equal(x.values[:2], noise[:2])
        np.testing.assert_allclose(x.values[2:], noise[2:] + 5.0)

    def test_rejects_foreign_hypothesis(self):
        spec = make_class("disjoint", N=2, K=2)
        inst = ProblemInstance(spec, 1.0)
        with pytest.raises(ValueError):
            gaussian_sample(inst, IndexSet((1, 3), 4), SeededRng(0))

    def test_rejects_wrong_dimension(self):
        spec = make_class("disjoint", N=2, K=2)
        inst = ProblemInstance(spec, 1.0)
        with pytest.raises(DimensionMismatchError):
            gaussian_sample(inst, IndexSet((1, 2), 5), SeededRng(0))
