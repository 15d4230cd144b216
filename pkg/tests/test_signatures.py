"""Signature matrix construction, neuron filtering, exact Jaccard."""

from fractions import Fraction

import numpy as np
import pytest

from layerdist import (
    Layer,
    ParseError,
    SampleSet,
    ShapeError,
    activation_frequency,
    classify_neurons,
    compute_signature_matrix,
    exact_jaccard_distance,
    load_signature_matrix,
    save_signature_matrix,
)
from layerdist.signatures import pack_bits, popcount, unpack_bits
from tests.conftest import make_signature_matrix


def sample_set(points):
    pts = np.asarray(points, dtype=np.float64)
    bounds = [(float(pts[:, d].min()), float(pts[:, d].max())) for d in range(pts.shape[1])]
    return SampleSet(pts, bounds, seed=0, strategy="external")


class TestComputeSignatureMatrix:
    def test_half_plane(self):
        layer = Layer(np.array([[1.0, 0.0]]), np.array([0.0]), "relu")
        m = compute_signature_matrix(layer, sample_set([[1.0, 0.0], [-1.0, 0.0]]))
        np.testing.assert_array_equal(m.to_bool_matrix(), [[True, False]])

    def test_constant_negative_is_dead(self):
        layer = Layer(np.array([[0.0, 0.0]]), np.array([-1.0]), "relu")
        m = compute_signature_matrix(layer, sample_set([[3.0, 4.0], [0.5, -2.0]]))
        assert m.row_popcount(0) == 0

    def test_point_on_hyperplane_is_inactive(self):
        # strict inequality: z == 0 counts as off
        layer = Layer(np.array([[1.0, 1.0]]), np.array([-2.0]), "relu")
        m = compute_signature_matrix(layer, sample_set([[1.0, 1.0], [1.5, 1.0], [0.0, 0.0]]))
        np.testing.assert_array_equal(m.to_bool_matrix(), [[False, True, False]])

    def test_dimension_mismatch(self):
        layer = Layer(np.array([[1.0, 0.0, 0.0]]), np.array([0.0]), "relu")
        with pytest.raises(ShapeError):
            compute_signature_matrix(layer, sample_set([[1.0, 2.0]]))

    def test_row_permutation_equivariance(self):
        rng = np.random.default_rng(8)
        w = rng.normal(size=(12, 3))
        b = rng.normal(size=12)
        pts = sample_set(rng.uniform(-2, 2, size=(500, 3)))
        perm = rng.permutation(12)
        m = compute_signature_matrix(Layer(w, b, "relu"), pts)
        m_perm = compute_signature_matrix(Layer(w[perm], b[perm], "relu"), pts)
        np.testing.assert_array_equal(m.to_bool_matrix()[perm], m_perm.to_bool_matrix())

    def test_thread_count_does_not_change_result(self):
        rng = np.random.default_rng(9)
        layer = Layer(rng.normal(size=(33, 2)), rng.normal(size=33), "relu")
        pts = sample_set(rng.uniform(-5, 5, size=(1000, 2)))
        single = compute_signature_matrix(layer, pts, n_threads=1)
        multi = compute_signature_matrix(layer, pts, n_threads=4)
        np.testing.assert_array_equal(single.bits, multi.bits)

    def test_padding_bits_zero(self):
        rng = np.random.default_rng(10)
        layer = Layer(rng.normal(size=(5, 2)), rng.normal(size=5), "relu")
        pts = sample_set(rng.uniform(-5, 5, size=(70, 2)))  # 70 % 64 != 0
        m = compute_signature_matrix(layer, pts)
        mask = np.uint64((1 << (70 % 64)) - 1)
        assert not (m.bits[:, -1] & ~mask).any()


class TestActivationFrequency:
    def test_all_ones(self):
        m = make_signature_matrix([[1, 1, 1, 1]])
        np.testing.assert_array_equal(activation_frequency(m), [1.0])

    def test_half(self):
        m = make_signature_matrix([[1, 0, 0, 1]])
        np.testing.assert_array_equal(activation_frequency(m), [0.5])

    def test_zero(self):
        m = make_signature_matrix([[0, 0]])
        np.testing.assert_array_equal(activation_frequency(m), [0.0])


class TestClassifyNeurons:
    def test_reference_example(self):
        m = make_signature_matrix([[0, 0], [1, 1], [1, 0], [1, 0]])
        report = classify_neurons(m)
        assert report.dead == [0]
        assert report.always_active == [1]
        assert report.duplicate_groups == [[2, 3]]
        assert report.representatives == [2]

    def test_all_distinct(self):
        m = make_signature_matrix([[1, 0, 0], [0, 1, 0], [1, 1, 0]])
        report = classify_neurons(m)
        assert report.duplicate_groups == []
        assert report.representatives == [0, 1, 2]

    def test_stacked_copies_pair_up(self):
        rng = np.random.default_rng(12)
        rows = rng.integers(0, 2, size=(6, 40))
        rows[:, 0] = 1  # no dead rows
        rows[:, 1] = 0  # no always-active rows
        m = make_signature_matrix(np.vstack([rows, rows]))
        report = classify_neurons(m)
        group_of = {j: tuple(g) for g in report.duplicate_groups for j in g}
        for j in range(6):
            assert group_of[j] == group_of[j + 6], f"neuron {j} not grouped with its copy"

    def test_partition_is_exhaustive_and_disjoint(self):
        rng = np.random.default_rng(13)
        n = 40
        m = make_signature_matrix(rng.integers(0, 2, size=(n, 6)))
        report = classify_neurons(m)
        group_members = [j for g in report.duplicate_groups for j in g]
        group_reps = {g[0] for g in report.duplicate_groups}
        singles = set(report.representatives) - group_reps
        categories = [set(report.dead), set(report.always_active), set(group_members), singles]
        assert sum(len(c) for c in categories) == n
        assert set().union(*categories) == set(range(n))
        assert len(report.representatives) <= n
        for group in report.duplicate_groups:
            assert group[0] == min(group)
            assert group == sorted(group)


class TestExactJaccard:
    def test_identical_rows(self):
        m = make_signature_matrix([[1, 0, 1], [1, 0, 1]])
        assert exact_jaccard_distance(m, 0, 1) == 0.0

    def test_disjoint_rows(self):
        m = make_signature_matrix([[1, 1, 0], [0, 0, 1]])
        assert exact_jaccard_distance(m, 0, 1) == 1.0

    def test_partial_overlap(self):
        # |intersection| = 1, |union| = 3 counted by hand
        m = make_signature_matrix([[1, 1, 0], [0, 1, 1]])
        assert exact_jaccard_distance(m, 0, 1) == pytest.approx(1.0 - 1.0 / 3.0)

    def test_two_empty_rows(self):
        m = make_signature_matrix([[0, 0], [0, 0]])
        assert exact_jaccard_distance(m, 0, 1) == 0.0

    def test_one_empty_row(self):
        m = make_signature_matrix([[0, 0], [1, 0]])
        assert exact_jaccard_distance(m, 0, 1) == 1.0

    def test_index_error(self):
        m = make_signature_matrix([[1, 0]])
        with pytest.raises(IndexError):
            exact_jaccard_distance(m, 0, 1)

    def test_metric_axioms_on_random_triples(self):
        # triangle inequality checked in exact rational arithmetic
        rng = np.random.default_rng(14)
        rows = rng.integers(0, 2, size=(60, 96))
        m = make_signature_matrix(rows)

        def frac_distance(a, b):
            inter = int(np.sum(rows[a] & rows[b]))
            union = int(np.sum(rows[a] | rows[b]))
            return Fraction(0) if union == 0 else 1 - Fraction(inter, union)

        for _ in range(1000):
            i, j, k = rng.integers(0, 60, size=3)
            d_ij = frac_distance(i, j)
            d_ik = frac_distance(i, k)
            d_kj = frac_distance(k, j)
            assert d_ij <= d_ik + d_kj
            assert exact_jaccard_distance(m, i, j) == exact_jaccard_distance(m, j, i)
            assert 0.0 <= exact_jaccard_distance(m, i, j) <= 1.0
            assert exact_jaccard_distance(m, i, j) == pytest.approx(float(d_ij), abs=1e-15)
            if np.array_equal(rows[i], rows[j]):
                assert exact_jaccard_distance(m, i, j) == 0.0
            else:
                assert exact_jaccard_distance(m, i, j) > 0.0


class TestBitPacking:
    def test_oracle_against_naive_loops(self):
        # packed popcount / AND / OR must agree with element-wise booleans
        rng = np.random.default_rng(15)
        for _ in range(100):
            n_rows = int(rng.integers(1, 6))
            n_bits = int(rng.integers(1, 200))
            bits = rng.integers(0, 2, size=(n_rows, n_bits)).astype(bool)
            packed = pack_bits(bits)
            assert popcount(packed) == int(bits.sum())
            np.testing.assert_array_equal(unpack_bits(packed, n_bits), bits)
            if n_rows >= 2:
                naive_and = int(np.sum(bits[0] & bits[1]))
                naive_or = int(np.sum(bits[0] | bits[1]))
                assert popcount(packed[0] & packed[1]) == naive_and
                assert popcount(packed[0] | packed[1]) == naive_or


class TestSasmFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(16)
        m = make_signature_matrix(rng.integers(0, 2, size=(9, 130)))
        save_signature_matrix(m, tmp_path / "m.sasm")
        back = load_signature_matrix(tmp_path / "m.sasm")
        assert back.n_neurons == 9
        assert back.n_samples == 130
        np.testing.assert_array_equal(back.bits, m.bits)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "m.sasm"
        p.write_bytes(b"NOPE" + b"\x00" * 12)
        with pytest.raises(ParseError):
            load_signature_matrix(p)

    def test_truncated_payload(self, tmp_path):
        rng = np.random.default_rng(17)
        m = make_signature_matrix(rng.integers(0, 2, size=(4, 64)))
        p = tmp_path / "m.sasm"
        save_signature_matrix(m, p)
        p.write_bytes(p.read_bytes()[:-8])
        with pytest.raises(ParseError):
            load_signature_matrix(p)

    def test_nonzero_padding_rejected(self, tmp_path):
        m = make_signature_matrix([[1, 0, 1]])
        p = tmp_path / "m.sasm"
        save_signature_matrix(m, p)
        raw = bytearray(p.read_bytes())
        raw[-1] |= 0x80  # bit 63 of the only word is padding for n_samples=3
        p.write_bytes(bytes(raw))
        with pytest.raises(ParseError):
            load_signature_matrix(p)
