import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arrowspmm.generators import path, random_symmetric
from arrowspmm.sparse import (
    CooEntries,
    LinearArrangement,
    SparseSymMatrix,
    apply_row_permutation,
    csr_from_coo,
    dense_spmm_reference,
    pattern_only,
    permute_symmetric,
    same_entries,
    symmetrize,
)

from oracles import dense_triple_loop


def coo(triples, n):
    return csr_from_coo(CooEntries.from_triples(triples, n))


@st.composite
def sym_matrices(draw, max_n=40):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, 3 * n))
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    u, v = rng.integers(0, n, m), rng.integers(0, n, m)
    return symmetrize(SparseSymMatrix.from_edges(n, u, v, rng.uniform(-1, 1, m)))


@st.composite
def arrangements(draw, n):
    seed = draw(st.integers(0, 2**31))
    return LinearArrangement.from_forward(np.random.default_rng(seed).permutation(n))


class TestCsrFromCoo:
    def test_minimal_pair(self):
        a = coo([(0, 1, 1), (1, 0, 1)], 2)
        assert a.nnz == 2 and a.is_symmetric()

    def test_duplicates_summed(self):
        a = coo([(0, 1, 1), (0, 1, 2), (1, 0, 3)], 2)
        assert a.to_dense().tolist() == [[0, 3], [3, 0]]

    def test_exact_cancellation_dropped(self):
        assert coo([(0, 1, 1), (0, 1, -1)], 2).nnz == 0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            coo([(0, 2, 1.0)], 2)
        with pytest.raises(ValueError):
            coo([(-1, 0, 1.0)], 2)

    def test_columns_sorted_within_rows(self):
        a = coo([(0, 3, 1), (0, 1, 1), (0, 2, 1), (2, 0, 5)], 4)
        assert a.col_indices.tolist() == [1, 2, 3, 0]
        assert a.row_offsets.tolist() == [0, 3, 3, 4, 4]

    @given(sym_matrices())
    def test_coo_round_trip(self, a):
        assert same_entries(csr_from_coo(a.to_coo()), a)


class TestSymmetrize:
    def test_upper_path(self):
        a = symmetrize(coo([(0, 1, 1), (1, 2, 1)], 3))
        assert a.nnz == 4 and a.is_symmetric()

    def test_symmetric_input_doubles(self):
        p = path(4)
        assert same_entries(symmetrize(p), SparseSymMatrix(4, p.row_offsets, p.col_indices, 2 * p.values))
        assert same_entries(pattern_only(symmetrize(p)), p)

    def test_empty(self):
        assert symmetrize(SparseSymMatrix.empty(5)).nnz == 0

    def test_diagonal_doubles(self):
        assert symmetrize(coo([(1, 1, 3.0)], 2)).to_dense()[1, 1] == 6.0


class TestPermute:
    def test_identity(self):
        p = path(3)
        assert same_entries(permute_symmetric(p, LinearArrangement.identity(3)), p)

    def test_reversal_keeps_path(self):
        p = path(3)
        rev = LinearArrangement.from_forward([2, 1, 0])
        assert same_entries(permute_symmetric(p, rev), p)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            permute_symmetric(path(3), LinearArrangement.identity(4))

    @given(st.data())
    def test_round_trip_and_invariants(self, data):
        a = data.draw(sym_matrices())
        pi = data.draw(arrangements(a.n))
        b = permute_symmetric(a, pi)
        assert b.nnz == a.nnz and b.is_symmetric()
        assert sorted(b.values.tolist()) == sorted(a.values.tolist())
        inv = LinearArrangement.from_forward(pi.inverse)
        assert same_entries(permute_symmetric(b, inv), a)
        dense = a.to_dense()
        np.testing.assert_array_equal(b.to_dense()[np.ix_(pi.forward, pi.forward)], dense)


class TestReferenceMultiply:
    def test_identity(self, rng):
        eye = coo([(i, i, 1.0) for i in range(3)], 3)
        x = rng.random((3, 4))
        np.testing.assert_array_equal(dense_spmm_reference(eye, x), x)

    def test_path_degrees(self):
        assert dense_spmm_reference(path(3), np.ones((3, 1))).ravel().tolist() == [1, 2, 1]

    def test_against_triple_loop(self, rng, backend):
        a = random_symmetric(64, 6, 3)
        x = rng.random((64, 4))
        np.testing.assert_allclose(dense_spmm_reference(a, x), dense_triple_loop(a, x), rtol=0, atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            dense_spmm_reference(path(3), np.ones((4, 1)))

    @settings(max_examples=30)
    @given(sym_matrices(max_n=256), st.integers(0, 2**31))
    def test_linearity(self, a, seed):
        rng = np.random.default_rng(seed)
        x, x2 = rng.random((a.n, 3)), rng.random((a.n, 3))
        lhs = dense_spmm_reference(a, x + x2)
        rhs = dense_spmm_reference(a, x) + dense_spmm_reference(a, x2)
        scale = max(np.abs(lhs).max(initial=0), 1e-300)
        assert np.abs(lhs - rhs).max(initial=0) <= 1e-12 * scale


class TestRowPermutation:
    def test_identity(self, rng):
        x = rng.random((5, 2))
        np.testing.assert_array_equal(apply_row_permutation(x, LinearArrangement.identity(5)), x)

    def test_swap(self):
        x = np.array([[1.0], [2.0]])
        assert apply_row_permutation(x, LinearArrangement.from_forward([1, 0])).ravel().tolist() == [2, 1]

    def test_round_trip(self, rng):
        pi = LinearArrangement.from_forward(rng.permutation(20))
        x = rng.random((20, 3))
        back = apply_row_permutation(apply_row_permutation(x, pi), LinearArrangement.from_forward(pi.inverse))
        np.testing.assert_array_equal(back, x)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            apply_row_permutation(np.ones((3, 1)), LinearArrangement.identity(2))


class TestLinearArrangement:
    def test_rejects_non_permutation(self):
        with pytest.raises(ValueError):
            LinearArrangement.from_forward([0, 0, 1])

    def test_order_is_inverse(self):
        pi = LinearArrangement.from_order([2, 0, 1])
        assert pi.forward.tolist() == [1, 2, 0]
        assert pi.order.tolist() == [2, 0, 1]

    def test_composition(self):
        a = LinearArrangement.from_forward([1, 2, 0])
        b = LinearArrangement.from_forward([2, 0, 1])
        assert a.then(b) == LinearArrangement.identity(3)

    def test_subgraph_relabels(self):
        p = path(5)
        sub = p.subgraph(np.array([1, 2, 3]))
        assert sub.n == 3 and sub.num_edges == 2

    def test_constructor_does_not_freeze_caller_arrays(self):
        fwd = np.array([1, 0])
        LinearArrangement.from_forward(fwd)
        fwd[0] = 0  # still writable
