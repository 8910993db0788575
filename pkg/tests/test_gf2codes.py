import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import EXAMPLE_G
from mmwave_sc.gf2codes import (
    CodeSpec, InvalidParameterError, NotFullRankError, SupportVector, TooExpensiveError,
    count_supports, enumerate_supports, golay_parity_check, hamming_parity_check, identity_code,
    is_injective_over_supports, min_measurements_lower_bound, min_singular_value, rank_gf2,
    read_code, reed_muller_generator, to_standard_form, write_code,
)


def brute_force_injective(G, L):
    seen = {}
    for sup in enumerate_supports(G.shape[1], L):
        v = np.zeros(G.shape[1], dtype=int)
        v[list(sup)] = 1
        key = tuple((G.astype(int) @ v) % 2)
        if key in seen:
            return False
        seen[key] = sup
    return True


def random_full_rank(rng, m, n):
    while True:
        M = rng.integers(0, 2, size=(m, n), dtype=np.uint8)
        if rank_gf2(M) == min(m, n):
            return M


class TestRank:
    def test_identity(self):
        assert rank_gf2(np.eye(4, dtype=int)) == 4

    def test_zero(self):
        assert rank_gf2(np.zeros((3, 5), dtype=int)) == 0

    def test_example_matrix(self):
        assert rank_gf2(EXAMPLE_G) == 4

    def test_dependent_rows_over_gf2(self):
        # row3 = row1 xor row2, independent over the reals but not over GF(2)
        M = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
        assert rank_gf2(M) == 2
        assert np.linalg.matrix_rank(M) == 3


class TestHamming:
    def test_r4_columns_are_1_to_15(self):
        H = hamming_parity_check(4)
        assert H.shape == (4, 15)
        values = [int("".join(map(str, H[:, j])), 2) for j in range(15)]
        assert values == list(range(1, 16))

    def test_r5_shape(self):
        assert hamming_parity_check(5).shape == (5, 31)

    def test_r2(self):
        assert hamming_parity_check(2).tolist() == [[0, 1, 1], [1, 0, 1]]

    @pytest.mark.parametrize("r", [0, 1, -3])
    def test_bad_r(self, r):
        with pytest.raises(InvalidParameterError):
            hamming_parity_check(r)

    @pytest.mark.parametrize("r", [2, 3, 4, 5, 6])
    def test_single_path_injective(self, r):
        H = hamming_parity_check(r)
        cols = {tuple(c) for c in H.T}
        assert len(cols) == H.shape[1] and (0,) * r not in cols
        assert is_injective_over_supports(H, 1)

    @pytest.mark.parametrize("r", [3, 4, 5])
    def test_not_injective_for_two_paths(self, r):
        assert not is_injective_over_supports(hamming_parity_check(r), 2)


class TestGolay:
    def test_shape_rank_standard_form(self):
        G = golay_parity_check()
        assert G.shape == (11, 23)
        assert rank_gf2(G) == 11
        assert np.array_equal(G[:, :11], np.eye(11, dtype=G.dtype))

    def test_codeword_weights(self):
        # null space of the parity-check matrix is the (23,12) Golay code
        G = golay_parity_check().astype(int)
        P = G[:, 11:]
        # systematic generator of the null space: [P^T | I_12]
        gen = np.hstack([P.T, np.eye(12, dtype=int)])
        weights = set()
        for bits in itertools.product((0, 1), repeat=12):
            c = (np.array(bits) @ gen) % 2
            assert not ((G @ c) % 2).any()
            weights.add(int(c.sum()))
        assert weights == {0, 7, 8, 11, 12, 15, 16, 23}

    def test_injective_up_to_three_paths(self):
        G = golay_parity_check()
        assert is_injective_over_supports(G, 3)
        assert not is_injective_over_supports(G, 4)

    def test_lower_bound_met_with_equality(self):
        assert golay_parity_check().shape[0] == min_measurements_lower_bound(23, 3)


class TestOtherCodes:
    def test_reed_muller_2_5_is_self_dual_distance_8(self):
        G = reed_muller_generator(2, 5)
        assert G.shape == (16, 32)
        assert rank_gf2(G) == 16
        assert not ((G.astype(int) @ G.T.astype(int)) % 2).any()
        assert is_injective_over_supports(G, 3)

    def test_shortened_golay(self):
        G = CodeSpec.parse("golay23:15").matrix()
        assert G.shape == (11, 15)
        assert is_injective_over_supports(G, 3)

    def test_identity(self):
        assert is_injective_over_supports(identity_code(4), 2)


class TestInjectivity:
    def test_example_matrix_single_path(self):
        assert is_injective_over_supports(EXAMPLE_G, 1)

    def test_identity_two_paths(self):
        assert is_injective_over_supports(np.eye(4, dtype=int), 2)

    def test_repeated_column(self):
        G = np.array([[1, 1, 0], [0, 0, 1]])
        assert not is_injective_over_supports(G, 1)

    @settings(max_examples=60, deadline=None)
    @given(m=st.integers(2, 6), n=st.integers(1, 10), L=st.integers(1, 3), seed=st.integers(0, 2**31))
    def test_matches_pairwise_brute_force(self, m, n, L, seed):
        G = np.random.default_rng(seed).integers(0, 2, size=(m, n))
        L = min(L, n)
        assert is_injective_over_supports(G, L) == brute_force_injective(G, L)

    def test_exhaustive_small_range(self, rng):
        for n in range(1, 13):
            for L in range(1, min(3, n) + 1):
                for m in (3, 5, 8):
                    G = rng.integers(0, 2, size=(m, n))
                    assert is_injective_over_supports(G, L) == brute_force_injective(G, L)

    def test_budget_cap(self):
        G = np.random.default_rng(0).integers(0, 2, size=(30, 64))
        with pytest.raises(TooExpensiveError):
            is_injective_over_supports(G, 4, budget=10_000)


class TestLowerBound:
    @pytest.mark.parametrize("n,L,expected", [(8, 1, 4), (15, 1, 4), (31, 1, 5), (23, 3, 11),
                                              (5, 0, 0), (23, 0, 0)])
    def test_values(self, n, L, expected):
        assert min_measurements_lower_bound(n, L) == expected

    def test_counts(self):
        assert count_supports(23, 3) == 2048
        assert count_supports(8, 1) == 9

    def test_monotone(self):
        for n in range(1, 30):
            for L in range(0, min(n, 5)):
                b = min_measurements_lower_bound(n, L)
                assert min_measurements_lower_bound(n + 1, L) >= b
                assert min_measurements_lower_bound(n, L + 1) >= b


class TestStandardForm:
    def test_identity_unchanged(self):
        R, perm = to_standard_form(np.eye(4, dtype=int))
        assert np.array_equal(R, np.eye(4)) and list(perm) == [0, 1, 2, 3]

    def test_example_unchanged(self):
        R, perm = to_standard_form(EXAMPLE_G)
        assert np.array_equal(R, EXAMPLE_G) and list(perm) == list(range(8))

    def test_scrambled_rows(self, rng):
        P = rng.integers(0, 2, size=(3, 3))
        G0 = np.hstack([np.eye(3, dtype=int), P])
        A = random_full_rank(rng, 3, 3)
        R, perm = to_standard_form((A @ G0) % 2)
        assert np.array_equal(R[:, :3], np.eye(3))
        assert np.array_equal(R, G0)

    def test_permutation_records_columns(self, rng):
        for _ in range(30):
            G = random_full_rank(rng, 4, 9)
            R, perm = to_standard_form(G)
            assert np.array_equal(R[:, :4], np.eye(4))
            assert rank_gf2(np.vstack([R, G[:, perm]])) == 4  # same row space
            for L in (1, 2):
                assert is_injective_over_supports(R, L) == is_injective_over_supports(G, L)

    def test_rank_deficient(self):
        with pytest.raises(NotFullRankError):
            to_standard_form(np.array([[1, 1, 0], [1, 1, 0]]))


class TestSingularValue:
    def test_identity(self):
        assert min_singular_value(np.eye(4)) == pytest.approx(1.0)

    def test_rank_one(self):
        assert min_singular_value(np.array([[1, 1], [1, 1]])) == pytest.approx(0.0, abs=1e-9)

    def test_wide_matrix_uses_row_space(self):
        # a wide full-row-rank matrix has m nonzero singular values
        s = np.linalg.svd(EXAMPLE_G.astype(float), compute_uv=False)
        assert min_singular_value(EXAMPLE_G) == pytest.approx(s.min())
        assert min_singular_value(EXAMPLE_G) > 1

    def test_standard_form_at_least_one(self, rng):
        for _ in range(50):
            m = int(rng.integers(1, 9))
            n = m + int(rng.integers(0, 12))
            G = np.hstack([np.eye(m, dtype=int), rng.integers(0, 2, size=(m, n - m))])
            assert min_singular_value(G) >= 1 - 1e-9

    def test_named_codes(self):
        assert min_singular_value(golay_parity_check()) == pytest.approx(np.sqrt(2))
        assert min_singular_value(hamming_parity_check(4)) == pytest.approx(2.0)


class TestGf2ToReal:
    def test_gf2_independent_columns_are_real_independent(self, rng):
        done = 0
        while done < 200:
            m = int(rng.integers(2, 10))
            k = int(rng.integers(1, m + 1))
            M = rng.integers(0, 2, size=(m, k))
            if rank_gf2(M) != k:
                continue
            assert np.linalg.svd(M.astype(float), compute_uv=False).min() > 0
            done += 1

    def test_gf2_nonsingular_has_odd_determinant(self, rng):
        done = 0
        while done < 200:
            k = int(rng.integers(1, 9))
            M = rng.integers(0, 2, size=(k, k))
            if rank_gf2(M) != k:
                continue
            det = round(np.linalg.det(M.astype(float)))
            assert det % 2 == 1
            done += 1


class TestSupportVector:
    def test_round_trip(self):
        v = np.array([0, 1, 0, 0, 2.5])
        s = SupportVector.of(v)
        assert s.ones == (1, 4) and s.weight == 2
        assert s.to_array().tolist() == [0, 1, 0, 0, 1]

    def test_invalid(self):
        with pytest.raises(ValueError):
            SupportVector(3, (2, 1))
        with pytest.raises(ValueError):
            SupportVector(3, (0, 3))

    def test_enumeration_order(self):
        assert enumerate_supports(3, 2) == [(), (0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]


class TestCodeSpec:
    @pytest.mark.parametrize("text,shape", [("hamming:4", (4, 15)), ("golay23", (11, 23)),
                                            ("rm:2:5", (16, 32)), ("identity:3", (3, 3)),
                                            ("golay23:15", (11, 15))])
    def test_parse(self, text, shape):
        spec = CodeSpec.parse(text)
        assert (spec.m, spec.n) == shape and spec.matrix().shape == shape

    def test_file_round_trip(self, tmp_path):
        p = tmp_path / "g.txt"
        write_code(EXAMPLE_G, p)
        assert p.read_text().splitlines()[0] == "4 8"
        assert np.array_equal(read_code(p), EXAMPLE_G)
        assert np.array_equal(CodeSpec.parse(str(p)).matrix(), EXAMPLE_G)

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            CodeSpec.parse("turbo:3")
