import math

import numpy as np
import pytest

from shuffle_regress import (
    NumericalBarrierError,
    SamplingMatrix,
    lower_barrier,
    row_sample,
    solve_weighted_ls,
    upper_barrier,
)


def orthonormal(n, k, seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(n, k)))
    return q


def approx_c(n, k):
    return 1.0 + 4.0 * (1.0 + math.sqrt(n / (4.0 * k))) ** 2


class TestBarriers:
    def test_lower_pinned(self):
        # A = (2), l = 0, l' = 1: 1/(0.5) * 1 - 1 = 1
        assert lower_barrier([1.0], 1.0, [[2.0]], 0.0) == pytest.approx(1.0)

    def test_upper_pinned(self):
        # B = diag(0), u = 1, u' = 2: (1/4)/(1/2) + 1/2 = 1
        assert upper_barrier([1.0], 1.0, [0.0], 1.0) == pytest.approx(1.0)

    def test_zero_x_zero_potential(self):
        assert lower_barrier([0.0, 0.0], 1.0, [[2.0, 0.0], [0.0, 3.0]], 0.0) == 0.0
        assert upper_barrier([0.0, 0.0], 1.0, [0.0, 0.5], 1.0) == 0.0

    def test_quadratic_scaling(self):
        a = [[2.0, 0.1], [0.1, 3.0]]
        x = np.array([0.4, -0.7])
        assert lower_barrier(2 * x, 1.0, a, 0.0) == pytest.approx(
            4 * lower_barrier(x, 1.0, a, 0.0)
        )
        bd = [0.2, 0.6]
        assert upper_barrier(2 * x, 1.0, bd, 1.0) == pytest.approx(
            4 * upper_barrier(x, 1.0, bd, 1.0)
        )

    def test_lower_diag_extra(self):
        # A = diag(2, 3), l = 0, l' = 1, x = e1:
        # denom = (1 + 1/2) - (1/2 + 1/3) = 2/3; val = 1/(2/3) - 1 = 0.5
        assert lower_barrier([1.0, 0.0], 1.0, [[2.0, 0.0], [0.0, 3.0]], 0.0) == pytest.approx(0.5)

    def test_upper_diag_extra(self):
        # B = diag(0, 0), u = 2, u' = 3: denom = 1 - 2/3 = 1/3
        # val = (1/9)/(1/3) + 1/3 = 2/3
        assert upper_barrier([1.0, 0.0], 1.0, [0.0, 0.0], 2.0) == pytest.approx(2.0 / 3.0)

    def test_upper_requires_clearance(self):
        with pytest.raises(NumericalBarrierError):
            upper_barrier([1.0], 0.5, [2.0], 1.0)

    def test_lower_singular_shift(self):
        with pytest.raises(NumericalBarrierError):
            lower_barrier([1.0], 1.0, [[1.0]], 0.0)


class TestSamplingMatrix:
    def test_dense_and_apply(self):
        s = SamplingMatrix(n=3, rows=((1, 2.0), None, (0, -1.0)))
        d = s.dense()
        assert d.shape == (3, 3)
        v = np.array([5.0, 7.0, 9.0])
        assert np.array_equal(s.apply(v), d @ v)
        assert list(s.apply(v)) == [14.0, 0.0, -5.0]

    def test_column_bounds(self):
        with pytest.raises(ValueError):
            SamplingMatrix(n=2, rows=((2, 1.0),))


class TestRowSample:
    def test_minimal_case_shape(self):
        s = row_sample(np.array([[1.0]]))
        assert s.r == 4 and s.n == 1
        assert all(e is not None and e[0] == 0 for e in s.rows)

    def test_row_budget_and_sparsity(self):
        for seed, (n, k) in enumerate([(8, 1), (12, 2), (16, 3), (20, 4)]):
            u = orthonormal(n, k, seed)
            s = row_sample(u)
            assert s.r == 4 * k
            dense = s.dense()
            assert (np.count_nonzero(dense, axis=1) <= 1).all()
            assert np.linalg.matrix_rank(dense @ u) == k

    def test_explicit_r(self):
        u = orthonormal(6, 2, 3)
        s = row_sample(u, r=10)
        assert s.r == 10

    def test_r_below_minimum(self):
        with pytest.raises(ValueError):
            row_sample(orthonormal(6, 2, 0), r=7)

    def test_repetition_allows_r_above_n(self):
        # more sampled rows than source rows is fine: rows repeat
        u = orthonormal(2, 2, 1)
        s = row_sample(u)
        assert s.r == 8
        cols = [e[0] for e in s.rows if e is not None]
        assert len(set(cols)) <= 2

    def test_non_orthonormal_rejected(self):
        with pytest.raises(ValueError):
            row_sample(np.array([[1.0], [1.0]]))

    def test_deterministic(self):
        u = orthonormal(10, 2, 4)
        s1 = row_sample(u)
        s2 = row_sample(u)
        assert s1 == s2

    def test_c_approximation(self):
        # sampled LS beats c times the true optimum on random targets
        rng = np.random.default_rng(9)
        for n, k in [(8, 1), (16, 2), (32, 3), (64, 4)]:
            u = orthonormal(n, k, n + k)
            s = row_sample(u)
            c = approx_c(n, k)
            for _ in range(5):
                b = rng.normal(size=n)
                w_hat = solve_weighted_ls(s, u, b)
                opt = float(((u @ (u.T @ b) - b) ** 2).sum())
                got = float(((u @ w_hat - b) ** 2).sum())
                assert got <= c * opt + 1e-9


class TestSolveWeightedLs:
    def test_consistent_recovers(self):
        u = orthonormal(8, 2, 5)
        s = row_sample(u)
        w0 = np.array([1.5, -0.25])
        w = solve_weighted_ls(s, u, u @ w0)
        assert np.allclose(w, w0, atol=1e-10)

    def test_all_zero_rows_gives_zero(self):
        s = SamplingMatrix(n=3, rows=(None, None))
        w = solve_weighted_ls(s, np.ones((3, 2)), np.ones(3))
        assert np.array_equal(w, np.zeros(2))

    def test_shape_validation(self):
        s = SamplingMatrix(n=2, rows=((0, 1.0),))
        with pytest.raises(ValueError):
            solve_weighted_ls(s, np.ones((3, 1)), np.ones(3))
