from fractions import Fraction

import pytest

from shuffle_regress import RankDeficiencyError
from shuffle_regress import _ratlin as rl


F = Fraction


class TestBasics:
    def test_matmul_identity(self):
        a = [[F(1), F(2)], [F(3), F(4)]]
        assert rl.matmul(a, rl.identity(2)) == [list(r) for r in a]

    def test_matvec(self):
        a = [[F(1), F(2)], [F(0), F(3)]]
        assert rl.matvec(a, [F(1), F(1, 2)]) == [F(2), F(3, 2)]

    def test_transpose(self):
        a = [[F(1), F(2), F(3)]]
        assert rl.transpose(a) == [[F(1)], [F(2)], [F(3)]]


class TestRankDet:
    def test_rank_full(self):
        assert rl.rank([[F(1), F(0)], [F(0), F(1)]]) == 2

    def test_rank_deficient(self):
        assert rl.rank([[F(1), F(2)], [F(2), F(4)]]) == 1

    def test_det(self):
        assert rl.det([[F(1), F(2)], [F(3), F(4)]]) == F(-2)
        assert rl.det([[F(2)]]) == F(2)

    def test_det_exact_fractions(self):
        a = [[F(1, 3), F(1, 7)], [F(1, 11), F(1, 13)]]
        assert rl.det(a) == F(1, 3) * F(1, 13) - F(1, 7) * F(1, 11)


class TestSolve:
    def test_unique(self):
        a = [[F(2), F(1)], [F(1), F(3)]]
        b = [F(5), F(10)]
        x = rl.solve(a, b)
        assert rl.matvec(a, x) == b

    def test_inconsistent_none(self):
        a = [[F(1), F(1)], [F(1), F(1)]]
        assert rl.solve(a, [F(1), F(2)]) is None

    def test_overdetermined_consistent(self):
        a = [[F(1)], [F(2)], [F(3)]]
        b = [F(2), F(4), F(6)]
        assert rl.solve(a, b) == [F(2)]

    def test_overdetermined_inconsistent(self):
        a = [[F(1)], [F(2)]]
        assert rl.solve(a, [F(1), F(3)]) is None


class TestInverse:
    def test_round_trip(self):
        a = [[F(1), F(2)], [F(3), F(5)]]
        inv = rl.inverse(a)
        assert rl.matmul(a, inv) == rl.identity(2)

    def test_singular_raises(self):
        with pytest.raises(RankDeficiencyError):
            rl.inverse([[F(1), F(2)], [F(2), F(4)]])


class TestPinv:
    def test_left_inverse_property(self):
        # pinv of a full-column-rank matrix is a left inverse
        a = [[F(1), F(0)], [F(1), F(1)], [F(0), F(2)]]
        p = rl.pinv_full_col_rank(a)
        assert rl.matmul(p, a) == rl.identity(2)

    def test_rank_deficient_raises(self):
        a = [[F(1), F(2)], [F(2), F(4)], [F(3), F(6)]]
        with pytest.raises(RankDeficiencyError):
            rl.pinv_full_col_rank(a)

    def test_square_matches_inverse(self):
        a = [[F(2), F(1)], [F(1), F(1)]]
        assert rl.pinv_full_col_rank(a) == rl.inverse(a)


class TestLeftNullspace:
    def test_integer_rows_annihilate(self):
        a = [[1, 0], [0, 1], [1, 1]]
        ns = rl.left_nullspace_int(a)
        assert len(ns) == 1
        row = ns[0]
        assert all(isinstance(v, int) for v in row)
        for j in range(2):
            assert sum(row[i] * a[i][j] for i in range(3)) == 0
        assert any(v != 0 for v in row)

    def test_full_row_rank_empty(self):
        assert rl.left_nullspace_int([[1, 0], [0, 1]]) == []

    def test_dimension_count(self):
        # 4 rows of a rank-2 matrix leave a 2-dim left nullspace
        a = [[1, 0], [0, 1], [1, 1], [2, 3]]
        ns = rl.left_nullspace_int(a)
        assert len(ns) == 2
        for row in ns:
            for j in range(2):
                assert sum(row[i] * a[i][j] for i in range(4)) == 0
