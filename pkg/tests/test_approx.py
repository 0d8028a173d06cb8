import math

import numpy as np
import pytest

from shuffle_regress import (
    BudgetExceededError,
    Instance,
    SamplingMatrix,
    approx_factor,
    brute_force,
    build_net,
    candidate_targets,
    fptas_solve,
    gen_gaussian_noisy,
    orthonormalize,
    row_sample,
    sort_match,
)
from shuffle_regress.approx import sampled_columns


class TestOrthonormalize:
    def test_duplicate_column_drops_rank(self):
        rng = np.random.default_rng(0)
        base = rng.normal(size=(6, 2))
        x = np.column_stack([base, base[:, 0]])
        red = orthonormalize(x)
        assert red.k == 2

    def test_columns_orthonormal(self):
        rng = np.random.default_rng(1)
        red = orthonormalize(rng.normal(size=(7, 3)))
        assert np.allclose(red.u.T @ red.u, np.eye(3), atol=1e-12)

    def test_to_original_preserves_products(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(5, 2))
        red = orthonormalize(x)
        w_r = np.array([0.3, -1.2])
        assert np.allclose(x @ red.to_original(w_r), red.u @ w_r, atol=1e-12)

    def test_zero_matrix_rank_zero(self):
        assert orthonormalize(np.zeros((4, 2))).k == 0


class TestCandidateTargets:
    def test_single_column_count(self):
        s = SamplingMatrix(n=3, rows=((1, 1.0), (1, 2.0)))
        y = np.array([5.0, 6.0, 7.0])
        cands = list(candidate_targets(s, y))
        assert len(cands) == 3
        assert [c[1] for c in cands] == [5.0, 6.0, 7.0]
        for c in cands:
            assert c[0] == 0.0 and c[2] == 0.0

    def test_no_sampled_columns_single_zero(self):
        s = SamplingMatrix(n=2, rows=(None, None))
        cands = list(candidate_targets(s, np.array([1.0, 2.0])))
        assert len(cands) == 1
        assert np.array_equal(cands[0], np.zeros(2))

    def test_count_n_to_the_m(self):
        s = SamplingMatrix(n=3, rows=((0, 1.0), (2, 1.0)))
        cands = list(candidate_targets(s, np.array([1.0, 2.0, 3.0])))
        assert len(cands) == 9
        # lexicographic in the sorted nonzero coordinates
        assert np.array_equal(cands[0], np.array([1.0, 0.0, 1.0]))
        assert np.array_equal(cands[1], np.array([1.0, 0.0, 2.0]))
        assert np.array_equal(cands[-1], np.array([3.0, 0.0, 3.0]))

    def test_sampled_columns_sorted_distinct(self):
        s = SamplingMatrix(n=5, rows=((3, 1.0), (0, 1.0), (3, 2.0)))
        assert sampled_columns(s) == [0, 3]


class TestBuildNet:
    def test_zero_radius_single_point(self):
        net = build_net(np.array([1.0, 2.0]), 0.0, 0.5, 3.0)
        assert net.shape == (1, 2)
        assert np.array_equal(net[0], np.array([1.0, 2.0]))

    def test_pinned_five_points(self):
        # k=1, c=2, eps=1/2, r_b=1: spacing 1, radius sqrt(2), 5 points
        net = build_net(np.array([0.0]), 1.0, 0.5, 2.0)
        assert net.shape == (5, 1)
        assert np.allclose(net[:, 0], [-2.0, -1.0, 0.0, 1.0, 2.0])

    def test_center_is_grid_point(self):
        center = np.array([0.7, -0.4])
        net = build_net(center, 2.0, 0.3, 5.0)
        d = np.linalg.norm(net - center, axis=1)
        assert d.min() == 0.0

    def test_covering_audit(self):
        # every point of the Euclidean ball of radius sqrt(c r_b) sits within
        # sqrt(eps r_b / c) of the net
        rng = np.random.default_rng(7)
        center = np.array([0.2, -1.1])
        r_b, eps, c = 2.0, 0.3, 3.0
        net = build_net(center, r_b, eps, c)
        radius = math.sqrt(c * r_b)
        cover = math.sqrt(eps * r_b / c)
        dirs = rng.normal(size=(1000, 2))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        pts = center + dirs * (radius * rng.random(1000) ** 0.5)[:, None]
        dmin = np.min(
            np.linalg.norm(pts[:, None, :] - net[None, :, :], axis=2), axis=1
        )
        assert (dmin <= cover + 1e-12).all()

    def test_eps_validation(self):
        with pytest.raises(ValueError):
            build_net(np.array([0.0]), 1.0, 0.0, 2.0)
        with pytest.raises(ValueError):
            build_net(np.array([0.0]), 1.0, 1.0, 2.0)


class TestApproxFactor:
    def test_value(self):
        assert approx_factor(4, 1) == pytest.approx(1.0 + 4.0 * (1.0 + 1.0) ** 2)

    def test_monotone_in_n(self):
        assert approx_factor(64, 2) > approx_factor(8, 2)


class TestFptasSolve:
    def test_noiseless_near_zero_cost(self):
        for seed in range(5):
            inst, _ = gen_gaussian_noisy(np.array([1.0, -0.7]), 5, 0.0, seed)
            sol = fptas_solve(inst, 0.5)
            assert sol.cost <= 1e-9

    def test_cost_is_consistent(self):
        inst, _ = gen_gaussian_noisy(np.array([0.8]), 5, 0.3, 1)
        sol = fptas_solve(inst, 0.5)
        pred = inst.x @ sol.w
        direct = float(((pred[list(sol.perm.map)] - inst.y) ** 2).sum())
        assert sol.cost == pytest.approx(direct, rel=1e-12)

    @pytest.mark.parametrize("eps", [0.25, 0.5, 1.0 - 1e-3])
    def test_ratio_versus_brute(self, eps):
        for seed in range(6):
            d = 1 + seed % 2
            inst, _ = gen_gaussian_noisy(np.ones(d) / math.sqrt(d), 5, 0.5, seed)
            approx = fptas_solve(inst, eps)
            exact = brute_force(inst)
            assert approx.cost <= (1.0 + eps) * exact.cost + 1e-9

    def test_invariant_to_pre_permuted_y(self):
        # shuffling y only relabels candidates; the minimum cost is identical
        inst, _ = gen_gaussian_noisy(np.array([0.6, 0.2]), 5, 0.4, 3)
        base = fptas_solve(inst, 0.5)
        rng = np.random.default_rng(0)
        for _ in range(3):
            p = rng.permutation(inst.n)
            shuffled = Instance(x=inst.x, y=inst.y[p])
            assert fptas_solve(shuffled, 0.5).cost == base.cost

    def test_rank_zero_covariates(self):
        inst = Instance(x=np.zeros((3, 2)), y=np.array([1.0, -2.0, 0.5]))
        sol = fptas_solve(inst, 0.5)
        assert np.array_equal(sol.w, np.zeros(2))
        assert sol.cost == pytest.approx(float((inst.y**2).sum()))

    def test_eps_validation(self):
        inst, _ = gen_gaussian_noisy(np.array([1.0]), 3, 0.1, 0)
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                fptas_solve(inst, bad)

    def test_budget_refusal(self):
        inst, _ = gen_gaussian_noisy(np.array([1.0, 1.0]) / math.sqrt(2), 7, 0.5, 2)
        with pytest.raises(BudgetExceededError):
            fptas_solve(inst, 0.25, budget=100)

    def test_chunk_independence(self):
        inst, _ = gen_gaussian_noisy(np.array([0.5, -0.9]), 5, 0.6, 4)
        a = fptas_solve(inst, 0.5, chunk=8192)
        b = fptas_solve(inst, 0.5, chunk=7)
        assert a.cost == b.cost
        assert a.perm.map == b.perm.map
        assert np.array_equal(a.w, b.w)

    def test_cost_at_most_best_center(self):
        # the returned cost never exceeds any candidate center's cost, in
        # particular the orthonormal-coordinates sampled-LS ones
        inst, _ = gen_gaussian_noisy(np.array([0.4]), 4, 0.8, 5)
        red = orthonormalize(inst.x)
        samp = row_sample(red.u)
        best_center = math.inf
        for b in candidate_targets(samp, inst.y):
            w_r, *_ = np.linalg.lstsq(
                samp.dense() @ red.u, samp.apply(b), rcond=None
            )
            best_center = min(best_center, sort_match(red.u @ w_r, inst.y).cost)
        sol = fptas_solve(inst, 0.5)
        assert sol.cost <= best_center * (1 + 1e-12) + 1e-12
