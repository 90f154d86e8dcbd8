"""Stage 3: pruning, constrained fitting, and the interpretable model ops."""

import numpy as np
import pytest

import commfit as cf
from commfit.constrained import constrained_objective

from conftest import finite_diff_grad


def _random_nonneg(rng, n, kb, kc):
    return cf.NonnegFactors(b=np.abs(rng.normal(size=(n, kb))),
                            c=np.abs(rng.normal(size=(n, kc))))


class TestPruneColumns:
    def test_pooled_ranking(self):
        b = np.array([[3.0, 1.0], [0.0, 0.0]])  # column norms 3, 1
        c = np.array([[2.0], [0.0]])  # column norm 2
        kept = cf.prune_columns(cf.NonnegFactors(b=b, c=c), 2)
        assert kept.k_b == 1 and kept.k_c == 1
        np.testing.assert_array_equal(kept.b, [[3.0], [0.0]])
        np.testing.assert_array_equal(kept.c, [[2.0], [0.0]])

    def test_keep_all_is_identity(self, rng):
        f = _random_nonneg(rng, 6, 3, 2)
        kept = cf.prune_columns(f, 5)
        np.testing.assert_array_equal(kept.b, f.b)
        np.testing.assert_array_equal(kept.c, f.c)

    def test_matches_brute_force_oracle(self, rng):
        for _ in range(20):
            f = _random_nonneg(rng, 8, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
            k = int(rng.integers(1, f.k_b + f.k_c + 1))
            # oracle: sort all columns by (-norm, side, index), take first k
            entries = [(-np.linalg.norm(f.b[:, i]), 0, i) for i in range(f.k_b)]
            entries += [(-np.linalg.norm(f.c[:, i]), 1, i) for i in range(f.k_c)]
            expected = sorted(entries)[:k]
            exp_b = sorted(i for _, s, i in expected if s == 0)
            exp_c = sorted(i for _, s, i in expected if s == 1)
            kept = cf.prune_columns(f, k)
            np.testing.assert_array_equal(kept.b, f.b[:, exp_b])
            np.testing.assert_array_equal(kept.c, f.c[:, exp_c])

    def test_tie_break_prefers_b_side_then_lower_index(self):
        col = np.array([[1.0], [1.0]])
        f = cf.NonnegFactors(b=np.hstack([col, col]), c=col.copy())
        kept = cf.prune_columns(f, 2)  # all norms equal
        assert kept.k_b == 2 and kept.k_c == 0

    def test_invalid_k(self, rng):
        f = _random_nonneg(rng, 4, 2, 1)
        with pytest.raises(ValueError):
            cf.prune_columns(f, 0)
        with pytest.raises(ValueError):
            cf.prune_columns(f, 4)


class TestConstrainedObjective:
    def test_zero_factors_stationary(self):
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        loss, gb, gc = constrained_objective(np.zeros((2, 2)), np.zeros((2, 1)), a, 0.0)
        assert loss == pytest.approx(4.0 * np.log(2.0))
        assert np.all(gb == 0.0) and np.all(gc == 0.0)

    def test_gradients_match_finite_differences(self, rng):
        n, kb, kc = 6, 2, 1
        a = np.triu((rng.random((n, n)) < 0.5).astype(float), 1)
        a = a + a.T
        b0 = np.abs(rng.normal(size=(n, kb)))
        c0 = np.abs(rng.normal(size=(n, kc)))
        reg = 0.21

        def f(z):
            b = z[: n * kb].reshape(n, kb)
            c = z[n * kb :].reshape(n, kc)
            return constrained_objective(b, c, a, reg)[0]

        _, gb, gc = constrained_objective(b0, c0, a, reg)
        fd = finite_diff_grad(f, np.concatenate([b0.ravel(), c0.ravel()]))
        np.testing.assert_allclose(
            np.concatenate([gb.ravel(), gc.ravel()]), fd, rtol=1e-5, atol=1e-7
        )

    def test_empty_c_reduces_to_homophilous_gradient(self, rng):
        n, kb = 5, 2
        a = np.triu((rng.random((n, n)) < 0.5).astype(float), 1)
        a = a + a.T
        b = np.abs(rng.normal(size=(n, kb)))
        c = np.zeros((n, 0))
        _, gb, gc = constrained_objective(b, c, a, 0.0)
        expected = 2.0 * (cf.sigmoid(b @ b.T) - a) @ b
        np.testing.assert_allclose(gb, expected, atol=1e-12)
        assert gc.shape == (n, 0)


class TestFitConstrained:
    def test_monotone_from_good_initialization(self):
        g = cf.Graph(n=6, edges={(0, 1), (1, 2), (3, 4), (0, 5)})
        a = cf.adjacency_dense(g)
        cfg = cf.FitConfig(seed=0, reg_weight=0.0, max_iters=600,
                           grad_tol=1e-10, rel_improve_tol=1e-14)
        lp, _ = cf.fit_lpca(a, 2 * cf.max_degree(g) + 1, cfg)
        init = cf.init_constrained(lp)
        fitted, opt = cf.fit_constrained(a, init, cfg)
        assert opt.loss_history[-1] <= opt.loss_history[0]
        assert np.all(np.diff(opt.loss_history) <= 0.0)
        assert fitted.b.min() >= 0.0 and fitted.c.min() >= 0.0

    def test_all_zero_init_is_stationary(self):
        a = cf.adjacency_dense(cf.Graph(n=4, edges={(0, 1), (2, 3)}))
        f0 = cf.NonnegFactors(b=np.zeros((4, 2)), c=np.zeros((4, 1)))
        fitted, opt = cf.fit_constrained(a, f0, cf.FitConfig(seed=0, reg_weight=0.0))
        assert np.all(fitted.b == 0.0) and np.all(fitted.c == 0.0)
        assert opt.loss_history[-1] == opt.loss_history[0]

    def test_full_model_beats_homophily_ablation_on_recruiter(self):
        params = cf.RecruiterParams(n=200, n_locations=4, seed=0)
        g, _ = cf.generate_recruiter_graph(params)
        a = cf.adjacency_dense(g)
        cfg = cf.FitConfig(seed=0, reg_weight=0.0)
        full = cf.fit_pipeline(a, 12, cfg=cfg, variant="full")
        ablation = cf.fit_pipeline(a, 12, cfg=cfg, variant="homophily_only")
        errs_full = cf.recon_report(a, cf.sigmoid(full.model.logits())).rounded_errors
        errs_abl = cf.recon_report(a, cf.sigmoid(ablation.model.logits())).rounded_errors
        assert errs_full < errs_abl
        assert np.all(ablation.model.w >= 0.0)


class TestToVw:
    def test_worked_example(self):
        f = cf.NonnegFactors(b=np.array([[2.0], [1.0]]), c=np.array([[3.0], [0.0]]))
        m = cf.to_vw(f)
        np.testing.assert_allclose(m.v, [[1.0, 1.0], [0.5, 0.0]])
        np.testing.assert_allclose(m.w, [4.0, -9.0])
        np.testing.assert_allclose(m.logits(), [[-5.0, 2.0], [2.0, 1.0]])
        np.testing.assert_allclose(m.logits(), f.logits())

    def test_empty_c_all_weights_positive(self, rng):
        f = cf.NonnegFactors(b=np.abs(rng.normal(size=(5, 3))), c=np.zeros((5, 0)))
        m = cf.to_vw(f)
        assert np.all(m.w > 0.0)

    def test_exactness_on_random_factors(self, rng):
        for _ in range(10):
            f = _random_nonneg(rng, 20, 3, 2)
            m = cf.to_vw(f)
            assert np.max(np.abs(m.logits() - f.logits())) < 1e-10
            assert m.v.min() >= 0.0 and m.v.max() <= 1.0
            np.testing.assert_array_equal(m.v.max(axis=0), np.ones(m.k))

    def test_zero_columns_dropped(self):
        b = np.array([[1.0, 0.0], [0.5, 0.0]])
        m = cf.to_vw(cf.NonnegFactors(b=b, c=np.zeros((2, 0))))
        assert m.k == 1


class TestPrediction:
    def test_zero_membership_rows_give_half(self):
        m = cf.CommunityModel(v=np.zeros((3, 2)), w=np.array([1.0, -2.0]))
        assert cf.predict_prob(m, 0, 2) == pytest.approx(0.5)

    def test_full_coparticipation(self):
        m = cf.CommunityModel(v=np.array([[1.0], [1.0]]), w=np.array([2.0]))
        assert cf.predict_prob(m, 0, 1) == pytest.approx(cf.sigmoid(2.0))

    def test_matches_dense_path(self, rng):
        f = _random_nonneg(rng, 12, 2, 2)
        m = cf.to_vw(f)
        dense = cf.sigmoid(m.logits())
        for _ in range(20):
            i, j = rng.integers(0, 12, size=2)
            assert cf.predict_prob(m, int(i), int(j)) == pytest.approx(dense[i, j], abs=1e-12)

    def test_out_of_range_rejected(self):
        m = cf.CommunityModel(v=np.zeros((3, 1)), w=np.array([1.0]))
        with pytest.raises(IndexError):
            cf.predict_prob(m, 0, 3)
        with pytest.raises(IndexError):
            cf.logit_contributions(m, -1, 0)


class TestLogitContributions:
    def test_full_coparticipation_gives_weight(self):
        v = np.array([[1.0, 0.3], [1.0, 0.0]])
        m = cf.CommunityModel(v=v, w=np.array([2.5, -1.0]))
        contrib = cf.logit_contributions(m, 0, 1)
        assert contrib[0] == pytest.approx(2.5)
        assert contrib[1] == 0.0  # zero membership kills the term

    def test_sum_equals_dense_logit(self, rng):
        f = _random_nonneg(rng, 10, 3, 1)
        m = cf.to_vw(f)
        dense = m.logits()
        for _ in range(15):
            i, j = (int(t) for t in rng.integers(0, 10, size=2))
            total = cf.logit_contributions(m, i, j).sum()
            assert total == pytest.approx(dense[i, j], abs=1e-12)


class TestThresholdWitness:
    def test_two_node_witness(self):
        m = cf.build_threshold_witness(np.array([[1.0], [1.0]]), None, 1)
        np.testing.assert_allclose(m.v, [[1.0, 1.0], [1.0, 1.0]])
        np.testing.assert_allclose(m.w, [1.0, -0.5])
        assert m.logits()[0, 1] == pytest.approx(0.5)

    def test_large_threshold_empties_graph(self, rng):
        b = (rng.random((6, 2)) < 0.5).astype(float)
        m = cf.build_threshold_witness(b, None, 50)
        logits = m.logits()
        off = logits[~np.eye(6, dtype=bool)]
        assert np.all(off < 0.0)

    def test_signs_match_generated_graph(self, rng):
        for t in (0, 1, 2):
            b = (rng.random((10, 3)) < 0.5).astype(float)
            c = (rng.random((10, 2)) < 0.5).astype(float)
            g = cf.generate_threshold_graph(b, c, t)
            a = cf.adjacency_dense(g)
            m = cf.build_threshold_witness(b, c, t)
            logits = m.logits()
            for i in range(10):
                for j in range(i + 1, 10):
                    assert (logits[i, j] > 0.0) == (a[i, j] == 1.0)
                    assert abs(logits[i, j]) >= 0.5


class TestScaleWeights:
    def test_identity_scale(self, rng):
        f = _random_nonneg(rng, 6, 2, 1)
        m = cf.to_vw(f)
        m1 = cf.scale_weights(m, 1.0)
        np.testing.assert_array_equal(m1.v, m.v)
        np.testing.assert_array_equal(m1.w, m.w)

    def test_scaled_witness_saturates(self, rng):
        b = (rng.random((8, 3)) < 0.5).astype(float)
        c = (rng.random((8, 2)) < 0.5).astype(float)
        g = cf.generate_threshold_graph(b, c, 1)
        a = cf.adjacency_dense(g)
        m = cf.scale_weights(cf.build_threshold_witness(b, c, 1), 20.0)
        p = cf.sigmoid(m.logits())
        off = ~np.eye(8, dtype=bool)
        # |logit| >= 10 after scaling, so the gap is at most sigmoid(-10)
        assert np.max(np.abs(p - a)[off]) < 1e-4

    def test_probability_ranking_invariant(self, rng):
        f = _random_nonneg(rng, 9, 2, 2)
        m = cf.to_vw(f)
        iu = np.triu_indices(9, k=1)
        base = cf.sigmoid(m.logits())[iu]
        for s in (0.3, 2.0, 17.0):
            scaled = cf.sigmoid(cf.scale_weights(m, s).logits())[iu]
            np.testing.assert_array_equal(np.argsort(base), np.argsort(scaled))

    def test_invalid_scale(self, rng):
        m = cf.to_vw(_random_nonneg(rng, 3, 1, 1))
        with pytest.raises(ValueError):
            cf.scale_weights(m, 0.0)
        with pytest.raises(ValueError):
            cf.scale_weights(m, -2.0)
