"""End-to-end three-stage pipeline behavior."""

import numpy as np
import pytest

import commfit as cf

from conftest import random_graph


class TestFitPipeline:
    def test_two_node_single_edge(self):
        a = cf.adjacency_dense(cf.Graph(n=2, edges={(0, 1)}))
        res = cf.fit_pipeline(a, 1, cfg=cf.FitConfig(seed=0))
        assert res.model.k <= 1  # zero columns may drop out entirely
        assert res.model.n == 2

    def test_stage_losses_non_increasing(self, rng):
        g = random_graph(rng, 20, 0.3)
        res = cf.fit_pipeline(cf.adjacency_dense(g), 4, cfg=cf.FitConfig(seed=1))
        assert np.all(np.diff(res.lpca_opt.loss_history) <= 0.0)
        assert np.all(np.diff(res.fit_opt.loss_history) <= 0.0)

    def test_model_invariants(self, rng):
        g = random_graph(rng, 18, 0.35)
        res = cf.fit_pipeline(cf.adjacency_dense(g), 5, cfg=cf.FitConfig(seed=2))
        m = res.model
        assert m.v.min() >= 0.0 and m.v.max() <= 1.0
        if m.k:
            np.testing.assert_array_equal(m.v.max(axis=0), np.ones(m.k))
        assert res.fitted.b.min() >= 0.0
        assert res.fitted.c.min() >= 0.0

    def test_requested_width_honored(self, rng):
        g = random_graph(rng, 20, 0.4)
        res = cf.fit_pipeline(cf.adjacency_dense(g), 6, cfg=cf.FitConfig(seed=0))
        assert res.pruned.k_b + res.pruned.k_c == 6
        assert res.model.k <= 6

    def test_k_larger_than_n_is_capped_in_stage_one(self, rng):
        g = random_graph(rng, 10, 0.4)
        res = cf.fit_pipeline(cf.adjacency_dense(g), 30, cfg=cf.FitConfig(seed=0))
        assert res.lpca.k == 9  # min(k, n-1)
        assert res.model.k <= 30

    def test_homophily_only_variant(self, rng):
        g = random_graph(rng, 16, 0.35)
        res = cf.fit_pipeline(cf.adjacency_dense(g), 4,
                              cfg=cf.FitConfig(seed=0), variant="homophily_only")
        assert res.fitted.k_c == 0
        assert np.all(res.model.w >= 0.0)

    def test_deterministic_per_seed(self, rng):
        g = random_graph(rng, 14, 0.3)
        a = cf.adjacency_dense(g)
        r1 = cf.fit_pipeline(a, 3, cfg=cf.FitConfig(seed=9))
        r2 = cf.fit_pipeline(a, 3, cfg=cf.FitConfig(seed=9))
        assert np.array_equal(r1.model.v, r2.model.v)
        assert np.array_equal(r1.model.w, r2.model.w)

    def test_masked_training_ignores_held_out_entries(self, rng):
        g = random_graph(rng, 15, 0.4)
        a = cf.adjacency_dense(g)
        split = cf.make_holdout(15, 0.15, seed=0)
        mask = split.mask()
        flipped = a.copy()
        for i, j in split.held_out:
            flipped[i, j] = 1.0 - flipped[i, j]
            flipped[j, i] = flipped[i, j]
        cfg = cf.FitConfig(seed=3)
        r1 = cf.fit_pipeline(a, 4, cfg=cfg, mask=mask)
        r2 = cf.fit_pipeline(flipped, 4, cfg=cfg, mask=mask)
        assert np.array_equal(r1.fitted.b, r2.fitted.b)
        assert np.array_equal(r1.fitted.c, r2.fitted.c)
        assert np.array_equal(r1.model.v, r2.model.v)

    def test_invalid_arguments(self, rng):
        a = cf.adjacency_dense(random_graph(rng, 8, 0.4))
        with pytest.raises(ValueError):
            cf.fit_pipeline(a, 0)
        with pytest.raises(ValueError):
            cf.fit_pipeline(a, 2, variant="svd")

    def test_stage_failure_names_stage(self):
        bad = np.ones((4, 4))  # nonzero diagonal: stage 1 must reject it
        with pytest.raises(cf.PipelineError, match="stage1_lpca"):
            cf.fit_pipeline(bad, 2)

    def test_stage_lines_mention_every_stage(self, rng):
        g = random_graph(rng, 12, 0.4)
        res = cf.fit_pipeline(cf.adjacency_dense(g), 3, cfg=cf.FitConfig(seed=0))
        text = "\n".join(res.stage_lines())
        for token in ("stage1_lpca", "stage2_init", "prune", "stage3_constrained", "model"):
            assert token in text
