"""Attention scorers, aggregation, reconstruction and the triad loss."""

import numpy as np
import pytest

from triadground import autodiff as ad
from triadground.corpus_io import random_embeddings
from triadground.model import (
    ModelConfig,
    ModelParams,
    aggregate,
    discriminative_attention,
    fixed_projections,
    reconstruction_loss,
    reconstruct,
    reference_attention,
    scene_features,
    target_attention,
    triad_loss,
    triad_vectors,
    unit_vector,
)
from triadground.scenes import DEFAULT_VOCABULARY, GenConfig, SceneVocabulary, generate_scene
from triadground.triads import DiscriminativeTriad


def tiny_params(d_v=2, d_l=2, hidden_attn=2, hidden_recon=2, seed=0, **kw):
    cfg = ModelConfig(d_v=d_v, d_l=d_l, hidden_attn=hidden_attn, hidden_recon=hidden_recon, **kw)
    table = random_embeddings(["cat", "red"], d_l, seed=1)
    return ModelParams.init(cfg, table, seed=seed), table


def zero_params(**kw):
    params, table = tiny_params(**kw)
    for t in params.tensors.values():
        t.data[...] = 0.0
    return params, table


class TestAttentionScorers:
    def test_zero_parameters_give_zero_score(self):
        params, _ = zero_params()
        out = target_attention(np.array([0.3, -0.8]), ad.constant([0.5, 0.5]), params)
        assert out.item() == 0.0
        out = reference_attention(np.array([[0.3, -0.8], [1.0, 2.0]]), ad.constant([0.5, 0.5]), params)
        np.testing.assert_array_equal(out.data, [0.0, 0.0])

    def test_hand_sized_instance_matches_manual_computation(self):
        params, _ = tiny_params()
        # overwrite with small hand-written weights
        params.tensors["attn_t/1/w"].data[...] = [[0.1, -0.2], [0.3, 0.4], [0.5, 0.6], [-0.7, 0.8]]
        params.tensors["attn_t/1/b"].data[...] = [0.01, -0.02]
        params.tensors["attn_t/2/w"].data[...] = [[1.5], [-2.5]]
        params.tensors["attn_t/2/b"].data[...] = [0.25]
        f_v = np.array([0.4, -1.0])
        e_t = np.array([0.9, -0.3])
        # manual forward: relu(concat), one hidden relu layer, linear out
        x = np.maximum(np.concatenate([f_v, e_t]), 0.0)
        h = np.maximum(x @ params.tensors["attn_t/1/w"].data + params.tensors["attn_t/1/b"].data, 0.0)
        expected = float(h @ params.tensors["attn_t/2/w"].data + params.tensors["attn_t/2/b"].data)
        got = target_attention(f_v, ad.constant(e_t), params).item()
        assert got == pytest.approx(expected, rel=1e-12)

    def test_reference_equals_target_when_parameters_shared(self):
        params, _ = tiny_params(seed=3)
        for k in ("1/w", "1/b", "2/w", "2/b"):
            params.tensors[f"attn_r/{k}"].data[...] = params.tensors[f"attn_t/{k}"].data
        f = np.array([0.2, 0.7])
        e = ad.constant([0.1, 0.4])
        assert reference_attention(f, e, params).item() == target_attention(f, e, params).item()

    def test_inner_relu_gates_negative_input(self):
        # with non-negative first-layer weights, an all-negative input can
        # only reach the output through the bias path
        params, _ = zero_params()
        params.tensors["attn_t/1/w"].data[...] = np.abs(np.random.default_rng(0).normal(size=(4, 2)))
        params.tensors["attn_t/1/b"].data[...] = [0.5, 0.5]
        params.tensors["attn_t/2/w"].data[...] = [[1.0], [1.0]]
        negative = target_attention(np.array([-1.0, -2.0]), ad.constant([-0.5, -3.0]), params).item()
        zero = target_attention(np.array([0.0, 0.0]), ad.constant([0.0, 0.0]), params).item()
        assert negative == zero == 1.0  # only the bias path fires

    def test_pair_order_matters(self):
        params, table = tiny_params(d_v=3, d_l=2, seed=5)
        rng = np.random.default_rng(8)
        f_i = rng.normal(size=3)
        s_i = rng.uniform(size=5)
        f_j = rng.normal(size=3)
        s_j = rng.uniform(size=5)
        e = ad.constant(rng.normal(size=2))
        ij = discriminative_attention(np.concatenate([f_i, s_i, f_j, s_j]), e, params).item()
        ji = discriminative_attention(np.concatenate([f_j, s_j, f_i, s_i]), e, params).item()
        assert ij != ji

    def test_dimension_mismatch_rejected(self):
        params, _ = tiny_params()
        with pytest.raises(ad.ShapeError):
            target_attention(np.zeros(3), ad.constant([0.1, 0.2]), params)
        with pytest.raises(ad.ShapeError):
            discriminative_attention(np.zeros(9), ad.constant([0.1, 0.2]), params)


class TestAggregate:
    def test_equal_scores_give_arithmetic_mean(self):
        rng = np.random.default_rng(1)
        feats = rng.normal(size=(4, 6))
        out = aggregate(ad.constant([2.2] * 4), feats, "soft", tau=1.0)
        np.testing.assert_allclose(out.data, feats.mean(axis=0), atol=1e-12)

    def test_hard_mode_approaches_argmax(self):
        rng = np.random.default_rng(2)
        feats = rng.normal(size=(5, 4))
        scores = np.array([0.0, 1.0, -0.5, 0.0, -1.0])  # gap 1 to runner-up
        out = aggregate(ad.constant(scores), feats, "hard", tau=0.01)
        w_max = 1.0 - 4 * np.exp(-1.0 / 0.01)
        assert np.linalg.norm(out.data - feats[1]) <= (1 - w_max) * 10
        np.testing.assert_allclose(out.data, feats[1], atol=1e-8)

    def test_single_proposal_is_identity(self):
        feats = np.array([[1.0, 2.0, 3.0]])
        for mode in ("soft", "hard"):
            out = aggregate(ad.constant([0.7]), feats, mode, tau=0.1)
            np.testing.assert_allclose(out.data, feats[0], atol=1e-12)

    def test_aggregate_stays_in_coordinate_hull(self):
        rng = np.random.default_rng(3)
        for mode in ("soft", "hard"):
            for _ in range(100):
                feats = rng.normal(size=(6, 5))
                scores = ad.constant(rng.normal(size=6))
                out = aggregate(scores, feats, mode, tau=0.3).data
                assert np.all(out <= feats.max(axis=0) + 1e-12)
                assert np.all(out >= feats.min(axis=0) - 1e-12)

    def test_bad_mode_or_tau_rejected(self):
        feats = np.zeros((2, 2))
        with pytest.raises(ad.DomainError):
            aggregate(ad.constant([0.0, 1.0]), feats, "warm", tau=0.1)
        with pytest.raises(ad.DomainError):
            aggregate(ad.constant([0.0, 1.0]), feats, "hard", tau=0.0)

    def test_gumbel_noise_is_seeded_and_optional(self):
        feats = np.random.default_rng(4).normal(size=(4, 3))
        scores = ad.constant([0.1, 0.2, 0.3, 0.4])
        plain = aggregate(scores, feats, "hard", tau=0.5).data
        g1 = aggregate(scores, feats, "hard", tau=0.5, gumbel_rng=np.random.default_rng(9)).data
        g2 = aggregate(scores, feats, "hard", tau=0.5, gumbel_rng=np.random.default_rng(9)).data
        np.testing.assert_array_equal(g1, g2)
        assert not np.array_equal(plain, g1)


class TestReconstructAndLoss:
    def test_zero_weights_give_zero_vector_of_d_l(self):
        params, _ = zero_params(d_v=3, d_l=2)
        out = reconstruct(ad.constant(np.ones(3)), "t", params)
        np.testing.assert_array_equal(out.data, [0.0, 0.0])

    def test_output_length_is_d_l_for_both_input_widths(self):
        params, _ = tiny_params(d_v=3, d_l=4, hidden_recon=5)
        assert reconstruct(ad.constant(np.ones(3)), "t", params).data.shape == (4,)
        assert reconstruct(ad.constant(np.ones(2 * 3 + 10)), "d", params).data.shape == (4,)

    def test_hand_sized_reconstruction(self):
        params, _ = tiny_params(d_v=2, d_l=2, hidden_recon=2)
        w1 = params.tensors["recon_t/1/w"].data
        b1 = params.tensors["recon_t/1/b"].data
        w2 = params.tensors["recon_t/2/w"].data
        b2 = params.tensors["recon_t/2/b"].data
        f = np.array([0.3, -0.4])
        expected = np.maximum(f @ w1 + b1, 0.0) @ w2 + b2
        np.testing.assert_allclose(reconstruct(ad.constant(f), "t", params).data, expected, rtol=1e-12)

    def test_loss_zero_iff_exact(self):
        e = tuple(ad.constant(v) for v in np.random.default_rng(5).normal(size=(3, 4)))
        assert triad_loss(e, e).item() == 0.0

    def test_single_coordinate_deviation(self):
        e = [np.zeros(4), np.zeros(4), np.zeros(4)]
        e_hat = [e[0].copy(), e[1].copy(), e[2].copy()]
        e_hat[0][0] = 1.0
        loss = triad_loss(tuple(map(ad.constant, e_hat)), tuple(map(ad.constant, e)))
        assert loss.item() == pytest.approx(1.0)

    def test_random_vectors_match_elementwise_sum(self):
        rng = np.random.default_rng(6)
        a = rng.normal(size=(3, 7))
        b = rng.normal(size=(3, 7))
        loss = triad_loss(tuple(map(ad.constant, a)), tuple(map(ad.constant, b)))
        assert loss.item() == pytest.approx(float(((a - b) ** 2).sum()), rel=1e-12)

    def test_mask_must_keep_one_unit(self):
        e = tuple(ad.constant(np.zeros(2)) for _ in range(3))
        with pytest.raises(ValueError):
            triad_loss(e, e, mask=(False, False, False))


class TestUnitVectors:
    def test_special_tokens_route_to_trainable_rows(self):
        params, table = tiny_params()
        assert unit_vector("SELF", table, params) is params.tensors["emb/SELF"]
        assert unit_vector("UKN", table, params) is params.tensors["emb/UKN"]
        assert unit_vector("zyzzyva", table, params) is params.tensors["emb/OOV"]

    def test_known_words_are_constants(self):
        params, table = tiny_params()
        vec = unit_vector("cat", table, params)
        assert not vec.requires_grad
        np.testing.assert_array_equal(vec.data, table.lookup("cat"))


class TestFullPathGradients:
    @pytest.fixture()
    def setup(self):
        vocab = SceneVocabulary(
            categories=("cat", "dog"),
            attributes=("red", "black"),
            relations=("on", "under", "left_of", "right_of"),
        )
        gen = GenConfig(
            n_proposals=3, d_v=4, noise=0.05, queries_per_scene=1,
            category_pool=2, dominant_group=2, stacked_pairs=1,
        )
        scene = generate_scene(vocab, gen, 11, "gc")
        table = random_embeddings(vocab.words(), 4, seed=3)
        cfg = ModelConfig(d_v=4, d_l=4, hidden_attn=8, hidden_recon=6, tau=0.1)
        params = ModelParams.init(cfg, table, seed=5)
        fv, fp = scene_features(scene, cfg)
        triads = [
            scene.queries[0].query.triads[0],
            DiscriminativeTriad("UKN", "UKN", "left_of", 1),  # exercises special rows
        ]
        return params, table, fv, fp, triads

    @pytest.mark.parametrize("mode", ["soft", "hard"])
    def test_matching_reconstruction_loss_gradients(self, setup, mode):
        params, table, fv, fp, triads = setup

        def loss_fn():
            total = None
            for triad in triads:
                term = reconstruction_loss(
                    params, fv, fp, triad_vectors(triad, table, params), mode=mode, tau=0.1
                )
                total = term if total is None else ad.add(total, term)
            return total

        assert ad.gradient_check(loss_fn, params.tensors, h=1e-4) < 1e-4

    def test_no_decoder_variant_gradients(self, setup):
        params, table, fv, fp, triads = setup
        projections = fixed_projections(params.config, seed=2)

        def loss_fn():
            return reconstruction_loss(
                params, fv, fp, triad_vectors(triads[0], table, params),
                mode="hard", tau=0.1, reconstruction=False, projections=projections,
            )

        assert ad.gradient_check(loss_fn, params.tensors, h=1e-4) < 1e-4


class TestSceneFeatures:
    def test_visual_normalization_flag(self):
        scene = generate_scene(DEFAULT_VOCABULARY, GenConfig(), seed=21, scene_id="s")
        plain = scene_features(scene, ModelConfig())[0]
        normed = scene_features(scene, ModelConfig(l2_normalize_visual=True))[0]
        assert not np.allclose(plain, normed)
        np.testing.assert_allclose(np.linalg.norm(normed, axis=1), 1.0, rtol=1e-9)

    def test_pair_matrix_matches_scene_method(self):
        scene = generate_scene(DEFAULT_VOCABULARY, GenConfig(), seed=22, scene_id="s")
        _, fp = scene_features(scene, ModelConfig())
        np.testing.assert_allclose(fp, scene.pair_matrix(), rtol=1e-12)
