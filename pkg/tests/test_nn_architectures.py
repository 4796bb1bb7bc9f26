import numpy as np
import pytest

from tame.errors import ShapeError, UsageError
from tame.nn import (
    ConvNetConfig,
    SdlConfig,
    arrays_of,
    bce_grad,
    bce_loss,
    cnn_backward,
    cnn_features,
    cnn_forward,
    cnn_forward_trace,
    content_hash,
    freeze,
    init_convnet,
    init_sdl,
    matched_trunk_config,
    param_count,
    sdl_backward,
    sdl_forward,
    sdl_forward_trace,
    train_sdl,
)
from tame.rng import rng_stream

import gradcheck
from oracles import cnn_reference_forward, sdl_reference_forward

DEFAULT_CNN = ConvNetConfig()
DEFAULT_SDL = SdlConfig(input_dim=3 * 32 * 32 + 2 * 128)


def small_cnn(seed=0):
    return init_convnet(gradcheck.MINI_CNN, rng_stream(seed, "cnn"))


class TestExpertCnn:
    def test_zero_params_zero_images_give_zero_features(self):
        params = small_cnn()
        for a in arrays_of(params).values():
            a[...] = 0.0
        feats, logits = cnn_forward(params, np.zeros((2, 3, 8, 8)))
        assert np.all(feats == 0.0)
        assert np.all(logits == 0.0)

    def test_forward_deterministic_bitwise(self):
        params = init_convnet(ConvNetConfig(image_size=32, channels=(4, 6, 8), hidden=10, feature_dim=7),
                              rng_stream(7, "det"))
        img = rng_stream(7, "img").uniform(size=(1, 3, 32, 32))
        f1, l1 = cnn_forward(params, img)
        f2, l2 = cnn_forward(params, img)
        assert np.array_equal(f1, f2) and np.array_equal(l1, l2)

    def test_matches_loop_reference_forward(self):
        params = small_cnn(3)
        x = rng_stream(3, "x").uniform(size=(4, 3, 8, 8))
        feats, logits = cnn_forward(params, x)
        rfeats, rlogits = cnn_reference_forward(params, x)
        denom = np.maximum(np.abs(rfeats), 1e-30)
        assert np.max(np.abs(feats - rfeats) / denom) < 1e-10
        assert np.max(np.abs(logits - rlogits) / np.maximum(np.abs(rlogits), 1e-30)) < 1e-10

    def test_shape_mismatch_rejected(self):
        params = small_cnn()
        with pytest.raises(ShapeError):
            cnn_forward(params, np.zeros((1, 3, 16, 16)))  # wrong size for dense stack
        with pytest.raises(ShapeError):
            cnn_forward(params, np.zeros((1, 1, 8, 8)))  # wrong channel count

    def test_default_parameter_count_near_180k(self):
        assert DEFAULT_CNN.param_total() == param_count(init_convnet(DEFAULT_CNN, rng_stream(0, "p")))
        assert abs(DEFAULT_CNN.param_total() - 180_000) / 180_000 < 0.10

    def test_feature_chunking_deterministic_and_consistent(self):
        params = small_cnn(5)
        x = rng_stream(5, "imgs").uniform(size=(7, 3, 8, 8))
        a = cnn_features(params, x, chunk=3)
        assert np.array_equal(a, cnn_features(params, x, chunk=3))
        full = cnn_forward(params, x)[0]
        assert np.allclose(a, full, rtol=1e-12, atol=1e-15)

    def test_freeze_makes_hash_immutable(self):
        params = small_cnn(9)
        freeze(params)
        before = content_hash(params)
        with pytest.raises(ValueError):
            params.conv1_w[0, 0, 0, 0] = 5.0
        assert content_hash(params) == before
        assert params.frozen


class TestSdl:
    def test_zero_params_give_half(self):
        params = init_sdl(gradcheck.MINI_SDL, rng_stream(0, "sdl"))
        for a in params.arrays().values():
            a[...] = 0.0
        probs = sdl_forward(params, rng_stream(0, "rows").normal(size=(6, 12)))
        assert np.all(probs == 0.5)

    def test_output_open_interval(self):
        params = init_sdl(gradcheck.MINI_SDL, rng_stream(1, "sdl"))
        probs = sdl_forward(params, rng_stream(1, "rows").normal(size=(32, 12)))
        assert np.all((probs > 0.0) & (probs < 1.0))

    def test_batch_independence(self):
        params = init_sdl(gradcheck.MINI_SDL, rng_stream(2, "sdl"))
        rows = rng_stream(2, "rows").normal(size=(32, 12))
        single = sdl_forward(params, rows[:1])
        batch = sdl_forward(params, rows)
        assert single[0] == batch[0]

    def test_matches_loop_reference(self):
        params = init_sdl(gradcheck.MINI_SDL, rng_stream(4, "sdl"))
        rows = rng_stream(4, "rows").normal(size=(5, 12))
        got = sdl_forward(params, rows)
        want = sdl_reference_forward(params, rows)
        assert np.max(np.abs(got - want) / np.maximum(np.abs(want), 1e-30)) < 1e-10

    def test_width_mismatch_rejected(self):
        params = init_sdl(gradcheck.MINI_SDL, rng_stream(5, "sdl"))
        with pytest.raises(ShapeError):
            sdl_forward(params, np.zeros((2, 13)))

    def test_default_parameter_count_near_720k(self):
        assert abs(DEFAULT_SDL.param_total() - 720_000) / 720_000 < 0.10

    def test_training_reduces_loss_on_separable_data(self):
        # two linearly separable blobs
        rng = rng_stream(6, "blobs")
        cfg = SdlConfig(input_dim=8, hidden=(16, 12, 8, 6))
        params = init_sdl(cfg, rng)
        a = rng.normal(loc=+1.5, size=(60, 8))
        b = rng.normal(loc=-1.5, size=(60, 8))
        rows = np.vstack([a, b])
        labels = np.array([1.0] * 60 + [0.0] * 60)
        before = bce_loss(sdl_forward(params, rows), labels)
        train_sdl(params, rows, labels, epochs=3, batch_size=32, learning_rate=0.001, rng=rng)
        after = bce_loss(sdl_forward(params, rows), labels)
        assert after < before


class TestBceLoss:
    def test_half_prob_is_ln2(self):
        assert abs(bce_loss(np.array([0.5]), np.array([1.0])) - np.log(2.0)) < 1e-12

    def test_perfect_prediction_near_zero(self):
        assert bce_loss(np.array([1.0, 0.0]), np.array([1.0, 0.0])) <= 1e-6

    def test_hand_case(self):
        loss = bce_loss(np.array([0.9, 0.1]), np.array([1.0, 0.0]))
        assert abs(loss - (-np.log(0.9))) < 1e-12

    def test_grad_zero_when_clamped(self):
        g = bce_grad(np.array([0.0, 1.0, 0.5]), np.array([0.0, 1.0, 1.0]))
        assert g[0] == 0.0 and g[1] == 0.0 and g[2] != 0.0


class TestBackwardContract:
    def test_backward_twice_rejected(self):
        params = small_cnn(8)
        x = rng_stream(8, "x").uniform(size=(2, 3, 8, 8))
        trace = cnn_forward_trace(params, x)
        cnn_backward(params, trace, np.ones(2))
        with pytest.raises(UsageError):
            cnn_backward(params, trace, np.ones(2))
        sparams = init_sdl(gradcheck.MINI_SDL, rng_stream(8, "sdl"))
        strace = sdl_forward_trace(sparams, np.zeros((2, 12)))
        sdl_backward(sparams, strace, np.ones(2))
        with pytest.raises(UsageError):
            sdl_backward(sparams, strace, np.ones(2))

    def test_loss_scaling_scales_gradients(self):
        params, x, y = gradcheck.draw_cnn_case(21)
        t1 = cnn_forward_trace(params, x)
        t2 = cnn_forward_trace(params, x)
        from tame.nn import ops as nn_ops

        probs = nn_ops.sigmoid(t1.logits)
        d = nn_ops.sigmoid_backward(probs, bce_grad(probs, y))
        g1 = cnn_backward(params, t1, d)
        g2 = cnn_backward(params, t2, 3.0 * d)
        for name in g1:
            assert np.allclose(3.0 * g1[name], g2[name], rtol=1e-12, atol=0)


class TestGradientsAgainstFiniteDifferences:
    def test_cnn(self):
        assert gradcheck.check_cnn_gradients(101) < gradcheck.REL_TOL

    def test_sdl(self):
        assert gradcheck.check_sdl_gradients(102) < gradcheck.REL_TOL

    def test_shared_bottom(self):
        assert gradcheck.check_shared_bottom_gradients(103) < gradcheck.REL_TOL


class TestSharedBottomMatching:
    def test_matched_total_within_tolerance(self):
        cfg = matched_trunk_config(DEFAULT_CNN, DEFAULT_SDL, n_experts=5)
        target = 5 * DEFAULT_CNN.param_total() + DEFAULT_SDL.param_total()
        assert abs(cfg.param_total() - target) / target < 0.10

    def test_matched_at_desk_scale(self):
        expert = ConvNetConfig(image_size=16)
        sdl = SdlConfig(input_dim=3 * 16 * 16 + 2 * 128)
        cfg = matched_trunk_config(expert, sdl, n_experts=5)
        target = 5 * expert.param_total() + sdl.param_total()
        assert abs(cfg.param_total() - target) / target < 0.10
