"""RBM energy, conditionals and contrastive divergence tests.

The enumeration table is the oracle: for machines small enough to list
every configuration, conditionals computed by marginalizing the exact
joint must match the closed-form sigmoid expressions. Hand values use
sigmoid(ln 3) = 0.75 and sigmoid(-ln 3) = 0.25.
"""

import numpy as np
import pytest

from rampcast import (DataShapeError, RbmLayer, TrainConfig, cd1_update, energy,
                      hidden_prob, joint_prob_bruteforce, train_rbm, visible_prob)

LN3 = np.log(3.0)


def random_rbm(rng, n_visible, n_hidden, scale=1.0):
    layer = RbmLayer(n_visible, n_hidden, rng=rng)
    layer.weights = rng.normal(scale=scale, size=(n_hidden, n_visible))
    layer.visible_bias = rng.normal(scale=scale, size=n_visible)
    layer.hidden_bias = rng.normal(scale=scale, size=n_hidden)
    return layer


class TestEnergy:
    def test_hand_value(self):
        # E = -a.v - b.h - h W v with a=[1,-1], b=[0.5], W=[[2,-3]]
        layer = RbmLayer.from_arrays([[2.0, -3.0]], [1.0, -1.0], [0.5])
        assert energy(layer, [1, 1], [1]) == pytest.approx(-(1 - 1) - 0.5 - (2 - 3))
        assert energy(layer, [0, 0], [0]) == 0.0
        assert energy(layer, [1, 0], [1]) == pytest.approx(-1 - 0.5 - 2)

    def test_shape_check(self):
        layer = RbmLayer(3, 2, rng=0)
        with pytest.raises(DataShapeError):
            energy(layer, [1, 0], [0, 1])


class TestConditionals:
    def test_zero_parameters_give_half(self):
        layer = RbmLayer.from_arrays(np.zeros((2, 3)), np.zeros(3), np.zeros(2))
        assert np.allclose(hidden_prob(layer, [1, 0, 1]), 0.5)
        assert np.allclose(visible_prob(layer, [1, 1]), 0.5)

    def test_bias_hand_values(self):
        layer = RbmLayer.from_arrays(np.zeros((1, 1)), [-LN3], [LN3])
        assert hidden_prob(layer, [0.0])[0] == pytest.approx(0.75)
        assert visible_prob(layer, [0.0])[0] == pytest.approx(0.25)

    def test_batch_shapes(self):
        layer = RbmLayer(4, 3, rng=1)
        V = np.random.default_rng(0).random((7, 4))
        assert hidden_prob(layer, V).shape == (7, 3)
        assert visible_prob(layer, np.zeros((5, 3))).shape == (5, 4)


class TestBruteForceOracle:
    def test_uniform_when_unparameterized(self):
        layer = RbmLayer.from_arrays(np.zeros((1, 1)), [0.0], [0.0])
        table = joint_prob_bruteforce(layer)
        assert np.allclose(table.probs, 0.25)

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            layer = random_rbm(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
            assert abs(joint_prob_bruteforce(layer).probs.sum() - 1.0) < 1e-12

    def test_conditionals_match_enumeration(self):
        """Sigmoid conditionals == marginalized exact joint, both directions."""
        rng = np.random.default_rng(77)
        for _ in range(40):
            nv = int(rng.integers(1, 7))
            nh = int(rng.integers(1, 7))
            layer = random_rbm(rng, nv, nh, scale=1.5)
            table = joint_prob_bruteforce(layer)
            v = (rng.random(nv) < 0.5).astype(float)
            h = (rng.random(nh) < 0.5).astype(float)
            assert np.abs(table.hidden_conditional(v) - hidden_prob(layer, v)).max() < 1e-10
            assert np.abs(table.visible_conditional(h) - visible_prob(layer, h)).max() < 1e-10

    def test_enumeration_bound(self):
        with pytest.raises(ValueError, match="enumeration bound"):
            joint_prob_bruteforce(RbmLayer(12, 9, rng=0))


class TestCd1Update:
    def test_zero_rate_changes_nothing(self):
        rng = np.random.default_rng(5)
        layer = RbmLayer(4, 3, rng=rng)
        before = layer.weights.copy()
        cfg = TrainConfig(learning_rate=1e-300)  # effectively zero, still valid
        cd1_update(layer, np.eye(4)[:2], cfg, rng)
        assert np.abs(layer.weights - before).max() < 1e-290

    def test_deterministic_for_seed(self):
        def run():
            rng = np.random.default_rng(8)
            layer = RbmLayer(5, 4, rng=rng)
            cfg = TrainConfig()
            X = np.random.default_rng(1).random((12, 5))
            for _ in range(10):
                cd1_update(layer, X, cfg, rng)
            return layer.weights.copy()

        assert (run() == run()).all()

    def test_shapes_preserved(self):
        rng = np.random.default_rng(2)
        layer = RbmLayer(6, 3, rng=rng)
        cd1_update(layer, np.zeros((4, 6)), TrainConfig(), rng)
        assert layer.weights.shape == (3, 6)
        assert layer.visible_bias.shape == (6,)
        assert layer.hidden_bias.shape == (3,)

    def test_reconstruction_error_falls(self):
        """A 4-3 machine shown one repeated pattern must learn it."""
        rng = np.random.default_rng(0)
        layer = RbmLayer(4, 3, rng=rng)
        pattern = np.tile([1.0, 0.0, 1.0, 0.0], (8, 1))
        cfg = TrainConfig(pretrain_epochs=200)
        errs = train_rbm(layer, pattern, cfg, rng)
        assert len(errs) == 200
        assert np.mean(errs[-20:]) < np.mean(errs[:20])
        assert errs[-1] < errs[0]

    def test_literal_decay_variant_differs(self):
        X = np.random.default_rng(3).random((10, 4))

        def run(literal):
            rng = np.random.default_rng(8)
            layer = RbmLayer(4, 2, rng=rng)
            cfg = TrainConfig(eq8_literal=literal)
            for _ in range(5):
                cd1_update(layer, X, cfg, rng)
            return layer.weights

        assert np.abs(run(True) - run(False)).max() > 1e-6

    def test_width_mismatch(self):
        rng = np.random.default_rng(1)
        layer = RbmLayer(4, 2, rng=rng)
        with pytest.raises(DataShapeError):
            cd1_update(layer, np.zeros((3, 5)), TrainConfig(), rng)


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert cfg.learning_rate == 0.08
        assert cfg.momentum == 0.9
        assert cfg.finetune_max_iters == 500
        assert cfg.batch_size == 32

    @pytest.mark.parametrize("kwargs", [
        dict(learning_rate=0.0),
        dict(momentum=1.0),
        dict(cd_steps=2),
        dict(finetune_max_iters=0),
        dict(batch_size=0),
        dict(pretrain_epochs=-1),
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)
