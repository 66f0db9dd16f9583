"""Training the classifier head on exported feature rows."""
import numpy as np
import pytest

from trainexport.train import HeadConfig, train_head


def _param_count(net: dict) -> int:
    return sum(len(layer["W"]) * len(layer["W"][0]) + len(layer["b"])
               for layer in net["layers"])


def test_head_parameter_counts_for_three_feature_widths():
    rng = np.random.default_rng(0)
    labels = rng.integers(0, 10, 300)
    for width, count in ((30, 4110), (50, 6110), (70, 8110)):
        feats = rng.normal(size=(300, width))
        net, metrics = train_head(feats, labels, HeadConfig(epochs=1),
                                  classes=10)
        assert metrics["params"] == count == _param_count(net)
        assert net["input_dim"] == width
        assert [layer["activation"] for layer in net["layers"]] == [
            "relu", "linear"]


def test_head_learns_separable_features():
    rng = np.random.default_rng(1)
    labels = rng.integers(0, 10, 500)
    feats = (np.repeat(np.eye(10)[labels], 3, axis=1)
             + 0.05 * rng.normal(size=(500, 30)))
    net, metrics = train_head(feats, labels, HeadConfig(epochs=30, seed=0))
    assert metrics["classes"] == 10
    assert metrics["train_error"] <= 0.02


def test_head_on_noise_sits_near_chance():
    rng = np.random.default_rng(2)
    labels = rng.integers(0, 10, 1000)
    feats = rng.normal(size=(1000, 30))
    _, metrics = train_head(feats, labels, HeadConfig(epochs=1, seed=0))
    assert metrics["train_error"] > 0.5


def test_head_is_deterministic():
    rng = np.random.default_rng(3)
    labels = rng.integers(0, 4, 120)
    feats = rng.normal(size=(120, 12))
    first = train_head(feats, labels, HeadConfig(epochs=2, seed=5))
    second = train_head(feats, labels, HeadConfig(epochs=2, seed=5))
    assert first[0] == second[0]
    assert first[1] == second[1]


def test_head_input_validation():
    with pytest.raises(ValueError):
        train_head(np.zeros((4, 3)), np.zeros(5, dtype=int))
    with pytest.raises(ValueError):
        train_head(np.zeros((4, 3)), np.zeros(4, dtype=int))
