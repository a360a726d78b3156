import numpy as np
import pytest

from errors import InvalidArgumentError, TrainingError
from net.model import ClassifierModel, Topology
from net.training import TrainConfig, train


def one_per_class(rng, size: int = 16) -> tuple:
    images = rng.uniform(0.0, 1.0, size=(9, 3, size, size)).astype(np.float32)
    return images, np.arange(9)


def test_zero_learning_rate_keeps_weights(tiny_topology, rng):
    model = ClassifierModel.initialize(tiny_topology, seed=0)
    images, labels = one_per_class(rng)
    result = train(model, images, labels, TrainConfig(learning_rate=0.0, epochs=3, batch_size=4, seed=1))
    for name, value in model.params.items():
        assert np.array_equal(result.model.params[name], value)
    assert len(result.log) == 3


def test_training_does_not_mutate_input_model(tiny_topology, rng):
    model = ClassifierModel.initialize(tiny_topology, seed=0)
    before = {name: value.copy() for name, value in model.params.items()}
    images, labels = one_per_class(rng)
    result = train(model, images, labels, TrainConfig(learning_rate=0.05, epochs=2, batch_size=3, seed=1))
    assert all(np.array_equal(model.params[name], before[name]) for name in before)
    assert result.model.hyperparameters["learning_rate"] == "0.05"


def test_same_seed_same_weights(rng):
    topology = Topology(image_size=16, conv_channels=(2, 2), dense_units=(8,), dropout=0.5)
    images, labels = one_per_class(rng)
    cfg = TrainConfig(learning_rate=0.01, epochs=3, batch_size=4, seed=21)
    a = train(ClassifierModel.initialize(topology, seed=3), images, labels, cfg)
    b = train(ClassifierModel.initialize(topology, seed=3), images, labels, cfg)
    for name in a.model.params:
        assert np.array_equal(a.model.params[name], b.model.params[name])
    assert a.log == b.log


def test_memorizes_one_sample_per_class(rng):
    topology = Topology(image_size=16, conv_channels=(4,), dense_units=(16,), dropout=0.0)
    images, labels = one_per_class(rng)
    cfg = TrainConfig(learning_rate=0.01, momentum=0.9, batch_size=9, epochs=150, seed=2, patience=150,
                      min_delta=0.0)
    result = train(ClassifierModel.initialize(topology, seed=4), images, labels, cfg)
    assert result.log[-1].accuracy == 1.0
    assert result.log[-1].loss < 0.1 * result.log[0].loss


def test_full_batch_loss_never_increases(rng):
    topology = Topology(image_size=16, conv_channels=(2, 2), dense_units=(8,), dropout=0.0)
    images, labels = one_per_class(rng)
    cfg = TrainConfig(learning_rate=1e-3, momentum=0.0, batch_size=9, epochs=30, seed=2, patience=30,
                      min_delta=0.0)
    model = ClassifierModel.initialize(topology, seed=4, dtype=np.float64)
    losses = [record.loss for record in train(model, images, labels, cfg).log]
    assert len(losses) == 30
    assert all(later <= earlier for earlier, later in zip(losses, losses[1:]))
    assert losses[-1] < losses[0]


def test_missing_class_rejected(tiny_topology, rng):
    images, labels = one_per_class(rng)
    with pytest.raises(TrainingError, match="8"):
        train(ClassifierModel.zeros(tiny_topology), images[:8], labels[:8], TrainConfig(epochs=1))


def test_early_stopping_on_plateau(tiny_topology, rng):
    images, labels = one_per_class(rng)
    cfg = TrainConfig(learning_rate=0.0, epochs=10, batch_size=9, seed=1, patience=2)
    result = train(ClassifierModel.initialize(tiny_topology, seed=0), images, labels, cfg)
    assert [record.epoch for record in result.log] == [1, 2, 3]


def test_epoch_callback_receives_every_record(tiny_topology, rng):
    images, labels = one_per_class(rng)
    seen = []
    result = train(ClassifierModel.initialize(tiny_topology, seed=0), images, labels,
                   TrainConfig(learning_rate=0.01, epochs=2, batch_size=5, seed=1), on_epoch=seen.append)
    assert seen == result.log


def test_train_config_validation():
    with pytest.raises(InvalidArgumentError):
        TrainConfig(learning_rate=-1.0)
    with pytest.raises(InvalidArgumentError):
        TrainConfig(batch_size=0)
    with pytest.raises(InvalidArgumentError):
        TrainConfig(momentum=1.0)
