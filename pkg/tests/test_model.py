import numpy as np
import pytest

from errors import InvalidArgumentError, StorageError
from net.backprop import loss_and_gradients
from net.evaluation import predict, predict_batch
from net.model import ClassifierModel, Topology, forward, forward_pass, load_model, save_model


def test_default_topology_shapes():
    topology = Topology()
    shapes = dict(topology.parameter_shapes())
    assert topology.branch_features == 16 * 16 * 32
    assert shapes["branch0.conv0.small.weight"] == (8, 1, 3, 3)
    assert shapes["branch0.conv0.large.weight"] == (8, 1, 9, 9)
    assert shapes["branch2.conv2.large.weight"] == (16, 32, 9, 9)
    assert shapes["dense0.weight"] == (3 * 8192, 256)
    assert shapes["dense1.weight"] == (256, 64)
    assert shapes["dense2.weight"] == (64, 9)


def test_topology_validation():
    with pytest.raises(InvalidArgumentError):
        Topology(image_size=20, conv_channels=(2, 2, 2))
    with pytest.raises(InvalidArgumentError):
        Topology(kernels=(3, 8))
    with pytest.raises(InvalidArgumentError):
        Topology(dropout=1.0)


def test_zero_model_is_uniform(tiny_topology, rng):
    model = ClassifierModel.zeros(tiny_topology)
    images = rng.uniform(size=(3, 16, 16))
    probs = forward(model, images)
    assert probs.shape == (9,)
    assert np.allclose(probs, 1.0 / 9.0, atol=1e-7)
    loss, _ = loss_and_gradients(model, images, np.array([4]))
    assert loss == pytest.approx(np.log(9.0), abs=1e-6)
    label, predicted_probs = predict(model, images)
    assert label == 0
    assert np.array_equal(predicted_probs, probs)


def test_forward_is_deterministic_without_dropout(tiny_topology, rng):
    model = ClassifierModel.initialize(tiny_topology, seed=1)
    images = rng.uniform(size=(4, 3, 16, 16))
    assert np.array_equal(forward(model, images), forward(model, images))
    assert np.allclose(forward(model, images).sum(axis=1), 1.0, atol=1e-6)


def test_dropout_depends_only_on_seed(rng):
    topology = Topology(image_size=16, conv_channels=(2, 2), dense_units=(8,), dropout=0.5)
    model = ClassifierModel.initialize(topology, seed=1)
    images = rng.uniform(size=(2, 3, 16, 16))
    a = forward(model, images, train_mode=True, dropout_seed=3)
    b = forward(model, images, train_mode=True, dropout_seed=3)
    assert np.array_equal(a, b)


def test_permuting_output_layer_permutes_probabilities(tiny_topology, rng):
    model = ClassifierModel.initialize(tiny_topology, seed=2)
    images = rng.uniform(size=(3, 16, 16))
    perm = rng.permutation(9)
    permuted = model.copy()
    last = "dense1"
    permuted.params[f"{last}.weight"] = model.params[f"{last}.weight"][:, perm]
    permuted.params[f"{last}.bias"] = model.params[f"{last}.bias"][perm]
    assert np.allclose(forward(permuted, images), forward(model, images)[perm], atol=1e-6)


def test_shared_logit_shift_keeps_prediction(tiny_topology, rng):
    model = ClassifierModel.initialize(tiny_topology, seed=3)
    images = rng.uniform(size=(3, 16, 16))
    shifted = model.copy()
    shifted.params["dense1.bias"] = shifted.params["dense1.bias"] + np.float32(2.5)
    assert predict(model, images)[0] == predict(shifted, images)[0]


def test_branches_are_independent_before_fusion(tiny_topology, rng):
    model = ClassifierModel.initialize(tiny_topology, seed=4)
    images = rng.uniform(size=(1, 3, 16, 16)).astype(np.float32)
    blanked = images.copy()
    blanked[:, 1:] = 0.0
    _, cache_a = forward_pass(model, images)
    _, cache_b = forward_pass(model, blanked)
    assert np.array_equal(cache_a["features"][0], cache_b["features"][0])
    assert not np.array_equal(cache_a["features"][1], cache_b["features"][1])


def test_shape_mismatch_rejected(tiny_topology):
    model = ClassifierModel.zeros(tiny_topology)
    with pytest.raises(InvalidArgumentError):
        forward(model, np.zeros((2, 16, 16)))
    with pytest.raises(InvalidArgumentError):
        forward(model, np.zeros((3, 32, 32)))


def test_invalid_labels_and_empty_batch(tiny_topology):
    model = ClassifierModel.zeros(tiny_topology)
    with pytest.raises(InvalidArgumentError):
        loss_and_gradients(model, np.zeros((1, 3, 16, 16)), np.array([9]))
    with pytest.raises(InvalidArgumentError):
        loss_and_gradients(model, np.zeros((0, 3, 16, 16)), np.array([], dtype=int))


def test_duplicated_sample_gives_same_gradient(tiny_topology, rng):
    model = ClassifierModel.initialize(tiny_topology, seed=6, dtype=np.float64)
    image = rng.uniform(size=(1, 3, 16, 16))
    loss_1, grads_1 = loss_and_gradients(model, image, np.array([2]))
    loss_2, grads_2 = loss_and_gradients(model, np.concatenate([image, image]), np.array([2, 2]))
    assert loss_1 == pytest.approx(loss_2, rel=1e-12)
    for name in grads_1:
        assert np.allclose(grads_1[name], grads_2[name], rtol=1e-10, atol=1e-14)


def test_predict_batch_matches_forward(tiny_topology, rng):
    model = ClassifierModel.initialize(tiny_topology, seed=7)
    images = rng.uniform(size=(20, 3, 16, 16))
    labels, probs = predict_batch(model, images)
    assert np.allclose(probs, forward(model, images), atol=1e-6)
    assert np.array_equal(labels, probs.argmax(axis=1))
    with pytest.raises(InvalidArgumentError):
        predict(model, images)


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_serialization_round_trip(tmp_path, tiny_topology, rng, dtype):
    model = ClassifierModel.initialize(tiny_topology, seed=8, dtype=dtype)
    model.hyperparameters = {"learning_rate": "0.01", "seed": "7"}
    path = str(tmp_path / "model.bin")
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.topology == model.topology
    assert loaded.hyperparameters == model.hyperparameters
    assert loaded.dtype == np.dtype(dtype)
    for name, value in model.params.items():
        assert np.array_equal(loaded.params[name], value)
    images = rng.uniform(size=(2, 3, 16, 16))
    assert np.array_equal(forward(loaded, images), forward(model, images))


def test_corrupt_model_files_rejected(tmp_path, tiny_topology):
    path = tmp_path / "model.bin"
    save_model(ClassifierModel.zeros(tiny_topology), str(path))
    blob = path.read_bytes()
    path.write_bytes(blob[:-5])
    with pytest.raises(StorageError):
        load_model(str(path))
    path.write_bytes(b"NOTCNN" + blob[6:])
    with pytest.raises(StorageError):
        load_model(str(path))
    path.write_bytes(blob + b"\x00")
    with pytest.raises(StorageError):
        load_model(str(path))
    with pytest.raises(StorageError):
        load_model(str(tmp_path / "missing.bin"))
