import pytest
import sys
import os
from collections import OrderedDict
import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.autodiff import Tensor, backward, finite_difference_check
from src.model import (LayerSpec, ModelParams, OptimizerState, accuracy, cross_entropy, forward, init_params,
                       load_checkpoint, predict, save_checkpoint, sgd_step, zero_params)
from src.utils.errors import ContractError, DimensionError


def _filled(spec: LayerSpec, value: float) -> ModelParams:
    return ModelParams(spec, OrderedDict(
        (name, Tensor(np.full(shape, value), requires_grad=True, name=name))
        for name, shape in spec.shapes().items()))


def test_layer_spec_shapes():
    """Test parameter names and shapes in forward order."""
    spec = LayerSpec(input_dim=12, num_classes=7, hidden=(8, 4))
    assert list(spec.shapes().items()) == [
        ("fc1.weight", (8, 12)), ("fc1.bias", (8,)),
        ("fc2.weight", (4, 8)), ("fc2.bias", (4,)),
        ("fc3.weight", (7, 4)), ("fc3.bias", (7,)),
    ]
    assert LayerSpec.from_dict(spec.to_dict()) == spec


def test_layer_spec_validation():
    """Test rejection of degenerate shapes and unknown activations."""
    with pytest.raises(ContractError):
        LayerSpec(input_dim=4, num_classes=1)
    with pytest.raises(ContractError):
        LayerSpec(input_dim=4, num_classes=3, hidden=(0,))
    with pytest.raises(ContractError):
        LayerSpec(input_dim=4, num_classes=3, activation="gelu")


def test_zero_network_gives_zero_logits():
    """Test that a zero-weight network maps everything to zero."""
    params = zero_params(LayerSpec(input_dim=5, num_classes=3, hidden=(4,)))
    logits = forward(params, np.random.default_rng(0).normal(size=(6, 5)))
    np.testing.assert_array_equal(logits.data, np.zeros((6, 3)))


def test_single_linear_layer_picks_weight_column():
    """Test that x = (1, 0) returns the first weight column."""
    spec = LayerSpec(input_dim=2, num_classes=2, hidden=())
    weight = np.array([[0.3, -1.0], [0.7, 2.0]])
    params = ModelParams(spec, OrderedDict([("fc1.weight", Tensor(weight)), ("fc1.bias", Tensor(np.zeros(2)))]))
    logits = forward(params, np.array([[1.0, 0.0]]))
    np.testing.assert_allclose(logits.data[0], weight[:, 0])


def test_forward_dimension_mismatch():
    """Test that the wrong input width is a contract error."""
    params = zero_params(LayerSpec(input_dim=5, num_classes=3, hidden=(4,)))
    with pytest.raises(ContractError):
        forward(params, np.zeros((2, 6)))


def test_init_is_seeded_and_bounded():
    """Test that initialization replays under the same seed and respects the fan-in bound."""
    spec = LayerSpec(input_dim=16, num_classes=3, hidden=(9,))
    first = init_params(spec, np.random.default_rng(7))
    second = init_params(spec, np.random.default_rng(7))
    np.testing.assert_array_equal(first.flatten(), second.flatten())
    assert np.all(np.abs(first["fc1.weight"].data) <= 0.25)
    assert np.all(np.abs(first["fc2.weight"].data) <= 1.0 / 3.0)
    assert first.count == 16 * 9 + 9 + 9 * 3 + 3


def test_forward_matches_numpy_recomputation():
    """Test a seeded network against a plain numpy evaluation."""
    spec = LayerSpec(input_dim=6, num_classes=4, hidden=(5, 3))
    params = init_params(spec, np.random.default_rng(3))
    x = np.random.default_rng(4).normal(size=(2, 6))
    h = x
    for layer in (1, 2, 3):
        h = h @ params[f"fc{layer}.weight"].data.T + params[f"fc{layer}.bias"].data
        if layer < 3:
            h = np.maximum(h, 0.0)
    np.testing.assert_allclose(forward(params, x).data, h, rtol=1e-12)


def test_flatten_unflatten():
    """Test that a parameter vector restores the same tensors."""
    spec = LayerSpec(input_dim=3, num_classes=2, hidden=(2,))
    params = init_params(spec, np.random.default_rng(0))
    restored = ModelParams.unflatten(spec, params.flatten())
    for name in params:
        np.testing.assert_array_equal(restored[name].data, params[name].data)
    with pytest.raises(DimensionError):
        ModelParams.unflatten(spec, np.zeros(3))


def test_cross_entropy_uniform_logits():
    """Test that uniform logits over seven classes give ln 7."""
    loss = cross_entropy(Tensor(np.zeros((3, 7))), [0, 3, 6])
    assert loss.item() == pytest.approx(np.log(7.0), abs=1e-6)
    assert loss.item() == pytest.approx(1.945910, abs=1e-6)


def test_cross_entropy_closed_form():
    """Test logits [[1, 0]] with label 0."""
    loss = cross_entropy(Tensor([[1.0, 0.0]]), [0])
    assert loss.item() == pytest.approx(0.313262, abs=1e-6)


def test_cross_entropy_large_margin_vanishes():
    """Test that the loss tends to zero as the correct margin grows."""
    losses = [cross_entropy(Tensor([[margin, 0.0, 0.0]]), [0]).item() for margin in (1.0, 10.0, 40.0)]
    assert losses[0] > losses[1] > losses[2]
    assert losses[2] < 1e-12


def test_cross_entropy_reductions():
    """Test sum, mean and per-row reductions."""
    logits = Tensor([[1.0, 0.0], [0.0, 2.0]])
    rows = cross_entropy(logits, [0, 0], reduction="none")
    assert rows.shape == (2,)
    assert cross_entropy(logits, [0, 0], reduction="sum").item() == pytest.approx(rows.data.sum())
    assert cross_entropy(logits, [0, 0]).item() == pytest.approx(rows.data.mean())


def test_cross_entropy_label_out_of_range():
    """Test that a label past the class count is a contract error."""
    with pytest.raises(ContractError, match="label 2 outside"):
        cross_entropy(Tensor(np.zeros((1, 2))), [2])


def test_model_gradients_match_finite_differences():
    """Test backward through the full classifier with a smooth activation."""
    spec = LayerSpec(input_dim=3, num_classes=3, hidden=(4,), activation="tanh")
    params = init_params(spec, np.random.default_rng(1))
    x = np.random.default_rng(2).normal(size=(5, 3))
    labels = [0, 1, 2, 1, 0]

    def loss(tensors):
        return cross_entropy(forward(ModelParams(spec, tensors), x), labels)

    point = OrderedDict((name, t.data) for name, t in params.items())
    assert finite_difference_check(loss, point) < 1e-6


def test_sgd_vanilla_step():
    """Test p = 1, grad = 2, lr = 0.1 without momentum or decay."""
    spec = LayerSpec(input_dim=1, num_classes=2, hidden=())
    params = _filled(spec, 1.0)
    state = OptimizerState.for_params(params, lr=0.1, momentum=0.0, weight_decay=0.0)
    grads = {name: np.full(t.shape, 2.0) for name, t in params.items()}
    updated, _ = sgd_step(params, grads, state, 0.0)
    np.testing.assert_allclose(updated["fc1.weight"].data, 0.8)


def test_sgd_zero_gradient_fixed_point():
    """Test that zero gradient with zero velocity leaves parameters unchanged."""
    spec = LayerSpec(input_dim=1, num_classes=2, hidden=())
    params = _filled(spec, 0.37)
    state = OptimizerState.for_params(params, lr=0.5, weight_decay=0.0)
    updated, _ = sgd_step(params, {name: np.zeros(t.shape) for name, t in params.items()}, state, 0.0)
    np.testing.assert_array_equal(updated.flatten(), params.flatten())


def test_sgd_momentum_recurrence():
    """Test two steps with momentum 0.9: -1 then -2.9."""
    spec = LayerSpec(input_dim=1, num_classes=2, hidden=())
    params = _filled(spec, 0.0)
    state = OptimizerState.for_params(params, lr=1.0, momentum=0.9, weight_decay=0.0)
    grads = {name: np.ones(t.shape) for name, t in params.items()}
    params, state = sgd_step(params, grads, state, 0.0)
    np.testing.assert_allclose(params["fc1.bias"].data, -1.0)
    params, state = sgd_step(params, grads, state, 0.0)
    np.testing.assert_allclose(params["fc1.bias"].data, -2.9)


def test_sgd_decays_learning_rate():
    """Test the one-step decay at 80% of training."""
    state = OptimizerState(lr=0.01, decay_factor=0.1, decay_at=0.8)
    assert state.lr_at(0.79) == pytest.approx(0.01)
    assert state.lr_at(0.8) == pytest.approx(0.001)


def test_sgd_missing_gradient():
    """Test that a parameter without a gradient is a contract error."""
    spec = LayerSpec(input_dim=1, num_classes=2, hidden=())
    params = _filled(spec, 0.0)
    with pytest.raises(ContractError):
        sgd_step(params, {"fc1.weight": np.zeros((2, 1))}, OptimizerState(), 0.0)


def test_sgd_from_backward_gradient_map():
    """Test that a GradientMap from backward feeds the optimizer directly."""
    spec = LayerSpec(input_dim=2, num_classes=2, hidden=())
    params = init_params(spec, np.random.default_rng(0))
    loss = cross_entropy(forward(params, np.array([[1.0, -1.0], [0.5, 0.2]])), [0, 1])
    grads = backward(loss, params)
    updated, state = sgd_step(params, grads, OptimizerState.for_params(params, lr=0.1), 0.0)
    after = cross_entropy(forward(updated, np.array([[1.0, -1.0], [0.5, 0.2]])), [0, 1])
    assert after.item() < loss.item()
    assert all(t.requires_grad and t.is_leaf for t in updated.values())


def test_predict_and_accuracy():
    """Test top-1 predictions on a hand-built linear classifier."""
    spec = LayerSpec(input_dim=2, num_classes=2, hidden=())
    params = ModelParams(spec, OrderedDict([("fc1.weight", Tensor(np.eye(2))), ("fc1.bias", Tensor(np.zeros(2)))]))
    features = np.array([[2.0, 1.0], [0.0, 3.0], [1.0, 0.5]])
    np.testing.assert_array_equal(predict(params, features), [0, 1, 0])
    assert accuracy(params, features, [0, 1, 1]) == pytest.approx(2.0 / 3.0)
    assert accuracy(params, features[:0], []) == 0.0


def test_checkpoint_round_trip(tmp_path):
    """Test that saved parameters load back bit-exactly."""
    spec = LayerSpec(input_dim=4, num_classes=3, hidden=(5,))
    params = init_params(spec, np.random.default_rng(11))
    path = save_checkpoint(tmp_path / "model.ckpt", params)
    loaded = load_checkpoint(path)
    assert loaded.spec == spec
    np.testing.assert_array_equal(loaded.flatten(), params.flatten())
