"""Test LSTM/GRU cells, recurrent layers and the model variants"""

import math

import numpy as np
import pytest

from app.core.exceptions import ConfigurationError, DimensionError, InputError
from app.core.ops import softmax
from app.core.rng import stream
from app.core.tensor import Tensor
from app.models.cells import GruCellParams, HiddenState, LstmCellParams, gru_step, lstm_step
from app.models.gradcheck import check_gradients, default_case
from app.models.layers import bilstm_layer, gru_layer, lstm_layer
from app.models.network import ModelParams, forward_model, init_params, predict_proba
from app.schemas.models import ModelConfig, ModelSpec
from tests.conftest import tiny_spec


def sig(z):
    return 1.0 / (1.0 + math.exp(-z))


def affine(x, W, U, h, b, row, j):
    """One pre-activation element, summed in plain Python"""
    total = b[j]
    for k in range(len(x[row])):
        total += x[row][k] * W[k][j]
    for k in range(len(h[row])):
        total += h[row][k] * U[k][j]
    return total


def lstm_oracle(p, x, h, c):
    """Per-element LSTM update"""
    batch, hidden = h.shape
    h_new, c_new = np.zeros_like(h), np.zeros_like(c)
    get = lambda name: getattr(p, name).data
    for row in range(batch):
        for j in range(hidden):
            i = sig(affine(x, get("W_i"), get("U_i"), h, get("b_i"), row, j))
            f = sig(affine(x, get("W_f"), get("U_f"), h, get("b_f"), row, j))
            g = math.tanh(affine(x, get("W_g"), get("U_g"), h, get("b_g"), row, j))
            o = sig(affine(x, get("W_o"), get("U_o"), h, get("b_o"), row, j))
            c_new[row, j] = f * c[row, j] + i * g
            h_new[row, j] = o * math.tanh(c_new[row, j])
    return h_new, c_new


def gru_oracle(p, x, h):
    """Per-element GRU update with the candidate acting on [m∘h, x]"""
    batch, hidden = h.shape
    h_new = np.zeros_like(h)
    for row in range(batch):
        m = [sig(affine(x, p.W_m.data, p.U_m.data, h, p.b_m.data, row, j)) for j in range(hidden)]
        n = [sig(affine(x, p.W_n.data, p.U_n.data, h, p.b_n.data, row, j)) for j in range(hidden)]
        joined = [m[k] * h[row][k] for k in range(hidden)] + list(x[row])
        for j in range(hidden):
            pre = p.b.data[j] + sum(joined[k] * p.W.data[k][j] for k in range(len(joined)))
            h_new[row, j] = (1 - n[j]) * h[row, j] + n[j] * math.tanh(pre)
    return h_new


@pytest.mark.recurrent
def test_lstm_zero_params_collapse(rng):
    """Test that zero weights give h' = 0 exactly"""
    params = LstmCellParams.zeros(3, 2)
    state = lstm_step(params, Tensor(rng.normal(size=(2, 3))), HiddenState.zeros(2, 2, with_cell=True))
    assert np.array_equal(state.h.data, np.zeros((2, 2)))
    assert np.array_equal(state.c.data, np.zeros((2, 2)))


@pytest.mark.recurrent
def test_lstm_carry_identity(rng):
    """Test that forget gate 1 and input gate 0 keep the cell state"""
    params = LstmCellParams.init(3, 2, rng)
    params.b_f.data[...] = 1e3
    params.b_i.data[...] = -1e3
    c = Tensor(rng.normal(size=(2, 2)))
    state = HiddenState(h=Tensor(rng.normal(size=(2, 2))), c=c)
    out = lstm_step(params, Tensor(rng.normal(size=(2, 3))), state)
    assert np.array_equal(out.c.data, c.data)


@pytest.mark.recurrent
def test_lstm_step_matches_scalar_oracle(rng):
    """Test a random 2×3 input with hidden 2 against per-element arithmetic"""
    params = LstmCellParams.init(3, 2, rng)
    for tensor in params.tensors():
        tensor.data[...] = rng.normal(size=tensor.shape)
    x, h, c = rng.normal(size=(2, 3)), rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
    out = lstm_step(params, Tensor(x), HiddenState(Tensor(h), Tensor(c)))
    h_ref, c_ref = lstm_oracle(params, x, h, c)
    assert np.allclose(out.h.data, h_ref, rtol=0, atol=1e-12)
    assert np.allclose(out.c.data, c_ref, rtol=0, atol=1e-12)


@pytest.mark.recurrent
def test_lstm_step_shape_errors(rng):
    """Test that mismatched inputs and states are dimension errors"""
    params = LstmCellParams.init(3, 2, rng)
    with pytest.raises(DimensionError):
        lstm_step(params, Tensor(np.ones((2, 4))), HiddenState.zeros(2, 2, with_cell=True))
    with pytest.raises(DimensionError):
        lstm_step(params, Tensor(np.ones((2, 3))), HiddenState.zeros(2, 2))
    with pytest.raises(DimensionError):
        LstmCellParams(**{**dict(params.named_tensors()), "U_f": Tensor(np.ones((3, 3)))})


@pytest.mark.recurrent
def test_gru_carry_identity(rng):
    """Test that an update gate forced to 0 keeps h across ten steps"""
    params = GruCellParams.init(3, 4, rng)
    params.b_n.data[...] = -1e3
    state = HiddenState(h=Tensor(rng.normal(size=(2, 4))))
    for _ in range(10):
        previous = state.h.data
        state = gru_step(params, Tensor(rng.normal(size=(2, 3))), state)
        assert np.max(np.abs(state.h.data - previous)) < 1e-12


@pytest.mark.recurrent
def test_gru_zero_params_fixed_point(rng):
    """Test that zero weights and h0 = 0 keep h at 0"""
    outputs = gru_layer(GruCellParams.zeros(3, 4), rng.normal(size=(2, 5, 3)))
    for h in outputs:
        assert np.array_equal(h.data, np.zeros((2, 4)))


@pytest.mark.recurrent
def test_gru_step_matches_scalar_oracle(rng):
    """Test a random small GRU step against per-element arithmetic"""
    params = GruCellParams.init(3, 2, rng)
    for tensor in params.tensors():
        tensor.data[...] = rng.normal(size=tensor.shape)
    x, h = rng.normal(size=(2, 3)), rng.normal(size=(2, 2))
    out = gru_step(params, Tensor(x), HiddenState(Tensor(h)))
    assert np.allclose(out.h.data, gru_oracle(params, x, h), rtol=0, atol=1e-12)


@pytest.mark.recurrent
def test_bilstm_single_step_is_two_independent_cells(rng):
    """Test that T = 1 concatenates one forward and one backward step"""
    fwd, bwd = LstmCellParams.init(3, 2, rng), LstmCellParams.init(3, 2, rng)
    seq = rng.normal(size=(2, 1, 3))
    out = bilstm_layer(fwd, bwd, seq)
    x = Tensor(seq[:, 0, :])
    f = lstm_step(fwd, x, HiddenState.zeros(2, 2, with_cell=True)).h.data
    b = lstm_step(bwd, x, HiddenState.zeros(2, 2, with_cell=True)).h.data
    assert out.shape == (2, 1, 4)
    assert np.allclose(out.data[:, 0, :], np.concatenate([f, b], axis=1), rtol=0, atol=1e-15)


@pytest.mark.recurrent
def test_bilstm_time_reversal_symmetry(rng):
    """Test forward-half(seq) == reversed backward-half(reversed seq) with shared params"""
    params = LstmCellParams.init(3, 2, rng)
    seq = rng.normal(size=(2, 5, 3))
    out = bilstm_layer(params, params, seq).data
    flipped = bilstm_layer(params, params, seq[:, ::-1, :].copy()).data
    assert np.allclose(out[:, :, :2], flipped[:, ::-1, 2:], rtol=0, atol=1e-15)


@pytest.mark.recurrent
def test_bilstm_forward_half_is_unidirectional(rng):
    """Test that zeroed backward parameters leave the forward half a plain LSTM"""
    fwd = LstmCellParams.init(3, 4, rng)
    seq = rng.normal(size=(2, 6, 3))
    out = bilstm_layer(fwd, LstmCellParams.zeros(3, 4), seq).data

    state = HiddenState.zeros(2, 4, with_cell=True)
    for t in range(6):
        state = lstm_step(fwd, Tensor(seq[:, t, :]), state)
        assert np.allclose(out[:, t, :4], state.h.data, rtol=0, atol=1e-15)
    assert np.array_equal(out[:, :, 4:], np.zeros((2, 6, 4)))


@pytest.mark.recurrent
def test_bilstm_matches_manual_composition(rng):
    """Test batch 2, T = 3 against stepping both directions by hand"""
    fwd, bwd = LstmCellParams.init(3, 2, rng), LstmCellParams.init(3, 2, rng)
    seq = rng.normal(size=(2, 3, 3))
    out = bilstm_layer(fwd, bwd, seq).data

    forward_h, state = [], HiddenState.zeros(2, 2, with_cell=True)
    for t in range(3):
        state = lstm_step(fwd, Tensor(seq[:, t, :]), state)
        forward_h.append(state.h.data)
    backward_h, state = [None] * 3, HiddenState.zeros(2, 2, with_cell=True)
    for t in (2, 1, 0):
        state = lstm_step(bwd, Tensor(seq[:, t, :]), state)
        backward_h[t] = state.h.data
    expected = np.stack([np.concatenate([f, b], axis=1) for f, b in zip(forward_h, backward_h)], axis=1)
    assert np.allclose(out, expected, rtol=0, atol=1e-15)
    for layer_h, manual_h in zip(lstm_layer(fwd, seq), forward_h):
        assert np.allclose(layer_h.data, manual_h, rtol=0, atol=1e-15)


@pytest.mark.recurrent
def test_layers_reject_empty_or_mismatched_sequences(rng):
    """Test the sequence preconditions"""
    params = LstmCellParams.init(3, 2, rng)
    with pytest.raises(InputError):
        bilstm_layer(params, params, np.zeros((2, 0, 3)))
    with pytest.raises(InputError):
        gru_layer(GruCellParams.init(3, 2, rng), np.zeros((0, 4, 3)))
    with pytest.raises(DimensionError):
        lstm_layer(params, rng.normal(size=(2, 4, 5)))


@pytest.mark.recurrent
def test_zero_head_gives_uniform_probabilities(rng):
    """Test that zero head weights give logits 0 and softmax [0.5, 0.5]"""
    for variant in ("bilstm", "gru", "hybrid"):
        spec = tiny_spec(variant)
        params = init_params(spec, seed=1)
        params.head_W.data[...] = 0.0
        params.head_b.data[...] = 0.0
        logits = forward_model(spec, params, rng.normal(size=(3, 4, 3)))
        assert np.array_equal(logits.data, np.zeros((3, 2)))
        assert np.array_equal(softmax(logits.data), np.full((3, 2), 0.5))


@pytest.mark.recurrent
def test_identical_sequences_identical_logits(rng):
    """Test that a batch of copies produces identical rows"""
    spec = tiny_spec("hybrid")
    params = init_params(spec, seed=2)
    seq = np.repeat(rng.normal(size=(1, 5, 3)), 4, axis=0)
    logits = forward_model(spec, params, seq).data
    for row in logits[1:]:
        assert np.allclose(row, logits[0], rtol=0, atol=1e-14)


@pytest.mark.recurrent
def test_hybrid_output_shape():
    """Test hidden sizes (4, 3), input 5, T = 6, batch 2 → 2×2 logits"""
    spec = ModelSpec(variant="hybrid", input_size=5, hidden_sizes=[4, 3], num_classes=2)
    params = init_params(spec, seed=0)
    logits = forward_model(spec, params, np.ones((2, 6, 5)))
    assert logits.shape == (2, 2)
    assert params.gru.input_size == 8
    assert params.head_W.shape == (3, 2)


@pytest.mark.recurrent
def test_variant_params_mismatch(rng):
    """Test that parameters of another variant are a configuration error"""
    gru_spec = tiny_spec("gru")
    bilstm_params = init_params(tiny_spec("bilstm"), seed=0)
    with pytest.raises(ConfigurationError):
        forward_model(gru_spec, bilstm_params, rng.normal(size=(2, 3, 3)))
    wide = ModelSpec(variant="gru", input_size=3, hidden_sizes=[5])
    with pytest.raises(ConfigurationError):
        forward_model(wide, init_params(gru_spec, seed=0), rng.normal(size=(2, 3, 3)))


@pytest.mark.recurrent
def test_batch_permutation_permutes_outputs(rng):
    """Test that samples do not leak into each other"""
    spec = tiny_spec("hybrid")
    params = init_params(spec, seed=4)
    seq = rng.normal(size=(5, 4, 3))
    order = rng.permutation(5)
    logits = forward_model(spec, params, seq).data
    permuted = forward_model(spec, params, seq[order]).data
    assert np.allclose(permuted, logits[order], rtol=0, atol=1e-14)


@pytest.mark.recurrent
def test_dropout_only_in_training(rng):
    """Test that dropout needs both train mode and a generator"""
    spec = tiny_spec("hybrid", dropout_rate=0.5)
    params = init_params(spec, seed=0)
    seq = rng.normal(size=(3, 4, 3))
    frozen = forward_model(spec, params, seq).data
    assert np.array_equal(forward_model(spec, params, seq, train=False, rng=stream(0, "d")).data, frozen)
    dropped = forward_model(spec, params, seq, train=True, rng=stream(0, "d")).data
    assert not np.array_equal(dropped, frozen)


@pytest.mark.recurrent
def test_init_params_seeded():
    """Test that initialization replays per seed and sets the forget bias"""
    spec = tiny_spec("bilstm")
    first, second = init_params(spec, seed=9), init_params(spec, seed=9)
    for (name, a), (_, b) in zip(first.named_tensors(), second.named_tensors()):
        assert np.array_equal(a.data, b.data), name
    assert np.all(first.bilstm_fwd.b_f.data == 1.0)
    bound = 1.0 / math.sqrt(3)
    assert np.all(np.abs(first.bilstm_fwd.W_i.data) <= bound)
    other = init_params(spec, seed=10)
    assert not np.array_equal(first.head_W.data, other.head_W.data)


@pytest.mark.recurrent
def test_named_tensors_register_each_once():
    """Test that every learnable tensor appears exactly once"""
    params = init_params(tiny_spec("hybrid"), seed=0)
    named = params.named_tensors()
    assert len({id(t) for _, t in named}) == len(named)
    assert len({n for n, _ in named}) == len(named)
    assert {n.split(".")[0] for n, _ in named} == {"bilstm", "gru", "head"}


@pytest.mark.recurrent
def test_params_from_arrays(gru_model):
    """Test rebuilding parameters by name and rejecting incomplete sets"""
    _, params = gru_model
    arrays = {name: tensor.data for name, tensor in params.named_tensors()}
    rebuilt = ModelParams.from_arrays(arrays)
    for (name, a), (_, b) in zip(params.named_tensors(), rebuilt.named_tensors()):
        assert np.array_equal(a.data, b.data), name
    del arrays["head.b"]
    with pytest.raises(ConfigurationError):
        ModelParams.from_arrays(arrays)


@pytest.mark.recurrent
def test_predict_proba_rows_sum_to_one(gru_model, rng):
    """Test frozen inference probabilities"""
    spec, params = gru_model
    probabilities = predict_proba(spec, params, rng.normal(size=(7, 4, 3)))
    assert probabilities.shape == (7, 2)
    assert np.allclose(probabilities.sum(axis=1), 1.0, rtol=0, atol=1e-12)
    with pytest.raises(InputError):
        predict_proba(spec, params, np.zeros((0, 4, 3)))


@pytest.mark.recurrent
def test_model_config_fills_hidden_sizes():
    """Test default hidden sizes and the layer-count check"""
    assert ModelConfig(variant="hybrid").hidden_sizes == [16, 16]
    assert ModelConfig(variant="gru").hidden_sizes == [16]
    with pytest.raises(ValueError):
        ModelConfig(variant="gru", hidden_sizes=[4, 4])
    with pytest.raises(ValueError):
        ModelConfig(variant="lstm")
    spec = ModelConfig(variant="bilstm").to_spec(input_size=6)
    assert spec.input_size == 6 and spec.num_classes == 2


@pytest.mark.recurrent
@pytest.mark.parametrize("variant", ["bilstm", "gru", "hybrid"])
def test_full_model_gradient_check(variant):
    """Test backprop through every variant against central differences"""
    spec, params, features, labels = default_case(variant)
    results = check_gradients(spec, params, features, labels)
    assert {r.name for r in results} == {n for n, _ in params.named_tensors()}
    failing = [(r.name, r.max_error) for r in results if not r.passed]
    assert failing == []
    assert all(r.max_error < 1e-4 for r in results)


@pytest.mark.recurrent
def test_gradient_check_catches_corruption():
    """Test that a deliberately wrong gradient fails under its own name"""
    spec, params, features, labels = default_case("gru")

    def corrupt(name, grad):
        return grad + 0.5 if name == "gru.U_n" else grad

    results = check_gradients(spec, params, features, labels, names=["gru.U_n", "head.W"], hook=corrupt)
    verdicts = {r.name: r.passed for r in results}
    assert verdicts == {"gru.U_n": False, "head.W": True}
