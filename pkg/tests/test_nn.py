import math

import numpy as np
import pytest

from composer_id.nn import (
    AdamState,
    AvgPool2x2,
    BatchNorm2d,
    BiGRU,
    Conv2d,
    Dropout,
    FrequencyMean,
    GlobalMaxPool,
    Linear,
    ReLU,
    TemporalPool,
    Tensor,
    adam_step,
    gradient_check,
    loss_gradient_check,
    softmax,
    softmax_crossentropy,
)
from composer_id.nn.gradcheck import relative_error
from composer_id.nn.recurrent import GRUDirection, sigmoid


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def test_tensor_rejects_mismatched_grad():
    with pytest.raises(ValueError):
        Tensor(np.zeros((2, 3)), grad=np.zeros(3))
    assert Tensor(np.ones((2, 3)), grad=np.zeros((2, 3))).shape == (2, 3)


def test_conv_identity_kernel(rng):
    conv = Conv2d(1, 1, rng)
    conv.weight.data[:] = 0
    conv.weight.data[0, 0, 1, 1] = 1
    x = rng.standard_normal((2, 1, 5, 7)).astype(np.float32)
    np.testing.assert_array_equal(conv.forward(x, False), x)


def test_conv_all_ones_kernel_on_constant(rng):
    conv = Conv2d(1, 1, rng)
    conv.weight.data[:] = 1
    out = conv.forward(np.full((1, 1, 5, 5), 2.0, dtype=np.float32), False)
    np.testing.assert_allclose(out[0, 0, 1:-1, 1:-1], 18.0)
    assert out[0, 0, 0, 0] == pytest.approx(8.0)


def test_conv_matches_loop_oracle(rng):
    conv = Conv2d(2, 3, rng)
    conv.bias.data[:] = rng.standard_normal(3)
    x = rng.standard_normal((1, 2, 4, 4)).astype(np.float32)
    w, b = conv.weight.data, conv.bias.data
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    expected = np.zeros((1, 3, 4, 4))
    for o in range(3):
        for i in range(4):
            for j in range(4):
                total = float(b[o])
                for c in range(2):
                    for dy in range(3):
                        for dx in range(3):
                            total += float(xp[0, c, i + dy, j + dx]) * float(w[o, c, dy, dx])
                expected[0, o, i, j] = total
    np.testing.assert_allclose(conv.forward(x, False), expected, atol=1e-5)


def test_conv_rejects_channel_mismatch(rng):
    with pytest.raises(ValueError):
        Conv2d(3, 4, rng).forward(np.zeros((1, 2, 4, 4)), False)


def test_relu():
    relu = ReLU()
    np.testing.assert_array_equal(relu.forward(np.array([-1.0, 0.0, 2.0]), False), [0.0, 0.0, 2.0])
    np.testing.assert_array_equal(relu.backward(np.array([5.0, 5.0, 5.0])), [0.0, 0.0, 5.0])


def test_relu_passes_nan_through():
    out = ReLU().forward(np.array([np.nan, -1.0, 1.0]), False)
    assert np.isnan(out[0])
    np.testing.assert_array_equal(out[1:], [0.0, 1.0])


def test_batch_norm_constant_input_normalizes_to_zero():
    bn = BatchNorm2d(2)
    out = bn.forward(np.full((4, 2, 3, 3), 7.0), True)
    np.testing.assert_allclose(out, 0.0, atol=1e-6)


def test_batch_norm_zero_gamma_gives_beta(rng):
    bn = BatchNorm2d(3)
    bn.gamma.data[:] = 0
    bn.beta.data[:] = [1.0, -2.0, 0.5]
    out = bn.forward(rng.standard_normal((2, 3, 4, 4)), True)
    np.testing.assert_allclose(out, np.broadcast_to(bn.beta.data[None, :, None, None], out.shape))


def test_batch_norm_batch_moments(rng):
    bn = BatchNorm2d(3)
    x = rng.standard_normal((8, 3, 6, 5)) * 4.0 + 3.0
    out = bn.forward(x, True)
    assert np.abs(out.mean(axis=(0, 2, 3))).max() < 1e-6
    np.testing.assert_allclose(out.var(axis=(0, 2, 3)), 1.0, atol=1e-4)
    np.testing.assert_allclose(bn.running_mean.data, 0.1 * x.mean(axis=(0, 2, 3)), rtol=1e-5)
    np.testing.assert_allclose(bn.running_var.data, 0.9 + 0.1 * x.var(axis=(0, 2, 3)), rtol=1e-5)


def test_batch_norm_eval_uses_initial_stats(rng):
    bn = BatchNorm2d(2)
    x = rng.standard_normal((2, 2, 3, 3))
    np.testing.assert_allclose(bn.forward(x, False), x / math.sqrt(1 + 1e-5), rtol=1e-6)


def test_avg_pool():
    pool = AvgPool2x2()
    assert pool.forward(np.array([[[[1.0, 2.0], [3.0, 4.0]]]]), False)[0, 0, 0, 0] == 2.5
    np.testing.assert_array_equal(pool.forward(np.full((1, 2, 6, 7), 3.0), False), np.full((1, 2, 3, 3), 3.0))
    grad = pool.backward(np.ones((1, 2, 3, 3)))
    assert grad.shape == (1, 2, 6, 7)
    assert (grad[:, :, :, :6] == 0.25).all() and not grad[:, :, :, 6].any()


def test_avg_pool_pitch_axis_widths():
    x = np.zeros((1, 1, 16, 88))
    widths = []
    for _ in range(4):
        x = AvgPool2x2().forward(x, False)
        widths.append(x.shape[3])
    assert widths == [44, 22, 11, 5]


def test_avg_pool_rejects_small_maps():
    with pytest.raises(ValueError):
        AvgPool2x2().forward(np.zeros((1, 1, 1, 4)), False)


def test_global_max_pool():
    gmp = GlobalMaxPool()
    np.testing.assert_array_equal(gmp.forward(np.full((1, 1, 1, 1), 4.0), False), [[4.0]])
    x = np.zeros((1, 1, 3, 3))
    x[0, 0, 1, 2] = 7.0
    assert gmp.forward(x, False)[0, 0] == 7.0
    grad = gmp.backward(np.array([[1.0]]))
    assert grad[0, 0, 1, 2] == 1.0 and grad.sum() == 1.0


def test_global_max_pool_ties_go_to_first_cell():
    gmp = GlobalMaxPool()
    x = np.zeros((1, 1, 2, 3))
    x[0, 0, 0, 2] = x[0, 0, 1, 0] = 5.0
    gmp.forward(x, False)
    grad = gmp.backward(np.array([[1.0]]))
    assert grad[0, 0, 0, 2] == 1.0 and grad[0, 0, 1, 0] == 0.0


def test_global_max_pool_ignores_spatial_order(rng):
    x = rng.standard_normal((2, 3, 5, 4))
    flat = x.reshape(2, 3, -1)
    shuffled = flat[:, :, rng.permutation(20)].reshape(2, 3, 4, 5)
    np.testing.assert_array_equal(GlobalMaxPool().forward(x, False), GlobalMaxPool().forward(shuffled, False))


def test_dropout_identity_cases(rng):
    x = rng.standard_normal((4, 5))
    np.testing.assert_array_equal(Dropout(0.0, rng).forward(x, True), x)
    np.testing.assert_array_equal(Dropout(0.5, rng).forward(x, False), x)


def test_dropout_statistics(rng):
    drop = Dropout(0.5, rng)
    out = drop.forward(np.ones(100000), True)
    kept = out != 0
    assert abs(kept.mean() - 0.5) < 0.02
    assert (out[kept] == 2.0).all()
    np.testing.assert_array_equal(drop.backward(np.ones(100000)), out)


@pytest.mark.parametrize("rate", [-0.1, 1.0])
def test_dropout_rejects_rate(rate, rng):
    with pytest.raises(ValueError):
        Dropout(rate, rng)


def test_linear_examples(rng):
    lin = Linear(3, 3, rng)
    lin.weight.data = np.eye(3, dtype=np.float32)
    x = rng.standard_normal((2, 3)).astype(np.float32)
    np.testing.assert_array_equal(lin.forward(x, False), x)
    lin.bias.data = np.array([1.0, 2.0, 3.0], dtype=np.float32)
    np.testing.assert_array_equal(lin.forward(np.zeros((2, 3), dtype=np.float32), False), [[1, 2, 3], [1, 2, 3]])


def test_linear_matches_dot_product(rng):
    lin = Linear(4, 2, rng)
    x = rng.standard_normal((3, 4)).astype(np.float32)
    w = lin.weight.data
    expected = [[sum(float(x[b, d]) * float(w[d, e]) for d in range(4)) for e in range(2)] for b in range(3)]
    np.testing.assert_allclose(lin.forward(x, False), expected, atol=1e-6)
    with pytest.raises(ValueError):
        lin.forward(np.zeros((3, 5)), False)


def test_frequency_mean_and_temporal_pool():
    x = np.arange(24, dtype=np.float64).reshape(1, 2, 3, 4)
    seq = FrequencyMean().forward(x, False)
    assert seq.shape == (1, 3, 2)
    assert seq[0, 0, 0] == pytest.approx(1.5)

    states = np.array([[[1.0, 9.0], [5.0, 2.0], [3.0, 4.0]]])
    np.testing.assert_array_equal(TemporalPool("max").forward(states, False), [[5.0, 9.0]])
    np.testing.assert_array_equal(TemporalPool("last").forward(states, False), [[3.0, 9.0]])
    with pytest.raises(ValueError):
        TemporalPool("mean")


def test_bigru_zero_parameters_give_zero_output(rng):
    gru = BiGRU(3, 2, rng)
    for t in gru.parameters().values():
        t.data[...] = 0
    assert not gru.forward(rng.standard_normal((2, 4, 3)), False).any()


def test_bigru_single_step_directions_agree(rng):
    gru = BiGRU(3, 2, rng)
    for name, t in gru.fwd.parameters().items():
        gru.bwd.params[name].data = t.data.copy()
    out = gru.forward(rng.standard_normal((1, 1, 3)), False)
    assert out.shape == (1, 1, 4)
    np.testing.assert_array_equal(out[..., :2], out[..., 2:])


def scalar_gru(x, p, hidden):
    h = [0.0] * hidden
    out = []
    for x_t in x:
        def pre(gate, state):
            return [
                sum(x_t[d] * p[f"W_{gate}"][d][j] for d in range(len(x_t)))
                + sum(state[i] * p[f"U_{gate}"][i][j] for i in range(hidden))
                + p[f"b_{gate}"][j]
                for j in range(hidden)
            ]

        z = [1 / (1 + math.exp(-a)) for a in pre("z", h)]
        r = [1 / (1 + math.exp(-a)) for a in pre("r", h)]
        c = [math.tanh(a) for a in pre("h", [r[i] * h[i] for i in range(hidden)])]
        h = [(1 - z[j]) * h[j] + z[j] * c[j] for j in range(hidden)]
        out.append(h)
    return out


def test_gru_direction_matches_scalar_oracle(rng):
    gru = GRUDirection(3, 2, rng)
    for name, t in gru.params.items():
        if name.startswith("b_"):
            t.data = rng.standard_normal(2).astype(np.float32)
    x = rng.standard_normal((1, 3, 3)).astype(np.float32)
    p = {name: t.data.astype(np.float64).tolist() for name, t in gru.params.items()}
    expected = scalar_gru(x[0].astype(np.float64).tolist(), p, 2)
    np.testing.assert_allclose(gru.forward(x, False)[0], expected, atol=1e-5)


def test_bigru_backward_direction_reads_reversed_sequence(rng):
    gru = BiGRU(2, 3, rng)
    x = rng.standard_normal((1, 4, 2))
    out = gru.forward(x, False)
    reversed_run = gru.bwd.forward(x[:, ::-1], False)
    np.testing.assert_allclose(out[0, :, 3:], reversed_run[0, ::-1], rtol=1e-6)
    with pytest.raises(ValueError):
        gru.forward(np.zeros((1, 4, 5)), False)


def test_sigmoid_is_stable():
    values = sigmoid(np.array([-1000.0, 0.0, 1000.0]))
    np.testing.assert_allclose(values, [0.0, 0.5, 1.0])


def test_softmax_rows(rng):
    probs = softmax(rng.standard_normal((5, 7)) * 10)
    assert ((probs > 0) & (probs < 1)).all()
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)


def test_crossentropy_uniform_logits():
    loss, grad = softmax_crossentropy(np.zeros((4, 10)), np.array([0, 3, 5, 9]))
    assert loss == pytest.approx(math.log(10))
    assert grad[0, 0] == pytest.approx((0.1 - 1) / 4)
    assert grad[0, 1] == pytest.approx(0.1 / 4)


def test_crossentropy_worked_example():
    loss, _ = softmax_crossentropy(np.array([[1.0, 2.0, 3.0]]), np.array([2]))
    assert loss == pytest.approx(0.40761, abs=1e-5)


def test_crossentropy_vanishes_with_margin():
    losses = [softmax_crossentropy(np.array([[0.0, m]]), np.array([1]))[0] for m in (1.0, 10.0, 100.0, 1000.0)]
    assert losses == sorted(losses, reverse=True)
    assert losses[-1] < 1e-12


def test_crossentropy_rejects_invalid_labels():
    with pytest.raises(ValueError):
        softmax_crossentropy(np.zeros((2, 3)), np.array([0, 3]))
    with pytest.raises(ValueError):
        softmax_crossentropy(np.zeros((2, 3)), np.array([0]))


def test_adam_zero_gradient():
    params = {"w": np.array([1.0, -2.0])}
    state = AdamState()
    adam_step(params, {"w": np.zeros(2)}, state)
    np.testing.assert_array_equal(params["w"], [1.0, -2.0])
    assert state.step == 1


def test_adam_first_step():
    params = {"p": np.array([1.0])}
    adam_step(params, {"p": np.array([1.0])}, AdamState())
    assert params["p"][0] == pytest.approx(1.0 - 0.001 / (1 + 1e-8), abs=1e-12)


def test_adam_two_steps_match_unrolled_formula():
    g = 0.3
    params = {"p": np.array([0.5])}
    state = AdamState()
    adam_step(params, {"p": np.array([g])}, state)
    adam_step(params, {"p": np.array([g])}, state)

    p, m, v = 0.5, 0.0, 0.0
    for step in (1, 2):
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        p -= 0.001 * (m / (1 - 0.9**step)) / (math.sqrt(v / (1 - 0.999**step)) + 1e-8)
    assert abs(params["p"][0] - p) < 1e-9
    assert state.step == 2


def test_adam_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        adam_step({"p": np.zeros(3)}, {"p": np.zeros(2)}, AdamState())
    with pytest.raises(ValueError):
        adam_step({"p": np.zeros(3)}, {}, AdamState())


def test_relative_error_floor():
    assert relative_error(1e-8, 2e-8, 1e-3) == pytest.approx(1e-5)
    assert relative_error(2.0, 1.0, 1e-3) == pytest.approx(0.5)


def test_gradcheck_linear(rng):
    assert gradient_check(Linear(5, 4, rng), rng.standard_normal((3, 5))) < 1e-6


def test_gradcheck_conv(rng):
    assert gradient_check(Conv2d(2, 3, rng), rng.standard_normal((2, 2, 5, 4))) < 1e-5


@pytest.mark.parametrize("training", [False, True])
def test_gradcheck_batch_norm(training, rng):
    bn = BatchNorm2d(3)
    bn.gamma.data = rng.uniform(0.5, 1.5, 3).astype(np.float32)
    bn.beta.data = rng.standard_normal(3).astype(np.float32)
    assert gradient_check(bn, rng.standard_normal((4, 3, 3, 3)), eps=1e-5, training=training) < 1e-5


def test_gradcheck_relu_away_from_kink(rng):
    x = rng.uniform(0.1, 2.0, (3, 6)) * rng.choice([-1.0, 1.0], (3, 6))
    assert gradient_check(ReLU(), x) < 1e-6


def test_gradcheck_pooling(rng):
    assert gradient_check(AvgPool2x2(), rng.standard_normal((2, 2, 5, 6))) < 1e-6
    separated = rng.permutation(2 * 3 * 4 * 4).astype(np.float64).reshape(2, 3, 4, 4)
    assert gradient_check(GlobalMaxPool(), separated) < 1e-6
    assert gradient_check(FrequencyMean(), rng.standard_normal((2, 3, 4, 5))) < 1e-6


@pytest.mark.parametrize("mode", ["max", "last"])
def test_gradcheck_temporal_pool(mode, rng):
    separated = rng.permutation(2 * 5 * 4).astype(np.float64).reshape(2, 5, 4)
    assert gradient_check(TemporalPool(mode), separated) < 1e-6


def test_gradcheck_bigru(rng):
    gru = BiGRU(3, 4, rng)
    for t in gru.parameters().values():
        if t.data.ndim == 1:
            t.data = rng.normal(0, 0.5, t.data.shape).astype(np.float32)
    assert gradient_check(gru, rng.standard_normal((2, 5, 3)), eps=1e-5, n_coords=30) < 1e-5


def test_gradcheck_crossentropy(rng):
    assert loss_gradient_check(rng.standard_normal((4, 6)), np.array([0, 5, 2, 2]), eps=1e-5) < 1e-6


def test_gradcheck_rejects_non_finite(rng):
    lin = Linear(2, 2, rng)
    lin.weight.data[0, 0] = np.nan
    with pytest.raises(ValueError):
        gradient_check(lin, rng.standard_normal((1, 2)))
