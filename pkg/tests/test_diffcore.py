import numpy as np
import pytest

from latdyn.diffcore import OP_NAMES, Tensor, evaluate, finite_difference_check, gradient


def _away_from_zero(rng, shape, margin=0.2):
    x = rng.uniform(margin, 1.0, size=shape)
    return x * rng.choice([-1.0, 1.0], size=shape)


def op_case(name, rng):
    """Build (fn, inputs) exercising one operation with a scalar loss."""
    if name == "matmul":
        return (
            lambda t: (t["a"] @ t["b"]).sum(),
            {"a": rng.normal(size=(2, 3)), "b": rng.normal(size=(3, 2))},
        )
    if name == "conv2d":
        return (
            lambda t: (t["x"].conv2d(t["w"], stride=2, pad=1) * t["x"].conv2d(t["w"], stride=2, pad=1)).sum(),
            {"x": rng.normal(size=(1, 2, 5, 5)), "w": rng.normal(size=(3, 2, 3, 3))},
        )
    if name == "transposed_conv2d":
        return (
            lambda t: t["x"].transposed_conv2d(t["w"], stride=2, pad=1).tanh().sum(),
            {"x": rng.normal(size=(1, 3, 3, 3)), "w": rng.normal(size=(3, 2, 3, 3))},
        )
    if name == "add":
        return lambda t: ((t["a"] + t["b"]) * (t["a"] + t["b"])).sum(), {
            "a": rng.normal(size=(3, 4)),
            "b": rng.normal(size=(4,)),
        }
    if name == "sub":
        return lambda t: ((t["a"] - t["b"]).tanh()).sum(), {
            "a": rng.normal(size=(3, 4)),
            "b": rng.normal(size=(3, 4)),
        }
    if name == "mul":
        return lambda t: (t["a"] * t["b"]).sum(), {
            "a": rng.normal(size=(2, 5)),
            "b": rng.normal(size=(2, 5)),
        }
    if name == "div":
        return lambda t: (t["a"] / t["b"]).sum(), {
            "a": rng.normal(size=(6,)),
            "b": _away_from_zero(rng, (6,), margin=0.5),
        }
    if name == "exp":
        return lambda t: t["x"].exp().sum(), {"x": rng.normal(size=(4, 3))}
    if name == "log":
        return lambda t: t["x"].log().sum(), {"x": rng.uniform(0.5, 2.0, size=(7,))}
    if name == "tanh":
        return lambda t: (t["x"].tanh() * t["x"].tanh()).sum(), {"x": rng.normal(size=(5,))}
    if name == "relu":
        return lambda t: (t["x"].relu() * t["x"]).sum(), {"x": _away_from_zero(rng, (8,))}
    if name == "sigmoid":
        return lambda t: t["x"].sigmoid().sum(), {"x": rng.normal(size=(6,))}
    if name == "softmax":
        return lambda t: (t["x"].softmax(axis=-1) * t["y"]).sum(), {
            "x": rng.normal(size=(3, 4)),
            "y": rng.normal(size=(3, 4)),
        }
    if name == "layer_norm":
        return lambda t: (t["x"].layer_norm() * t["y"]).sum(), {
            "x": rng.normal(size=(2, 6)),
            "y": rng.normal(size=(2, 6)),
        }
    if name == "mean":
        return lambda t: (t["x"].mean(axis=0) * t["x"].mean(axis=0)).sum(), {
            "x": rng.normal(size=(3, 4))
        }
    if name == "sum":
        return lambda t: (t["x"].sum(axis=1).tanh()).sum(), {"x": rng.normal(size=(3, 4))}
    if name == "concat":
        return lambda t: (Tensor.concat([t["a"], t["b"]], axis=1).tanh()).sum(), {
            "a": rng.normal(size=(2, 3)),
            "b": rng.normal(size=(2, 2)),
        }
    if name == "slice":
        return lambda t: (t["x"][1:, :2] * t["x"][:-1, 1:]).sum(), {"x": rng.normal(size=(4, 3))}
    if name == "reshape":
        return lambda t: (t["x"].reshape(6).tanh()).sum(), {"x": rng.normal(size=(2, 3))}
    if name == "sin":
        return lambda t: t["x"].sin().sum(), {"x": rng.normal(size=(5,))}
    if name == "cos":
        return lambda t: t["x"].cos().sum(), {"x": rng.normal(size=(5,))}
    if name == "scaled_dot_product_attention":
        return (
            lambda t: (t["q"].attention(t["k"], t["v"]) * t["q"].attention(t["k"], t["v"])).sum(),
            {
                "q": rng.normal(size=(4, 3)),
                "k": rng.normal(size=(4, 3)),
                "v": rng.normal(size=(4, 3)),
            },
        )
    raise KeyError(name)


@pytest.mark.parametrize("name", OP_NAMES)
def test_gradient_matches_finite_differences(name):
    rng = np.random.default_rng(hash(name) % 2**32)
    for _ in range(10):
        fn, inputs = op_case(name, rng)
        assert finite_difference_check(fn, inputs, eps=1e-5) < 1e-4


def test_evaluate_add():
    out = evaluate(lambda t: t["a"] + t["b"], {"a": [1.0, 2.0], "b": [3.0, 4.0]})
    assert np.array_equal(out, [4.0, 6.0])


def test_evaluate_softmax_symmetry():
    out = evaluate(lambda t: t["x"].softmax(), {"x": [0.0, 0.0]})
    np.testing.assert_allclose(out, [0.5, 0.5])


def test_matmul_matches_triple_loop_oracle():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(2, 3)), rng.normal(size=(3, 2))
    out = evaluate(lambda t: t["a"] @ t["b"], {"a": a, "b": b})
    ref = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(3):
                ref[i, j] += a[i, k] * b[k, j]
    np.testing.assert_allclose(out, ref, rtol=1e-12)


def test_conv2d_matches_naive_loop_oracle():
    rng = np.random.default_rng(1)
    x, w = rng.normal(size=(1, 2, 5, 5)), rng.normal(size=(3, 2, 3, 3))
    out = evaluate(lambda t: t["x"].conv2d(t["w"]), {"x": x, "w": w})
    ref = np.zeros((1, 3, 3, 3))
    for o in range(3):
        for i in range(3):
            for j in range(3):
                ref[0, o, i, j] = (x[0, :, i : i + 3, j : j + 3] * w[o]).sum()
    np.testing.assert_allclose(out, ref, rtol=1e-12)


def test_gradient_of_sum_is_ones():
    g = gradient(lambda t: t["x"].sum(), {"x": np.ones((2, 3, 4))})
    assert np.array_equal(g["x"], np.ones((2, 3, 4)))


def test_gradient_of_sum_of_squares():
    g = gradient(lambda t: (t["x"] * t["x"]).sum(), {"x": [1.0, 2.0, 3.0]})
    np.testing.assert_allclose(g["x"], [2.0, 4.0, 6.0])


def test_gradient_rejects_nonscalar():
    with pytest.raises(ValueError):
        gradient(lambda t: t["x"] * 2.0, {"x": np.ones(3)})


def test_conv2d_gradient_fd():
    rng = np.random.default_rng(2)
    inputs = {"x": rng.normal(size=(1, 1, 5, 5)), "w": rng.normal(size=(2, 1, 3, 3))}
    fn = lambda t: (t["x"].conv2d(t["w"], stride=1, pad=1).relu()).sum()
    assert finite_difference_check(fn, inputs, eps=1e-5) < 1e-4


def test_fd_check_tanh():
    rng = np.random.default_rng(3)
    assert (
        finite_difference_check(lambda t: t["x"].tanh().sum(), {"x": rng.normal(size=(6,))})
        < 1e-4
    )


def test_fd_check_linear_is_exact():
    rng = np.random.default_rng(4)
    assert (
        finite_difference_check(lambda t: t["x"].sum(), {"x": rng.normal(size=(5,))}) < 1e-10
    )


def test_fd_check_attention_block():
    rng = np.random.default_rng(5)
    inputs = {
        "q": rng.normal(size=(4, 3)),
        "k": rng.normal(size=(4, 3)),
        "v": rng.normal(size=(4, 3)),
    }
    fn = lambda t: (t["q"].attention(t["k"], t["v"]).tanh()).sum()
    assert finite_difference_check(fn, inputs, eps=1e-5) < 1e-3


def test_evaluate_is_pure():
    rng = np.random.default_rng(6)
    inputs = {"x": rng.normal(size=(3, 3)), "w": rng.normal(size=(2, 1, 3, 3))}
    fn = lambda t: t["x"].reshape(1, 3, 3, 1).transpose(0, 3, 1, 2).conv2d(t["w"], pad=1).softmax()
    a = evaluate(fn, inputs)
    b = evaluate(fn, inputs)
    assert np.array_equal(a, b)


def test_shape_mismatch_error_is_descriptive():
    with pytest.raises(ValueError, match="conv2d"):
        evaluate(
            lambda t: t["x"].conv2d(t["w"]),
            {"x": np.ones((1, 2, 4, 4)), "w": np.ones((1, 3, 3, 3))},
        )
