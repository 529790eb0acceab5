import numpy as np
import pytest

from polygen import autodiff as ad
from polygen.autodiff import Tape, grad


def fd_grads(loss_fn, arrays, h=1e-5):
    """Central finite differences of a scalar loss over named arrays.

    Mutates each coordinate in place (arrays may be views) and restores it.
    """
    out = {}
    for name, arr in arrays.items():
        g = np.zeros_like(arr)
        flat, gflat = arr.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = loss_fn()
            flat[i] = orig - h
            fm = loss_fn()
            flat[i] = orig
            gflat[i] = (fp - fm) / (2 * h)
        out[name] = g
    return out


def max_rel(a, b):
    worst = 0.0
    for name in a:
        if not a[name].size:
            continue
        num = np.max(np.abs(a[name] - b[name]))
        den = 1.0 + max(np.max(np.abs(a[name])), np.max(np.abs(b[name])))
        worst = max(worst, num / den)
    return worst


class TestBasics:
    def test_sum_of_param_gives_ones(self):
        tape = Tape()
        theta = tape.param("theta", np.arange(6.0).reshape(2, 3))
        loss = ad.sum_(theta)
        grads = grad(loss, tape)
        np.testing.assert_array_equal(grads["theta"], np.ones((2, 3)))

    def test_hadamard_product_rule(self):
        tape = Tape()
        a = tape.param("a", np.array([1.0, 2.0, 3.0]))
        b = tape.param("b", np.array([-1.0, 0.5, 4.0]))
        grads = grad(ad.sum_(ad.mul(a, b)), tape)
        np.testing.assert_array_equal(grads["a"], b.value)
        np.testing.assert_array_equal(grads["b"], a.value)

    def test_non_scalar_loss_rejected(self):
        tape = Tape()
        a = tape.param("a", np.ones(3))
        with pytest.raises(ValueError):
            grad(a, tape)

    def test_unreachable_nodes_keep_zero_adjoint(self):
        tape = Tape()
        a = tape.param("a", np.ones(2))
        b = tape.param("b", np.ones(2))
        dead_end = ad.mul(b, b)  # never feeds the loss
        loss = ad.sum_(a)
        grads = grad(loss, tape)
        assert dead_end.adjoint is None
        np.testing.assert_array_equal(grads["b"], np.zeros(2))

    def test_tape_is_topologically_ordered(self):
        tape = Tape()
        a = tape.param("a", np.ones(2))
        b = ad.mul(a, a)
        c = ad.add(b, a)
        order = {id(n): i for i, n in enumerate(tape.nodes)}
        for node in tape.nodes:
            for parent in node._parents:
                assert order[id(parent)] < order[id(node)]
        assert order[id(b)] < order[id(c)]

    def test_duplicate_param_name_rejected(self):
        tape = Tape()
        tape.param("w", np.ones(1))
        with pytest.raises(ValueError):
            tape.param("w", np.ones(1))

    def test_foreign_loss_rejected(self):
        t1, t2 = Tape(), Tape()
        x = t1.param("x", np.ones(1))
        t2.param("y", np.ones(1))
        with pytest.raises(ValueError):
            grad(ad.sum_(x), t2)


def _unary_cases():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((3, 4)) * 1.5
    return [
        ("tanh", ad.tanh, x),
        ("sigmoid", ad.sigmoid, x),
        ("softplus", ad.softplus, x),
        ("leaky_relu", ad.leaky_relu, x + 0.05),
        ("relu", ad.relu, x + 0.05),
        ("log", ad.log, np.abs(x) + 0.5),
        ("neg", ad.neg, x),
    ]


class TestOpGradients:
    @pytest.mark.parametrize("name,op,x", _unary_cases(), ids=[c[0] for c in _unary_cases()])
    def test_unary_matches_fd(self, name, op, x):
        arrays = {"x": x.copy()}

        def loss_fn():
            tape = Tape()
            node = tape.param("x", arrays["x"])
            return float(ad.sum_(ad.mul(op(node), op(node))).value)

        def auto():
            tape = Tape()
            node = tape.param("x", arrays["x"])
            return grad(ad.sum_(ad.mul(op(node), op(node))), tape)

        assert max_rel(auto(), fd_grads(loss_fn, arrays)) <= 1e-6

    def test_matmul_transpose_concat_broadcast(self):
        rng = np.random.default_rng(1)
        arrays = {
            "w": rng.standard_normal((3, 4)),
            "u": rng.standard_normal((4, 2)),
            "b": rng.standard_normal(2),
            "v": rng.standard_normal(4),
        }
        x = rng.standard_normal((5, 3))

        def build(tape):
            w = tape.param("w", arrays["w"])
            u = tape.param("u", arrays["u"])
            b = tape.param("b", arrays["b"])
            v = tape.param("v", arrays["v"])
            h = ad.matmul(tape.constant(x), w)  # (5, 4)
            h = ad.add(ad.matmul(h, u), b)  # (5, 2) with broadcast bias
            g = ad.matmul(ad.transpose(u), v)  # (2,) mat-vec through a transpose
            wide = ad.concat([h, ad.broadcast_to(g, (5, 2))], axis=1)
            return ad.mean_(ad.mul(wide, wide))

        def loss_fn():
            return float(build(Tape()).value)

        tape = Tape()
        loss = build(tape)
        assert max_rel(grad(loss, tape), fd_grads(loss_fn, arrays)) <= 1e-7

    def test_mean_axis_and_sum_axis(self):
        rng = np.random.default_rng(2)
        arrays = {"x": rng.standard_normal((4, 3))}

        def build(tape):
            xn = tape.param("x", arrays["x"])
            return ad.sum_(ad.mul(ad.mean_(xn, axis=0), ad.sum_(xn, axis=0)))

        def loss_fn():
            return float(build(Tape()).value)

        tape = Tape()
        assert max_rel(grad(build(tape), tape), fd_grads(loss_fn, arrays)) <= 1e-7

    def test_gradients_deterministic(self):
        rng = np.random.default_rng(3)
        arrays = {"x": rng.standard_normal((6, 6))}

        def run():
            tape = Tape()
            xn = tape.param("x", arrays["x"])
            loss = ad.mean_(ad.softplus(ad.matmul(xn, ad.transpose(xn))))
            return grad(loss, tape)["x"]

        a, b = run(), run()
        assert np.array_equal(a, b)
