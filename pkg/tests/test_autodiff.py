import numpy as np
import pytest

import schemalearn.autodiff as ad
from schemalearn import Tape, grad_check
from schemalearn.validation import ShapeError, ValidationError


def leaf(tape, values):
    return tape.leaf(np.asarray(values, dtype=np.float64))


class TestForward:
    def test_matmul(self):
        t = Tape()
        out = t.apply("matmul", leaf(t, [[1, 2], [3, 4]]), leaf(t, [[1], [1]]))
        assert np.array_equal(t.value(out), [[3], [7]])

    def test_matmul_shape_error_names_shapes(self):
        t = Tape()
        with pytest.raises(ShapeError, match=r"\(2, 2\).*\(3, 1\)"):
            t.apply("matmul", leaf(t, np.zeros((2, 2))), leaf(t, np.zeros((3, 1))))

    def test_tanh_at_zero(self):
        t = Tape()
        out = t.apply("tanh", leaf(t, np.zeros(3)))
        assert np.array_equal(t.value(out), np.zeros(3))

    def test_concat_shapes(self):
        t = Tape()
        out = t.apply("concat_last_axis", leaf(t, np.ones((2, 3))), leaf(t, np.ones((2, 4))))
        assert t.value(out).shape == (2, 7)

    def test_add_requires_exact_shapes(self):
        t = Tape()
        with pytest.raises(ShapeError):
            t.apply("add", leaf(t, np.ones((2, 3))), leaf(t, np.ones(3)))

    def test_unknown_op(self):
        t = Tape()
        with pytest.raises(ValidationError, match="unknown op"):
            t.apply("conv2d", leaf(t, np.ones(3)))

    def test_slice_and_reshape(self):
        t = Tape()
        x = leaf(t, np.arange(6.0))
        piece = t.apply("slice_last_axis", x, start=2, stop=6)
        mat = t.apply("reshape", piece, shape=(2, 2))
        assert np.array_equal(t.value(mat), [[2, 3], [4, 5]])

    def test_concat_slice_roundtrip(self, rng):
        t = Tape()
        x = leaf(t, rng.normal(size=(3, 4)))
        y = leaf(t, rng.normal(size=(3, 2)))
        both = t.apply("concat_last_axis", x, y)
        back_x = t.apply("slice_last_axis", both, start=0, stop=4)
        back_y = t.apply("slice_last_axis", both, start=4, stop=6)
        assert np.array_equal(t.value(back_x), t.value(x))
        assert np.array_equal(t.value(back_y), t.value(y))


class TestBackward:
    def test_sum_all_grad(self):
        t = Tape()
        x = leaf(t, np.ones(4))
        root = t.apply("sum_all", x)
        assert np.array_equal(t.backward(root)[x], np.ones(4))

    def test_mean_relu(self):
        t = Tape()
        x = leaf(t, [-1.0, 2.0])
        root = t.apply("mean_all", t.apply("relu", x))
        assert np.array_equal(t.backward(root)[x], [0.0, 0.5])

    def test_tanh_prime_at_zero(self):
        t = Tape()
        x = leaf(t, 0.0)
        root = t.apply("tanh", x)
        assert t.backward(root)[x] == pytest.approx(1.0)

    def test_non_scalar_root_rejected(self):
        t = Tape()
        x = leaf(t, np.ones(3))
        with pytest.raises(ShapeError, match="scalar"):
            t.backward(x)

    def test_unreachable_leaf_gets_zeros(self):
        t = Tape()
        x = leaf(t, np.ones(3))
        y = leaf(t, np.ones((2, 2)))
        root = t.apply("sum_all", x)
        grads = t.backward(root)
        assert np.array_equal(grads[y], np.zeros((2, 2)))

    def test_fanout_accumulates(self):
        t = Tape()
        x = leaf(t, [3.0])
        root = t.apply("sum_all", t.apply("elemwise_mul", x, x))
        assert t.backward(root)[x] == pytest.approx([6.0])

    def test_linearity(self, rng):
        # grad of a*f + b*g == a*grad f + b*grad g
        point = rng.normal(size=5)
        a, b = 2.5, -1.25

        def f_root(t, x):
            return t.apply("sum_all", t.apply("elemwise_mul", x, x))

        def g_root(t, x):
            return t.apply("sum_all", t.apply("tanh", x))

        t1 = Tape()
        x1 = leaf(t1, point)
        gf = t1.backward(f_root(t1, x1))[x1]
        t2 = Tape()
        x2 = leaf(t2, point)
        gg = t2.backward(g_root(t2, x2))[x2]

        t3 = Tape()
        x3 = leaf(t3, point)
        combo = t3.apply("add",
                         t3.apply("scalar_mul", f_root(t3, x3), scalar=a),
                         t3.apply("scalar_mul", g_root(t3, x3), scalar=b))
        gc = t3.backward(combo)[x3]
        assert np.max(np.abs(gc - (a * gf + b * gg))) < 1e-12

    def test_replay_bit_identical(self, rng):
        point = rng.normal(size=(2, 3))

        def build():
            t = Tape()
            x = leaf(t, point)
            w = leaf(t, np.full((3, 2), 0.5))
            root = t.apply("mean_all", t.apply("sigmoid", t.apply("matmul", x, w)))
            return t, x, root

        t1, x1, r1 = build()
        t2, x2, r2 = build()
        assert np.array_equal(t1.value(r1), t2.value(r2))
        g1 = t1.backward(r1)[x1]
        g2 = t2.backward(r2)[x2]
        g1_again = t1.backward(r1)[x1]
        assert np.array_equal(g1, g2)
        assert np.array_equal(g1, g1_again)


def _rand_shape(rng):
    rank = int(rng.integers(1, 3))
    return tuple(int(rng.integers(1, 5)) for _ in range(rank))


def _away_from_kinks(rng, shape):
    x = rng.normal(size=shape)
    return np.where(np.abs(x) < 0.1, x + 0.3 * np.sign(x) + 0.05, x)


def _weighted_sum(t, node, rng):
    w = t.leaf(rng.normal(size=t.value(node).shape))
    return t.apply("sum_all", t.apply("elemwise_mul", node, w))


UNARY = ["relu", "leaky_relu", "tanh", "sigmoid", "abs"]


class TestGradCheck:
    def test_sum_of_squares(self):
        rep = grad_check(lambda t, x: t.apply("sum_all", t.apply("elemwise_mul", x, x)),
                         np.array([1.0, 2.0, 3.0]), eps=1e-5, tol=1e-4)
        assert rep.passed and rep.max_rel_err < 1e-6

    def test_constant_function(self):
        rep = grad_check(lambda t, x: t.apply("sum_all", t.apply("scalar_mul", x, scalar=0.0)),
                         np.array([0.3, -0.7]))
        assert rep.passed

    def test_wrong_adjoint_detected(self, monkeypatch):
        # deliberately corrupt the relu rule; the checker must localize it
        monkeypatch.setitem(ad._VJP, "relu",
                            lambda g, vals, out, attrs: (g * (vals[0] > 0) * 2.0,))
        point = np.array([0.5, -1.0, 2.0])
        rep = grad_check(lambda t, x: t.apply("sum_all", t.apply("relu", x)), point)
        assert not rep.passed
        assert point[rep.worst_index] > 0  # a positive coordinate is the bad one

    @pytest.mark.parametrize("op", UNARY)
    def test_unary_randomized(self, op, rng):
        for _ in range(25):
            shape = _rand_shape(rng)
            point = _away_from_kinks(rng, shape) if op in ("relu", "leaky_relu", "abs") \
                else rng.normal(size=shape)

            def f(t, x):
                node = t.apply(op, x, alpha=0.2) if op == "leaky_relu" else t.apply(op, x)
                return _weighted_sum(t, node, np.random.default_rng(0))

            rep = grad_check(f, point, eps=1e-5, tol=1e-4)
            assert rep.passed, f"{op}: rel err {rep.max_rel_err}"

    def test_binary_and_structural_randomized(self, rng):
        for _ in range(25):
            n, m, k = (int(rng.integers(1, 4)) for _ in range(3))
            a = rng.normal(size=(n, m))
            b = rng.normal(size=(m, k))
            c = rng.normal(size=(n, m))

            cases = {
                "matmul": lambda t, x: t.apply("matmul", x, t.leaf(b)),
                "add": lambda t, x: t.apply("add", x, t.leaf(c)),
                "sub": lambda t, x: t.apply("sub", t.leaf(c), x),
                "elemwise_mul": lambda t, x: t.apply("elemwise_mul", x, t.leaf(c)),
                "scalar_mul": lambda t, x: t.apply("scalar_mul", x, scalar=1.7),
                "concat_last_axis": lambda t, x: t.apply("concat_last_axis", x, t.leaf(c)),
                "slice_last_axis": lambda t, x: t.apply("slice_last_axis", x, start=0, stop=max(1, m - 1)),
                "reshape": lambda t, x: t.apply("reshape", x, shape=(m, n)),
                "mean_all": lambda t, x: t.apply("mean_all", x),
                "sum_all": lambda t, x: t.apply("sum_all", x),
            }
            for op, build in cases.items():
                def f(t, x, build=build):
                    node = build(t, x)
                    if t.value(node).shape in ((), (1,)):
                        return node
                    return _weighted_sum(t, node, np.random.default_rng(1))

                rep = grad_check(f, a, eps=1e-5, tol=1e-4)
                assert rep.passed, f"{op}: rel err {rep.max_rel_err}"
