import numpy as np
import pytest

from lowthrust import generic as g


def scalar_field(x, y, z):
    return g.sin(x * y) + g.sqrt(x * x + z * z) / (1.0 + y * y) \
        + g.arctan(z) * g.cos(x) + g.arcsin(0.3 * y)


def complex_step_grad(fun, vals, h=1e-200):
    out = []
    for i in range(len(vals)):
        pert = [complex(v) for v in vals]
        pert[i] += 1j * h
        arrs = [np.full((1, 1), v) for v in pert]
        out.append(np.imag(g.value(fun(*arrs)))[0, 0] / h)
    return np.asarray(out)


class TestFirstOrder:
    def test_gradient_matches_complex_step(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            vals = rng.uniform(0.3, 1.8, size=3)
            seeded = g.seed([np.full((1, 1), v) for v in vals])
            res = scalar_field(*seeded)
            ref = complex_step_grad(scalar_field, vals)
            assert np.allclose(g.grad(res).reshape(3), ref,
                               rtol=1e-13, atol=1e-13)

    def test_vectorized_nodes(self):
        xs = np.linspace(0.4, 1.2, 7)[:, None]
        x, y = g.seed([np.full((1, 1), 0.9), np.full((1, 1), 0.5)])
        res = g.node_sum((x * xs) * g.sin(y + xs))
        val = g.value(res)[0, 0]
        assert val == pytest.approx(float(np.sum(0.9 * xs * np.sin(0.5 + xs))))
        dx = g.grad(res).reshape(2)[0]
        assert dx == pytest.approx(float(np.sum(xs * np.sin(0.5 + xs))),
                                   rel=1e-14)

    def test_division_and_powers(self):
        (x,) = g.seed([np.full((1, 1), 1.7)])
        res = (x ** 3) / (2.0 - x) - 1.0 / x
        dval = g.grad(res)[0, 0, 0]
        xv = 1.7
        ref = (3 * xv**2 * (2 - xv) + xv**3) / (2 - xv) ** 2 + 1 / xv**2
        assert dval == pytest.approx(ref, rel=1e-14)

    def test_arctan2(self):
        x, y = g.seed([np.full((1, 1), 0.8), np.full((1, 1), -0.4)])
        res = g.arctan2(y, x)
        ref = complex_step_grad(lambda a, b: g.arctan(b / a), [0.8, -0.4])
        assert np.allclose(g.grad(res).reshape(2), ref, rtol=1e-12)


class TestSecondOrder:
    def test_nested_hessian_symmetric_and_correct(self):
        vals = [0.7, 1.1, 0.4]
        outer = g.seed([np.full((1, 1), v) for v in vals])
        inner = g.seed(outer)
        res = scalar_field(*inner)
        hess = np.asarray(g.value(res.grad.grad)).reshape(3, 3)
        assert np.allclose(hess, hess.T, atol=1e-12)
        # reference Hessian column via complex step over dual gradient
        h = 1e-200
        for j in range(3):
            pert = [complex(v) for v in vals]
            pert[j] += 1j * h
            seeded = g.seed([np.full((1, 1), v) for v in pert])
            col = np.imag(np.asarray(g.value(
                scalar_field(*seeded).grad))).reshape(3) / h
            assert np.allclose(hess[:, j], col, rtol=1e-10, atol=1e-12)


class TestStructure:
    def test_where_selects_branches(self):
        (x,) = g.seed([np.full((1, 1), 2.0)])
        nodes = np.array([[-1.0], [0.5], [2.0]])
        cond = nodes[:, 0:1] > 0
        res = g.where(cond, x * nodes, 0.0 * x)
        assert np.allclose(g.value(res).ravel(), [0.0, 1.0, 4.0])
        assert np.allclose(g.grad(res)[0].ravel(), [0.0, 0.5, 2.0])

    def test_concat_and_take_node(self):
        (x,) = g.seed([np.full((1, 1), 3.0)])
        a = x * np.array([[1.0], [2.0]])
        b = x * np.array([[5.0]])
        cat = g.concat_nodes([a, b])
        assert g.value(cat).shape == (3, 1)
        assert np.allclose(g.value(cat).ravel(), [3.0, 6.0, 15.0])
        assert np.allclose(g.grad(cat)[0].ravel(), [1.0, 2.0, 5.0])
        picked = g.take_node(cat, 2)
        assert g.value(picked)[0, 0] == 15.0

    def test_complex_values_flow_through(self):
        vals = [0.9 + 1e-150j, 1.3 + 0j]
        x, y = g.seed([np.full((1, 1), v, dtype=complex) for v in vals])
        res = g.sqrt(x * y) * g.cos(x)
        assert np.iscomplexobj(g.value(res))

    def test_depth(self):
        (x,) = g.seed([np.full((1, 1), 1.0)])
        assert g.depth(x) == 1
        (xx,) = g.seed([x])
        assert g.depth(xx) == 2
        assert g.depth(3.0) == 0

    def test_sum_requires_negative_axis(self):
        (x,) = g.seed([np.full((2, 1), 1.0)])
        with pytest.raises(ValueError):
            x.sum(axis=0)
