"""Dtype-generic arithmetic and forward-mode dual numbers.

Every dynamics function in this package is written against the helpers
in this module instead of bare numpy calls.  That single code path then
evaluates in three numeric modes:

* plain float arrays (production propagation),
* complex arrays (complex-step derivative oracles), and
* `Dual` values (exact forward-mode derivatives; nesting two levels
  gives exact second derivatives for the variational equations).

`Dual` stores a value and a gradient whose leading axis enumerates the
seed directions.  Values and gradients may themselves be duals, which is
what makes nesting work.  Branch decisions (root bracketing, arc flags)
must be made on `value()` of a quantity, never on the ambient object.

Shape convention inside dual-mode dynamics code: every value is a 2-D
array shaped (nodes, batch) -- length-1 axes for scalars -- and a
gradient prepends one axis per seed layer.  Keeping the value rank fixed
makes numpy's trailing-axis broadcasting correct at every nesting level;
reductions over quadrature nodes therefore use axis=-2 with keepdims.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "Dual", "value", "grad", "seed", "node_sum", "concat_nodes", "where",
    "sin", "cos", "tan", "sqrt", "arcsin", "arccos", "arctan", "arctan2",
    "dot3", "norm3",
]


class Dual:
    """First-order jet: value plus gradient along seed directions."""

    __slots__ = ("val", "grad")
    __array_ufunc__ = None  # force numpy to defer to our operators

    def __init__(self, val, grad):
        self.val = val
        self.grad = grad

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.grad + other.grad)
        return Dual(self.val + other, self.grad)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.grad - other.grad)
        return Dual(self.val - other, self.grad)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.grad)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val,
                        self.grad * other.val + other.grad * self.val)
        return Dual(self.val * other, self.grad * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            v = self.val * inv
            return Dual(v, (self.grad - other.grad * v) * inv)
        inv = 1.0 / other
        return Dual(self.val * inv, self.grad * inv)

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        v = other * inv
        return Dual(v, -self.grad * v * inv)

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("Dual.__pow__ supports integer exponents only")
        if n == 2:
            return Dual(self.val * self.val, 2.0 * self.val * self.grad)
        vp = self.val ** (n - 1)
        return Dual(vp * self.val, float(n) * vp * self.grad)

    # -- structure -----------------------------------------------------
    def __getitem__(self, key):
        gkey = (slice(None),) + (key if isinstance(key, tuple) else (key,))
        return Dual(self.val[key], self.grad[gkey])

    def sum(self, axis=-2, keepdims=True):
        if axis >= 0:
            raise ValueError("Dual.sum requires a negative (right-aligned) axis")
        return Dual(_sum(self.val, axis, keepdims),
                    _sum(self.grad, axis, keepdims))

    def __repr__(self):
        return f"Dual(val={self.val!r})"


def _sum(x, axis, keepdims):
    if isinstance(x, Dual):
        return x.sum(axis, keepdims)
    return np.sum(x, axis=axis, keepdims=keepdims)


def node_sum(x, axis=-2):
    """Reduce over the quadrature-node axis, preserving value rank."""
    return _sum(x, axis, True)


def take_node(x, i):
    """Select one entry of the (..., nodes, batch) node axis, keeping rank.

    Recurses through dual layers so the same right-aligned axis is
    sliced at every nesting level.
    """
    if isinstance(x, Dual):
        return Dual(take_node(x.val, i), take_node(x.grad, i))
    a = np.asarray(x)
    if a.ndim < 2 or a.shape[-2] == 1:
        return a
    return a[..., i:i + 1, :]


def value(x):
    """Strip all dual layers, returning the underlying ndarray/scalar."""
    while isinstance(x, Dual):
        x = x.val
    return x


def grad(x):
    """First-order gradient of a dual result as a plain array."""
    if not isinstance(x, Dual):
        raise TypeError("grad() expects a Dual")
    return value(x.grad)


def depth(x) -> int:
    """Number of dual layers wrapped around a value."""
    d = 0
    while isinstance(x, Dual):
        x = x.val
        d += 1
    return d


def seed(values, n_dirs=None, offset=0):
    """Lift scalars into duals with unit seed directions.

    Args:
        values: sequence of ambient scalars (floats, complex, or duals;
            may carry a trailing (nodes, batch) shape).
        n_dirs: gradient dimension; defaults to len(values).
        offset: index of the first seed direction.

    Returns:
        List of Dual scalars, the i-th seeded along direction offset+i.
        Seed vectors are padded one axis per dual layer already inside
        the values, so nested gradients broadcast into distinct axes.
    """
    n = len(values) if n_dirs is None else n_dirs
    eye = np.eye(n)
    out = []
    for i, v in enumerate(values):
        pad = depth(v) + np.ndim(value(v))
        gv = eye[offset + i].reshape((n,) + (1,) * pad)
        out.append(Dual(v, gv))
    return out


def concat_nodes(parts):
    """Concatenate uniform ambient (..., nodes, batch) arrays along nodes."""
    if isinstance(parts[0], Dual):
        if not all(isinstance(p, Dual) for p in parts):
            raise TypeError("concat_nodes() requires uniform part types")
        return Dual(concat_nodes([p.val for p in parts]),
                    concat_nodes([p.grad for p in parts]))
    nd = max(2, max(np.ndim(p) for p in parts))
    padded = []
    for p in parts:
        a = np.asarray(p)
        padded.append(a.reshape((1,) * (nd - a.ndim) + a.shape))
    common = np.broadcast_shapes(
        *[p.shape[:-2] + (1,) + p.shape[-1:] for p in padded])
    arrs = [np.broadcast_to(p, common[:-2] + (p.shape[-2],) + common[-1:])
            for p in padded]
    return np.concatenate(arrs, axis=-2)


def where(cond, a, b):
    """Branchless select on a float/bool condition array."""
    if isinstance(a, Dual) or isinstance(b, Dual):
        if not isinstance(a, Dual):
            a = Dual(a, b.grad * 0.0)
        if not isinstance(b, Dual):
            b = Dual(b, a.grad * 0.0)
        return Dual(where(cond, a.val, b.val), where(cond, a.grad, b.grad))
    return np.where(cond, a, b)


# -- elementary functions ----------------------------------------------

def sin(x):
    if isinstance(x, Dual):
        return Dual(sin(x.val), cos(x.val) * x.grad)
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(cos(x.val), -sin(x.val) * x.grad)
    return np.cos(x)


def tan(x):
    return sin(x) / cos(x)


def sqrt(x):
    if isinstance(x, Dual):
        v = sqrt(x.val)
        return Dual(v, x.grad / (2.0 * v))
    return np.sqrt(x)


def arcsin(x):
    if isinstance(x, Dual):
        return Dual(arcsin(x.val), x.grad / sqrt(1.0 - x.val * x.val))
    return np.arcsin(x)


def arccos(x):
    if isinstance(x, Dual):
        return Dual(arccos(x.val), -x.grad / sqrt(1.0 - x.val * x.val))
    return np.arccos(x)


def arctan(x):
    if isinstance(x, Dual):
        return Dual(arctan(x.val), x.grad / (1.0 + x.val * x.val))
    return np.arctan(x)


def arctan2(y, x):
    if isinstance(y, Dual) or isinstance(x, Dual):
        if not isinstance(y, Dual):
            y = Dual(y, x.grad * 0.0)
        if not isinstance(x, Dual):
            x = Dual(x, y.grad * 0.0)
        r2 = x.val * x.val + y.val * y.val
        return Dual(arctan2(y.val, x.val),
                    (x.val * y.grad - y.val * x.grad) / r2)
    return np.arctan2(y, x)


# -- small 3-vector helpers (vectors are (x, y, z) component tuples) ----

def dot3(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def norm3(a):
    return sqrt(dot3(a, a))
