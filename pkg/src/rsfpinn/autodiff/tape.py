"""Reverse-mode tape over numpy arrays.

A :class:`Var` wraps an array value (0-d for scalars) together with the
parents it was computed from and a closure mapping the upstream gradient
to gradients for each parent.  :func:`backward` walks the graph in reverse
creation order, so every call is deterministic.
"""
from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

_counter = itertools.count()


class DomainError(ValueError):
    """Raised when a primitive is evaluated outside its domain."""

    def __init__(self, primitive: str, detail: str = ""):
        self.primitive = primitive
        msg = f"{primitive}: argument outside domain"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class Var:
    __slots__ = ("value", "parents", "backward_fn", "uid", "grad")

    __array_ufunc__ = None  # defer ndarray <op> Var to the reflected method

    def __init__(self, value, parents: Sequence["Var"] = (), backward_fn: Callable | None = None):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = tuple(parents)
        self.backward_fn = backward_fn
        self.uid = next(_counter)
        self.grad = None

    @property
    def shape(self):
        return self.value.shape

    def __len__(self):
        return len(self.value)

    def __repr__(self):
        return f"Var({self.value!r})"

    def item(self) -> float:
        return float(self.value)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        if getattr(other, 'is_jet', False):
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if getattr(other, 'is_jet', False):
            return NotImplemented
        return add(self, neg(other) if isinstance(other, Var) else -np.asarray(other))

    def __rsub__(self, other):
        if getattr(other, 'is_jet', False):
            return NotImplemented
        return add(neg(self), other)

    def __mul__(self, other):
        if getattr(other, 'is_jet', False):
            return NotImplemented
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if getattr(other, 'is_jet', False):
            return NotImplemented
        return div(self, other)

    def __rtruediv__(self, other):
        if getattr(other, 'is_jet', False):
            return NotImplemented
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        return power(self, p)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return reshape(self, shape)

    def sum(self, axis=None):
        return vsum(self, axis)

    def mean(self):
        return vmean(self)


def leaf(value) -> Var:
    return Var(value)


def value_of(x):
    return x.value if isinstance(x, Var) else np.asarray(x, dtype=np.float64)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _lift(x) -> Var | None:
    return x if isinstance(x, Var) else None


# primitives -----------------------------------------------------------

def add(a, b) -> Var:
    av, bv = value_of(a), value_of(b)
    va, vb = _lift(a), _lift(b)
    parents = [p for p in (va, vb) if p is not None]

    def bw(g):
        res = []
        if va is not None:
            res.append(_unbroadcast(g, av.shape))
        if vb is not None:
            res.append(_unbroadcast(g, bv.shape))
        return res

    return Var(av + bv, parents, bw)


def neg(a) -> Var:
    return Var(-a.value, (a,), lambda g: [-g])


def mul(a, b) -> Var:
    av, bv = value_of(a), value_of(b)
    va, vb = _lift(a), _lift(b)
    parents = [p for p in (va, vb) if p is not None]

    def bw(g):
        res = []
        if va is not None:
            res.append(_unbroadcast(g * bv, av.shape))
        if vb is not None:
            res.append(_unbroadcast(g * av, bv.shape))
        return res

    return Var(av * bv, parents, bw)


def div(a, b) -> Var:
    av, bv = value_of(a), value_of(b)
    if np.any(bv == 0.0):
        raise DomainError("div", "division by zero")
    va, vb = _lift(a), _lift(b)
    parents = [p for p in (va, vb) if p is not None]
    q = av / bv

    def bw(g):
        res = []
        if va is not None:
            res.append(_unbroadcast(g / bv, av.shape))
        if vb is not None:
            res.append(_unbroadcast(-g * q / bv, bv.shape))
        return res

    return Var(q, parents, bw)


def power(a: Var, p: float) -> Var:
    p = float(p)
    av = a.value
    if p < 0 and np.any(av == 0.0):
        raise DomainError("pow", "zero to a negative power")
    if p != int(p) and np.any(av < 0.0):
        raise DomainError("pow", "negative base with fractional exponent")
    out = av ** p
    return Var(out, (a,), lambda g: [g * p * av ** (p - 1.0)])


def exp(a: Var) -> Var:
    arg = a.value
    if np.any(arg > 700.0):
        raise DomainError("exp", "argument > 700 overflows")
    e = np.exp(arg)
    return Var(e, (a,), lambda g: [g * e])


def log(a: Var) -> Var:
    av = a.value
    if np.any(av <= 0.0):
        raise DomainError("log", "non-positive argument")
    return Var(np.log(av), (a,), lambda g: [g / av])


def tanh(a: Var) -> Var:
    t = np.tanh(a.value)
    return Var(t, (a,), lambda g: [g * (1.0 - t * t)])


def sigmoid(a: Var) -> Var:
    s = _sigmoid(a.value)
    return Var(s, (a,), lambda g: [g * s * (1.0 - s)])


def absolute(a: Var) -> Var:
    sg = np.sign(a.value)
    return Var(np.abs(a.value), (a,), lambda g: [g * sg])


def sign(a) -> np.ndarray:
    # piecewise constant; carries no gradient
    return np.sign(value_of(a))


def heaviside(a) -> np.ndarray:
    return (value_of(a) > 0.0).astype(np.float64)


def relu(a: Var) -> Var:
    mask = heaviside(a)
    return Var(a.value * mask, (a,), lambda g: [g * mask])


def getitem(a: Var, idx) -> Var:
    shape = a.value.shape

    def bw(g):
        full = np.zeros(shape)
        np.add.at(full, idx, g)
        return [full]

    return Var(a.value[idx], (a,), bw)


def reshape(a: Var, shape) -> Var:
    old = a.value.shape
    return Var(a.value.reshape(shape), (a,), lambda g: [g.reshape(old)])


def vsum(a: Var, axis=None) -> Var:
    shape = a.value.shape

    def bw(g):
        if axis is None:
            return [np.broadcast_to(g, shape).copy()]
        return [np.broadcast_to(np.expand_dims(g, axis), shape).copy()]

    return Var(a.value.sum(axis=axis), (a,), bw)


def vmean(a: Var) -> Var:
    n = a.value.size
    shape = a.value.shape
    return Var(a.value.mean(), (a,), lambda g: [np.full(shape, g / n)])


def linear(x, w: Var, b: Var | None = None) -> Var:
    """``x @ w.T (+ b)`` over the trailing axis of ``x``."""
    xv = value_of(x)
    vx = _lift(x)
    out = xv @ w.value.T
    if b is not None:
        out = out + b.value
    parents = [p for p in (vx, w, b) if p is not None]
    k = w.value.shape[0]

    def bw(g):
        res = []
        if vx is not None:
            res.append(g @ w.value)
        g2 = g.reshape(-1, k)
        res.append(g2.T @ xv.reshape(-1, xv.shape[-1]))
        if b is not None:
            res.append(g2.sum(axis=0))
        return res

    return Var(out, parents, bw)


def add_to_slice0(x: Var, b: Var) -> Var:
    """Add ``b`` to ``x[0]`` only; used for the bias of a packed jet."""
    out = x.value.copy()
    out[0] += b.value
    bshape = b.value.shape

    def bw(g):
        return [g, _unbroadcast(g[0], bshape)]

    return Var(out, (x, b), bw)


def custom(value, parents: Sequence[Var], backward_fn: Callable) -> Var:
    """Record a fused operation with a hand-written backward."""
    return Var(value, parents, backward_fn)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x)))


def backward(root: Var, seed=None) -> None:
    """Accumulate d(root)/d(node) into ``node.grad`` for every ancestor."""
    order: list[Var] = []
    seen: set[int] = set()
    stack = [root]
    while stack:
        v = stack.pop()
        if v.uid in seen:
            continue
        seen.add(v.uid)
        order.append(v)
        stack.extend(v.parents)
    order.sort(key=lambda v: v.uid, reverse=True)
    for v in order:
        v.grad = None
    root.grad = np.ones_like(root.value) if seed is None else np.asarray(seed, dtype=np.float64)
    for v in order:
        if v.grad is None or v.backward_fn is None:
            continue
        for p, gp in zip(v.parents, v.backward_fn(v.grad)):
            if gp is None:
                continue
            p.grad = gp if p.grad is None else p.grad + gp
