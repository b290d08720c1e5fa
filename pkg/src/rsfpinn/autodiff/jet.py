"""Second-order truncated Taylor jets along independent input directions.

A :class:`Jet` carries a value, its first derivatives along ``K`` input
directions and the matching pure second derivatives.  Components may be
floats, numpy arrays or tape :class:`~rsfpinn.autodiff.tape.Var` objects;
in the last case parameter gradients flow through the input derivatives
(forward-over-reverse).  Mixed partials are not tracked.
"""
from __future__ import annotations

import numpy as np

from . import tape
from .tape import DomainError, Var


def _is_zero(x) -> bool:
    return isinstance(x, (int, float)) and x == 0


def _mul(a, b):
    if _is_zero(a) or _is_zero(b):
        return 0.0
    return a * b


def _add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return a + b


class Jet:
    __slots__ = ("val", "d", "dd")

    __array_ufunc__ = None  # defer ndarray <op> Jet to the reflected method
    is_jet = True

    def __init__(self, val, d, dd):
        self.val = val
        self.d = tuple(d)
        self.dd = tuple(dd)
        if len(self.d) != len(self.dd):
            raise ValueError("first and second derivative lists differ in length")

    @property
    def order(self) -> int:
        return len(self.d)

    @classmethod
    def seed(cls, value, k: int, n: int) -> "Jet":
        """Independent variable number ``k`` of ``n`` directions."""
        d = [0.0] * n
        d[k] = 1.0 if np.ndim(value) == 0 else np.ones_like(value, dtype=np.float64)
        return cls(value, d, [0.0] * n)

    @classmethod
    def const(cls, value, n: int) -> "Jet":
        return cls(value, [0.0] * n, [0.0] * n)

    def __repr__(self):
        return f"Jet(val={self.val!r}, d={self.d!r}, dd={self.dd!r})"

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError("jets carry different numbers of directions")
            return other
        return Jet.const(other, self.order)

    def __add__(self, other):
        o = self._coerce(other)
        return Jet(_add(self.val, o.val),
                   [_add(a, b) for a, b in zip(self.d, o.d)],
                   [_add(a, b) for a, b in zip(self.dd, o.dd)])

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, [0.0 if _is_zero(a) else -a for a in self.d],
                   [0.0 if _is_zero(a) else -a for a in self.dd])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.val * other, [_mul(a, other) for a in self.d],
                       [_mul(a, other) for a in self.dd])
        o = self._coerce(other)
        a, b = self.val, o.val
        d = [_add(_mul(a, db), _mul(b, da)) for da, db in zip(self.d, o.d)]
        dd = [_add(_add(_mul(a, ddb), _mul(b, dda)), _mul(2.0, _mul(da, db)))
              for da, db, dda, ddb in zip(self.d, o.d, self.dd, o.dd)]
        return Jet(a * b, d, dd)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        if np.any(tape.value_of(other) == 0.0):
            raise DomainError("div", "division by zero")
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        return power(self, p)

    def __getitem__(self, idx):
        return Jet(self.val[idx], [a if _is_zero(a) else a[idx] for a in self.d],
                   [a if _is_zero(a) else a[idx] for a in self.dd])


def _chain(x: Jet, f0, f1, f2) -> Jet:
    """Apply a scalar function given its value and first two derivatives at ``x.val``."""
    d = [_mul(f1, a) for a in x.d]
    dd = [_add(_mul(f1, b), _mul(f2, _mul(a, a))) for a, b in zip(x.d, x.dd)]
    return Jet(f0, d, dd)


def _np(x):
    return np.asarray(x, dtype=np.float64)


# dispatching elementary functions -------------------------------------

def tanh(x):
    if isinstance(x, Jet):
        t = tanh(x.val)
        s = 1.0 - t * t
        return _chain(x, t, s, -2.0 * t * s)
    if isinstance(x, Var):
        return tape.tanh(x)
    return np.tanh(_np(x))


def exp(x):
    if isinstance(x, Jet):
        e = exp(x.val)
        return _chain(x, e, e, e)
    if isinstance(x, Var):
        return tape.exp(x)
    a = _np(x)
    if np.any(a > 700.0):
        raise DomainError("exp", "argument > 700 overflows")
    return np.exp(a)


def log(x):
    if isinstance(x, Jet):
        r = reciprocal(x.val)
        return _chain(x, log(x.val), r, -(r * r))
    if isinstance(x, Var):
        return tape.log(x)
    a = _np(x)
    if np.any(a <= 0.0):
        raise DomainError("log", "non-positive argument")
    return np.log(a)


def reciprocal(x):
    if isinstance(x, Jet):
        r = reciprocal(x.val)
        r2 = r * r
        return _chain(x, r, -r2, 2.0 * r2 * r)
    if isinstance(x, Var):
        return tape.div(1.0, x)
    a = _np(x)
    if np.any(a == 0.0):
        raise DomainError("div", "division by zero")
    return 1.0 / a


def power(x, p):
    p = float(p)
    if isinstance(x, Jet):
        if p == 0.0:
            return Jet.const(1.0, x.order)
        if p == 1.0:
            f1, f2 = 1.0, 0.0
        elif p == 2.0:
            f1, f2 = 2.0 * x.val, 2.0
        else:
            f1 = p * power(x.val, p - 1.0)
            f2 = p * (p - 1.0) * power(x.val, p - 2.0)
        return _chain(x, power(x.val, p), f1, f2)
    if isinstance(x, Var):
        return tape.power(x, p)
    a = _np(x)
    if p < 0 and np.any(a == 0.0):
        raise DomainError("pow", "zero to a negative power")
    if p != int(p) and np.any(a < 0.0):
        raise DomainError("pow", "negative base with fractional exponent")
    return a ** p


def absolute(x):
    """|x| with derivative sign(x); the derivative at 0 is 0."""
    if isinstance(x, Jet):
        return _chain(x, absolute(x.val), tape.sign(x.val), 0.0)
    if isinstance(x, Var):
        return tape.absolute(x)
    return np.abs(_np(x))


def relu(x):
    """max(0, x); first derivative at 0 is 0, second derivative 0 everywhere."""
    if isinstance(x, Jet):
        return _chain(x, relu(x.val), tape.heaviside(x.val), 0.0)
    if isinstance(x, Var):
        return tape.relu(x)
    a = _np(x)
    return a * (a > 0.0)


def sigmoid(x):
    if isinstance(x, Jet):
        s = sigmoid(x.val)
        q = s * (1.0 - s)
        return _chain(x, s, q, q * (1.0 - 2.0 * s))
    if isinstance(x, Var):
        return tape.sigmoid(x)
    return tape._sigmoid(_np(x))


def silu(x):
    """x * sigmoid(x)."""
    if isinstance(x, Jet):
        v = x.val
        s = sigmoid(v)
        q = s * (1.0 - s)
        f1 = s * (1.0 + v * (1.0 - s))
        f2 = q * (2.0 + v * (1.0 - 2.0 * s))
        return _chain(x, v * s, f1, f2)
    return x * sigmoid(x)


def sqrt(x):
    return power(x, 0.5)


def mean(x):
    if isinstance(x, Var):
        return x.mean()
    return float(np.mean(x))


def value(x):
    """Strip all derivative information and return plain floats/arrays."""
    if isinstance(x, Jet):
        x = x.val
    return tape.value_of(x)
