"""Forward-over-reverse differentiation for PINN residuals.

Input derivatives (up to pure second order) are carried by :class:`Jet`;
gradients with respect to parameters come from the reverse-mode tape in
:mod:`.tape`.  Jets whose components are tape variables give both at once.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import kernels, tape
from .jet import (
    Jet,
    absolute,
    exp,
    log,
    mean,
    power,
    reciprocal,
    relu,
    sigmoid,
    silu,
    sqrt,
    tanh,
    value,
)
from .tape import DomainError, Var

__all__ = [
    "DomainError",
    "Jet",
    "Var",
    "absolute",
    "eval_with_input_derivs",
    "exp",
    "grad_params",
    "kernels",
    "log",
    "mean",
    "power",
    "reciprocal",
    "relu",
    "sigmoid",
    "silu",
    "sqrt",
    "tanh",
    "tape",
    "value",
]


def eval_with_input_derivs(f: Callable, x: Sequence[float]):
    """Evaluate ``f(*inputs)`` and its first and pure second input derivatives.

    Returns ``(value, first, second)`` where ``first[i]`` is df/dx_i and
    ``second[i]`` is d²f/dx_i².
    """
    x = [float(v) for v in x]
    n = len(x)
    out = f(*[Jet.seed(v, i, n) for i, v in enumerate(x)])
    if not isinstance(out, Jet):
        return float(value(out)), np.zeros(n), np.zeros(n)
    first = np.array([float(value(d)) for d in out.d])
    second = np.array([float(value(d)) for d in out.dd])
    return float(value(out.val)), first, second


def grad_params(loss: Callable[[Var], Var], theta) -> tuple[float, np.ndarray]:
    """Return ``(loss(theta), d loss / d theta)`` for a flat parameter vector."""
    theta = np.asarray(theta, dtype=np.float64)
    leaf = Var(theta.copy())
    out = loss(leaf)
    if not isinstance(out, Var):
        return float(np.asarray(out)), np.zeros_like(theta)
    if out.value.ndim != 0:
        raise ValueError("loss must be a scalar")
    tape.backward(out)
    g = leaf.grad if leaf.grad is not None else np.zeros_like(theta)
    return float(out.value), np.array(g, dtype=np.float64)
