"""Shared oracles: finite differences and a plain matrix-multiply MLP."""
import numpy as np


def central_diff(f, x, h=1e-5):
    """Central-difference gradient of scalar ``f`` at flat ``x``."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_first_second(f, x, h=1e-4):
    """Central first and second differences of scalar ``f`` along each coordinate."""
    x = np.asarray(x, dtype=np.float64)
    f0 = f(x)
    first, second = [], []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fp, fm = f(x + e), f(x - e)
        first.append((fp - fm) / (2 * h))
        second.append((fp - 2 * f0 + fm) / (h * h))
    return np.array(first), np.array(second)


def rel_err(a, b):
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


_ACT = {
    "tanh": np.tanh,
    "relu": lambda v: np.maximum(v, 0.0),
    "silu": lambda v: v / (1.0 + np.exp(-v)),
}


def reference_mlp(layer_dims, activations, theta, x):
    """Independent forward pass: loop over layers, explicit reshapes."""
    h = np.atleast_2d(np.asarray(x, dtype=np.float64))
    pos = 0
    n_layers = len(layer_dims) - 1
    for k in range(n_layers):
        n, m = layer_dims[k], layer_dims[k + 1]
        W = np.asarray(theta[pos:pos + m * n]).reshape(m, n)
        pos += m * n
        b = np.asarray(theta[pos:pos + m])
        pos += m
        h = np.einsum("ij,bj->bi", W, h) + b
        if k < n_layers - 1:
            h = _ACT[activations[k]](h)
    return h


def fd5_first_second(f, x, h=1e-3):
    """Five-point central first and second differences along each coordinate."""
    x = np.asarray(x, dtype=np.float64)
    f0 = f(x)
    first, second = [], []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        p1, m1, p2, m2 = f(x + e), f(x - e), f(x + 2 * e), f(x - 2 * e)
        first.append((-p2 + 8 * p1 - 8 * m1 + m2) / (12 * h))
        second.append((-p2 + 16 * p1 - 30 * f0 + 16 * m1 - m2) / (12 * h * h))
    return np.array(first), np.array(second)


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}
