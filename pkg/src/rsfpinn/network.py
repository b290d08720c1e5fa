"""Dense feed-forward networks, Xavier initialisation and trial functions.

Parameters live in one flat vector ordered layer by layer as
``W_0 (row-major), b_0, W_1, b_1, ..., W_L, b_L``.  The same ordering is
used for gradients and checkpoints.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .autodiff import Jet, Var, kernels, tape
from .autodiff import jet as J

ACTIVATIONS = ("tanh", "relu", "silu")

_PACKED = {
    "tanh": (kernels.tanh_jet_forward, kernels.tanh_jet_backward),
    "relu": (kernels.relu_jet_forward, kernels.relu_jet_backward),
    "silu": (kernels.silu_jet_forward, kernels.silu_jet_backward),
}

_SCALAR = {"tanh": J.tanh, "relu": J.relu, "silu": J.silu}


def activation(name: str, x):
    """Apply a named activation to a float, array, Var or Jet."""
    try:
        return _SCALAR[name](x)
    except KeyError:
        raise ValueError(f"unknown activation {name!r}") from None


@dataclass
class MLP:
    layer_dims: list[int]
    activations: list[str]
    params: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.layer_dims = [int(n) for n in self.layer_dims]
        self.activations = list(self.activations)
        _check_dims(self.layer_dims, self.activations)
        self.params = np.asarray(self.params, dtype=np.float64)
        if self.params.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {self.params.shape}")

    @property
    def n_in(self) -> int:
        return self.layer_dims[0]

    @property
    def n_out(self) -> int:
        return self.layer_dims[-1]

    @property
    def n_params(self) -> int:
        return param_count(self.layer_dims)

    def shapes(self):
        return [(m, n) for n, m in zip(self.layer_dims[:-1], self.layer_dims[1:])]

    def unflatten(self, theta=None):
        """Split a flat parameter vector (array or Var) into ``[(W, b), ...]``."""
        theta = self.params if theta is None else theta
        out = []
        pos = 0
        for m, n in self.shapes():
            w = theta[pos:pos + m * n].reshape(m, n)
            pos += m * n
            b = theta[pos:pos + m]
            pos += m
            out.append((w, b))
        return out

    def copy(self) -> "MLP":
        return MLP(list(self.layer_dims), list(self.activations), self.params.copy())

    def __call__(self, x, theta=None):
        """Plain numpy forward pass for inputs of shape ``(B, n_in)``."""
        return forward_array(self, x, theta)


def _check_dims(layer_dims, activations):
    if len(layer_dims) < 2:
        raise ValueError("need at least input and output dimensions")
    if any(int(n) <= 0 for n in layer_dims):
        raise ValueError(f"layer dimensions must be positive: {layer_dims}")
    if len(activations) != len(layer_dims) - 2:
        raise ValueError("one activation tag per hidden layer required")
    for a in activations:
        if a not in ACTIVATIONS:
            raise ValueError(f"unknown activation {a!r}")


def param_count(layer_dims: Sequence[int]) -> int:
    return sum(m * n + m for n, m in zip(layer_dims[:-1], layer_dims[1:]))


def xavier_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_xavier(layer_dims: Sequence[int], activations: Sequence[str], seed: int) -> MLP:
    """Uniform Xavier weights, zero biases, reproducible from ``seed``."""
    layer_dims = [int(n) for n in layer_dims]
    _check_dims(layer_dims, activations)
    rng = np.random.default_rng(seed)
    chunks = []
    for n, m in zip(layer_dims[:-1], layer_dims[1:]):
        bound = xavier_bound(n, m)
        chunks.append(rng.uniform(-bound, bound, size=m * n))
        chunks.append(np.zeros(m))
    return MLP(layer_dims, list(activations), np.concatenate(chunks))


# forward passes ---------------------------------------------------------

def forward_array(net: MLP, x, theta=None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != net.n_in:
        raise ValueError(f"input has {x.shape[-1]} features, network expects {net.n_in}")
    layers = net.unflatten(theta)
    h = x
    for (w, b), act in zip(layers[:-1], net.activations):
        h = _SCALAR[act](h @ w.T + b)
    w, b = layers[-1]
    return h @ w.T + b


def _packed_activation(name, pre):
    fwd, bwd = _PACKED[name]
    if isinstance(pre, Var):
        post = fwd(pre.value)
        pv = pre.value
        return tape.custom(post, (pre,), lambda g: [bwd(pv, post, g)])
    return fwd(pre)


def forward_packed(net: MLP, packed, theta=None):
    """Propagate a packed jet of shape ``(1 + 2K, B, n_in)`` through the net.

    ``theta`` may be a Var, in which case the result is recorded on the tape.
    """
    packed = np.asarray(packed, dtype=np.float64)
    if packed.shape[-1] != net.n_in:
        raise ValueError(f"input has {packed.shape[-1]} features, network expects {net.n_in}")
    layers = net.unflatten(theta)
    h = packed
    for (w, b), act in zip(layers[:-1], net.activations):
        h = _affine_packed(h, w, b)
        h = _packed_activation(act, h)
    w, b = layers[-1]
    return _affine_packed(h, w, b)


def _affine_packed(h, w, b):
    if isinstance(w, Var):
        return tape.add_to_slice0(tape.linear(h, w), b)
    out = tape.value_of(h) @ w.T
    out[0] += b
    return out


def pack_inputs(inputs: Sequence) -> tuple[np.ndarray, int]:
    """Stack per-coordinate jets/arrays into a packed array ``(1 + 2K, B, n)``.

    Jet components must be constants (floats or arrays); derivatives only
    flow with respect to the coordinates themselves.
    """
    k = 0
    for c in inputs:
        if isinstance(c, Jet):
            k = max(k, c.order)
    batch = np.broadcast_shapes(*[np.shape(J.value(c)) for c in inputs])
    if len(batch) == 0:
        batch = (1,)
    packed = np.zeros((1 + 2 * k, *batch, len(inputs)))
    for i, c in enumerate(inputs):
        if isinstance(c, Jet):
            if c.order != k:
                raise ValueError("input jets carry different numbers of directions")
            comps = [c.val, *c.d, *c.dd]
            for s, comp in enumerate(comps):
                if isinstance(comp, Var):
                    raise TypeError("packed inputs must not depend on parameters")
                packed[s, ..., i] = comp
        else:
            packed[0, ..., i] = tape.value_of(c)
    return packed, k


def forward(net: MLP, inputs: Sequence, theta=None):
    """Evaluate the network on per-coordinate inputs.

    ``inputs`` holds one entry per input feature: plain arrays, or Jets that
    seed input directions.  Returns a Jet when any input is a Jet, otherwise
    an array/Var of shape ``(B,)`` (single output) or ``(B, d)``.
    """
    if len(inputs) != net.n_in:
        raise ValueError(f"got {len(inputs)} inputs, network expects {net.n_in}")
    scalar = all(np.ndim(J.value(c)) == 0 for c in inputs)
    packed, k = pack_inputs(inputs)
    out = forward_packed(net, packed, theta)
    squeeze = net.n_out == 1

    def take(s):
        comp = out[s, :, 0] if squeeze else out[s]
        return comp[0] if scalar else comp

    if not any(isinstance(c, Jet) for c in inputs):
        return take(0)
    return Jet(take(0), [take(1 + j) for j in range(k)], [take(1 + k + j) for j in range(k)])


def forward_scalar(net: MLP, inputs: Sequence, theta=None):
    """Layer-by-layer scalar evaluation using only elementwise Var/Jet arithmetic.

    Slow, but accepts inputs of any kind (including Jets with Var
    components); used as a cross-check of the packed path.
    """
    if len(inputs) != net.n_in:
        raise ValueError(f"got {len(inputs)} inputs, network expects {net.n_in}")
    layers = net.unflatten(theta)
    h = list(inputs)
    acts = list(net.activations) + [None]
    for (w, b), act in zip(layers, acts):
        m, n = (w.value if isinstance(w, Var) else w).shape
        nxt = []
        for i in range(m):
            z = b[i]
            for j in range(n):
                z = h[j] * w[i, j] + z
            nxt.append(z if act is None else activation(act, z))
        h = nxt
    return h[0] if len(h) == 1 else h


# trial functions --------------------------------------------------------

@dataclass
class TrialFunction:
    """Network wrapper optionally enforcing initial conditions exactly.

    ``raw``: the network itself.  ``hard_ic``: ``u0(x) + t v0(x) + t² N(x, t)``
    for displacement, or ``psi0 + t N(t)`` when ``psi0`` is given.
    Time is the last network input.
    """

    base: MLP
    mode: str = "raw"
    u0: Callable | None = None
    v0: Callable | None = None
    psi0: float | None = None

    def __post_init__(self):
        if self.mode not in ("raw", "hard_ic"):
            raise ValueError(f"unknown enforcement mode {self.mode!r}")
        if self.mode == "hard_ic" and self.psi0 is None and (self.u0 is None or self.v0 is None):
            raise ValueError("hard_ic displacement trial needs u0 and v0")

    @property
    def is_state(self) -> bool:
        return self.psi0 is not None

    def __call__(self, *coords, theta=None):
        return apply_trial(self, coords, theta)


def apply_trial(tf: TrialFunction, coords: Sequence, theta=None):
    """Evaluate the trial function at ``(*space, t)``; ``t`` is last."""
    n = forward(tf.base, coords, theta)
    if tf.mode == "raw":
        return n
    t = coords[-1]
    if tf.is_state:
        return t * n + tf.psi0
    space = coords[:-1]
    return tf.u0(*space) + t * tf.v0(*space) + (t * t) * n


# checkpoints ------------------------------------------------------------

CHECKPOINT_FORMAT = "rsfpinn-mlp-1"


def save_checkpoint(net: MLP, path) -> Path:
    """Write ``net`` as an ``.npz`` archive.

    Layout: ``format`` (str), ``layer_dims`` (int64[L+2]),
    ``activations`` (str[L]), ``params`` (float64[P], flat order above).
    """
    path = Path(path)
    with open(path, "wb") as fh:
        np.savez(
            fh,
            format=np.array(CHECKPOINT_FORMAT),
            layer_dims=np.asarray(net.layer_dims, dtype=np.int64),
            activations=np.asarray(net.activations, dtype=str),
            params=net.params,
        )
    return path


def load_checkpoint(path) -> MLP:
    with np.load(path, allow_pickle=False) as data:
        fmt = str(data["format"])
        if fmt != CHECKPOINT_FORMAT:
            raise ValueError(f"unsupported checkpoint format {fmt!r}")
        return MLP(
            [int(v) for v in data["layer_dims"]],
            [str(a) for a in data["activations"]],
            np.array(data["params"], dtype=np.float64),
        )
