"""Kernel backend selection.

The compiled tanh-jet kernel is used when the extension was built; set
``RSFPINN_PURE_PYTHON=1`` to force the numpy implementation.
"""
import os

from . import _kernels_py

BACKEND = "python"
tanh_jet_forward = _kernels_py.tanh_jet_forward
tanh_jet_backward = _kernels_py.tanh_jet_backward

if os.environ.get("RSFPINN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _tanh_jet
    except ImportError:
        pass
    else:
        tanh_jet_forward = _tanh_jet.tanh_jet_forward
        tanh_jet_backward = _tanh_jet.tanh_jet_backward
        BACKEND = "compiled"

silu_jet_forward = _kernels_py.silu_jet_forward
silu_jet_backward = _kernels_py.silu_jet_backward
relu_jet_forward = _kernels_py.relu_jet_forward
relu_jet_backward = _kernels_py.relu_jet_backward

__all__ = [
    "BACKEND",
    "tanh_jet_forward",
    "tanh_jet_backward",
    "silu_jet_forward",
    "silu_jet_backward",
    "relu_jet_forward",
    "relu_jet_backward",
]
