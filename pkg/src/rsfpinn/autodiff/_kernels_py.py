"""Numpy implementations of the fused activation-jet kernels.

A packed jet is an array of shape ``(1 + 2K, ...)``: slot 0 holds values,
slots ``1..K`` first derivatives along K input directions and slots
``K+1..2K`` the matching pure second derivatives.
"""
import numpy as np


def tanh_jet_forward(pre):
    s_slots = pre.shape[0]
    k = (s_slots - 1) // 2
    out = np.empty_like(pre)
    t = np.tanh(pre[0])
    s = 1.0 - t * t
    out[0] = t
    if k:
        d = pre[1:k + 1]
        out[1:k + 1] = s * d
        out[k + 1:] = s * pre[k + 1:] - 2.0 * (t * s) * (d * d)
    return out


def tanh_jet_backward(pre, post, grad):
    s_slots = pre.shape[0]
    k = (s_slots - 1) // 2
    t = post[0]
    s = 1.0 - t * t
    gpre = np.empty_like(pre)
    gv = grad[0] * s
    if k:
        d = pre[1:k + 1]
        dd = pre[k + 1:]
        g1 = grad[1:k + 1]
        g2 = grad[k + 1:]
        ts = t * s
        gv = gv - 2.0 * ts * ((g1 * d).sum(axis=0) + (g2 * dd).sum(axis=0)) \
            - 2.0 * s * (1.0 - 3.0 * t * t) * (g2 * d * d).sum(axis=0)
        gpre[1:k + 1] = g1 * s - 4.0 * ts * g2 * d
        gpre[k + 1:] = g2 * s
    gpre[0] = gv
    return gpre


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _silu_derivs(v):
    sg = _sigmoid(v)
    q = sg * (1.0 - sg)
    f0 = v * sg
    f1 = sg * (1.0 + v * (1.0 - sg))
    g = 2.0 + v * (1.0 - 2.0 * sg)
    f2 = q * g
    f3 = q * (1.0 - 2.0 * sg) * g + q * ((1.0 - 2.0 * sg) - 2.0 * v * q)
    return f0, f1, f2, f3


def _relu_derivs(v):
    h = (v > 0.0).astype(v.dtype)
    z = np.zeros_like(v)
    return v * h, h, z, z


def _generic_forward(derivs, pre):
    k = (pre.shape[0] - 1) // 2
    f0, f1, f2, _ = derivs(pre[0])
    out = np.empty_like(pre)
    out[0] = f0
    if k:
        d = pre[1:k + 1]
        out[1:k + 1] = f1 * d
        out[k + 1:] = f1 * pre[k + 1:] + f2 * d * d
    return out


def _generic_backward(derivs, pre, grad):
    k = (pre.shape[0] - 1) // 2
    _, f1, f2, f3 = derivs(pre[0])
    gpre = np.empty_like(pre)
    gv = grad[0] * f1
    if k:
        d = pre[1:k + 1]
        dd = pre[k + 1:]
        g1 = grad[1:k + 1]
        g2 = grad[k + 1:]
        gv = gv + f2 * ((g1 * d).sum(axis=0) + (g2 * dd).sum(axis=0)) + f3 * (g2 * d * d).sum(axis=0)
        gpre[1:k + 1] = g1 * f1 + 2.0 * f2 * g2 * d
        gpre[k + 1:] = g2 * f1
    gpre[0] = gv
    return gpre


def silu_jet_forward(pre):
    return _generic_forward(_silu_derivs, pre)


def silu_jet_backward(pre, post, grad):
    return _generic_backward(_silu_derivs, pre, grad)


def relu_jet_forward(pre):
    return _generic_forward(_relu_derivs, pre)


def relu_jet_backward(pre, post, grad):
    return _generic_backward(_relu_derivs, pre, grad)
