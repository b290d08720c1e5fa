"""Component residuals and mean-square losses for the 1D and 2D problems.

Networks are passed as a mapping with keys ``"u"`` (displacement),
``"psi"`` (1D state) and ``"alpha"`` (2D friction parameter).  Entries may
be :class:`~rsfpinn.network.TrialFunction`, :class:`~rsfpinn.network.MLP`
or any plain callable of the coordinates (e.g. an exact solution).
``thetas`` optionally maps the same keys to tape Vars; networks without an
entry are evaluated at their stored parameters as constants.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import physics
from .autodiff import Jet, Var
from .autodiff import jet as J
from .network import MLP, TrialFunction, forward
from .physics import ManufacturedCase


@dataclass
class LossReport:
    iteration: int
    components: dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(sum(self.components.values()))


def write_loss_csv(reports, path, tags=None, extra=None):
    """One row per report: iteration, one column per tag, total (+ extra columns)."""
    reports = list(reports)
    if tags is None:
        tags = list(reports[0].components) if reports else []
    extra = extra or [{} for _ in reports]
    extra_cols = list(extra[0]) if extra else []
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", *tags, "total", *extra_cols])
        for rep, ex in zip(reports, extra):
            w.writerow([rep.iteration, *[repr(rep.components.get(t, float("nan"))) for t in tags],
                        repr(rep.total), *[ex.get(c, "") for c in extra_cols]])


def read_loss_csv(path) -> list[LossReport]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        it = int(row.pop("iteration"))
        row.pop("total")
        comps = {}
        for k, v in row.items():
            try:
                comps[k] = float(v)
            except ValueError:
                pass
        out.append(LossReport(it, comps))
    return out


def _call(fn, args, theta=None):
    if isinstance(fn, TrialFunction):
        return fn(*args, theta=theta)
    if isinstance(fn, MLP):
        return forward(fn, args, theta)
    return fn(*args)


def _eval(nets, thetas, name, args):
    thetas = thetas or {}
    return _call(nets[name], args, thetas.get(name))


def _seeded(points, coords, diff):
    k = len(diff)
    args = []
    for name in coords:
        v = np.asarray(points[name], dtype=np.float64)
        args.append(Jet.seed(v, diff.index(name), k) if name in diff else v)
    return args


def _mse(r):
    sq = r * r
    return sq.mean() if isinstance(sq, Var) else float(np.mean(sq))


# 1D -----------------------------------------------------------------------

def residual_1d(tag, points, nets, case: ManufacturedCase, thetas=None):
    m, p = case.material, case.friction
    c2, mu, Z = m.c ** 2, m.mu, m.Z
    x, t = points["x"], points["t"]
    d = case.data
    if tag == "omega":
        u = _eval(nets, thetas, "u", _seeded(points, ("x", "t"), ["x", "t"]))
        return u.dd[1] - c2 * u.dd[0] - d["s"](x, t)
    if tag == "x0":
        u = _eval(nets, thetas, "u", _seeded(points, ("x", "t"), ["x", "t"]))
        psi = _eval(nets, thetas, "psi", (t,))
        strength = physics.friction_strength(2.0 * u.d[1], psi, p)
        return -mu * u.d[0] - strength - d["g0"](t)
    if tag == "x1":
        u = _eval(nets, thetas, "u", _seeded(points, ("x", "t"), ["x", "t"]))
        return Z * u.d[1] + mu * u.d[0] - d["g1"](t)
    if tag == "ic_disp":
        return _eval(nets, thetas, "u", (x, t)) - case.u0(x)
    if tag == "ic_vel":
        u = _eval(nets, thetas, "u", _seeded(points, ("x", "t"), ["t"]))
        return u.d[0] - case.v0(x)
    if tag == "state":
        psi = _eval(nets, thetas, "psi", _seeded(points, ("t",), ["t"]))
        u = _eval(nets, thetas, "u", _seeded(points, ("x", "t"), ["t"]))
        return psi.d[0] - physics.aging_rhs(2.0 * u.d[0], psi.val, p) - d["h"](t)
    if tag == "ic_state":
        return _eval(nets, thetas, "psi", (t,)) - case.psi0
    raise ValueError(f"unknown 1D loss tag {tag!r}")


def loss_1d(tag, points, nets, case: ManufacturedCase, thetas=None):
    """Mean squared residual of one 1D component (Var if ``thetas`` given)."""
    return _mse(residual_1d(tag, points, nets, case, thetas))


# 2D -----------------------------------------------------------------------

_C2 = ("x", "z", "t")


def residual_2d(tag, points, nets, case: ManufacturedCase, thetas=None, inverse=False):
    m, p = case.material, case.friction
    c2, mu, Z = m.c ** 2, m.mu, m.Z
    x, z, t = points["x"], points["z"], points["t"]
    d = case.data
    if tag == "omega":
        u = _eval(nets, thetas, "u", _seeded(points, _C2, ["x", "z", "t"]))
        return u.dd[2] - c2 * (u.dd[0] + u.dd[1]) - d["S"](x, z, t)
    if tag == "fault":
        if inverse:
            return fault_residual_inverse(points, nets, case, thetas)
        u = _eval(nets, thetas, "u", _seeded(points, _C2, ["x", "t"]))
        f = physics.friction_coefficient_steady(2.0 * u.d[1], case.alpha_exact(z), p)
        return -mu * u.d[0] - p.sigma_n * f - d["gf"](z, t)
    if tag == "surface":
        u = _eval(nets, thetas, "u", _seeded(points, _C2, ["z"]))
        return -mu * u.d[0] - d["gs"](x, t)
    if tag == "remote":
        u = _eval(nets, thetas, "u", _seeded(points, _C2, ["x", "t"]))
        return Z * u.d[1] + mu * u.d[0] - d["gr"](z, t)
    if tag == "depth":
        u = _eval(nets, thetas, "u", _seeded(points, _C2, ["z", "t"]))
        return Z * u.d[1] + mu * u.d[0] - d["gd"](x, t)
    if tag == "ic_disp":
        return _eval(nets, thetas, "u", (x, z, t)) - case.u0(x, z)
    if tag == "ic_vel":
        u = _eval(nets, thetas, "u", _seeded(points, _C2, ["t"]))
        return u.d[0] - case.v0(x, z)
    raise ValueError(f"unknown 2D loss tag {tag!r}")


def fault_residual_inverse(points, nets, case: ManufacturedCase, thetas=None):
    """Fault residual with the friction parameter supplied by the alpha network.

    The same depth coordinate feeds both the displacement and alpha networks.
    """
    mu, p = case.material.mu, case.friction
    z, t = points["z"], points["t"]
    u = _eval(nets, thetas, "u", _seeded(points, _C2, ["x", "t"]))
    alpha = _eval(nets, thetas, "alpha", (z,))
    f_tilde = alpha * J.log(J.absolute(2.0 * u.d[1]) / p.V0) + p.f0
    return -mu * u.d[0] - p.sigma_n * f_tilde - case.data["gf"](z, t)


def loss_2d_forward(tag, points, nets, case: ManufacturedCase, thetas=None):
    return _mse(residual_2d(tag, points, nets, case, thetas, inverse=False))


def loss_2d_inverse_fault(points, nets, case: ManufacturedCase, thetas=None):
    return _mse(fault_residual_inverse(points, nets, case, thetas))


def component_loss(tag, points, nets, case, thetas=None, inverse=False):
    if case.dimension == 1:
        return loss_1d(tag, points, nets, case, thetas)
    return _mse(residual_2d(tag, points, nets, case, thetas, inverse=inverse))


def objective(points_by_tag: Mapping[str, dict], nets, case, thetas=None, inverse=False):
    """Unweighted sum of component losses; returns ``(total, {tag: float})``."""
    total = 0.0
    parts = {}
    for tag, pts in points_by_tag.items():
        val = component_loss(tag, pts, nets, case, thetas, inverse)
        parts[tag] = float(J.value(val))
        total = total + val
    return total, parts
