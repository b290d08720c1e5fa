"""Material and friction models plus manufactured solutions.

Units are km, s and GPa throughout.  All functions accept floats, numpy
arrays, tape Vars or Jets, so the same expressions serve for data
generation, residual evaluation and differentiation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .autodiff import Jet
from .autodiff import jet as J


@dataclass(frozen=True)
class MaterialParams:
    mu: float = 32.0  # shear modulus, GPa
    rho: float = 2.67  # density, GPa s^2 / km^2 (2670 kg/m^3)

    def __post_init__(self):
        if self.mu <= 0 or self.rho <= 0:
            raise ValueError("shear modulus and density must be positive")

    @property
    def c(self) -> float:
        return float(np.sqrt(self.mu / self.rho))

    @property
    def Z(self) -> float:
        return float(np.sqrt(self.mu * self.rho))


@dataclass(frozen=True)
class FrictionParams:
    a: float = 0.015
    b: float = 0.02
    Dc: float = 2e-3  # km
    f0: float = 0.6
    V0: float = 1e-9  # km/s
    sigma_n: float = 0.05  # GPa
    alpha_min: float = -0.005
    alpha_max: float = 0.015
    H: float = 12.0  # km
    D: float = 5.0  # km

    def __post_init__(self):
        if self.V0 <= 0 or self.Dc <= 0 or self.sigma_n <= 0 or self.D <= 0:
            raise ValueError("V0, Dc, sigma_n and D must be positive")
        if self.H < 0:
            raise ValueError("seismogenic depth H must be non-negative")
        if self.alpha_min > self.alpha_max:
            raise ValueError("alpha_min exceeds alpha_max")


# friction laws ------------------------------------------------------------

def friction_coefficient_rsf(V, psi, p: FrictionParams):
    """a ln(|V|/V0) + psi.  Raises DomainError when V == 0."""
    return p.a * J.log(J.absolute(V) / p.V0) + psi


def friction_strength(V, psi, p: FrictionParams):
    return p.sigma_n * friction_coefficient_rsf(V, psi, p)


def aging_rhs(V, psi, p: FrictionParams):
    """State evolution rate (b V0 / Dc) exp((f0 - psi)/b - |V|/V0).

    Raises DomainError if the exponent exceeds 700.
    """
    arg = (p.f0 - psi) / p.b - J.absolute(V) / p.V0
    return (p.b * p.V0 / p.Dc) * J.exp(arg)


def friction_coefficient_steady(V, alpha, p: FrictionParams):
    """f0 + alpha ln(|V|/V0)."""
    return alpha * J.log(J.absolute(V) / p.V0) + p.f0


def alpha_profile(z, p: FrictionParams):
    """Depth profile of a - b: alpha_min above H, linear ramp over D, alpha_max below."""
    z = np.asarray(J.value(z), dtype=np.float64)
    ramp = (z - p.H) * ((p.alpha_max - p.alpha_min) / p.D) + p.alpha_min
    out = np.where(z < p.H, p.alpha_min, np.where(z > p.H + p.D, p.alpha_max, ramp))
    return out if out.ndim else float(out)


def sech2(w):
    t = J.tanh(w)
    return 1.0 - t * t


# manufactured solutions --------------------------------------------------

@dataclass
class ManufacturedCase:
    """Exact fields and the source/boundary data they induce.

    ``data`` maps a tag to a function of plain coordinate arrays.  1D tags:
    ``s, g0, g1, h``; 2D tags: ``S, gf, gs, gr, gd``.
    """

    dimension: int
    material: MaterialParams
    friction: FrictionParams
    u_exact: Callable
    u0: Callable
    v0: Callable
    data: dict[str, Callable] = field(default_factory=dict)
    psi_exact: Callable | None = None
    psi0: float | None = None
    alpha_exact: Callable | None = None

    def u_t_exact(self, *coords):
        return _derivs(self.u_exact, coords, [len(coords) - 1])[0]


def _derivs(fn, coords, which):
    """Return first derivatives of ``fn`` along coordinate indices ``which``."""
    k = len(which)
    seeded = list(coords)
    for j, i in enumerate(which):
        seeded[i] = Jet.seed(np.asarray(coords[i], dtype=np.float64), j, k)
    out = fn(*seeded)
    return [np.asarray(J.value(d)) for d in out.d]


def _second(fn, coords, which):
    k = len(which)
    seeded = list(coords)
    for j, i in enumerate(which):
        seeded[i] = Jet.seed(np.asarray(coords[i], dtype=np.float64), j, k)
    out = fn(*seeded)
    return [np.asarray(J.value(d)) for d in out.dd]


def mms_1d(material: MaterialParams | None = None, friction: FrictionParams | None = None,
           L: float = 1.0) -> ManufacturedCase:
    """Traveling tanh wave on x in [0, 1] with a state variable matching the fault condition.

    Slip rate on the fault is V = 2 u_t(0, t); logarithms use |V|.
    """
    m = material or MaterialParams()
    p = friction or FrictionParams()
    c, mu, Z = m.c, m.mu, m.Z

    def u_exact(x, t):
        return J.tanh(0.5 * (x - c * t + 1.0))

    def u_x(x, t):
        return 0.5 * sech2(0.5 * (x - c * t + 1.0))

    def u_t(x, t):
        return (-0.5 * c) * sech2(0.5 * (x - c * t + 1.0))

    def psi_exact(t):
        V = 2.0 * u_t(0.0, t)
        return -(mu / p.sigma_n) * u_x(0.0, t) - p.a * J.log(J.absolute(V) / p.V0)

    def source(x, t):
        dd = _second(u_exact, (x, t), [0, 1])
        return dd[1] - c * c * dd[0]

    def g0(t):
        return np.zeros_like(np.asarray(t, dtype=np.float64))

    def g1(t):
        xr = np.full_like(np.asarray(t, dtype=np.float64), L)
        ux, ut = _derivs(u_exact, (xr, t), [0, 1])
        return Z * ut + mu * ux

    def h(t):
        t = np.asarray(t, dtype=np.float64)
        dpsi = _derivs(psi_exact, (t,), [0])[0]
        ut = _derivs(u_exact, (np.zeros_like(t), t), [1])[0]
        return dpsi - aging_rhs(2.0 * ut, psi_exact(t), p)

    def u0(x):
        return u_exact(x, 0.0)

    def v0(x):
        return u_t(x, 0.0)

    return ManufacturedCase(
        dimension=1, material=m, friction=p, u_exact=u_exact, u0=u0, v0=v0,
        data={"s": source, "g0": g0, "g1": g1, "h": h},
        psi_exact=psi_exact, psi0=float(psi_exact(0.0)),
    )


def mms_2d(material: MaterialParams | None = None, friction: FrictionParams | None = None,
           Lx: float = 25.0, Lz: float = 25.0) -> ManufacturedCase:
    """u = tanh((x + z + c t)/20) on the half-domain next to the fault at x = 0."""
    m = material or MaterialParams()
    p = friction or FrictionParams()
    c, mu, Z = m.c, m.mu, m.Z

    def u_exact(x, z, t):
        return J.tanh((x + z + c * t) / 20.0)

    def u_t(x, z, t):
        return (c / 20.0) * sech2((x + z + c * t) / 20.0)

    def alpha_exact(z):
        return alpha_profile(z, p)

    def source(x, z, t):
        dd = _second(u_exact, (x, z, t), [0, 1, 2])
        return dd[2] - c * c * (dd[0] + dd[1])

    def gf(z, t):
        z = np.asarray(z, dtype=np.float64)
        ux, ut = _derivs(u_exact, (np.zeros_like(z), z, t), [0, 2])
        return -mu * ux - p.sigma_n * friction_coefficient_steady(2.0 * ut, alpha_exact(z), p)

    def gs(x, t):
        x = np.asarray(x, dtype=np.float64)
        uz = _derivs(u_exact, (x, np.zeros_like(x), t), [1])[0]
        return -mu * uz

    def gr(z, t):
        z = np.asarray(z, dtype=np.float64)
        ux, ut = _derivs(u_exact, (np.full_like(z, Lx), z, t), [0, 2])
        return Z * ut + mu * ux

    def gd(x, t):
        x = np.asarray(x, dtype=np.float64)
        uz, ut = _derivs(u_exact, (x, np.full_like(x, Lz), t), [1, 2])
        return Z * ut + mu * uz

    def u0(x, z):
        return u_exact(x, z, 0.0)

    def v0(x, z):
        return u_t(x, z, 0.0)

    return ManufacturedCase(
        dimension=2, material=m, friction=p, u_exact=u_exact, u0=u0, v0=v0,
        data={"S": source, "gf": gf, "gs": gs, "gr": gr, "gd": gd},
        alpha_exact=alpha_exact,
    )
