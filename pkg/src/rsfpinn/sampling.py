"""Uniform random collocation points on the interior, boundaries and t = 0."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COORDS = {1: ("x", "t"), 2: ("x", "z", "t")}

TAGS_1D = ("omega", "x0", "x1", "ic_disp", "ic_vel", "state", "ic_state")
TAGS_2D = ("omega", "fault", "surface", "remote", "depth", "ic_disp", "ic_vel")
IC_TAGS = ("ic_disp", "ic_vel", "ic_state")


@dataclass(frozen=True)
class Domain:
    dimension: int
    Lx: float = 25.0
    Lz: float = 25.0
    T: float = 1.0

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if min(self.Lx, self.Lz, self.T) <= 0:
            raise ValueError("domain extents must be positive")

    @property
    def coords(self) -> tuple[str, ...]:
        return COORDS[self.dimension]

    def extent(self, name: str) -> float:
        return {"x": self.Lx, "z": self.Lz, "t": self.T}[name]


@dataclass(frozen=True)
class SubdomainSpec:
    """Where and how many points to draw for one loss component.

    ``geometry`` maps each coordinate to a fixed value or a ``(lo, hi)``
    range.  Ranges are sampled on ``[lo, hi)``, except time on a boundary
    (``open_time``) which is sampled on ``(lo, hi]``.
    """

    tag: str
    geometry: dict = field(hash=False)
    count: int
    open_time: bool = False

    def __post_init__(self):
        if self.count <= 0:
            raise ValueError(f"{self.tag}: point count must be positive")


def sample(spec: SubdomainSpec, rng: np.random.Generator) -> dict[str, np.ndarray]:
    pts = {}
    for name, g in spec.geometry.items():
        if isinstance(g, tuple):
            lo, hi = g
            u = rng.uniform(0.0, 1.0, spec.count)
            if name == "t" and spec.open_time:
                pts[name] = hi - (hi - lo) * u
            else:
                pts[name] = lo + (hi - lo) * u
        else:
            pts[name] = np.full(spec.count, float(g))
    return pts


def subdomain_specs(domain: Domain, counts: dict[str, int], enforcement: str = "hard") -> list[SubdomainSpec]:
    """Specs for every loss component active under the given enforcement mode."""
    T = domain.T
    if domain.dimension == 1:
        L = domain.Lx
        geo = {
            "omega": ({"x": (0.0, L), "t": (0.0, T)}, False),
            "x0": ({"x": 0.0, "t": (0.0, T)}, True),
            "x1": ({"x": L, "t": (0.0, T)}, True),
            "ic_disp": ({"x": (0.0, L), "t": 0.0}, False),
            "ic_vel": ({"x": (0.0, L), "t": 0.0}, False),
            "state": ({"x": 0.0, "t": (0.0, T)}, True),
            "ic_state": ({"x": 0.0, "t": 0.0}, False),
        }
    else:
        Lx, Lz = domain.Lx, domain.Lz
        geo = {
            "omega": ({"x": (0.0, Lx), "z": (0.0, Lz), "t": (0.0, T)}, False),
            "fault": ({"x": 0.0, "z": (0.0, Lz), "t": (0.0, T)}, True),
            "surface": ({"x": (0.0, Lx), "z": 0.0, "t": (0.0, T)}, True),
            "remote": ({"x": Lx, "z": (0.0, Lz), "t": (0.0, T)}, True),
            "depth": ({"x": (0.0, Lx), "z": Lz, "t": (0.0, T)}, True),
            "ic_disp": ({"x": (0.0, Lx), "z": (0.0, Lz), "t": 0.0}, False),
            "ic_vel": ({"x": (0.0, Lx), "z": (0.0, Lz), "t": 0.0}, False),
        }
    specs = []
    for tag, (g, open_t) in geo.items():
        if enforcement == "hard" and tag in IC_TAGS:
            continue
        specs.append(SubdomainSpec(tag, g, int(counts[tag]), open_t))
    return specs


def default_counts(dimension: int) -> dict[str, int]:
    if dimension == 1:
        return {"omega": 100, "x0": 25, "x1": 25, "ic_disp": 50, "ic_vel": 50, "state": 400, "ic_state": 1}
    return {"omega": 400, "fault": 100, "surface": 100, "remote": 100, "depth": 100,
            "ic_disp": 200, "ic_vel": 200}
