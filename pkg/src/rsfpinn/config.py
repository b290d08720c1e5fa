"""Experiment configuration and its flat ``key = value`` text format.

Keys are dotted, e.g. ``problem.dimension``, ``material.mu``,
``counts.omega``.  Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .physics import FrictionParams, MaterialParams
from .sampling import Domain, default_counts


@dataclass
class NetSpec:
    width: int
    depth: int
    activations: list[str]

    def layer_dims(self, n_in: int, n_out: int = 1) -> list[int]:
        return [n_in, *([self.width] * self.depth), n_out]


@dataclass
class ProblemConfig:
    dimension: int = 2
    mode: str = "forward"
    enforcement: str = "hard"
    iterations: int = 30
    counts: dict = field(default_factory=lambda: default_counts(2))
    u_net: NetSpec = field(default_factory=lambda: NetSpec(128, 3, ["tanh"] * 3))
    aux_net: NetSpec = field(default_factory=lambda: NetSpec(128, 3, ["relu", "silu", "relu"]))
    history_size: int = 100
    max_evals: int = 100
    max_iter: int = 100
    c1: float = 1e-4
    c2: float = 0.9
    tol_grad: float = 1e-9
    tol_change: float = 1e-12
    material: MaterialParams = field(default_factory=MaterialParams)
    friction: FrictionParams = field(default_factory=FrictionParams)
    Lx: float = 25.0
    Lz: float = 25.0
    T: float = 1.0
    seeds: list[int] = field(default_factory=lambda: [0])
    eval_points: int = 1000
    eval_temporal_points: int = 100
    quadrature: list[int] = field(default_factory=lambda: [8, 16, 32, 64])
    workers: int = 1
    out: str = "runs"

    def __post_init__(self):
        self.validate()

    @classmethod
    def for_dimension(cls, dimension: int, **overrides) -> "ProblemConfig":
        """Defaults for the 1D illustration or the 2D verification problem."""
        if dimension == 1:
            base = dict(
                dimension=1, mode="forward", enforcement="hard", iterations=10,
                counts=default_counts(1), history_size=10, max_evals=200, max_iter=200,
                u_net=NetSpec(64, 3, ["tanh"] * 3), aux_net=NetSpec(64, 3, ["tanh"] * 3),
                Lx=1.0, Lz=1.0, T=1.0,
            )
        elif dimension == 2:
            base = dict(dimension=2, counts=default_counts(2))
        else:
            raise ValueError("dimension must be 1 or 2")
        base.update(overrides)
        return cls(**base)

    def validate(self):
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if self.mode not in ("forward", "inverse"):
            raise ValueError(f"mode must be forward or inverse, got {self.mode!r}")
        if self.dimension == 1 and self.mode == "inverse":
            raise ValueError("the 1D problem supports only the forward mode")
        if self.enforcement not in ("soft", "hard"):
            raise ValueError(f"enforcement must be soft or hard, got {self.enforcement!r}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if any(int(v) <= 0 for v in self.counts.values()):
            raise ValueError("collocation counts must be positive")
        if min(self.Lx, self.Lz, self.T) <= 0:
            raise ValueError("domain extents must be positive")
        if self.max_evals < 1 or self.max_iter < 1:
            raise ValueError("optimizer budgets must be >= 1")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.eval_points < 1 or self.eval_temporal_points < 1:
            raise ValueError("evaluation point counts must be >= 1")
        if any(n <= 0 or n % 2 for n in self.quadrature):
            raise ValueError("quadrature interval counts must be positive and even")

    @property
    def domain(self) -> Domain:
        return Domain(self.dimension, self.Lx, self.Lz, self.T)

    def replace(self, **changes) -> "ProblemConfig":
        return dataclasses.replace(self, **changes)

    # flat serialisation -------------------------------------------------
    def to_flat(self) -> dict[str, str]:
        flat = {
            "problem.dimension": self.dimension,
            "problem.mode": self.mode,
            "problem.enforcement": self.enforcement,
            "train.iterations": self.iterations,
            "net.u.width": self.u_net.width,
            "net.u.depth": self.u_net.depth,
            "net.u.activations": ",".join(self.u_net.activations),
            "net.aux.width": self.aux_net.width,
            "net.aux.depth": self.aux_net.depth,
            "net.aux.activations": ",".join(self.aux_net.activations),
            "optim.history_size": self.history_size,
            "optim.max_evals": self.max_evals,
            "optim.max_iter": self.max_iter,
            "optim.c1": self.c1,
            "optim.c2": self.c2,
            "optim.tol_grad": self.tol_grad,
            "optim.tol_change": self.tol_change,
            "domain.Lx": self.Lx,
            "domain.Lz": self.Lz,
            "domain.T": self.T,
            "run.seeds": ",".join(str(s) for s in self.seeds),
            "run.workers": self.workers,
            "run.out": self.out,
            "eval.points": self.eval_points,
            "eval.temporal_points": self.eval_temporal_points,
            "eval.quadrature": ",".join(str(n) for n in self.quadrature),
        }
        for k, v in self.counts.items():
            flat[f"counts.{k}"] = v
        for f in dataclasses.fields(self.material):
            flat[f"material.{f.name}"] = getattr(self.material, f.name)
        for f in dataclasses.fields(self.friction):
            flat[f"friction.{f.name}"] = getattr(self.friction, f.name)
        return {k: _fmt(v) for k, v in flat.items()}

    @classmethod
    def from_flat(cls, flat: dict[str, str]) -> "ProblemConfig":
        flat = dict(flat)
        dim = int(flat.get("problem.dimension", 2))
        cfg = cls.for_dimension(dim)
        return cfg.with_overrides(flat)

    def with_overrides(self, flat: dict[str, str]) -> "ProblemConfig":
        """Apply dotted-key overrides; unknown keys raise ``KeyError``."""
        known = self.to_flat()
        merged = dict(known)
        for k, v in flat.items():
            if k not in known and not k.startswith("counts."):
                raise KeyError(f"unknown configuration key {k!r}")
            merged[k] = str(v)
        g = merged.get
        counts = {k[len("counts."):]: int(v) for k, v in merged.items() if k.startswith("counts.")}
        material = MaterialParams(**{f.name: float(g(f"material.{f.name}"))
                                     for f in dataclasses.fields(MaterialParams)})
        friction = FrictionParams(**{f.name: float(g(f"friction.{f.name}"))
                                     for f in dataclasses.fields(FrictionParams)})
        return ProblemConfig(
            dimension=int(g("problem.dimension")),
            mode=g("problem.mode"),
            enforcement=g("problem.enforcement"),
            iterations=int(g("train.iterations")),
            counts=counts,
            u_net=NetSpec(int(g("net.u.width")), int(g("net.u.depth")), _list(g("net.u.activations"))),
            aux_net=NetSpec(int(g("net.aux.width")), int(g("net.aux.depth")), _list(g("net.aux.activations"))),
            history_size=int(g("optim.history_size")),
            max_evals=int(g("optim.max_evals")),
            max_iter=int(g("optim.max_iter")),
            c1=float(g("optim.c1")),
            c2=float(g("optim.c2")),
            tol_grad=float(g("optim.tol_grad")),
            tol_change=float(g("optim.tol_change")),
            material=material,
            friction=friction,
            Lx=float(g("domain.Lx")),
            Lz=float(g("domain.Lz")),
            T=float(g("domain.T")),
            seeds=[int(s) for s in _list(g("run.seeds"))],
            workers=int(g("run.workers")),
            out=g("run.out"),
            eval_points=int(g("eval.points")),
            eval_temporal_points=int(g("eval.temporal_points")),
            quadrature=[int(n) for n in _list(g("eval.quadrature"))],
        )

    def dumps(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_flat().items())

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.dumps(), encoding="utf-8")
        return path

    @classmethod
    def loads(cls, text: str) -> "ProblemConfig":
        return cls.from_flat(parse_flat(text))

    @classmethod
    def load(cls, path) -> "ProblemConfig":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def parse_flat(text: str) -> dict[str, str]:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected 'key = value', got {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _list(s: str) -> list[str]:
    return [p.strip() for p in str(s).split(",") if p.strip()]
