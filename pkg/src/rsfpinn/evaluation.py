"""Error measures for trained networks.

Discrete relative l2 errors on random points, continuous L2 errors by
composite Simpson quadrature (space, time and space-time), the averaged
temporal error, and gridded fields for plotting.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .losses import component_loss
from .network import MLP, TrialFunction, forward
from .sampling import COORDS, subdomain_specs, sample

# quadrature ---------------------------------------------------------------


def simpson_weights(n: int, extent: float) -> np.ndarray:
    """Composite Simpson weights for ``n`` (even) intervals on ``[0, extent]``."""
    n = int(n)
    if n <= 0 or n % 2:
        raise ValueError(f"Simpson's rule needs a positive even interval count, got {n}")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (extent / n / 3.0)


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product Simpson grid on a box with the origin as one corner.

    ``kind`` is ``space``, ``time`` or ``spacetime`` and only labels the grid.
    """

    extents: tuple[float, ...]
    counts: tuple[int, ...]
    kind: str = "spacetime"

    def __post_init__(self):
        if len(self.extents) != len(self.counts):
            raise ValueError("one interval count per axis required")
        for n in self.counts:
            if int(n) <= 0 or int(n) % 2:
                raise ValueError(f"interval counts must be positive and even, got {n}")
        if self.kind not in ("space", "time", "spacetime"):
            raise ValueError(f"unknown grid kind {self.kind!r}")

    @classmethod
    def uniform(cls, extents, n: int, kind: str = "spacetime") -> "QuadratureGrid":
        extents = tuple(float(e) for e in extents)
        return cls(extents, (int(n),) * len(extents), kind)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(e / n for e, n in zip(self.extents, self.counts))

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(0.0, e, n + 1) for e, n in zip(self.extents, self.counts)]

    def nodes(self) -> list[np.ndarray]:
        """Flattened node coordinates, one array per axis (``ij`` ordering)."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return [m.ravel() for m in mesh]

    def weights(self) -> np.ndarray:
        w = np.ones(1)
        for e, n in zip(self.extents, self.counts):
            w = np.multiply.outer(w, simpson_weights(n, e))
        return w.ravel()

    def integrate(self, values) -> float:
        values = np.asarray(values, dtype=np.float64).ravel()
        return float(self.weights() @ values)


def simpson(f, grid: QuadratureGrid) -> float:
    """Integrate ``f(*coords)`` over the grid."""
    return grid.integrate(f(*grid.nodes()))


def simpson_l2(net, exact, grid: QuadratureGrid) -> float:
    """sqrt of the Simpson approximation of the integral of ``|net - exact|^2``."""
    nodes = grid.nodes()
    diff = np.asarray(net(*nodes)) - np.asarray(exact(*nodes))
    return math.sqrt(max(grid.integrate(diff * diff), 0.0))


def averaged_temporal_error(net, exact, space_points, T: float, n_time: int) -> float:
    """Mean over spatial points of the time-L2 error on ``[0, T]``.

    ``space_points`` is a sequence of coordinate arrays of equal length N_T.
    """
    space_points = [np.asarray(p, dtype=np.float64) for p in space_points]
    n_pts = len(space_points[0]) if space_points else 0
    if n_pts < 1:
        raise ValueError("at least one spatial point is required")
    t_axis = np.linspace(0.0, T, int(n_time) + 1)
    w = simpson_weights(n_time, T)
    coords = [np.repeat(p, t_axis.size) for p in space_points]
    t = np.tile(t_axis, n_pts)
    diff = (np.asarray(net(*coords, t)) - np.asarray(exact(*coords, t))).reshape(n_pts, -1)
    inner = np.maximum((diff * diff) @ w, 0.0)
    return float(np.mean(np.sqrt(inner)))


def averaged_spatial_error(net, exact, times, extents, n: int) -> float:
    """Mean over snapshot times of the space-L2 error on the spatial box."""
    times = np.asarray(times, dtype=np.float64)
    if times.size < 1:
        raise ValueError("at least one snapshot time is required")
    grid = QuadratureGrid.uniform(extents, n, "space")
    nodes = grid.nodes()
    m = nodes[0].size
    coords = [np.tile(c, times.size) for c in nodes]
    t = np.repeat(times, m)
    diff = (np.asarray(net(*coords, t)) - np.asarray(exact(*coords, t))).reshape(times.size, m)
    inner = np.maximum((diff * diff) @ grid.weights(), 0.0)
    return float(np.mean(np.sqrt(inner)))


# discrete errors ----------------------------------------------------------


def rel_l2(net, exact, points) -> float:
    """sqrt(sum |net - exact|^2 / sum |exact|^2) over ``points`` (coordinate arrays)."""
    points = [np.asarray(p, dtype=np.float64) for p in points]
    if not points or points[0].size < 1:
        raise ValueError("at least one evaluation point is required")
    e = np.asarray(exact(*points), dtype=np.float64)
    n = np.asarray(net(*points), dtype=np.float64)
    den = float(np.sum(e * e))
    if den <= 0.0:
        raise ZeroDivisionError("exact values vanish at every evaluation point")
    return math.sqrt(float(np.sum((n - e) ** 2)) / den)


def field_grid(net, exact, resolution, t_snapshot: float, Lx: float, Lz: float, T: float = 1.0):
    """Row-major ``(nz, nx)`` grids of net, exact and ``|net - exact|`` at time ``t_snapshot``."""
    if not 0.0 <= t_snapshot <= T:
        raise ValueError(f"snapshot time {t_snapshot} outside [0, {T}]")
    nx, nz = (resolution, resolution) if np.isscalar(resolution) else resolution
    xs = np.linspace(0.0, Lx, int(nx))
    zs = np.linspace(0.0, Lz, int(nz))
    Zg, Xg = np.meshgrid(zs, xs, indexing="ij")
    t = np.full(Xg.size, float(t_snapshot))
    n = np.asarray(net(Xg.ravel(), Zg.ravel(), t)).reshape(Xg.shape)
    e = np.asarray(exact(Xg.ravel(), Zg.ravel(), t)).reshape(Xg.shape)
    return {"x": Xg, "z": Zg, "net": n, "exact": e, "diff": np.abs(n - e)}


def write_field_csv(grid: dict, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "z", "net", "exact", "abs_diff"])
        for row in zip(*(grid[k].ravel() for k in ("x", "z", "net", "exact", "diff"))):
            w.writerow([repr(float(v)) for v in row])


# network adapters ---------------------------------------------------------


def as_function(net):
    """Plain ``f(*coords) -> ndarray`` view of a network or trial function."""
    if isinstance(net, TrialFunction):
        return lambda *c: np.asarray(net(*c))
    if isinstance(net, MLP):
        return lambda *c: np.asarray(forward(net, c))
    return net


# reports ------------------------------------------------------------------


@dataclass
class ErrorReport:
    seed: int | None
    dimension: int
    mode: str
    enforcement: str
    rel_l2_displacement: float
    rel_l2_alpha: float | None = None
    mean_abs_displacement: float | None = None
    abs_state_error: float | None = None
    mse: dict[str, float] = field(default_factory=dict)
    l2: dict[str, dict[int, float]] = field(default_factory=dict)
    averaged_temporal: float | None = None
    n_points: int = 0
    n_temporal: int = 0

    def __post_init__(self):
        for k, v in self.flat().items():
            if isinstance(v, float) and (not math.isfinite(v) or v < 0):
                raise ValueError(f"error entry {k} must be finite and >= 0, got {v}")

    def flat(self) -> dict:
        row = {
            "seed": "" if self.seed is None else self.seed,
            "dimension": self.dimension,
            "mode": self.mode,
            "enforcement": self.enforcement,
            "rel_l2_u": self.rel_l2_displacement,
        }
        if self.rel_l2_alpha is not None:
            row["rel_l2_alpha"] = self.rel_l2_alpha
        if self.mean_abs_displacement is not None:
            row["mean_abs_u"] = self.mean_abs_displacement
        if self.abs_state_error is not None:
            row["max_abs_psi"] = self.abs_state_error
        for tag, v in self.mse.items():
            row[f"mse_{tag}"] = v
        for kind, per in self.l2.items():
            for n, v in per.items():
                row[f"l2_{kind}_{n}"] = v
        if self.averaged_temporal is not None:
            row["avg_temporal"] = self.averaged_temporal
        row["n_points"] = self.n_points
        row["n_temporal"] = self.n_temporal
        return row


def evaluate_run(run, n_points: int | None = None, resolutions=None) -> ErrorReport:
    """Evaluate a trained run against its manufactured solution.

    Evaluation points come from the run's own evaluation seed stream, which
    is independent of the collocation stream used in training.
    """
    from .trainer import seed_streams

    cfg = run.config
    case = run.case
    n_points = cfg.eval_points if n_points is None else int(n_points)
    resolutions = list(cfg.quadrature if resolutions is None else resolutions)
    n_t = cfg.eval_temporal_points
    rng = np.random.default_rng(seed_streams(run.seed)["eval"])
    dom = cfg.domain
    coords = COORDS[cfg.dimension]
    u = as_function(run.nets["u"])

    pts = [rng.uniform(0.0, dom.extent(c), n_points) for c in coords]
    report = dict(seed=run.seed, dimension=cfg.dimension, mode=cfg.mode,
                  enforcement=cfg.enforcement, n_points=n_points, n_temporal=n_t)
    report["rel_l2_displacement"] = rel_l2(u, case.u_exact, pts)

    # each loss component gets its own n_points sample on its subdomain
    counts = {k: n_points for k in cfg.counts}
    inverse = cfg.mode == "inverse"
    mse = {}
    for spec in subdomain_specs(dom, counts, cfg.enforcement):
        mse[spec.tag] = float(component_loss(spec.tag, sample(spec, rng), run.nets, case, inverse=inverse))
    report["mse"] = mse

    space_ext = [dom.extent(c) for c in coords[:-1]]
    snap_t = rng.uniform(0.0, dom.T, n_t)
    snap_x = [rng.uniform(0.0, e, n_t) for e in space_ext]
    l2 = {"space": {}, "time": {}, "spacetime": {}}
    for n in resolutions:
        l2["space"][n] = averaged_spatial_error(u, case.u_exact, snap_t, space_ext, n)
        l2["time"][n] = averaged_temporal_error(u, case.u_exact, snap_x, dom.T, n)
        grid = QuadratureGrid.uniform([*space_ext, dom.T], n, "spacetime")
        l2["spacetime"][n] = simpson_l2(u, case.u_exact, grid)
    report["averaged_temporal"] = l2["time"][max(resolutions)] if resolutions else None

    if cfg.dimension == 1:
        report["mean_abs_displacement"] = float(np.mean(np.abs(u(*pts) - case.u_exact(*pts))))
        tg = np.linspace(0.0, dom.T, 1001)
        psi = as_function(run.nets["psi"])
        report["abs_state_error"] = float(np.max(np.abs(psi(tg) - case.psi_exact(tg))))
    elif inverse:
        alpha = as_function(run.nets["alpha"])
        report["rel_l2_alpha"] = rel_l2(alpha, case.alpha_exact, [pts[1]])
        l2["alpha"] = {n: simpson_l2(alpha, case.alpha_exact, QuadratureGrid.uniform([dom.Lz], n, "space"))
                       for n in resolutions}
    report["l2"] = l2
    return ErrorReport(**report)


def alpha_profile_table(run, n: int = 200):
    """Inferred and exact friction parameter at ``n`` uniform depths."""
    z = np.linspace(0.0, run.config.Lz, n)
    return z, as_function(run.nets["alpha"])(z), run.case.alpha_exact(z)


def average_reports(reports) -> ErrorReport:
    """Entrywise mean of per-seed reports (seed left blank)."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to average")
    first = reports[0]

    def mean(get):
        vals = [get(r) for r in reports]
        if any(v is None for v in vals):
            return None
        return float(np.mean(vals))

    return ErrorReport(
        seed=None, dimension=first.dimension, mode=first.mode, enforcement=first.enforcement,
        rel_l2_displacement=mean(lambda r: r.rel_l2_displacement),
        rel_l2_alpha=mean(lambda r: r.rel_l2_alpha),
        mean_abs_displacement=mean(lambda r: r.mean_abs_displacement),
        abs_state_error=mean(lambda r: r.abs_state_error),
        mse={k: mean(lambda r, k=k: r.mse.get(k)) for k in first.mse},
        l2={kind: {n: mean(lambda r, kind=kind, n=n: r.l2[kind][n]) for n in per}
            for kind, per in first.l2.items()},
        averaged_temporal=mean(lambda r: r.averaged_temporal),
        n_points=first.n_points, n_temporal=first.n_temporal,
    )


def write_report_csv(reports, path, average: ErrorReport | None = None):
    """One row per seed plus, if given, an ``average`` row."""
    rows = [r.flat() for r in reports]
    if average is not None:
        row = average.flat()
        row["seed"] = "average"
        rows.append(row)
    cols = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def read_report_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
