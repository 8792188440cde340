"""Measurement grids, heat maps, error evaluation and pruning statistics."""

from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .floorplan import Floorplan, Point
from .gp import GPConfig, expected_unpruned_runs, run_gp, worst_error_bound
from .graph import build_g1
from .hull import HullSolver, dominant_path, obj, path_loss_db
from .pareto import pareto_for_dest
from .psp import loss_and_dist_extremes, sp_implicit


def measurement_grid(plan: Floorplan, spacing: float = 1.0,
                     box=None) -> tuple[np.ndarray, tuple]:
    """Cell centres of a ``spacing`` grid over ``box`` (default: the bounding box).

    Returns the (n, 2) points in row-major order (y outer, x inner) and
    the grid shape (height, width).
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    box = box if box is not None else plan.bounding_box
    if box is None:
        raise ValueError("plan has no walls; an explicit extent is required")
    (x0, y0), (x1, y1) = box
    w = int(math.floor((x1 - x0) / spacing + 1e-9))
    h = int(math.floor((y1 - y0) / spacing + 1e-9))
    xs = x0 + (np.arange(w) + 0.5) * spacing
    ys = y0 + (np.arange(h) + 0.5) * spacing
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()]), (h, w)


@dataclass
class HeatMap:
    origin: Point
    cell: float
    width: int
    height: int
    values: np.ndarray          # (height, width) path loss in dB
    stats: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,y,pl_db\n")
        for i in range(self.height):
            y = self.origin.y + (i + 0.5) * self.cell
            for j in range(self.width):
                x = self.origin.x + (j + 0.5) * self.cell
                buf.write(f"{x:.3f},{y:.3f},{self.values[i, j]:.6f}\n")
        return buf.getvalue()

    def to_pgm(self) -> bytes:
        """8-bit binary PGM, lowest loss white; first row is the largest y."""
        v = self.values[::-1]
        lo, hi = float(v.min()), float(v.max())
        if hi > lo:
            pix = np.rint(255.0 * (hi - v) / (hi - lo))
        else:
            pix = np.full(v.shape, 255.0)
        header = f"P5\n{self.width} {self.height}\n255\n".encode()
        return header + pix.astype(np.uint8).tobytes()


def _exclude_source(points: np.ndarray, source) -> np.ndarray:
    d = np.hypot(*(points - np.asarray(source, float)).T)
    return d > 1e-9


def heatmap(plan: Floorplan, source, spacing: float = 1.0, algo: str = "gp",
            cfg: GPConfig = GPConfig(), epsilon: float = 1.0, tx_dbm: float | None = None,
            box=None) -> HeatMap:
    """Path loss at every grid cell; a cell centred on the source gets PL0."""
    box = box if box is not None else plan.bounding_box
    points, (h, w) = measurement_grid(plan, spacing, box)
    keep = _exclude_source(points, source)
    t0 = time.perf_counter()
    g1 = build_g1(plan, source, points[keep])
    t_build = time.perf_counter() - t0
    stats: dict = {"points": int(len(points)), "build_s": t_build, "algo": algo}
    if algo == "gp":
        res = run_gp(g1, cfg)
        pl = res.pl_db
        stats.update(res.stats.to_dict())
    elif algo == "exact":
        solver = HullSolver(g1)
        pl = np.array([dominant_path(solver.hull(j), plan.alpha, plan.constants)[1]
                       for j in range(g1.n_dests)])
    elif algo == "pareto":
        d0 = sp_implicit(g1, 0.0, want_paths=False).extra["t_dist"]
        pl = np.array([path_loss_db(r.path.dist, r.path.loss, plan.constants) for r in
                       (pareto_for_dest(g1, j, epsilon, d0=float(d0[j]))
                        for j in range(g1.n_dests))])
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    values = np.full(len(points), plan.constants.reference_loss_db)
    values[keep] = pl
    if tx_dbm is not None:
        values = tx_dbm - values
    stats["total_s"] = time.perf_counter() - t0
    (x0, y0), _ = box
    return HeatMap(Point(x0, y0), spacing, w, h, values.reshape(h, w), stats)


def sample_pairs(points: np.ndarray, n_sources: int, per_source: int,
                 rng: np.random.Generator) -> list[tuple[int, np.ndarray]]:
    """Uniform sources, each with distinct uniform destinations != source."""
    out = []
    for s in rng.choice(len(points), size=n_sources, replace=False):
        others = np.delete(np.arange(len(points)), s)
        out.append((int(s), rng.choice(others, size=per_source, replace=False)))
    return out


@dataclass
class PairResult:
    source: int
    dest: int
    exact_obj: float
    hull_size: int
    sp_calls: int
    breakpoints: list
    hull_points: list          # (dist, loss) in decreasing dist
    gp_obj: dict = field(default_factory=dict)          # u -> obj

    def errors(self) -> np.ndarray:
        return np.array([v - self.exact_obj for v in self.gp_obj.values()])


@dataclass
class ErrorReport:
    r: float
    pairs: list
    alpha: float = 20 / math.log(10)

    def all_errors(self) -> np.ndarray:
        if not self.pairs:
            return np.zeros(0)
        return np.concatenate([p.errors() for p in self.pairs])

    def summary(self) -> dict:
        err = self.all_errors()
        sizes = np.array([p.hull_size for p in self.pairs])
        hist = {int(k): int(v) for k, v in zip(*np.unique(sizes, return_counts=True))}
        q = np.quantile(err, [0.5, 0.9, 0.99, 1.0]) if len(err) else [np.nan] * 4
        return {
            "r": self.r,
            "pairs": len(self.pairs),
            "runs": int(len(err)),
            "min_error_db": float(err.min()) if len(err) else float("nan"),
            "mean_error_db": float(err.mean()) if len(err) else float("nan"),
            "q50_db": float(q[0]), "q90_db": float(q[1]), "q99_db": float(q[2]),
            "max_error_db": float(q[3]),
            "fraction_exact": float((err <= 1e-9).mean()) if len(err) else float("nan"),
            "worst_bound_db": worst_error_bound(self.r, self.alpha),
            "mean_hull_size": float(sizes.mean()) if len(sizes) else float("nan"),
            "max_hull_size": int(sizes.max()) if len(sizes) else 0,
            "hull_size_histogram": hist,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("source,dest,u,exact_obj,gp_obj,error_db,hull_size\n")
        for p in self.pairs:
            for u, v in p.gp_obj.items():
                buf.write(f"{p.source},{p.dest},{u:.6f},{p.exact_obj:.9f},{v:.9f},"
                          f"{v - p.exact_obj:.9f},{p.hull_size}\n")
        return buf.getvalue()


def evaluate_pairs(plan: Floorplan, points: np.ndarray, groups, r: float = 2.0,
                   us=(), prune: bool = True) -> ErrorReport:
    """Exact hull per pair, plus GP(r) for every offset in ``us``."""
    alpha = plan.alpha
    pairs = []
    for s, dests in groups:
        g1 = build_g1(plan, points[s], points[dests])
        solver = HullSolver(g1)
        rows = []
        for j, t in enumerate(dests):
            hull = solver.hull(j)
            best = dominant_path(hull, alpha, plan.constants)[0]
            rows.append(PairResult(s, int(t), obj(best.dist, best.loss, alpha), hull.size,
                                   hull.sp_calls, list(hull.breakpoints),
                                   [(p.dist, p.loss) for p in hull.points]))
        if us:
            ext = loss_and_dist_extremes(g1, with_loss_inf=False)
            for u in us:
                res = run_gp(g1, GPConfig(r=r, u=u, prune=prune), ext)
                for j, row in enumerate(rows):
                    row.gp_obj[float(u)] = float(res.obj[j])
        pairs.extend(rows)
    return ErrorReport(r, pairs, alpha)


def pruning_stats(plan: Floorplan, sources, spacing: float = 1.0, r: float = 2.0,
                  u: float | None = None, seed: int = 0) -> dict:
    """Expected unpruned SP(lam_i) runs per measurement point and no-op savings.

    The expectation over a uniform grid offset is 1 + log_r(dmax/dmin);
    one GP run at offset ``u`` (drawn from ``seed`` when None) supplies the
    relaxation counts.
    """
    points, _ = measurement_grid(plan, spacing)
    per_source = []
    for s in sources:
        src = points[s] if np.ndim(s) == 0 else np.asarray(s, float)
        keep = _exclude_source(points, src)
        g1 = build_g1(plan, src, points[keep])
        ext = loss_and_dist_extremes(g1, with_loss_inf=False)
        expect = expected_unpruned_runs(ext.dmin, ext.dmax, r)
        res = run_gp(g1, GPConfig(r=r, u=u, seed=seed), ext)
        st = res.stats
        per_source.append({
            "source": [float(src[0]), float(src[1])],
            "mean_expected_unpruned": float(expect.mean()),
            "max_expected_unpruned": float(expect.max()),
            "mean_unpruned_at_u": float(st.unpruned_runs.mean()),
            "relaxations": int(st.relaxations),
            "explicit_equivalent": int(st.explicit_equivalent),
            "noop_relaxations": int(st.noop_relaxations),
            "skipped_fraction": (1.0 - st.relaxations / st.explicit_equivalent
                                 if st.explicit_equivalent else 0.0),
        })
    means = [p["mean_expected_unpruned"] for p in per_source]
    return {
        "r": r,
        "sources": per_source,
        "mean_expected_unpruned": float(np.mean(means)),
        "max_expected_unpruned": float(max(p["max_expected_unpruned"] for p in per_source)),
        "skipped_fraction": float(np.mean([p["skipped_fraction"] for p in per_source])),
    }
