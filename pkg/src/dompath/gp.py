"""GP(r, lam0): geometric grid of lam values with destination and corner pruning.

For every destination t only grid values inside its active interval
A(t) = [a*g/(r*dmax), a*g/dmin] matter, where g = r ln r / (r - 1).
SP(lam_i) is run once per grid value over the destinations whose interval
contains lam_i, with corners switched off when no such destination can
use them within its dmax.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .graph import G1
from .hull import obj as objective
from .hull import path_loss_db
from .psp import Extremes, PathSummary, loss_and_dist_extremes, sp_implicit

PRUNE_SLACK = 1e-12     # relative slack on dmax so rounding never prunes the SP(0) path


def gamma_hat(r: float) -> float:
    if not r > 1:
        raise ValueError(f"r must be > 1, got {r}")
    return r * math.log(r) / (r - 1)


@dataclass
class GPConfig:
    r: float = 2.0
    u: float | None = None        # grid offset in [0, 1); drawn from ``seed`` when None
    seed: int | None = None
    prune: bool = True

    def __post_init__(self):
        if not self.r > 1:
            raise ValueError(f"r must be > 1, got {self.r}")
        if self.u is not None and not 0 <= self.u < 1:
            raise ValueError(f"u must lie in [0, 1), got {self.u}")

    def resolved(self) -> "GPConfig":
        """Copy with ``u`` fixed, drawing it once from the seeded generator."""
        if self.u is not None:
            return self
        u = float(np.random.default_rng(self.seed).random())
        return GPConfig(self.r, u, self.seed, self.prune)

    @property
    def lam0(self) -> float:
        if self.u is None:
            raise ValueError("u not resolved")
        return self.r ** self.u

    @property
    def gamma_hat(self) -> float:
        return gamma_hat(self.r)


def worst_error_bound(r: float, alpha: float) -> float:
    """Largest possible obj excess of GP(r, lam0) over the dominant path."""
    if not r > 1:
        raise ValueError(f"r must be > 1, got {r}")
    return alpha * (-1.0 + math.log(r) / (r - 1) + math.log(r - 1) - math.log(math.log(r)))


def expected_error_bound(r: float, alpha: float) -> float:
    """Bound on the obj excess averaged over a uniform grid offset."""
    if not r > 1:
        raise ValueError(f"r must be > 1, got {r}")
    return alpha * (-0.5 * math.log(r) + math.log(r - 1) - math.log(math.log(r)))


@dataclass(frozen=True)
class ActiveInterval:
    lo: float
    hi: float

    def __contains__(self, lam: float) -> bool:
        return self.lo <= lam <= self.hi


def active_interval(dmin: float, dmax: float, cfg: GPConfig, alpha: float) -> ActiveInterval:
    if not dmin > 0:
        raise ValueError(f"dmin must be positive, got {dmin}")
    if dmax < dmin:
        raise ValueError("dmax < dmin")
    ag = alpha * cfg.gamma_hat
    return ActiveInterval(ag / (cfg.r * dmax), ag / dmin)


def lambda_grid(Dmin: float, Dmax: float, cfg: GPConfig, alpha: float) -> list[float]:
    """All lam0 * r**i inside the union of the active intervals, ascending."""
    iv = active_interval(Dmin, Dmax, cfg, alpha)
    lam0, r = cfg.lam0, cfg.r
    lo_i = math.floor(math.log(iv.lo / lam0) / math.log(r)) - 1
    hi_i = math.ceil(math.log(iv.hi / lam0) / math.log(r)) + 1
    return [lam0 * r ** i for i in range(lo_i, hi_i + 1) if iv.lo <= lam0 * r ** i <= iv.hi]


def destinations_for(lam: float, dmin: np.ndarray, dmax: np.ndarray, cfg: GPConfig,
                     alpha: float) -> np.ndarray:
    """Indices t with lam in A(t)."""
    ag = alpha * cfg.gamma_hat
    return np.flatnonzero((dmin <= ag / lam) & (dmax >= ag / (cfg.r * lam)))


def prune_corners(source, corner_pos: np.ndarray, dest_pos: np.ndarray,
                  dmax: np.ndarray) -> np.ndarray:
    """Mask of corners c with |s-c| + |c-t| <= dmax(t) for some given t."""
    if len(corner_pos) == 0 or len(dest_pos) == 0:
        return np.zeros(len(corner_pos), dtype=bool)
    d_sc = np.hypot(*(corner_pos - np.asarray(source, float)).T)
    cap = dmax * (1 + PRUNE_SLACK) + 1e-9
    keep = np.zeros(len(corner_pos), dtype=bool)
    for lo in range(0, len(dest_pos), 512):
        d_ct = np.hypot(corner_pos[:, None, 0] - dest_pos[None, lo:lo + 512, 0],
                        corner_pos[:, None, 1] - dest_pos[None, lo:lo + 512, 1])
        keep |= (d_sc[:, None] + d_ct <= cap[None, lo:lo + 512]).any(axis=1)
    return keep


def expected_unpruned_runs(dmin: np.ndarray, dmax: np.ndarray, r: float) -> np.ndarray:
    """Mean number of grid values in A(t) over a uniform offset: 1 + log_r(dmax/dmin)."""
    return 1.0 + np.log(np.asarray(dmax) / np.asarray(dmin)) / math.log(r)


@dataclass
class GPStats:
    u: float
    lambdas: list = field(default_factory=list)
    m_sizes: list = field(default_factory=list)         # |M(lam_i)|
    corners_active: list = field(default_factory=list)
    unpruned_runs: np.ndarray | None = None             # per destination
    relaxations: int = 0
    noop_relaxations: int = 0
    explicit_equivalent: int = 0
    wall_clock: float = 0.0

    def to_dict(self) -> dict:
        runs = self.unpruned_runs if self.unpruned_runs is not None else np.zeros(0)
        return {
            "u": self.u,
            "lambdas": [float(v) for v in self.lambdas],
            "m_sizes": [int(v) for v in self.m_sizes],
            "corners_active": [int(v) for v in self.corners_active],
            "mean_unpruned_runs": float(runs.mean()) if len(runs) else 0.0,
            "max_unpruned_runs": int(runs.max()) if len(runs) else 0,
            "relaxations": int(self.relaxations),
            "noop_relaxations": int(self.noop_relaxations),
            "explicit_equivalent": int(self.explicit_equivalent),
            "wall_clock_s": self.wall_clock,
        }


@dataclass
class GPResult:
    paths: list              # PathSummary per destination
    obj: np.ndarray
    pl_db: np.ndarray
    stats: GPStats


def run_gp(g1: G1, cfg: GPConfig = GPConfig(), extremes: Extremes | None = None) -> GPResult:
    """Best path per destination over SP(0) and the grid runs, judged by obj.

    ``extremes`` may be passed in to share one SP(0) run between several
    offsets on the same graph.
    """
    t0 = time.perf_counter()
    cfg = cfg.resolved()
    plan = g1.plan
    alpha = plan.alpha
    nt = g1.n_dests
    stats = GPStats(cfg.u, unpruned_runs=np.zeros(nt, dtype=np.int64))
    if extremes is None:
        extremes = loss_and_dist_extremes(g1, with_loss_inf=False)
    dmin, dmax = extremes.dmin, extremes.dmax
    best: list[PathSummary | None] = list(extremes.sp0.paths)
    best_obj = np.array([objective(p.dist, p.loss, alpha) for p in best])
    if nt == 0:
        return GPResult([], best_obj, best_obj.copy(), stats)

    cpos = plan.corner_pos
    d_sc = np.hypot(*(cpos - np.asarray(g1.source)).T) if len(cpos) else np.zeros(0)
    dmax_cap = dmax * (1 + PRUNE_SLACK) + 1e-9
    for lam in lambda_grid(float(dmin.min()), float(dmax.max()), cfg, alpha):
        members = destinations_for(lam, dmin, dmax, cfg, alpha)
        if len(members) == 0:
            continue
        stats.lambdas.append(lam)
        stats.m_sizes.append(len(members))
        stats.unpruned_runs[members] += 1
        if cfg.prune:
            corners = prune_corners(g1.source, cpos, g1.dests[members], dmax[members])
            res = sp_implicit(g1, lam, dest_filter=members, corner_filter=corners,
                              d_sc=d_sc, dmax_t=dmax_cap)
            stats.corners_active.append(int(corners.sum()))
        else:
            res = sp_implicit(g1, lam)
            members = np.arange(nt)
            stats.corners_active.append(g1.n_corners)
        stats.relaxations += res.relaxation_count
        stats.noop_relaxations += res.noop_relaxation_count
        stats.explicit_equivalent += res.explicit_equivalent
        for j in members:
            p = res.paths[j]
            if p is None:
                continue
            o = objective(p.dist, p.loss, alpha)
            if o < best_obj[j] or (o == best_obj[j] and p.dist < best[j].dist):
                best[j], best_obj[j] = p, o
    pl = np.array([path_loss_db(p.dist, p.loss, plan.constants) for p in best])
    stats.wall_clock = time.perf_counter() - t0
    return GPResult(best, best_obj, pl, stats)
