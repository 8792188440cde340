"""Exact lower-left hull of the (dist, loss) path cloud and the dominant path."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .floorplan import RadioConstants
from .graph import G1, G2Explicit
from .psp import INF, PathSummary, sp_explicit, sp_implicit

MAX_DEPTH = 64
# The left end is taken at this lam instead of 0. Losses that agree up to
# weight rounding (one 90 degree turn against two 45 degree ones) then go
# to the shorter path; a real breakpoint is never this small.
LAMBDA_FLOOR = 1e-9


class HullDepthError(RuntimeError):
    pass


def obj(d: float, loss: float, alpha: float) -> float:
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    return loss + alpha * math.log(d)


def path_loss_db(d: float, loss: float, constants: RadioConstants = RadioConstants()) -> float:
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    c = constants
    return c.reference_loss_db + loss + 10.0 * c.freespace_exponent * math.log10(d / c.reference_distance)


@dataclass
class HullPoint:
    dist: float
    loss: float
    path: PathSummary


@dataclass
class HullResult:
    points: list                  # HullPoint, decreasing dist
    breakpoints: list = field(default_factory=list)
    sp_calls: int = 0

    @property
    def size(self) -> int:
        return len(self.points)


def _tol(*losses: float) -> float:
    return 1e-9 * max(1.0, *(abs(v) for v in losses))


def exact_hull(solve: Callable[[float, float], PathSummary]) -> HullResult:
    """Hull by recursive chord splitting.

    ``solve(lam, dcap)`` returns the shortest path at lam; ``dcap`` is an
    upper bound on the distance of any path that could win at lam, which
    the solver may use for pruning.
    """
    calls = 0

    def run(lam, dcap):
        nonlocal calls
        calls += 1
        return solve(lam, dcap)

    left = run(LAMBDA_FLOOR, INF)
    right = run(INF, left.dist)
    if (left.dist - right.dist <= 1e-9 * max(1.0, left.dist)
            or right.loss - left.loss <= _tol(left.loss, right.loss)):
        only = right if right.loss - left.loss <= _tol(left.loss, right.loss) else left
        return HullResult([HullPoint(only.dist, only.loss, only)], [], calls)

    def split(a: PathSummary, b: PathSummary, depth: int) -> list:
        if depth > MAX_DEPTH:
            raise HullDepthError("hull recursion exceeded depth 64")
        lam = (b.loss - a.loss) / (a.dist - b.dist)
        p = run(lam, a.dist)
        chord = a.loss + lam * a.dist
        if p.loss + lam * p.dist < chord - _tol(a.loss, b.loss):
            return split(a, p, depth + 1) + [p] + split(p, b, depth + 1)
        return []

    inner = split(left, right, 1)
    chain = [left] + inner + [right]
    points = [HullPoint(p.dist, p.loss, p) for p in chain]
    breaks = [(b.loss - a.loss) / (a.dist - b.dist) for a, b in zip(chain, chain[1:])]
    return HullResult(points, breaks, calls)


def exact_hull_explicit(g2: G2Explicit, dest: int) -> HullResult:
    """Hull for one destination using the explicit engine (no pruning)."""
    return exact_hull(lambda lam, dcap: sp_explicit(g2, lam, target=dest).paths[dest])


class HullSolver:
    """Per-destination hulls over one G1 with the implicit engine.

    Any path longer than ``dcap`` loses to the left end of the current
    interval, so corners c with |s-c| + |c-t| > dcap are switched off.
    """

    def __init__(self, g1: G1):
        self.g1 = g1
        cpos = g1.plan.corner_pos
        self.d_sc = np.hypot(*(cpos - np.asarray(g1.source)).T) if len(cpos) else np.zeros(0)

    def solve(self, dest: int, lam: float, dcap: float) -> PathSummary:
        g1 = self.g1
        if math.isinf(dcap):
            corners = None
            dmax_t = None
        else:
            cap = dcap * (1 + 1e-12) + 1e-9
            cpos = g1.plan.corner_pos
            d_ct = np.hypot(*(cpos - g1.dests[dest]).T) if len(cpos) else np.zeros(0)
            corners = self.d_sc + d_ct <= cap
            dmax_t = np.full(g1.n_dests, INF)
            dmax_t[dest] = cap
        res = sp_implicit(g1, lam, dest_filter=[dest], corner_filter=corners, target=dest,
                          d_sc=self.d_sc, dmax_t=dmax_t)
        return res.paths[dest]

    def hull(self, dest: int) -> HullResult:
        return exact_hull(lambda lam, dcap: self.solve(dest, lam, dcap))


def exact_hull_implicit(g1: G1, dest: int) -> HullResult:
    return HullSolver(g1).hull(dest)


def dominant_path(hull: HullResult, alpha: float,
                  constants: RadioConstants = RadioConstants()) -> tuple[PathSummary, float, float]:
    """Hull point minimising obj (smaller dist on ties), its PL and lam* = alpha/d*."""
    if not hull.points:
        raise ValueError("empty hull")
    best = min(hull.points, key=lambda p: (obj(p.dist, p.loss, alpha), p.dist))
    return best.path, path_loss_db(best.dist, best.loss, constants), alpha / best.dist
