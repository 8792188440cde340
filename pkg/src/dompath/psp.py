"""Parametric shortest paths under the hybrid weight H = loss + lam * dist.

``lam`` is a float >= 0 or ``math.inf``. At a finite lam labels are
compared lexicographically on (H, dist); at infinity on (dist, loss).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .graph import G1, G2Explicit

INF = math.inf


def check_lambda(lam: float) -> float:
    lam = float(lam)
    if math.isnan(lam) or lam < 0:
        raise ValueError(f"lambda must be >= 0 or inf, got {lam}")
    return lam


def hybrid_weights(dist: np.ndarray, loss: np.ndarray, lam: float) -> np.ndarray:
    """First key component per edge: H for finite lam, dist at infinity."""
    if math.isinf(lam):
        return np.asarray(dist, dtype=float)
    return loss + lam * dist


@dataclass
class PathSummary:
    dist: float
    loss: float
    nodes: tuple          # G1 node ids, starting with the source (0)
    g1_edges: tuple = ()

    def hybrid(self, lam: float) -> float:
        return self.dist if math.isinf(lam) else self.loss + lam * self.dist


@dataclass
class SPResult:
    paths: list                               # PathSummary or None per destination
    relaxation_count: int = 0
    noop_relaxation_count: int = 0
    explicit_equivalent: int = 0              # intra-corner relaxations a full scan would do
    pops: int = 0
    extra: dict = field(default_factory=dict)

    def __getitem__(self, j) -> Optional[PathSummary]:
        return self.paths[j]


def _summary_from_edges(g1: G1, edges: list, dist: float, loss: float) -> PathSummary:
    nodes = (0,) + tuple(int(g1.edge_dst[e]) for e in edges)
    return PathSummary(float(dist), float(loss), nodes, tuple(int(e) for e in edges))


def sp_explicit(g2: G2Explicit, lam: float, node_active: np.ndarray | None = None,
                target: int = -1) -> SPResult:
    """Dijkstra over the materialised socket graph (the reference engine).

    ``target`` is a destination index; when given the search stops once
    that destination is settled and the other entries may be suboptimal.
    """
    lam = check_lambda(lam)
    if node_active is None:
        node_active = np.ones(g2.n_nodes, dtype=bool)
    w1 = hybrid_weights(g2.dist, g2.loss, lam)
    tnode = g2.dest_node(target) if target >= 0 else -1
    out = kernels.explicit_sp(g2.n_nodes, g2.indptr, g2.dst, w1, g2.dist, g2.loss,
                              math.isinf(lam), np.asarray(node_active, dtype=np.uint8), tnode)
    pred = out["pred"]
    paths = []
    for j in range(g2.n_dests):
        v = g2.dest_node(j)
        if not np.isfinite(out["k1"][v]) or (target >= 0 and j != target):
            paths.append(None)
            continue
        edges = []
        while v != 0:
            k = int(pred[v])
            if g2.g1_edge[k] >= 0:
                edges.append(int(g2.g1_edge[k]))
            v = int(g2.src[k])
        edges.reverse()
        paths.append(_summary_from_edges(g2.g1, edges, out["dist"][g2.dest_node(j)],
                                         out["loss"][g2.dest_node(j)]))
    return SPResult(paths, out["relax"], out["noop"],
                    extra={"k1": out["k1"], "dist": out["dist"], "loss": out["loss"]})


def g2_node_mask(g2: G2Explicit, dest_filter=None, corner_filter=None) -> np.ndarray:
    """Active-node mask of G2 matching the filters used by sp_implicit."""
    mask = np.ones(g2.n_nodes, dtype=bool)
    if dest_filter is not None:
        dm = np.zeros(g2.n_dests, dtype=bool)
        dm[np.asarray(list(dest_filter), dtype=int)] = True
        mask[1:1 + g2.n_dests] = dm
    if corner_filter is not None:
        cm = np.zeros(g2.g1.n_corners, dtype=bool)
        cm[np.asarray(list(corner_filter), dtype=int)] = True
        socket_corner = np.array([s.corner for s in g2.sockets], dtype=int)
        mask[1 + g2.n_dests:] = cm[socket_corner] if len(socket_corner) else []
    return mask


def _mask(n: int, subset) -> np.ndarray:
    if subset is None:
        return np.ones(n, dtype=np.uint8)
    m = np.zeros(n, dtype=np.uint8)
    if isinstance(subset, np.ndarray) and subset.dtype == bool:
        m[subset] = 1
    else:
        m[np.asarray(list(subset), dtype=int)] = 1
    return m


def sp_implicit(g1: G1, lam: float, dest_filter=None, corner_filter=None,
                target: int = -1, d_sc: np.ndarray | None = None,
                dmax_t: np.ndarray | None = None, want_paths: bool = True) -> SPResult:
    """Dijkstra on the socket graph without materialising intra-corner edges.

    Filters are index collections or boolean masks over destinations and
    corners. A corner->destination edge is skipped when
    ``d_sc[c] + len(edge) > dmax_t[t]``; by default nothing is skipped.
    """
    lam = check_lambda(lam)
    st = g1.sockets()
    t = st.tables
    nc, nt = g1.n_corners, g1.n_dests
    if d_sc is None:
        d_sc = np.zeros(nc)
    if dmax_t is None:
        dmax_t = np.full(nt, np.inf)
    w1 = hybrid_weights(g1.edge_dist, g1.edge_pen, lam)
    out = kernels.implicit_sp(nc, g1.edge_src, g1.edge_dst, w1, g1.edge_dist, g1.edge_pen,
                              st.head, st.in_sec, st.out_ptr, st.out_edges, st.out_head,
                              st.out_sector, st.run_ccw, st.run_cw, t.sector_off,
                              t.n_sectors, t.pen_flat, t.k_rad,
                              g1.source_edges, math.isinf(lam), _mask(nc, corner_filter),
                              _mask(nt, dest_filter), np.asarray(d_sc, float),
                              np.asarray(dmax_t, float), target)
    paths: list = [None] * nt
    if want_paths:
        pred_t, pred_out = out["t_pred"], out["out_pred"]
        for j in range(nt) if target < 0 else [target]:
            e = int(pred_t[j])
            if e < 0:
                continue
            edges = [e]
            while g1.edge_src[e] != 0:
                e = int(pred_out[e])
                edges.append(e)
            edges.reverse()
            paths[j] = _summary_from_edges(g1, edges, out["t_dist"][j], out["t_loss"][j])
    return SPResult(paths, out["relax"], out["noop"], out["equiv"], out["pops"],
                    extra={k: out[k] for k in ("t_k1", "t_dist", "t_loss", "in_k1",
                                               "in_dist", "in_loss", "noop_excess",
                                               "ties")})


@dataclass
class Extremes:
    """Per-destination distance range of the hull and its loss endpoints."""

    dmin: np.ndarray
    dmax: np.ndarray
    loss0: np.ndarray
    loss_inf: np.ndarray
    sp0: SPResult | None = None


def loss_and_dist_extremes(g1: G1, with_loss_inf: bool = True) -> Extremes:
    """dmin is the straight-line distance; (dmax, loss0) come from SP(0)."""
    dmin = np.hypot(*(g1.dests - np.asarray(g1.source)).T) if g1.n_dests else np.zeros(0)
    sp0 = sp_implicit(g1, 0.0)
    dmax = sp0.extra["t_dist"].copy()
    loss0 = sp0.extra["t_loss"].copy()
    if with_loss_inf:
        loss_inf = sp_implicit(g1, INF, want_paths=False).extra["t_loss"].copy()
    else:
        loss_inf = np.full(g1.n_dests, np.nan)
    return Extremes(dmin, np.maximum(dmax, dmin), loss0, loss_inf, sp0)
