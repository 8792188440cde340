"""Loss-bucketed dynamic program over hop counts on the explicit socket graph.

Round i extends every path stored in round i-1 by one edge and files the
extension under bucket ceil(loss / delta), keeping the shortest path per
bucket. With delta = eps / (n - 1) the best stored s-t path is within eps
of the dominant path's obj.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import G1, G2Explicit, build_g2_explicit
from .hull import obj as objective
from .psp import PathSummary, sp_implicit


@dataclass
class ParetoConfig:
    epsilon: float
    n_nodes: int
    # drop candidates dominated in both dist and loss by an entry at the same node
    dominance: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def delta(self) -> float:
        return self.epsilon / max(self.n_nodes - 1, 1)


@dataclass
class _Entry:
    dist: float
    loss: float
    trail: tuple | None          # (g2 edge, previous trail) linked list
    born: int


@dataclass
class ParetoStats:
    rounds: int = 0
    delta: float = 0.0
    max_width: int = 0                  # largest bucket count at any (v, i)
    width_bound_ok: bool = True         # width <= ceil(L_max / delta) + 1 everywhere
    entries: int = 0
    g2_nodes: int = 0
    g2_edges: int = 0
    obj_by_round: list = field(default_factory=list)


@dataclass
class ParetoResult:
    path: PathSummary
    obj: float
    stats: ParetoStats
    g2_edges: tuple = ()


def bucket(loss: float, delta: float) -> int:
    return math.ceil(loss / delta) if loss > 0 else 0


def run_pareto(g2: G2Explicit, dest: int, epsilon: float, alpha: float,
               dominance: bool = True, max_rounds: int | None = None) -> ParetoResult:
    """Approximate dominant path from the source to destination ``dest``."""
    cfg = ParetoConfig(epsilon, g2.n_nodes, dominance)
    delta = cfg.delta
    n = g2.n_nodes
    target = g2.dest_node(dest)
    indptr = g2.indptr.tolist()
    e_dst = g2.dst.tolist()
    e_dist = g2.dist.tolist()
    e_loss = g2.loss.tolist()
    tables: list[dict[int, _Entry]] = [dict() for _ in range(n)]
    tables[0][0] = _Entry(0.0, 0.0, None, 0)
    frontier = {0: [tables[0][0]]}
    stats = ParetoStats(delta=delta, g2_nodes=n, g2_edges=g2.n_edges)
    rounds = n - 1 if max_rounds is None else min(max_rounds, n - 1)

    def dominated(table: dict, d: float, l: float) -> bool:
        for e in table.values():
            if e.dist <= d and e.loss <= l:
                return True
        return False

    for i in range(1, rounds + 1):
        changed: dict[int, list] = {}
        for u, entries in frontier.items():
            for k in range(indptr[u], indptr[u + 1]):
                v = e_dst[k]
                for ent in entries:
                    d = ent.dist + e_dist[k]
                    l = ent.loss + e_loss[k]
                    j = bucket(l, delta)
                    table = tables[v]
                    cur = table.get(j)
                    if cur is not None and cur.dist <= d:
                        continue
                    if dominance and dominated(table, d, l):
                        continue
                    new = _Entry(d, l, (k, ent.trail), i)
                    if dominance:
                        for jj in [jj for jj, e in table.items() if e.dist >= d and e.loss >= l]:
                            del table[jj]
                    table[j] = new
                    changed.setdefault(v, []).append(new)
        stats.rounds = i
        for v, new in changed.items():
            table = tables[v]
            width = len(table)
            stats.max_width = max(stats.max_width, width)
            lmax = max(e.loss for e in table.values())
            if width > math.ceil(lmax / delta) + 1:
                stats.width_bound_ok = False
        if tables[target]:
            stats.obj_by_round.append(min(objective(e.dist, e.loss, alpha)
                                          for e in tables[target].values()))
        # only entries created this round (and still stored) need extending
        frontier = {}
        for v, new in changed.items():
            alive = [e for e in new if tables[v].get(bucket(e.loss, delta)) is e]
            if alive:
                frontier[v] = alive
        if not frontier:
            break
    stats.entries = sum(len(t) for t in tables)
    if not tables[target]:
        raise ValueError(f"destination {dest} unreachable")
    best = min(tables[target].values(),
               key=lambda e: (objective(e.dist, e.loss, alpha), e.dist))
    edges = []
    trail = best.trail
    while trail is not None:
        edges.append(trail[0])
        trail = trail[1]
    edges.reverse()
    g1_edges = [int(g2.g1_edge[k]) for k in edges if g2.g1_edge[k] >= 0]
    nodes = (0,) + tuple(int(g2.g1.edge_dst[e]) for e in g1_edges)
    path = PathSummary(best.dist, best.loss, nodes, tuple(g1_edges))
    return ParetoResult(path, objective(best.dist, best.loss, alpha), stats, tuple(edges))


def restrict_g1(g1: G1, dest: int, dcap: float) -> G1:
    """Sub-graph of ``g1`` for one destination, without corners c with
    |s-c| + |c-t| > dcap. Node numbering is unchanged."""
    cap = dcap * (1 + 1e-12) + 1e-9
    cpos = g1.plan.corner_pos
    s = np.asarray(g1.source, float)
    ok = np.zeros(g1.n_nodes, dtype=bool)
    ok[0] = True
    ok[g1.dest_node(dest)] = True
    if len(cpos):
        ok[1:1 + g1.n_corners] = (np.hypot(*(cpos - s).T)
                                  + np.hypot(*(cpos - g1.dests[dest]).T) <= cap)
    keep = ok[g1.edge_src] & ok[g1.edge_dst]
    return G1(g1.plan, g1.source, g1.dests, g1.edge_src[keep], g1.edge_dst[keep],
              g1.edge_dist[keep], g1.edge_pen[keep], g1.edge_side[keep])


def pareto_for_dest(g1: G1, dest: int, epsilon: float, dominance: bool = True,
                    d0: float | None = None) -> ParetoResult:
    """run_pareto on the socket graph of the corners that can matter for ``dest``.

    A path longer than the minimum-loss path d0 also has at least its loss,
    so its obj is worse; corners outside the s-t ellipse of size d0 are
    dropped before G2 is built. Edge ids in the result refer to the
    restricted graph. ``d0`` may be passed in when SP(0) was already run.
    """
    if d0 is None:
        d0 = sp_implicit(g1, 0.0, dest_filter=[dest], target=dest).paths[dest].dist
    g2 = build_g2_explicit(restrict_g1(g1, dest, d0))
    return run_pareto(g2, dest, epsilon, g1.plan.alpha, dominance)


def g2_from_edges(src, dst, dist, loss, n_dests: int = 1):
    """Bare socket-graph stand-in built from raw edge arrays (node 0 is the
    source, nodes 1..n_dests the destinations); useful for small DP checks."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    g = object.__new__(G2Explicit)
    order = np.argsort(src, kind="stable")
    g.g1 = None
    g.n_dests = n_dests
    g.sockets = []
    g.src, g.dst = src[order], dst[order]
    g.dist = np.asarray(dist, float)[order]
    g.loss = np.asarray(loss, float)[order]
    g.g1_edge = np.full(len(src), -1, dtype=np.int64)
    g.n_nodes = int(max(src.max(initial=0), dst.max(initial=0), n_dests)) + 1
    g.indptr = np.zeros(g.n_nodes + 1, dtype=np.int64)
    g.indptr[1:] = np.cumsum(np.bincount(g.src, minlength=g.n_nodes))
    return g
