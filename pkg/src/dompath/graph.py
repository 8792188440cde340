"""Visibility graph G1 and its socket expansion G2.

G1 nodes are numbered: 0 is the source, 1..C the corners, C+1..C+T the
destinations. Every G1 edge ``e = u -> v`` owns up to two sockets: an
outgoing socket at ``u`` and an incoming socket at ``v`` (when those are
corners). G2 replaces each corner by its sockets and connects every incoming
socket to every outgoing socket with a zero-length edge whose loss is the
diffraction plus the penetration of walls swept at the corner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .floorplan import (EPS_ANGLE, EPS_GEO, TWO_PI, Corner, Floorplan, Point,
                        ValidationError, angle_between)


# Edge weights are snapped to multiples of 2**-40 so that path sums are exact
# (below ~8000) and equal-weight paths tie exactly in both engines.
WEIGHT_SCALE = 2.0 ** 40


def quantize(x):
    """Round weights to the nearest multiple of 2**-40."""
    return np.rint(np.asarray(x, dtype=float) * WEIGHT_SCALE) / WEIGHT_SCALE


class Side(IntEnum):
    NONE = 0
    LEFT = 1
    RIGHT = 2


class Direction(IntEnum):
    INCOMING = 0
    OUTGOING = 1


class NodeKind(IntEnum):
    SOURCE = 0
    CORNER = 1
    DEST = 2


def sector_penetration_matrix(corner: Corner) -> np.ndarray:
    """pen[i, j]: cheapest sweep from sector i to sector j at this corner.

    Sector i is the open angular interval between walls i and i+1 (in
    angle order); sweeping ccw from i to j crosses walls i+1..j.
    """
    k = len(corner.wall_angles)
    pens = corner.wall_penetration
    total = math.fsum(pens)
    mat = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            steps = (j - i) % k
            ccw = math.fsum(pens[(i + s) % k] for s in range(1, steps + 1))
            mat[i, j] = min(ccw, total - ccw)
    return mat


def sector_of(corner: Corner, angle: float, side: int = 0) -> int:
    """Sector containing the ray at ``angle``.

    ``side`` resolves rays lying on a wall: +1 takes the sector ccw of the
    wall, -1 the one cw of it.
    """
    angles = corner.wall_angles
    k = len(angles)
    for j, w in enumerate(angles):
        d = abs(angle - w) % TWO_PI
        if min(d, TWO_PI - d) <= EPS_ANGLE:
            return (j - 1) % k if side < 0 else j
    count = sum(1 for w in angles if w <= angle)
    return (count - 1) % k


@dataclass
class CornerTables:
    """Per-corner sector data and the source-independent corner-corner edges."""

    n_sectors: np.ndarray
    sector_off: np.ndarray
    pen_flat: np.ndarray
    k_rad: np.ndarray
    wall_ang: np.ndarray          # (C, kmax), padded with inf
    cc_src: np.ndarray
    cc_dst: np.ndarray
    cc_dist: np.ndarray
    cc_pen: np.ndarray
    cc_side: np.ndarray
    cc_head: np.ndarray | None = None
    cc_out_sec: np.ndarray | None = None
    cc_in_sec: np.ndarray | None = None


def corner_tables(plan: Floorplan) -> CornerTables:
    cached = plan._cache.get("corner_tables")
    if cached is not None:
        return cached
    corners = plan.corners
    n = len(corners)
    n_sec = np.array([len(c.wall_angles) for c in corners], dtype=np.int64)
    off = np.zeros(n, dtype=np.int64)
    if n:
        off[1:] = np.cumsum(n_sec * n_sec)[:-1]
    pen_flat = (np.concatenate([sector_penetration_matrix(c).ravel() for c in corners])
                if n else np.zeros(0))
    kmax = int(n_sec.max()) if n else 1
    wall_ang = np.full((n, kmax), np.inf)
    for i, c in enumerate(corners):
        wall_ang[i, :len(c.wall_angles)] = c.wall_angles
    k_rad = np.array([c.diffraction_db_per_rad for c in corners], dtype=float)

    pos = plan.corner_pos
    pen, blocked = kernels.segment_table(pos, pos, plan.wall_a, plan.wall_b,
                                         plan.wall_pen, pos)
    iu, ju = np.nonzero(~blocked)
    keep = iu != ju
    iu, ju = iu[keep], ju[keep]
    dist = quantize(np.hypot(*(pos[ju] - pos[iu]).T))
    pen = quantize(pen)
    # edges running along a wall get one copy per side of that wall
    wall_pairs = {tuple(sorted(map(int, p))) for p in plan.wall_corner}
    on_wall = np.array([(min(a, b), max(a, b)) in wall_pairs for a, b in zip(iu, ju)],
                       dtype=bool)
    w_i, w_j = iu[on_wall], ju[on_wall]
    src = np.concatenate([iu[~on_wall], w_i, w_i])
    dst = np.concatenate([ju[~on_wall], w_j, w_j])
    dd = np.concatenate([dist[~on_wall], dist[on_wall], dist[on_wall]])
    pp = np.concatenate([pen[iu, ju][~on_wall], pen[w_i, w_j], pen[w_i, w_j]])
    side = np.concatenate([np.zeros((~on_wall).sum(), np.int8),
                           np.full(on_wall.sum(), Side.LEFT, np.int8),
                           np.full(on_wall.sum(), Side.RIGHT, np.int8)])
    order = np.lexsort((side, dst, src))
    tables = CornerTables(n_sec, off, pen_flat, k_rad, wall_ang,
                          src[order] + 1, dst[order] + 1, dd[order], pp[order],
                          side[order])
    # socket data of corner-corner edges does not depend on the source
    src0, dst0 = tables.cc_src - 1, tables.cc_dst - 1
    tables.cc_head = _headings(pos[src0], pos[dst0])
    back = _headings(pos[dst0], pos[src0])
    out_dir = _side_dir(tables.cc_side)
    tables.cc_out_sec = _vector_sectors(tables, src0, tables.cc_head, out_dir)
    tables.cc_in_sec = _vector_sectors(tables, dst0, back, -out_dir)
    plan._cache["corner_tables"] = tables
    return tables


def _side_dir(side: np.ndarray) -> np.ndarray:
    # LEFT of the travel direction is ccw at the tail, cw at the head
    return np.where(side == Side.LEFT, 1, np.where(side == Side.RIGHT, -1, 0))


def _vector_sectors(tables: CornerTables, corner: np.ndarray, angle: np.ndarray,
                    ccw_side: np.ndarray) -> np.ndarray:
    """Vectorised sector_of; ``ccw_side`` is +1/-1 for on-wall rays, 0 otherwise."""
    if len(corner) == 0:
        return np.zeros(0, dtype=np.int64)
    w = tables.wall_ang[corner]
    k = tables.n_sectors[corner]
    with np.errstate(invalid="ignore"):
        d = np.abs(angle[:, None] - w) % TWO_PI
    near = np.minimum(d, TWO_PI - d) <= EPS_ANGLE
    near &= np.isfinite(w)
    count = (w <= angle[:, None]).sum(axis=1)
    sector = (count - 1) % k
    hit = near.any(axis=1)
    j = near.argmax(axis=1)
    on = np.where(ccw_side < 0, (j - 1) % k, j)
    return np.where(hit, on, sector)


def _headings(src_pos: np.ndarray, dst_pos: np.ndarray) -> np.ndarray:
    h = np.arctan2(dst_pos[:, 1] - src_pos[:, 1], dst_pos[:, 0] - src_pos[:, 0])
    return np.where(h < 0, h + TWO_PI, h)


def _nudge_off_walls(p: np.ndarray, plan: Floorplan) -> np.ndarray:
    """Move points lying on a wall by 10*EPS_GEO along the wall normal."""
    if not plan.walls:
        return p
    p = p.copy()
    a, b = plan.wall_a, plan.wall_b
    v = b - a
    length = np.hypot(v[:, 0], v[:, 1])
    for i, q in enumerate(p):
        rel = q - a
        t = (rel * v).sum(axis=1) / length**2
        off = (v[:, 0] * rel[:, 1] - v[:, 1] * rel[:, 0]) / length
        hits = np.flatnonzero((np.abs(off) <= EPS_GEO) & (t >= 0) & (t <= 1))
        if len(hits):
            w = hits[0]
            normal = np.array([-v[w, 1], v[w, 0]]) / length[w]
            p[i] = q + 10 * EPS_GEO * normal
    return p


class G1:
    """Directed visibility graph with per-edge distance and penetration loss."""

    def __init__(self, plan: Floorplan, source: Point, dests: np.ndarray,
                 edge_src, edge_dst, edge_dist, edge_pen, edge_side, cc_range=None):
        self.plan = plan
        self.source = source
        self.dests = dests
        self.n_corners = len(plan.corners)
        self.n_dests = len(dests)
        self.node_pos = np.vstack([np.asarray(source, float)[None, :], plan.corner_pos,
                                   dests]).reshape(-1, 2)
        self.edge_src = edge_src
        self.edge_dst = edge_dst
        self.edge_dist = edge_dist
        self.edge_pen = edge_pen
        self.edge_side = edge_side
        self.source_edges = np.flatnonzero(edge_src == 0).astype(np.int64)
        self.cc_range = cc_range if cc_range is not None else (0, 0)
        self._sockets = None

    @property
    def n_nodes(self) -> int:
        return 1 + self.n_corners + self.n_dests

    @property
    def n_edges(self) -> int:
        return len(self.edge_src)

    def node_kind(self, node: int) -> NodeKind:
        if node == 0:
            return NodeKind.SOURCE
        return NodeKind.CORNER if node <= self.n_corners else NodeKind.DEST

    def corner_node(self, c: int) -> int:
        return 1 + c

    def dest_node(self, j: int) -> int:
        return 1 + self.n_corners + j

    def sockets(self) -> "SocketTables":
        if self._sockets is None:
            self._sockets = SocketTables(self)
        return self._sockets

    def edge_list(self) -> str:
        return dump_edge_list(self.edge_src, self.edge_dst, self.edge_dist, self.edge_pen)


class SocketTables:
    """Heading and sector of every socket, plus angle-sorted outgoing sockets.

    ``head[e]`` is the heading of travel along edge e. ``out_sec[e]`` is the
    sector of e's ray at its tail corner, ``in_sec[e]`` the sector of the ray
    pointing back along e at its head corner (-1 where the endpoint is not a
    corner).
    """

    def __init__(self, g1: G1):
        t = corner_tables(g1.plan)
        nc = g1.n_corners
        src, dst = g1.edge_src, g1.edge_dst
        pos = g1.node_pos
        out_dir = _side_dir(g1.edge_side)
        src_corner = (src >= 1) & (src <= nc)
        dst_corner = (dst >= 1) & (dst <= nc)
        self.head = np.empty(len(src))
        self.out_sec = np.full(len(src), -1, dtype=np.int64)
        self.in_sec = np.full(len(src), -1, dtype=np.int64)
        # the precomputed corner-corner block is reused when G1 embeds it
        lo, hi = g1.cc_range
        if hi > lo:
            self.head[lo:hi] = t.cc_head
            self.out_sec[lo:hi] = t.cc_out_sec
            self.in_sec[lo:hi] = t.cc_in_sec
        rest = np.ones(len(src), dtype=bool)
        rest[lo:hi] = False
        r = np.flatnonzero(rest)
        self.head[r] = _headings(pos[src[r]], pos[dst[r]])
        back = _headings(pos[dst[r]], pos[src[r]])
        sc = r[src_corner[r]]
        self.out_sec[sc] = _vector_sectors(t, src[sc] - 1, self.head[sc], out_dir[sc])
        dc = dst_corner[r]
        self.in_sec[r[dc]] = _vector_sectors(t, dst[r[dc]] - 1, back[dc], -out_dir[r[dc]])
        # outgoing sockets per corner, sorted by heading; at equal heading the
        # cw-side copy precedes the ccw-side copy so sectors stay contiguous
        tie = (out_dir > 0).astype(np.int8)
        eids = np.flatnonzero(src_corner)
        order = np.lexsort((eids, tie[eids], self.head[eids], src[eids]))
        self.out_edges = eids[order].astype(np.int64)
        counts = np.bincount(src[self.out_edges] - 1, minlength=nc) if nc else np.zeros(0, int)
        self.out_ptr = np.zeros(nc + 1, dtype=np.int64)
        self.out_ptr[1:] = np.cumsum(counts)
        self.out_head = self.head[self.out_edges]
        self.out_sector = self.out_sec[self.out_edges]
        self.run_ccw, self.run_cw = _sector_runs(self.out_sector, self.out_ptr)
        ieids = np.flatnonzero(dst_corner)
        self.in_edges = ieids[np.argsort(dst[ieids], kind="stable")].astype(np.int64)
        in_counts = (np.bincount(dst[self.in_edges] - 1, minlength=nc) if nc
                     else np.zeros(0, int))
        self.in_ptr = np.zeros(nc + 1, dtype=np.int64)
        self.in_ptr[1:] = np.cumsum(in_counts)
        self.tables = t


def _sector_runs(sector: np.ndarray, ptr: np.ndarray):
    """Steps from each sorted out-socket to the next one in a different
    sector, going ccw and cw (cyclic per corner, capped at the corner size)."""
    ccw = np.zeros(len(sector), dtype=np.int64)
    cw = np.zeros(len(sector), dtype=np.int64)
    for c in range(len(ptr) - 1):
        p0, p1 = int(ptr[c]), int(ptr[c + 1])
        n = p1 - p0
        if n == 0:
            continue
        sec = sector[p0:p1]
        change = np.flatnonzero(sec != np.roll(sec, -1))   # i and i+1 differ
        if len(change) == 0:
            ccw[p0:p1] = n
            cw[p0:p1] = n
            continue
        idx = np.arange(n)
        # next boundary at or after i going forward
        nxt = np.searchsorted(change, idx)
        b = np.where(nxt < len(change), change[nxt % len(change)], change[0] + n)
        ccw[p0:p1] = b - idx + 1
        # going backward, boundary between i-1 and i at or before i
        starts = (change + 1) % n
        starts.sort()
        prv = np.searchsorted(starts, idx, side="right") - 1
        b2 = np.where(prv >= 0, starts[prv], starts[-1] - n)
        cw[p0:p1] = idx - b2 + 1
    return ccw, cw


def build_g1(plan: Floorplan, source, dests) -> G1:
    """Visibility graph over source, wall corners and destinations.

    Any edge whose open segment passes through a corner is dropped; the
    path through that corner replaces it at equal length.
    """
    source = np.asarray(source, dtype=float).reshape(2)
    dests = np.asarray(dests, dtype=float).reshape(-1, 2)
    if not plan.contains(source):
        raise ValidationError(f"source {tuple(source)} outside the floorplan")
    for d in dests:
        if not plan.contains(d):
            raise ValidationError(f"destination {tuple(d)} outside the floorplan")
    cpos = plan.corner_pos
    if len(cpos) and np.hypot(*(cpos - source).T).min() <= EPS_GEO:
        raise ValidationError("source coincides with a corner")
    if len(dests) > 1 and cKDTree(dests).query_pairs(EPS_GEO):
        raise ValidationError("destinations are not pairwise distinct")
    if len(cpos) and len(dests):
        near = cKDTree(cpos).query(dests)[0] <= EPS_GEO
        if near.any():
            raise ValidationError("destination coincides with a corner")
    source = _nudge_off_walls(source[None, :], plan)[0]
    dests = _nudge_off_walls(dests, plan)

    t = corner_tables(plan)
    nc, nt = len(cpos), len(dests)
    wa, wb, wp = plan.wall_a, plan.wall_b, plan.wall_pen
    src_list, dst_list, dist_list, pen_list, side_list = [], [], [], [], []

    def add(pen, blocked, p_nodes, q_nodes, p_pos, q_pos):
        ii, jj = np.nonzero(~blocked)
        src_list.append(p_nodes[ii])
        dst_list.append(q_nodes[jj])
        dist_list.append(quantize(np.hypot(*(q_pos[jj] - p_pos[ii]).T)))
        pen_list.append(quantize(pen[ii, jj]))
        side_list.append(np.zeros(len(ii), np.int8))

    s_arr = source[None, :]
    corner_nodes = np.arange(1, nc + 1)
    dest_nodes = np.arange(nc + 1, nc + nt + 1)
    zero = np.zeros(1, dtype=np.int64)
    if nc:
        pen, blocked = kernels.segment_table(s_arr, cpos, wa, wb, wp, cpos)
        add(pen, blocked, zero, corner_nodes, s_arr, cpos)
    if nt:
        pen, blocked = kernels.segment_table(s_arr, dests, wa, wb, wp, cpos)
        add(pen, blocked, zero, dest_nodes, s_arr, dests)
    cc_lo = sum(len(a) for a in src_list)
    src_list.append(t.cc_src)
    dst_list.append(t.cc_dst)
    dist_list.append(t.cc_dist)
    pen_list.append(t.cc_pen)
    side_list.append(t.cc_side)
    if nc and nt:
        pen, blocked = kernels.segment_table(cpos, dests, wa, wb, wp, cpos)
        add(pen, blocked, corner_nodes, dest_nodes, cpos, dests)
    return G1(plan, Point(*map(float, source)), dests,
              np.concatenate(src_list).astype(np.int64),
              np.concatenate(dst_list).astype(np.int64),
              np.concatenate(dist_list).astype(float),
              np.concatenate(pen_list).astype(float),
              np.concatenate(side_list).astype(np.int8),
              (cc_lo, cc_lo + len(t.cc_src)))


# -- explicit G2 ----------------------------------------------------------------

@dataclass(frozen=True)
class Socket:
    corner: int
    g1_edge: int
    direction: Direction
    angle: float      # heading of travel along g1_edge
    sector: int


def intra_corner_loss(corner: Corner, in_socket: Socket, out_socket: Socket) -> float:
    """Diffraction plus cheapest swept penetration for turning at a corner."""
    if in_socket.direction != Direction.INCOMING or out_socket.direction != Direction.OUTGOING:
        raise ValueError("expected an incoming and an outgoing socket")
    pen = sector_penetration_matrix(corner)[in_socket.sector, out_socket.sector]
    defl = angle_between(in_socket.angle, out_socket.angle)
    return float(quantize(corner.diffraction_db_per_rad * defl + pen))


class G2Explicit:
    """Materialised socket graph.

    Nodes: 0 source, 1..T destinations, then one node per socket. Edge
    arrays are sorted by tail node with CSR pointers in ``indptr``.
    ``g1_edge[k]`` is the G1 edge an inter-corner G2 edge stands for, -1
    for intra-corner edges.
    """

    def __init__(self, g1: G1, nodes_socket: list, src, dst, dist, loss, g1_edge):
        self.g1 = g1
        self.n_dests = g1.n_dests
        self.sockets: list[Socket] = nodes_socket
        order = np.argsort(src, kind="stable")
        self.src = src[order]
        self.dst = dst[order]
        self.dist = dist[order]
        self.loss = loss[order]
        self.g1_edge = g1_edge[order]
        self.n_nodes = 1 + g1.n_dests + len(nodes_socket)
        self.indptr = np.zeros(self.n_nodes + 1, dtype=np.int64)
        self.indptr[1:] = np.cumsum(np.bincount(self.src, minlength=self.n_nodes))

    @property
    def n_edges(self) -> int:
        return len(self.src)

    def dest_node(self, j: int) -> int:
        return 1 + j

    def with_weights(self, dist: np.ndarray, loss: np.ndarray) -> "G2Explicit":
        """Copy sharing topology, with replaced edge weights (same edge order)."""
        clone = object.__new__(G2Explicit)
        clone.__dict__.update(self.__dict__)
        clone.dist = np.asarray(dist, dtype=float)
        clone.loss = np.asarray(loss, dtype=float)
        return clone

    def edge_list(self) -> str:
        return dump_edge_list(self.src, self.dst, self.dist, self.loss)


def build_g2_explicit(g1: G1) -> G2Explicit:
    st = g1.sockets()
    t = st.tables
    nc, nt = g1.n_corners, g1.n_dests
    src, dst = g1.edge_src, g1.edge_dst
    base = 1 + nt
    sockets: list[Socket] = []
    out_node = np.full(g1.n_edges, -1, dtype=np.int64)
    in_node = np.full(g1.n_edges, -1, dtype=np.int64)
    for e in range(g1.n_edges):
        if 1 <= dst[e] <= nc:
            in_node[e] = base + len(sockets)
            sockets.append(Socket(int(dst[e]) - 1, e, Direction.INCOMING,
                                  float(st.head[e]), int(st.in_sec[e])))
        if 1 <= src[e] <= nc:
            out_node[e] = base + len(sockets)
            sockets.append(Socket(int(src[e]) - 1, e, Direction.OUTGOING,
                                  float(st.head[e]), int(st.out_sec[e])))
    # inter-corner edges keep their G1 weights
    tail = np.where(src == 0, 0, out_node)
    head = np.where(dst > nc, dst - nc, in_node)
    e_src, e_dst = [tail], [head]
    e_dist, e_loss, e_g1 = [g1.edge_dist], [g1.edge_pen], [np.arange(g1.n_edges)]
    for c in range(nc):
        ins = st.in_edges[st.in_ptr[c]:st.in_ptr[c + 1]]
        outs = st.out_edges[st.out_ptr[c]:st.out_ptr[c + 1]]
        if len(ins) == 0 or len(outs) == 0:
            continue
        ii, oo = np.meshgrid(ins, outs, indexing="ij")
        ii, oo = ii.ravel(), oo.ravel()
        delta = np.remainder(st.head[oo] - st.head[ii], TWO_PI)
        defl = np.where(delta <= math.pi, delta, TWO_PI - delta)
        k = int(t.n_sectors[c])
        pen = t.pen_flat[t.sector_off[c] + st.in_sec[ii] * k + st.out_sec[oo]]
        e_src.append(in_node[ii])
        e_dst.append(out_node[oo])
        e_dist.append(np.zeros(len(ii)))
        e_loss.append(quantize(t.k_rad[c] * defl + pen))
        e_g1.append(np.full(len(ii), -1))
    g2 = G2Explicit(g1, sockets, np.concatenate(e_src), np.concatenate(e_dst),
                    np.concatenate(e_dist), np.concatenate(e_loss), np.concatenate(e_g1))
    g2.in_node, g2.out_node = in_node, out_node
    return g2


def dump_edge_list(src, dst, dist, loss) -> str:
    """One ``from to dist loss`` line per edge."""
    return "".join(f"{int(a)} {int(b)} {float(d)!r} {float(w)!r}\n"
                   for a, b, d, w in zip(src, dst, dist, loss))
