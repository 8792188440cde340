"""Pure-Python kernels, used when the compiled extension is unavailable.

Same signatures and results as ``_ckernels``; a few orders of magnitude
slower on the shortest-path loops.
"""

from __future__ import annotations

import heapq
import math
from bisect import bisect_left

import numpy as np

EPS_GEO = 1e-9
TWO_PI = 2.0 * math.pi
WEIGHT_SCALE = 2.0 ** 40        # as in graph.quantize
INF = math.inf


def segment_table(P, Q, wall_a, wall_b, wall_pen, corner_pos):
    """Penetration loss and corner blocking for every segment P[i] -> Q[j].

    ``blocked[i, j]`` is set when the open segment passes within EPS_GEO of a
    corner other than its endpoints, or when the endpoints coincide.
    ``pen`` is only meaningful where ``blocked`` is False.
    """
    P = np.asarray(P, float)
    Q = np.asarray(Q, float)
    n, m = len(P), len(Q)
    pen = np.zeros((n, m))
    blocked = np.zeros((n, m), dtype=bool)
    px, py = wall_a[:, 0], wall_a[:, 1]
    vx, vy = wall_b[:, 0] - px, wall_b[:, 1] - py
    wlen = np.hypot(vx, vy)
    e = EPS_GEO
    for i in range(n):
        ax, ay = P[i]
        ux = Q[:, 0] - ax
        uy = Q[:, 1] - ay
        seg = np.hypot(ux, uy)
        degenerate = seg <= e
        blocked[i] = degenerate
        seg = np.where(degenerate, 1.0, seg)
        if len(wall_a):
            dp = (ux[:, None] * (py - ay) - uy[:, None] * (px - ax)) / seg[:, None]
            dq = (ux[:, None] * (wall_b[:, 1] - ay) - uy[:, None] * (wall_b[:, 0] - ax)) / seg[:, None]
            da = (vx * (ay - py) - vy * (ax - px)) / wlen
            db = (vx * (Q[:, 1, None] - py) - vy * (Q[:, 0, None] - px)) / wlen
            cross = ((((dp > e) & (dq < -e)) | ((dp < -e) & (dq > e)))
                     & (((da > e) & (db < -e)) | ((da < -e) & (db > e))))
            pen[i] = np.where(degenerate, 0.0, (cross * wall_pen).sum(axis=1))
        if len(corner_pos):
            rx = corner_pos[:, 0] - ax
            ry = corner_pos[:, 1] - ay
            t = (ux[:, None] * rx + uy[:, None] * ry) / seg[:, None]
            off = np.abs(ux[:, None] * ry - uy[:, None] * rx) / seg[:, None]
            through = (off <= e) & (t > e) & (t < seg[:, None] - e)
            blocked[i] |= through.any(axis=1)
    return pen, blocked


def _less(a1, a2, b1, b2):
    return a1 < b1 or (a1 == b1 and a2 < b2)


SKIP_ABS = 4.0 / WEIGHT_SCALE
SKIP_REL = 1e-12


def _clear_noop(c1, c2, e1, e2, inf_mode):
    # skip the rest of a sector only on a no-op that is not a near-tie
    if inf_mode:
        return c1 > e1 or (c1 == e1 and c2 >= e2 + SKIP_ABS + SKIP_REL * abs(e2))
    return c1 >= e1 + SKIP_ABS + SKIP_REL * abs(e1)


def implicit_sp(n_corners, edge_src, edge_dst, edge_w1, edge_dist, edge_pen,
                head, in_sec, out_ptr, out_edges, out_head, out_sector,
                run_ccw, run_cw, sector_off, n_sectors, pen_flat, k_rad, source_edges,
                inf_mode, corner_active, dest_active, d_sc, dmax_t, target):
    """Dijkstra over the implicit socket graph.

    Labels are kept on sockets only; intra-corner edges are generated by
    marching outward from the continuation heading in both rotational
    directions, jumping past the rest of a sector at its first no-op
    relaxation. ``equiv`` counts the intra-corner edges a full scan would
    have relaxed.
    """
    n_edges = len(edge_src)
    n_dests = len(dest_active)
    edge_src = edge_src.tolist()
    edge_dst = edge_dst.tolist()
    edge_w1 = edge_w1.tolist()
    edge_dist = edge_dist.tolist()
    edge_pen = edge_pen.tolist()
    head = head.tolist()
    in_sec = in_sec.tolist()
    out_ptr = out_ptr.tolist()
    out_edges = out_edges.tolist()
    out_head_l = out_head.tolist()
    out_sector = out_sector.tolist()
    run_ccw = run_ccw.tolist()
    run_cw = run_cw.tolist()
    sector_off = sector_off.tolist()
    n_sectors = n_sectors.tolist()
    pen_flat = pen_flat.tolist()
    k_rad = k_rad.tolist()
    corner_active = corner_active.tolist()
    dest_active = dest_active.tolist()
    d_sc = d_sc.tolist()
    dmax_t = dmax_t.tolist()

    in_k1 = [INF] * n_edges
    in_dist = [INF] * n_edges
    in_loss = [INF] * n_edges
    out_k1 = [INF] * n_edges
    out_dist = [INF] * n_edges
    out_loss = [INF] * n_edges
    out_pred = [-1] * n_edges
    done = [False] * n_edges
    t_k1 = [INF] * n_dests
    t_dist = [INF] * n_dests
    t_loss = [INF] * n_dests
    t_pred = [-1] * n_dests
    heap = []
    relax = noop = equiv = pops = 0
    noop_excess = -1      # max over pops of (sector-skipping no-ops - sectors)
    ties = 0              # near-tie no-ops, which do not skip

    def key2(dist, loss):
        return loss if inf_mode else dist

    def offer(e, k1, dist, loss):
        """Label arriving at the far end of edge e (already including e)."""
        v = edge_dst[e]
        if v <= n_corners:
            if _less(k1, key2(dist, loss), in_k1[e], key2(in_dist[e], in_loss[e])):
                in_k1[e], in_dist[e], in_loss[e] = k1, dist, loss
                heapq.heappush(heap, (k1, key2(dist, loss), e))
        else:
            t = v - n_corners - 1
            if _less(k1, key2(dist, loss), t_k1[t], key2(t_dist[t], t_loss[t])):
                t_k1[t], t_dist[t], t_loss[t] = k1, dist, loss
                t_pred[t] = e

    def usable(e):
        v = edge_dst[e]
        if v <= n_corners:
            return corner_active[v - 1]
        t = v - n_corners - 1
        if not dest_active[t]:
            return False
        c = edge_src[e]
        return c == 0 or d_sc[c - 1] + edge_dist[e] <= dmax_t[t]

    for e in source_edges.tolist():
        if usable(e):
            offer(e, edge_w1[e], edge_dist[e], edge_pen[e])

    while heap:
        k1, k2, e = heapq.heappop(heap)
        if done[e] or k1 != in_k1[e] or k2 != key2(in_dist[e], in_loss[e]):
            continue
        if target >= 0 and not _less(k1, k2, t_k1[target], key2(t_dist[target], t_loss[target])):
            break
        done[e] = True
        pops += 1
        c = edge_dst[e] - 1
        p0, p1 = out_ptr[c], out_ptr[c + 1]
        n_out = p1 - p0
        if n_out == 0:
            continue
        theta = head[e]
        kc = k_rad[c]
        ns = n_sectors[c]
        pen_row = sector_off[c] + in_sec[e] * ns
        base_k1, base_dist, base_loss = in_k1[e], in_dist[e], in_loss[e]
        start = bisect_left(out_head_l, theta, p0, p1) - p0
        equiv += n_out
        noop_here = 0
        for ccw in (True, False):
            count = 0 if ccw else 1
            run = run_ccw if ccw else run_cw
            # cw covers start-1 down to start-n_out, so it can reach the slot ccw broke on
            while count < n_out + (0 if ccw else 1):
                j = p0 + ((start + count) % n_out if ccw else (start - count) % n_out)
                delta = (out_head_l[j] - theta) % TWO_PI
                if ccw and delta > math.pi:
                    break
                if not ccw and delta <= math.pi:
                    break
                count += 1
                oe = out_edges[j]
                if not usable(oe):
                    continue
                defl = delta if delta <= math.pi else TWO_PI - delta
                cost = round((kc * defl + pen_flat[pen_row + out_sector[j]]) * WEIGHT_SCALE) / WEIGHT_SCALE
                if inf_mode:
                    c1, cd, cl = base_k1, base_dist, base_loss + cost
                else:
                    c1, cd, cl = base_k1 + cost, base_dist, base_loss + cost
                relax += 1
                if _less(c1, key2(cd, cl), out_k1[oe], key2(out_dist[oe], out_loss[oe])):
                    out_k1[oe], out_dist[oe], out_loss[oe] = c1, cd, cl
                    out_pred[oe] = e
                    offer(oe, c1 + edge_w1[oe], cd + edge_dist[oe], cl + edge_pen[oe])
                else:
                    noop += 1
                    if not _clear_noop(c1, key2(cd, cl), out_k1[oe],
                                       key2(out_dist[oe], out_loss[oe]), inf_mode):
                        ties += 1
                        continue
                    # the rest of this sector cannot improve either
                    noop_here += 1
                    count += run[j] - 1
        noop_excess = max(noop_excess, noop_here - ns)

    return {
        "t_k1": np.array(t_k1), "t_dist": np.array(t_dist), "t_loss": np.array(t_loss),
        "t_pred": np.array(t_pred, dtype=np.int64),
        "in_k1": np.array(in_k1), "in_dist": np.array(in_dist), "in_loss": np.array(in_loss),
        "out_pred": np.array(out_pred, dtype=np.int64),
        "relax": relax, "noop": noop, "equiv": equiv, "pops": pops,
        "noop_excess": noop_excess, "ties": ties,
    }


def explicit_sp(n_nodes, indptr, edge_dst, edge_w1, edge_dist, edge_loss, inf_mode,
                node_active, target):
    """Plain lazy-deletion Dijkstra from node 0 over a CSR graph."""
    indptr = indptr.tolist()
    edge_dst = edge_dst.tolist()
    edge_w1 = edge_w1.tolist()
    edge_dist = edge_dist.tolist()
    edge_loss = edge_loss.tolist()
    active = node_active.tolist()
    k1 = [INF] * n_nodes
    dist = [INF] * n_nodes
    loss = [INF] * n_nodes
    pred = [-1] * n_nodes
    done = [False] * n_nodes
    k1[0] = dist[0] = loss[0] = 0.0
    heap = [(0.0, 0.0, 0)]
    relax = noop = 0

    def key2(d, l):
        return l if inf_mode else d

    while heap:
        a1, a2, v = heapq.heappop(heap)
        if done[v] or a1 != k1[v] or a2 != key2(dist[v], loss[v]):
            continue
        if target >= 0 and not _less(a1, a2, k1[target], key2(dist[target], loss[target])):
            break
        done[v] = True
        for k in range(indptr[v], indptr[v + 1]):
            w = edge_dst[k]
            if not active[w]:
                continue
            c1 = a1 + edge_w1[k]
            cd = dist[v] + edge_dist[k]
            cl = loss[v] + edge_loss[k]
            relax += 1
            if _less(c1, key2(cd, cl), k1[w], key2(dist[w], loss[w])):
                k1[w], dist[w], loss[w] = c1, cd, cl
                pred[w] = k
                heapq.heappush(heap, (c1, key2(cd, cl), w))
            else:
                noop += 1
    return {"k1": np.array(k1), "dist": np.array(dist), "loss": np.array(loss),
            "pred": np.array(pred, dtype=np.int64), "relax": relax, "noop": noop}


def label_correcting_sp(n_nodes, indptr, edge_dst, edge_w1, edge_dist, edge_loss, inf_mode):
    """Queue-based Bellman-Ford from node 0; tolerates negative edges.

    Sets ``negative_cycle`` when some predecessor chain reaches n_nodes
    edges, in which case the labels are meaningless.
    """
    from collections import deque

    indptr = indptr.tolist()
    edge_dst = edge_dst.tolist()
    edge_w1 = edge_w1.tolist()
    edge_dist = edge_dist.tolist()
    edge_loss = edge_loss.tolist()
    k1 = [INF] * n_nodes
    dist = [INF] * n_nodes
    loss = [INF] * n_nodes
    pred = [-1] * n_nodes
    hops = [0] * n_nodes
    queued = [False] * n_nodes
    k1[0] = dist[0] = loss[0] = 0.0
    queue = deque([0])
    queued[0] = True
    negative = False

    def key2(d, l):
        return l if inf_mode else d

    while queue and not negative:
        v = queue.popleft()
        queued[v] = False
        for k in range(indptr[v], indptr[v + 1]):
            w = edge_dst[k]
            c1 = k1[v] + edge_w1[k]
            cd = dist[v] + edge_dist[k]
            cl = loss[v] + edge_loss[k]
            if _less(c1, key2(cd, cl), k1[w], key2(dist[w], loss[w])):
                k1[w], dist[w], loss[w] = c1, cd, cl
                pred[w] = k
                hops[w] = hops[v] + 1
                if hops[w] >= n_nodes:
                    negative = True
                    break
                if not queued[w]:
                    queued[w] = True
                    queue.append(w)
    return {"k1": np.array(k1), "dist": np.array(dist), "loss": np.array(loss),
            "pred": np.array(pred, dtype=np.int64), "negative_cycle": negative}
