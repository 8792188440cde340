# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: segment/wall tables and the two Dijkstra engines.

Mirrors ``_pykernels`` operation for operation so both backends produce
identical labels.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, fmod, copysign, rint, INFINITY, M_PI
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

cdef double EPS_GEO = 1e-9
cdef double TWO_PI = 2.0 * M_PI
cdef double WEIGHT_SCALE = 1099511627776.0      # 2**40, as in graph.quantize


cdef inline double pymod(double x, double y) nogil:
    # Python float % semantics for y > 0
    cdef double m = fmod(x, y)
    if m != 0.0:
        if (y < 0) != (m < 0):
            m += y
    else:
        m = copysign(0.0, y)
    return m


def segment_table(P, Q, wall_a, wall_b, wall_pen, corner_pos):
    cdef double[:, ::1] p = np.ascontiguousarray(P, dtype=np.float64).reshape(-1, 2)
    cdef double[:, ::1] q = np.ascontiguousarray(Q, dtype=np.float64).reshape(-1, 2)
    cdef double[:, ::1] wa = np.ascontiguousarray(wall_a, dtype=np.float64).reshape(-1, 2)
    cdef double[:, ::1] wb = np.ascontiguousarray(wall_b, dtype=np.float64).reshape(-1, 2)
    cdef double[::1] wp = np.ascontiguousarray(wall_pen, dtype=np.float64)
    cdef double[:, ::1] cp = np.ascontiguousarray(corner_pos, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t n = p.shape[0], m = q.shape[0], nw = wa.shape[0], nc = cp.shape[0]
    pen_arr = np.zeros((n, m))
    blk_arr = np.zeros((n, m), dtype=np.uint8)
    cdef double[:, ::1] pen = pen_arr
    cdef unsigned char[:, ::1] blk = blk_arr
    cdef double[::1] wlen = np.empty(nw)
    cdef Py_ssize_t i, j, w, c
    cdef double ax, ay, bx, by, ux, uy, seg, dp, dq, da, db, vx, vy, rx, ry, t, off, total
    cdef double e = EPS_GEO
    for w in range(nw):
        vx = wb[w, 0] - wa[w, 0]
        vy = wb[w, 1] - wa[w, 1]
        wlen[w] = sqrt(vx * vx + vy * vy)
    with nogil:
        for i in range(n):
            ax = p[i, 0]
            ay = p[i, 1]
            for j in range(m):
                bx = q[j, 0]
                by = q[j, 1]
                ux = bx - ax
                uy = by - ay
                seg = sqrt(ux * ux + uy * uy)
                if seg <= e:
                    blk[i, j] = 1
                    continue
                for c in range(nc):
                    rx = cp[c, 0] - ax
                    ry = cp[c, 1] - ay
                    off = fabs(ux * ry - uy * rx) / seg
                    if off <= e:
                        t = (ux * rx + uy * ry) / seg
                        if t > e and t < seg - e:
                            blk[i, j] = 1
                            break
                if blk[i, j]:
                    continue
                total = 0.0
                for w in range(nw):
                    dp = (ux * (wa[w, 1] - ay) - uy * (wa[w, 0] - ax)) / seg
                    dq = (ux * (wb[w, 1] - ay) - uy * (wb[w, 0] - ax)) / seg
                    if not ((dp > e and dq < -e) or (dp < -e and dq > e)):
                        continue
                    vx = wb[w, 0] - wa[w, 0]
                    vy = wb[w, 1] - wa[w, 1]
                    da = (vx * (ay - wa[w, 1]) - vy * (ax - wa[w, 0])) / wlen[w]
                    db = (vx * (by - wa[w, 1]) - vy * (bx - wa[w, 0])) / wlen[w]
                    if (da > e and db < -e) or (da < -e and db > e):
                        total += wp[w]
                pen[i, j] = total
    return pen_arr, blk_arr.astype(bool)


# -- binary heap keyed by (k1, k2, id) ---------------------------------------

cdef struct Entry:
    double k1
    double k2
    long long id


cdef struct Heap:
    Entry* data
    Py_ssize_t size
    Py_ssize_t cap


cdef inline bint entry_less(Entry a, Entry b) nogil:
    if a.k1 != b.k1:
        return a.k1 < b.k1
    if a.k2 != b.k2:
        return a.k2 < b.k2
    return a.id < b.id


cdef int heap_push(Heap* h, double k1, double k2, long long id) nogil:
    cdef Py_ssize_t i, parent
    cdef Entry* grown
    cdef Entry item
    if h.size == h.cap:
        h.cap = h.cap * 2 + 16
        grown = <Entry*> realloc(h.data, h.cap * sizeof(Entry))
        if grown == NULL:
            return -1
        h.data = grown
    item.k1 = k1
    item.k2 = k2
    item.id = id
    i = h.size
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if entry_less(item, h.data[parent]):
            h.data[i] = h.data[parent]
            i = parent
        else:
            break
    h.data[i] = item
    return 0


cdef Entry heap_pop(Heap* h) nogil:
    cdef Entry top = h.data[0]
    cdef Entry last
    cdef Py_ssize_t i = 0, child
    h.size -= 1
    if h.size > 0:
        last = h.data[h.size]
        while True:
            child = 2 * i + 1
            if child >= h.size:
                break
            if child + 1 < h.size and entry_less(h.data[child + 1], h.data[child]):
                child += 1
            if entry_less(h.data[child], last):
                h.data[i] = h.data[child]
                i = child
            else:
                break
        h.data[i] = last
    return top


cdef inline bint key_less(double a1, double a2, double b1, double b2) nogil:
    return a1 < b1 or (a1 == b1 and a2 < b2)


cdef double SKIP_ABS = 4.0 / WEIGHT_SCALE
cdef double SKIP_REL = 1e-12


cdef inline bint clear_noop(double c1, double c2, double e1, double e2, bint inf_mode) nogil:
    # a no-op lets the march skip the rest of the sector only when it is not a
    # near-tie: rounding of the quantized intra costs is a few quanta at most
    if inf_mode:
        return c1 > e1 or (c1 == e1 and c2 >= e2 + SKIP_ABS + SKIP_REL * fabs(e2))
    return c1 >= e1 + SKIP_ABS + SKIP_REL * fabs(e1)


def implicit_sp(long long n_corners, edge_src_a, edge_dst_a, edge_w1_a, edge_dist_a,
                edge_pen_a, head_a, in_sec_a, out_ptr_a, out_edges_a, out_head_a,
                out_sector_a, run_ccw_a, run_cw_a, sector_off_a, n_sectors_a, pen_flat_a, k_rad_a,
                source_edges_a, bint inf_mode, corner_active_a, dest_active_a,
                d_sc_a, dmax_t_a, long long target):
    cdef long long[::1] edge_src = np.ascontiguousarray(edge_src_a, dtype=np.int64)
    cdef long long[::1] edge_dst = np.ascontiguousarray(edge_dst_a, dtype=np.int64)
    cdef double[::1] edge_w1 = np.ascontiguousarray(edge_w1_a, dtype=np.float64)
    cdef double[::1] edge_dist = np.ascontiguousarray(edge_dist_a, dtype=np.float64)
    cdef double[::1] edge_pen = np.ascontiguousarray(edge_pen_a, dtype=np.float64)
    cdef double[::1] head = np.ascontiguousarray(head_a, dtype=np.float64)
    cdef long long[::1] in_sec = np.ascontiguousarray(in_sec_a, dtype=np.int64)
    cdef long long[::1] out_ptr = np.ascontiguousarray(out_ptr_a, dtype=np.int64)
    cdef long long[::1] out_edges = np.ascontiguousarray(out_edges_a, dtype=np.int64)
    cdef double[::1] out_head = np.ascontiguousarray(out_head_a, dtype=np.float64)
    cdef long long[::1] out_sector = np.ascontiguousarray(out_sector_a, dtype=np.int64)
    cdef long long[::1] run_ccw = np.ascontiguousarray(run_ccw_a, dtype=np.int64)
    cdef long long[::1] run_cw = np.ascontiguousarray(run_cw_a, dtype=np.int64)
    cdef long long[::1] sector_off = np.ascontiguousarray(sector_off_a, dtype=np.int64)
    cdef long long[::1] n_sectors = np.ascontiguousarray(n_sectors_a, dtype=np.int64)
    cdef double[::1] pen_flat = np.ascontiguousarray(pen_flat_a, dtype=np.float64)
    cdef double[::1] k_rad = np.ascontiguousarray(k_rad_a, dtype=np.float64)
    cdef long long[::1] source_edges = np.ascontiguousarray(source_edges_a, dtype=np.int64)
    cdef unsigned char[::1] corner_active = np.ascontiguousarray(corner_active_a, dtype=np.uint8)
    cdef unsigned char[::1] dest_active = np.ascontiguousarray(dest_active_a, dtype=np.uint8)
    cdef double[::1] d_sc = np.ascontiguousarray(d_sc_a, dtype=np.float64)
    cdef double[::1] dmax_t = np.ascontiguousarray(dmax_t_a, dtype=np.float64)

    cdef Py_ssize_t n_edges = edge_src.shape[0], n_dests = dest_active.shape[0]
    in_k1_a = np.full(n_edges, np.inf)
    in_dist_a = np.full(n_edges, np.inf)
    in_loss_a = np.full(n_edges, np.inf)
    out_k1_a = np.full(n_edges, np.inf)
    out_dist_a = np.full(n_edges, np.inf)
    out_loss_a = np.full(n_edges, np.inf)
    out_pred_a = np.full(n_edges, -1, dtype=np.int64)
    done_a = np.zeros(n_edges, dtype=np.uint8)
    t_k1_a = np.full(n_dests, np.inf)
    t_dist_a = np.full(n_dests, np.inf)
    t_loss_a = np.full(n_dests, np.inf)
    t_pred_a = np.full(n_dests, -1, dtype=np.int64)
    cdef double[::1] in_k1 = in_k1_a, in_dist = in_dist_a, in_loss = in_loss_a
    cdef double[::1] out_k1 = out_k1_a, out_dist = out_dist_a, out_loss = out_loss_a
    cdef long long[::1] out_pred = out_pred_a, t_pred = t_pred_a
    cdef unsigned char[::1] done = done_a
    cdef double[::1] t_k1 = t_k1_a, t_dist = t_dist_a, t_loss = t_loss_a

    cdef Heap h
    h.data = NULL
    h.size = 0
    h.cap = 0
    cdef long long relax = 0, noop = 0, equiv = 0, pops = 0
    cdef long long noop_here, noop_excess = -1, ties = 0
    cdef Py_ssize_t i, e, oe, c, p0, p1, n_out, lo, hi, mid, start, count, j
    cdef long long v, t, ns, pen_row
    cdef int direction
    cdef bint ccw
    cdef double theta, kc, delta, defl, cost, c1, cd, cl, b1, bd, bl, n1, nd, nl
    cdef Entry top
    cdef int err = 0

    with nogil:
        for i in range(source_edges.shape[0]):
            e = source_edges[i]
            v = edge_dst[e]
            if v <= n_corners:
                if not corner_active[v - 1]:
                    continue
                n1 = edge_w1[e]
                nd = edge_dist[e]
                nl = edge_pen[e]
                if key_less(n1, nl if inf_mode else nd, in_k1[e],
                            in_loss[e] if inf_mode else in_dist[e]):
                    in_k1[e] = n1
                    in_dist[e] = nd
                    in_loss[e] = nl
                    err |= heap_push(&h, n1, nl if inf_mode else nd, e)
            else:
                t = v - n_corners - 1
                if not dest_active[t]:
                    continue
                n1 = edge_w1[e]
                nd = edge_dist[e]
                nl = edge_pen[e]
                if key_less(n1, nl if inf_mode else nd, t_k1[t],
                            t_loss[t] if inf_mode else t_dist[t]):
                    t_k1[t] = n1
                    t_dist[t] = nd
                    t_loss[t] = nl
                    t_pred[t] = e

        while h.size > 0 and err == 0:
            top = heap_pop(&h)
            e = top.id
            if done[e] or top.k1 != in_k1[e] or top.k2 != (in_loss[e] if inf_mode else in_dist[e]):
                continue
            if target >= 0 and not key_less(top.k1, top.k2, t_k1[target],
                                            t_loss[target] if inf_mode else t_dist[target]):
                break
            done[e] = 1
            pops += 1
            c = edge_dst[e] - 1
            p0 = out_ptr[c]
            p1 = out_ptr[c + 1]
            n_out = p1 - p0
            if n_out == 0:
                continue
            theta = head[e]
            kc = k_rad[c]
            ns = n_sectors[c]
            pen_row = sector_off[c] + in_sec[e] * ns
            b1 = in_k1[e]
            bd = in_dist[e]
            bl = in_loss[e]
            lo = p0
            hi = p1
            while lo < hi:
                mid = (lo + hi) >> 1
                if out_head[mid] < theta:
                    lo = mid + 1
                else:
                    hi = mid
            start = lo - p0
            equiv += n_out
            noop_here = 0
            for direction in range(2):
                ccw = direction == 0
                count = 0 if ccw else 1
                # cw covers start-1 down to start-n_out, so it can reach the slot ccw broke on
                while count < n_out + (0 if ccw else 1):
                    if ccw:
                        j = p0 + (start + count) % n_out
                    else:
                        j = p0 + ((start - count) % n_out + n_out) % n_out
                    delta = pymod(out_head[j] - theta, TWO_PI)
                    if ccw and delta > M_PI:
                        break
                    if (not ccw) and delta <= M_PI:
                        break
                    count += 1
                    oe = out_edges[j]
                    v = edge_dst[oe]
                    if v <= n_corners:
                        if not corner_active[v - 1]:
                            continue
                    else:
                        t = v - n_corners - 1
                        if not dest_active[t]:
                            continue
                        if not (d_sc[c] + edge_dist[oe] <= dmax_t[t]):
                            continue
                    if delta <= M_PI:
                        defl = delta
                    else:
                        defl = TWO_PI - delta
                    cost = rint((kc * defl + pen_flat[pen_row + out_sector[j]]) * WEIGHT_SCALE) / WEIGHT_SCALE
                    if inf_mode:
                        c1 = b1
                    else:
                        c1 = b1 + cost
                    cd = bd
                    cl = bl + cost
                    relax += 1
                    if key_less(c1, cl if inf_mode else cd, out_k1[oe],
                                out_loss[oe] if inf_mode else out_dist[oe]):
                        out_k1[oe] = c1
                        out_dist[oe] = cd
                        out_loss[oe] = cl
                        out_pred[oe] = e
                        n1 = c1 + edge_w1[oe]
                        nd = cd + edge_dist[oe]
                        nl = cl + edge_pen[oe]
                        if v <= n_corners:
                            if key_less(n1, nl if inf_mode else nd, in_k1[oe],
                                        in_loss[oe] if inf_mode else in_dist[oe]):
                                in_k1[oe] = n1
                                in_dist[oe] = nd
                                in_loss[oe] = nl
                                err |= heap_push(&h, n1, nl if inf_mode else nd, oe)
                        else:
                            if key_less(n1, nl if inf_mode else nd, t_k1[t],
                                        t_loss[t] if inf_mode else t_dist[t]):
                                t_k1[t] = n1
                                t_dist[t] = nd
                                t_loss[t] = nl
                                t_pred[t] = oe
                    else:
                        noop += 1
                        if not clear_noop(c1, cl if inf_mode else cd, out_k1[oe],
                                          out_loss[oe] if inf_mode else out_dist[oe], inf_mode):
                            ties += 1
                            continue
                        noop_here += 1
                        if ccw:
                            count += run_ccw[j] - 1
                        else:
                            count += run_cw[j] - 1
            if noop_here - ns > noop_excess:
                noop_excess = noop_here - ns
    free(h.data)
    if err:
        raise MemoryError("heap allocation failed")
    return {
        "t_k1": t_k1_a, "t_dist": t_dist_a, "t_loss": t_loss_a, "t_pred": t_pred_a,
        "in_k1": in_k1_a, "in_dist": in_dist_a, "in_loss": in_loss_a,
        "out_pred": out_pred_a,
        "relax": relax, "noop": noop, "equiv": equiv, "pops": pops,
        "noop_excess": noop_excess, "ties": ties,
    }


def explicit_sp(long long n_nodes, indptr_a, edge_dst_a, edge_w1_a, edge_dist_a,
                edge_loss_a, bint inf_mode, node_active_a, long long target):
    cdef long long[::1] indptr = np.ascontiguousarray(indptr_a, dtype=np.int64)
    cdef long long[::1] edge_dst = np.ascontiguousarray(edge_dst_a, dtype=np.int64)
    cdef double[::1] edge_w1 = np.ascontiguousarray(edge_w1_a, dtype=np.float64)
    cdef double[::1] edge_dist = np.ascontiguousarray(edge_dist_a, dtype=np.float64)
    cdef double[::1] edge_loss = np.ascontiguousarray(edge_loss_a, dtype=np.float64)
    cdef unsigned char[::1] active = np.ascontiguousarray(node_active_a, dtype=np.uint8)
    k1_a = np.full(n_nodes, np.inf)
    dist_a = np.full(n_nodes, np.inf)
    loss_a = np.full(n_nodes, np.inf)
    pred_a = np.full(n_nodes, -1, dtype=np.int64)
    done_a = np.zeros(n_nodes, dtype=np.uint8)
    cdef double[::1] k1 = k1_a, dist = dist_a, loss = loss_a
    cdef long long[::1] pred = pred_a
    cdef unsigned char[::1] done = done_a
    cdef Heap h
    h.data = NULL
    h.size = 0
    h.cap = 0
    cdef long long relax = 0, noop = 0
    cdef Py_ssize_t v, k, w
    cdef double a1, a2, c1, cd, cl
    cdef Entry top
    cdef int err = 0
    k1[0] = 0.0
    dist[0] = 0.0
    loss[0] = 0.0
    with nogil:
        err |= heap_push(&h, 0.0, 0.0, 0)
        while h.size > 0 and err == 0:
            top = heap_pop(&h)
            v = top.id
            a1 = top.k1
            a2 = top.k2
            if done[v] or a1 != k1[v] or a2 != (loss[v] if inf_mode else dist[v]):
                continue
            if target >= 0 and not key_less(a1, a2, k1[target],
                                            loss[target] if inf_mode else dist[target]):
                break
            done[v] = 1
            for k in range(indptr[v], indptr[v + 1]):
                w = edge_dst[k]
                if not active[w]:
                    continue
                c1 = a1 + edge_w1[k]
                cd = dist[v] + edge_dist[k]
                cl = loss[v] + edge_loss[k]
                relax += 1
                if key_less(c1, cl if inf_mode else cd, k1[w], loss[w] if inf_mode else dist[w]):
                    k1[w] = c1
                    dist[w] = cd
                    loss[w] = cl
                    pred[w] = k
                    err |= heap_push(&h, c1, cl if inf_mode else cd, w)
                else:
                    noop += 1
    free(h.data)
    if err:
        raise MemoryError("heap allocation failed")
    return {"k1": k1_a, "dist": dist_a, "loss": loss_a, "pred": pred_a,
            "relax": relax, "noop": noop}


def label_correcting_sp(long long n_nodes, indptr_a, edge_dst_a, edge_w1_a, edge_dist_a,
                        edge_loss_a, bint inf_mode):
    cdef long long[::1] indptr = np.ascontiguousarray(indptr_a, dtype=np.int64)
    cdef long long[::1] edge_dst = np.ascontiguousarray(edge_dst_a, dtype=np.int64)
    cdef double[::1] edge_w1 = np.ascontiguousarray(edge_w1_a, dtype=np.float64)
    cdef double[::1] edge_dist = np.ascontiguousarray(edge_dist_a, dtype=np.float64)
    cdef double[::1] edge_loss = np.ascontiguousarray(edge_loss_a, dtype=np.float64)
    k1_a = np.full(n_nodes, np.inf)
    dist_a = np.full(n_nodes, np.inf)
    loss_a = np.full(n_nodes, np.inf)
    pred_a = np.full(n_nodes, -1, dtype=np.int64)
    hops_a = np.zeros(n_nodes, dtype=np.int64)
    queued_a = np.zeros(n_nodes, dtype=np.uint8)
    ring_a = np.zeros(n_nodes, dtype=np.int64)
    cdef double[::1] k1 = k1_a, dist = dist_a, loss = loss_a
    cdef long long[::1] pred = pred_a, hops = hops_a, ring = ring_a
    cdef unsigned char[::1] queued = queued_a
    cdef Py_ssize_t head = 0, size = 1, v, w, k
    cdef double c1, cd, cl
    cdef bint negative = False
    k1[0] = 0.0
    dist[0] = 0.0
    loss[0] = 0.0
    ring[0] = 0
    queued[0] = 1
    with nogil:
        while size > 0 and not negative:
            v = ring[head]
            head = (head + 1) % n_nodes
            size -= 1
            queued[v] = 0
            for k in range(indptr[v], indptr[v + 1]):
                w = edge_dst[k]
                c1 = k1[v] + edge_w1[k]
                cd = dist[v] + edge_dist[k]
                cl = loss[v] + edge_loss[k]
                if key_less(c1, cl if inf_mode else cd, k1[w], loss[w] if inf_mode else dist[w]):
                    k1[w] = c1
                    dist[w] = cd
                    loss[w] = cl
                    pred[w] = k
                    hops[w] = hops[v] + 1
                    if hops[w] >= n_nodes:
                        negative = True
                        break
                    if not queued[w]:
                        queued[w] = 1
                        ring[(head + size) % n_nodes] = w
                        size += 1
    return {"k1": k1_a, "dist": dist_a, "loss": loss_a, "pred": pred_a,
            "negative_cycle": bool(negative)}
