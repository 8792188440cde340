"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--cells 10] [--repeat 3]

Both backends run on identical inputs; the script also checks that their
outputs match before reporting timings.
"""

import argparse
import time

import numpy as np

from dompath import _pykernels, build_g1, build_g2_explicit, generate_maze, kernels
from dompath.experiments import measurement_grid
from dompath.psp import hybrid_weights
from dompath.smoothed import perturb_weights


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(cells: int):
    plan = generate_maze(0, cells=cells)
    points, _ = measurement_grid(plan, 1.0)
    source = points[len(points) // 2]
    g1 = build_g1(plan, source, np.delete(points, len(points) // 2, axis=0))
    g2 = build_g2_explicit(g1)
    pos = plan.corner_pos
    lam = 1.0
    st = g1.sockets()
    t = st.tables
    nc, nt = g1.n_corners, g1.n_dests
    w1 = hybrid_weights(g1.edge_dist, g1.edge_pen, lam)
    imp_args = (nc, g1.edge_src, g1.edge_dst, w1, g1.edge_dist, g1.edge_pen, st.head,
                st.in_sec, st.out_ptr, st.out_edges, st.out_head, st.out_sector, st.run_ccw,
                st.run_cw, t.sector_off, t.n_sectors, t.pen_flat, t.k_rad, g1.source_edges,
                False, np.ones(nc, np.uint8), np.ones(nt, np.uint8), np.zeros(nc),
                np.full(nt, np.inf), -1)
    w2 = hybrid_weights(g2.dist, g2.loss, lam)
    rng = np.random.default_rng(0)
    pd, pl = perturb_weights(g2.dist, g2.loss, 1e-4, rng)
    pw = hybrid_weights(pd, pl, lam)

    yield ("segment_table", f"{len(pos)}x{len(pos)} corners",
           lambda k: k.segment_table(pos, pos, plan.wall_a, plan.wall_b, plan.wall_pen, pos),
           lambda o: o[1])
    yield ("implicit_sp", f"{g1.n_edges} G1 edges",
           lambda k: k.implicit_sp(*imp_args),
           lambda o: o["t_k1"])
    yield ("explicit_sp", f"{g2.n_edges} G2 edges",
           lambda k: k.explicit_sp(g2.n_nodes, g2.indptr, g2.dst, w2, g2.dist, g2.loss, False,
                                   np.ones(g2.n_nodes, np.uint8), -1),
           lambda o: o["k1"])
    yield ("label_correcting_sp", f"{g2.n_edges} G2 edges, perturbed",
           lambda k: k.label_correcting_sp(g2.n_nodes, g2.indptr, g2.dst, pw, pd, pl, False),
           lambda o: o["k1"])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=10, help="maze size in cells per side")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        raise SystemExit("compiled extension not available; run setup.py build_ext --inplace")
    print(f"{'kernel':<22}{'input':<28}{'cython s':>10}{'python s':>10}{'speedup':>9}")
    for name, size, call, key in cases(args.cells):
        fast_t, fast = best_of(lambda: call(kernels), args.repeat)
        slow_t, slow = best_of(lambda: call(_pykernels), args.repeat)
        if not np.array_equal(key(fast), key(slow)):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<22}{size:<28}{fast_t:>10.4f}{slow_t:>10.4f}{slow_t / fast_t:>8.1f}x")


if __name__ == "__main__":
    main()
