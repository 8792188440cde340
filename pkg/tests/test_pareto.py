import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dompath import build_g1, build_g2_explicit, generate_maze
from dompath.hull import obj
from dompath.pareto import (ParetoConfig, bucket, g2_from_edges, pareto_for_dest, restrict_g1,
                            run_pareto)

import oracles

A = 8.686


def test_bucket_rule():
    assert bucket(0.0, 0.5) == 0
    assert bucket(1e-12, 0.5) == 1
    assert bucket(0.5, 0.5) == 1
    assert bucket(0.51, 0.5) == 2


def test_single_edge():
    res = run_pareto(g2_from_edges([0], [1], [5.0], [2.0]), 0, 0.1, A)
    assert (res.path.dist, res.path.loss) == (5.0, 2.0)
    assert res.obj == pytest.approx(2 + A * math.log(5))
    assert res.stats.rounds == 1 and res.stats.delta == 0.1


def test_parallel_edges_pick_lowest_obj():
    g2 = g2_from_edges([0, 0], [1, 1], [3.0, 10.0], [2.0, 0.0])
    res = run_pareto(g2, 0, 100.0, A)
    assert (res.path.dist, res.path.loss) == (3.0, 2.0)


def test_coarse_bucket_keeps_shorter():
    # both losses land in bucket 1 when delta = 5, so only the 3 m edge survives
    g2 = g2_from_edges([0, 0], [1, 1], [3.0, 4.0], [4.9, 0.1])
    coarse = run_pareto(g2, 0, 5.0, A)
    fine = run_pareto(g2, 0, 1.0, A)
    assert coarse.path.dist == 3.0 and fine.path.dist == 4.0
    assert 0 < coarse.obj - fine.obj <= 5.0


def test_two_hop_beats_direct():
    g2 = g2_from_edges([0, 0, 2], [1, 2, 1], [10.0, 1.0, 1.0], [0.0, 3.0, 3.0])
    res = run_pareto(g2, 0, 1e-3, A)
    assert res.g2_edges == (1, 2) and res.path.dist == 2.0
    assert res.obj == pytest.approx(6 + A * math.log(2))


@pytest.mark.parametrize("eps", [0.0, -1.0])
def test_bad_epsilon(eps):
    with pytest.raises(ValueError):
        run_pareto(g2_from_edges([0], [1], [5.0], [2.0]), 0, eps, A)
    with pytest.raises(ValueError):
        ParetoConfig(eps, 4)


def test_unreachable():
    with pytest.raises(ValueError):
        run_pareto(g2_from_edges([0], [1], [1.0], [0.0], n_dests=2), 1, 0.1, A)


def _instance(seed):
    rng = np.random.default_rng(seed)
    walls = oracles.random_walls(rng, max_walls=4, max_corners=5)
    s, t = (oracles.random_free_point(rng, walls) for _ in range(2))
    return walls, s, t


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), eps=st.sampled_from([0.1, 1.0, 5.0]))
def test_epsilon_guarantee(seed, eps):
    walls, s, t = _instance(seed)
    g1 = build_g1(oracles.to_plan(walls), s, [t])
    g2 = build_g2_explicit(g1)
    geo = oracles.Geometry(walls)
    best = oracles.best_obj(geo, s, t, g1.plan.alpha)
    res = run_pareto(g2, 0, eps, g1.plan.alpha)
    assert best - 1e-9 <= res.obj <= best + eps + 1e-9
    assert res.stats.width_bound_ok
    # the reported path is a real one with the reported cost
    pts = [tuple(g1.node_pos[n]) for n in res.path.nodes]
    sides = [oracles.side_sign(g1.edge_side[e]) for e in res.path.g1_edges]
    d, loss = oracles.path_cost(geo, pts, sides)
    assert d == pytest.approx(res.path.dist, rel=1e-9)
    assert loss == pytest.approx(res.path.loss, rel=1e-9, abs=1e-9)
    assert res.obj == pytest.approx(obj(d, loss, g1.plan.alpha), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), eps=st.sampled_from([0.1, 1.0, 5.0]))
def test_obj_by_round_rises_by_less_than_delta(seed, eps):
    # a bucket keeps its shortest entry, which can cost up to delta more loss
    walls, s, t = _instance(seed)
    g1 = build_g1(oracles.to_plan(walls), s, [t])
    res = run_pareto(build_g2_explicit(g1), 0, eps, g1.plan.alpha)
    seq = res.stats.obj_by_round
    for k in range(1, len(seq)):
        assert seq[k] <= min(seq[:k]) + res.stats.delta + 1e-9
    assert res.obj == pytest.approx(seq[-1])


def _random_digraph(rng, n=6, m=14):
    src = rng.integers(0, n, m)
    dst = rng.integers(1, n, m)
    keep = src != dst
    src, dst = src[keep], dst[keep]
    return src, dst, rng.uniform(0.5, 10, len(src)), rng.choice([0.0, 2.0, 5.0, 15.0], len(src))


def _best_simple_path(src, dst, dist, loss, alpha):
    best = math.inf

    def walk(u, seen, d, l):
        nonlocal best
        if u == 1:
            best = min(best, obj(d, l, alpha))
            return
        for k in np.flatnonzero(src == u):
            if dst[k] not in seen:
                walk(dst[k], seen | {dst[k]}, d + dist[k], l + loss[k])
    walk(0, {0}, 0.0, 0.0)
    return best


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31), eps=st.sampled_from([0.5, 2.0, 10.0]),
       dominance=st.booleans())
def test_small_digraphs_against_enumeration(seed, eps, dominance):
    rng = np.random.default_rng(seed)
    src, dst, dist, loss = _random_digraph(rng)
    best = _best_simple_path(src, dst, dist, loss, A)
    g2 = g2_from_edges(src, dst, dist, loss)
    if math.isinf(best):
        with pytest.raises(ValueError):
            run_pareto(g2, 0, eps, A, dominance=dominance)
        return
    res = run_pareto(g2, 0, eps, A, dominance=dominance)
    assert best - 1e-9 <= res.obj <= best + eps + 1e-9
    assert res.stats.width_bound_ok


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_dominance_pruning_shrinks_tables(seed):
    src, dst, dist, loss = _random_digraph(np.random.default_rng(seed))
    g2 = g2_from_edges(src, dst, dist, loss)
    try:
        a = run_pareto(g2, 0, 1.0, A, dominance=True)
    except ValueError:
        return
    b = run_pareto(g2, 0, 1.0, A, dominance=False)
    assert a.stats.entries <= b.stats.entries


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), eps=st.sampled_from([0.1, 1.0]))
def test_restricted_graph_keeps_the_guarantee(seed, eps):
    walls, s, t = _instance(seed)
    g1 = build_g1(oracles.to_plan(walls), s, [t])
    best = oracles.best_obj(oracles.Geometry(walls), s, t, g1.plan.alpha)
    res = pareto_for_dest(g1, 0, eps)
    assert best - 1e-9 <= res.obj <= best + eps + 1e-9
    assert res.stats.g2_nodes <= build_g2_explicit(g1).n_nodes


def test_restrict_drops_far_corners():
    g1 = build_g1(generate_maze(0, cells=6), (1.5, 1.5), [(4.5, 1.5), (16.5, 16.5)])
    sub = restrict_g1(g1, 0, 3.0)
    assert sub.n_corners == g1.n_corners and sub.n_nodes == g1.n_nodes
    used = set(sub.edge_src.tolist()) | set(sub.edge_dst.tolist())
    assert g1.dest_node(1) not in used
    pos = sub.node_pos[sorted(used)]
    span = np.hypot(*(pos - (1.5, 1.5)).T) + np.hypot(*(pos - (4.5, 1.5)).T)
    assert span.max() <= 3.0 + 1e-6
