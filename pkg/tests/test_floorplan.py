import json
import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dompath import (Floorplan, FloorplanError, Point, ValidationError, Wall,
                     deflection_angle, generate_maze, generate_office, parse_floorplan,
                     segment_penetration)
from dompath.floorplan import EPS_GEO


def _doc(walls, **top):
    return json.dumps({"name": "t", "walls": walls, **top})


def _wall(a, b, pen=2.0, k=0.0):
    return {"a": list(a), "b": list(b), "penetration_db": pen, "diffraction_db_per_90deg": k}


# -- parsing -----------------------------------------------------------------

def test_one_wall_two_corners():
    plan = parse_floorplan(_doc([_wall((0, 0), (4, 0))]))
    assert len(plan.walls) == 1
    assert len(plan.corners) == 2


def test_shared_endpoint_dedup():
    plan = parse_floorplan(_doc([_wall((0, 0), (4, 0)), _wall((4, 0), (4, 3))]))
    assert len(plan.corners) == 3
    shared = [c for c in plan.corners if c.position == Point(4.0, 0.0)]
    assert len(shared) == 1 and len(shared[0].incident_walls) == 2


def test_nearly_coincident_endpoints_merge():
    plan = parse_floorplan(_doc([_wall((0, 0), (4, 0)), _wall((4 + 1e-12, 0), (4, 3))]))
    assert len(plan.corners) == 3


def test_defaults_and_constants():
    plan = parse_floorplan(_doc([_wall((0, 0), (1, 0))]))
    c = plan.constants
    assert (c.freespace_exponent, c.reference_loss_db, c.reference_distance) == (2.0, 40.0, 1.0)
    assert plan.alpha == pytest.approx(20 / math.log(10))


def test_roundtrip_json():
    plan = generate_maze(3, cells=4)
    again = parse_floorplan(plan.to_json())
    assert again.walls == plan.walls
    assert again.name == plan.name


@pytest.mark.parametrize("text", [
    "{not json",
    json.dumps([]),
    json.dumps({"walls": [], "colour": "red"}),
    json.dumps({"walls": [{**_wall((0, 0), (1, 0)), "height": 3}]}),
    json.dumps({"walls": [{"a": [0, 0], "b": [1, 0]}]}),
    json.dumps({"walls": [_wall((0, 0), (1, "x"))]}),
    json.dumps({"walls": "none"}),
])
def test_malformed_documents(text):
    with pytest.raises(FloorplanError):
        parse_floorplan(text)


@pytest.mark.parametrize("wall", [
    _wall((0, 0), (1, 0), pen=-1.0),
    _wall((0, 0), (1, 0), k=-0.5),
    _wall((2, 2), (2, 2)),
])
def test_invalid_content(wall):
    with pytest.raises(ValidationError):
        parse_floorplan(_doc([wall]))


def test_bad_json_reports_position():
    with pytest.raises(FloorplanError, match="line 1 column"):
        parse_floorplan('{"walls": [,]}')


def test_overlapping_colinear_walls_rejected():
    with pytest.raises(ValidationError):
        parse_floorplan(_doc([_wall((0, 0), (4, 0)), _wall((0, 0), (2, 0))]))


def test_wall_split_at_interior_endpoint():
    # the T-junction splits the long wall so (2, 0) is a corner of both halves
    plan = parse_floorplan(_doc([_wall((0, 0), (4, 0)), _wall((2, 0), (2, 3))]))
    assert len(plan.walls) == 3
    tee = [c for c in plan.corners if c.position == Point(2.0, 0.0)][0]
    assert len(tee.incident_walls) == 3


def test_corner_diffraction_takes_max():
    plan = parse_floorplan(_doc([_wall((0, 0), (4, 0), k=5.0), _wall((4, 0), (4, 3), k=9.0)]))
    shared = [c for c in plan.corners if c.position == Point(4.0, 0.0)][0]
    assert shared.diffraction_db_per_rad == pytest.approx(9.0 / (math.pi / 2))


# -- generators ----------------------------------------------------------------

def test_maze_counts():
    plan = generate_maze(0)
    assert (len(plan.corners), len(plan.walls)) == (441, 441)


def _interior_walls(plan, cells, size):
    top = cells * size
    return [w for w in plan.walls
            if not (w.a[0] == w.b[0] in (0.0, top) or w.a[1] == w.b[1] in (0.0, top))]


def test_two_by_two_maze_has_one_interior_wall():
    # the 2x2 grid graph has 4 edges; each spanning tree keeps 3 of them
    for seed in range(10):
        plan = generate_maze(seed, cells=2)
        assert len(_interior_walls(plan, 2, 3.0)) == 1
        assert len(plan.walls) == 1 + 8


def test_maze_deterministic():
    assert generate_maze(42, cells=6).walls == generate_maze(42, cells=6).walls
    assert generate_maze(42, cells=6).walls != generate_maze(43, cells=6).walls


def _flood(plan, cells, size):
    walls = {frozenset((tuple(w.a), tuple(w.b))) for w in plan.walls}
    seen = {(0, 0)}
    todo = deque(seen)
    while todo:
        i, j = todo.popleft()
        steps = [((i + 1, j), ((i + 1) * size, j * size), ((i + 1) * size, (j + 1) * size)),
                 ((i - 1, j), (i * size, j * size), (i * size, (j + 1) * size)),
                 ((i, j + 1), (i * size, (j + 1) * size), ((i + 1) * size, (j + 1) * size)),
                 ((i, j - 1), (i * size, j * size), ((i + 1) * size, j * size))]
        for cell, p, q in steps:
            if not (0 <= cell[0] < cells and 0 <= cell[1] < cells) or cell in seen:
                continue
            if frozenset((p, q)) in walls:
                continue
            seen.add(cell)
            todo.append(cell)
    return len(seen)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), cells=st.integers(2, 9))
def test_maze_connected_and_tree_like(seed, cells):
    plan = generate_maze(seed, cells=cells)
    assert _flood(plan, cells, 3.0) == cells * cells
    # interior walls = grid edges not in the spanning tree
    assert len(_interior_walls(plan, cells, 3.0)) == 2 * cells * (cells - 1) - (cells * cells - 1)


def test_office_counts():
    plan = generate_office(12, 20)
    assert (len(plan.corners), len(plan.walls)) == (418, 658)
    lo, hi = plan.bounding_box
    assert (hi.x - lo.x, hi.y - lo.y) == (62.0, 60.0)
    assert {w.penetration_db for w in plan.walls} == {2.0, 15.0}


def test_office_minimal():
    plan = generate_office(1, 1)
    assert len(plan.walls) >= 4
    assert sum(w.penetration_db == 15.0 for w in plan.walls) >= 4


@pytest.mark.parametrize("bad", [dict(seed=0, cells=1)])
def test_maze_rejects_tiny(bad):
    with pytest.raises(ValueError):
        generate_maze(**bad)


def test_corner_dedup_distance():
    plan = generate_office(4, 6)
    pos = plan.corner_pos
    d = np.hypot(pos[:, None, 0] - pos[None, :, 0], pos[:, None, 1] - pos[None, :, 1])
    np.fill_diagonal(d, np.inf)
    assert d.min() > EPS_GEO


# -- segment penetration ---------------------------------------------------------

def _plan(*walls):
    return Floorplan([Wall(Point(*a), Point(*b), pen) for a, b, pen in walls])


def test_single_crossing():
    plan = _plan(((1, -1), (1, 1), 2.0))
    assert segment_penetration((0, 0), (2, 0), plan) == (2.0, [0])


def test_endpoint_touch_is_free():
    plan = _plan(((1, 0), (1, 1), 2.0))
    assert segment_penetration((0, 0), (2, 0), plan)[0] == 0.0


def test_three_parallel_walls():
    plan = _plan(((1, -1), (1, 1), 2.0), ((2, -1), (2, 1), 6.0), ((3, -1), (3, 1), 7.0))
    total, crossed = segment_penetration((0, 0), (4, 0), plan)
    assert total == 15.0 and sorted(crossed) == [0, 1, 2]


def test_colinear_overlap_is_free():
    plan = _plan(((0, 0), (4, 0), 9.0))
    assert segment_penetration((1, 0), (3, 0), plan)[0] == 0.0


def test_degenerate_segment_rejected():
    with pytest.raises(ValueError):
        segment_penetration((1, 1), (1, 1), _plan(((0, 0), (4, 0), 2.0)))


coord = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10**6), a=st.tuples(coord, coord), b=st.tuples(coord, coord))
def test_penetration_symmetric(seed, a, b):
    if math.dist(a, b) < 1e-6:
        return
    rng = np.random.default_rng(seed)
    walls = [Wall(Point(*rng.uniform(-10, 10, 2)), Point(*rng.uniform(-10, 10, 2)),
                  float(rng.uniform(0, 20))) for _ in range(6)]
    plan = Floorplan(walls)
    assert segment_penetration(a, b, plan)[0] == segment_penetration(b, a, plan)[0]


# -- deflection --------------------------------------------------------------------

def test_deflection_examples():
    assert deflection_angle((1, 0), (1, 0)) == 0.0
    assert deflection_angle((1, 0), (0, 1)) == pytest.approx(math.pi / 2)
    assert deflection_angle((0.6, 0.8), (-0.6, -0.8)) == pytest.approx(math.pi)


def test_deflection_zero_vector():
    with pytest.raises(ValueError):
        deflection_angle((0, 0), (1, 0))


angle = st.floats(0, 2 * math.pi)


@given(a=angle, b=angle)
def test_deflection_symmetric_and_bounded(a, b):
    u, v = (math.cos(a), math.sin(a)), (math.cos(b), math.sin(b))
    x = deflection_angle(u, v)
    assert x == deflection_angle(v, u)
    assert 0.0 <= x <= math.pi
